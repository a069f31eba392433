use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};
use gray_holonomy::algebra::rng_from_seed;
use gray_holonomy::fields::cube::{bigon, good_three_path, sphere, straight_path};
use gray_holonomy::fields::triple::{adjoint_recipe, flat_recipe};
use gray_holonomy::holonomy::{path_holonomy, surface_holonomy, volume_holonomy, Resolution};
use gray_holonomy::instances::{make_adjoint, make_chain_complex, random_boundaries};
use gray_holonomy::{
    check_two_crossed_axioms, verify_gray_axioms, GroupSpec, Module, TwoCrossedModule,
};

fn axioms(c: &mut Criterion) {
    let h = make_adjoint(GroupSpec::general_linear(2).unwrap()).unwrap();
    c.bench_function("axioms/adjoint_gl2_200", |b| {
        b.iter(|| check_two_crossed_axioms(h.as_ref(), 200, black_box(1), 1e-9))
    });
    let m: Module = h.clone();
    c.bench_function("gray/adjoint_gl2_100", |b| {
        b.iter(|| verify_gray_axioms(&m, 100, black_box(1), 1e-9))
    });
}

fn holonomy(c: &mut Criterion) {
    let h = make_adjoint(GroupSpec::general_linear(2).unwrap()).unwrap();
    let t = adjoint_recipe(h.clone(), 3, 2, 0.5, 1).unwrap();
    let p = straight_path(&[0.0, 0.1, 0.2], &[0.7, 0.4, 0.5]).unwrap();
    c.bench_function("path/r1_n256", |b| {
        b.iter(|| path_holonomy(h.g(), &t.omega, p.as_ref(), 0.0, 1.0, black_box(256)).unwrap())
    });
    let s = bigon(3, 2).unwrap();
    c.bench_function("surface/r1_n32", |b| {
        b.iter(|| surface_holonomy(h.as_ref(), &t.omega, &t.m, s.as_ref(), 32, black_box(32)).unwrap())
    });

    let dims = [2, 3, 2];
    let bd = random_boundaries(&dims, Some(1), &mut rng_from_seed(3));
    let chain = make_chain_complex(&dims, &bd).unwrap();
    let t2 = flat_recipe(chain, 3, 2, 0.5, 4).unwrap();
    let j = good_three_path(3, 3).unwrap();
    let mut g = c.benchmark_group("volume");
    g.sample_size(10);
    g.bench_function("r2_n16", |b| {
        b.iter(|| volume_holonomy(&t2, j.as_ref(), Resolution::uniform(black_box(16))).unwrap())
    });
    let t4 = adjoint_recipe(h, 4, 2, 0.5, 1).unwrap();
    let sp = sphere();
    g.bench_function("sphere_r1_n8", |b| {
        b.iter(|| volume_holonomy(&t4, sp.as_ref(), Resolution::uniform(black_box(8))).unwrap())
    });
    g.finish();
}

criterion_group!(benches, axioms, holonomy);
criterion_main!(benches);
