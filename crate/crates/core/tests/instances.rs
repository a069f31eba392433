use std::sync::Arc;

use gray_holonomy::algebra::{rng_from_seed, Rng};
use gray_holonomy::instances::{
    make_adjoint, make_automorphism, make_chain_complex, random_boundaries, CrossedModuleData,
};
use gray_holonomy::linalg::{self, dist};
use gray_holonomy::{
    check_differential_axioms, Error, GroupSpec,
    LieTwoCrossedModule, Mat, TwoCrossedModule,
};

fn chain(dims: &[usize], seed: u64) -> Arc<dyn LieTwoCrossedModule> {
    let mut rng = rng_from_seed(seed);
    let b = random_boundaries(dims, Some(1), &mut rng);
    make_chain_complex(dims, &b).unwrap()
}

fn modules() -> Vec<Arc<dyn LieTwoCrossedModule>> {
    vec![
        make_adjoint(GroupSpec::general_linear(2).unwrap()).unwrap(),
        make_adjoint(GroupSpec::special_orthogonal(3).unwrap()).unwrap(),
        chain(&[2, 3, 2], 3),
        chain(&[1, 2, 2], 4),
    ]
}

fn sample(basis: &[Mat], rng: &mut Rng) -> Mat {
    use rand::RngExt;
    let mut m = basis[0].clone() * 0.0;
    for b in basis {
        m += b * rng.random_range(-1.0..=1.0);
    }
    m
}

#[test]
fn differential_adjoint_and_chain_algebras() {
    for h in modules() {
        let r = check_differential_axioms(h.algebra(), 200, 1, 1e-9);
        assert!(r.pass(), "{}: {:?}", h.name(), r.failures());
    }
}

#[test]
fn differential_automorphism_of_gl2() {
    let basis = GroupSpec::general_linear(2).unwrap().basis().to_vec();
    let a = make_automorphism(CrossedModuleData::identity_adjoint(&basis)).unwrap();
    let r = check_differential_axioms(&a, 200, 2, 1e-9);
    assert!(r.pass(), "{:?}", r.failures());
}

#[test]
fn differential_automorphism_of_an_abelian_crossed_module() {
    let d = Mat::from_row_slice(2, 3, &[1.0, 0.0, 2.0, 0.0, 1.0, -1.0]);
    let a = make_automorphism(CrossedModuleData::abelian(2, 3, d)).unwrap();
    let r = check_differential_axioms(&a, 200, 3, 1e-9);
    assert!(r.pass(), "{:?}", r.failures());
    let (g, e, l) = a.dims();
    assert!(g > 0 && e > 0 && l == 3);
}

// Central difference of a group-valued curve at 0, which lands in the
// Lie algebra in the same representation.
fn tangent(f: impl Fn(f64) -> Mat) -> Mat {
    let h = 1e-5;
    (f(h) - f(-h)) / (2.0 * h)
}

#[test]
fn algebra_maps_are_derivatives_of_group_maps() {
    let mut rng = rng_from_seed(10);
    for h in modules() {
        let alg = h.algebra();
        for _ in 0..5 {
            let g = h.g().sample(&mut rng);
            let e = h.e().sample(&mut rng);
            let u = sample(alg.basis_e(), &mut rng);
            let x = sample(alg.basis_l(), &mut rng);
            let a = sample(alg.basis_g(), &mut rng);

            let fd = tangent(|t| h.act_e(&g, &h.e().exp(&(&u * t))).unwrap());
            assert!(dist(&fd, &h.act_e_alg(&g, &u).unwrap()) < 1e-7, "{}", h.name());

            let fd = tangent(|t| h.act_l(&g, &h.l().exp(&(&x * t))).unwrap());
            assert!(dist(&fd, &h.act_l_alg(&g, &x).unwrap()) < 1e-7);

            let fd = tangent(|t| h.derived_action(&e, &h.l().exp(&(&x * t))).unwrap());
            assert!(dist(&fd, &h.derived_action_alg(&e, &x).unwrap()) < 1e-7);

            let fd = tangent(|t| h.partial(&h.e().exp(&(&u * t))));
            assert!(dist(&fd, &alg.partial(&u)) < 1e-7);

            let fd = tangent(|t| h.delta(&h.l().exp(&(&x * t))));
            assert!(dist(&fd, &alg.delta(&x)) < 1e-7);

            // infinitesimal action of g on e
            let fd = tangent(|t| h.act_e_alg(&h.g().exp(&(&a * t)), &u).unwrap());
            assert!(dist(&fd, &alg.act_e(&a, &u)) < 1e-6);
        }
    }
}

#[test]
fn algebra_lifting_is_mixed_second_derivative() {
    let mut rng = rng_from_seed(11);
    let k = 1e-4;
    for h in modules() {
        let alg = h.algebra();
        for _ in 0..5 {
            let u = sample(alg.basis_e(), &mut rng);
            let v = sample(alg.basis_e(), &mut rng);
            let l = |a: f64, b: f64| {
                h.lifting(&h.e().exp(&(&u * a)), &h.e().exp(&(&v * b))).unwrap()
            };
            let fd = (l(k, k) - l(k, -k) - l(-k, k) + l(-k, -k)) / (4.0 * k * k);
            let want = alg.lifting(&u, &v);
            assert!(dist(&fd, &want) < 1e-5, "{}: {}", h.name(), dist(&fd, &want));
        }
    }
}

#[test]
fn chain_complex_constructor_validates_input() {
    let b1 = Mat::from_row_slice(1, 1, &[1.0]);
    let b2 = Mat::from_row_slice(1, 1, &[1.0]);
    assert!(matches!(
        make_chain_complex(&[1, 1, 1], &[b1.clone(), b2]),
        Err(Error::NotAComplex(_))
    ));
    assert!(matches!(
        make_chain_complex(&[1, 1, 1, 1], &[b1.clone(), b1.clone(), b1.clone()]),
        Err(Error::LengthUnsupported(3))
    ));
    assert!(matches!(
        make_chain_complex(&[2, 1], &[b1]),
        Err(Error::DimensionMismatch(_))
    ));
}

#[test]
fn random_boundaries_form_a_complex() {
    let mut rng = rng_from_seed(12);
    for _ in 0..10 {
        let b = random_boundaries(&[2, 3, 2], None, &mut rng);
        assert!((&b[0] * &b[1]).norm() < 1e-12);
    }
}

#[test]
fn adjoint_pairs_round_trip() {
    let base = GroupSpec::general_linear(2).unwrap();
    let h = make_adjoint(base.clone()).unwrap();
    let mut rng = rng_from_seed(13);
    let a = base.sample(&mut rng);
    let b = base.sample(&mut rng);
    let (a2, b2) = h.unpair(&h.pair(&a, &b)).unwrap();
    assert!(dist(&a, &a2) < 1e-12 && dist(&b, &b2) < 1e-12);
    // delta is injective, so ker delta is trivial
    let l = base.sample(&mut rng);
    assert!(linalg::dist_identity(&h.delta(&l)) > 1e-3);
}
