use gray_holonomy::algebra::rng_from_seed;
use gray_holonomy::fields::cube::{
    bigon, concat, good_three_path, random_path, reverse, straight_path, Jet,
};
use gray_holonomy::fields::triple::adjoint_recipe;
use gray_holonomy::holonomy::{
    convergence, path_holonomy, surface_holonomy, twisted_integral_mm, twisted_integral_theta,
    volume_holonomy, wilson_sphere, ConvergenceFamily, Resolution, WilsonOptions,
};
use gray_holonomy::instances::{make_adjoint, make_chain_complex, random_boundaries};
use gray_holonomy::linalg::{dist, dist_identity, expm};
use gray_holonomy::{
    Cube, CubeMap, Error, FormField, FormTriple, GroupSpec,
    LieTwoCrossedModule, Mat,
};

fn chain_triple(seed: u64) -> FormTriple {
    let mut rng = rng_from_seed(seed);
    let b = random_boundaries(&[2, 3, 2], Some(1), &mut rng);
    let h = make_chain_complex(&[2, 3, 2], &b).unwrap();
    let alg = h.algebra();
    let omega = FormField::random(3, 1, alg.basis_g(), 1, 0.5, &mut rng).unwrap();
    let m = FormField::random(3, 2, alg.basis_e(), 1, 0.5, &mut rng).unwrap();
    let theta = FormField::random(3, 3, alg.basis_l(), 1, 0.5, &mut rng).unwrap();
    FormTriple::new(h, omega, m, theta, "test").unwrap()
}

/// Reference values along the t-line of a 3-cube at `(s, x)`, built with
/// the exponential midpoint rule and trapezoids. Every piece has an error
/// expansion in even powers of `1/n`, so one Richardson step gives fourth
/// order.
struct Line {
    theta: Mat,
    mm: Mat,
}

fn line(t: &FormTriple, j: &dyn CubeMap, s: f64, x: f64, n: usize) -> Line {
    let h = t.module.as_ref();
    let alg = h.algebra();
    let dt = 1.0 / n as f64;
    let mut jet = Jet::new(3, j.d());
    let mut g = h.g().identity();
    let mut q_s = Vec::new();
    let mut q_x = Vec::new();
    let mut y = Vec::new();
    for k in 0..=n {
        let tk = k as f64 * dt;
        j.jet_into(&[tk, s, x], &mut jet);
        let (c0, c1, c2) = (jet.col(0).to_vec(), jet.col(1).to_vec(), jet.col(2).to_vec());
        q_s.push(h.act_e_alg(&g, &t.m.eval(&jet.x, &[&c0, &c1])).unwrap());
        q_x.push(h.act_e_alg(&g, &t.m.eval(&jet.x, &[&c0, &c2])).unwrap());
        y.push(h.act_l_alg(&g, &t.theta.eval(&jet.x, &[&c0, &c1, &c2])).unwrap());
        if k < n {
            j.jet_into(&[tk + 0.5 * dt, s, x], &mut jet);
            let a = t.omega.eval(&jet.x, &[jet.col(0)]);
            g = &g * expm(&(a * dt));
        }
    }
    let trap = |f: &[Mat]| -> Mat {
        let mut acc = (&f[0] + &f[n]) * 0.5;
        for fi in &f[1..n] {
            acc += fi;
        }
        acc * dt
    };
    let prefix = |f: &[Mat]| -> Vec<Mat> {
        let mut out = vec![&f[0] * 0.0];
        for k in 0..n {
            let next = &out[k] + (&f[k] + &f[k + 1]) * (0.5 * dt);
            out.push(next);
        }
        out
    };
    let (p_s, p_x) = (prefix(&q_s), prefix(&q_x));
    let integrand: Vec<Mat> = (0..=n)
        .map(|k| alg.lifting(&p_s[k], &q_x[k]) - alg.lifting(&p_x[k], &q_s[k]))
        .collect();
    Line {
        theta: trap(&y),
        mm: trap(&integrand),
    }
}

fn richardson(t: &FormTriple, j: &dyn CubeMap, s: f64, x: f64, n: usize) -> Line {
    let a = line(t, j, s, x, n);
    let b = line(t, j, s, x, 2 * n);
    Line {
        theta: (b.theta * 4.0 - a.theta) / 3.0,
        mm: (b.mm * 4.0 - a.mm) / 3.0,
    }
}

#[test]
fn twisted_integrals_match_the_reference() {
    let t = chain_triple(1);
    let j = good_three_path(3, 2).unwrap();
    for (s, x) in [(0.3, 0.6), (0.5, 0.5), (0.7, 0.35)] {
        let want = richardson(&t, j.as_ref(), s, x, 1024);
        let theta = twisted_integral_theta(&t, j.as_ref(), s, x, 256).unwrap();
        let mm = twisted_integral_mm(&t, j.as_ref(), s, x, 256).unwrap();
        assert!(
            want.theta.norm() > 1e-3 && want.mm.norm() > 1e-4,
            "{} {}",
            want.theta.norm(),
            want.mm.norm()
        );
        assert!(dist(&theta, &want.theta) <= 1e-10, "{}", dist(&theta, &want.theta));
        assert!(dist(&mm, &want.mm) <= 1e-8, "{}", dist(&mm, &want.mm));
    }
}

#[test]
fn path_holonomy_is_multiplicative() {
    let t = chain_triple(2);
    let g = t.module.g();
    let mut rng = rng_from_seed(3);
    let mid = [0.6, -0.3, 0.5];
    let p = random_path(&[0.0, 0.1, 0.2], &mid, 0.4, &mut rng).unwrap();
    let q = random_path(&mid, &[-0.2, 0.4, 0.1], 0.4, &mut rng).unwrap();
    let pq = concat(p.clone(), q.clone(), 0).unwrap();
    let hol = |c: &Cube, n: usize| path_holonomy(g, &t.omega, c.as_ref(), 0.0, 1.0, n).unwrap();
    let whole = hol(&pq, 128);
    // aligned grids: each half of the composite sees the same nodes
    let r = dist(&whole.value, &(&hol(&p, 64).value * &hol(&q, 64).value));
    assert!(r <= 1e-9, "{r}");
    // unaligned: limited by integration error
    let r = dist(&whole.value, &(&hol(&p, 128).value * &hol(&q, 128).value));
    assert!(r <= 1e-6, "{r}");

    let back = hol(&reverse(pq.clone(), 0).unwrap(), 128);
    assert!(dist_identity(&(&whole.value * &back.value)) <= 1e-6);
    assert!(whole.drift < 1e-12);

    // splitting the parameter interval
    let a = path_holonomy(g, &t.omega, pq.as_ref(), 0.0, 0.5, 64).unwrap();
    let b = path_holonomy(g, &t.omega, pq.as_ref(), 0.5, 1.0, 64).unwrap();
    assert!(dist(&whole.value, &(&a.value * &b.value)) <= 1e-9);
}

#[test]
fn path_holonomy_of_a_constant_form_is_an_exponential() {
    let g = GroupSpec::general_linear(3).unwrap();
    let a = g.sample_algebra(&mut rng_from_seed(4));
    let omega = FormField::constant_one_form(&[a.clone(), a.clone() * 0.0]).unwrap();
    let gamma = straight_path(&[0.0, 0.0], &[1.0, 2.0]).unwrap();
    let r = path_holonomy(&g, &omega, gamma.as_ref(), 0.0, 1.0, 256).unwrap();
    let err = dist(&r.value, &expm(&a));
    assert!(err < 1e-9, "{err}");
    let study = convergence(
        &ConvergenceFamily::ConstExp { dim: 3, seed: 4 },
        &[8, 16, 32, 64, 128, 256],
    )
    .unwrap();
    assert!(study.order >= 3.5, "{:?}", study);
}

#[test]
fn trivial_forms_give_trivial_holonomies() {
    let t = chain_triple(5);
    let h = t.module.clone();
    let [sg, se, sl] = h.algebra().shapes();
    let zero = FormTriple::new(
        h.clone(),
        FormField::zero(3, 1, sg),
        FormField::zero(3, 2, se),
        FormField::zero(3, 3, sl),
        "zero",
    )
    .unwrap();
    let b = bigon(3, 1).unwrap();
    let j = good_three_path(3, 1).unwrap();
    let e = surface_holonomy(h.as_ref(), &zero.omega, &zero.m, b.as_ref(), 8, 8).unwrap();
    assert!(dist_identity(&e.e.value) == 0.0);
    let l = volume_holonomy(&zero, j.as_ref(), Resolution::uniform(8)).unwrap();
    assert!(dist_identity(&l.l.value) == 0.0);
    // m = 0 with omega nonzero still gives e = 1
    let e = surface_holonomy(h.as_ref(), &t.omega, &zero.m, b.as_ref(), 8, 8).unwrap();
    assert!(dist_identity(&e.e.value) < 1e-15);
}

#[test]
fn adjoint_l_is_trivial_for_the_first_recipe() {
    let h = make_adjoint(GroupSpec::general_linear(2).unwrap()).unwrap();
    let t = adjoint_recipe(h, 3, 2, 0.6, 1).unwrap();
    let j = good_three_path(3, 3).unwrap();
    let l = volume_holonomy(&t, j.as_ref(), Resolution::uniform(8)).unwrap();
    assert!(dist_identity(&l.l.value) < 1e-14);
    assert!(dist_identity(&l.e_start) > 1e-3);
}

#[test]
fn non_spheres_are_rejected() {
    let t = chain_triple(6);
    let mut rng = rng_from_seed(1);
    let b = random_boundaries(&[2, 3, 2], Some(1), &mut rng);
    let h = make_chain_complex(&[2, 3, 2], &b).unwrap();
    let alg = h.algebra();
    let omega = FormField::random(4, 1, alg.basis_g(), 1, 0.5, &mut rng).unwrap();
    let m = FormField::random(4, 2, alg.basis_e(), 1, 0.5, &mut rng).unwrap();
    let theta = FormField::random(4, 3, alg.basis_l(), 1, 0.5, &mut rng).unwrap();
    let t4 = FormTriple::new(h, omega, m, theta, "test").unwrap();
    let j: Cube = good_three_path(4, 2).unwrap();
    let r = wilson_sphere(&t4, j, Resolution::uniform(4), &WilsonOptions::default());
    assert!(matches!(r, Err(Error::NotASphereMap(_))));
    let wrong = bigon(3, 1).unwrap();
    let r = volume_holonomy(&t, wrong.as_ref(), Resolution::uniform(4));
    assert!(matches!(r, Err(Error::DimensionMismatch(_))));
}
