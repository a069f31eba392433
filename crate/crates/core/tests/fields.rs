use std::sync::Arc;

use gray_holonomy::algebra::rng_from_seed;
use gray_holonomy::fields::cube::{
    bigon, concat, cube_from_json, face, good_three_path, interchange_cube, path_family,
    pullback, reverse, sphere, straight_path, Smoothing,
};
use gray_holonomy::fields::form::FormJson;
use gray_holonomy::fields::thin::{laminated_check, LaminatedParams};
use gray_holonomy::fields::triple::{adjoint_recipe, flat_recipe, flat_recipe_constant_m};
use gray_holonomy::fields::{thin_perturbations, ThinKind};
use gray_holonomy::instances::{make_adjoint, make_chain_complex, random_boundaries};
use gray_holonomy::linalg::dist;
use gray_holonomy::{Cube, CubeMap, Error, FormField, FormTriple, GroupSpec, Mat};
use proptest::prelude::*;

fn gl2_basis() -> Vec<Mat> {
    GroupSpec::general_linear(2).unwrap().basis().to_vec()
}

fn random_form(d: usize, k: usize, seed: u64) -> FormField {
    FormField::random(d, k, &gl2_basis(), 2, 1.0, &mut rng_from_seed(seed)).unwrap()
}

fn product(a: &Mat, b: &Mat) -> Mat {
    a * b
}

/// All permutations of `0..n` with their signs.
fn permutations(n: usize) -> Vec<(Vec<usize>, f64)> {
    if n == 0 {
        return vec![(vec![], 1.0)];
    }
    let mut out = Vec::new();
    for (p, s) in permutations(n - 1) {
        for pos in 0..n {
            let mut q = p.clone();
            q.insert(pos, n - 1);
            // inserting n-1 at pos passes n-1-pos larger positions
            let sign = if (n - 1 - pos) % 2 == 0 { s } else { -s };
            out.push((q, sign));
        }
    }
    out
}

fn factorial(n: usize) -> f64 {
    (1..=n).product::<usize>() as f64
}

fn random_vectors(d: usize, k: usize, seed: u64) -> Vec<Vec<f64>> {
    use rand::RngExt;
    let mut rng = rng_from_seed(seed);
    (0..k)
        .map(|_| (0..d).map(|_| rng.random_range(-1.0..=1.0)).collect())
        .collect()
}

#[test]
fn wedge_matches_the_permutation_sum() {
    let d = 4;
    for (p, q) in [(1, 1), (1, 2), (2, 1), (2, 2), (1, 3)] {
        let a = random_form(d, p, 10 + p as u64);
        let b = random_form(d, q, 20 + q as u64);
        let ab = a.wedge(&b, &product, (2, 2)).unwrap();
        let x = [0.3, -0.2, 0.5, 0.1];
        let vs = random_vectors(d, p + q, 30);
        let mut want = Mat::zeros(2, 2);
        for (perm, sign) in permutations(p + q) {
            let va: Vec<&[f64]> = perm[..p].iter().map(|&i| vs[i].as_slice()).collect();
            let vb: Vec<&[f64]> = perm[p..].iter().map(|&i| vs[i].as_slice()).collect();
            want += a.eval(&x, &va) * b.eval(&x, &vb) * sign;
        }
        want /= factorial(p) * factorial(q);
        let refs: Vec<&[f64]> = vs.iter().map(|v| v.as_slice()).collect();
        assert!(dist(&ab.eval(&x, &refs), &want) < 1e-12, "({p},{q})");
    }
}

/// `d alpha (v_0..v_k) = sum_i (-1)^i D_{v_i} alpha(v_0..^v_i..v_k)` for
/// constant vectors, by central differences.
#[test]
fn exterior_derivative_matches_finite_differences() {
    let d = 3;
    for k in 0..3 {
        let a = random_form(d, k, 40 + k as u64);
        let da = a.exterior_derivative();
        let x = [0.2, 0.7, -0.4];
        let vs = random_vectors(d, k + 1, 41);
        let h = 1e-5;
        let mut want = Mat::zeros(2, 2);
        for i in 0..=k {
            let rest: Vec<&[f64]> = (0..=k).filter(|&j| j != i).map(|j| vs[j].as_slice()).collect();
            let xp: Vec<f64> = x.iter().zip(&vs[i]).map(|(a, b)| a + h * b).collect();
            let xm: Vec<f64> = x.iter().zip(&vs[i]).map(|(a, b)| a - h * b).collect();
            let sign = if i % 2 == 0 { 1.0 } else { -1.0 };
            want += (a.eval(&xp, &rest) - a.eval(&xm, &rest)) * (sign / (2.0 * h));
        }
        let refs: Vec<&[f64]> = vs.iter().map(|v| v.as_slice()).collect();
        assert!(dist(&da.eval(&x, &refs), &want) < 1e-8, "k = {k}");
    }
}

#[test]
fn d_squared_vanishes() {
    for k in 0..3 {
        let a = random_form(4, k, 50 + k as u64);
        assert!(a.exterior_derivative().exterior_derivative().is_zero());
    }
}

#[test]
fn leibniz_rule() {
    for (p, q) in [(1, 1), (1, 2), (2, 1)] {
        let a = random_form(4, p, 60);
        let b = random_form(4, q, 61);
        let lhs = a.wedge(&b, &product, (2, 2)).unwrap().exterior_derivative();
        let sign = if p % 2 == 0 { 1.0 } else { -1.0 };
        let rhs = a
            .exterior_derivative()
            .wedge(&b, &product, (2, 2))
            .unwrap()
            .add(
                &a.wedge(&b.exterior_derivative(), &product, (2, 2))
                    .unwrap()
                    .scale(sign),
            )
            .unwrap();
        assert!(lhs.sub(&rhs).unwrap().max_abs() < 1e-12);
    }
}

#[test]
fn bianchi_identity() {
    let h = make_adjoint(GroupSpec::general_linear(2).unwrap()).unwrap();
    let t = adjoint_recipe(h.clone(), 3, 2, 0.8, 3).unwrap();
    let big = t.curvature().unwrap();
    let bracket = |a: &Mat, b: &Mat| a * b - b * a;
    let cov = big
        .exterior_derivative()
        .add(&t.omega.wedge(&big, &bracket, (2, 2)).unwrap())
        .unwrap();
    assert!(cov.max_abs() < 1e-12, "{}", cov.max_abs());
    assert!(big.max_abs() > 1e-2);
}

#[test]
fn recipes_satisfy_the_constraints() {
    let h = make_adjoint(GroupSpec::general_linear(2).unwrap()).unwrap();
    for seed in 0..3 {
        let t = adjoint_recipe(h.clone(), 3, 2, 0.8, seed).unwrap();
        assert!(t.verify().unwrap().max() < 1e-12);
    }
    let mut rng = rng_from_seed(4);
    let b = random_boundaries(&[2, 3, 2], Some(1), &mut rng);
    let c = make_chain_complex(&[2, 3, 2], &b).unwrap();
    for seed in 0..3 {
        let t = flat_recipe(c.clone(), 3, 2, 0.8, seed).unwrap();
        assert!(t.verify().unwrap().max() < 1e-12);
        assert!(t.curvature().unwrap().max_abs() < 1e-14);
        let t = flat_recipe_constant_m(c.clone(), 3, 2, 0.8, seed).unwrap();
        assert!(t.verify().unwrap().max() < 1e-12);
    }
}

#[test]
fn violated_constraint_is_reported() {
    let h = make_adjoint(GroupSpec::general_linear(2).unwrap()).unwrap();
    let t = adjoint_recipe(h.clone(), 3, 2, 0.8, 1).unwrap();
    let m = t.m.scale(2.0);
    let r = FormTriple::user(h, t.omega.clone(), m, t.theta.clone());
    assert!(matches!(r, Err(Error::ConstraintViolation { .. })));
}

#[test]
fn forms_round_trip_through_json() {
    let a = random_form(3, 2, 70);
    let s = serde_json::to_string(&a.to_json()).unwrap();
    let j: FormJson = serde_json::from_str(&s).unwrap();
    assert_eq!(FormField::from_json(&j, (2, 2)).unwrap(), a);
}

fn fd_jet_error(c: &dyn CubeMap, u: &[f64]) -> f64 {
    let h = 1e-6;
    let jet = c.jet(u);
    let mut worst: f64 = 0.0;
    for j in 0..c.n() {
        let mut up = u.to_vec();
        let mut um = u.to_vec();
        up[j] += h;
        um[j] -= h;
        let (xp, xm) = (c.eval(&up), c.eval(&um));
        for i in 0..c.d() {
            worst = worst.max(((xp[i] - xm[i]) / (2.0 * h) - jet.col(j)[i]).abs());
        }
    }
    worst
}

fn interior_points(n: usize, seed: u64) -> Vec<Vec<f64>> {
    use rand::RngExt;
    let mut rng = rng_from_seed(seed);
    (0..20)
        .map(|_| (0..n).map(|_| rng.random_range(0.02..0.98)).collect())
        .collect()
}

#[test]
fn cube_jets_match_finite_differences() {
    let b = bigon(3, 1).unwrap();
    let b2 = {
        let mut rng = rng_from_seed(2);
        let p: Vec<f64> = b.eval(&[1.0, 0.0]);
        let q = [0.5, -0.3, 0.2];
        gray_holonomy::fields::cube::bigon_between(&p, &q, 0.5, &mut rng).unwrap()
    };
    let cubes: Vec<(&str, Cube)> = vec![
        ("bigon", b.clone()),
        ("good", good_three_path(3, 2).unwrap()),
        ("family", path_family(3, 3).unwrap()),
        ("sphere", sphere()),
        ("reverse", reverse(b.clone(), 1).unwrap()),
        ("face", face(good_three_path(3, 4).unwrap(), 2, 0.3).unwrap()),
        ("interchange", interchange_cube(b.clone(), b2).unwrap()),
    ];
    for (name, c) in cubes {
        for u in interior_points(c.n(), 5) {
            // the interchange schedules have a kink at s = 1/2 and the
            // t-split at 1/2
            if name == "interchange" && u.iter().take(2).any(|v| (v - 0.5).abs() < 1e-3) {
                continue;
            }
            assert!(fd_jet_error(c.as_ref(), &u) < 1e-6, "{name} at {u:?}");
        }
    }
}

#[test]
fn thin_perturbations_keep_boundaries_and_jets() {
    for (kind, c) in [
        (ThinKind::Rank1, straight_path(&[0.0, 0.0], &[1.0, 0.5]).unwrap()),
        (ThinKind::Laminated, bigon(3, 2).unwrap()),
        (ThinKind::Rank3, good_three_path(3, 3).unwrap()),
    ] {
        for p in thin_perturbations(c.clone(), kind, 9, 4).unwrap() {
            for u in interior_points(c.n(), 6) {
                assert!(fd_jet_error(p.as_ref(), &u) < 1e-6);
            }
            let n = c.n();
            for corner in 0..(1 << n) {
                let u: Vec<f64> = (0..n).map(|i| ((corner >> i) & 1) as f64).collect();
                let (a, b) = (c.eval(&u), p.eval(&u));
                assert!(a.iter().zip(&b).all(|(x, y)| (x - y).abs() < 1e-12));
            }
        }
    }
    assert!(thin_perturbations(bigon(3, 1).unwrap(), ThinKind::Rank1, 1, 1).is_err());
}

#[test]
fn laminated_homotopies_are_thin() {
    let r = laminated_check(bigon(3, 4).unwrap(), LaminatedParams { a: 0.5, b: -0.4 }, 9).unwrap();
    assert!(r.path_space_thinness < 1e-10, "{r:?}");
    // square root of a Gram determinant, so rounding shows up as ~1e-8
    assert!(r.slice_rank < 1e-6, "{r:?}");
}

#[test]
fn paths_sit_still_near_the_ends() {
    let s = Smoothing::standard();
    let eps = s.epsilon();
    assert_eq!(s.phi(0.5 * eps), 0.0);
    assert_eq!(s.phi(1.0 - 0.5 * eps), 1.0);
    assert!((s.phi(0.5) - 0.5).abs() < 1e-12);
    let g = good_three_path(3, 1).unwrap();
    for u in [[0.05, 0.5, 0.5], [0.5, 0.02, 0.3], [0.4, 0.6, 0.97]] {
        let jet = g.jet(&u);
        let axis = u.iter().position(|v| *v < eps || *v > 1.0 - eps).unwrap();
        assert!(jet.col(axis).iter().all(|v| *v == 0.0));
    }
}

#[test]
fn pullback_components_are_form_values_on_the_jacobian() {
    let a = random_form(3, 2, 80);
    let c = bigon(3, 5).unwrap();
    let samples = pullback(&a, c.as_ref(), 3).unwrap();
    assert_eq!(samples.len(), 9);
    for s in &samples {
        let jet = c.jet(&s.u);
        let (idx, v) = &s.components[0];
        assert_eq!(idx, &vec![0, 1]);
        assert!(dist(v, &a.eval(&jet.x, &[jet.col(0), jet.col(1)])) < 1e-14);
    }
    assert!(pullback(&random_form(2, 1, 1), c.as_ref(), 3).is_err());
}

#[test]
fn cubes_parse_from_json() {
    let v = serde_json::json!({
        "n": 2,
        "base": {"type": "polynomial", "n": 2, "d": 2, "terms": [
            {"coeff": [1.0, 0.0], "factors": [{"pow": 1}, {"pow": 0}]},
            {"coeff": [0.0, 1.0], "factors": [{"pow": 0}, {"pow": 1}]}
        ]}
    });
    let c = cube_from_json(&v).unwrap();
    assert_eq!((c.n(), c.d()), (2, 2));
    let x = c.eval(&[0.5, 1.0]);
    assert!((x[0] - 0.5).abs() < 1e-12 && (x[1] - 1.0).abs() < 1e-12);
    let back = cube_from_json(&c.to_json().unwrap()).unwrap();
    assert_eq!(back.eval(&[0.3, 0.7]), c.eval(&[0.3, 0.7]));
    assert!(cube_from_json(&serde_json::json!({"base": {"type": "torus"}})).is_err());
}

#[test]
fn concat_joins_matching_faces() {
    let a = bigon(3, 1).unwrap();
    let ra = reverse(a.clone(), 1).unwrap();
    let c = concat(a.clone(), ra, 1).unwrap();
    let x = c.eval(&[0.3, 1.0]);
    let y = a.eval(&[0.3, 0.0]);
    assert!(x.iter().zip(&y).all(|(p, q)| (p - q).abs() < 1e-12));
    assert!(concat(a.clone(), bigon(3, 2).unwrap(), 1).is_err());
}

#[test]
fn thin_kinds_parse() {
    assert_eq!("rank1".parse::<ThinKind>().unwrap(), ThinKind::Rank1);
    assert_eq!("laminated".parse::<ThinKind>().unwrap(), ThinKind::Laminated);
    assert_eq!("rank3".parse::<ThinKind>().unwrap(), ThinKind::Rank3);
    assert!(matches!("rank2".parse::<ThinKind>(), Err(Error::UnsupportedKind(_))));
}

fn scalar_form(d: usize, k: usize, seed: u64) -> FormField {
    FormField::random(d, k, &[Mat::identity(1, 1)], 2, 1.0, &mut rng_from_seed(seed)).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn scalar_wedge_is_graded_commutative(p in 0usize..3, q in 0usize..3, seed in 0u64..1000) {
        let a = scalar_form(4, p, seed);
        let b = scalar_form(4, q, seed + 1);
        let mul = |x: &Mat, y: &Mat| x * y;
        let ab = a.wedge(&b, &mul, (1, 1)).unwrap();
        let ba = b.wedge(&a, &mul, (1, 1)).unwrap();
        let sign = if (p * q) % 2 == 0 { 1.0 } else { -1.0 };
        prop_assert!(ab.sub(&ba.scale(sign)).unwrap().max_abs() < 1e-12);
    }

    #[test]
    fn wedge_is_associative(seed in 0u64..1000) {
        let a = random_form(4, 1, seed);
        let b = random_form(4, 1, seed + 1);
        let c = random_form(4, 1, seed + 2);
        let l = a.wedge(&b, &product, (2, 2)).unwrap().wedge(&c, &product, (2, 2)).unwrap();
        let r = a.wedge(&b.wedge(&c, &product, (2, 2)).unwrap(), &product, (2, 2)).unwrap();
        prop_assert!(l.sub(&r).unwrap().max_abs() < 1e-12);
    }
}

#[test]
fn smoothing_rejects_bad_epsilon() {
    assert!(Smoothing::new(0.5).is_err());
    assert!(Smoothing::new(-0.1).is_err());
    let _ = Arc::new(Smoothing::new(0.2).unwrap());
}
