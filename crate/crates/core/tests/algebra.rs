use std::sync::Arc;

use gray_holonomy::algebra::rng_from_seed;
use gray_holonomy::instances::{make_adjoint, make_chain_complex, random_boundaries};
use gray_holonomy::linalg::{dist, dist_identity};
use gray_holonomy::{check_two_crossed_axioms, GroupSpec, Mat, Result, TwoCrossedModule};

fn chain_232(seed: u64) -> Arc<dyn TwoCrossedModule> {
    let mut rng = rng_from_seed(seed);
    let dims = [2, 3, 2];
    let b = random_boundaries(&dims, Some(1), &mut rng);
    make_chain_complex(&dims, &b).unwrap()
}

#[test]
fn adjoint_gl2_satisfies_all_identities() {
    let h = make_adjoint(GroupSpec::general_linear(2).unwrap()).unwrap();
    let r = check_two_crossed_axioms(h.as_ref(), 200, 1, 1e-9);
    assert!(r.pass(), "{:?}", r.failures());
    assert!(r.entries.len() > 20);
}

#[test]
fn adjoint_gl3_satisfies_all_identities() {
    let h = make_adjoint(GroupSpec::general_linear(3).unwrap()).unwrap();
    let r = check_two_crossed_axioms(h.as_ref(), 200, 2, 1e-9);
    assert!(r.pass(), "{:?}", r.failures());
}

#[test]
fn adjoint_so3_satisfies_all_identities() {
    let h = make_adjoint(GroupSpec::special_orthogonal(3).unwrap()).unwrap();
    let r = check_two_crossed_axioms(h.as_ref(), 100, 3, 1e-9);
    assert!(r.pass(), "{:?}", r.failures());
}

#[test]
fn chain_complex_satisfies_all_identities() {
    for seed in [3, 4, 5] {
        let h = chain_232(seed);
        let r = check_two_crossed_axioms(h.as_ref(), 200, seed, 1e-9);
        assert!(r.pass(), "seed {seed}: {:?}", r.failures());
    }
}

#[test]
fn report_records_the_worst_sample() {
    let h = make_adjoint(GroupSpec::general_linear(2).unwrap()).unwrap();
    let r = check_two_crossed_axioms(h.as_ref(), 20, 9, 1e-9);
    for e in &r.entries {
        assert!(e.worst_seed_index < 20);
        assert_eq!(e.pass, e.max_residual <= 1e-9);
    }
    assert_eq!(r.n_samples, 20);
    assert!(r.entry("delta_of_lifting_is_peiffer").is_some());
}

#[test]
fn reports_are_deterministic() {
    let h = chain_232(7);
    let a = check_two_crossed_axioms(h.as_ref(), 30, 11, 1e-9);
    let b = check_two_crossed_axioms(h.as_ref(), 30, 11, 1e-9);
    assert_eq!(a, b);
}

/// Wraps a module and squares its Peiffer lifting, which breaks
/// `delta {e,f} = <e,f>` while keeping everything else intact.
struct SquaredLifting(Arc<dyn TwoCrossedModule>);

impl TwoCrossedModule for SquaredLifting {
    fn name(&self) -> String {
        "broken".into()
    }
    fn g(&self) -> &GroupSpec {
        self.0.g()
    }
    fn e(&self) -> &GroupSpec {
        self.0.e()
    }
    fn l(&self) -> &GroupSpec {
        self.0.l()
    }
    fn delta(&self, l: &Mat) -> Mat {
        self.0.delta(l)
    }
    fn partial(&self, e: &Mat) -> Mat {
        self.0.partial(e)
    }
    fn act_e(&self, g: &Mat, e: &Mat) -> Result<Mat> {
        self.0.act_e(g, e)
    }
    fn act_l(&self, g: &Mat, l: &Mat) -> Result<Mat> {
        self.0.act_l(g, l)
    }
    fn lifting(&self, e: &Mat, f: &Mat) -> Result<Mat> {
        let x = self.0.lifting(e, f)?;
        Ok(&x * &x)
    }
}

#[test]
fn broken_lifting_is_detected() {
    let h = SquaredLifting(make_adjoint(GroupSpec::general_linear(2).unwrap()).unwrap());
    let r = check_two_crossed_axioms(&h, 50, 1, 1e-9);
    assert!(!r.pass());
    let e = r.entry("delta_of_lifting_is_peiffer").unwrap();
    assert!(e.max_residual > 1e-3, "{}", e.max_residual);
}

#[test]
fn peiffer_commutator_of_unit_is_trivial() {
    let h = chain_232(1);
    let mut rng = rng_from_seed(5);
    let one = h.e().identity();
    for _ in 0..10 {
        let e = h.e().sample(&mut rng);
        assert!(dist_identity(&h.peiffer(&one, &e).unwrap()) < 1e-12);
        assert!(dist_identity(&h.peiffer(&e, &one).unwrap()) < 1e-12);
    }
}

#[test]
fn derived_action_by_unit_is_identity_map() {
    let h = make_adjoint(GroupSpec::general_linear(2).unwrap()).unwrap();
    let mut rng = rng_from_seed(6);
    for _ in 0..10 {
        let l = h.l().sample(&mut rng);
        let got = h.derived_action(&h.e().identity(), &l).unwrap();
        assert!(dist(&got, &l) < 1e-12);
    }
}

#[test]
fn group_spec_membership_and_inverse() {
    let g = GroupSpec::special_orthogonal(3).unwrap();
    let mut rng = rng_from_seed(8);
    for _ in 0..20 {
        let a = g.sample(&mut rng);
        assert!(g.contains(&a, 1e-10));
        let ai = g.inv(&a).unwrap();
        assert!(dist(&ai, &a.transpose()) < 1e-12);
        let x = g.log(&a).unwrap();
        assert!(dist(&g.exp(&x), &a) < 1e-9);
    }
    let mut m = g.identity();
    m[(0, 0)] = 2.0;
    assert!(!g.contains(&m, 1e-6));
}

#[test]
fn singular_matrices_are_rejected() {
    let g = GroupSpec::general_linear(2).unwrap();
    let m = Mat::from_row_slice(2, 2, &[1.0, 2.0, 2.0, 4.0]);
    assert!(matches!(g.inv(&m), Err(gray_holonomy::Error::SingularMatrix)));
}
