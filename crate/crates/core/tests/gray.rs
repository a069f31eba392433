use gray_holonomy::algebra::rng_from_seed;
use gray_holonomy::instances::{make_adjoint, make_chain_complex, random_boundaries};
use gray_holonomy::{
    compose, horizontal_lower, horizontal_upper, interchange_cell, verify_gray_axioms,
    verify_gray_axioms_with, Error, GrayCell, GroupSpec, Module, Result,
};

fn adjoint() -> Module {
    make_adjoint(GroupSpec::general_linear(2).unwrap()).unwrap()
}

fn chain() -> Module {
    let mut rng = rng_from_seed(21);
    let b = random_boundaries(&[2, 3, 2], Some(1), &mut rng);
    make_chain_complex(&[2, 3, 2], &b).unwrap()
}

fn random_two(h: &Module, seed: u64) -> GrayCell {
    let mut rng = rng_from_seed(seed);
    GrayCell::two(h, h.g().sample(&mut rng), h.e().sample(&mut rng))
}

#[test]
fn gray_axioms_hold_for_adjoint_and_chain() {
    for (h, seed) in [(adjoint(), 1), (chain(), 2)] {
        let r = verify_gray_axioms(&h, 100, seed, 1e-9);
        assert!(r.pass(), "{}: {:?}", h.name(), r.failures());
        assert!(r.entry("interchange_boundaries").is_some());
    }
}

#[test]
fn gray_axioms_hold_for_so3() {
    let h: Module = make_adjoint(GroupSpec::special_orthogonal(3).unwrap()).unwrap();
    let r = verify_gray_axioms(&h, 50, 3, 1e-9);
    assert!(r.pass(), "{:?}", r.failures());
}

#[test]
fn interchange_without_lifting_is_rejected() {
    let bad = |a: &GrayCell, b: &GrayCell| -> Result<GrayCell> {
        let c = interchange_cell(a, b)?;
        Ok(GrayCell::three(a.module(), c.x().clone(), c.e(), a.module().l().identity()))
    };
    let h = adjoint();
    let r = verify_gray_axioms_with(&h, 50, 4, 1e-9, &bad);
    assert!(!r.pass());
    let e = r.entry("interchange_boundaries").unwrap();
    assert!(e.max_residual > 1e-3);
}

#[test]
fn interchange_runs_between_the_two_horizontal_composites() {
    for h in [adjoint(), chain()] {
        for seed in 0..10 {
            let a = random_two(&h, 100 + seed);
            let b = random_two(&h, 200 + seed);
            let c = interchange_cell(&a, &b).unwrap();
            let lo = horizontal_lower(&a, &b).unwrap();
            let up = horizontal_upper(&a, &b).unwrap();
            assert!(c.source3().unwrap().distance(&lo) < 1e-9);
            assert!(c.target3().unwrap().distance(&up) < 1e-9);
        }
    }
}

#[test]
fn vertical_composition_is_associative_with_inverses() {
    let h = chain();
    let mut rng = rng_from_seed(7);
    let a = GrayCell::two(&h, h.g().sample(&mut rng), h.e().sample(&mut rng));
    let b = GrayCell::two(&h, a.target2().unwrap().x().clone(), h.e().sample(&mut rng));
    let c = GrayCell::two(&h, b.target2().unwrap().x().clone(), h.e().sample(&mut rng));
    let ab_c = compose(&compose(&a, &b, 2).unwrap(), &c, 2).unwrap();
    let a_bc = compose(&a, &compose(&b, &c, 2).unwrap(), 2).unwrap();
    assert!(ab_c.distance(&a_bc) < 1e-10);

    let ai = a.inverse(2).unwrap();
    let id = compose(&a, &ai, 2).unwrap();
    assert!(id.distance(&a.source2().unwrap().identity().unwrap()) < 1e-10);

    let t = GrayCell::three(&h, a.x().clone(), a.e(), h.l().sample(&mut rng));
    let tt = compose(&t, &t.inverse(3).unwrap(), 3).unwrap();
    assert!(tt.distance(&t.source3().unwrap().identity().unwrap()) < 1e-10);
    let tv = compose(&t, &t.inverse(2).unwrap(), 2).unwrap();
    assert!(tv.distance(&t.source2().unwrap().identity().unwrap().identity().unwrap()) < 1e-10);
}

#[test]
fn mismatched_boundaries_and_modules_are_errors() {
    let h = adjoint();
    let a = random_two(&h, 1);
    let b = random_two(&h, 2);
    assert!(matches!(compose(&a, &b, 2), Err(Error::BoundaryMismatch { .. })));
    let other = adjoint();
    let c = random_two(&other, 3);
    assert!(matches!(compose(&a, &c, 1), Err(Error::ModuleMismatch)));
    assert!(matches!(compose(&a, &b, 1), Err(Error::RankMismatch(2, 2, 1))));
    assert!(a.source3().is_err());
}

#[test]
fn cells_round_trip_through_json() {
    let h = chain();
    let mut rng = rng_from_seed(9);
    let c = GrayCell::three(
        &h,
        h.g().sample(&mut rng),
        h.e().sample(&mut rng),
        h.l().sample(&mut rng),
    );
    let v = c.to_json();
    assert_eq!(v["rank"], 3);
    let back = GrayCell::from_json(&h, &serde_json::from_str(&v.to_string()).unwrap()).unwrap();
    assert!(back.distance(&c) < 1e-15);
    assert!(GrayCell::from_json(&h, &serde_json::json!({"rank": 4, "X": [[1.0]]})).is_err());
}

#[test]
fn whiskering_by_unit_is_identity() {
    let h = adjoint();
    let a = random_two(&h, 5);
    let one = GrayCell::one(&h, h.g().identity());
    assert!(compose(&one, &a, 1).unwrap().distance(&a) < 1e-14);
    assert!(compose(&a, &one, 1).unwrap().distance(&a) < 1e-14);
}
