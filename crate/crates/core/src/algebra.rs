//! Matrix groups, 2-crossed modules (group and differential level) and
//! sampled axiom checkers.

use std::sync::Arc;

use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{self, dist, Mat};

pub type Rng = ChaCha8Rng;

pub fn rng_from_seed(seed: u64) -> Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Scale applied to random algebra elements before exponentiating.
pub const SAMPLE_SCALE: f64 = 0.3;

/// Default tolerance for group-membership tests.
pub const MEMBERSHIP_TOL: f64 = 1e-8;

type ResidualFn = Arc<dyn Fn(&Mat) -> f64 + Send + Sync>;
type ProjectFn = Arc<dyn Fn(&Mat) -> Mat + Send + Sync>;

/// A matrix Lie group given by a faithful representation: the group law
/// is the matrix product and the Lie algebra is spanned by `basis`.
#[derive(Clone)]
pub struct GroupSpec {
    name: String,
    dim: usize,
    basis: Vec<Mat>,
    residual: ResidualFn,
    projector: Option<ProjectFn>,
}

impl std::fmt::Debug for GroupSpec {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("GroupSpec")
            .field("name", &self.name)
            .field("dim", &self.dim)
            .field("algebra_dim", &self.basis.len())
            .finish()
    }
}

fn invertibility_residual(m: &Mat) -> f64 {
    if m.iter().any(|v| !v.is_finite()) {
        return f64::INFINITY;
    }
    match linalg::inverse(m) {
        Ok(_) => 0.0,
        Err(_) => f64::INFINITY,
    }
}

impl GroupSpec {
    /// `residual` returns 0 for exact members and grows with the distance
    /// from the group; invertibility is always checked in addition.
    pub fn new(
        name: impl Into<String>,
        dim: usize,
        basis: Vec<Mat>,
        residual: impl Fn(&Mat) -> f64 + Send + Sync + 'static,
    ) -> Result<Self> {
        if dim == 0 {
            return Err(Error::DimensionMismatch("group of dimension 0".into()));
        }
        if basis.iter().any(|b| b.shape() != (dim, dim)) {
            return Err(Error::DimensionMismatch(
                "algebra basis element of wrong size".into(),
            ));
        }
        Ok(GroupSpec {
            name: name.into(),
            dim,
            basis,
            residual: Arc::new(residual),
            projector: None,
        })
    }

    pub fn with_projector(mut self, p: impl Fn(&Mat) -> Mat + Send + Sync + 'static) -> Self {
        self.projector = Some(Arc::new(p));
        self
    }

    pub fn general_linear(n: usize) -> Result<Self> {
        let mut basis = Vec::new();
        for i in 0..n {
            for j in 0..n {
                basis.push(linalg::unit(n, n, i, j));
            }
        }
        Self::new(format!("GL({n})"), n, basis, |_| 0.0)
    }

    pub fn special_orthogonal(n: usize) -> Result<Self> {
        let mut basis = Vec::new();
        for i in 0..n {
            for j in (i + 1)..n {
                basis.push(linalg::unit(n, n, i, j) - linalg::unit(n, n, j, i));
            }
        }
        let spec = Self::new(format!("SO({n})"), n, basis, move |m: &Mat| {
            let id = linalg::identity(m.nrows());
            let orth = (m.transpose() * m - id).norm();
            let det = (m.determinant() - 1.0).abs();
            orth.max(det)
        })?;
        Ok(spec.with_projector(|m: &Mat| {
            // Polar factor: nearest orthogonal matrix.
            let svd = m.clone().svd(true, true);
            svd.u.unwrap() * svd.v_t.unwrap()
        }))
    }

    /// The one-element group, represented by the 1x1 identity.
    pub fn trivial() -> Self {
        Self::new("trivial", 1, Vec::new(), |m: &Mat| linalg::dist_identity(m)).unwrap()
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    /// Size of the representing matrices.
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn algebra_dim(&self) -> usize {
        self.basis.len()
    }

    pub fn basis(&self) -> &[Mat] {
        &self.basis
    }

    pub fn identity(&self) -> Mat {
        linalg::identity(self.dim)
    }

    pub fn zero_algebra(&self) -> Mat {
        linalg::zeros(self.dim, self.dim)
    }

    pub fn inv(&self, a: &Mat) -> Result<Mat> {
        linalg::inverse(a)
    }

    pub fn residual(&self, m: &Mat) -> f64 {
        if m.shape() != (self.dim, self.dim) {
            return f64::INFINITY;
        }
        invertibility_residual(m).max((self.residual)(m))
    }

    pub fn contains(&self, m: &Mat, tol: f64) -> bool {
        self.residual(m) <= tol
    }

    pub fn project(&self, m: &Mat) -> Mat {
        match &self.projector {
            Some(p) => p(m),
            None => m.clone(),
        }
    }

    pub fn exp(&self, x: &Mat) -> Mat {
        linalg::expm(x)
    }

    pub fn log(&self, g: &Mat) -> Result<Mat> {
        linalg::logm(g)
    }

    /// Random algebra element with basis coefficients uniform in [-1, 1].
    pub fn sample_algebra(&self, rng: &mut Rng) -> Mat {
        let mut out = self.zero_algebra();
        for b in &self.basis {
            let c: f64 = rng.random_range(-1.0..=1.0);
            out += b * c;
        }
        out
    }

    /// Random group element `exp(0.3 X)` near the identity.
    pub fn sample(&self, rng: &mut Rng) -> Mat {
        let x = self.sample_algebra(rng);
        self.exp(&(x * SAMPLE_SCALE))
    }
}

/// Group-level 2-crossed module `L -> E -> G` with all groups given in
/// faithful matrix representations.
pub trait TwoCrossedModule: Send + Sync {
    fn name(&self) -> String;
    fn g(&self) -> &GroupSpec;
    fn e(&self) -> &GroupSpec;
    fn l(&self) -> &GroupSpec;
    fn delta(&self, l: &Mat) -> Mat;
    fn partial(&self, e: &Mat) -> Mat;
    fn act_e(&self, g: &Mat, e: &Mat) -> Result<Mat>;
    fn act_l(&self, g: &Mat, l: &Mat) -> Result<Mat>;
    fn lifting(&self, e: &Mat, f: &Mat) -> Result<Mat>;

    /// `<e,f> = e f e^-1 (d(e) |> f^-1)`.
    fn peiffer(&self, e: &Mat, f: &Mat) -> Result<Mat> {
        let ei = self.e().inv(e)?;
        let fi = self.e().inv(f)?;
        Ok(e * f * ei * self.act_e(&self.partial(e), &fi)?)
    }

    /// `e |>' l = l {delta(l)^-1, e}`.
    fn derived_action(&self, e: &Mat, l: &Mat) -> Result<Mat> {
        let dl_inv = self.e().inv(&self.delta(l))?;
        Ok(l * self.lifting(&dl_inv, e)?)
    }
}

pub fn peiffer_commutator(h: &dyn TwoCrossedModule, e: &Mat, f: &Mat) -> Result<Mat> {
    h.peiffer(e, f)
}

pub fn derived_action(h: &dyn TwoCrossedModule, e: &Mat, l: &Mat) -> Result<Mat> {
    h.derived_action(e, l)
}

/// Differential 2-crossed module `l -> e -> g`. Elements are matrices
/// (for some instances, coordinate columns).
pub trait DifferentialTwoCrossedModule: Send + Sync {
    fn name(&self) -> String;
    fn basis_g(&self) -> &[Mat];
    fn basis_e(&self) -> &[Mat];
    fn basis_l(&self) -> &[Mat];
    /// Shapes of elements of g, e and l.
    fn shapes(&self) -> [(usize, usize); 3];
    fn bracket_g(&self, x: &Mat, y: &Mat) -> Mat;
    fn bracket_e(&self, u: &Mat, v: &Mat) -> Mat;
    fn bracket_l(&self, x: &Mat, y: &Mat) -> Mat;
    fn delta(&self, x: &Mat) -> Mat;
    fn partial(&self, u: &Mat) -> Mat;
    fn act_e(&self, a: &Mat, u: &Mat) -> Mat;
    fn act_l(&self, a: &Mat, x: &Mat) -> Mat;
    fn lifting(&self, u: &Mat, v: &Mat) -> Mat;

    /// `<u,v> = [u,v] - d(u) |> v`.
    fn peiffer(&self, u: &Mat, v: &Mat) -> Mat {
        self.bracket_e(u, v) - self.act_e(&self.partial(u), v)
    }

    /// `u |>' x = -{delta(x), u}`.
    fn derived_action(&self, u: &Mat, x: &Mat) -> Mat {
        -self.lifting(&self.delta(x), u)
    }

    fn zero_g(&self) -> Mat {
        let (r, c) = self.shapes()[0];
        linalg::zeros(r, c)
    }
    fn zero_e(&self) -> Mat {
        let (r, c) = self.shapes()[1];
        linalg::zeros(r, c)
    }
    fn zero_l(&self) -> Mat {
        let (r, c) = self.shapes()[2];
        linalg::zeros(r, c)
    }
}

fn sample_from(basis: &[Mat], shape: (usize, usize), rng: &mut Rng) -> Mat {
    let mut out = linalg::zeros(shape.0, shape.1);
    for b in basis {
        let c: f64 = rng.random_range(-1.0..=1.0);
        out += b * c;
    }
    out
}

/// Group-level extension used by the holonomy engine: the differential
/// structure together with the mixed group-on-algebra actions.
pub trait LieTwoCrossedModule: TwoCrossedModule {
    fn algebra(&self) -> &dyn DifferentialTwoCrossedModule;
    /// Action of G on the Lie algebra of E.
    fn act_e_alg(&self, g: &Mat, u: &Mat) -> Result<Mat>;
    /// Action of G on the Lie algebra of L.
    fn act_l_alg(&self, g: &Mat, x: &Mat) -> Result<Mat>;
    /// Action of E on the Lie algebra of L, the derivative of `e |>' .`.
    fn derived_action_alg(&self, e: &Mat, x: &Mat) -> Result<Mat>;
}

/// One line of an axiom report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AxiomEntry {
    pub identity: String,
    pub max_residual: f64,
    pub worst_seed_index: usize,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AxiomReport {
    pub seed: u64,
    pub n_samples: usize,
    pub tol: f64,
    pub entries: Vec<AxiomEntry>,
}

impl AxiomReport {
    pub fn pass(&self) -> bool {
        self.entries.iter().all(|e| e.pass)
    }

    pub fn entry(&self, identity: &str) -> Option<&AxiomEntry> {
        self.entries.iter().find(|e| e.identity == identity)
    }

    pub fn failures(&self) -> Vec<&AxiomEntry> {
        self.entries.iter().filter(|e| !e.pass).collect()
    }

    pub fn max_residual(&self) -> f64 {
        self.entries
            .iter()
            .map(|e| e.max_residual)
            .fold(0.0, f64::max)
    }
}

/// Accumulates per-identity maxima over samples, keeping insertion order.
pub(crate) struct ResidualTable {
    names: Vec<String>,
    maxima: Vec<(f64, usize)>,
}

impl ResidualTable {
    pub(crate) fn new() -> Self {
        ResidualTable {
            names: Vec::new(),
            maxima: Vec::new(),
        }
    }

    pub(crate) fn record(&mut self, name: &str, sample: usize, residual: f64) {
        let r = if residual.is_nan() {
            f64::INFINITY
        } else {
            residual
        };
        match self.names.iter().position(|n| n == name) {
            Some(i) => {
                if r > self.maxima[i].0 {
                    self.maxima[i] = (r, sample);
                }
            }
            None => {
                self.names.push(name.to_string());
                self.maxima.push((r, sample));
            }
        }
    }

    /// Records `residual` or infinity if the computation failed.
    pub(crate) fn record_result(&mut self, name: &str, sample: usize, residual: Result<f64>) {
        self.record(name, sample, residual.unwrap_or(f64::INFINITY));
    }

    pub(crate) fn into_report(self, seed: u64, n_samples: usize, tol: f64) -> AxiomReport {
        let entries = self
            .names
            .into_iter()
            .zip(self.maxima)
            .map(|(identity, (max_residual, worst_seed_index))| AxiomEntry {
                identity,
                max_residual,
                worst_seed_index,
                pass: max_residual <= tol,
            })
            .collect();
        AxiomReport {
            seed,
            n_samples,
            tol,
            entries,
        }
    }
}

/// Checks the 2-crossed module axioms and the derived identity set on
/// `n_samples` random tuples near the identity.
pub fn check_two_crossed_axioms(
    h: &dyn TwoCrossedModule,
    n_samples: usize,
    seed: u64,
    tol: f64,
) -> AxiomReport {
    let mut rng = rng_from_seed(seed);
    let mut table = ResidualTable::new();
    for i in 0..n_samples {
        let a = h.g().sample(&mut rng);
        let b = h.g().sample(&mut rng);
        let e = h.e().sample(&mut rng);
        let f = h.e().sample(&mut rng);
        let g = h.e().sample(&mut rng);
        let l = h.l().sample(&mut rng);
        let k = h.l().sample(&mut rng);
        group_identities(h, &mut table, i, [&a, &b], [&e, &f, &g], [&l, &k]);
    }
    table.into_report(seed, n_samples, tol)
}

fn group_identities(
    h: &dyn TwoCrossedModule,
    t: &mut ResidualTable,
    i: usize,
    [a, b]: [&Mat; 2],
    [e, f, g]: [&Mat; 3],
    [l, k]: [&Mat; 2],
) {
    let gs = h.g();
    let es = h.e();
    let ls = h.l();
    let lift = |x: &Mat, y: &Mat| h.lifting(x, y);
    let act_e = |x: &Mat, y: &Mat| h.act_e(x, y);
    let act_l = |x: &Mat, y: &Mat| h.act_l(x, y);
    let dact = |x: &Mat, y: &Mat| h.derived_action(x, y);
    let einv = |x: &Mat| es.inv(x);
    let linv = |x: &Mat| ls.inv(x);

    t.record("membership", i, {
        let mut r = 0.0f64;
        for x in [e, f, g] {
            r = r.max(es.residual(x));
        }
        for x in [l, k] {
            r = r.max(ls.residual(x)).max(es.residual(&h.delta(x)));
        }
        r.max(gs.residual(&h.partial(e)))
    });

    // Axiom 1: complex of G-modules.
    t.record(
        "boundary_of_delta_trivial",
        i,
        linalg::dist_identity(&h.partial(&h.delta(l))),
    );
    t.record(
        "boundary_homomorphism",
        i,
        dist(&h.partial(&(e * f)), &(h.partial(e) * h.partial(f))),
    );
    t.record(
        "delta_homomorphism",
        i,
        dist(&h.delta(&(l * k)), &(h.delta(l) * h.delta(k))),
    );
    t.record_result(
        "boundary_equivariant",
        i,
        (|| {
            Ok(dist(
                &h.partial(&act_e(a, e)?),
                &(a * h.partial(e) * gs.inv(a)?),
            ))
        })(),
    );
    t.record_result(
        "delta_equivariant",
        i,
        (|| Ok(dist(&h.delta(&act_l(a, l)?), &act_e(a, &h.delta(l))?)))(),
    );
    t.record_result(
        "action_on_e_automorphism",
        i,
        (|| Ok(dist(&act_e(a, &(e * f))?, &(act_e(a, e)? * act_e(a, f)?))))(),
    );
    t.record_result(
        "action_on_l_automorphism",
        i,
        (|| Ok(dist(&act_l(a, &(l * k))?, &(act_l(a, l)? * act_l(a, k)?))))(),
    );
    t.record_result(
        "action_on_e_law",
        i,
        (|| Ok(dist(&act_e(&(a * b), e)?, &act_e(a, &act_e(b, e)?)?)))(),
    );
    t.record_result(
        "action_on_l_law",
        i,
        (|| Ok(dist(&act_l(&(a * b), l)?, &act_l(a, &act_l(b, l)?)?)))(),
    );
    t.record_result(
        "lifting_equivariant",
        i,
        (|| {
            Ok(dist(
                &act_l(a, &lift(e, f)?)?,
                &lift(&act_e(a, e)?, &act_e(a, f)?)?,
            ))
        })(),
    );

    // Axiom 2.
    t.record_result(
        "delta_of_lifting_is_peiffer",
        i,
        (|| Ok(dist(&h.delta(&lift(e, f)?), &h.peiffer(e, f)?)))(),
    );
    // Axiom 3.
    t.record_result(
        "commutator_in_l",
        i,
        (|| {
            let comm = l * k * linv(l)? * linv(k)?;
            Ok(dist(&comm, &lift(&h.delta(l), &h.delta(k))?))
        })(),
    );
    // Axiom 4.
    t.record_result(
        "lifting_left_product",
        i,
        (|| {
            let lhs = lift(&(e * f), g)?;
            let rhs = lift(e, &(f * g * einv(f)?))? * act_l(&h.partial(e), &lift(f, g)?)?;
            Ok(dist(&lhs, &rhs))
        })(),
    );
    // Axiom 5.
    t.record_result(
        "lifting_right_product",
        i,
        (|| {
            let lhs = lift(e, &(f * g))?;
            let pe = einv(&h.peiffer(e, g)?)?;
            let rhs = lift(e, f)? * lift(e, g)? * lift(&pe, &act_e(&h.partial(e), f)?)?;
            Ok(dist(&lhs, &rhs))
        })(),
    );
    // Axiom 6.
    t.record_result(
        "lifting_of_delta_symmetrized",
        i,
        (|| {
            let dl = h.delta(l);
            let lhs = lift(&dl, e)? * lift(e, &dl)?;
            let rhs = l * act_l(&h.partial(e), &linv(l)?)?;
            Ok(dist(&lhs, &rhs))
        })(),
    );

    let one_e = es.identity();
    let one_l = ls.identity();
    t.record_result(
        "lifting_unit_left",
        i,
        (|| Ok(dist(&lift(&one_e, e)?, &one_l)))(),
    );
    t.record_result(
        "lifting_unit_right",
        i,
        (|| Ok(dist(&lift(e, &one_e)?, &one_l)))(),
    );

    t.record_result(
        "lifting_inverse_conjugated",
        i,
        (|| {
            let lhs = linv(&lift(e, f)?)?;
            let ei = einv(e)?;
            let rhs = act_l(&h.partial(e), &lift(&ei, &(e * f * &ei))?)?;
            Ok(dist(&lhs, &rhs))
        })(),
    );
    t.record_result(
        "lifting_inverse_by_conjugate",
        i,
        (|| {
            let lhs = linv(&lift(e, f)?)?;
            let rhs = dact(&(e * f * einv(e)?), &lift(e, &einv(f)?)?)?;
            Ok(dist(&lhs, &rhs))
        })(),
    );
    t.record_result(
        "lifting_inverse_by_action",
        i,
        (|| {
            let lhs = linv(&lift(e, f)?)?;
            let rhs = dact(&act_e(&h.partial(e), f)?, &lift(e, &einv(f)?)?)?;
            Ok(dist(&lhs, &rhs))
        })(),
    );
    t.record_result(
        "lifting_inverse_derived",
        i,
        (|| {
            let lhs = linv(&lift(e, f)?)?;
            let rhs = dact(e, &lift(&einv(e)?, &act_e(&h.partial(e), f)?)?)?;
            Ok(dist(&lhs, &rhs))
        })(),
    );
    t.record_result(
        "boundary_action_via_derived",
        i,
        (|| {
            let lhs = act_l(&h.partial(e), l)?;
            let rhs = dact(e, l)? * lift(e, &einv(&h.delta(l))?)?;
            Ok(dist(&lhs, &rhs))
        })(),
    );
    t.record_result(
        "derived_action_equivariance",
        i,
        (|| {
            let de = h.partial(e);
            let lhs = dact(&act_e(&de, f)?, &act_l(&de, l)?)?;
            let rhs = act_l(&de, &dact(f, l)?)?;
            Ok(dist(&lhs, &rhs))
        })(),
    );
    t.record_result(
        "lifting_left_product_derived",
        i,
        (|| {
            let lhs = lift(&(e * f), g)?;
            let rhs = dact(e, &lift(f, g)?)? * lift(e, &act_e(&h.partial(f), g)?)?;
            Ok(dist(&lhs, &rhs))
        })(),
    );
    t.record_result(
        "lifting_right_product_derived",
        i,
        (|| {
            let lhs = lift(e, &(f * g))?;
            let rhs = lift(e, f)? * dact(&act_e(&h.partial(e), f)?, &lift(e, g)?)?;
            Ok(dist(&lhs, &rhs))
        })(),
    );
    t.record_result(
        "lifting_right_product_conjugated",
        i,
        (|| {
            let lhs = lift(e, &(f * g))?;
            let rhs = dact(&(e * f * einv(e)?), &lift(e, g)?)? * lift(e, f)?;
            Ok(dist(&lhs, &rhs))
        })(),
    );

    // (delta: L -> E, |>') is a crossed module and |>' is an action.
    t.record_result(
        "derived_action_law",
        i,
        (|| Ok(dist(&dact(&(e * f), l)?, &dact(e, &dact(f, l)?)?)))(),
    );
    t.record_result(
        "derived_action_automorphism",
        i,
        (|| Ok(dist(&dact(e, &(l * k))?, &(dact(e, l)? * dact(e, k)?))))(),
    );
    t.record_result(
        "derived_action_unit",
        i,
        (|| Ok(dist(&dact(&one_e, l)?, l) + dist(&dact(e, &one_l)?, &one_l)))(),
    );
    t.record_result(
        "derived_crossed_equivariance",
        i,
        (|| Ok(dist(&h.delta(&dact(e, l)?), &(e * h.delta(l) * einv(e)?))))(),
    );
    t.record_result(
        "derived_crossed_peiffer",
        i,
        (|| Ok(dist(&dact(&h.delta(l), k)?, &(l * k * linv(l)?))))(),
    );
}

/// Checks the differential 2-crossed module conditions, the properties of
/// the derived action and (bi)linearity of all structure maps.
pub fn check_differential_axioms(
    h: &dyn DifferentialTwoCrossedModule,
    n_samples: usize,
    seed: u64,
    tol: f64,
) -> AxiomReport {
    let mut rng = rng_from_seed(seed);
    let mut t = ResidualTable::new();
    let [sg, se, sl] = h.shapes();
    for i in 0..n_samples {
        let xa = sample_from(h.basis_g(), sg, &mut rng);
        let xb = sample_from(h.basis_g(), sg, &mut rng);
        let u = sample_from(h.basis_e(), se, &mut rng);
        let v = sample_from(h.basis_e(), se, &mut rng);
        let w = sample_from(h.basis_e(), se, &mut rng);
        let x = sample_from(h.basis_l(), sl, &mut rng);
        let y = sample_from(h.basis_l(), sl, &mut rng);
        let z = sample_from(h.basis_l(), sl, &mut rng);
        let c: f64 = rng.random_range(-1.0..=1.0);
        differential_identities(h, &mut t, i, [&xa, &xb], [&u, &v, &w], [&x, &y, &z], c);
    }
    t.into_report(seed, n_samples, tol)
}

fn differential_identities(
    h: &dyn DifferentialTwoCrossedModule,
    t: &mut ResidualTable,
    i: usize,
    [a, b]: [&Mat; 2],
    [u, v, w]: [&Mat; 3],
    [x, y, z]: [&Mat; 3],
    c: f64,
) {
    let bg = |p: &Mat, q: &Mat| h.bracket_g(p, q);
    let be = |p: &Mat, q: &Mat| h.bracket_e(p, q);
    let bl = |p: &Mat, q: &Mat| h.bracket_l(p, q);
    let lift = |p: &Mat, q: &Mat| h.lifting(p, q);
    let dact = |p: &Mat, q: &Mat| h.derived_action(p, q);

    // Lie algebra sanity.
    t.record("jacobi", i, {
        let jg = bg(a, &bg(b, &bg(a, b))) + bg(b, &bg(&bg(a, b), a)) + bg(&bg(a, b), &bg(a, b));
        let je = be(u, &be(v, w)) + be(v, &be(w, u)) + be(w, &be(u, v));
        let jl = bl(x, &bl(y, z)) + bl(y, &bl(z, x)) + bl(z, &bl(x, y));
        jg.norm() + je.norm() + jl.norm()
    });
    t.record("linearity", i, {
        let uv = u + v * c;
        let xy = x + y * c;
        let ab = a + b * c;
        dist(&h.delta(&xy), &(h.delta(x) + h.delta(y) * c))
            + dist(&h.partial(&uv), &(h.partial(u) + h.partial(v) * c))
            + dist(&h.act_e(&ab, u), &(h.act_e(a, u) + h.act_e(b, u) * c))
            + dist(&h.act_e(a, &uv), &(h.act_e(a, u) + h.act_e(a, v) * c))
            + dist(&h.act_l(&ab, x), &(h.act_l(a, x) + h.act_l(b, x) * c))
            + dist(&h.act_l(a, &xy), &(h.act_l(a, x) + h.act_l(a, y) * c))
            + dist(&lift(&uv, w), &(lift(u, w) + lift(v, w) * c))
            + dist(&lift(w, &uv), &(lift(w, u) + lift(w, v) * c))
    });

    // Condition 1: complex of g-modules.
    t.record("boundary_of_delta_zero", i, h.partial(&h.delta(x)).norm());
    t.record(
        "boundary_bracket",
        i,
        dist(&h.partial(&be(u, v)), &bg(&h.partial(u), &h.partial(v))),
    );
    t.record(
        "delta_bracket",
        i,
        dist(&h.delta(&bl(x, y)), &be(&h.delta(x), &h.delta(y))),
    );
    t.record(
        "boundary_equivariant",
        i,
        dist(&h.partial(&h.act_e(a, u)), &bg(a, &h.partial(u))),
    );
    t.record(
        "delta_equivariant",
        i,
        dist(&h.delta(&h.act_l(a, x)), &h.act_e(a, &h.delta(x))),
    );
    t.record("action_on_e_lie", i, {
        let lhs = h.act_e(&bg(a, b), u);
        let rhs = h.act_e(a, &h.act_e(b, u)) - h.act_e(b, &h.act_e(a, u));
        dist(&lhs, &rhs)
    });
    t.record("action_on_l_lie", i, {
        let lhs = h.act_l(&bg(a, b), x);
        let rhs = h.act_l(a, &h.act_l(b, x)) - h.act_l(b, &h.act_l(a, x));
        dist(&lhs, &rhs)
    });
    t.record("action_on_e_derivation", i, {
        dist(
            &h.act_e(a, &be(u, v)),
            &(be(&h.act_e(a, u), v) + be(u, &h.act_e(a, v))),
        )
    });
    t.record("action_on_l_derivation", i, {
        dist(
            &h.act_l(a, &bl(x, y)),
            &(bl(&h.act_l(a, x), y) + bl(x, &h.act_l(a, y))),
        )
    });
    t.record("lifting_equivariant", i, {
        dist(
            &h.act_l(a, &lift(u, v)),
            &(lift(&h.act_e(a, u), v) + lift(u, &h.act_e(a, v))),
        )
    });

    // Condition 2.
    t.record(
        "delta_of_lifting_is_peiffer",
        i,
        dist(&h.delta(&lift(u, v)), &h.peiffer(u, v)),
    );
    // Condition 3.
    t.record(
        "bracket_in_l",
        i,
        dist(&bl(x, y), &lift(&h.delta(x), &h.delta(y))),
    );
    // Condition 4.
    t.record("lifting_of_bracket_left", i, {
        let lhs = lift(&be(u, v), w);
        let rhs = h.act_l(&h.partial(u), &lift(v, w)) + lift(u, &be(v, w))
            - h.act_l(&h.partial(v), &lift(u, w))
            - lift(v, &be(u, w));
        dist(&lhs, &rhs)
    });
    // Condition 5.
    t.record("lifting_of_bracket_right", i, {
        let lhs = lift(u, &be(v, w));
        let rhs = lift(&h.delta(&lift(u, v)), w) - lift(&h.delta(&lift(u, w)), v);
        dist(&lhs, &rhs)
    });
    // Condition 6.
    t.record("lifting_of_delta_symmetrized", i, {
        let dx = h.delta(x);
        let lhs = lift(&dx, v) + lift(v, &dx);
        dist(&lhs, &(-h.act_l(&h.partial(v), x)))
    });

    // Properties of the derived action.
    t.record("derived_action_lie", i, {
        let lhs = dact(&be(u, v), x);
        let rhs = dact(u, &dact(v, x)) - dact(v, &dact(u, x));
        dist(&lhs, &rhs)
    });
    t.record("derived_action_derivation", i, {
        dist(
            &dact(u, &bl(x, y)),
            &(bl(&dact(u, x), y) + bl(x, &dact(u, y))),
        )
    });
    t.record(
        "derived_action_of_delta",
        i,
        dist(&dact(&h.delta(x), y), &bl(x, y)),
    );
    t.record(
        "delta_of_derived_action",
        i,
        dist(&h.delta(&dact(u, x)), &be(u, &h.delta(x))),
    );
}

/// Numerical derivative of a group action `act(g, v)` at the identity in
/// the first slot, returned as an exactly bilinear evaluator built from
/// central differences on basis pairs.
pub fn differentiate_group_action(
    act: impl Fn(&Mat, &Mat) -> Result<Mat>,
    basis_g: &[Mat],
    basis_v: &[Mat],
    step: f64,
) -> Result<BilinearMap> {
    if !(step > 0.0) || basis_g.is_empty() || basis_v.is_empty() {
        return Err(Error::Config(
            "differentiation needs step > 0 and non-empty bases".into(),
        ));
    }
    let derivative = |x: &Mat, v: &Mat, s: f64| -> Result<Mat> {
        let plus = act(&linalg::expm(&(x * s)), v)?;
        let minus = act(&linalg::expm(&(x * -s)), v)?;
        Ok((plus - minus) / (2.0 * s))
    };
    let mut table = Vec::with_capacity(basis_g.len());
    for x in basis_g {
        let mut row = Vec::with_capacity(basis_v.len());
        for v in basis_v {
            let d1 = derivative(x, v, step)?;
            let d2 = derivative(x, v, step / 2.0)?;
            let d4 = derivative(x, v, step / 4.0)?;
            check_halving(&d1, &d2, &d4)?;
            row.push(d1);
        }
        table.push(row);
    }
    Ok(BilinearMap::new(basis_g, basis_v, table))
}

/// Mixed second derivative at the identity of a map `f: E x E -> L` with
/// `f(1, .) = f(., 1) = 1`, e.g. a Peiffer lifting.
pub fn second_differential(
    f: impl Fn(&Mat, &Mat) -> Result<Mat>,
    basis_a: &[Mat],
    basis_b: &[Mat],
    step: f64,
) -> Result<BilinearMap> {
    if !(step > 0.0) || basis_a.is_empty() || basis_b.is_empty() {
        return Err(Error::Config(
            "differentiation needs step > 0 and non-empty bases".into(),
        ));
    }
    let mixed = |x: &Mat, y: &Mat, s: f64| -> Result<Mat> {
        let ex = |t: f64| linalg::expm(&(x * t));
        let ey = |t: f64| linalg::expm(&(y * t));
        let pp = f(&ex(s), &ey(s))?;
        let pm = f(&ex(s), &ey(-s))?;
        let mp = f(&ex(-s), &ey(s))?;
        let mm = f(&ex(-s), &ey(-s))?;
        Ok((pp - pm - mp + mm) / (4.0 * s * s))
    };
    let mut table = Vec::with_capacity(basis_a.len());
    for x in basis_a {
        let mut row = Vec::with_capacity(basis_b.len());
        for y in basis_b {
            let d1 = mixed(x, y, step)?;
            let d2 = mixed(x, y, step / 2.0)?;
            let d4 = mixed(x, y, step / 4.0)?;
            check_halving(&d1, &d2, &d4)?;
            row.push(d1);
        }
        table.push(row);
    }
    Ok(BilinearMap::new(basis_a, basis_b, table))
}

// Truncation error shrinks under halving; roundoff grows. If the second
// difference is clearly larger than the first, roundoff dominates.
fn check_halving(d1: &Mat, d2: &Mat, d4: &Mat) -> Result<()> {
    let first = (d1 - d2).norm();
    let second = (d2 - d4).norm();
    let scale = d1.norm().max(1.0);
    if second > 2.0 * first && second > 1e-9 * scale {
        return Err(Error::StepTooSmall);
    }
    Ok(())
}

/// A bilinear map stored by its values on basis pairs.
pub struct BilinearMap {
    coords_a: linalg::Coordinates,
    coords_b: linalg::Coordinates,
    table: Vec<Vec<Mat>>,
}

impl BilinearMap {
    fn new(basis_a: &[Mat], basis_b: &[Mat], table: Vec<Vec<Mat>>) -> Self {
        BilinearMap {
            coords_a: linalg::Coordinates::new(basis_a),
            coords_b: linalg::Coordinates::new(basis_b),
            table,
        }
    }

    pub fn eval(&self, a: &Mat, b: &Mat) -> Mat {
        let ca = self.coords_a.of(a);
        let cb = self.coords_b.of(b);
        let mut out = self.table[0][0].clone() * 0.0;
        for (i, x) in ca.iter().enumerate() {
            if *x == 0.0 {
                continue;
            }
            for (j, y) in cb.iter().enumerate() {
                out += &self.table[i][j] * (x * y);
            }
        }
        out
    }
}
