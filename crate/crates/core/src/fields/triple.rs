//! Connection triples `(omega, m, theta)` and their curvatures.

use std::sync::Arc;

use rand::RngExt;

use crate::algebra::{rng_from_seed, LieTwoCrossedModule, Rng};
use crate::error::{Error, Result};
use crate::instances::{AdjointInstance, ChainComplexInstance};
use crate::linalg::{self, Mat};

use super::form::{index_tuples, FormField};

pub type LieModule = Arc<dyn LieTwoCrossedModule>;

/// Residual bound for the constraint check on the verification grid.
pub const CONSTRAINT_TOL: f64 = 1e-10;
/// Polynomial degree cap for user-supplied forms.
pub const MAX_USER_DEGREE: u32 = 4;
/// Default scalar in front of `m ^{,} m` in the 3-curvature.
pub const DEFAULT_LIFTING_FACTOR: f64 = 6.0;

/// `d omega + 1/2 omega ^[,] omega`.
pub fn curvature(h: &dyn LieTwoCrossedModule, omega: &FormField) -> Result<FormField> {
    let alg = h.algebra();
    let half = omega
        .wedge(omega, &|a, b| alg.bracket_g(a, b), omega.shape())?
        .scale(0.5);
    omega.exterior_derivative().add(&half)
}

/// `d m + omega ^|> m`.
pub fn two_curvature(
    h: &dyn LieTwoCrossedModule,
    omega: &FormField,
    m: &FormField,
) -> Result<FormField> {
    let alg = h.algebra();
    let w = omega.wedge(m, &|a, u| alg.act_e(a, u), m.shape())?;
    m.exterior_derivative().add(&w)
}

/// `d theta + omega ^|> theta - (factor/6) m ^{,} m`; with `factor = 6` the
/// last term is the plain wedge over the lifting.
pub fn three_curvature(
    h: &dyn LieTwoCrossedModule,
    omega: &FormField,
    m: &FormField,
    theta: &FormField,
    factor: f64,
) -> Result<FormField> {
    let alg = h.algebra();
    let w = omega.wedge(theta, &|a, x| alg.act_l(a, x), theta.shape())?;
    let mm = m.wedge(m, &|u, v| alg.lifting(u, v), theta.shape())?;
    theta
        .exterior_derivative()
        .add(&w)?
        .sub(&mm.scale(factor / 6.0))
}

/// Largest coefficient norm of `alpha` over a `pts^d` grid on `[0,1]^d`.
pub fn grid_max(alpha: &FormField, pts: usize) -> f64 {
    let d = alpha.ambient_dim();
    let tuples = index_tuples(d, alpha.degree());
    let mut worst: f64 = 0.0;
    for idx in 0..pts.pow(d as u32) {
        let mut rest = idx;
        let x: Vec<f64> = (0..d)
            .map(|_| {
                let v = (rest % pts) as f64 / (pts - 1) as f64;
                rest /= pts;
                v
            })
            .collect();
        for t in &tuples {
            worst = worst.max(alpha.coefficient(t, &x).norm());
        }
    }
    worst
}

#[derive(Clone, Debug, PartialEq)]
pub struct ConstraintResiduals {
    /// `max |partial(m) - Omega|` on the grid.
    pub fake_curvature: f64,
    /// `max |delta(theta) - M|` on the grid.
    pub fake_two_curvature: f64,
}

impl ConstraintResiduals {
    pub fn max(&self) -> f64 {
        self.fake_curvature.max(self.fake_two_curvature)
    }
}

/// A connection `(omega, m, theta)` over a 2-crossed module.
#[derive(Clone)]
pub struct FormTriple {
    pub omega: FormField,
    pub m: FormField,
    pub theta: FormField,
    pub module: LieModule,
    /// Scalar in front of `m ^{,} m` in the 3-curvature.
    pub factor: f64,
    pub recipe: String,
}

impl std::fmt::Debug for FormTriple {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("FormTriple")
            .field("module", &self.module.name())
            .field("recipe", &self.recipe)
            .field("d", &self.omega.ambient_dim())
            .field("factor", &self.factor)
            .finish()
    }
}

impl FormTriple {
    /// Checks degrees and shapes, not the constraints.
    pub fn new(
        module: LieModule,
        omega: FormField,
        m: FormField,
        theta: FormField,
        recipe: &str,
    ) -> Result<Self> {
        let [sg, se, sl] = module.algebra().shapes();
        let d = omega.ambient_dim();
        for (name, f, k, s) in [
            ("omega", &omega, 1, sg),
            ("m", &m, 2, se),
            ("theta", &theta, 3, sl),
        ] {
            if f.degree() != k || f.ambient_dim() != d || f.shape() != s {
                return Err(Error::DimensionMismatch(format!(
                    "{name}: expected a {k}-form on R^{d} with values {s:?}, got a {}-form on R^{} with values {:?}",
                    f.degree(),
                    f.ambient_dim(),
                    f.shape()
                )));
            }
        }
        Ok(FormTriple {
            omega,
            m,
            theta,
            module,
            factor: DEFAULT_LIFTING_FACTOR,
            recipe: recipe.to_string(),
        })
    }

    pub fn with_factor(mut self, factor: f64) -> Self {
        self.factor = factor;
        self
    }

    pub fn ambient_dim(&self) -> usize {
        self.omega.ambient_dim()
    }

    pub fn curvature(&self) -> Result<FormField> {
        curvature(self.module.as_ref(), &self.omega)
    }

    pub fn two_curvature(&self) -> Result<FormField> {
        two_curvature(self.module.as_ref(), &self.omega, &self.m)
    }

    pub fn three_curvature(&self) -> Result<FormField> {
        three_curvature(
            self.module.as_ref(),
            &self.omega,
            &self.m,
            &self.theta,
            self.factor,
        )
    }

    /// Constraint residuals on a `pts^d` grid.
    pub fn residuals(&self, pts: usize) -> Result<ConstraintResiduals> {
        let alg = self.module.algebra();
        let [sg, se, _] = alg.shapes();
        let dm = self.m.map_values(|u| alg.partial(u), sg);
        let dt = self.theta.map_values(|x| alg.delta(x), se);
        Ok(ConstraintResiduals {
            fake_curvature: grid_max(&dm.sub(&self.curvature()?)?, pts),
            fake_two_curvature: grid_max(&dt.sub(&self.two_curvature()?)?, pts),
        })
    }

    /// Fails with `ConstraintViolation` unless both residuals are within
    /// [`CONSTRAINT_TOL`] on a `5^d` grid.
    pub fn verify(&self) -> Result<ConstraintResiduals> {
        let r = self.residuals(5)?;
        if r.fake_curvature > CONSTRAINT_TOL {
            return Err(Error::ConstraintViolation {
                what: "partial(m) = Omega".into(),
                residual: r.fake_curvature,
            });
        }
        if r.fake_two_curvature > CONSTRAINT_TOL {
            return Err(Error::ConstraintViolation {
                what: "delta(theta) = M".into(),
                residual: r.fake_two_curvature,
            });
        }
        Ok(r)
    }

    /// A user triple: degree cap, shapes and constraints are all checked.
    pub fn user(
        module: LieModule,
        omega: FormField,
        m: FormField,
        theta: FormField,
    ) -> Result<Self> {
        for (name, f) in [("omega", &omega), ("m", &m), ("theta", &theta)] {
            if f.poly_degree() > MAX_USER_DEGREE {
                return Err(Error::Config(format!(
                    "{name} has polynomial degree {} > {MAX_USER_DEGREE}",
                    f.poly_degree()
                )));
            }
        }
        let t = Self::new(module, omega, m, theta, "user")?;
        t.verify()?;
        Ok(t)
    }
}

/// Adjoint recipe: random polynomial `omega` of degree `deg`,
/// `m = (Omega, 0)` and `theta = 0`.
pub fn adjoint_recipe(
    h: Arc<AdjointInstance>,
    d: usize,
    deg: u32,
    scale: f64,
    seed: u64,
) -> Result<FormTriple> {
    let mut rng = rng_from_seed(seed);
    let basis = h.base().basis().to_vec();
    let omega = FormField::random(d, 1, &basis, deg, scale, &mut rng)?;
    let [_, se, sl] = h.algebra().shapes();
    let big_omega = curvature(h.as_ref(), &omega)?;
    let n = h.base().dim();
    let m = big_omega.map_values(|w| h.pair_alg(w, &linalg::zeros(n, n)), se);
    let theta = FormField::zero(d, 3, sl);
    FormTriple::new(h, omega, m, theta, "R1")
}

/// Basis of the kernel of a linear map given on a basis.
fn kernel(basis: &[Mat], f: impl Fn(&Mat) -> Mat) -> Vec<Mat> {
    if basis.is_empty() {
        return Vec::new();
    }
    let images: Vec<Mat> = basis.iter().map(&f).collect();
    let rows = images[0].len();
    let mut a = linalg::zeros(rows, basis.len());
    for (j, im) in images.iter().enumerate() {
        a.set_column(j, &linalg::vec_of(im).column(0));
    }
    let null = linalg::null_space(&a, 1e-10);
    (0..null.ncols())
        .map(|k| {
            let c: Vec<f64> = null.column(k).iter().cloned().collect();
            linalg::combine(basis, &c)
        })
        .collect()
}

fn random_in(basis: &[Mat], shape: (usize, usize), rng: &mut Rng) -> Mat {
    let mut m = linalg::zeros(shape.0, shape.1);
    for b in basis {
        m += b * rng.random_range(-1.0..=1.0);
    }
    m
}

/// Flat recipe over a chain complex: `omega = A alpha` with `A` a chain map
/// and `alpha` a constant covector (so `Omega = 0`), `m = m0 alpha ^ beta`
/// with `partial(m0) = 0` (so `M = 0`), and `theta` a random polynomial
/// 3-form with values in the kernel of `delta`.
pub fn flat_recipe(
    h: Arc<ChainComplexInstance>,
    d: usize,
    deg: u32,
    scale: f64,
    seed: u64,
) -> Result<FormTriple> {
    let mut rng = rng_from_seed(seed);
    let alg = h.algebra();
    let [sg, se, _] = alg.shapes();
    let ker_e = kernel(alg.basis_e(), |u| alg.partial(u));
    let ker_l = kernel(alg.basis_l(), |x| alg.delta(x));
    if ker_e.is_empty() || ker_l.is_empty() {
        return Err(Error::DegenerateCrossedModule(
            "flat recipe needs nonzero ker partial and ker delta".into(),
        ));
    }
    let a = random_in(alg.basis_g(), sg, &mut rng) * scale;
    let alpha: Vec<f64> = (0..d).map(|_| rng.random_range(-1.0..=1.0)).collect();
    let beta: Vec<f64> = (0..d).map(|_| rng.random_range(-1.0..=1.0)).collect();
    let m0 = random_in(&ker_e, se, &mut rng) * scale;
    let zero = vec![0; d];
    let omega = FormField::from_terms(
        d,
        1,
        sg,
        (0..d).map(|i| (vec![i], zero.clone(), &a * alpha[i])),
    )?;
    let mut m_terms = Vec::new();
    for (i, j) in index_tuples(d, 2).into_iter().map(|t| (t[0], t[1])) {
        m_terms.push((
            vec![i, j],
            zero.clone(),
            &m0 * (alpha[i] * beta[j] - alpha[j] * beta[i]),
        ));
    }
    let m = FormField::from_terms(d, 2, se, m_terms)?;
    let theta = FormField::random(d, 3, &ker_l, deg, scale, &mut rng)?;
    FormTriple::new(h, omega, m, theta, "R2")
}

/// Variant of the flat recipe with `omega = 0` and a generic constant `m`
/// valued in `ker partial`, for which `m ^{,} m` need not vanish.
pub fn flat_recipe_constant_m(
    h: Arc<ChainComplexInstance>,
    d: usize,
    deg: u32,
    scale: f64,
    seed: u64,
) -> Result<FormTriple> {
    let mut rng = rng_from_seed(seed);
    let alg = h.algebra();
    let [sg, se, sl] = alg.shapes();
    let ker_e = kernel(alg.basis_e(), |u| alg.partial(u));
    let ker_l = kernel(alg.basis_l(), |x| alg.delta(x));
    let zero = vec![0; d];
    let m = FormField::from_terms(
        d,
        2,
        se,
        index_tuples(d, 2)
            .into_iter()
            .map(|t| (t, zero.clone(), random_in(&ker_e, se, &mut rng) * scale)),
    )?;
    let theta = if ker_l.is_empty() {
        FormField::zero(d, 3, sl)
    } else {
        FormField::random(d, 3, &ker_l, deg, scale, &mut rng)?
    };
    FormTriple::new(h, FormField::zero(d, 1, sg), m, theta, "R2")
}
