//! Thin deformations of paths, surfaces and 3-paths.
//!
//! Every deformation is a reparametrization of the cube that fixes the
//! faces the holonomy depends on, so the holonomies before and after must
//! agree.

use std::f64::consts::PI;
use std::str::FromStr;
use std::sync::Arc;

use rand::RngExt;

use crate::algebra::rng_from_seed;
use crate::error::{Error, Result};

use super::cube::{Cube, CubeMap, Extrude, Jet, Reparam, Smoothing};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ThinKind {
    Rank1,
    Laminated,
    Rank3,
}

impl ThinKind {
    pub fn cube_dim(self) -> usize {
        match self {
            ThinKind::Rank1 => 1,
            ThinKind::Laminated => 2,
            ThinKind::Rank3 => 3,
        }
    }
}

impl FromStr for ThinKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "rank1" => Ok(ThinKind::Rank1),
            "laminated" => Ok(ThinKind::Laminated),
            "rank3" => Ok(ThinKind::Rank3),
            other => Err(Error::UnsupportedKind(format!(
                "{other} (expected rank1, laminated or rank3)"
            ))),
        }
    }
}

/// `u + a sin(2 pi u) / (2 pi)` and its derivative; monotone for `|a| < 1`.
fn wiggle(a: f64, u: f64) -> (f64, f64) {
    (
        u + a * (2.0 * PI * u).sin() / (2.0 * PI),
        1.0 + a * (2.0 * PI * u).cos(),
    )
}

/// Cutoff `4 phi (1 - phi)`, vanishing near both ends, and its derivative.
fn cutoff(s: &Smoothing, u: f64) -> (f64, f64) {
    let (p, dp) = s.both(u);
    (4.0 * p * (1.0 - p), 4.0 * dp * (1.0 - 2.0 * p))
}

/// Coefficients of one laminated deformation.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LaminatedParams {
    /// s-reparametrization amplitude.
    pub b: f64,
    /// t-slide amplitude.
    pub a: f64,
}

/// Coefficients of one rank-3 deformation.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Rank3Params {
    pub a: f64,
    pub c0: f64,
    pub c1: f64,
    pub b0: f64,
    pub b1: f64,
    pub r: f64,
}

/// `gamma(rho(t))` with `rho(t) = t + a sin(2 pi t)/(2 pi)`.
pub fn rank1(gamma: Cube, a: f64) -> Result<Cube> {
    let r = move |u: &[f64], v: &mut [f64], j: &mut [f64]| {
        (v[0], j[0]) = wiggle(a, u[0]);
    };
    Ok(Arc::new(Reparam::new(gamma, Arc::new(r))?))
}

/// `Gamma(tau(t, s), sigma(s))` with `sigma(s) = s + b sin(2 pi s)/(2 pi)`
/// and `tau = t + a psi(s) sin(2 pi t)/(2 pi)`.
pub fn laminated(gamma: Cube, p: LaminatedParams) -> Result<Cube> {
    let sm = Smoothing::standard();
    let r = move |u: &[f64], v: &mut [f64], j: &mut [f64]| {
        let (t, s) = (u[0], u[1]);
        let (sig, dsig) = wiggle(p.b, s);
        let (psi, dpsi) = cutoff(&sm, s);
        let w = (2.0 * PI * t).sin() / (2.0 * PI);
        v[0] = t + p.a * psi * w;
        v[1] = sig;
        // column t, then column s
        j[0] = 1.0 + p.a * psi * (2.0 * PI * t).cos();
        j[1] = 0.0;
        j[2] = p.a * dpsi * w;
        j[3] = dsig;
    };
    Ok(Arc::new(Reparam::new(gamma, Arc::new(r))?))
}

/// `J(tau(t; s, x), sigma(s; x), rho(x))`. The s-faces are unchanged, so
/// the boundary of the deformation is laminated.
pub fn rank3(j3: Cube, p: Rank3Params) -> Result<Cube> {
    let sm = Smoothing::standard();
    let r = move |u: &[f64], v: &mut [f64], jac: &mut [f64]| {
        let (t, s, x) = (u[0], u[1], u[2]);
        let (ps, dps) = cutoff(&sm, s);
        let (px, dpx) = cutoff(&sm, x);
        let wt = (2.0 * PI * t).sin() / (2.0 * PI);
        let ws = (2.0 * PI * s).sin() / (2.0 * PI);
        let c = p.c0 + p.c1 * px;
        let bb = p.b0 + p.b1 * px;
        let (rho, drho) = wiggle(p.r, x);
        v[0] = t + p.a * ps * c * wt;
        v[1] = s + bb * ws;
        v[2] = rho;
        jac.fill(0.0);
        jac[0] = 1.0 + p.a * ps * c * (2.0 * PI * t).cos();
        jac[3] = p.a * dps * c * wt;
        jac[4] = 1.0 + bb * (2.0 * PI * s).cos();
        jac[6] = p.a * ps * p.c1 * dpx * wt;
        jac[7] = p.b1 * dpx * ws;
        jac[8] = drho;
    };
    Ok(Arc::new(Reparam::new(j3, Arc::new(r))?))
}

/// Seeded thin deformations of `c` of the given kind.
pub fn thin_perturbations(c: Cube, kind: ThinKind, seed: u64, count: usize) -> Result<Vec<Cube>> {
    if c.n() != kind.cube_dim() {
        return Err(Error::UnsupportedKind(format!(
            "{kind:?} deformations act on {}-cubes, got a {}-cube",
            kind.cube_dim(),
            c.n()
        )));
    }
    let mut rng = rng_from_seed(seed);
    let mut out = Vec::with_capacity(count);
    for _ in 0..count {
        let cube = match kind {
            ThinKind::Rank1 => rank1(c.clone(), rng.random_range(-0.8..=0.8))?,
            ThinKind::Laminated => laminated(
                c.clone(),
                LaminatedParams {
                    b: rng.random_range(-0.8..=0.8),
                    a: rng.random_range(-0.8..=0.8),
                },
            )?,
            ThinKind::Rank3 => rank3(c.clone(), random_rank3(&mut rng))?,
        };
        out.push(cube);
    }
    Ok(out)
}

fn random_rank3(rng: &mut crate::algebra::Rng) -> Rank3Params {
    // Each pair of coefficients sums to less than 0.5 in absolute value,
    // which keeps every coordinate map monotone.
    let mut r = || rng.random_range(-0.24..=0.24);
    Rank3Params {
        a: 1.0,
        c0: r(),
        c1: r(),
        b0: r(),
        b1: r(),
        r: 2.0 * r(),
    }
}

/// Residuals certifying that the two stages of a laminated deformation are
/// thin, sampled on a grid of `pts^3` points of the homotopy cube.
#[derive(Clone, Debug, PartialEq)]
pub struct LaminatedCheck {
    /// Stage one, `Gamma(t, s + x b sin(2 pi s)/(2 pi))`: the largest
    /// `|dH(a d/ds + b d/dx)|` with `a = d sigma/dx`, `b = -d sigma/ds`.
    pub path_space_thinness: f64,
    /// Stage two, the t-slide: the largest `sqrt` Gram determinant of
    /// `(dH/dt, dH/dx)`, zero iff they have rank at most one.
    pub slice_rank: f64,
}

/// Builds both homotopy stages from `gamma` to `laminated(gamma, p)` and
/// evaluates the thinness residuals.
pub fn laminated_check(gamma: Cube, p: LaminatedParams, pts: usize) -> Result<LaminatedCheck> {
    let sm = Smoothing::standard();
    let ext: Cube = Arc::new(Extrude::new(gamma, 2));
    // Stage one: s-reparametrization interpolated in x.
    let b = p.b;
    let stage1 = Reparam::new(
        ext.clone(),
        Arc::new(move |u: &[f64], v: &mut [f64], j: &mut [f64]| {
            let (t, s, x) = (u[0], u[1], u[2]);
            let w = (2.0 * PI * s).sin() / (2.0 * PI);
            v[0] = t;
            v[1] = s + x * b * w;
            v[2] = x;
            j.fill(0.0);
            j[0] = 1.0;
            j[4] = 1.0 + x * b * (2.0 * PI * s).cos();
            j[7] = b * w;
            j[8] = 1.0;
        }),
    )?;
    // Stage two: t-slide interpolated in x, on top of the final s-reparametrization.
    let a = p.a;
    let stage2 = Reparam::new(
        ext,
        Arc::new(move |u: &[f64], v: &mut [f64], j: &mut [f64]| {
            let (t, s, x) = (u[0], u[1], u[2]);
            let (sig, dsig) = wiggle(b, s);
            let (psi, dpsi) = cutoff(&sm, s);
            let w = (2.0 * PI * t).sin() / (2.0 * PI);
            v[0] = t + x * a * psi * w;
            v[1] = sig;
            v[2] = x;
            j.fill(0.0);
            j[0] = 1.0 + x * a * psi * (2.0 * PI * t).cos();
            j[3] = x * a * dpsi * w;
            j[4] = dsig;
            j[6] = a * psi * w;
            j[8] = 1.0;
        }),
    )?;
    let mut check = LaminatedCheck {
        path_space_thinness: 0.0,
        slice_rank: 0.0,
    };
    let mut jet = Jet::new(3, stage1.d());
    let d = stage1.d();
    for i in 0..pts {
        for k in 0..pts {
            for l in 0..pts {
                let u = [
                    i as f64 / (pts - 1) as f64,
                    k as f64 / (pts - 1) as f64,
                    l as f64 / (pts - 1) as f64,
                ];
                stage1.jet_into(&u, &mut jet);
                let w = (2.0 * PI * u[1]).sin() / (2.0 * PI);
                let (ca, cb) = (b * w, -(1.0 + u[2] * b * (2.0 * PI * u[1]).cos()));
                let r: f64 = (0..d)
                    .map(|q| (ca * jet.col(1)[q] + cb * jet.col(2)[q]).powi(2))
                    .sum::<f64>()
                    .sqrt();
                check.path_space_thinness = check.path_space_thinness.max(r);

                stage2.jet_into(&u, &mut jet);
                let (ct, cx) = (jet.col(0), jet.col(2));
                let tt: f64 = ct.iter().map(|x| x * x).sum();
                let xx: f64 = cx.iter().map(|x| x * x).sum();
                let tx: f64 = ct.iter().zip(cx).map(|(p, q)| p * q).sum();
                check.slice_rank = check.slice_rank.max((tt * xx - tx * tx).max(0.0).sqrt());
            }
        }
    }
    Ok(check)
}
