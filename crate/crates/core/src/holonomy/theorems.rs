//! Boundary identities between holonomies of adjacent dimension.

use serde::Serialize;

use crate::algebra::LieTwoCrossedModule;
use crate::error::{Error, Result};
use crate::fields::cube::{interchange_cube, Cube, CubeMap, Jet};
use crate::fields::form::FormField;
use crate::fields::triple::{curvature, two_curvature, FormTriple};
use crate::gray::{interchange_cell, GrayCell};
use crate::linalg::{self, dist, Mat};

use super::engine::{
    cumulative_simpson, rk4_sampled, simpson, surface_holonomy, volume_holonomy,
    volume_holonomy_factors, Resolution,
};

#[derive(Clone, Debug, Serialize)]
pub struct GreenReport {
    /// `|partial(e)^-1 g_start - g_end|`.
    pub residual: f64,
    #[serde(serialize_with = "super::ser_mat")]
    pub e: Mat,
    #[serde(serialize_with = "super::ser_mat")]
    pub g_start: Mat,
    #[serde(serialize_with = "super::ser_mat")]
    pub g_end: Mat,
    pub drift: f64,
}

/// Surface holonomy of `gamma` against the path holonomies of its s-faces.
pub fn green(t: &FormTriple, gamma: &dyn CubeMap, res: Resolution) -> Result<GreenReport> {
    let h = t.module.as_ref();
    let run = surface_holonomy(h, &t.omega, &t.m, gamma, res.nt, res.ns)?;
    let de = h.g().inv(&h.partial(&run.e.value))?;
    Ok(GreenReport {
        residual: dist(&(de * &run.g_start), &run.g_end),
        e: run.e.value,
        g_start: run.g_start,
        g_end: run.g_end,
        drift: run.e.drift,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct StokesReport {
    /// `|delta(l)^-1 e_start - e_end|`.
    pub residual: f64,
    #[serde(serialize_with = "super::ser_mat")]
    pub l: Mat,
    #[serde(serialize_with = "super::ser_mat")]
    pub e_start: Mat,
    #[serde(serialize_with = "super::ser_mat")]
    pub e_end: Mat,
    pub drift: f64,
}

/// Volume holonomy of `j` against the surface holonomies of its x-faces.
pub fn stokes(t: &FormTriple, j: &dyn CubeMap, res: Resolution) -> Result<StokesReport> {
    let h = t.module.as_ref();
    let run = volume_holonomy(t, j, res)?;
    let dl = h.e().inv(&h.delta(&run.l.value))?;
    Ok(StokesReport {
        residual: dist(&(dl * &run.e_start), &run.e_end),
        l: run.l.value,
        e_start: run.e_start,
        e_end: run.e_end,
        drift: run.l.drift,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct InterchangeReport {
    /// `|l_cube - e |>' {e^-1, g |> e'}^-1|`.
    pub residual: f64,
    /// Mismatch of the E-parts: the x = 0 face of the cube against
    /// `e (g_1 |> e')`.
    pub e_residual: f64,
    /// Stokes residual of the interchange cube at the same resolution.
    pub stokes_residual: f64,
    #[serde(serialize_with = "super::ser_mat")]
    pub l_cube: Mat,
    #[serde(serialize_with = "super::ser_mat")]
    pub l_formula: Mat,
    pub factor: f64,
}

/// Volume holonomy of the interchange cube of `g` and `gp` against the
/// interchange 3-cell built from their surface holonomies.
pub fn interchange(
    t: &FormTriple,
    g: Cube,
    gp: Cube,
    res: Resolution,
) -> Result<InterchangeReport> {
    Ok(interchange_factors(t, g, gp, res, &[t.factor])?
        .pop()
        .unwrap())
}

/// [`interchange`] for several values of the lifting factor.
pub fn interchange_factors(
    t: &FormTriple,
    g: Cube,
    gp: Cube,
    res: Resolution,
    factors: &[f64],
) -> Result<Vec<InterchangeReport>> {
    let h = t.module.as_ref();
    let module: crate::gray::Module = t.module.clone();
    let first = surface_holonomy(h, &t.omega, &t.m, g.as_ref(), res.nt, res.ns)?;
    let second = surface_holonomy(h, &t.omega, &t.m, gp.as_ref(), res.nt, res.ns)?;
    let a = GrayCell::two(&module, first.g_start.clone(), first.e.value.clone());
    let b = GrayCell::two(&module, second.g_start.clone(), second.e.value.clone());
    let cell = interchange_cell(&a, &b)?;
    let l_formula = cell.l().clone();

    let cube = interchange_cube(g, gp)?;
    let runs = volume_holonomy_factors(t, cube.as_ref(), res, factors)?;
    runs.into_iter()
        .zip(factors)
        .map(|(run, &factor)| {
            let dl = h.e().inv(&h.delta(&run.l.value))?;
            Ok(InterchangeReport {
                residual: dist(&run.l.value, &l_formula),
                e_residual: dist(&run.e_start, &cell.e()),
                stokes_residual: dist(&(dl * &run.e_start), &run.e_end),
                l_cube: run.l.value,
                l_formula: l_formula.clone(),
                factor,
            })
        })
        .collect()
}

/// Interchange residuals for one value of the lifting factor.
#[derive(Clone, Debug, Serialize)]
pub struct FactorScan {
    pub factor: f64,
    pub residuals: Vec<f64>,
    pub max_residual: f64,
}

/// Runs the interchange check on every scenario for each factor.
pub fn interchange_factor_study(
    scenarios: &[(FormTriple, Cube, Cube)],
    factors: &[f64],
    res: Resolution,
) -> Result<Vec<FactorScan>> {
    let per_scenario = scenarios
        .iter()
        .map(|(t, g, gp)| interchange_factors(t, g.clone(), gp.clone(), res, factors))
        .collect::<Result<Vec<_>>>()?;
    Ok(factors
        .iter()
        .enumerate()
        .map(|(k, &factor)| {
            let residuals: Vec<f64> = per_scenario.iter().map(|r| r[k].residual).collect();
            let max_residual = residuals.iter().cloned().fold(0.0, f64::max);
            FactorScan {
                factor,
                residuals,
                max_residual,
            }
        })
        .collect())
}

/// The pieces of the path-space identity at one plot point `(a, b)`.
struct PlotSlice {
    /// `int g |> A(d_t, d_a)` and `int g |> A(d_t, d_b)`.
    i_a: Mat,
    i_b: Mat,
    /// `-int g |> (D A)(d_t, d_a, d_b) - int [P_a |> Q_b - P_b |> Q_a]`.
    rhs: Mat,
}

struct PlotForms<'a> {
    h: &'a dyn LieTwoCrossedModule,
    omega: &'a FormField,
    a: &'a FormField,
    big_omega: FormField,
    da: FormField,
    plot: &'a dyn CubeMap,
    nt: usize,
}

impl PlotForms<'_> {
    fn slice(&self, pa: f64, pb: f64, with_rhs: bool) -> Result<PlotSlice> {
        let steps = 2 * self.nt;
        let k = 1.0 / steps as f64;
        let alg = self.h.algebra();
        let [sg, se, _] = alg.shapes();
        let mut jet = Jet::new(3, self.plot.d());
        let mut gen = Vec::with_capacity(2 * steps + 1);
        let mut jets = Vec::with_capacity(steps + 1);
        for i in 0..=2 * steps {
            self.plot
                .jet_into(&[i as f64 / (2 * steps) as f64, pa, pb], &mut jet);
            let mut w = linalg::zeros(sg.0, sg.1);
            self.omega.eval_into(&jet.x, &[jet.col(0)], &mut w);
            gen.push(w);
            if i % 2 == 0 {
                jets.push(jet.clone());
            }
        }
        let g = rk4_sampled(&self.h.g().identity(), &gen, k);
        let mut q_a = Vec::with_capacity(steps + 1);
        let mut q_b = Vec::with_capacity(steps + 1);
        let mut dterm = Vec::new();
        let mut w_a = Vec::new();
        let mut w_b = Vec::new();
        for (gi, j) in g.iter().zip(&jets) {
            let (ct, ca, cb) = (j.col(0), j.col(1), j.col(2));
            q_a.push(self.h.act_e_alg(gi, &self.a.eval(&j.x, &[ct, ca]))?);
            q_b.push(self.h.act_e_alg(gi, &self.a.eval(&j.x, &[ct, cb]))?);
            if with_rhs {
                let gi_inv = linalg::inverse(gi)?;
                dterm.push(self.h.act_e_alg(gi, &self.da.eval(&j.x, &[ct, ca, cb]))?);
                w_a.push(gi * self.big_omega.eval(&j.x, &[ct, ca]) * &gi_inv);
                w_b.push(gi * self.big_omega.eval(&j.x, &[ct, cb]) * &gi_inv);
            }
        }
        let rhs = if with_rhs {
            let p_a = cumulative_simpson(&w_a, k);
            let p_b = cumulative_simpson(&w_b, k);
            let cross: Vec<Mat> = (0..=steps)
                .map(|i| alg.act_e(&p_a[i], &q_b[i]) - alg.act_e(&p_b[i], &q_a[i]))
                .collect();
            -(simpson(&dterm, k) + simpson(&cross, k))
        } else {
            linalg::zeros(se.0, se.1)
        };
        Ok(PlotSlice {
            i_a: simpson(&q_a, k),
            i_b: simpson(&q_b, k),
            rhs,
        })
    }
}

/// Largest mismatch, over interior plot points, between the exterior
/// derivative of the twisted integral of `a` (by central differences with
/// step `h_fd`) and its expression through `D a` and the curvature.
pub fn baez_schreiber_residual(
    h: &dyn LieTwoCrossedModule,
    omega: &FormField,
    a: &FormField,
    plot: &dyn CubeMap,
    nt: usize,
    h_fd: f64,
) -> Result<f64> {
    if plot.n() != 3 || a.degree() != 2 || omega.degree() != 1 {
        return Err(Error::DimensionMismatch(
            "needs a 1-form, a 2-form and a plot [0,1]x[0,1]^2".into(),
        ));
    }
    if plot.d() != omega.ambient_dim() || plot.d() != a.ambient_dim() {
        return Err(Error::DimensionMismatch(
            "plot and forms live in different R^d".into(),
        ));
    }
    let pf = PlotForms {
        h,
        omega,
        a,
        big_omega: curvature(h, omega)?,
        da: two_curvature(h, omega, a)?,
        plot,
        nt,
    };
    let pts = [0.3, 0.5, 0.7];
    let mut worst: f64 = 0.0;
    for &pa in &pts {
        for &pb in &pts {
            let centre = pf.slice(pa, pb, true)?;
            let ap = pf.slice(pa + h_fd, pb, false)?;
            let am = pf.slice(pa - h_fd, pb, false)?;
            let bp = pf.slice(pa, pb + h_fd, false)?;
            let bm = pf.slice(pa, pb - h_fd, false)?;
            let lhs = (ap.i_b - am.i_b - (bp.i_a - bm.i_a)) / (2.0 * h_fd);
            worst = worst.max((lhs - centre.rhs).norm());
        }
    }
    Ok(worst)
}
