//! Invariance, convergence and functoriality studies.

use std::sync::Arc;

use serde::Serialize;

use crate::algebra::{rng_from_seed, GroupSpec};
use crate::error::{Error, Result};
use crate::fields::cube::{
    concat, face, random_path, straight_path, upward_composable_three_paths,
    vertically_composable_three_paths, Cube, CubeMap, Extrude,
};
use crate::fields::form::FormField;
use crate::fields::triple::FormTriple;
use crate::linalg::{self, dist, Mat};

use super::engine::{path_holonomy, surface_holonomy, volume_holonomy, Resolution};
use super::theorems::{green, stokes};

#[derive(Clone, Debug, Serialize)]
pub struct InvarianceReport {
    pub level: usize,
    pub deviations: Vec<f64>,
    pub max_deviation: f64,
    #[serde(serialize_with = "super::ser_mat")]
    pub base_value: Mat,
}

fn holonomy_at_level(
    level: usize,
    t: &FormTriple,
    c: &dyn CubeMap,
    res: Resolution,
) -> Result<Mat> {
    let h = t.module.as_ref();
    match level {
        1 => Ok(path_holonomy(h.g(), &t.omega, c, 0.0, 1.0, res.nt)?.value),
        2 => Ok(surface_holonomy(h, &t.omega, &t.m, c, res.nt, res.ns)?
            .e
            .value),
        3 => Ok(volume_holonomy(t, c, res)?.l.value),
        other => Err(Error::Config(format!(
            "invariance level must be 1, 2 or 3, got {other}"
        ))),
    }
}

/// Recomputes the level-`level` holonomy for every deformation of `base`
/// and reports the deviations from the undeformed value.
pub fn invariance_suite(
    level: usize,
    t: &FormTriple,
    base: &dyn CubeMap,
    perturbations: &[Cube],
    res: Resolution,
) -> Result<InvarianceReport> {
    let base_value = holonomy_at_level(level, t, base, res)?;
    let deviations = perturbations
        .iter()
        .map(|c| {
            Ok(dist(
                &holonomy_at_level(level, t, c.as_ref(), res)?,
                &base_value,
            ))
        })
        .collect::<Result<Vec<f64>>>()?;
    let max_deviation = deviations.iter().cloned().fold(0.0, f64::max);
    Ok(InvarianceReport {
        level,
        deviations,
        max_deviation,
        base_value,
    })
}

/// Least-squares slope of `-log(error)` against `log(N)`, ignoring errors
/// at the rounding floor.
pub fn fitted_order(ns: &[usize], errors: &[f64]) -> f64 {
    let pts: Vec<(f64, f64)> = ns
        .iter()
        .zip(errors)
        .filter(|(_, e)| **e > 1e-14)
        .map(|(n, e)| ((*n as f64).ln(), -e.ln()))
        .collect();
    if pts.len() < 2 {
        return f64::NAN;
    }
    let m = pts.len() as f64;
    let (sx, sy) = pts.iter().fold((0.0, 0.0), |(a, b), (x, y)| (a + x, b + y));
    let (mx, my) = (sx / m, sy / m);
    let num: f64 = pts.iter().map(|(x, y)| (x - mx) * (y - my)).sum();
    let den: f64 = pts.iter().map(|(x, _)| (x - mx).powi(2)).sum();
    num / den
}

/// Problems with a known limit or a residual that must vanish.
#[derive(Clone)]
pub enum ConvergenceFamily {
    /// Constant `omega = A dx_1` along the unit segment of the `x_1` axis,
    /// against `exp(A)`.
    ConstExp { dim: usize, seed: u64 },
    /// Green residual of a surface.
    Green { triple: Box<FormTriple>, cube: Cube },
    /// Stokes residual of a good 3-path.
    Stokes { triple: Box<FormTriple>, cube: Cube },
}

impl ConvergenceFamily {
    pub fn name(&self) -> &'static str {
        match self {
            ConvergenceFamily::ConstExp { .. } => "const-exp",
            ConvergenceFamily::Green { .. } => "green",
            ConvergenceFamily::Stokes { .. } => "stokes",
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct ConvergenceStudy {
    pub family: String,
    pub n: Vec<usize>,
    pub errors: Vec<f64>,
    pub order: f64,
}

/// Errors (or residuals) of `family` at each resolution in `ns`.
pub fn convergence(family: &ConvergenceFamily, ns: &[usize]) -> Result<ConvergenceStudy> {
    let errors = match family {
        ConvergenceFamily::ConstExp { dim, seed } => {
            let group = GroupSpec::general_linear(*dim)?;
            let a = group.sample_algebra(&mut rng_from_seed(*seed));
            let d = 2;
            let omega = FormField::from_terms(d, 1, a.shape(), [(vec![0], vec![0; d], a.clone())])?;
            let gamma = straight_path(&[0.0, 0.3], &[1.0, 0.3])?;
            let exact = linalg::expm(&a);
            ns.iter()
                .map(|&n| {
                    Ok(dist(
                        &path_holonomy(&group, &omega, gamma.as_ref(), 0.0, 1.0, n)?.value,
                        &exact,
                    ))
                })
                .collect::<Result<Vec<f64>>>()?
        }
        ConvergenceFamily::Green { triple, cube } => ns
            .iter()
            .map(|&n| Ok(green(triple, cube.as_ref(), Resolution::uniform(n))?.residual))
            .collect::<Result<Vec<f64>>>()?,
        ConvergenceFamily::Stokes { triple, cube } => ns
            .iter()
            .map(|&n| Ok(stokes(triple, cube.as_ref(), Resolution::uniform(n))?.residual))
            .collect::<Result<Vec<f64>>>()?,
    };
    Ok(ConvergenceStudy {
        family: family.name().into(),
        order: fitted_order(ns, &errors),
        n: ns.to_vec(),
        errors,
    })
}

/// Composition laws of the holonomy functor, each compared with the
/// theorem residual of the same resolution.
#[derive(Clone, Debug, Serialize)]
pub struct FunctorReport {
    /// `|e(G then G') - e(G) e(G')|`.
    pub surface_vertical: f64,
    /// `|e(gamma # G) - g(gamma) |> e(G)|`.
    pub surface_whisker: f64,
    /// `|l(J then_x J') - l(J) l(J')|`.
    pub volume_upward: f64,
    /// `|l(J then_s J') - (e |>' l(J')) l(J)|` with `e` the surface
    /// holonomy of the x = 0 face of `J`.
    pub volume_vertical: f64,
    /// Green residual of the composite surface.
    pub green_residual: f64,
    /// Stokes residual of the vertical composite.
    pub stokes_residual: f64,
    /// Whether each composite ran on a grid aligned with its pieces.
    pub aligned: bool,
}

/// Checks the composition laws on seeded cubes in `R^d`. With `aligned`
/// the composite runs at `res` and each piece at half resolution along the
/// composition axis, so the discretizations coincide; otherwise all runs
/// use `res`.
pub fn functor_laws(
    t: &FormTriple,
    seed: u64,
    res: Resolution,
    aligned: bool,
) -> Result<FunctorReport> {
    let h = t.module.as_ref();
    let d = t.ambient_dim();
    let half = |n: usize| if aligned { n / 2 } else { n };
    if aligned && (res.nt % 4 != 0 || res.ns % 4 != 0 || res.nx % 2 != 0) {
        return Err(Error::Config(
            "aligned functor checks need N_t, N_s divisible by 4 and N_x even".into(),
        ));
    }

    // Surfaces: x = 0 faces of two vertically composable 3-paths.
    let (j1, j2) = vertically_composable_three_paths(d, seed)?;
    let (s1, s2) = (face(j1.clone(), 2, 0.0)?, face(j2.clone(), 2, 0.0)?);
    let vert = concat(s1.clone(), s2.clone(), 1)?;
    let e_vert = surface_holonomy(h, &t.omega, &t.m, vert.as_ref(), res.nt, res.ns)?
        .e
        .value;
    let e1 = surface_holonomy(h, &t.omega, &t.m, s1.as_ref(), res.nt, half(res.ns))?
        .e
        .value;
    let e2 = surface_holonomy(h, &t.omega, &t.m, s2.as_ref(), res.nt, half(res.ns))?
        .e
        .value;
    let surface_vertical = dist(&e_vert, &(&e1 * &e2));
    let green_residual = green(t, vert.as_ref(), res)?.residual;

    let start = s1.eval(&[0.0, 0.0]);
    let mut rng = rng_from_seed(seed ^ 0x5eed);
    let from: Vec<f64> = start.iter().map(|x| x - 0.4).collect();
    let gamma = random_path(&from, &start, 0.3, &mut rng)?;
    let whiskered = concat(Arc::new(Extrude::new(gamma.clone(), 1)), s1.clone(), 0)?;
    let e_w = surface_holonomy(h, &t.omega, &t.m, whiskered.as_ref(), res.nt, res.ns)?
        .e
        .value;
    let g = path_holonomy(
        h.g(),
        &t.omega,
        gamma.as_ref(),
        0.0,
        1.0,
        if aligned { res.nt } else { 2 * res.nt },
    )?;
    let e_s1 = surface_holonomy(h, &t.omega, &t.m, s1.as_ref(), half(res.nt), res.ns)?
        .e
        .value;
    let surface_whisker = dist(&e_w, &h.act_e(&g.value, &e_s1)?);

    // Volumes.
    let (u1, u2) = upward_composable_three_paths(d, seed)?;
    let up = concat(u1.clone(), u2.clone(), 2)?;
    let l_up = volume_holonomy(t, up.as_ref(), res)?.l.value;
    let hx = Resolution {
        nx: half(res.nx),
        ..res
    };
    let l1 = volume_holonomy(t, u1.as_ref(), hx)?.l.value;
    let l2 = volume_holonomy(t, u2.as_ref(), hx)?.l.value;
    let volume_upward = dist(&l_up, &(&l1 * &l2));

    let vj = concat(j1.clone(), j2.clone(), 1)?;
    let run = volume_holonomy(t, vj.as_ref(), res)?;
    let hs = Resolution {
        ns: half(res.ns),
        ..res
    };
    let a = volume_holonomy(t, j1.as_ref(), hs)?;
    let b = volume_holonomy(t, j2.as_ref(), hs)?;
    let expected = h.derived_action(&a.e_start, &b.l.value)? * &a.l.value;
    let volume_vertical = dist(&run.l.value, &expected);
    let stokes_residual = stokes(t, vj.as_ref(), res)?.residual;

    Ok(FunctorReport {
        surface_vertical,
        surface_whisker,
        volume_upward,
        volume_vertical,
        green_residual,
        stokes_residual,
        aligned,
    })
}
