//! Wilson 3-sphere observables.

use std::sync::Arc;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::fields::cube::{
    concat, reverse, Affine, Cube, CubeMap, Extrude, FnCube, Jet, Smoothing,
};
use crate::fields::triple::FormTriple;
use crate::linalg::{self, dist, dist_identity, Mat};

use super::engine::{path_holonomy, volume_holonomy, Resolution};

#[derive(Clone, Debug, Serialize)]
pub struct WilsonReport {
    #[serde(serialize_with = "super::ser_mat")]
    pub w: Mat,
    /// `|W - 1|`.
    pub defect: f64,
    /// `|delta(W) - 1|`; zero for an exact observable.
    pub delta_defect: f64,
    /// `|W(S*) W(S) - 1|` for the orientation-reversed sphere.
    pub reversal_defect: Option<f64>,
    /// `|W(S) - g |> W(R S)|` for a rotated parametrization `R S` whose base
    /// point is joined to the original one by the path with holonomy `g`.
    pub conjugation_defect: Option<f64>,
    /// `|l(gamma . R S) - g |> W(R S)|` for the explicitly whiskered cube.
    pub whiskering_defect: Option<f64>,
    /// Largest distance of a boundary sample from the base point.
    pub boundary_spread: f64,
}

/// Samples the boundary of the cube and returns the largest distance from
/// the image of the corner.
pub fn boundary_spread(s: &dyn CubeMap) -> f64 {
    let base = s.eval(&[0.0, 0.0, 0.0]);
    let pts = 9;
    let mut worst: f64 = 0.0;
    for axis in 0..3 {
        for side in [0.0, 1.0] {
            for i in 0..pts {
                for k in 0..pts {
                    let (p, q) = (i as f64 / (pts - 1) as f64, k as f64 / (pts - 1) as f64);
                    let u = match axis {
                        0 => [side, p, q],
                        1 => [p, side, q],
                        _ => [p, q, side],
                    };
                    let x = s.eval(&u);
                    worst = worst.max(
                        x.iter()
                            .zip(&base)
                            .map(|(a, b)| (a - b).abs())
                            .fold(0.0, f64::max),
                    );
                }
            }
        }
    }
    worst
}

/// The path `u -> exp(phi(u) k) p` with sitting instants.
pub fn rotation_path(k: &Mat, p: &[f64]) -> Cube {
    let k = k.clone();
    let p = Mat::from_column_slice(p.len(), 1, p);
    let sm = Smoothing::standard();
    let d = p.nrows();
    Arc::new(FnCube::new(
        1,
        d,
        Arc::new(move |u: &[f64], out: &mut Jet| {
            let (f, df) = sm.both(u[0]);
            let x = linalg::expm(&(&k * f)) * &p;
            let v = &k * &x * df;
            out.x.copy_from_slice(x.as_slice());
            out.col_mut(0).copy_from_slice(v.as_slice());
        }),
    ))
}

/// Optional checks run alongside `W`.
#[derive(Clone, Debug, Default)]
pub struct WilsonOptions {
    /// Recompute on the orientation-reversed sphere.
    pub reversal: bool,
    /// Generator `k` of a rotation `exp(k)` of the parametrization.
    pub rotation: Option<Mat>,
    /// With a rotation, also integrate the explicitly whiskered cube (four
    /// times the t-resolution).
    pub whisker: bool,
}

/// `W = l_S` for a sphere map `s`.
pub fn wilson_sphere(
    t: &FormTriple,
    s: Cube,
    res: Resolution,
    opts: &WilsonOptions,
) -> Result<WilsonReport> {
    let h = t.module.as_ref();
    if s.n() != 3 {
        return Err(Error::DimensionMismatch(format!(
            "sphere maps are 3-cubes, got a {}-cube",
            s.n()
        )));
    }
    let spread = boundary_spread(s.as_ref());
    if spread > 1e-9 {
        return Err(Error::NotASphereMap(spread));
    }
    let w = volume_holonomy(t, s.as_ref(), res)?.l.value;
    let delta_defect = dist_identity(&h.delta(&w));
    let reversal_defect = if opts.reversal {
        let ws = volume_holonomy(t, reverse(s.clone(), 2)?.as_ref(), res)?
            .l
            .value;
        Some(dist_identity(&(ws * &w)))
    } else {
        None
    };
    let (conjugation_defect, whiskering_defect) = match &opts.rotation {
        Some(k) => {
            let d = s.d();
            if k.shape() != (d, d) {
                return Err(Error::DimensionMismatch(format!(
                    "rotation generator must be {d}x{d}"
                )));
            }
            let rotated: Cube = Arc::new(Affine::new(s.clone(), linalg::expm(k), vec![0.0; d])?);
            let w_rot = volume_holonomy(t, rotated.as_ref(), res)?.l.value;
            let base = s.eval(&[0.0, 0.0, 0.0]);
            let gamma = rotation_path(k, &base);
            let g = path_holonomy(h.g(), &t.omega, gamma.as_ref(), 0.0, 1.0, 2 * res.nt)?.value;
            let moved = h.act_l(&g, &w_rot)?;
            let whiskering = if opts.whisker {
                let there: Cube = Arc::new(Extrude::new(gamma.clone(), 1));
                let there: Cube = Arc::new(Extrude::new(there, 2));
                let back = reverse(there.clone(), 0)?;
                let whiskered = concat(concat(there, rotated, 0)?, back, 0)?;
                // The rotated sphere occupies a quarter of the t-axis.
                let wres = Resolution {
                    nt: 4 * res.nt,
                    ..res
                };
                let lw = volume_holonomy(t, whiskered.as_ref(), wres)?.l.value;
                Some(dist(&lw, &moved))
            } else {
                None
            };
            (Some(dist(&w, &moved)), whiskering)
        }
        None => (None, None),
    };
    Ok(WilsonReport {
        defect: dist_identity(&w),
        w,
        delta_defect,
        reversal_defect,
        conjugation_defect,
        whiskering_defect,
        boundary_spread: spread,
    })
}
