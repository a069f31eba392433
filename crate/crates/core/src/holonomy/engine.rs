//! Integrators for the path, surface and volume holonomy equations.
//!
//! All three are classical RK4 schemes in matrix space for right
//! multiplicative equations `F' = F A`. The inner t-integrals use composite
//! Simpson on the Simpson nodes of the path integrator, so a path solved
//! with `2 N_t` RK4 steps supplies the running holonomy at every node.

use serde::Serialize;

use crate::algebra::{GroupSpec, LieTwoCrossedModule};
use crate::error::{Error, Result};
use crate::fields::cube::{CubeMap, Jet};
use crate::fields::form::FormField;
use crate::fields::triple::FormTriple;
use crate::linalg::{self, Mat};

/// Grid sizes: RK4 steps for paths, Simpson panels for t-integrals, RK4
/// steps in s and x.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct Resolution {
    pub nt: usize,
    pub ns: usize,
    pub nx: usize,
}

impl Resolution {
    pub fn uniform(n: usize) -> Self {
        Resolution {
            nt: n,
            ns: n,
            nx: n,
        }
    }
}

/// A holonomy value with its resolution and group-membership drift.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct HolonomyResult {
    #[serde(serialize_with = "crate::holonomy::ser_mat")]
    pub value: Mat,
    pub resolution: usize,
    /// Fitted order of accuracy, when a study has estimated one.
    pub order: Option<f64>,
    /// Membership residual of `value` in its target group.
    pub drift: f64,
}

impl HolonomyResult {
    fn new(value: Mat, resolution: usize, group: &GroupSpec) -> Self {
        let drift = group.residual(&value);
        HolonomyResult {
            value,
            resolution,
            order: None,
            drift,
        }
    }
}

/// One RK4 step of `F' = F A` with `A` sampled at the start, midpoint and end.
pub fn rk4_step(f: &Mat, a0: &Mat, ah: &Mat, a1: &Mat, h: f64) -> Mat {
    let k1 = f * a0;
    let k2 = (f + &k1 * (0.5 * h)) * ah;
    let k3 = (f + &k2 * (0.5 * h)) * ah;
    let k4 = (f + &k3 * h) * a1;
    f + (k1 + k2 * 2.0 + k3 * 2.0 + k4) * (h / 6.0)
}

/// Integrates `F' = F A` over `n` RK4 steps given `A` at the `2n+1` points
/// of the half-step grid, returning `F` at the `n+1` step nodes.
pub fn rk4_sampled(start: &Mat, a: &[Mat], h: f64) -> Vec<Mat> {
    let n = (a.len() - 1) / 2;
    let mut out = Vec::with_capacity(n + 1);
    out.push(start.clone());
    for j in 0..n {
        let next = rk4_step(&out[j], &a[2 * j], &a[2 * j + 1], &a[2 * j + 2], h);
        out.push(next);
    }
    out
}

/// Composite Simpson over `2m + 1` equally spaced values with spacing `k`.
pub fn simpson(f: &[Mat], k: f64) -> Mat {
    let n = f.len() - 1;
    debug_assert!(n % 2 == 0 && n >= 2);
    let mut acc = &f[0] + &f[n];
    for (i, fi) in f.iter().enumerate().take(n).skip(1) {
        linalg::axpy(&mut acc, if i % 2 == 1 { 4.0 } else { 2.0 }, fi);
    }
    acc * (k / 3.0)
}

/// Prefix integrals `P_i = int_0^{t_i} f` at every node, fourth order at
/// even nodes and third order at odd ones.
pub fn cumulative_simpson(f: &[Mat], k: f64) -> Vec<Mat> {
    let n = f.len() - 1;
    let mut out = Vec::with_capacity(n + 1);
    out.push(f[0].clone() * 0.0);
    let mut j = 0;
    while j + 2 <= n {
        let base = out[j].clone();
        let half = &base + (&f[j] * 5.0 + &f[j + 1] * 8.0 - &f[j + 2]) * (k / 12.0);
        let full = &base + (&f[j] + &f[j + 1] * 4.0 + &f[j + 2]) * (k / 3.0);
        out.push(half);
        out.push(full);
        j += 2;
    }
    out
}

/// `A(t) = omega(gamma'(t))` along `gamma` at the `2n+1` half-step points
/// of `[t0, t1]`.
fn path_generator(omega: &FormField, gamma: &dyn CubeMap, t0: f64, t1: f64, n: usize) -> Vec<Mat> {
    let (r, c) = omega.shape();
    let mut jet = Jet::new(1, gamma.d());
    (0..=2 * n)
        .map(|k| {
            let t = t0 + (t1 - t0) * k as f64 / (2 * n) as f64;
            gamma.jet_into(&[t], &mut jet);
            let mut a = linalg::zeros(r, c);
            omega.eval_into(&jet.x, &[jet.col(0)], &mut a);
            a * (t1 - t0)
        })
        .collect()
}

/// `g(t0, t1)` solving `dF/dt = F omega(gamma')`, with `n` RK4 steps.
pub fn path_holonomy(
    group: &GroupSpec,
    omega: &FormField,
    gamma: &dyn CubeMap,
    t0: f64,
    t1: f64,
    n: usize,
) -> Result<HolonomyResult> {
    check_cube(omega, gamma, 1)?;
    if n < 1 {
        return Err(Error::Config(
            "path holonomy needs at least one step".into(),
        ));
    }
    let a = path_generator(omega, gamma, t0, t1, n);
    let f = rk4_sampled(&group.identity(), &a, 1.0 / n as f64);
    Ok(HolonomyResult::new(f[n].clone(), n, group))
}

fn check_cube(form: &FormField, c: &dyn CubeMap, n: usize) -> Result<()> {
    if c.n() != n {
        return Err(Error::DimensionMismatch(format!(
            "expected a {n}-cube, got a {}-cube",
            c.n()
        )));
    }
    if form.ambient_dim() != c.d() {
        return Err(Error::DimensionMismatch(format!(
            "forms live on R^{}, the cube maps into R^{}",
            form.ambient_dim(),
            c.d()
        )));
    }
    Ok(())
}

/// Everything the outer integrators need from one t-slice of a cube.
#[derive(Clone, Debug)]
pub struct SliceData {
    /// Holonomy of the slice path.
    pub g_end: Mat,
    /// `int_0^1 g(0,t) |> m(d_t, d_s) dt`.
    pub surface: Mat,
    /// `int_0^1 g(0,t) |> theta(d_t, d_s, d_x) dt`, for 3-cubes.
    pub theta: Option<Mat>,
    /// The twisted double integral of `m` against `m` over the lifting,
    /// for 3-cubes.
    pub mm: Option<Mat>,
}

/// Computes slice integrals with `2 nt` path steps and `nt` Simpson panels
/// pairs, i.e. `2 nt + 1` Simpson nodes.
pub struct SliceIntegrator<'a> {
    pub h: &'a dyn LieTwoCrossedModule,
    pub omega: &'a FormField,
    pub m: &'a FormField,
    pub theta: Option<&'a FormField>,
    pub cube: &'a dyn CubeMap,
    pub nt: usize,
}

impl SliceIntegrator<'_> {
    /// Slice at `s` (and `x` for 3-cubes). `volume` requests the theta and
    /// double integrals.
    pub fn slice(&self, s: f64, x: f64, volume: bool) -> Result<SliceData> {
        let n = self.cube.n();
        let d = self.cube.d();
        let nodes = 2 * self.nt;
        let steps = 2 * self.nt;
        let hstep = 1.0 / steps as f64;
        let alg = self.h.algebra();
        let [sg, se, sl] = alg.shapes();
        let mut jet = Jet::new(n, d);
        let mut u = [0.0, s, x];

        // Generator at the 2*steps+1 half-step points; forms at even points.
        let mut gen = Vec::with_capacity(2 * steps + 1);
        let mut m_ts = Vec::with_capacity(nodes + 1);
        let mut m_tx = Vec::new();
        let mut th = Vec::new();
        for k in 0..=2 * steps {
            u[0] = k as f64 / (2 * steps) as f64;
            self.cube.jet_into(&u[..n], &mut jet);
            let mut a = linalg::zeros(sg.0, sg.1);
            self.omega.eval_into(&jet.x, &[jet.col(0)], &mut a);
            gen.push(a);
            if k % 2 == 0 {
                let mut v = linalg::zeros(se.0, se.1);
                self.m.eval_into(&jet.x, &[jet.col(0), jet.col(1)], &mut v);
                m_ts.push(v);
                if volume {
                    let mut w = linalg::zeros(se.0, se.1);
                    self.m.eval_into(&jet.x, &[jet.col(0), jet.col(2)], &mut w);
                    m_tx.push(w);
                    let mut y = linalg::zeros(sl.0, sl.1);
                    if let Some(theta) = self.theta {
                        theta.eval_into(&jet.x, &[jet.col(0), jet.col(1), jet.col(2)], &mut y);
                    }
                    th.push(y);
                }
            }
        }
        let g = rk4_sampled(&self.h.g().identity(), &gen, hstep);

        let q_s: Vec<Mat> = g
            .iter()
            .zip(&m_ts)
            .map(|(gi, mi)| self.h.act_e_alg(gi, mi))
            .collect::<Result<_>>()?;
        let surface = simpson(&q_s, hstep);
        let (theta, mm) = if volume {
            let q_x: Vec<Mat> = g
                .iter()
                .zip(&m_tx)
                .map(|(gi, mi)| self.h.act_e_alg(gi, mi))
                .collect::<Result<_>>()?;
            let t_vals: Vec<Mat> = g
                .iter()
                .zip(&th)
                .map(|(gi, yi)| self.h.act_l_alg(gi, yi))
                .collect::<Result<_>>()?;
            let p_s = cumulative_simpson(&q_s, hstep);
            let p_x = cumulative_simpson(&q_x, hstep);
            let integrand: Vec<Mat> = (0..=nodes)
                .map(|i| alg.lifting(&p_s[i], &q_x[i]) - alg.lifting(&p_x[i], &q_s[i]))
                .collect();
            (
                Some(simpson(&t_vals, hstep)),
                Some(simpson(&integrand, hstep)),
            )
        } else {
            (None, None)
        };
        Ok(SliceData {
            g_end: g[steps].clone(),
            surface,
            theta,
            mm,
        })
    }
}

/// Output of the surface integrator.
#[derive(Clone, Debug)]
pub struct SurfaceRun {
    /// `e(0, 1)`.
    pub e: HolonomyResult,
    /// `e(0, s_j)` at the RK4 nodes `s_j = j / ns`.
    pub e_nodes: Vec<Mat>,
    /// Holonomy of the `s = 0` and `s = 1` slices.
    pub g_start: Mat,
    pub g_end: Mat,
}

fn surface_run(
    si: &SliceIntegrator<'_>,
    ns: usize,
    x: f64,
) -> Result<(SurfaceRun, Vec<SliceData>)> {
    let slices: Vec<SliceData> = (0..=2 * ns)
        .map(|k| si.slice(k as f64 / (2 * ns) as f64, x, si.cube.n() == 3))
        .collect::<Result<_>>()?;
    let gen: Vec<Mat> = slices.iter().map(|sd| sd.surface.clone()).collect();
    let e_nodes = rk4_sampled(&si.h.e().identity(), &gen, 1.0 / ns as f64);
    let run = SurfaceRun {
        e: HolonomyResult::new(e_nodes[ns].clone(), ns, si.h.e()),
        g_start: slices[0].g_end.clone(),
        g_end: slices[2 * ns].g_end.clone(),
        e_nodes,
    };
    Ok((run, slices))
}

/// `e(0,1)` solving `de/ds = e int_0^1 g(0,t) |> m(d_t, d_s) dt`.
pub fn surface_holonomy(
    h: &dyn LieTwoCrossedModule,
    omega: &FormField,
    m: &FormField,
    gamma: &dyn CubeMap,
    nt: usize,
    ns: usize,
) -> Result<SurfaceRun> {
    check_cube(omega, gamma, 2)?;
    let si = SliceIntegrator {
        h,
        omega,
        m,
        theta: None,
        cube: gamma,
        nt,
    };
    Ok(surface_run(&si, ns, 0.0)?.0)
}

/// `int_0^1 g(0,t) |> theta(d_t, d_s, d_x) dt` on the slice `(s, x)`.
pub fn twisted_integral_theta(
    t: &FormTriple,
    j: &dyn CubeMap,
    s: f64,
    x: f64,
    nt: usize,
) -> Result<Mat> {
    check_cube(&t.omega, j, 3)?;
    let si = SliceIntegrator {
        h: t.module.as_ref(),
        omega: &t.omega,
        m: &t.m,
        theta: Some(&t.theta),
        cube: j,
        nt,
    };
    Ok(si.slice(s, x, true)?.theta.unwrap())
}

/// `int_0^1 [ {P_s(t), Q_x(t)} - {P_x(t), Q_s(t)} ] dt` with
/// `Q_v = g |> m(d_t, v)` and `P_v` its prefix integral.
pub fn twisted_integral_mm(
    t: &FormTriple,
    j: &dyn CubeMap,
    s: f64,
    x: f64,
    nt: usize,
) -> Result<Mat> {
    check_cube(&t.omega, j, 3)?;
    let si = SliceIntegrator {
        h: t.module.as_ref(),
        omega: &t.omega,
        m: &t.m,
        theta: Some(&t.theta),
        cube: j,
        nt,
    };
    Ok(si.slice(s, x, true)?.mm.unwrap())
}

/// Output of the volume integrator.
#[derive(Clone, Debug)]
pub struct VolumeRun {
    /// `l(0, 1)`.
    pub l: HolonomyResult,
    /// Surface holonomies of the `x = 0` and `x = 1` slices.
    pub e_start: Mat,
    pub e_end: Mat,
    /// Path holonomies of the `s = 0` and `s = 1` faces at `x = 0`.
    pub g_start: Mat,
    pub g_end: Mat,
}

/// `l(0,1)` solving `dl/dx = -l Y(x)` with
/// `Y(x) = int_0^1 e(0,s) |>' [T(s,x) - (factor/6) MM(s,x)] ds`.
pub fn volume_holonomy(t: &FormTriple, j: &dyn CubeMap, res: Resolution) -> Result<VolumeRun> {
    Ok(volume_holonomy_factors(t, j, res, &[t.factor])?
        .pop()
        .unwrap())
}

/// [`volume_holonomy`] for several values of the lifting factor, sharing
/// the slice integrals (`Y` is affine in the factor).
pub fn volume_holonomy_factors(
    t: &FormTriple,
    j: &dyn CubeMap,
    res: Resolution,
    factors: &[f64],
) -> Result<Vec<VolumeRun>> {
    check_cube(&t.omega, j, 3)?;
    let h = t.module.as_ref();
    let si = SliceIntegrator {
        h,
        omega: &t.omega,
        m: &t.m,
        theta: Some(&t.theta),
        cube: j,
        nt: res.nt,
    };
    let (nx, ns) = (res.nx, res.ns);
    let hs = 1.0 / ns as f64;
    let mut y_theta = Vec::with_capacity(2 * nx + 1);
    let mut y_mm = Vec::with_capacity(2 * nx + 1);
    let mut e_start = None;
    let mut e_end = None;
    let mut g_faces = None;
    for k in 0..=2 * nx {
        let x = k as f64 / (2 * nx) as f64;
        let (run, slices) = surface_run(&si, ns, x)?;
        // e at the half-steps by cubic Hermite interpolation, with e' = e S.
        let slope = |jn: usize| &run.e_nodes[jn] * &slices[2 * jn].surface;
        let mut vt = Vec::with_capacity(2 * ns + 1);
        let mut vm = Vec::with_capacity(2 * ns + 1);
        for (i, sd) in slices.iter().enumerate() {
            let e = if i % 2 == 0 {
                run.e_nodes[i / 2].clone()
            } else {
                let jn = i / 2;
                (&run.e_nodes[jn] + &run.e_nodes[jn + 1]) * 0.5
                    + (slope(jn) - slope(jn + 1)) * (hs / 8.0)
            };
            vt.push(h.derived_action_alg(&e, sd.theta.as_ref().unwrap())?);
            vm.push(h.derived_action_alg(&e, sd.mm.as_ref().unwrap())?);
        }
        y_theta.push(simpson(&vt, 0.5 * hs));
        y_mm.push(simpson(&vm, 0.5 * hs));
        if k == 0 {
            e_start = Some(run.e.value.clone());
            g_faces = Some((run.g_start.clone(), run.g_end.clone()));
        }
        if k == 2 * nx {
            e_end = Some(run.e.value.clone());
        }
    }
    let (g_start, g_end) = g_faces.unwrap();
    let (e_start, e_end) = (e_start.unwrap(), e_end.unwrap());
    Ok(factors
        .iter()
        .map(|f| {
            let c = f / 6.0;
            let ys: Vec<Mat> = y_theta
                .iter()
                .zip(&y_mm)
                .map(|(a, b)| -(a - b * c))
                .collect();
            let l = rk4_sampled(&h.l().identity(), &ys, 1.0 / nx as f64);
            VolumeRun {
                l: HolonomyResult::new(l[nx].clone(), nx, h.l()),
                e_start: e_start.clone(),
                e_end: e_end.clone(),
                g_start: g_start.clone(),
                g_end: g_end.clone(),
            }
        })
        .collect())
}
