//! Parametrized cubes `[0,1]^n -> R^d` with exact first derivatives.

use std::f64::consts::PI;
use std::sync::{Arc, OnceLock};

use rand::RngExt;
use serde_json::{json, Value};

use crate::algebra::{rng_from_seed, Rng};
use crate::error::{Error, Result};
use crate::linalg::Mat;

use super::form::FormField;

/// Largest ambient dimension the combinators support without allocating.
pub const MAX_AMBIENT: usize = 16;
/// Default width of the sitting-instant zones.
pub const DEFAULT_EPSILON: f64 = 0.1;

/// Point and first derivatives of a cube map. Column `j` of the Jacobian,
/// the image of `d/du_j`, is `dx[j*d..(j+1)*d]`.
#[derive(Clone, Debug, PartialEq)]
pub struct Jet {
    pub x: Vec<f64>,
    pub dx: Vec<f64>,
    n: usize,
    d: usize,
}

impl Jet {
    pub fn new(n: usize, d: usize) -> Self {
        Jet {
            x: vec![0.0; d],
            dx: vec![0.0; n * d],
            n,
            d,
        }
    }

    pub fn col(&self, j: usize) -> &[f64] {
        &self.dx[j * self.d..(j + 1) * self.d]
    }

    pub fn col_mut(&mut self, j: usize) -> &mut [f64] {
        &mut self.dx[j * self.d..(j + 1) * self.d]
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn d(&self) -> usize {
        self.d
    }
}

pub trait CubeMap: Send + Sync {
    fn n(&self) -> usize;
    fn d(&self) -> usize;
    fn jet_into(&self, u: &[f64], out: &mut Jet);

    fn jet(&self, u: &[f64]) -> Jet {
        let mut j = Jet::new(self.n(), self.d());
        self.jet_into(u, &mut j);
        j
    }

    fn eval(&self, u: &[f64]) -> Vec<f64> {
        self.jet(u).x
    }

    /// JSON description, for maps that have one.
    fn to_json(&self) -> Option<Value> {
        None
    }
}

pub type Cube = Arc<dyn CubeMap>;

// ---------------------------------------------------------------------------
// Smoothing

const GL8_X: [f64; 8] = [
    -0.960_289_856_497_536_2,
    -0.796_666_477_413_626_7,
    -0.525_532_409_916_329,
    -0.183_434_642_495_649_8,
    0.183_434_642_495_649_8,
    0.525_532_409_916_329,
    0.796_666_477_413_626_7,
    0.960_289_856_497_536_2,
];
const GL8_W: [f64; 8] = [
    0.101_228_536_290_376_3,
    0.222_381_034_453_374_5,
    0.313_706_645_877_887_3,
    0.362_683_783_378_362,
    0.362_683_783_378_362,
    0.313_706_645_877_887_3,
    0.222_381_034_453_374_5,
    0.101_228_536_290_376_3,
];
const TABLE: usize = 512;

fn bump(u: f64) -> f64 {
    if u <= 0.0 || u >= 1.0 {
        0.0
    } else {
        (-1.0 / (u * (1.0 - u))).exp()
    }
}

fn gl8(a: f64, b: f64) -> f64 {
    let (m, r) = (0.5 * (a + b), 0.5 * (b - a));
    GL8_X
        .iter()
        .zip(&GL8_W)
        .map(|(x, w)| w * bump(m + r * x))
        .sum::<f64>()
        * r
}

/// The reparametrization `phi_eps`: 0 on `[0, eps]`, 1 on `[1-eps, 1]`,
/// the normalized integral of `exp(-1/(u(1-u)))` in between.
#[derive(Debug, Clone)]
pub struct Smoothing {
    eps: f64,
    cum: Vec<f64>,
}

impl Smoothing {
    pub fn new(eps: f64) -> Result<Self> {
        if !(eps >= 0.0 && eps < 0.5) {
            return Err(Error::Config(format!(
                "smoothing epsilon {eps} outside [0, 0.5)"
            )));
        }
        let mut cum = Vec::with_capacity(TABLE + 1);
        cum.push(0.0);
        for i in 0..TABLE {
            let a = i as f64 / TABLE as f64;
            let b = (i + 1) as f64 / TABLE as f64;
            cum.push(cum[i] + gl8(a, b));
        }
        Ok(Smoothing { eps, cum })
    }

    /// Shared instance for [`DEFAULT_EPSILON`].
    pub fn standard() -> Arc<Smoothing> {
        static S: OnceLock<Arc<Smoothing>> = OnceLock::new();
        S.get_or_init(|| Arc::new(Smoothing::new(DEFAULT_EPSILON).unwrap()))
            .clone()
    }

    pub fn epsilon(&self) -> f64 {
        self.eps
    }

    fn total(&self) -> f64 {
        self.cum[TABLE]
    }

    fn integral(&self, u: f64) -> f64 {
        let i = ((u * TABLE as f64) as usize).min(TABLE - 1);
        let a = i as f64 / TABLE as f64;
        self.cum[i] + gl8(a, u)
    }

    pub fn phi(&self, t: f64) -> f64 {
        let w = 1.0 - 2.0 * self.eps;
        let u = (t - self.eps) / w;
        if u <= 0.0 {
            0.0
        } else if u >= 1.0 {
            1.0
        } else {
            self.integral(u) / self.total()
        }
    }

    pub fn dphi(&self, t: f64) -> f64 {
        let w = 1.0 - 2.0 * self.eps;
        bump((t - self.eps) / w) / (self.total() * w)
    }

    /// `(phi(t), phi'(t))`.
    pub fn both(&self, t: f64) -> (f64, f64) {
        (self.phi(t), self.dphi(t))
    }
}

// ---------------------------------------------------------------------------
// Base maps

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Factor {
    /// `u^p`
    Pow(u32),
    /// `sin(k pi u)`
    Sin(f64),
    /// `cos(k pi u)`
    Cos(f64),
}

impl Factor {
    fn value_and_slope(self, u: f64) -> (f64, f64) {
        match self {
            Factor::Pow(0) => (1.0, 0.0),
            Factor::Pow(p) => (u.powi(p as i32), p as f64 * u.powi(p as i32 - 1)),
            Factor::Sin(k) => ((k * PI * u).sin(), k * PI * (k * PI * u).cos()),
            Factor::Cos(k) => ((k * PI * u).cos(), -k * PI * (k * PI * u).sin()),
        }
    }

    fn to_json(self) -> Value {
        match self {
            Factor::Pow(p) => json!({"pow": p}),
            Factor::Sin(k) => json!({"sin": k}),
            Factor::Cos(k) => json!({"cos": k}),
        }
    }

    fn from_json(v: &Value) -> Result<Self> {
        if let Some(p) = v.get("pow").and_then(Value::as_u64) {
            return Ok(Factor::Pow(p as u32));
        }
        if let Some(k) = v.get("sin").and_then(Value::as_f64) {
            return Ok(Factor::Sin(k));
        }
        if let Some(k) = v.get("cos").and_then(Value::as_f64) {
            return Ok(Factor::Cos(k));
        }
        if let Some(p) = v.as_u64() {
            return Ok(Factor::Pow(p as u32));
        }
        Err(Error::Config(format!("unknown factor {v}")))
    }
}

/// `coeff * prod_j f_j(u_j)` with `coeff` in `R^d`.
#[derive(Clone, Debug, PartialEq)]
pub struct SeparableTerm {
    pub coeff: Vec<f64>,
    pub factors: Vec<Factor>,
}

/// Finite sum of separable terms. With only power factors this is a
/// polynomial map.
#[derive(Clone, Debug, PartialEq)]
pub struct SeparableMap {
    n: usize,
    d: usize,
    terms: Vec<SeparableTerm>,
}

impl SeparableMap {
    pub fn new(n: usize, d: usize, terms: Vec<SeparableTerm>) -> Result<Self> {
        if n == 0 || d == 0 {
            return Err(Error::DimensionMismatch(
                "cube and ambient dimension must be positive".into(),
            ));
        }
        for t in &terms {
            if t.coeff.len() != d || t.factors.len() != n {
                return Err(Error::DimensionMismatch(format!(
                    "term with {} coefficients and {} factors, expected {d} and {n}",
                    t.coeff.len(),
                    t.factors.len()
                )));
            }
        }
        Ok(SeparableMap { n, d, terms })
    }

    pub fn is_polynomial(&self) -> bool {
        self.terms
            .iter()
            .all(|t| t.factors.iter().all(|f| matches!(f, Factor::Pow(_))))
    }

    pub fn from_json(v: &Value) -> Result<Self> {
        let n = json_usize(v, "n")?;
        let d = json_usize(v, "d")?;
        let terms = v
            .get("terms")
            .and_then(Value::as_array)
            .ok_or_else(|| Error::Config("base map needs \"terms\"".into()))?
            .iter()
            .map(|t| {
                let coeff: Vec<f64> =
                    serde_json::from_value(t.get("coeff").cloned().unwrap_or(Value::Null))
                        .map_err(|e| Error::Config(format!("term coeff: {e}")))?;
                let factors = t
                    .get("factors")
                    .and_then(Value::as_array)
                    .ok_or_else(|| Error::Config("term needs \"factors\"".into()))?
                    .iter()
                    .map(Factor::from_json)
                    .collect::<Result<Vec<_>>>()?;
                Ok(SeparableTerm { coeff, factors })
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(n, d, terms)
    }
}

impl CubeMap for SeparableMap {
    fn n(&self) -> usize {
        self.n
    }
    fn d(&self) -> usize {
        self.d
    }
    fn jet_into(&self, u: &[f64], out: &mut Jet) {
        out.x.fill(0.0);
        out.dx.fill(0.0);
        let mut vals = [(0.0, 0.0); 4];
        for t in &self.terms {
            for (j, f) in t.factors.iter().enumerate() {
                vals[j] = f.value_and_slope(u[j]);
            }
            let prod: f64 = vals[..self.n].iter().map(|v| v.0).product();
            for (xi, c) in out.x.iter_mut().zip(&t.coeff) {
                *xi += c * prod;
            }
            for j in 0..self.n {
                let mut p = vals[j].1;
                for (k, v) in vals[..self.n].iter().enumerate() {
                    if k != j {
                        p *= v.0;
                    }
                }
                if p != 0.0 {
                    for (xi, c) in out.col_mut(j).iter_mut().zip(&t.coeff) {
                        *xi += c * p;
                    }
                }
            }
        }
    }
    fn to_json(&self) -> Option<Value> {
        Some(json!({
            "type": if self.is_polynomial() { "polynomial" } else { "trig" },
            "n": self.n,
            "d": self.d,
            "terms": self.terms.iter().map(|t| json!({
                "coeff": t.coeff,
                "factors": t.factors.iter().map(|f| f.to_json()).collect::<Vec<_>>(),
            })).collect::<Vec<_>>(),
        }))
    }
}

fn json_usize(v: &Value, key: &str) -> Result<usize> {
    v.get(key)
        .and_then(Value::as_u64)
        .map(|x| x as usize)
        .ok_or_else(|| Error::Config(format!("missing integer field \"{key}\"")))
}

/// `[0,1]^3 -> S^3 in R^4`, sending the boundary of the cube to
/// `(1,0,0,0)` and covering the rest of the sphere once.
#[derive(Clone, Copy, Debug, Default)]
pub struct SphereMap;

impl CubeMap for SphereMap {
    fn n(&self) -> usize {
        3
    }
    fn d(&self) -> usize {
        4
    }
    fn jet_into(&self, v: &[f64], out: &mut Jet) {
        let w = [2.0 * v[0] - 1.0, 2.0 * v[1] - 1.0, 2.0 * v[2] - 1.0];
        let q = [1.0 - w[0] * w[0], 1.0 - w[1] * w[1], 1.0 - w[2] * w[2]];
        let p = q[0] * q[1] * q[2];
        let r2 = w[0] * w[0] + w[1] * w[1] + w[2] * w[2];
        let den = r2 + p * p;
        let num0 = r2 - p * p;
        out.x[0] = num0 / den;
        for i in 0..3 {
            out.x[i + 1] = 2.0 * w[i] * p / den;
        }
        for j in 0..3 {
            // d/dv_j = 2 d/dw_j
            let dp = -2.0 * w[j] * q[(j + 1) % 3] * q[(j + 2) % 3];
            let dr2 = 2.0 * w[j];
            let dden = dr2 + 2.0 * p * dp;
            let dnum0 = dr2 - 2.0 * p * dp;
            let col = out.col_mut(j);
            col[0] = 2.0 * (dnum0 * den - num0 * dden) / (den * den);
            for i in 0..3 {
                let num = 2.0 * w[i] * p;
                let dnum = 2.0 * (if i == j { p } else { 0.0 } + w[i] * dp);
                col[i + 1] = 2.0 * (dnum * den - num * dden) / (den * den);
            }
        }
    }
    fn to_json(&self) -> Option<Value> {
        Some(json!({"type": "sphere", "n": 3, "d": 4}))
    }
}

/// Parses a base-map description (`polynomial`, `trig` or `sphere`).
pub fn base_from_json(v: &Value) -> Result<Cube> {
    match v.get("type").and_then(Value::as_str) {
        Some("polynomial") | Some("trig") => Ok(Arc::new(SeparableMap::from_json(v)?)),
        Some("sphere") => Ok(Arc::new(SphereMap)),
        other => Err(Error::Config(format!(
            "unknown base map type {other:?}; expected polynomial, trig or sphere"
        ))),
    }
}

/// Parses `{"n", "base", "epsilon"}` into a smoothed cube.
pub fn cube_from_json(v: &Value) -> Result<Cube> {
    let base = base_from_json(
        v.get("base")
            .ok_or_else(|| Error::Config("cube needs \"base\"".into()))?,
    )?;
    if let Some(n) = v.get("n").and_then(Value::as_u64) {
        if n as usize != base.n() {
            return Err(Error::Config(format!(
                "cube n = {n} but base has n = {}",
                base.n()
            )));
        }
    }
    let eps = v
        .get("epsilon")
        .and_then(Value::as_f64)
        .unwrap_or(DEFAULT_EPSILON);
    let s = if eps == DEFAULT_EPSILON {
        Smoothing::standard()
    } else {
        Arc::new(Smoothing::new(eps)?)
    };
    Ok(Arc::new(Smoothed::new(base, s)))
}

// ---------------------------------------------------------------------------
// Combinators

/// `base(phi(u_1), .., phi(u_n))`, which sits still near every face.
#[derive(Clone)]
pub struct Smoothed {
    base: Cube,
    s: Arc<Smoothing>,
}

impl Smoothed {
    pub fn new(base: Cube, s: Arc<Smoothing>) -> Self {
        Smoothed { base, s }
    }

    pub fn standard(base: Cube) -> Self {
        Self::new(base, Smoothing::standard())
    }
}

impl CubeMap for Smoothed {
    fn n(&self) -> usize {
        self.base.n()
    }
    fn d(&self) -> usize {
        self.base.d()
    }
    fn jet_into(&self, u: &[f64], out: &mut Jet) {
        let n = self.n();
        let mut v = [0.0; 4];
        let mut dv = [0.0; 4];
        for j in 0..n {
            (v[j], dv[j]) = self.s.both(u[j]);
        }
        self.base.jet_into(&v[..n], out);
        for j in 0..n {
            out.col_mut(j).iter_mut().for_each(|c| *c *= dv[j]);
        }
    }
    fn to_json(&self) -> Option<Value> {
        Some(json!({"n": self.n(), "base": self.base.to_json()?, "epsilon": self.s.epsilon()}))
    }
}

#[derive(Clone, Debug)]
pub struct Constant {
    n: usize,
    point: Vec<f64>,
}

impl Constant {
    pub fn new(n: usize, point: Vec<f64>) -> Self {
        Constant { n, point }
    }
}

impl CubeMap for Constant {
    fn n(&self) -> usize {
        self.n
    }
    fn d(&self) -> usize {
        self.point.len()
    }
    fn jet_into(&self, _u: &[f64], out: &mut Jet) {
        out.x.copy_from_slice(&self.point);
        out.dx.fill(0.0);
    }
}

/// `a` on the lower half of `axis`, `b` on the upper half.
#[derive(Clone)]
pub struct Concat {
    a: Cube,
    b: Cube,
    axis: usize,
}

impl CubeMap for Concat {
    fn n(&self) -> usize {
        self.a.n()
    }
    fn d(&self) -> usize {
        self.a.d()
    }
    fn jet_into(&self, u: &[f64], out: &mut Jet) {
        let mut v = [0.0; 4];
        v[..u.len()].copy_from_slice(u);
        let k = self.axis;
        let half = if u[k] < 0.5 {
            v[k] = 2.0 * u[k];
            &self.a
        } else {
            v[k] = 2.0 * u[k] - 1.0;
            &self.b
        };
        half.jet_into(&v[..u.len()], out);
        out.col_mut(k).iter_mut().for_each(|c| *c *= 2.0);
    }
}

/// Sampled maximum of `|a - b|` on the shared face (`a` at `axis = 1`,
/// `b` at `axis = 0`).
pub fn face_mismatch(a: &dyn CubeMap, b: &dyn CubeMap, axis: usize) -> f64 {
    let n = a.n();
    let mut worst: f64 = 0.0;
    let pts = 7usize;
    let total = pts.pow(n.saturating_sub(1) as u32);
    for idx in 0..total {
        let mut u = vec![0.0; n];
        let mut rest = idx;
        for (j, uj) in u.iter_mut().enumerate() {
            if j == axis {
                continue;
            }
            *uj = (rest % pts) as f64 / (pts - 1) as f64;
            rest /= pts;
        }
        let mut ua = u.clone();
        ua[axis] = 1.0;
        let mut ub = u;
        ub[axis] = 0.0;
        let (xa, xb) = (a.eval(&ua), b.eval(&ub));
        worst = worst.max(
            xa.iter()
                .zip(&xb)
                .map(|(p, q)| (p - q).abs())
                .fold(0.0, f64::max),
        );
    }
    worst
}

/// Concatenation along `axis`, after checking that the faces agree.
pub fn concat(a: Cube, b: Cube, axis: usize) -> Result<Cube> {
    if a.n() != b.n() || a.d() != b.d() || axis >= a.n() {
        return Err(Error::DimensionMismatch(format!(
            "cannot concatenate ({}, {}) with ({}, {}) along axis {axis}",
            a.n(),
            a.d(),
            b.n(),
            b.d()
        )));
    }
    let r = face_mismatch(a.as_ref(), b.as_ref(), axis);
    if r > 1e-9 {
        return Err(Error::BoundaryMismatch {
            residual: r,
            tol: 1e-9,
        });
    }
    Ok(Arc::new(Concat { a, b, axis }))
}

/// Reparametrization writer: fills `v` and its Jacobian `r`, with
/// `r[j*n + i] = d v_i / d u_j`.
pub type ReparamFn = dyn Fn(&[f64], &mut [f64], &mut [f64]) + Send + Sync;

/// `inner(r(u))` for a self-map `r` of the cube.
#[derive(Clone)]
pub struct Reparam {
    inner: Cube,
    r: Arc<ReparamFn>,
}

impl Reparam {
    pub fn new(inner: Cube, r: Arc<ReparamFn>) -> Result<Self> {
        if inner.d() > MAX_AMBIENT || inner.n() > 4 {
            return Err(Error::DimensionMismatch(format!(
                "reparametrization supports n <= 4, d <= {MAX_AMBIENT}"
            )));
        }
        Ok(Reparam { inner, r })
    }
}

impl CubeMap for Reparam {
    fn n(&self) -> usize {
        self.inner.n()
    }
    fn d(&self) -> usize {
        self.inner.d()
    }
    fn jet_into(&self, u: &[f64], out: &mut Jet) {
        let (n, d) = (self.n(), self.d());
        let mut v = [0.0; 4];
        let mut r = [0.0; 16];
        (self.r)(u, &mut v[..n], &mut r[..n * n]);
        self.inner.jet_into(&v[..n], out);
        let mut cols = [0.0; 4 * MAX_AMBIENT];
        cols[..n * d].copy_from_slice(&out.dx);
        for j in 0..n {
            let c = out.col_mut(j);
            c.fill(0.0);
            for i in 0..n {
                let w = r[j * n + i];
                if w != 0.0 {
                    for (cc, src) in c.iter_mut().zip(&cols[i * d..(i + 1) * d]) {
                        *cc += w * src;
                    }
                }
            }
        }
    }
}

/// Reverses the direction of `axis`.
pub fn reverse(inner: Cube, axis: usize) -> Result<Cube> {
    let n = inner.n();
    let r = move |u: &[f64], v: &mut [f64], jac: &mut [f64]| {
        jac.fill(0.0);
        for i in 0..n {
            v[i] = if i == axis { 1.0 - u[i] } else { u[i] };
            jac[i * n + i] = if i == axis { -1.0 } else { 1.0 };
        }
    };
    Ok(Arc::new(Reparam::new(inner, Arc::new(r))?))
}

/// How an inner coordinate is fed when restricting a cube.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Slot {
    Free(usize),
    Fixed(f64),
}

/// Restriction of `inner` to a sub-cube: inner coordinate `i` is read from
/// `slots[i]`. Covers faces, slices and plots.
#[derive(Clone)]
pub struct Restrict {
    inner: Cube,
    n: usize,
    slots: Vec<Slot>,
}

impl Restrict {
    pub fn new(inner: Cube, n: usize, slots: Vec<Slot>) -> Result<Self> {
        if slots.len() != inner.n() || inner.d() > MAX_AMBIENT {
            return Err(Error::DimensionMismatch(format!(
                "{} slots for a {}-cube",
                slots.len(),
                inner.n()
            )));
        }
        Ok(Restrict { inner, n, slots })
    }
}

impl CubeMap for Restrict {
    fn n(&self) -> usize {
        self.n
    }
    fn d(&self) -> usize {
        self.inner.d()
    }
    fn jet_into(&self, u: &[f64], out: &mut Jet) {
        let m = self.inner.n();
        let d = self.d();
        let mut v = [0.0; 4];
        for (i, s) in self.slots.iter().enumerate() {
            v[i] = match *s {
                Slot::Free(j) => u[j],
                Slot::Fixed(c) => c,
            };
        }
        let mut tmp = Jet {
            x: std::mem::take(&mut out.x),
            dx: vec![0.0; m * d],
            n: m,
            d,
        };
        self.inner.jet_into(&v[..m], &mut tmp);
        out.x = tmp.x;
        out.dx.fill(0.0);
        for (i, s) in self.slots.iter().enumerate() {
            if let Slot::Free(j) = *s {
                let src = &tmp.dx[i * d..(i + 1) * d];
                for (c, x) in out.col_mut(j).iter_mut().zip(src) {
                    *c += x;
                }
            }
        }
    }
}

/// Face of an n-cube with coordinate `axis` held at `value`.
pub fn face(inner: Cube, axis: usize, value: f64) -> Result<Cube> {
    let n = inner.n();
    let slots = (0..n)
        .map(|i| match i.cmp(&axis) {
            std::cmp::Ordering::Less => Slot::Free(i),
            std::cmp::Ordering::Equal => Slot::Fixed(value),
            std::cmp::Ordering::Greater => Slot::Free(i - 1),
        })
        .collect();
    Ok(Arc::new(Restrict::new(inner, n - 1, slots)?))
}

/// `inner` viewed as an (n+1)-cube constant along the new coordinate
/// inserted at position `axis`.
#[derive(Clone)]
pub struct Extrude {
    inner: Cube,
    axis: usize,
}

impl Extrude {
    pub fn new(inner: Cube, axis: usize) -> Self {
        Extrude { inner, axis }
    }
}

impl CubeMap for Extrude {
    fn n(&self) -> usize {
        self.inner.n() + 1
    }
    fn d(&self) -> usize {
        self.inner.d()
    }
    fn jet_into(&self, u: &[f64], out: &mut Jet) {
        let n = self.inner.n();
        let mut v = [0.0; 4];
        let mut k = 0;
        for (i, ui) in u.iter().enumerate() {
            if i != self.axis {
                v[k] = *ui;
                k += 1;
            }
        }
        let tmp = self.inner.jet(&v[..n]);
        out.x.copy_from_slice(&tmp.x);
        let mut k = 0;
        for j in 0..=n {
            if j == self.axis {
                out.col_mut(j).fill(0.0);
            } else {
                out.col_mut(j).copy_from_slice(tmp.col(k));
                k += 1;
            }
        }
    }
}

/// `x -> a x + b` applied after `inner`.
#[derive(Clone)]
pub struct Affine {
    inner: Cube,
    a: Mat,
    b: Vec<f64>,
}

impl Affine {
    pub fn new(inner: Cube, a: Mat, b: Vec<f64>) -> Result<Self> {
        if a.ncols() != inner.d() || a.nrows() != b.len() {
            return Err(Error::DimensionMismatch(format!(
                "affine map {:?} after a map into R^{}",
                a.shape(),
                inner.d()
            )));
        }
        Ok(Affine { inner, a, b })
    }
}

impl CubeMap for Affine {
    fn n(&self) -> usize {
        self.inner.n()
    }
    fn d(&self) -> usize {
        self.a.nrows()
    }
    fn jet_into(&self, u: &[f64], out: &mut Jet) {
        let mut tmp = self.inner.jet(u);
        let (n, d0) = (self.n(), self.inner.d());
        for (i, xi) in out.x.iter_mut().enumerate() {
            *xi = self.b[i] + (0..d0).map(|k| self.a[(i, k)] * tmp.x[k]).sum::<f64>();
        }
        for j in 0..n {
            let src = tmp.col_mut(j).to_vec();
            for (i, c) in out.col_mut(j).iter_mut().enumerate() {
                *c = (0..d0).map(|k| self.a[(i, k)] * src[k]).sum();
            }
        }
    }
}

/// Jet writer for [`FnCube`].
pub type JetFn = dyn Fn(&[f64], &mut Jet) + Send + Sync;

/// Cube given by a closure that writes point and Jacobian.
#[derive(Clone)]
pub struct FnCube {
    n: usize,
    d: usize,
    f: Arc<JetFn>,
}

impl FnCube {
    pub fn new(n: usize, d: usize, f: Arc<JetFn>) -> Self {
        FnCube { n, d, f }
    }
}

impl CubeMap for FnCube {
    fn n(&self) -> usize {
        self.n
    }
    fn d(&self) -> usize {
        self.d
    }
    fn jet_into(&self, u: &[f64], out: &mut Jet) {
        (self.f)(u, out)
    }
}

// ---------------------------------------------------------------------------
// Builders

fn random_vec(d: usize, scale: f64, rng: &mut Rng) -> Vec<f64> {
    (0..d)
        .map(|_| scale * rng.random_range(-1.0..=1.0))
        .collect()
}

fn term(coeff: Vec<f64>, factors: &[Factor]) -> SeparableTerm {
    SeparableTerm {
        coeff,
        factors: factors.to_vec(),
    }
}

fn smoothed(map: SeparableMap) -> Cube {
    Arc::new(Smoothed::standard(Arc::new(map)))
}

use Factor::{Pow, Sin};

/// Straight path from `a` to `b` with sitting instants.
pub fn straight_path(a: &[f64], b: &[f64]) -> Result<Cube> {
    let d = a.len();
    let diff: Vec<f64> = b.iter().zip(a).map(|(x, y)| x - y).collect();
    Ok(smoothed(SeparableMap::new(
        1,
        d,
        vec![term(a.to_vec(), &[Pow(0)]), term(diff, &[Pow(1)])],
    )?))
}

/// Smooth path from `a` to `b` through `R^d`, bent by a random sine profile.
pub fn random_path(a: &[f64], b: &[f64], scale: f64, rng: &mut Rng) -> Result<Cube> {
    let d = a.len();
    let diff: Vec<f64> = b.iter().zip(a).map(|(x, y)| x - y).collect();
    Ok(smoothed(SeparableMap::new(
        1,
        d,
        vec![
            term(a.to_vec(), &[Pow(0)]),
            term(diff, &[Pow(1)]),
            term(random_vec(d, scale, rng), &[Sin(1.0)]),
            term(random_vec(d, 0.5 * scale, rng), &[Sin(2.0)]),
        ],
    )?))
}

fn bigon_terms(d: usize, p0: &[f64], p1: &[f64], scale: f64, rng: &mut Rng) -> Vec<SeparableTerm> {
    let diff: Vec<f64> = p1.iter().zip(p0).map(|(x, y)| x - y).collect();
    let a = random_vec(d, scale, rng);
    let b = random_vec(d, scale, rng);
    let c = random_vec(d, scale, rng);
    let b_minus_a: Vec<f64> = b.iter().zip(&a).map(|(x, y)| x - y).collect();
    vec![
        term(p0.to_vec(), &[Pow(0), Pow(0)]),
        term(diff, &[Pow(1), Pow(0)]),
        term(a, &[Sin(1.0), Pow(0)]),
        term(b_minus_a, &[Sin(1.0), Pow(1)]),
        term(c, &[Sin(1.0), Sin(1.0)]),
        term(random_vec(d, 0.5 * scale, rng), &[Sin(2.0), Pow(1)]),
    ]
}

/// Smooth bigon in `R^d` between the points `p0` (at t = 0) and `p1`.
pub fn bigon_between(p0: &[f64], p1: &[f64], scale: f64, rng: &mut Rng) -> Result<Cube> {
    let d = p0.len();
    Ok(smoothed(SeparableMap::new(
        2,
        d,
        bigon_terms(d, p0, p1, scale, rng),
    )?))
}

/// Seeded smooth bigon in `R^d`.
pub fn bigon(d: usize, seed: u64) -> Result<Cube> {
    let mut rng = rng_from_seed(seed);
    let p0 = random_vec(d, 0.5, &mut rng);
    let p1 = random_vec(d, 0.5, &mut rng);
    bigon_between(&p0, &p1, 0.6, &mut rng)
}

/// Terms of a good 3-path with s = 0 face `p0 + t (p1 - p0) + sin(pi t) a`
/// and s = 1 face `p0 + t (p1 - p0) + sin(pi t) b`.
fn good_three_terms(
    p0: &[f64],
    p1: &[f64],
    a: &[f64],
    b: &[f64],
    scale: f64,
    rng: &mut Rng,
) -> Vec<SeparableTerm> {
    let d = p0.len();
    let diff: Vec<f64> = p1.iter().zip(p0).map(|(x, y)| x - y).collect();
    let b_minus_a: Vec<f64> = b.iter().zip(a).map(|(x, y)| x - y).collect();
    vec![
        term(p0.to_vec(), &[Pow(0), Pow(0), Pow(0)]),
        term(diff, &[Pow(1), Pow(0), Pow(0)]),
        term(a.to_vec(), &[Sin(1.0), Pow(0), Pow(0)]),
        term(b_minus_a, &[Sin(1.0), Pow(1), Pow(0)]),
        term(random_vec(d, scale, rng), &[Sin(1.0), Sin(1.0), Pow(0)]),
        term(random_vec(d, scale, rng), &[Sin(1.0), Sin(1.0), Pow(1)]),
        term(
            random_vec(d, 0.5 * scale, rng),
            &[Sin(1.0), Sin(1.0), Pow(2)],
        ),
        term(
            random_vec(d, 0.5 * scale, rng),
            &[Sin(2.0), Sin(1.0), Pow(1)],
        ),
        term(
            random_vec(d, 0.5 * scale, rng),
            &[Sin(1.0), Sin(2.0), Pow(1)],
        ),
    ]
}

/// Seeded good 3-path in `R^d`: the t-faces are points and the s-faces do
/// not depend on x.
pub fn good_three_path(d: usize, seed: u64) -> Result<Cube> {
    let mut rng = rng_from_seed(seed);
    let p0 = random_vec(d, 0.5, &mut rng);
    let p1 = random_vec(d, 0.5, &mut rng);
    let a = random_vec(d, 0.6, &mut rng);
    let b = random_vec(d, 0.6, &mut rng);
    Ok(smoothed(SeparableMap::new(
        3,
        d,
        good_three_terms(&p0, &p1, &a, &b, 0.6, &mut rng),
    )?))
}

/// Seeded plot of paths in `R^d`: `(t, a, b)` maps to a path in `t` from
/// a fixed start to a fixed end, with sitting instants in `t` only. The
/// family parameters `a, b` enter polynomially.
pub fn path_family(d: usize, seed: u64) -> Result<Cube> {
    let mut rng = rng_from_seed(seed);
    let p0 = random_vec(d, 0.5, &mut rng);
    let p1 = random_vec(d, 0.5, &mut rng);
    let diff: Vec<f64> = p1.iter().zip(&p0).map(|(x, y)| x - y).collect();
    let terms = vec![
        term(p0, &[Pow(0), Pow(0), Pow(0)]),
        term(diff, &[Pow(1), Pow(0), Pow(0)]),
        term(random_vec(d, 0.4, &mut rng), &[Sin(1.0), Pow(0), Pow(0)]),
        term(random_vec(d, 0.4, &mut rng), &[Sin(1.0), Pow(1), Pow(0)]),
        term(random_vec(d, 0.4, &mut rng), &[Sin(1.0), Pow(0), Pow(1)]),
        term(random_vec(d, 0.3, &mut rng), &[Sin(2.0), Pow(1), Pow(1)]),
        term(random_vec(d, 0.3, &mut rng), &[Sin(1.0), Pow(2), Pow(0)]),
        term(random_vec(d, 0.3, &mut rng), &[Sin(2.0), Pow(0), Pow(2)]),
    ];
    let base: Cube = Arc::new(SeparableMap::new(3, d, terms)?);
    let sm = Smoothing::standard();
    let r = move |u: &[f64], v: &mut [f64], jac: &mut [f64]| {
        let (p, dp) = sm.both(u[0]);
        jac.fill(0.0);
        v.copy_from_slice(u);
        v[0] = p;
        jac[0] = dp;
        jac[4] = 1.0;
        jac[8] = 1.0;
    };
    Ok(Arc::new(Reparam::new(base, Arc::new(r))?))
}

/// Two good 3-paths with the s = 1 face of the first equal to the s = 0
/// face of the second.
pub fn vertically_composable_three_paths(d: usize, seed: u64) -> Result<(Cube, Cube)> {
    let mut rng = rng_from_seed(seed);
    let p0 = random_vec(d, 0.5, &mut rng);
    let p1 = random_vec(d, 0.5, &mut rng);
    let a = random_vec(d, 0.5, &mut rng);
    let b = random_vec(d, 0.5, &mut rng);
    let c = random_vec(d, 0.5, &mut rng);
    let lower = SeparableMap::new(3, d, good_three_terms(&p0, &p1, &a, &b, 0.4, &mut rng))?;
    let upper = SeparableMap::new(3, d, good_three_terms(&p0, &p1, &b, &c, 0.4, &mut rng))?;
    Ok((smoothed(lower), smoothed(upper)))
}

/// Two good 3-paths with the x = 1 face of the first equal to the x = 0
/// face of the second.
pub fn upward_composable_three_paths(d: usize, seed: u64) -> Result<(Cube, Cube)> {
    let mut rng = rng_from_seed(seed);
    let p0 = random_vec(d, 0.5, &mut rng);
    let p1 = random_vec(d, 0.5, &mut rng);
    let a = random_vec(d, 0.5, &mut rng);
    let b = random_vec(d, 0.5, &mut rng);
    let first = good_three_terms(&p0, &p1, &a, &b, 0.4, &mut rng);
    // The x = 1 face of `first`, extended by new x-dependent terms.
    let mut second: Vec<SeparableTerm> = first
        .iter()
        .map(|t| {
            let mut t = t.clone();
            if let Pow(p) = t.factors[2] {
                if p > 0 {
                    t.factors[2] = Pow(0);
                }
            }
            t
        })
        .collect();
    second.push(term(
        random_vec(d, 0.4, &mut rng),
        &[Sin(1.0), Sin(1.0), Pow(1)],
    ));
    second.push(term(
        random_vec(d, 0.2, &mut rng),
        &[Sin(2.0), Sin(1.0), Pow(2)],
    ));
    Ok((
        smoothed(SeparableMap::new(3, d, first)?),
        smoothed(SeparableMap::new(3, d, second)?),
    ))
}

/// Two horizontally composable bigons: the end point of the first is the
/// start point of the second.
pub fn composable_bigons(d: usize, seed: u64) -> Result<(Cube, Cube)> {
    let mut rng = rng_from_seed(seed);
    let p0 = random_vec(d, 0.5, &mut rng);
    let p1 = random_vec(d, 0.5, &mut rng);
    let p2 = random_vec(d, 0.5, &mut rng);
    Ok((
        bigon_between(&p0, &p1, 0.5, &mut rng)?,
        bigon_between(&p1, &p2, 0.5, &mut rng)?,
    ))
}

/// Smoothed sphere map `[0,1]^3 -> S^3`.
pub fn sphere() -> Cube {
    Arc::new(Smoothed::standard(Arc::new(SphereMap)))
}

/// The interchange 3-path of two horizontally composable 2-paths.
///
/// The t-axis is split at 1/2 between `g` and `gp`. At x = 0, `g` sweeps
/// during the first half of s and `gp` during the second, giving
/// `(g # src gp) then (tgt g # gp)`; at x = 1 the order is swapped. In
/// between the two sweep schedules are blended, so the s = 0, 1 faces do
/// not depend on x.
pub struct InterchangeCube {
    g: Cube,
    gp: Cube,
    s: Arc<Smoothing>,
}

pub fn interchange_cube(g: Cube, gp: Cube) -> Result<Cube> {
    if g.n() != 2 || gp.n() != 2 || g.d() != gp.d() {
        return Err(Error::DimensionMismatch(
            "interchange cube needs two 2-paths in the same R^d".into(),
        ));
    }
    let r = face_mismatch(g.as_ref(), gp.as_ref(), 0);
    if r > 1e-9 {
        return Err(Error::BoundaryMismatch {
            residual: r,
            tol: 1e-9,
        });
    }
    Ok(Arc::new(InterchangeCube {
        g,
        gp,
        s: Smoothing::standard(),
    }))
}

impl CubeMap for InterchangeCube {
    fn n(&self) -> usize {
        3
    }
    fn d(&self) -> usize {
        self.g.d()
    }
    fn jet_into(&self, u: &[f64], out: &mut Jet) {
        let (t, s, x) = (u[0], u[1], u[2]);
        let d = self.d();
        let left = t < 0.5;
        let tl = if left { 2.0 * t } else { 2.0 * t - 1.0 };
        // Linear sweep schedules. The only kink is at s = 1/2, which is a
        // node of every even s-grid.
        let (early, de) = if s < 0.5 { (2.0 * s, 2.0) } else { (1.0, 0.0) };
        let (late, dl) = if s < 0.5 {
            (0.0, 0.0)
        } else {
            (2.0 * s - 1.0, 2.0)
        };
        let (r, dr) = self.s.both(x);
        // g sweeps early at x = 0, gp sweeps early at x = 1
        let (a, b, da, db) = if left {
            (early, late, de, dl)
        } else {
            (late, early, dl, de)
        };
        let sg = (1.0 - r) * a + r * b;
        let ds = (1.0 - r) * da + r * db;
        let dx = dr * (b - a);
        let inner = if left { &self.g } else { &self.gp };
        let mut tmp = Jet::new(2, d);
        inner.jet_into(&[tl, sg], &mut tmp);
        out.x.copy_from_slice(&tmp.x);
        for i in 0..d {
            let (ct, cs) = (tmp.dx[i], tmp.dx[d + i]);
            out.dx[i] = 2.0 * ct;
            out.dx[d + i] = ds * cs;
            out.dx[2 * d + i] = dx * cs;
        }
    }
}

// ---------------------------------------------------------------------------
// Pullback

/// Coordinate components of a pulled-back form at one cube point.
#[derive(Clone, Debug)]
pub struct PullbackSample {
    pub u: Vec<f64>,
    /// `(J, alpha(dc(e_J1), .., dc(e_Jk)))` for increasing cube indices `J`.
    pub components: Vec<(Vec<usize>, Mat)>,
}

/// Samples `c^* alpha` on a uniform grid with `res` points per axis.
pub fn pullback(alpha: &FormField, c: &dyn CubeMap, res: usize) -> Result<Vec<PullbackSample>> {
    if alpha.ambient_dim() != c.d() {
        return Err(Error::DimensionMismatch(format!(
            "form on R^{} pulled back along a map into R^{}",
            alpha.ambient_dim(),
            c.d()
        )));
    }
    if res < 2 {
        return Err(Error::Config(
            "pullback grid needs at least 2 points per axis".into(),
        ));
    }
    let n = c.n();
    let tuples = super::form::index_tuples(n, alpha.degree());
    let mut out = Vec::new();
    let mut jet = Jet::new(n, c.d());
    for idx in 0..res.pow(n as u32) {
        let mut rest = idx;
        let u: Vec<f64> = (0..n)
            .map(|_| {
                let v = (rest % res) as f64 / (res - 1) as f64;
                rest /= res;
                v
            })
            .collect();
        c.jet_into(&u, &mut jet);
        let components = tuples
            .iter()
            .map(|jt| {
                let vs: Vec<&[f64]> = jt.iter().map(|&j| jet.col(j)).collect();
                (jt.clone(), alpha.eval(&jet.x, &vs))
            })
            .collect();
        out.push(PullbackSample { u, components });
    }
    Ok(out)
}
