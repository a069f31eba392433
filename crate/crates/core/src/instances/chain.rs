//! The 2-crossed module of a chain complex `A`: invertible chain maps,
//! 1-homotopies under `s * t = s + t + s d t + s t d`, and 2-homotopies.
//!
//! Maps are matrices on the total space `A_0 + ... + A_k`; a map of
//! degree `j` sends `A_n` to `A_{n+j}`, and the boundary has degree -1.
//! Since `s * t = t + s beta(t)`, a homotopy `s` is stored faithfully as
//! `[[beta(s), 0], [s, 1]]`, and a 2-homotopy `b` as `[[1, 0], [b, 1]]`.

use std::sync::Arc;

use rand::RngExt;

use crate::algebra::{
    DifferentialTwoCrossedModule, GroupSpec, LieTwoCrossedModule, Rng, TwoCrossedModule,
};
use crate::error::{Error, Result};
use crate::linalg::{self, block, commutator, Mat};

#[derive(Clone)]
struct Grading {
    dims: Vec<usize>,
    offsets: Vec<usize>,
    total: usize,
}

impl Grading {
    fn new(dims: &[usize]) -> Self {
        let mut offsets = Vec::with_capacity(dims.len());
        let mut acc = 0;
        for d in dims {
            offsets.push(acc);
            acc += d;
        }
        Grading {
            dims: dims.to_vec(),
            offsets,
            total: acc,
        }
    }

    /// Zero every entry outside the blocks `A_n -> A_{n+deg}`.
    fn mask(&self, m: &Mat, deg: isize) -> Mat {
        let mut out = linalg::zeros(self.total, self.total);
        for n in 0..self.dims.len() {
            let target = n as isize + deg;
            if target < 0 || target as usize >= self.dims.len() {
                continue;
            }
            let t = target as usize;
            let (r0, c0) = (self.offsets[t], self.offsets[n]);
            let (r, c) = (self.dims[t], self.dims[n]);
            out.view_mut((r0, c0), (r, c))
                .copy_from(&m.view((r0, c0), (r, c)));
        }
        out
    }

    /// Matrix units spanning the maps of degree `deg`.
    fn units(&self, deg: isize) -> Vec<Mat> {
        let mut out = Vec::new();
        for n in 0..self.dims.len() {
            let target = n as isize + deg;
            if target < 0 || target as usize >= self.dims.len() {
                continue;
            }
            let t = target as usize;
            for i in 0..self.dims[t] {
                for j in 0..self.dims[n] {
                    out.push(linalg::unit(
                        self.total,
                        self.total,
                        self.offsets[t] + i,
                        self.offsets[n] + j,
                    ));
                }
            }
        }
        out
    }
}

pub struct ChainComplexInstance {
    grading: Grading,
    boundary: Mat,
    g: GroupSpec,
    e: GroupSpec,
    l: GroupSpec,
    algebra: ChainAlgebra,
}

pub struct ChainAlgebra {
    grading: Grading,
    boundary: Mat,
    basis_g: Vec<Mat>,
    basis_e: Vec<Mat>,
    basis_l: Vec<Mat>,
}

/// Builds `GL(A)` for `A` with `dims = [d_0, .., d_k]` and
/// `boundaries[n-1]` the `d_{n-1} x d_n` matrix of `A_n -> A_{n-1}`.
pub fn make_chain_complex(dims: &[usize], boundaries: &[Mat]) -> Result<Arc<ChainComplexInstance>> {
    if dims.is_empty() || dims.iter().sum::<usize>() == 0 {
        return Err(Error::DimensionMismatch("empty chain complex".into()));
    }
    if dims.len() > 3 {
        return Err(Error::LengthUnsupported(dims.len() - 1));
    }
    if boundaries.len() != dims.len() - 1 {
        return Err(Error::DimensionMismatch(format!(
            "expected {} boundary maps, got {}",
            dims.len() - 1,
            boundaries.len()
        )));
    }
    let grading = Grading::new(dims);
    let total = grading.total;
    let mut boundary = linalg::zeros(total, total);
    for (i, b) in boundaries.iter().enumerate() {
        let n = i + 1;
        if b.shape() != (dims[n - 1], dims[n]) {
            return Err(Error::DimensionMismatch(format!(
                "boundary {n} has shape {:?}, expected {:?}",
                b.shape(),
                (dims[n - 1], dims[n])
            )));
        }
        boundary
            .view_mut((grading.offsets[n - 1], grading.offsets[n]), b.shape())
            .copy_from(b);
    }
    let dd = (&boundary * &boundary).norm();
    if dd > 1e-12 * boundary.norm().max(1.0).powi(2) {
        return Err(Error::NotAComplex(dd));
    }

    // Chain maps: degree-0 maps commuting with the boundary.
    let units0 = grading.units(0);
    let mut constraints = linalg::zeros(total * total, units0.len());
    for (j, u) in units0.iter().enumerate() {
        let c = u * &boundary - &boundary * u;
        constraints.set_column(j, &linalg::vec_of(&c).column(0));
    }
    let null = linalg::null_space(&constraints, 1e-10);
    let basis_g: Vec<Mat> = (0..null.ncols())
        .map(|k| {
            let mut m = linalg::zeros(total, total);
            for (j, u) in units0.iter().enumerate() {
                m += u * null[(j, k)];
            }
            m
        })
        .collect();

    let algebra_e_rep = |u: &Mat| homotopy_alg_rep(&boundary, u);
    let basis_e: Vec<Mat> = grading.units(1).iter().map(algebra_e_rep).collect();
    let basis_l: Vec<Mat> = grading
        .units(2)
        .iter()
        .map(|b| two_homotopy_rep(b, 0.0))
        .collect();

    let gr = grading.clone();
    let bd = boundary.clone();
    let g = GroupSpec::new(
        format!("GL1{:?}", dims),
        total,
        basis_g.clone(),
        move |m: &Mat| (m - gr.mask(m, 0)).norm() + (m * &bd - &bd * m).norm(),
    )?;
    let gr = grading.clone();
    let bd = boundary.clone();
    let e = GroupSpec::new(
        format!("GL2{:?}", dims),
        2 * total,
        basis_e.clone(),
        move |m: &Mat| {
            let s = block(m, total, 0, total, total);
            (&s - gr.mask(&s, 1)).norm() + (m - homotopy_rep(&bd, &s)).norm()
        },
    )?;
    let gr = grading.clone();
    let l = GroupSpec::new(
        format!("GL3{:?}", dims),
        2 * total,
        basis_l.clone(),
        move |m: &Mat| {
            let b = block(m, total, 0, total, total);
            (&b - gr.mask(&b, 2)).norm() + (m - two_homotopy_rep(&b, 1.0)).norm()
        },
    )?;

    let algebra = ChainAlgebra {
        grading: grading.clone(),
        boundary: boundary.clone(),
        basis_g,
        basis_e,
        basis_l,
    };
    Ok(Arc::new(ChainComplexInstance {
        grading,
        boundary,
        g,
        e,
        l,
        algebra,
    }))
}

/// Random boundary maps with `d d = 0` for a complex of length at most 2.
/// `max_rank` caps the rank of every boundary map.
pub fn random_boundaries(dims: &[usize], max_rank: Option<usize>, rng: &mut Rng) -> Vec<Mat> {
    let mut out: Vec<Mat> = Vec::new();
    let random = |r: usize, c: usize, rank: usize, rng: &mut Rng| -> Mat {
        let mut m = linalg::zeros(r, c);
        for _ in 0..rank {
            let u = Mat::from_fn(r, 1, |_, _| rng.random_range(-1.0..=1.0));
            let v = Mat::from_fn(1, c, |_, _| rng.random_range(-1.0..=1.0));
            m += u * v;
        }
        m
    };
    // Build from the top degree down so each map kills the image of the next.
    let k = dims.len().saturating_sub(1);
    let mut upper: Option<Mat> = None;
    for n in (1..=k).rev() {
        let full = dims[n - 1].min(dims[n]);
        let rank = max_rank.map_or(full, |r| r.min(full));
        let mut m = random(dims[n - 1], dims[n], rank, rng);
        if let Some(up) = &upper {
            // Project out the image of the boundary above.
            let q = up.clone().svd(true, false);
            let u = q.u.unwrap();
            let mut proj = linalg::identity(dims[n]);
            for (i, s) in q.singular_values.iter().enumerate() {
                if *s > 1e-12 {
                    let col = u.column(i).into_owned();
                    proj -= &col * col.transpose();
                }
            }
            m = m * proj;
            // Remove rounding so d d vanishes to machine precision.
            let resid = &m * up;
            if resid.norm() > 1e-14 {
                let pinv = up.clone().pseudo_inverse(1e-12).unwrap();
                m -= resid * pinv;
            }
        }
        upper = Some(m.clone());
        out.push(m);
    }
    out.reverse();
    out
}

// [[beta(s), 0], [s, 1]]
fn homotopy_rep(boundary: &Mat, s: &Mat) -> Mat {
    let n = s.nrows();
    let beta = linalg::identity(n) + boundary * s + s * boundary;
    let mut out = linalg::zeros(2 * n, 2 * n);
    out.view_mut((0, 0), (n, n)).copy_from(&beta);
    out.view_mut((n, 0), (n, n)).copy_from(s);
    out.view_mut((n, n), (n, n)).fill_with_identity();
    out
}

// [[d u + u d, 0], [u, 0]]
fn homotopy_alg_rep(boundary: &Mat, u: &Mat) -> Mat {
    let n = u.nrows();
    let mut out = linalg::zeros(2 * n, 2 * n);
    out.view_mut((0, 0), (n, n))
        .copy_from(&(boundary * u + u * boundary));
    out.view_mut((n, 0), (n, n)).copy_from(u);
    out
}

// [[c, 0], [b, c]] with c = 1 for group elements and 0 for algebra elements
fn two_homotopy_rep(b: &Mat, c: f64) -> Mat {
    let n = b.nrows();
    let mut out = linalg::identity(2 * n) * c;
    out.view_mut((n, 0), (n, n)).copy_from(b);
    out
}

impl ChainComplexInstance {
    pub fn dims(&self) -> &[usize] {
        &self.grading.dims
    }

    pub fn boundary(&self) -> &Mat {
        &self.boundary
    }

    fn total(&self) -> usize {
        self.grading.total
    }

    /// The homotopy `s` of an element of E.
    pub fn homotopy(&self, e: &Mat) -> Mat {
        block(e, self.total(), 0, self.total(), self.total())
    }

    /// The 2-homotopy `b` of an element of L (or of its algebra).
    pub fn two_homotopy(&self, l: &Mat) -> Mat {
        block(l, self.total(), 0, self.total(), self.total())
    }

    pub fn from_homotopy(&self, s: &Mat) -> Mat {
        homotopy_rep(&self.boundary, s)
    }

    pub fn from_two_homotopy(&self, b: &Mat) -> Mat {
        two_homotopy_rep(b, 1.0)
    }

    pub fn from_homotopy_alg(&self, u: &Mat) -> Mat {
        homotopy_alg_rep(&self.boundary, u)
    }

    pub fn from_two_homotopy_alg(&self, x: &Mat) -> Mat {
        two_homotopy_rep(x, 0.0)
    }

    pub fn beta(&self, s: &Mat) -> Mat {
        linalg::identity(self.total()) + &self.boundary * s + s * &self.boundary
    }

    pub fn alpha(&self, b: &Mat) -> Mat {
        -(&self.boundary * b) + b * &self.boundary
    }

    /// `s * t = s + t + s d t + s t d`.
    pub fn star(&self, s: &Mat, t: &Mat) -> Mat {
        s + t + s * &self.boundary * t + s * t * &self.boundary
    }

    /// Inverse under `*`. From `s * x = x + s beta(x) = 0` and
    /// `beta(x) = beta(s)^-1` one gets `x = -s beta(s)^-1`.
    pub fn star_inverse(&self, s: &Mat) -> Result<Mat> {
        Ok(-(s * linalg::inverse(&self.beta(s))?))
    }

    fn lift_g(&self, g: &Mat) -> Mat {
        linalg::block_diag(g, g)
    }
}

impl TwoCrossedModule for ChainComplexInstance {
    fn name(&self) -> String {
        format!("chain{:?}", self.grading.dims)
    }
    fn g(&self) -> &GroupSpec {
        &self.g
    }
    fn e(&self) -> &GroupSpec {
        &self.e
    }
    fn l(&self) -> &GroupSpec {
        &self.l
    }
    fn delta(&self, l: &Mat) -> Mat {
        self.from_homotopy(&self.alpha(&self.two_homotopy(l)))
    }
    fn partial(&self, e: &Mat) -> Mat {
        block(e, 0, 0, self.total(), self.total())
    }
    fn act_e(&self, g: &Mat, e: &Mat) -> Result<Mat> {
        Ok(self.lift_g(g) * e * self.lift_g(&linalg::inverse(g)?))
    }
    fn act_l(&self, g: &Mat, l: &Mat) -> Result<Mat> {
        Ok(self.lift_g(g) * l * self.lift_g(&linalg::inverse(g)?))
    }
    // {s,t} = s t beta(t)^-1 beta(s)^-1
    fn lifting(&self, e: &Mat, f: &Mat) -> Result<Mat> {
        let s = self.homotopy(e);
        let t = self.homotopy(f);
        let bs = self.partial(e);
        let bt = self.partial(f);
        let b = &s * &t * linalg::inverse(&bt)? * linalg::inverse(&bs)?;
        Ok(self.from_two_homotopy(&b))
    }
}

impl LieTwoCrossedModule for ChainComplexInstance {
    fn algebra(&self) -> &dyn DifferentialTwoCrossedModule {
        &self.algebra
    }
    fn act_e_alg(&self, g: &Mat, u: &Mat) -> Result<Mat> {
        self.act_e(g, u)
    }
    fn act_l_alg(&self, g: &Mat, x: &Mat) -> Result<Mat> {
        self.act_l(g, x)
    }
    // e |>' b = b - alpha(b) s beta(s)^-1 is linear in b.
    fn derived_action_alg(&self, e: &Mat, x: &Mat) -> Result<Mat> {
        let s = self.homotopy(e);
        let b = self.two_homotopy(x);
        let out = &b - self.alpha(&b) * &s * linalg::inverse(&self.partial(e))?;
        Ok(self.from_two_homotopy_alg(&out))
    }
}

impl ChainAlgebra {
    fn total(&self) -> usize {
        self.grading.total
    }
    fn lower(&self, m: &Mat) -> Mat {
        block(m, self.total(), 0, self.total(), self.total())
    }
}

impl DifferentialTwoCrossedModule for ChainAlgebra {
    fn name(&self) -> String {
        format!("chain{:?} (differential)", self.grading.dims)
    }
    fn basis_g(&self) -> &[Mat] {
        &self.basis_g
    }
    fn basis_e(&self) -> &[Mat] {
        &self.basis_e
    }
    fn basis_l(&self) -> &[Mat] {
        &self.basis_l
    }
    fn shapes(&self) -> [(usize, usize); 3] {
        let n = self.total();
        [(n, n), (2 * n, 2 * n), (2 * n, 2 * n)]
    }
    fn bracket_g(&self, x: &Mat, y: &Mat) -> Mat {
        commutator(x, y)
    }
    // Lower block: s t d + s d t - t s d - t d s.
    fn bracket_e(&self, u: &Mat, v: &Mat) -> Mat {
        commutator(u, v)
    }
    fn bracket_l(&self, x: &Mat, y: &Mat) -> Mat {
        commutator(x, y)
    }
    fn delta(&self, x: &Mat) -> Mat {
        let b = self.lower(x);
        let a = -(&self.boundary * &b) + &b * &self.boundary;
        homotopy_alg_rep(&self.boundary, &a)
    }
    fn partial(&self, u: &Mat) -> Mat {
        block(u, 0, 0, self.total(), self.total())
    }
    fn act_e(&self, a: &Mat, u: &Mat) -> Mat {
        commutator(&linalg::block_diag(a, a), u)
    }
    fn act_l(&self, a: &Mat, x: &Mat) -> Mat {
        commutator(&linalg::block_diag(a, a), x)
    }
    // {s,t} = s t
    fn lifting(&self, u: &Mat, v: &Mat) -> Mat {
        two_homotopy_rep(&(self.lower(u) * self.lower(v)), 0.0)
    }
}
