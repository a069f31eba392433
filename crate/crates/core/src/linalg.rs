//! Dense matrix helpers shared by every module.
//!
//! All group elements and Lie algebra elements are carried as `Mat`
//! (a dynamically sized `f64` matrix). Group laws are ordinary matrix
//! products in a faithful representation chosen by each instance.

use nalgebra::DMatrix;

use crate::error::AlgebraError;

pub type Mat = DMatrix<f64>;

pub fn identity(n: usize) -> Mat {
    Mat::identity(n, n)
}

pub fn zeros(r: usize, c: usize) -> Mat {
    Mat::zeros(r, c)
}

/// Frobenius norm.
pub fn norm(m: &Mat) -> f64 {
    m.norm()
}

/// Frobenius distance, with shape mismatch reported as infinity.
pub fn dist(a: &Mat, b: &Mat) -> f64 {
    if a.shape() != b.shape() {
        return f64::INFINITY;
    }
    (a - b).norm()
}

/// Distance from the identity matrix.
pub fn dist_identity(a: &Mat) -> f64 {
    let n = a.nrows();
    if n != a.ncols() {
        return f64::INFINITY;
    }
    let mut s = 0.0;
    for i in 0..n {
        for j in 0..n {
            let v = a[(i, j)] - if i == j { 1.0 } else { 0.0 };
            s += v * v;
        }
    }
    s.sqrt()
}

pub fn commutator(a: &Mat, b: &Mat) -> Mat {
    a * b - b * a
}

/// Inverse, failing on (numerically) singular input.
pub fn inverse(m: &Mat) -> Result<Mat, AlgebraError> {
    let n = m.nrows();
    if n != m.ncols() {
        return Err(AlgebraError::DimensionMismatch(format!(
            "inverse of non-square {}x{} matrix",
            m.nrows(),
            m.ncols()
        )));
    }
    // Gauss-Jordan with partial pivoting on a column-major copy.
    let scale = m.amax().max(1e-300);
    let mut a = m.clone();
    let mut inv = identity(n);
    for c in 0..n {
        let (p, pv) = (c..n)
            .map(|r| (r, a[(r, c)].abs()))
            .fold((c, -1.0), |b, x| if x.1 > b.1 { x } else { b });
        // Reject pivots that are tiny relative to the entries.
        if pv <= 1e-13 * scale {
            return Err(AlgebraError::SingularMatrix);
        }
        if p != c {
            a.swap_rows(p, c);
            inv.swap_rows(p, c);
        }
        let d = 1.0 / a[(c, c)];
        for j in 0..n {
            a[(c, j)] *= d;
            inv[(c, j)] *= d;
        }
        for r in 0..n {
            let f = a[(r, c)];
            if r == c || f == 0.0 {
                continue;
            }
            for j in 0..n {
                a[(r, j)] -= f * a[(c, j)];
                inv[(r, j)] -= f * inv[(c, j)];
            }
        }
    }
    Ok(inv)
}

pub fn expm(x: &Mat) -> Mat {
    x.clone().exp()
}

/// Matrix logarithm for arguments close to the identity.
///
/// Square roots (Denman-Beavers) bring the argument near 1, then a
/// truncated Mercator series is summed.
pub fn logm(g: &Mat) -> Result<Mat, AlgebraError> {
    let n = g.nrows();
    let id = identity(n);
    let mut a = g.clone();
    let mut k = 0;
    while dist_identity(&a) > 0.25 {
        a = sqrtm(&a)?;
        k += 1;
        if k > 40 {
            return Err(AlgebraError::SingularMatrix);
        }
    }
    let x = &a - &id;
    let mut term = x.clone();
    let mut sum = x.clone();
    for j in 2..60 {
        term = &term * &x;
        let sign = if j % 2 == 0 { -1.0 } else { 1.0 };
        sum += &term * (sign / j as f64);
        if term.norm() < 1e-18 {
            break;
        }
    }
    Ok(sum * 2f64.powi(k))
}

fn sqrtm(a: &Mat) -> Result<Mat, AlgebraError> {
    let mut y = a.clone();
    let mut z = identity(a.nrows());
    for _ in 0..100 {
        let yi = inverse(&y)?;
        let zi = inverse(&z)?;
        let y1 = (&y + &zi) * 0.5;
        let z1 = (&z + &yi) * 0.5;
        let done = dist(&y1, &y) < 1e-15 * y1.norm().max(1.0);
        y = y1;
        z = z1;
        if done {
            break;
        }
    }
    Ok(y)
}

/// Orthonormal basis of the null space of `m` (columns of the result),
/// using an SVD with relative threshold `rel_tol * sigma_max`.
pub fn null_space(m: &Mat, rel_tol: f64) -> Mat {
    let cols = m.ncols();
    if m.nrows() == 0 {
        return identity(cols);
    }
    // Pad with zero rows so the SVD yields a full right basis.
    let rows = m.nrows().max(cols);
    let mut padded = zeros(rows, cols);
    padded.view_mut((0, 0), (m.nrows(), cols)).copy_from(m);
    let svd = padded.svd(false, true);
    let vt = svd.v_t.expect("v_t requested");
    let smax = svd.singular_values.iter().cloned().fold(0.0, f64::max);
    let thresh = rel_tol * smax.max(f64::MIN_POSITIVE);
    let mut basis = Vec::new();
    for (i, s) in svd.singular_values.iter().enumerate() {
        if *s <= thresh || smax == 0.0 {
            basis.push(vt.row(i).transpose());
        }
    }
    let mut out = zeros(cols, basis.len());
    for (j, v) in basis.iter().enumerate() {
        out.set_column(j, v);
    }
    out
}

/// Column-major flattening into a column vector.
pub fn vec_of(m: &Mat) -> Mat {
    Mat::from_column_slice(m.len(), 1, m.as_slice())
}

pub fn unvec(v: &[f64], r: usize, c: usize) -> Mat {
    Mat::from_column_slice(r, c, v)
}

/// Coordinates of `m` in a linearly independent family, by least squares.
pub struct Coordinates {
    pinv: Mat,
    rows: usize,
    cols: usize,
}

impl Coordinates {
    pub fn new(basis: &[Mat]) -> Self {
        let (rows, cols) = basis.first().map(|b| b.shape()).unwrap_or((0, 0));
        let mut a = zeros(rows * cols, basis.len());
        for (j, b) in basis.iter().enumerate() {
            a.set_column(j, &vec_of(b).column(0));
        }
        let pinv = a
            .clone()
            .pseudo_inverse(1e-12)
            .unwrap_or_else(|_| zeros(basis.len(), rows * cols));
        Coordinates { pinv, rows, cols }
    }

    pub fn of(&self, m: &Mat) -> Vec<f64> {
        debug_assert_eq!(m.shape(), (self.rows, self.cols));
        let v = &self.pinv * vec_of(m);
        v.column(0).iter().cloned().collect()
    }
}

pub fn combine(basis: &[Mat], coeffs: &[f64]) -> Mat {
    let mut out = zeros(basis[0].nrows(), basis[0].ncols());
    for (b, c) in basis.iter().zip(coeffs) {
        out += b * *c;
    }
    out
}

pub fn block_diag(a: &Mat, b: &Mat) -> Mat {
    let (ra, ca) = a.shape();
    let (rb, cb) = b.shape();
    let mut out = zeros(ra + rb, ca + cb);
    out.view_mut((0, 0), (ra, ca)).copy_from(a);
    out.view_mut((ra, ca), (rb, cb)).copy_from(b);
    out
}

pub fn block(m: &Mat, r0: usize, c0: usize, r: usize, c: usize) -> Mat {
    m.view((r0, c0), (r, c)).into_owned()
}

/// Elementary matrix unit with a one at `(i, j)`.
pub fn unit(r: usize, c: usize, i: usize, j: usize) -> Mat {
    let mut m = zeros(r, c);
    m[(i, j)] = 1.0;
    m
}

/// Row-major nested vectors, the serialized form of a matrix.
pub fn to_rows(m: &Mat) -> Vec<Vec<f64>> {
    m.row_iter().map(|r| r.iter().cloned().collect()).collect()
}

pub fn from_rows(rows: &[Vec<f64>]) -> Result<Mat, AlgebraError> {
    let r = rows.len();
    let c = rows.first().map_or(0, |x| x.len());
    if r == 0 || rows.iter().any(|x| x.len() != c) {
        return Err(AlgebraError::DimensionMismatch(
            "ragged or empty matrix".into(),
        ));
    }
    Ok(Mat::from_fn(r, c, |i, j| rows[i][j]))
}

/// `out += a * m`, entrywise and without allocating.
pub fn axpy(out: &mut Mat, a: f64, m: &Mat) {
    for (o, x) in out.as_mut_slice().iter_mut().zip(m.as_slice()) {
        *o += a * x;
    }
}
