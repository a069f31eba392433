//! The differential automorphism 2-crossed module of a differential
//! crossed module `d: e -> g`.
//!
//! Elements are coordinate columns:
//! - level one: coordinates in a basis of compatible derivation pairs
//!   `(f1, f2)`;
//! - level two: `(x, s)` with `x` in `g` and `s` a derivation `g -> e`,
//!   stacked as `[x; coords(s)]`;
//! - level three: vectors of `e`.

use crate::algebra::DifferentialTwoCrossedModule;
use crate::error::{Error, Result};
use crate::linalg::{self, Mat};

/// A differential crossed module in coordinates. Vectors are columns.
#[derive(Debug, Clone)]
pub struct CrossedModuleData {
    /// `ad_g[i]` is the matrix of `[x_i, .]` on `g`.
    pub ad_g: Vec<Mat>,
    /// `ad_e[i]` is the matrix of `[v_i, .]` on `e`.
    pub ad_e: Vec<Mat>,
    /// Matrix of `d: e -> g`.
    pub boundary: Mat,
    /// `action[i]` is the matrix of `x_i |> .` on `e`.
    pub action: Vec<Mat>,
}

impl CrossedModuleData {
    /// `(id: g -> g, ad)` for the matrix Lie algebra spanned by `basis`.
    pub fn identity_adjoint(basis: &[Mat]) -> Self {
        let coords = linalg::Coordinates::new(basis);
        let n = basis.len();
        let ad: Vec<Mat> = basis
            .iter()
            .map(|x| {
                let mut m = linalg::zeros(n, n);
                for (j, y) in basis.iter().enumerate() {
                    let c = coords.of(&linalg::commutator(x, y));
                    for (i, v) in c.iter().enumerate() {
                        m[(i, j)] = *v;
                    }
                }
                m
            })
            .collect();
        CrossedModuleData {
            ad_g: ad.clone(),
            ad_e: ad.clone(),
            boundary: linalg::identity(n),
            action: ad,
        }
    }

    /// Abelian `g` and `e` with zero action and the given boundary.
    pub fn abelian(dim_g: usize, dim_e: usize, boundary: Mat) -> Self {
        CrossedModuleData {
            ad_g: vec![linalg::zeros(dim_g, dim_g); dim_g],
            ad_e: vec![linalg::zeros(dim_e, dim_e); dim_e],
            boundary,
            action: vec![linalg::zeros(dim_e, dim_e); dim_g],
        }
    }

    pub fn dim_g(&self) -> usize {
        self.ad_g.len()
    }

    pub fn dim_e(&self) -> usize {
        self.ad_e.len()
    }

    fn weighted(ms: &[Mat], x: &Mat, r: usize) -> Mat {
        let mut out = linalg::zeros(r, r);
        for (i, m) in ms.iter().enumerate() {
            out += m * x[(i, 0)];
        }
        out
    }

    pub fn ad_g_of(&self, x: &Mat) -> Mat {
        Self::weighted(&self.ad_g, x, self.dim_g())
    }

    pub fn ad_e_of(&self, v: &Mat) -> Mat {
        Self::weighted(&self.ad_e, v, self.dim_e())
    }

    /// Matrix of `x |> .` on `e`.
    pub fn action_of(&self, x: &Mat) -> Mat {
        Self::weighted(&self.action, x, self.dim_e())
    }

    fn unit_g(&self, i: usize) -> Mat {
        linalg::unit(self.dim_g(), 1, i, 0)
    }

    fn unit_e(&self, i: usize) -> Mat {
        linalg::unit(self.dim_e(), 1, i, 0)
    }

    /// Largest violation of the differential crossed-module laws on basis
    /// vectors.
    pub fn law_residual(&self) -> f64 {
        let (ng, ne) = (self.dim_g(), self.dim_e());
        let mut r = 0.0f64;
        if self.boundary.shape() != (ng, ne) || self.action.len() != ng {
            return f64::INFINITY;
        }
        for i in 0..ng {
            let x = self.unit_g(i);
            for j in 0..ng {
                let y = self.unit_g(j);
                let xy = self.ad_g_of(&x) * &y;
                // Action is a Lie algebra map.
                let lhs = self.action_of(&xy);
                let rhs = linalg::commutator(&self.action_of(&x), &self.action_of(&y));
                r = r.max((lhs - rhs).norm());
                r = r.max((&xy + self.ad_g_of(&y) * &x).norm());
            }
            for a in 0..ne {
                let v = self.unit_e(a);
                // d(x |> v) = [x, d v]
                let lhs = &self.boundary * self.action_of(&x) * &v;
                let rhs = self.ad_g_of(&x) * &self.boundary * &v;
                r = r.max((lhs - rhs).norm());
                for b in 0..ne {
                    let w = self.unit_e(b);
                    // Derivations of e.
                    let vw = self.ad_e_of(&v) * &w;
                    let lhs = self.action_of(&x) * &vw;
                    let rhs = self.ad_e_of(&(self.action_of(&x) * &v)) * &w
                        + self.ad_e_of(&v) * self.action_of(&x) * &w;
                    r = r.max((lhs - rhs).norm());
                }
            }
        }
        for a in 0..ne {
            let v = self.unit_e(a);
            for b in 0..ne {
                let w = self.unit_e(b);
                // d(v) |> w = [v, w]
                let lhs = self.action_of(&(&self.boundary * &v)) * &w;
                let rhs = self.ad_e_of(&v) * &w;
                r = r.max((lhs - rhs).norm());
                r = r.max((self.ad_e_of(&v) * &w + self.ad_e_of(&w) * &v).norm());
            }
        }
        r
    }
}

pub struct AutomorphismInstance {
    xmod: CrossedModuleData,
    /// Basis of compatible pairs `(f1, f2)`.
    pairs: Vec<(Mat, Mat)>,
    /// Basis of derivations `g -> e`, as `dim_e x dim_g` matrices.
    derivations: Vec<Mat>,
    basis_g: Vec<Mat>,
    basis_e: Vec<Mat>,
    basis_l: Vec<Mat>,
}

/// Solves the linear constraint system `constraint(unknown) = 0` over a
/// space of the given dimension and returns an orthonormal basis of its
/// solutions.
fn solution_basis(unknowns: usize, constraint: impl Fn(&[f64]) -> Vec<f64>) -> Result<Mat> {
    let zero = vec![0.0; unknowns];
    let rows = constraint(&zero).len();
    let mut m = linalg::zeros(rows.max(1), unknowns);
    for j in 0..unknowns {
        let mut e = zero.clone();
        e[j] = 1.0;
        for (i, v) in constraint(&e).into_iter().enumerate() {
            m[(i, j)] = v;
        }
    }
    let basis = linalg::null_space(&m, 1e-10);
    // The basis must actually solve the system.
    let resid = (&m * &basis).norm();
    if resid > 1e-8 * m.norm().max(1.0) {
        return Err(Error::DegenerateCrossedModule(format!(
            "null space residual {resid:e}"
        )));
    }
    Ok(basis)
}

pub fn make_automorphism(xmod: CrossedModuleData) -> Result<AutomorphismInstance> {
    let (ng, ne) = (xmod.dim_g(), xmod.dim_e());
    if ng == 0 || ne == 0 {
        return Err(Error::DegenerateCrossedModule(
            "zero-dimensional algebra".into(),
        ));
    }
    let law = xmod.law_residual();
    if law > 1e-9 {
        return Err(Error::DegenerateCrossedModule(format!(
            "crossed module laws fail by {law:e}"
        )));
    }

    // Pairs (f1, f2): derivations, chain map, compatible with the action.
    let split = |v: &[f64]| -> (Mat, Mat) {
        (
            linalg::unvec(&v[..ng * ng], ng, ng),
            linalg::unvec(&v[ng * ng..], ne, ne),
        )
    };
    let pair_basis = solution_basis(ng * ng + ne * ne, |v| {
        let (f1, f2) = split(v);
        let mut out = Vec::new();
        for i in 0..ng {
            let x = xmod.unit_g(i);
            for j in 0..ng {
                let y = xmod.unit_g(j);
                let r = &f1 * xmod.ad_g_of(&x) * &y
                    - xmod.ad_g_of(&(&f1 * &x)) * &y
                    - xmod.ad_g_of(&x) * &f1 * &y;
                out.extend(r.iter());
            }
            for a in 0..ne {
                let v = xmod.unit_e(a);
                let r = &f2 * xmod.action_of(&x) * &v
                    - xmod.action_of(&(&f1 * &x)) * &v
                    - xmod.action_of(&x) * &f2 * &v;
                out.extend(r.iter());
            }
        }
        for a in 0..ne {
            let v = xmod.unit_e(a);
            for b in 0..ne {
                let w = xmod.unit_e(b);
                let r = &f2 * xmod.ad_e_of(&v) * &w
                    - xmod.ad_e_of(&(&f2 * &v)) * &w
                    - xmod.ad_e_of(&v) * &f2 * &w;
                out.extend(r.iter());
            }
        }
        let chain = &xmod.boundary * &f2 - &f1 * &xmod.boundary;
        out.extend(chain.iter());
        out
    })?;
    let pairs: Vec<(Mat, Mat)> = (0..pair_basis.ncols())
        .map(|k| split(pair_basis.column(k).as_slice()))
        .collect();

    // Derivations s: g -> e with s[x,y] = x |> s(y) - y |> s(x).
    let der_basis = solution_basis(ne * ng, |v| {
        let s = linalg::unvec(v, ne, ng);
        let mut out = Vec::new();
        for i in 0..ng {
            let x = xmod.unit_g(i);
            for j in 0..ng {
                let y = xmod.unit_g(j);
                let r = &s * xmod.ad_g_of(&x) * &y - xmod.action_of(&x) * &s * &y
                    + xmod.action_of(&y) * &s * &x;
                out.extend(r.iter());
            }
        }
        out
    })?;
    let derivations: Vec<Mat> = (0..der_basis.ncols())
        .map(|k| linalg::unvec(der_basis.column(k).as_slice(), ne, ng))
        .collect();

    let dim1 = pairs.len();
    let dim2 = ng + derivations.len();
    if dim1 == 0 {
        return Err(Error::DegenerateCrossedModule(
            "no compatible derivation pairs".into(),
        ));
    }
    let units = |n: usize| (0..n).map(|i| linalg::unit(n, 1, i, 0)).collect::<Vec<_>>();
    Ok(AutomorphismInstance {
        basis_g: units(dim1),
        basis_e: units(dim2),
        basis_l: units(ne),
        xmod,
        pairs,
        derivations,
    })
}

impl AutomorphismInstance {
    pub fn crossed_module(&self) -> &CrossedModuleData {
        &self.xmod
    }

    pub fn derivation_basis(&self) -> &[Mat] {
        &self.derivations
    }

    pub fn pair_basis(&self) -> &[(Mat, Mat)] {
        &self.pairs
    }

    pub fn dims(&self) -> (usize, usize, usize) {
        (self.basis_g.len(), self.basis_e.len(), self.basis_l.len())
    }

    /// The pair `(f1, f2)` with the given coordinates.
    pub fn pair_of(&self, c: &Mat) -> (Mat, Mat) {
        let (ng, ne) = (self.xmod.dim_g(), self.xmod.dim_e());
        let mut f1 = linalg::zeros(ng, ng);
        let mut f2 = linalg::zeros(ne, ne);
        for (k, (a, b)) in self.pairs.iter().enumerate() {
            f1 += a * c[(k, 0)];
            f2 += b * c[(k, 0)];
        }
        (f1, f2)
    }

    /// Coordinates of a pair; the pair basis is orthonormal.
    pub fn pair_coords(&self, f1: &Mat, f2: &Mat) -> Mat {
        let mut out = linalg::zeros(self.pairs.len(), 1);
        for (k, (a, b)) in self.pairs.iter().enumerate() {
            out[(k, 0)] = a.dot(f1) + b.dot(f2);
        }
        out
    }

    /// Splits a level-two element into `(x, s)`.
    pub fn split(&self, u: &Mat) -> (Mat, Mat) {
        let (ng, ne) = (self.xmod.dim_g(), self.xmod.dim_e());
        let x = u.view((0, 0), (ng, 1)).into_owned();
        let mut s = linalg::zeros(ne, ng);
        for (k, d) in self.derivations.iter().enumerate() {
            s += d * u[(ng + k, 0)];
        }
        (x, s)
    }

    pub fn join(&self, x: &Mat, s: &Mat) -> Mat {
        let ng = self.xmod.dim_g();
        let mut out = linalg::zeros(ng + self.derivations.len(), 1);
        out.view_mut((0, 0), (ng, 1)).copy_from(x);
        for (k, d) in self.derivations.iter().enumerate() {
            out[(ng + k, 0)] = d.dot(s);
        }
        out
    }

    // q'(x) = (ad_x, x |> .)
    fn inner_pair(&self, x: &Mat) -> (Mat, Mat) {
        (self.xmod.ad_g_of(x), self.xmod.action_of(x))
    }

    // f |> s = f2 s - s f1
    fn act_on_derivation(&self, f: &(Mat, Mat), s: &Mat) -> Mat {
        &f.1 * s - s * &f.0
    }
}

impl DifferentialTwoCrossedModule for AutomorphismInstance {
    fn name(&self) -> String {
        "automorphism (differential)".into()
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
        [
            (self.basis_g.len(), 1),
            (self.basis_e.len(), 1),
            (self.basis_l.len(), 1),
        ]
    }
    fn bracket_g(&self, a: &Mat, b: &Mat) -> Mat {
        let (f1, f2) = self.pair_of(a);
        let (g1, g2) = self.pair_of(b);
        self.pair_coords(&linalg::commutator(&f1, &g1), &linalg::commutator(&f2, &g2))
    }
    // [(x,s),(y,t)] = ([x,y], x |> t - y |> s + s d t - t d s)
    fn bracket_e(&self, u: &Mat, v: &Mat) -> Mat {
        let (x, s) = self.split(u);
        let (y, t) = self.split(v);
        let d = &self.xmod.boundary;
        let xy = self.xmod.ad_g_of(&x) * &y;
        let st = self.act_on_derivation(&self.inner_pair(&x), &t)
            - self.act_on_derivation(&self.inner_pair(&y), &s)
            + &s * d * &t
            - &t * d * &s;
        self.join(&xy, &st)
    }
    fn bracket_l(&self, a: &Mat, b: &Mat) -> Mat {
        self.xmod.ad_e_of(a) * b
    }
    // alpha'(e) = (d e, F_e) with F_e(x) = x |> e
    fn delta(&self, e: &Mat) -> Mat {
        let ng = self.xmod.dim_g();
        let mut fe = linalg::zeros(self.xmod.dim_e(), ng);
        for i in 0..ng {
            fe.set_column(i, &(&self.xmod.action[i] * e).column(0));
        }
        self.join(&(&self.xmod.boundary * e), &fe)
    }
    // beta'(x, s) = q'(x) + q(s), q(s) = (d s, s d)
    fn partial(&self, u: &Mat) -> Mat {
        let (x, s) = self.split(u);
        let (a1, a2) = self.inner_pair(&x);
        let d = &self.xmod.boundary;
        self.pair_coords(&(a1 + d * &s), &(a2 + &s * d))
    }
    // f |> (x, s) = (f1 x, f2 s - s f1)
    fn act_e(&self, a: &Mat, u: &Mat) -> Mat {
        let f = self.pair_of(a);
        let (x, s) = self.split(u);
        self.join(&(&f.0 * x), &self.act_on_derivation(&f, &s))
    }
    fn act_l(&self, a: &Mat, e: &Mat) -> Mat {
        let (_, f2) = self.pair_of(a);
        f2 * e
    }
    // {(x,s),(y,t)} = -s(y)
    fn lifting(&self, u: &Mat, v: &Mat) -> Mat {
        let (_, s) = self.split(u);
        let (y, _) = self.split(v);
        -(s * y)
    }
}
