//! Matrix-valued differential forms on R^d with polynomial coefficients.
//!
//! A k-form is stored as a sum over strictly increasing index tuples `I`
//! of `c_I(x) dx_I`, each `c_I` a polynomial with matrix coefficients.
//! Wedge products and exterior derivatives are computed on the
//! coefficients exactly.

use std::collections::BTreeMap;

use rand::RngExt;
use serde::{Deserialize, Serialize};

use crate::algebra::Rng;
use crate::error::{Error, Result};
use crate::linalg::{self, Mat};

/// Bilinear map used as the pairing of a wedge product.
pub type Pairing<'a> = &'a dyn Fn(&Mat, &Mat) -> Mat;

#[derive(Clone, Debug, PartialEq)]
pub struct Term {
    pub alpha: Vec<u32>,
    pub coeff: Mat,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Component {
    pub index: Vec<usize>,
    pub terms: Vec<Term>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct FormField {
    d: usize,
    k: usize,
    shape: (usize, usize),
    comps: Vec<Component>,
}

type Accum = BTreeMap<Vec<usize>, BTreeMap<Vec<u32>, Mat>>;

fn accumulate(acc: &mut Accum, index: Vec<usize>, alpha: Vec<u32>, m: Mat) {
    let slot = acc.entry(index).or_default();
    match slot.get_mut(&alpha) {
        Some(x) => *x += m,
        None => {
            slot.insert(alpha, m);
        }
    }
}

/// Sign of the shuffle merging disjoint sorted `a` and `b`, with the merged
/// tuple; `None` if they intersect.
fn merge(a: &[usize], b: &[usize]) -> Option<(f64, Vec<usize>)> {
    let mut inversions = 0usize;
    for &i in a {
        for &j in b {
            if i == j {
                return None;
            }
            if i > j {
                inversions += 1;
            }
        }
    }
    let mut k: Vec<usize> = a.iter().chain(b).cloned().collect();
    k.sort_unstable();
    let sign = if inversions % 2 == 0 { 1.0 } else { -1.0 };
    Some((sign, k))
}

/// Determinant of the k x k matrix `vs[col][index[row]]`, k <= 4.
fn minor(vs: &[&[f64]], index: &[usize]) -> f64 {
    let a = |r: usize, c: usize| vs[c][index[r]];
    match index.len() {
        0 => 1.0,
        1 => a(0, 0),
        2 => a(0, 0) * a(1, 1) - a(0, 1) * a(1, 0),
        3 => {
            a(0, 0) * (a(1, 1) * a(2, 2) - a(1, 2) * a(2, 1))
                - a(0, 1) * (a(1, 0) * a(2, 2) - a(1, 2) * a(2, 0))
                + a(0, 2) * (a(1, 0) * a(2, 1) - a(1, 1) * a(2, 0))
        }
        k => {
            let mut m = nalgebra::DMatrix::<f64>::zeros(k, k);
            for r in 0..k {
                for c in 0..k {
                    m[(r, c)] = a(r, c);
                }
            }
            m.determinant()
        }
    }
}

fn binom(n: usize, k: usize) -> usize {
    if k > n {
        return 0;
    }
    (0..k).fold(1, |acc, i| acc * (n - i) / (i + 1))
}

/// All strictly increasing k-tuples in `0..d`.
pub fn index_tuples(d: usize, k: usize) -> Vec<Vec<usize>> {
    fn rec(start: usize, d: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..d {
            cur.push(i);
            rec(i + 1, d, k, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::with_capacity(binom(d, k));
    rec(0, d, k, &mut Vec::new(), &mut out);
    out
}

/// All exponent vectors in `d` variables of total degree at most `deg`.
pub fn exponents(d: usize, deg: u32) -> Vec<Vec<u32>> {
    fn rec(i: usize, d: usize, left: u32, cur: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
        if i == d {
            out.push(cur.clone());
            return;
        }
        for p in 0..=left {
            cur.push(p);
            rec(i + 1, d, left - p, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(0, d, deg, &mut Vec::new(), &mut out);
    out
}

impl FormField {
    pub fn zero(d: usize, k: usize, shape: (usize, usize)) -> Self {
        FormField {
            d,
            k,
            shape,
            comps: Vec::new(),
        }
    }

    /// Builds a form from `(I, alpha, coefficient)` triples; repeated
    /// entries are summed.
    pub fn from_terms(
        d: usize,
        k: usize,
        shape: (usize, usize),
        terms: impl IntoIterator<Item = (Vec<usize>, Vec<u32>, Mat)>,
    ) -> Result<Self> {
        let mut acc = Accum::new();
        for (index, alpha, m) in terms {
            if index.len() != k
                || index.windows(2).any(|w| w[0] >= w[1])
                || index.iter().any(|&i| i >= d)
            {
                return Err(Error::DimensionMismatch(format!(
                    "bad index tuple {index:?} for a {k}-form on R^{d}"
                )));
            }
            if alpha.len() != d {
                return Err(Error::DimensionMismatch(format!(
                    "exponent {alpha:?} has length != {d}"
                )));
            }
            if m.shape() != shape {
                return Err(Error::DimensionMismatch(format!(
                    "coefficient shape {:?} != {shape:?}",
                    m.shape()
                )));
            }
            accumulate(&mut acc, index, alpha, m);
        }
        Ok(Self::from_accum(d, k, shape, acc))
    }

    fn from_accum(d: usize, k: usize, shape: (usize, usize), acc: Accum) -> Self {
        let comps = acc
            .into_iter()
            .filter_map(|(index, terms)| {
                let terms: Vec<Term> = terms
                    .into_iter()
                    .filter(|(_, m)| m.iter().any(|v| *v != 0.0))
                    .map(|(alpha, coeff)| Term { alpha, coeff })
                    .collect();
                (!terms.is_empty()).then_some(Component { index, terms })
            })
            .collect();
        FormField { d, k, shape, comps }
    }

    fn to_accum(&self) -> Accum {
        let mut acc = Accum::new();
        for c in &self.comps {
            for t in &c.terms {
                accumulate(&mut acc, c.index.clone(), t.alpha.clone(), t.coeff.clone());
            }
        }
        acc
    }

    /// Constant-coefficient 1-form `sum_i a_i dx_i`.
    pub fn constant_one_form(coeffs: &[Mat]) -> Result<Self> {
        let d = coeffs.len();
        let shape = coeffs.first().map(|m| m.shape()).unwrap_or((1, 1));
        Self::from_terms(
            d,
            1,
            shape,
            coeffs
                .iter()
                .enumerate()
                .map(|(i, m)| (vec![i], vec![0; d], m.clone())),
        )
    }

    /// Random form with every coefficient in the span of `basis` and total
    /// degree at most `deg`, entries uniform in `[-scale, scale]`.
    pub fn random(
        d: usize,
        k: usize,
        basis: &[Mat],
        deg: u32,
        scale: f64,
        rng: &mut Rng,
    ) -> Result<Self> {
        let shape = basis
            .first()
            .map(|b| b.shape())
            .ok_or_else(|| Error::DimensionMismatch("empty basis".into()))?;
        let mut terms = Vec::new();
        for index in index_tuples(d, k) {
            for alpha in exponents(d, deg) {
                let mut m = linalg::zeros(shape.0, shape.1);
                for b in basis {
                    let c: f64 = rng.random_range(-1.0..=1.0);
                    m += b * (c * scale);
                }
                terms.push((index.clone(), alpha, m));
            }
        }
        Self::from_terms(d, k, shape, terms)
    }

    pub fn ambient_dim(&self) -> usize {
        self.d
    }

    pub fn degree(&self) -> usize {
        self.k
    }

    pub fn shape(&self) -> (usize, usize) {
        self.shape
    }

    pub fn components(&self) -> &[Component] {
        &self.comps
    }

    /// Largest total polynomial degree of any coefficient.
    pub fn poly_degree(&self) -> u32 {
        self.comps
            .iter()
            .flat_map(|c| c.terms.iter().map(|t| t.alpha.iter().sum::<u32>()))
            .max()
            .unwrap_or(0)
    }

    pub fn is_zero(&self) -> bool {
        self.comps.is_empty()
    }

    /// Largest absolute coefficient entry.
    pub fn max_abs(&self) -> f64 {
        self.comps
            .iter()
            .flat_map(|c| c.terms.iter().map(|t| t.coeff.amax()))
            .fold(0.0, f64::max)
    }

    fn check_same(&self, other: &FormField) -> Result<()> {
        if self.d != other.d || self.k != other.k || self.shape != other.shape {
            return Err(Error::DimensionMismatch(format!(
                "forms differ: (d={}, k={}, {:?}) vs (d={}, k={}, {:?})",
                self.d, self.k, self.shape, other.d, other.k, other.shape
            )));
        }
        Ok(())
    }

    pub fn add(&self, other: &FormField) -> Result<FormField> {
        self.check_same(other)?;
        let mut acc = self.to_accum();
        for c in &other.comps {
            for t in &c.terms {
                accumulate(&mut acc, c.index.clone(), t.alpha.clone(), t.coeff.clone());
            }
        }
        Ok(Self::from_accum(self.d, self.k, self.shape, acc))
    }

    pub fn sub(&self, other: &FormField) -> Result<FormField> {
        self.add(&other.scale(-1.0))
    }

    pub fn scale(&self, c: f64) -> FormField {
        self.map_values(|m| m * c, self.shape)
    }

    /// Applies a linear map to every coefficient.
    pub fn map_values(&self, f: impl Fn(&Mat) -> Mat, shape: (usize, usize)) -> FormField {
        let mut acc = Accum::new();
        for c in &self.comps {
            for t in &c.terms {
                accumulate(&mut acc, c.index.clone(), t.alpha.clone(), f(&t.coeff));
            }
        }
        Self::from_accum(self.d, self.k, shape, acc)
    }

    /// `alpha ^B beta`, normalized so that for 1-forms
    /// `(alpha ^ beta)(u, v) = B(alpha(u), beta(v)) - B(alpha(v), beta(u))`.
    pub fn wedge(
        &self,
        other: &FormField,
        pairing: Pairing<'_>,
        shape: (usize, usize),
    ) -> Result<FormField> {
        if self.d != other.d {
            return Err(Error::DimensionMismatch(format!(
                "wedge on R^{} and R^{}",
                self.d, other.d
            )));
        }
        let mut acc = Accum::new();
        for a in &self.comps {
            for b in &other.comps {
                let Some((sign, index)) = merge(&a.index, &b.index) else {
                    continue;
                };
                for ta in &a.terms {
                    for tb in &b.terms {
                        let alpha: Vec<u32> =
                            ta.alpha.iter().zip(&tb.alpha).map(|(x, y)| x + y).collect();
                        let v = pairing(&ta.coeff, &tb.coeff) * sign;
                        if v.shape() != shape {
                            return Err(Error::DimensionMismatch(format!(
                                "pairing produced {:?}, expected {shape:?}",
                                v.shape()
                            )));
                        }
                        accumulate(&mut acc, index.clone(), alpha, v);
                    }
                }
            }
        }
        Ok(Self::from_accum(self.d, self.k + other.k, shape, acc))
    }

    pub fn exterior_derivative(&self) -> FormField {
        let mut acc = Accum::new();
        for c in &self.comps {
            for i in 0..self.d {
                if c.index.contains(&i) {
                    continue;
                }
                let pos = c.index.iter().filter(|&&j| j < i).count();
                let sign = if pos % 2 == 0 { 1.0 } else { -1.0 };
                let mut index = c.index.clone();
                index.insert(pos, i);
                for t in &c.terms {
                    if t.alpha[i] == 0 {
                        continue;
                    }
                    let mut alpha = t.alpha.clone();
                    alpha[i] -= 1;
                    accumulate(
                        &mut acc,
                        index.clone(),
                        alpha,
                        &t.coeff * (sign * t.alpha[i] as f64),
                    );
                }
            }
        }
        Self::from_accum(self.d, self.k + 1, self.shape, acc)
    }

    /// Evaluates `alpha_x(v_1, ..., v_k)`.
    pub fn eval(&self, x: &[f64], vs: &[&[f64]]) -> Mat {
        let mut out = linalg::zeros(self.shape.0, self.shape.1);
        self.eval_into(x, vs, &mut out);
        out
    }

    /// As [`FormField::eval`], writing into `out`.
    pub fn eval_into(&self, x: &[f64], vs: &[&[f64]], out: &mut Mat) {
        debug_assert_eq!(vs.len(), self.k);
        out.fill(0.0);
        for c in &self.comps {
            let w = minor(vs, &c.index);
            if w == 0.0 {
                continue;
            }
            for t in &c.terms {
                let mut mono = w;
                for (xi, &p) in x.iter().zip(&t.alpha) {
                    if p > 0 {
                        mono *= xi.powi(p as i32);
                    }
                }
                if mono != 0.0 {
                    linalg::axpy(out, mono, &t.coeff);
                }
            }
        }
    }

    /// Coefficient `c_I(x)` for a strictly increasing `index`.
    pub fn coefficient(&self, index: &[usize], x: &[f64]) -> Mat {
        let mut out = linalg::zeros(self.shape.0, self.shape.1);
        if let Some(c) = self.comps.iter().find(|c| c.index == index) {
            for t in &c.terms {
                let mono: f64 = x
                    .iter()
                    .zip(&t.alpha)
                    .map(|(xi, &p)| xi.powi(p as i32))
                    .product();
                linalg::axpy(&mut out, mono, &t.coeff);
            }
        }
        out
    }

    pub fn to_json(&self) -> FormJson {
        FormJson {
            d: self.d,
            k: self.k,
            terms: self
                .comps
                .iter()
                .map(|c| TermGroupJson {
                    index: c.index.clone(),
                    monomials: c
                        .terms
                        .iter()
                        .map(|t| MonomialJson {
                            alpha: t.alpha.clone(),
                            matrix: linalg::to_rows(&t.coeff),
                        })
                        .collect(),
                })
                .collect(),
        }
    }

    /// Parses the JSON form; `shape` is used when the form has no terms.
    pub fn from_json(j: &FormJson, shape: (usize, usize)) -> Result<FormField> {
        let mut terms = Vec::new();
        for g in &j.terms {
            for m in &g.monomials {
                terms.push((
                    g.index.clone(),
                    m.alpha.clone(),
                    linalg::from_rows(&m.matrix)?,
                ));
            }
        }
        let shape = terms.first().map(|t| t.2.shape()).unwrap_or(shape);
        Self::from_terms(j.d, j.k, shape, terms)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MonomialJson {
    pub alpha: Vec<u32>,
    pub matrix: Vec<Vec<f64>>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TermGroupJson {
    #[serde(rename = "I")]
    pub index: Vec<usize>,
    pub monomials: Vec<MonomialJson>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FormJson {
    pub d: usize,
    pub k: usize,
    pub terms: Vec<TermGroupJson>,
}

pub fn wedge(
    alpha: &FormField,
    beta: &FormField,
    pairing: Pairing<'_>,
    shape: (usize, usize),
) -> Result<FormField> {
    alpha.wedge(beta, pairing, shape)
}

pub fn exterior_derivative(alpha: &FormField) -> FormField {
    alpha.exterior_derivative()
}
