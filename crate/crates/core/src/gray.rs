//! The Gray 3-groupoid with a single object built from a 2-crossed module.
//!
//! 1-cells are elements `X` of G, 2-cells pairs `(X, e)` and 3-cells
//! triples `(X, e, l)`. Cells keep a handle to their module and refuse to
//! compose with cells of another module.

use std::fmt;
use std::sync::Arc;

use serde_json::{json, Value};

use crate::algebra::{rng_from_seed, AxiomReport, ResidualTable, TwoCrossedModule};
use crate::error::{Error, Result};
use crate::linalg::{self, dist, Mat};

/// Default tolerance on boundary agreement when composing.
pub const BOUNDARY_TOL: f64 = 1e-8;

pub type Module = Arc<dyn TwoCrossedModule>;

#[derive(Clone)]
pub struct GrayCell {
    rank: usize,
    x: Mat,
    e: Option<Mat>,
    l: Option<Mat>,
    module: Module,
}

impl fmt::Debug for GrayCell {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("GrayCell")
            .field("rank", &self.rank)
            .field("module", &self.module.name())
            .field("x", &self.x)
            .field("e", &self.e)
            .field("l", &self.l)
            .finish()
    }
}

fn same_module(a: &Module, b: &Module) -> bool {
    std::ptr::eq(Arc::as_ptr(a) as *const (), Arc::as_ptr(b) as *const ())
}

impl GrayCell {
    pub fn one(h: &Module, x: Mat) -> Self {
        GrayCell {
            rank: 1,
            x,
            e: None,
            l: None,
            module: h.clone(),
        }
    }

    pub fn two(h: &Module, x: Mat, e: Mat) -> Self {
        GrayCell {
            rank: 2,
            x,
            e: Some(e),
            l: None,
            module: h.clone(),
        }
    }

    pub fn three(h: &Module, x: Mat, e: Mat, l: Mat) -> Self {
        GrayCell {
            rank: 3,
            x,
            e: Some(e),
            l: Some(l),
            module: h.clone(),
        }
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn x(&self) -> &Mat {
        &self.x
    }

    /// E-part; the identity of E for a 1-cell.
    pub fn e(&self) -> Mat {
        self.e.clone().unwrap_or_else(|| self.module.e().identity())
    }

    /// L-part; the identity of L below rank 3.
    pub fn l(&self) -> Mat {
        self.l.clone().unwrap_or_else(|| self.module.l().identity())
    }

    pub fn module(&self) -> &Module {
        &self.module
    }

    fn h(&self) -> &dyn TwoCrossedModule {
        self.module.as_ref()
    }

    /// `d2-`: the source 1-cell.
    pub fn source2(&self) -> Result<GrayCell> {
        if self.rank < 2 {
            return Err(Error::RankMismatch(self.rank, 0, 2));
        }
        Ok(GrayCell::one(&self.module, self.x.clone()))
    }

    /// `d2+ (X, e) = d(e)^-1 X`.
    pub fn target2(&self) -> Result<GrayCell> {
        if self.rank < 2 {
            return Err(Error::RankMismatch(self.rank, 0, 2));
        }
        let d = self.h().g().inv(&self.h().partial(&self.e()))?;
        Ok(GrayCell::one(&self.module, d * &self.x))
    }

    /// `d3- (X, e, l) = (X, e)`.
    pub fn source3(&self) -> Result<GrayCell> {
        if self.rank < 3 {
            return Err(Error::RankMismatch(self.rank, 0, 3));
        }
        Ok(GrayCell::two(&self.module, self.x.clone(), self.e()))
    }

    /// `d3+ (X, e, l) = (X, delta(l)^-1 e)`.
    pub fn target3(&self) -> Result<GrayCell> {
        if self.rank < 3 {
            return Err(Error::RankMismatch(self.rank, 0, 3));
        }
        let d = self.h().e().inv(&self.h().delta(&self.l()))?;
        Ok(GrayCell::two(&self.module, self.x.clone(), d * self.e()))
    }

    /// Identity cell one rank up.
    pub fn identity(&self) -> Result<GrayCell> {
        match self.rank {
            1 => Ok(GrayCell::two(
                &self.module,
                self.x.clone(),
                self.module.e().identity(),
            )),
            2 => Ok(GrayCell::three(
                &self.module,
                self.x.clone(),
                self.e(),
                self.module.l().identity(),
            )),
            r => Err(Error::RankMismatch(r, r, 0)),
        }
    }

    /// Inverse for the composition in `direction`.
    pub fn inverse(&self, direction: usize) -> Result<GrayCell> {
        let h = self.h();
        match (self.rank, direction) {
            (1, 1) => Ok(GrayCell::one(&self.module, h.g().inv(&self.x)?)),
            (2, 2) => {
                let t = self.target2()?;
                Ok(GrayCell::two(&self.module, t.x, h.e().inv(&self.e())?))
            }
            (3, 2) => {
                let t = self.target2()?;
                let ei = h.e().inv(&self.e())?;
                let l = h.derived_action(&ei, &h.l().inv(&self.l())?)?;
                Ok(GrayCell::three(&self.module, t.x, ei, l))
            }
            (3, 3) => {
                let t = self.target3()?;
                Ok(GrayCell::three(
                    &self.module,
                    t.x.clone(),
                    t.e(),
                    h.l().inv(&self.l())?,
                ))
            }
            (r, d) => Err(Error::RankMismatch(r, r, d)),
        }
    }

    /// Largest componentwise Frobenius distance; infinite across ranks.
    pub fn distance(&self, other: &GrayCell) -> f64 {
        if self.rank != other.rank {
            return f64::INFINITY;
        }
        let mut d = dist(&self.x, &other.x);
        if self.rank >= 2 {
            d = d.max(dist(&self.e(), &other.e()));
        }
        if self.rank == 3 {
            d = d.max(dist(&self.l(), &other.l()));
        }
        d
    }

    /// `{"rank": n, "X": [[..]], "e": {"rep": [[..]]}, "l": [[..]]}`, rows first.
    pub fn to_json(&self) -> Value {
        let mut v = json!({ "rank": self.rank, "X": linalg::to_rows(&self.x) });
        if let Some(e) = &self.e {
            v["e"] = json!({ "rep": linalg::to_rows(e) });
        }
        if let Some(l) = &self.l {
            v["l"] = json!(linalg::to_rows(l));
        }
        v
    }

    pub fn from_json(h: &Module, v: &Value) -> Result<GrayCell> {
        let bad = |what: &str| Error::Config(format!("cell JSON: {what}"));
        let rows = |v: &Value| -> Result<Mat> {
            let r: Vec<Vec<f64>> =
                serde_json::from_value(v.clone()).map_err(|e| bad(&e.to_string()))?;
            linalg::from_rows(&r)
        };
        let rank = v["rank"].as_u64().ok_or_else(|| bad("missing rank"))? as usize;
        let x = rows(&v["X"])?;
        match rank {
            1 => Ok(GrayCell::one(h, x)),
            2 => Ok(GrayCell::two(h, x, rows(&v["e"]["rep"])?)),
            3 => Ok(GrayCell::three(h, x, rows(&v["e"]["rep"])?, rows(&v["l"])?)),
            _ => Err(bad("rank must be 1, 2 or 3")),
        }
    }
}

fn check_boundary(lhs: &Mat, rhs: &Mat, tol: f64) -> Result<()> {
    let residual = dist(lhs, rhs);
    if residual.is_finite() && residual <= tol {
        Ok(())
    } else {
        Err(Error::BoundaryMismatch { residual, tol })
    }
}

/// Composition in direction 1, 2 or 3 with the default boundary tolerance.
pub fn compose(a: &GrayCell, b: &GrayCell, direction: usize) -> Result<GrayCell> {
    compose_with_tol(a, b, direction, BOUNDARY_TOL)
}

/// `a` first, then `b`. In direction 1 one side must be a 1-cell
/// (whiskering or the product of 1-cells). A 2-cell meeting a 3-cell in
/// direction 2 or 3 is treated as its identity 3-cell.
pub fn compose_with_tol(
    a: &GrayCell,
    b: &GrayCell,
    direction: usize,
    btol: f64,
) -> Result<GrayCell> {
    if !same_module(&a.module, &b.module) {
        return Err(Error::ModuleMismatch);
    }
    let m = &a.module;
    let h = a.h();
    match direction {
        1 => match (a.rank, b.rank) {
            (1, 1) => Ok(GrayCell::one(m, &a.x * &b.x)),
            (1, 2) => Ok(GrayCell::two(m, &a.x * &b.x, h.act_e(&a.x, &b.e())?)),
            (1, 3) => Ok(GrayCell::three(
                m,
                &a.x * &b.x,
                h.act_e(&a.x, &b.e())?,
                h.act_l(&a.x, &b.l())?,
            )),
            (2, 1) => Ok(GrayCell::two(m, &a.x * &b.x, a.e())),
            (3, 1) => Ok(GrayCell::three(m, &a.x * &b.x, a.e(), a.l())),
            (r, s) => Err(Error::RankMismatch(r, s, 1)),
        },
        2 => {
            if a.rank < 2 || b.rank < 2 {
                return Err(Error::RankMismatch(a.rank, b.rank, 2));
            }
            check_boundary(&a.target2()?.x, &b.x, btol)?;
            let e = a.e() * b.e();
            if a.rank == 2 && b.rank == 2 {
                Ok(GrayCell::two(m, a.x.clone(), e))
            } else {
                let l = h.derived_action(&a.e(), &b.l())? * a.l();
                Ok(GrayCell::three(m, a.x.clone(), e, l))
            }
        }
        3 => {
            if a.rank < 2 || b.rank < 2 || (a.rank == 2 && b.rank == 2) {
                return Err(Error::RankMismatch(a.rank, b.rank, 3));
            }
            let a3 = if a.rank == 2 {
                a.identity()?
            } else {
                a.clone()
            };
            let b3 = if b.rank == 2 {
                b.identity()?
            } else {
                b.clone()
            };
            let t = a3.target3()?;
            check_boundary(&t.x, &b3.x, btol)?;
            check_boundary(&t.e(), &b3.e(), btol)?;
            Ok(GrayCell::three(m, a3.x.clone(), a3.e(), a3.l() * b3.l()))
        }
        d => Err(Error::RankMismatch(a.rank, b.rank, d)),
    }
}

/// `(a |1 d2-(b)) |2 (d2+(a) |1 b)`, the composite with `a` below.
pub fn horizontal_lower(a: &GrayCell, b: &GrayCell) -> Result<GrayCell> {
    let lower = compose(a, &b.source2()?, 1)?;
    let upper = compose(&a.target2()?, b, 1)?;
    compose(&lower, &upper, 2)
}

/// `(d2-(a) |1 b) |2 (a |1 d2+(b))`, the composite with `b` below.
pub fn horizontal_upper(a: &GrayCell, b: &GrayCell) -> Result<GrayCell> {
    let lower = compose(&a.source2()?, b, 1)?;
    let upper = compose(a, &b.target2()?, 1)?;
    compose(&lower, &upper, 2)
}

/// `(X,e) # (Y,f) = (XY, e (d(e)^-1 X |> f), e |>' {e^-1, X |> f}^-1)`.
pub fn interchange_cell(a: &GrayCell, b: &GrayCell) -> Result<GrayCell> {
    if !same_module(&a.module, &b.module) {
        return Err(Error::ModuleMismatch);
    }
    if a.rank != 2 || b.rank != 2 {
        return Err(Error::RankMismatch(a.rank, b.rank, 1));
    }
    let h = a.h();
    let e = a.e();
    let f = b.e();
    let ei = h.e().inv(&e)?;
    let t = a.target2()?;
    let e_part = &e * h.act_e(&t.x, &f)?;
    let xf = h.act_e(&a.x, &f)?;
    let lift = h.l().inv(&h.lifting(&ei, &xf)?)?;
    let l_part = h.derived_action(&e, &lift)?;
    Ok(GrayCell::three(&a.module, &a.x * &b.x, e_part, l_part))
}

pub type InterchangeFn<'a> = &'a dyn Fn(&GrayCell, &GrayCell) -> Result<GrayCell>;

/// Samples compatible cell tuples and checks the Gray 3-groupoid axioms.
pub fn verify_gray_axioms(h: &Module, n_samples: usize, seed: u64, tol: f64) -> AxiomReport {
    verify_gray_axioms_with(h, n_samples, seed, tol, &interchange_cell)
}

/// As [`verify_gray_axioms`] with a replacement interchange map.
pub fn verify_gray_axioms_with(
    h: &Module,
    n_samples: usize,
    seed: u64,
    tol: f64,
    interchange: InterchangeFn<'_>,
) -> AxiomReport {
    let mut rng = rng_from_seed(seed);
    let mut t = ResidualTable::new();
    for i in 0..n_samples {
        let g: Vec<Mat> = (0..3).map(|_| h.g().sample(&mut rng)).collect();
        let e: Vec<Mat> = (0..3).map(|_| h.e().sample(&mut rng)).collect();
        let l: Vec<Mat> = (0..4).map(|_| h.l().sample(&mut rng)).collect();
        let s = Sample {
            h,
            g,
            e,
            l,
            hash: interchange,
        };
        s.run(&mut t, i);
    }
    t.into_report(seed, n_samples, tol)
}

struct Sample<'a> {
    h: &'a Module,
    g: Vec<Mat>,
    e: Vec<Mat>,
    l: Vec<Mat>,
    hash: InterchangeFn<'a>,
}

fn c2(a: &GrayCell, b: &GrayCell) -> Result<GrayCell> {
    compose(a, b, 2)
}

fn c3(a: &GrayCell, b: &GrayCell) -> Result<GrayCell> {
    compose(a, b, 3)
}

fn w(a: &GrayCell, b: &GrayCell) -> Result<GrayCell> {
    compose(a, b, 1)
}

fn max_dist(pairs: &[(GrayCell, GrayCell)]) -> f64 {
    pairs.iter().map(|(a, b)| a.distance(b)).fold(0.0, f64::max)
}

impl Sample<'_> {
    fn run(&self, t: &mut ResidualTable, i: usize) {
        let checks: [(&str, fn(&Self) -> Result<f64>); 23] = [
            ("boundary_globular", Self::globular),
            ("upward_associative", Self::upward_associative),
            ("upward_identity", Self::upward_identity),
            ("upward_inverse", Self::upward_inverse),
            ("vertical_2cell_associative", Self::vertical2_associative),
            ("vertical_2cell_identity", Self::vertical2_identity),
            ("vertical_2cell_inverse", Self::vertical2_inverse),
            ("vertical_3cell_associative", Self::vertical3_associative),
            ("vertical_3cell_identity", Self::vertical3_identity),
            ("vertical_3cell_inverse", Self::vertical3_inverse),
            (
                "vertical_3cell_boundary_functorial",
                Self::vertical3_boundaries,
            ),
            (
                "upward_vertical_interchange",
                Self::upward_vertical_interchange,
            ),
            ("whisker_functorial", Self::whisker_functorial),
            ("horizontal_1cell_associative", Self::one_cell_associative),
            ("whisker_composition", Self::whisker_composition),
            ("horizontal_associative", Self::horizontal_associative),
            ("horizontal_functorial", Self::horizontal_functorial),
            ("interchange_boundaries", Self::interchange_boundaries),
            (
                "interchange_trivial_on_identities",
                Self::interchange_identities,
            ),
            ("interchange_whiskering", Self::interchange_whiskering),
            ("two_functoriality", Self::two_functoriality),
            ("one_functoriality", Self::one_functoriality),
            (
                "one_functoriality_mirrored",
                Self::one_functoriality_mirrored,
            ),
        ];
        for (name, f) in checks {
            t.record_result(name, i, f(self));
        }
    }

    fn hm(&self) -> &dyn TwoCrossedModule {
        self.h.as_ref()
    }

    fn one(&self, k: usize) -> GrayCell {
        GrayCell::one(self.h, self.g[k].clone())
    }

    /// `(X, e)`, `(d(e)^-1 X, f)` and `(Y, g)`.
    fn two_cells(&self) -> Result<(GrayCell, GrayCell, GrayCell)> {
        let a = GrayCell::two(self.h, self.g[0].clone(), self.e[0].clone());
        let b = GrayCell::two(self.h, a.target2()?.x, self.e[1].clone());
        let c = GrayCell::two(self.h, self.g[1].clone(), self.e[2].clone());
        Ok((a, b, c))
    }

    /// Three upward-composable 3-cells over `(X, e)`.
    fn upward_chain(&self) -> Result<[GrayCell; 3]> {
        let j1 = GrayCell::three(
            self.h,
            self.g[0].clone(),
            self.e[0].clone(),
            self.l[0].clone(),
        );
        let t1 = j1.target3()?;
        let j2 = GrayCell::three(self.h, t1.x.clone(), t1.e(), self.l[1].clone());
        let t2 = j2.target3()?;
        let j3 = GrayCell::three(self.h, t2.x.clone(), t2.e(), self.l[2].clone());
        Ok([j1, j2, j3])
    }

    /// Three vertically composable 3-cells starting at `X`.
    fn vertical_chain(&self) -> Result<[GrayCell; 3]> {
        let j1 = GrayCell::three(
            self.h,
            self.g[0].clone(),
            self.e[0].clone(),
            self.l[0].clone(),
        );
        let j2 = GrayCell::three(
            self.h,
            j1.target2()?.x,
            self.e[1].clone(),
            self.l[1].clone(),
        );
        let j3 = GrayCell::three(
            self.h,
            j2.target2()?.x,
            self.e[2].clone(),
            self.l[2].clone(),
        );
        Ok([j1, j2, j3])
    }

    fn globular(&self) -> Result<f64> {
        let [j, _, _] = self.upward_chain()?;
        let (a, _, _) = self.two_cells()?;
        let r1 = j.target3()?.target2()?.distance(&j.target2()?);
        let r2 = j.source3()?.target2()?.distance(&j.target2()?);
        let r3 = j.source3()?.source2()?.distance(&j.source2()?);
        let r4 = j.target3()?.source2()?.distance(&j.source2()?);
        let r5 = a.source2()?.distance(&GrayCell::one(self.h, a.x().clone()));
        Ok(r1.max(r2).max(r3).max(r4).max(r5))
    }

    fn upward_associative(&self) -> Result<f64> {
        let [a, b, c] = self.upward_chain()?;
        Ok(c3(&c3(&a, &b)?, &c)?.distance(&c3(&a, &c3(&b, &c)?)?))
    }

    fn upward_identity(&self) -> Result<f64> {
        let [a, _, _] = self.upward_chain()?;
        let left = c3(&a.source3()?.identity()?, &a)?;
        let right = c3(&a, &a.target3()?.identity()?)?;
        Ok(max_dist(&[(left, a.clone()), (right, a)]))
    }

    fn upward_inverse(&self) -> Result<f64> {
        let [a, _, _] = self.upward_chain()?;
        let ai = a.inverse(3)?;
        let r1 = c3(&a, &ai)?.distance(&a.source3()?.identity()?);
        let r2 = c3(&ai, &a)?.distance(&a.target3()?.identity()?);
        Ok(r1.max(r2))
    }

    fn vertical2_associative(&self) -> Result<f64> {
        let (a, b, _) = self.two_cells()?;
        let c = GrayCell::two(self.h, b.target2()?.x, self.e[2].clone());
        Ok(c2(&c2(&a, &b)?, &c)?.distance(&c2(&a, &c2(&b, &c)?)?))
    }

    fn vertical2_identity(&self) -> Result<f64> {
        let (a, _, _) = self.two_cells()?;
        let left = c2(&a.source2()?.identity()?, &a)?;
        let right = c2(&a, &a.target2()?.identity()?)?;
        Ok(max_dist(&[(left, a.clone()), (right, a)]))
    }

    fn vertical2_inverse(&self) -> Result<f64> {
        let (a, _, _) = self.two_cells()?;
        let ai = a.inverse(2)?;
        let r1 = c2(&a, &ai)?.distance(&a.source2()?.identity()?);
        let r2 = c2(&ai, &a)?.distance(&a.target2()?.identity()?);
        Ok(r1.max(r2))
    }

    fn vertical3_associative(&self) -> Result<f64> {
        let [a, b, c] = self.vertical_chain()?;
        Ok(c2(&c2(&a, &b)?, &c)?.distance(&c2(&a, &c2(&b, &c)?)?))
    }

    fn vertical3_identity(&self) -> Result<f64> {
        let [a, _, _] = self.vertical_chain()?;
        let left = c2(&a.source2()?.identity()?.identity()?, &a)?;
        let right = c2(&a, &a.target2()?.identity()?.identity()?)?;
        Ok(max_dist(&[(left, a.clone()), (right, a)]))
    }

    fn vertical3_inverse(&self) -> Result<f64> {
        let [a, _, _] = self.vertical_chain()?;
        let ai = a.inverse(2)?;
        let r1 = c2(&a, &ai)?.distance(&a.source2()?.identity()?.identity()?);
        let r2 = c2(&ai, &a)?.distance(&a.target2()?.identity()?.identity()?);
        Ok(r1.max(r2))
    }

    fn vertical3_boundaries(&self) -> Result<f64> {
        let [a, b, _] = self.vertical_chain()?;
        let ab = c2(&a, &b)?;
        let r1 = ab.source3()?.distance(&c2(&a.source3()?, &b.source3()?)?);
        let r2 = ab.target3()?.distance(&c2(&a.target3()?, &b.target3()?)?);
        Ok(r1.max(r2))
    }

    fn upward_vertical_interchange(&self) -> Result<f64> {
        let [j, j_up, _] = self.upward_chain()?;
        let j1 = GrayCell::three(self.h, j.target2()?.x, self.e[1].clone(), self.l[2].clone());
        let t = j1.target3()?;
        let j1_up = GrayCell::three(self.h, t.x.clone(), t.e(), self.l[3].clone());
        let lhs = c2(&c3(&j, &j_up)?, &c3(&j1, &j1_up)?)?;
        let rhs = c3(&c2(&j, &j1)?, &c2(&j_up, &j1_up)?)?;
        Ok(lhs.distance(&rhs))
    }

    fn whisker_functorial(&self) -> Result<f64> {
        let z = self.one(2);
        let (a, b, _) = self.two_cells()?;
        let [j, k, _] = self.vertical_chain()?;
        let [u, v, _] = self.upward_chain()?;
        let pairs = [
            (w(&z, &c2(&a, &b)?)?, c2(&w(&z, &a)?, &w(&z, &b)?)?),
            (w(&c2(&a, &b)?, &z)?, c2(&w(&a, &z)?, &w(&b, &z)?)?),
            (w(&z, &c2(&j, &k)?)?, c2(&w(&z, &j)?, &w(&z, &k)?)?),
            (w(&c2(&j, &k)?, &z)?, c2(&w(&j, &z)?, &w(&k, &z)?)?),
            (w(&z, &c3(&u, &v)?)?, c3(&w(&z, &u)?, &w(&z, &v)?)?),
            (w(&c3(&u, &v)?, &z)?, c3(&w(&u, &z)?, &w(&v, &z)?)?),
            (w(&z, &a.identity()?)?, w(&z, &a)?.identity()?),
            (
                w(&z, &a.source2()?.identity()?)?,
                w(&z, &a.source2()?)?.identity()?,
            ),
            (w(&a.identity()?, &z)?, w(&a, &z)?.identity()?),
        ];
        Ok(max_dist(&pairs))
    }

    fn one_cell_associative(&self) -> Result<f64> {
        let (x, y, z) = (self.one(0), self.one(1), self.one(2));
        let id = GrayCell::one(self.h, self.hm().g().identity());
        let pairs = [
            (w(&w(&x, &y)?, &z)?, w(&x, &w(&y, &z)?)?),
            (w(&id, &x)?, x.clone()),
            (w(&x, &id)?, x.clone()),
            (w(&x, &x.inverse(1)?)?, id),
        ];
        Ok(max_dist(&pairs))
    }

    fn whisker_composition(&self) -> Result<f64> {
        let (y, z) = (self.one(1), self.one(2));
        let id = GrayCell::one(self.h, self.hm().g().identity());
        let (a, _, _) = self.two_cells()?;
        let [j, _, _] = self.vertical_chain()?;
        let mut pairs = Vec::new();
        for c in [&a, &j] {
            pairs.push((w(&w(c, &y)?, &z)?, w(c, &w(&y, &z)?)?));
            pairs.push((w(&z, &w(&y, c)?)?, w(&w(&z, &y)?, c)?));
            pairs.push((w(&w(&z, c)?, &y)?, w(&z, &w(c, &y)?)?));
            pairs.push((w(&id, c)?, c.clone()));
            pairs.push((w(c, &id)?, c.clone()));
        }
        Ok(max_dist(&pairs))
    }

    fn horizontal_associative(&self) -> Result<f64> {
        let (a, _, c) = self.two_cells()?;
        let d = GrayCell::two(self.h, self.g[2].clone(), self.e[1].clone());
        let [j, _, _] = self.vertical_chain()?;
        let k = GrayCell::three(
            self.h,
            self.g[1].clone(),
            self.e[2].clone(),
            self.l[3].clone(),
        );
        let pairs = [
            (
                horizontal_lower(&horizontal_lower(&a, &c)?, &d)?,
                horizontal_lower(&a, &horizontal_lower(&c, &d)?)?,
            ),
            (
                horizontal_upper(&horizontal_upper(&a, &c)?, &d)?,
                horizontal_upper(&a, &horizontal_upper(&c, &d)?)?,
            ),
            (
                horizontal_lower(&horizontal_lower(&j, &k)?, &d)?,
                horizontal_lower(&j, &horizontal_lower(&k, &d)?)?,
            ),
            (
                horizontal_upper(&horizontal_upper(&j, &k)?, &d)?,
                horizontal_upper(&j, &horizontal_upper(&k, &d)?)?,
            ),
        ];
        Ok(max_dist(&pairs))
    }

    /// Both horizontal composites respect upward composition and identities.
    fn horizontal_functorial(&self) -> Result<f64> {
        let [j, j_up, _] = self.upward_chain()?;
        let k = GrayCell::three(
            self.h,
            self.g[1].clone(),
            self.e[1].clone(),
            self.l[2].clone(),
        );
        let t = k.target3()?;
        let k_up = GrayCell::three(self.h, t.x.clone(), t.e(), self.l[3].clone());
        let mut r = 0.0f64;
        for hc in [horizontal_lower, horizontal_upper] {
            let lhs = hc(&c3(&j, &j_up)?, &c3(&k, &k_up)?)?;
            let rhs = c3(&hc(&j, &k)?, &hc(&j_up, &k_up)?)?;
            r = r.max(lhs.distance(&rhs));
            let id = hc(&j.source3()?.identity()?, &k.source3()?.identity()?)?;
            r = r.max(id.distance(&hc(&j.source3()?, &k.source3()?)?.identity()?));
        }
        Ok(r)
    }

    fn interchange_boundaries(&self) -> Result<f64> {
        let (a, _, c) = self.two_cells()?;
        let hash = (self.hash)(&a, &c)?;
        let r1 = hash.source3()?.distance(&horizontal_lower(&a, &c)?);
        let r2 = hash.target3()?.distance(&horizontal_upper(&a, &c)?);
        Ok(r1.max(r2))
    }

    fn interchange_identities(&self) -> Result<f64> {
        let (a, _, c) = self.two_cells()?;
        let ida = a.source2()?.identity()?;
        let idc = c.source2()?.identity()?;
        let lid = self.hm().l().identity();
        let r1 = dist(&(self.hash)(&ida, &c)?.l(), &lid);
        let r2 = dist(&(self.hash)(&a, &idc)?.l(), &lid);
        Ok(r1.max(r2))
    }

    fn interchange_whiskering(&self) -> Result<f64> {
        let z = self.one(2);
        let (a, _, c) = self.two_cells()?;
        let hash = self.hash;
        let pairs = [
            (hash(&w(&z, &a)?, &c)?, w(&z, &hash(&a, &c)?)?),
            (hash(&a, &w(&c, &z)?)?, w(&hash(&a, &c)?, &z)?),
            (hash(&w(&a, &z)?, &c)?, hash(&a, &w(&z, &c)?)?),
        ];
        Ok(max_dist(&pairs))
    }

    /// Naturality of the interchange cell in both 2-cell arguments.
    fn two_functoriality(&self) -> Result<f64> {
        let j = GrayCell::three(
            self.h,
            self.g[0].clone(),
            self.e[0].clone(),
            self.l[0].clone(),
        );
        let k = GrayCell::three(
            self.h,
            self.g[1].clone(),
            self.e[1].clone(),
            self.l[1].clone(),
        );
        let hash = self.hash;
        let mut r = 0.0f64;
        // General pair, then with either side an identity 3-cell.
        let cases = [
            (j.clone(), k.clone()),
            (j.source3()?.identity()?, k.clone()),
            (j.clone(), k.source3()?.identity()?),
        ];
        for (j, k) in cases {
            let lhs = c3(
                &hash(&j.source3()?, &k.source3()?)?,
                &horizontal_upper(&j, &k)?,
            )?;
            let rhs = c3(
                &horizontal_lower(&j, &k)?,
                &hash(&j.target3()?, &k.target3()?)?,
            )?;
            r = r.max(lhs.distance(&rhs));
        }
        Ok(r)
    }

    fn one_functoriality(&self) -> Result<f64> {
        let (g1, g2, g3) = self.two_cells()?;
        let hash = self.hash;
        let step1 = c2(&w(&g1, &g3.source2()?)?.identity()?, &hash(&g2, &g3)?)?;
        let step2 = c2(&hash(&g1, &g3)?, &w(&g2, &g3.target2()?)?.identity()?)?;
        let lhs = c3(&step1, &step2)?;
        let rhs = hash(&c2(&g1, &g2)?, &g3)?;
        Ok(lhs.distance(&rhs))
    }

    fn one_functoriality_mirrored(&self) -> Result<f64> {
        let (g1, g2, g3) = self.two_cells()?;
        let hash = self.hash;
        let step1 = c2(&hash(&g3, &g1)?, &w(&g3.target2()?, &g2)?.identity()?)?;
        let step2 = c2(&w(&g3.source2()?, &g1)?.identity()?, &hash(&g3, &g2)?)?;
        let lhs = c3(&step1, &step2)?;
        let rhs = hash(&g3, &c2(&g1, &g2)?)?;
        Ok(lhs.distance(&rhs))
    }
}
