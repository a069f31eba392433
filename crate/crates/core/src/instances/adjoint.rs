//! `G -> G x| G -> G` with the adjoint action.
//!
//! A pair `(a, b)` of the semidirect product is stored as the block
//! diagonal matrix `diag(ab, b)`. The map `(a, b) -> (ab, b)` is an
//! isomorphism onto `G x G`, so the group law becomes the ordinary matrix
//! product and every structure map stays closed-form.

use std::sync::Arc;

use crate::algebra::{
    DifferentialTwoCrossedModule, GroupSpec, LieTwoCrossedModule, TwoCrossedModule,
};
use crate::error::Result;
use crate::linalg::{self, block, block_diag, commutator, Mat};

pub struct AdjointInstance {
    n: usize,
    g: GroupSpec,
    e: GroupSpec,
    algebra: AdjointAlgebra,
}

pub struct AdjointAlgebra {
    n: usize,
    basis_g: Vec<Mat>,
    basis_e: Vec<Mat>,
}

pub fn make_adjoint(base: GroupSpec) -> Result<Arc<AdjointInstance>> {
    let n = base.dim();
    let basis_e: Vec<Mat> = base
        .basis()
        .iter()
        .map(|x| block_diag(x, &linalg::zeros(n, n)))
        .chain(
            base.basis()
                .iter()
                .map(|x| block_diag(&linalg::zeros(n, n), x)),
        )
        .collect();
    let base_for_e = base.clone();
    let e = GroupSpec::new(
        format!("{} x| {}", base.name(), base.name()),
        2 * n,
        basis_e.clone(),
        move |m: &Mat| {
            let off = block(m, 0, n, n, n).norm() + block(m, n, 0, n, n).norm();
            let p = block(m, 0, 0, n, n);
            let q = block(m, n, n, n, n);
            off.max(base_for_e.residual(&p))
                .max(base_for_e.residual(&q))
        },
    )?;
    let algebra = AdjointAlgebra {
        n,
        basis_g: base.basis().to_vec(),
        basis_e,
    };
    Ok(Arc::new(AdjointInstance {
        n,
        g: base,
        e,
        algebra,
    }))
}

impl AdjointInstance {
    pub fn base(&self) -> &GroupSpec {
        &self.g
    }

    /// Representation of the pair `(a, b)`.
    pub fn pair(&self, a: &Mat, b: &Mat) -> Mat {
        block_diag(&(a * b), b)
    }

    /// Recovers `(a, b)` from its representation.
    pub fn unpair(&self, e: &Mat) -> Result<(Mat, Mat)> {
        let n = self.n;
        let p = block(e, 0, 0, n, n);
        let q = block(e, n, n, n, n);
        let a = &p * linalg::inverse(&q)?;
        Ok((a, q))
    }

    /// Representation of the algebra pair `(u1, u2)`.
    pub fn pair_alg(&self, u1: &Mat, u2: &Mat) -> Mat {
        block_diag(&(u1 + u2), u2)
    }

    pub fn unpair_alg(&self, u: &Mat) -> (Mat, Mat) {
        let n = self.n;
        let p = block(u, 0, 0, n, n);
        let q = block(u, n, n, n, n);
        (p - &q, q)
    }

    fn lift_g(&self, g: &Mat) -> Mat {
        block_diag(g, g)
    }
}

impl TwoCrossedModule for AdjointInstance {
    fn name(&self) -> String {
        format!("adjoint[{}]", self.g.name())
    }
    fn g(&self) -> &GroupSpec {
        &self.g
    }
    fn e(&self) -> &GroupSpec {
        &self.e
    }
    fn l(&self) -> &GroupSpec {
        &self.g
    }

    // delta(g) = (g^-1, g), stored as diag(1, g).
    fn delta(&self, l: &Mat) -> Mat {
        block_diag(&linalg::identity(self.n), l)
    }

    // d(a, b) = ab
    fn partial(&self, e: &Mat) -> Mat {
        block(e, 0, 0, self.n, self.n)
    }

    fn act_e(&self, g: &Mat, e: &Mat) -> Result<Mat> {
        Ok(self.lift_g(g) * e * self.lift_g(&linalg::inverse(g)?))
    }

    fn act_l(&self, g: &Mat, l: &Mat) -> Result<Mat> {
        Ok(g * l * linalg::inverse(g)?)
    }

    // {(a,b),(c,d)} = [b d b^-1, a]
    fn lifting(&self, e: &Mat, f: &Mat) -> Result<Mat> {
        let (a, b) = self.unpair(e)?;
        let d = block(f, self.n, self.n, self.n, self.n);
        let x = &b * d * linalg::inverse(&b)?;
        let xi = linalg::inverse(&x)?;
        let ai = linalg::inverse(&a)?;
        Ok(&x * &a * xi * ai)
    }

    // (a,b) |>' g = b g b^-1
    fn derived_action(&self, e: &Mat, l: &Mat) -> Result<Mat> {
        let b = block(e, self.n, self.n, self.n, self.n);
        Ok(&b * l * linalg::inverse(&b)?)
    }
}

impl LieTwoCrossedModule for AdjointInstance {
    fn algebra(&self) -> &dyn DifferentialTwoCrossedModule {
        &self.algebra
    }
    fn act_e_alg(&self, g: &Mat, u: &Mat) -> Result<Mat> {
        self.act_e(g, u)
    }
    fn act_l_alg(&self, g: &Mat, x: &Mat) -> Result<Mat> {
        self.act_l(g, x)
    }
    fn derived_action_alg(&self, e: &Mat, x: &Mat) -> Result<Mat> {
        self.derived_action(e, x)
    }
}

impl AdjointAlgebra {
    fn second(&self, u: &Mat) -> Mat {
        block(u, self.n, self.n, self.n, self.n)
    }
    fn first(&self, u: &Mat) -> Mat {
        block(u, 0, 0, self.n, self.n) - self.second(u)
    }
}

impl DifferentialTwoCrossedModule for AdjointAlgebra {
    fn name(&self) -> String {
        "adjoint (differential)".into()
    }
    fn basis_g(&self) -> &[Mat] {
        &self.basis_g
    }
    fn basis_e(&self) -> &[Mat] {
        &self.basis_e
    }
    fn basis_l(&self) -> &[Mat] {
        &self.basis_g
    }
    fn shapes(&self) -> [(usize, usize); 3] {
        let n = self.n;
        [(n, n), (2 * n, 2 * n), (n, n)]
    }
    fn bracket_g(&self, x: &Mat, y: &Mat) -> Mat {
        commutator(x, y)
    }
    fn bracket_e(&self, u: &Mat, v: &Mat) -> Mat {
        commutator(u, v)
    }
    fn bracket_l(&self, x: &Mat, y: &Mat) -> Mat {
        commutator(x, y)
    }
    // delta(x) = (-x, x)
    fn delta(&self, x: &Mat) -> Mat {
        block_diag(&linalg::zeros(self.n, self.n), x)
    }
    // d(u1, u2) = u1 + u2
    fn partial(&self, u: &Mat) -> Mat {
        block(u, 0, 0, self.n, self.n)
    }
    fn act_e(&self, a: &Mat, u: &Mat) -> Mat {
        commutator(&block_diag(a, a), u)
    }
    fn act_l(&self, a: &Mat, x: &Mat) -> Mat {
        commutator(a, x)
    }
    // {(u1,u2),(v1,v2)} = [v2, u1]
    fn lifting(&self, u: &Mat, v: &Mat) -> Mat {
        commutator(&self.second(v), &self.first(u))
    }
}
