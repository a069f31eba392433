//! Holonomy along paths, surfaces and volumes, and the identities tying
//! the three levels together.

mod engine;
mod study;
mod theorems;
mod wilson;

pub use engine::{
    cumulative_simpson, path_holonomy, rk4_sampled, rk4_step, simpson, surface_holonomy,
    twisted_integral_mm, twisted_integral_theta, volume_holonomy, volume_holonomy_factors,
    HolonomyResult, Resolution, SliceData, SliceIntegrator, SurfaceRun, VolumeRun,
};
pub use study::{
    convergence, fitted_order, functor_laws, invariance_suite, ConvergenceFamily, ConvergenceStudy,
    FunctorReport, InvarianceReport,
};
pub use theorems::{
    baez_schreiber_residual, green, interchange, interchange_factor_study, interchange_factors,
    stokes, FactorScan, GreenReport, InterchangeReport, StokesReport,
};
pub use wilson::{boundary_spread, rotation_path, wilson_sphere, WilsonOptions, WilsonReport};

use serde::Serializer;

use crate::linalg::{self, Mat};

/// Serializes a matrix as a list of rows.
pub fn ser_mat<S: Serializer>(m: &Mat, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.collect_seq(linalg::to_rows(m))
}
