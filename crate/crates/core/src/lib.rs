//! Computational higher gauge theory: Lie 2-crossed modules, the Gray
//! 3-groupoid they define, polynomial connection triples and their 1-, 2-
//! and 3-dimensional holonomies.

pub mod algebra;
pub mod error;
pub mod fields;
pub mod gray;
pub mod holonomy;
pub mod instances;
pub mod linalg;

pub use algebra::{
    check_differential_axioms, check_two_crossed_axioms, AxiomEntry, AxiomReport,
    DifferentialTwoCrossedModule, GroupSpec, LieTwoCrossedModule, TwoCrossedModule,
};
pub use error::{Error, Result};
pub use fields::{Cube, CubeMap, FormField, FormTriple};
pub use gray::{
    compose, horizontal_lower, horizontal_upper, interchange_cell, verify_gray_axioms,
    verify_gray_axioms_with, GrayCell, Module,
};
pub use linalg::Mat;
