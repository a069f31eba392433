//! Built-in 2-crossed modules.

mod adjoint;
mod automorphism;
mod chain;

pub use adjoint::{make_adjoint, AdjointAlgebra, AdjointInstance};
pub use automorphism::{make_automorphism, AutomorphismInstance, CrossedModuleData};
pub use chain::{make_chain_complex, random_boundaries, ChainAlgebra, ChainComplexInstance};
