//! Polynomial differential forms, parametrized cubes and connection triples.

pub mod cube;
pub mod form;
pub mod thin;
pub mod triple;

pub use cube::{Cube, CubeMap, Jet, Smoothing};
pub use form::{exterior_derivative, wedge, FormField};
pub use thin::{thin_perturbations, ThinKind};
pub use triple::{curvature, three_curvature, two_curvature, FormTriple};
