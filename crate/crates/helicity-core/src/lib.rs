//! Pseudospectral calculus on the flat 3-torus for helicity decompositions of
//! Maxwell fields and their non-abelian generalization: variational
//! half-space extensions of su(2) connections, the Poisson action and its
//! derivatives, duality diagnostics, h-fields and their flows, and a
//! localized self-dual reference solution with exact derivatives.

pub mod abelian;
pub mod error;
pub mod field;
pub mod grid;
pub mod halfspace;
pub mod helicity;
pub mod instanton;
pub mod io;
pub mod jet;
pub mod lbfgs;
pub mod lie;
pub mod maxwell;
pub mod sgrid;
pub mod su2;
pub mod synth;
pub mod ym;

pub use error::{Error, Result};
pub use grid::TorusGrid;
