//! Numerical tools for graphs of prescribed negative Gauss curvature.

pub mod convergence;
pub mod error;
pub mod fd;
pub mod field;
pub mod foliation;
pub mod geometry;
pub mod grid;
pub mod instability;
pub mod io;
pub mod linalg;
pub mod linear;
pub mod localization;
pub mod nonlinear;
pub mod scalar;
pub mod scenario;
pub mod surface;

pub use error::{Error, Result};
pub use field::{ScalarField, SymmetricMatrixField, VectorField};
pub use geometry::{Signature, Tolerances};
pub use grid::GridSpec;
pub use scalar::Real;
pub use surface::{Bump, Catalog, DerivativeMode, GraphSurface};

pub type Grid64 = GridSpec<f64>;
pub type ScalarField64 = ScalarField<f64>;
pub type VectorField64 = VectorField<f64>;
pub type MatrixField64 = SymmetricMatrixField<f64>;
pub type Surface64 = GraphSurface<f64>;
pub type Grid32 = GridSpec<f32>;
pub type ScalarField32 = ScalarField<f32>;
pub type Surface32 = GraphSurface<f32>;
