//! Bounded solutions of `div u = f` on uniform grids.

pub mod error;
pub mod examples;
pub mod explicit;
pub mod field;
pub mod grid;
pub mod io;
pub mod norms;
pub mod ops;
pub mod sum;
pub mod variational;

pub use error::{Error, Result};
pub use field::{mean_zero, sample_function, RegionMask, ScalarField, VectorField};
pub use grid::Grid;
