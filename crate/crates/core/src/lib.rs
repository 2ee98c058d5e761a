//! Spline finite elements built by mollifying per-cell polynomials.
//!
//! Smooth, locally supported spline bases are built by convolving per-cell
//! polynomials of a polygonal partition with a B-spline. All geometry and
//! polynomial algebra is exact (rational); floating point appears only when
//! evaluating, assembling or solving.

pub mod boxspline;
pub mod error;
pub mod fem;
pub mod geometry;
pub mod linalg;
pub mod mollify;
pub mod polynomial;
pub mod quadrature;
pub mod rational;
pub mod splinespace;

pub use error::{Error, Result};
