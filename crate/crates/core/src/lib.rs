//! Two-dimensional TE scattering from finite dielectric objects.
//!
//! The contrast source `χE` is expanded in a Gabor frame along `x` and in
//! triangle functions along `z`. The Green function is split with the Ewald
//! method and every coupling integral is reduced to a one-dimensional
//! integral along a complex path, tabulated once per frame geometry.

pub mod cli;
pub mod error;
pub mod frame;
pub mod green;
pub mod kernels;
pub mod operator;
pub mod oracle;
pub mod quad;
pub mod scene;
pub mod solver;
pub mod special;
pub mod tables;

pub use error::{Error, Result};
pub use num_complex::Complex64;
