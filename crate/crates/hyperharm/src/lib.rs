//! Harmonic vector fields on the hyperbolic plane, holomorphic quadratic
//! differentials, boundary analysis on the circle and the cohomology of a
//! cocompact Fuchsian group with Killing coefficients.

pub mod circle;
pub mod error;
pub mod fuchsian;
pub mod harmonic;
pub mod io;
pub mod moebius;
pub mod par;
pub mod qdiff;
pub mod quadrature;
pub mod verify;

pub use error::{Error, Result};
pub use num_complex::Complex64 as C64;

pub(crate) const I: C64 = C64::new(0.0, 1.0);
