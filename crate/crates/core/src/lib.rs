//! Numerical workbench for fixed-frequency inverse scattering in the plane.

pub mod borninv;
pub mod csv;
pub mod error;
pub mod forward;
pub mod linalg;
pub mod nearboundary;
pub mod nearfield;
pub mod numerics;
pub mod specfun;
pub mod verify;

pub use error::{Error, Result};
pub use num_complex::Complex64;
