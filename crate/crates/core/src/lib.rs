//! Complex-time heat kernels of fractional Schrödinger operators
//! H = (-Δ)^{α/2} + V, sector interpolation of polynomial bounds, and dyadic
//! Davies–Gaffney estimates measured on grid kernels.

pub mod complex_time;
pub mod dg;
pub mod error;
pub mod kernel;
pub mod operator;
pub mod pl;
pub mod stats;
pub mod verify;

pub use complex_time::ComplexTime;
pub use error::{LabError, Result};
