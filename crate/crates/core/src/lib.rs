//! Numerical laboratory for interpolation of finite-dimensional Banach couples.
//!
//! Spaces are concrete norms on `C^n` ([`spaces`]); analytic families live on the
//! annulus `1 < |z| < e` ([`annulus`]); the interpolation constructions are in
//! [`functors`]; operators between couples and their compactness quantities are in
//! [`operators`]; [`verify`] binds everything into seeded, reproducible experiments.

pub mod annulus;
pub mod bracket;
pub mod error;
pub mod functors;
pub mod operators;
pub mod optim;
pub mod seeds;
pub mod spaces;
pub mod verify;

pub use num_complex::Complex64 as C64;

pub use bracket::{NormBracket, SolverTag, Witness};
pub use error::{Error, Result};
