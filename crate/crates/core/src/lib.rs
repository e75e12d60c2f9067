//! Krylov subspace approximation of `w(τ) = e^{-τA} v` with certified error
//! estimates.
//!
//! The crate is `no_std` (it needs `alloc`). It provides
//!
//! * [`elliptic`]: complete elliptic integrals and Jacobi `sn`, `cn`, `dn`,
//! * [`conformal`]: the map from the exterior of the field-of-values rectangle
//!   `[a,b]×[−c,c]` onto the exterior of the unit disk,
//! * [`krylov`]: Arnoldi/Lanczos reductions and the projected exponential,
//! * [`bounds`]: the a posteriori estimator, a priori bounds for
//!   non-Hermitian and skew-Hermitian operators, and the classical
//!   reference bounds,
//! * [`problems`]: reproducible test operators with exact reference solutions.

#![no_std]

extern crate alloc;

pub mod bounds;
pub mod conformal;
pub mod dense;
pub mod elliptic;
mod error;
pub mod krylov;
pub mod operator;
pub mod problems;
pub mod quad;

pub use error::{Error, Result};

pub type C64 = num_complex::Complex64;
