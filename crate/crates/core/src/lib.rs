//! Summation of divergent Stieltjes-type series by finite-part integration.
//!
//! The pipeline runs in four stages:
//!
//! 1. [`moments`]: perturbation coefficients of a physical system, mapped to
//!    the positive moments of a Stieltjes density;
//! 2. [`reconstruction`]: the density `x^{-ν} g(x)` with `g` expanded in
//!    Laguerre functions, fixed by the moments;
//! 3. [`finite_part`]: Hadamard finite parts of the divergent negative-power
//!    moments of that density;
//! 4. [`summation`]: the convergent large-coupling expansion of the Stieltjes
//!    integral, plus the residue term that carries the strong-coupling power.
//!
//! [`pade`] provides the classical rational approximants for comparison and
//! [`quadrature`] a double-exponential integrator used to cross-check the
//! expansions against direct integration. [`validation`] holds the
//! published reference values and the acceptance checks.

pub mod error;
pub mod finite_part;
pub mod moments;
pub mod numeric;
pub mod pade;
pub mod quadrature;
pub mod reconstruction;
pub mod summation;
pub mod validation;

pub use error::{Error, Result};
