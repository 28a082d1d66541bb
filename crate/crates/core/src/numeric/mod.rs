//! Arbitrary-precision scalars, special functions and the dense LU solver.

pub mod complex;
pub mod linalg;
pub mod precision;
pub mod rational;
pub mod real;
pub mod special;

pub use complex::BigComplex;
pub use linalg::{lu_solve, relative_residual, LuFactorization, Matrix, Vector};
pub use precision::{recommended_digits, PrecisionContext, DEFAULT_GUARD_DIGITS};
pub use rational::BigRational;
pub use real::BigReal;
pub use special::{cos_pi_rational, gamma, pow_rational, sin_pi_rational, GammaLadder};
