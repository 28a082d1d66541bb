use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

use super::real::BigReal;

/// Smallest working precision accepted by the pipeline.
pub const MIN_DECIMAL_DIGITS: u32 = 30;
/// Extra digits carried internally on top of the requested precision.
pub const DEFAULT_GUARD_DIGITS: u32 = 20;

const LOG2_10: f64 = std::f64::consts::LOG2_10;

/// Working precision for every arbitrary-precision computation.
///
/// Precision is never ambient: every constructor of a [`BigReal`] takes a
/// context, and results inherit the larger precision of their operands.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct PrecisionContext {
    decimal_digits: u32,
    guard_digits: u32,
}

impl PrecisionContext {
    pub fn new(decimal_digits: u32) -> Result<Self> {
        Self::with_guard(decimal_digits, DEFAULT_GUARD_DIGITS)
    }

    pub fn with_guard(decimal_digits: u32, guard_digits: u32) -> Result<Self> {
        if decimal_digits < MIN_DECIMAL_DIGITS {
            return Err(Error::Domain {
                op: "precision",
                detail: format!("decimal_digits = {decimal_digits} < {MIN_DECIMAL_DIGITS}"),
            });
        }
        if guard_digits == 0 {
            return Err(Error::Domain {
                op: "precision",
                detail: "guard_digits must be positive".into(),
            });
        }
        Ok(PrecisionContext {
            decimal_digits,
            guard_digits,
        })
    }

    pub fn decimal_digits(&self) -> u32 {
        self.decimal_digits
    }

    pub fn guard_digits(&self) -> u32 {
        self.guard_digits
    }

    /// Binary precision of the underlying floats.
    pub fn bits(&self) -> u32 {
        ((self.decimal_digits + self.guard_digits) as f64 * LOG2_10).ceil() as u32 + 8
    }

    /// Same guard, more digits.
    pub fn widened(&self, extra_digits: u32) -> Self {
        PrecisionContext {
            decimal_digits: self.decimal_digits + extra_digits,
            guard_digits: self.guard_digits,
        }
    }

    /// `10^{-decimal_digits}`.
    pub fn epsilon(&self) -> BigReal {
        BigReal::from_i64(10, *self).powi(-(self.decimal_digits as i32))
    }

    pub fn zero(&self) -> BigReal {
        BigReal::zero(*self)
    }

    pub fn one(&self) -> BigReal {
        BigReal::one(*self)
    }

    pub fn int(&self, v: i64) -> BigReal {
        BigReal::from_i64(v, *self)
    }

    pub fn pi(&self) -> BigReal {
        BigReal::pi(*self)
    }
}

/// Digits needed for a density with highest Laguerre index `d`.
///
/// The moments grow factorially and the Laguerre system is ill-conditioned,
/// so the working precision has to grow linearly with `d`.
pub fn recommended_digits(d: usize) -> u32 {
    (1.6 * d as f64).ceil().max(100.0) as u32
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_low_precision() {
        assert!(PrecisionContext::new(29).is_err());
        assert!(PrecisionContext::with_guard(40, 0).is_err());
        let ctx = PrecisionContext::new(30).unwrap();
        assert_eq!(ctx.guard_digits(), DEFAULT_GUARD_DIGITS);
        assert!(ctx.bits() >= 166);
    }

    #[test]
    fn recommended_digits_heuristic() {
        assert_eq!(recommended_digits(10), 100);
        assert_eq!(recommended_digits(100), 160);
        assert_eq!(recommended_digits(2000), 3200);
    }
}
