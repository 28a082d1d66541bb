use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, AddAssign, Div, Mul, MulAssign, Neg, Sub, SubAssign};

use rug::float::Constant;
use rug::ops::Pow;
use rug::Float;

use crate::error::{Error, Result};

use super::precision::PrecisionContext;
use super::rational::BigRational;

/// Arbitrary-precision real number backed by an MPFR float.
///
/// The binary precision travels with the value; binary operations produce a
/// result at the larger precision of the two operands.
#[derive(Clone, PartialEq, PartialOrd)]
pub struct BigReal(pub(crate) Float);

impl BigReal {
    pub fn zero(ctx: PrecisionContext) -> Self {
        BigReal(Float::new(ctx.bits()))
    }

    pub fn one(ctx: PrecisionContext) -> Self {
        Self::from_i64(1, ctx)
    }

    pub fn from_i64(v: i64, ctx: PrecisionContext) -> Self {
        BigReal(Float::with_val(ctx.bits(), v))
    }

    pub fn from_u64(v: u64, ctx: PrecisionContext) -> Self {
        BigReal(Float::with_val(ctx.bits(), v))
    }

    /// Exact binary value of an `f64`, rounded to the context.
    pub fn from_f64(v: f64, ctx: PrecisionContext) -> Self {
        BigReal(Float::with_val(ctx.bits(), v))
    }

    pub fn from_rational(q: &BigRational, ctx: PrecisionContext) -> Self {
        BigReal(Float::with_val(ctx.bits(), q.as_rug()))
    }

    pub fn pi(ctx: PrecisionContext) -> Self {
        BigReal(Float::with_val(ctx.bits(), Constant::Pi))
    }

    /// Parses a decimal string such as `-1.25e-3` at full context precision.
    pub fn parse(s: &str, ctx: PrecisionContext) -> Result<Self> {
        let t = s.trim();
        let parsed = Float::parse(t).map_err(|e| Error::Parse {
            op: "parse_real",
            detail: format!("{t:?}: {e}"),
        })?;
        let v = Float::with_val(ctx.bits(), parsed);
        if !v.is_finite() {
            return Err(Error::Parse {
                op: "parse_real",
                detail: format!("{t:?} is not finite"),
            });
        }
        Ok(BigReal(v))
    }

    /// Binary precision carried by this value.
    pub fn prec(&self) -> u32 {
        self.0.prec()
    }

    /// Re-rounds to another context.
    pub fn to_ctx(&self, ctx: PrecisionContext) -> Self {
        BigReal(Float::with_val(ctx.bits(), &self.0))
    }

    pub fn as_float(&self) -> &Float {
        &self.0
    }

    pub fn into_float(self) -> Float {
        self.0
    }

    pub fn from_float(f: Float) -> Self {
        BigReal(f)
    }

    pub fn to_f64(&self) -> f64 {
        self.0.to_f64()
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_zero()
    }

    pub fn is_finite(&self) -> bool {
        self.0.is_finite()
    }

    pub fn is_negative(&self) -> bool {
        self.0.is_sign_negative() && !self.0.is_zero()
    }

    pub fn is_positive(&self) -> bool {
        self.0.is_sign_positive() && !self.0.is_zero()
    }

    pub fn ensure_finite(self, op: &'static str) -> Result<Self> {
        if self.0.is_finite() {
            Ok(self)
        } else {
            Err(Error::Domain {
                op,
                detail: format!("non-finite result {}", self.0),
            })
        }
    }

    pub fn abs(&self) -> Self {
        BigReal(Float::with_val(self.prec(), self.0.abs_ref()))
    }

    pub fn sqrt(&self) -> Self {
        BigReal(Float::with_val(self.prec(), self.0.sqrt_ref()))
    }

    pub fn exp(&self) -> Self {
        BigReal(Float::with_val(self.prec(), self.0.exp_ref()))
    }

    pub fn ln(&self) -> Self {
        BigReal(Float::with_val(self.prec(), self.0.ln_ref()))
    }

    pub fn sin(&self) -> Self {
        BigReal(Float::with_val(self.prec(), self.0.sin_ref()))
    }

    pub fn cos(&self) -> Self {
        BigReal(Float::with_val(self.prec(), self.0.cos_ref()))
    }

    pub fn sinh(&self) -> Self {
        BigReal(Float::with_val(self.prec(), self.0.sinh_ref()))
    }

    pub fn cosh(&self) -> Self {
        BigReal(Float::with_val(self.prec(), self.0.cosh_ref()))
    }

    pub fn recip(&self) -> Self {
        BigReal(Float::with_val(self.prec(), self.0.recip_ref()))
    }

    pub fn powi(&self, n: i32) -> Self {
        BigReal(Float::with_val(self.prec(), (&self.0).pow(n)))
    }

    /// `self^e` for `self > 0`.
    pub fn pow(&self, e: &BigReal) -> Self {
        let prec = self.prec().max(e.prec());
        BigReal(Float::with_val(prec, (&self.0).pow(&e.0)))
    }

    pub fn mul_i64(&self, k: i64) -> Self {
        BigReal(Float::with_val(self.prec(), &self.0 * k))
    }

    pub fn div_i64(&self, k: i64) -> Self {
        BigReal(Float::with_val(self.prec(), &self.0 / k))
    }

    /// `|self|` compared with `|other|`.
    pub fn cmp_abs(&self, other: &BigReal) -> Ordering {
        self.0.cmp_abs(&other.0).unwrap_or(Ordering::Equal)
    }

    pub fn max_abs<'a>(values: impl IntoIterator<Item = &'a BigReal>) -> Option<BigReal> {
        values
            .into_iter()
            .max_by(|a, b| a.cmp_abs(b))
            .map(|v| v.abs())
    }

    /// `log10 |self|` as an `f64`, valid far outside the `f64` exponent range.
    /// Returns `-inf` for zero.
    pub fn log10_abs(&self) -> f64 {
        if self.0.is_zero() {
            return f64::NEG_INFINITY;
        }
        let (m, e) = self.0.to_f64_exp();
        m.abs().log10() + e as f64 * std::f64::consts::LOG10_2
    }

    /// Decimal representation that parses back to the identical value.
    pub fn to_decimal_string(&self) -> String {
        format_sci(&self.0, None)
    }

    /// Decimal representation rounded to `digits` significant digits.
    pub fn to_sig_string(&self, digits: usize) -> String {
        format_sci(&self.0, Some(digits.max(1)))
    }

    /// Shortest decimal string that agrees with the value to `digits`
    /// significant digits: trailing zeros are dropped, plain notation is used
    /// for moderate exponents.
    pub fn to_short_string(&self, digits: usize) -> String {
        if !self.0.is_normal() {
            return format_sci(&self.0, None);
        }
        let (neg, mut mant, exp) = self.0.to_sign_string_exp(10, Some(digits.max(1)));
        let exp = exp.unwrap_or(0);
        while mant.len() > 1 && mant.ends_with('0') {
            mant.pop();
        }
        let sign = if neg { "-" } else { "" };
        if (-5..=21).contains(&exp) {
            let body = if exp <= 0 {
                format!("0.{}{}", "0".repeat((-exp) as usize), mant)
            } else if (exp as usize) >= mant.len() {
                format!("{}{}", mant, "0".repeat(exp as usize - mant.len()))
            } else {
                let (a, b) = mant.split_at(exp as usize);
                format!("{a}.{b}")
            };
            format!("{sign}{body}")
        } else {
            let (a, b) = mant.split_at(1);
            if b.is_empty() {
                format!("{sign}{a}e{}", exp - 1)
            } else {
                format!("{sign}{a}.{b}e{}", exp - 1)
            }
        }
    }
}

fn format_sci(f: &Float, digits: Option<usize>) -> String {
    if f.is_zero() {
        return if f.is_sign_negative() { "-0".into() } else { "0".into() };
    }
    if !f.is_finite() {
        return f.to_string();
    }
    let (neg, mant, exp) = f.to_sign_string_exp(10, digits);
    let exp = exp.unwrap_or(0) - 1;
    let (a, b) = mant.split_at(1);
    let sign = if neg { "-" } else { "" };
    if b.is_empty() {
        format!("{sign}{a}e{exp}")
    } else {
        format!("{sign}{a}.{b}e{exp}")
    }
}

impl fmt::Debug for BigReal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "BigReal({})", self.to_sig_string(30))
    }
}

impl fmt::Display for BigReal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match f.precision() {
            Some(p) => f.write_str(&self.to_sig_string(p)),
            None => f.write_str(&self.to_decimal_string()),
        }
    }
}

macro_rules! bin_op {
    ($tr:ident, $method:ident, $op:tt) => {
        impl<'a, 'b> $tr<&'b BigReal> for &'a BigReal {
            type Output = BigReal;
            fn $method(self, rhs: &'b BigReal) -> BigReal {
                let prec = self.0.prec().max(rhs.0.prec());
                BigReal(Float::with_val(prec, &self.0 $op &rhs.0))
            }
        }
        impl<'b> $tr<&'b BigReal> for BigReal {
            type Output = BigReal;
            fn $method(self, rhs: &'b BigReal) -> BigReal {
                (&self).$method(rhs)
            }
        }
        impl<'a> $tr<BigReal> for &'a BigReal {
            type Output = BigReal;
            fn $method(self, rhs: BigReal) -> BigReal {
                self.$method(&rhs)
            }
        }
        impl $tr<BigReal> for BigReal {
            type Output = BigReal;
            fn $method(self, rhs: BigReal) -> BigReal {
                (&self).$method(&rhs)
            }
        }
    };
}

bin_op!(Add, add, +);
bin_op!(Sub, sub, -);
bin_op!(Mul, mul, *);
bin_op!(Div, div, /);

impl Neg for BigReal {
    type Output = BigReal;
    fn neg(self) -> BigReal {
        BigReal(-self.0)
    }
}

impl Neg for &BigReal {
    type Output = BigReal;
    fn neg(self) -> BigReal {
        BigReal(Float::with_val(self.0.prec(), -&self.0))
    }
}

impl AddAssign<&BigReal> for BigReal {
    fn add_assign(&mut self, rhs: &BigReal) {
        if rhs.0.prec() > self.0.prec() {
            self.0.set_prec(rhs.0.prec());
        }
        self.0 += &rhs.0;
    }
}

impl AddAssign<BigReal> for BigReal {
    fn add_assign(&mut self, rhs: BigReal) {
        *self += &rhs;
    }
}

impl SubAssign<&BigReal> for BigReal {
    fn sub_assign(&mut self, rhs: &BigReal) {
        if rhs.0.prec() > self.0.prec() {
            self.0.set_prec(rhs.0.prec());
        }
        self.0 -= &rhs.0;
    }
}

impl SubAssign<BigReal> for BigReal {
    fn sub_assign(&mut self, rhs: BigReal) {
        *self -= &rhs;
    }
}

impl MulAssign<&BigReal> for BigReal {
    fn mul_assign(&mut self, rhs: &BigReal) {
        if rhs.0.prec() > self.0.prec() {
            self.0.set_prec(rhs.0.prec());
        }
        self.0 *= &rhs.0;
    }
}

impl std::iter::Sum for BigReal {
    /// Panics on an empty iterator: the precision of the sum is unknown.
    fn sum<I: Iterator<Item = BigReal>>(mut iter: I) -> BigReal {
        let mut acc = iter.next().expect("sum of empty BigReal iterator");
        for v in iter {
            acc += &v;
        }
        acc
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ctx() -> PrecisionContext {
        PrecisionContext::new(50).unwrap()
    }

    #[test]
    fn decimal_round_trip_is_exact() {
        let c = ctx();
        let x = BigReal::pi(c).div_i64(7).ln();
        let s = x.to_decimal_string();
        let y = BigReal::parse(&s, c).unwrap();
        assert_eq!(x, y);
    }

    #[test]
    fn rejects_garbage() {
        assert!(BigReal::parse("1.2.3", ctx()).is_err());
        assert!(BigReal::parse("", ctx()).is_err());
    }

    #[test]
    fn short_strings() {
        let c = ctx();
        let x = BigReal::parse("4.5785847440343694", c).unwrap();
        assert_eq!(x.to_short_string(7), "4.578585");
        let y = BigReal::parse("1140.99", c).unwrap();
        assert_eq!(y.to_short_string(6), "1140.99");
        let z = BigReal::parse("2270382.4", c).unwrap();
        assert_eq!(z.to_short_string(7), "2270382");
        let w = BigReal::parse("-0.000123", c).unwrap();
        assert_eq!(w.to_short_string(3), "-0.000123");
        let big = BigReal::parse("-1.8895969e105", c).unwrap();
        assert_eq!(big.to_short_string(8), "-1.8895969e105");
    }

    #[test]
    fn log10_beyond_f64_range() {
        let c = ctx();
        let x = BigReal::from_i64(10, c).powi(600);
        assert!((x.log10_abs() - 600.0).abs() < 1e-9);
    }

    #[test]
    fn precision_is_max_of_operands() {
        let lo = BigReal::one(PrecisionContext::new(30).unwrap());
        let hi = BigReal::one(PrecisionContext::new(90).unwrap());
        assert_eq!((&lo + &hi).prec(), hi.prec());
    }
}
