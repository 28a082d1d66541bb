use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};
use std::str::FromStr;

use rug::ops::Pow;
use rug::{Integer, Rational};

use crate::error::{Error, Result};

/// Exact rational in lowest terms with a positive denominator.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct BigRational(Rational);

impl BigRational {
    pub fn new(num: i64, den: i64) -> Self {
        assert!(den != 0, "zero denominator");
        BigRational(Rational::from((num, den)))
    }

    pub fn from_integer(v: impl Into<Integer>) -> Self {
        BigRational(Rational::from(v.into()))
    }

    pub fn from_rug(q: Rational) -> Self {
        BigRational(q)
    }

    pub fn as_rug(&self) -> &Rational {
        &self.0
    }

    pub fn numer(&self) -> &Integer {
        self.0.numer()
    }

    pub fn denom(&self) -> &Integer {
        self.0.denom()
    }

    pub fn zero() -> Self {
        BigRational(Rational::new())
    }

    pub fn is_zero(&self) -> bool {
        self.0.cmp0() == std::cmp::Ordering::Equal
    }

    pub fn is_positive(&self) -> bool {
        self.0.cmp0() == std::cmp::Ordering::Greater
    }

    pub fn is_negative(&self) -> bool {
        self.0.cmp0() == std::cmp::Ordering::Less
    }

    pub fn is_integer(&self) -> bool {
        *self.0.denom() == 1
    }

    pub fn abs(&self) -> Self {
        BigRational(Rational::from(self.0.abs_ref()))
    }

    pub fn to_f64(&self) -> f64 {
        self.0.to_f64()
    }

    /// Parses `"p/q"`, an integer, or a plain decimal such as `-0.125` or
    /// `1.5e3` (decimals are exact rationals too).
    pub fn parse(s: &str) -> Result<Self> {
        let t = s.trim();
        let err = |detail: &str| Error::Parse {
            op: "parse_rational",
            detail: format!("{t:?}: {detail}"),
        };
        if t.is_empty() {
            return Err(err("empty string"));
        }
        if let Some((n, d)) = t.split_once('/') {
            let n = Integer::from_str(n.trim()).map_err(|e| err(&e.to_string()))?;
            let d = Integer::from_str(d.trim()).map_err(|e| err(&e.to_string()))?;
            if d == 0 {
                return Err(err("zero denominator"));
            }
            return Ok(BigRational(Rational::from((n, d))));
        }
        if let Ok(i) = Integer::from_str(t) {
            return Ok(BigRational(Rational::from(i)));
        }
        parse_decimal(t).ok_or_else(|| err("not a rational or decimal literal"))
    }

    /// Canonical text form: `p/q`, or `p` when the value is an integer.
    pub fn to_exact_string(&self) -> String {
        self.0.to_string()
    }

    /// Exact decimal text when the denominator has no prime factors other
    /// than 2 and 5, e.g. `-1/2` → `-0.5`.
    pub fn to_terminating_decimal(&self) -> Option<String> {
        let mut den = self.denom().clone();
        let twos = den.find_one(0).unwrap_or(0);
        den >>= twos;
        let mut fives = 0u32;
        while den.is_divisible_u(5) {
            den /= 5;
            fives += 1;
        }
        if den != 1 {
            return None;
        }
        let scale = twos.max(fives);
        let scaled = (self.numer() * Integer::from(10).pow(scale)) / self.denom();
        if scale == 0 {
            return Some(scaled.to_string());
        }
        let neg = scaled < 0;
        let digits = Integer::from(scaled.abs_ref()).to_string();
        let width = scale as usize + 1;
        let digits = format!("{digits:0>width$}");
        let (int_part, frac) = digits.split_at(digits.len() - scale as usize);
        let frac = frac.trim_end_matches('0');
        let sign = if neg { "-" } else { "" };
        Some(if frac.is_empty() {
            format!("{sign}{int_part}")
        } else {
            format!("{sign}{int_part}.{frac}")
        })
    }
}

fn parse_decimal(t: &str) -> Option<BigRational> {
    let (mant, exp) = match t.find(['e', 'E']) {
        Some(i) => (&t[..i], t[i + 1..].parse::<i64>().ok()?),
        None => (t, 0),
    };
    let (neg, mant) = match mant.strip_prefix('-') {
        Some(r) => (true, r),
        None => (false, mant.strip_prefix('+').unwrap_or(mant)),
    };
    let (int_part, frac_part) = mant.split_once('.').unwrap_or((mant, ""));
    if int_part.is_empty() && frac_part.is_empty() {
        return None;
    }
    if !int_part.bytes().chain(frac_part.bytes()).all(|b| b.is_ascii_digit()) {
        return None;
    }
    let digits = format!("{int_part}{frac_part}");
    let mut n = Integer::from_str(&digits).ok()?;
    if neg {
        n = -n;
    }
    let scale = exp - frac_part.len() as i64;
    let ten = Integer::from(10);
    let q = if scale >= 0 {
        Rational::from(n * ten.pow(u32::try_from(scale).ok()?))
    } else {
        Rational::from((n, ten.pow(u32::try_from(-scale).ok()?)))
    };
    Some(BigRational(q))
}

impl FromStr for BigRational {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        BigRational::parse(s)
    }
}

impl fmt::Display for BigRational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(&self.0, f)
    }
}

impl fmt::Debug for BigRational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "BigRational({})", self.0)
    }
}

impl From<i64> for BigRational {
    fn from(v: i64) -> Self {
        BigRational(Rational::from(v))
    }
}

macro_rules! rat_op {
    ($tr:ident, $method:ident, $op:tt) => {
        impl<'a, 'b> $tr<&'b BigRational> for &'a BigRational {
            type Output = BigRational;
            fn $method(self, rhs: &'b BigRational) -> BigRational {
                BigRational(Rational::from(&self.0 $op &rhs.0))
            }
        }
        impl $tr<BigRational> for BigRational {
            type Output = BigRational;
            fn $method(self, rhs: BigRational) -> BigRational {
                BigRational(self.0 $op rhs.0)
            }
        }
    };
}

rat_op!(Add, add, +);
rat_op!(Sub, sub, -);
rat_op!(Mul, mul, *);
rat_op!(Div, div, /);

impl Neg for BigRational {
    type Output = BigRational;
    fn neg(self) -> BigRational {
        BigRational(-self.0)
    }
}

impl Neg for &BigRational {
    type Output = BigRational;
    fn neg(self) -> BigRational {
        BigRational(Rational::from(-&self.0))
    }
}
