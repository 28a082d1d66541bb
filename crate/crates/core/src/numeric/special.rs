//! Special functions at arbitrary precision.

use rug::Float;

use crate::error::{Error, Result};

use super::precision::PrecisionContext;
use super::rational::BigRational;
use super::real::BigReal;

/// Γ(x) to context precision.
///
/// Arguments below 1/2 go through the reflection formula so that values next
/// to the poles keep full relative accuracy.
pub fn gamma(x: &BigReal, ctx: PrecisionContext) -> Result<BigReal> {
    let x = x.to_ctx(ctx);
    if x.0.is_integer() && !x.is_positive() {
        return Err(Error::Pole {
            op: "gamma",
            arg: x.to_sig_string(20),
        });
    }
    let half = BigReal::from_f64(0.5, ctx);
    if x >= half {
        return Ok(BigReal(Float::with_val(ctx.bits(), x.0.gamma_ref())));
    }
    // Γ(x) = π / (sin(πx) Γ(1-x))
    let one_minus = &ctx.one() - &x;
    let g = BigReal(Float::with_val(ctx.bits(), one_minus.0.gamma_ref()));
    let s = sin_pi(&x, ctx);
    Ok(&ctx.pi() / &(&s * &g))
}

/// sin(πx) with exact reduction of the integer part of `x`.
pub fn sin_pi(x: &BigReal, ctx: PrecisionContext) -> BigReal {
    let n = Float::with_val(ctx.bits(), x.0.round_ref());
    let f = BigReal(Float::with_val(ctx.bits(), &x.0 - &n));
    let s = (&f * &ctx.pi()).sin();
    let odd = n
        .to_integer()
        .map(|i| i.is_odd())
        .unwrap_or(false);
    if odd {
        -s
    } else {
        s
    }
}

/// Reduces `q` into `(-1, 1]` modulo 2 and returns it with π applied.
fn reduced_angle(q: &BigRational, ctx: PrecisionContext) -> BigReal {
    let two = rug::Integer::from(2);
    let num = q.numer().clone();
    let den = q.denom().clone();
    // r = q mod 2 in [0, 2)
    let modulus = rug::Integer::from(&two * &den);
    let mut r_num = num % &modulus;
    if r_num < 0 {
        r_num += &modulus;
    }
    if r_num > den {
        r_num -= &modulus;
    }
    let r = BigRational::from_rug(rug::Rational::from((r_num, den)));
    &BigReal::from_rational(&r, ctx) * &ctx.pi()
}

/// sin(π q) for exact rational `q`; the sign is exact by construction.
pub fn sin_pi_rational(q: &BigRational, ctx: PrecisionContext) -> BigReal {
    reduced_angle(q, ctx).sin()
}

/// cos(π q) for exact rational `q`.
pub fn cos_pi_rational(q: &BigRational, ctx: PrecisionContext) -> BigReal {
    reduced_angle(q, ctx).cos()
}

/// `base^q` for `base > 0` and exact rational exponent.
pub fn pow_rational(base: &BigReal, q: &BigRational, ctx: PrecisionContext) -> BigReal {
    let e = BigReal::from_rational(q, ctx);
    base.to_ctx(ctx).pow(&e)
}

/// `0!, 1!, …, n!` as exact-valued floats.
pub fn factorials(n: usize, ctx: PrecisionContext) -> Vec<BigReal> {
    let mut out = Vec::with_capacity(n + 1);
    let mut acc = ctx.one();
    out.push(acc.clone());
    for k in 1..=n {
        acc = acc.mul_i64(k as i64);
        out.push(acc.clone());
    }
    out
}

/// Γ(start), Γ(start+1), …, Γ(start+count-1) by upward recurrence from a
/// single full evaluation.
#[derive(Clone, Debug)]
pub struct GammaLadder {
    start: BigRational,
    values: Vec<BigReal>,
}

impl GammaLadder {
    pub fn new(start: &BigRational, count: usize, ctx: PrecisionContext) -> Result<Self> {
        let x0 = BigReal::from_rational(start, ctx);
        let mut values = Vec::with_capacity(count);
        if count > 0 {
            let mut g = gamma(&x0, ctx)?;
            let mut x = x0;
            values.push(g.clone());
            for _ in 1..count {
                g = &g * &x;
                x += &ctx.one();
                values.push(g.clone());
            }
        }
        Ok(GammaLadder {
            start: start.clone(),
            values,
        })
    }

    pub fn start(&self) -> &BigRational {
        &self.start
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Γ(start + j).
    pub fn get(&self, j: usize) -> &BigReal {
        &self.values[j]
    }
}
