use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use super::precision::PrecisionContext;
use super::real::BigReal;

/// Complex number as a pair of [`BigReal`]s.
#[derive(Clone, PartialEq)]
pub struct BigComplex {
    pub re: BigReal,
    pub im: BigReal,
}

impl BigComplex {
    pub fn new(re: BigReal, im: BigReal) -> Self {
        BigComplex { re, im }
    }

    pub fn from_real(re: BigReal) -> Self {
        let im = BigReal::zero_like(&re);
        BigComplex { re, im }
    }

    pub fn zero(ctx: PrecisionContext) -> Self {
        BigComplex::new(ctx.zero(), ctx.zero())
    }

    pub fn one(ctx: PrecisionContext) -> Self {
        BigComplex::new(ctx.one(), ctx.zero())
    }

    /// Purely imaginary `i·y`.
    pub fn imag(im: BigReal) -> Self {
        let re = BigReal::zero_like(&im);
        BigComplex { re, im }
    }

    pub fn is_real(&self) -> bool {
        self.im.is_zero()
    }

    pub fn conj(&self) -> Self {
        BigComplex::new(self.re.clone(), -&self.im)
    }

    pub fn scale(&self, k: &BigReal) -> Self {
        BigComplex::new(&self.re * k, &self.im * k)
    }

    pub fn norm_sqr(&self) -> BigReal {
        &self.re * &self.re + &self.im * &self.im
    }

    pub fn abs(&self) -> BigReal {
        self.norm_sqr().sqrt()
    }

    pub fn div(&self, rhs: &BigComplex) -> Self {
        let den = rhs.norm_sqr();
        let re = (&self.re * &rhs.re + &self.im * &rhs.im) / &den;
        let im = (&self.im * &rhs.re - &self.re * &rhs.im) / &den;
        BigComplex::new(re, im)
    }

    pub fn exp(&self) -> Self {
        let m = self.re.exp();
        BigComplex::new(&m * &self.im.cos(), &m * &self.im.sin())
    }

    pub fn is_finite(&self) -> bool {
        self.re.is_finite() && self.im.is_finite()
    }
}

impl BigReal {
    /// Zero at the same precision as `like`.
    pub fn zero_like(like: &BigReal) -> BigReal {
        BigReal::from_float(rug::Float::new(like.prec()))
    }
}

impl fmt::Debug for BigComplex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({:?}, {:?})", self.re, self.im)
    }
}

impl<'b> Add<&'b BigComplex> for &BigComplex {
    type Output = BigComplex;
    fn add(self, rhs: &'b BigComplex) -> BigComplex {
        BigComplex::new(&self.re + &rhs.re, &self.im + &rhs.im)
    }
}

impl<'b> Sub<&'b BigComplex> for &BigComplex {
    type Output = BigComplex;
    fn sub(self, rhs: &'b BigComplex) -> BigComplex {
        BigComplex::new(&self.re - &rhs.re, &self.im - &rhs.im)
    }
}

impl<'b> Mul<&'b BigComplex> for &BigComplex {
    type Output = BigComplex;
    fn mul(self, rhs: &'b BigComplex) -> BigComplex {
        BigComplex::new(
            &self.re * &rhs.re - &self.im * &rhs.im,
            &self.re * &rhs.im + &self.im * &rhs.re,
        )
    }
}

impl Neg for &BigComplex {
    type Output = BigComplex;
    fn neg(self) -> BigComplex {
        BigComplex::new(-&self.re, -&self.im)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn real_embedding_round_trips() {
        let ctx = PrecisionContext::new(40).unwrap();
        let x = ctx.pi();
        let z = BigComplex::from_real(x.clone());
        let w = &z * &BigComplex::one(ctx);
        assert!(w.is_real());
        assert_eq!(w.re, x);
    }

    #[test]
    fn euler_identity() {
        let ctx = PrecisionContext::new(40).unwrap();
        let z = BigComplex::imag(ctx.pi()).exp();
        assert!((&z.re + &ctx.one()).abs() < ctx.epsilon());
        assert!(z.im.abs() < ctx.epsilon());
    }

    #[test]
    fn division_inverts_multiplication() {
        let ctx = PrecisionContext::new(40).unwrap();
        let a = BigComplex::new(ctx.int(3), ctx.int(-2));
        let b = BigComplex::new(ctx.int(1), ctx.int(5));
        let q = (&a * &b).div(&b);
        assert!((&q - &a).abs() < ctx.epsilon());
    }
}
