//! Double-exponential quadrature on the half line.
//!
//! The map `x = exp(π/2 · sinh t)` sends `t ∈ ℝ` onto `(0, ∞)` with
//! doubly-exponential clustering at both ends, so an algebraic singularity
//! `x^{-ν}` at the origin and exponential decay at infinity both become
//! doubly-exponentially decaying integrands in `t`. The trapezoidal rule in
//! `t` is then refined by halving the step until two levels agree.

use crate::error::{Error, Result};
use crate::moments::Kernel;
use crate::numeric::{pow_rational, BigRational, BigReal, PrecisionContext};

const MAX_LEVEL: u32 = 14;
/// Consecutive negligible terms that end a sweep in one direction.
const QUIET_TERMS: usize = 4;

/// Outcome of a quadrature with its convergence record.
#[derive(Clone, Debug)]
pub struct QuadratureResult {
    pub value: BigReal,
    /// Difference between the last two refinement levels.
    pub error_estimate: BigReal,
    pub levels: u32,
    pub evaluations: usize,
}

struct Sweep<'a, F> {
    f: &'a F,
    ctx: PrecisionContext,
    half_pi: BigReal,
    evaluations: usize,
}

impl<F: Fn(&BigReal) -> BigReal> Sweep<'_, F> {
    /// `f(x(t))·x'(t)`.
    fn term(&mut self, t: &BigReal) -> BigReal {
        self.evaluations += 1;
        let x = (&self.half_pi * &t.sinh()).exp();
        if x.is_zero() || !x.is_finite() {
            return self.ctx.zero();
        }
        let w = &self.half_pi * &t.cosh() * &x;
        (self.f)(&x) * w
    }

    /// `Σ f(x(t_j)) x'(t_j)` over `t_j = offset + j·stride`, `j ∈ ℤ` (the
    /// negative side starts at `offset − stride`), stopping in each
    /// direction once the terms are negligible against `scale`.
    fn sum(&mut self, offset: &BigReal, stride: &BigReal, scale: &BigReal) -> BigReal {
        let eps = self.ctx.epsilon();
        let mut total = self.ctx.zero();
        for dir in [1i64, -1] {
            let mut quiet = 0;
            let mut j: i64 = if dir == 1 { 0 } else { -1 };
            loop {
                let t = offset + &(stride * &self.ctx.int(j));
                let v = self.term(&t);
                let reference = if total.abs() > scale.abs() {
                    total.abs()
                } else {
                    scale.abs()
                };
                let small = v.abs() <= &eps * &reference;
                total += v;
                quiet = if small && !reference.is_zero() { quiet + 1 } else { 0 };
                if quiet >= QUIET_TERMS || j.abs() > 1 << (MAX_LEVEL + 4) {
                    break;
                }
                j += dir;
            }
        }
        total
    }
}

/// `∫₀^∞ f(x) dx` to `digits` significant digits.
///
/// `f` must be smooth on `(0, ∞)`, integrable at the origin and decay at
/// infinity; evaluation runs at `ctx`, which should carry a margin over
/// `digits`.
pub fn integrate_half_line<F>(f: F, digits: u32, ctx: PrecisionContext) -> Result<QuadratureResult>
where
    F: Fn(&BigReal) -> BigReal,
{
    let mut sweep = Sweep {
        f: &f,
        ctx,
        half_pi: ctx.pi() / ctx.int(2),
        evaluations: 0,
    };
    let tol = ctx.int(10).powi(-(digits as i32));
    let zero = ctx.zero();
    let mut h = ctx.one();
    let mut sum = sweep.sum(&zero, &h, &zero);
    let mut value = &sum * &h;
    for level in 1..=MAX_LEVEL {
        // Level k adds the midpoints of level k−1.
        let half = &h / &ctx.int(2);
        sum = sum.clone() + sweep.sum(&half, &h, &sum);
        h = half;
        let next = &sum * &h;
        let diff = (&next - &value).abs();
        value = next;
        if level >= 3 && diff <= &tol * &value.abs() {
            return Ok(QuadratureResult {
                value,
                error_estimate: diff,
                levels: level,
                evaluations: sweep.evaluations,
            });
        }
    }
    Err(Error::NonConvergence {
        op: "quadrature",
        terms: sweep.evaluations,
        detail: format!("no agreement to {digits} digits after {MAX_LEVEL} halvings"),
    })
}

/// `β∫₀^∞ x^{-ν} g(x) K(β, x) dx` with `K = 1/(1+βx)` or `1/(1+βx²)`.
pub fn stieltjes_quadrature<G>(
    g: G,
    nu: &BigRational,
    kernel: Kernel,
    beta: &BigReal,
    digits: u32,
    ctx: PrecisionContext,
) -> Result<QuadratureResult>
where
    G: Fn(&BigReal) -> BigReal,
{
    let beta = beta.to_ctx(ctx);
    let minus_nu = -nu;
    let one = ctx.one();
    let integrand = |x: &BigReal| {
        let denom = match kernel {
            Kernel::Linear => &one + &(&beta * x),
            Kernel::Quadratic => &one + &(&beta * &(x * x)),
        };
        pow_rational(x, &minus_nu, ctx) * g(x) / denom
    };
    let mut r = integrate_half_line(integrand, digits, ctx)?;
    r.value *= &beta;
    r.error_estimate *= &beta;
    Ok(r)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numeric::gamma;

    fn ctx() -> PrecisionContext {
        PrecisionContext::new(50).unwrap()
    }

    fn rel(a: &BigReal, b: &BigReal) -> f64 {
        ((a - b) / b).abs().to_f64()
    }

    #[test]
    fn exponential() {
        let ctx = ctx();
        let r = integrate_half_line(|x| (-x).exp(), 40, ctx).unwrap();
        assert!(rel(&r.value, &ctx.one()) < 1e-40);
    }

    #[test]
    fn algebraic_endpoint() {
        // ∫ x^{-2/3} e^{-x} dx = Γ(1/3).
        let ctx = ctx();
        let nu = BigRational::new(-2, 3);
        let r = integrate_half_line(|x| pow_rational(x, &nu, ctx) * (-x).exp(), 40, ctx).unwrap();
        let third = BigReal::from_rational(&BigRational::new(1, 3), ctx);
        let exact = gamma(&third, ctx).unwrap();
        assert!(rel(&r.value, &exact) < 1e-40);
    }

    #[test]
    fn rational_decay() {
        // ∫ dx/(1+x)² = 1.
        let ctx = ctx();
        let one = ctx.one();
        let r = integrate_half_line(|x| (&one + x).powi(-2), 40, ctx).unwrap();
        assert!(rel(&r.value, &one) < 1e-40);
    }

    #[test]
    fn stieltjes_of_exponential_at_zero_nu() {
        // β∫ e^{-x}/(1+βx) dx = e^{1/β} E₁(1/β); at β = 1 this is e·E₁(1).
        let ctx = ctx();
        let r = stieltjes_quadrature(
            |x| (-x).exp(),
            &BigRational::zero(),
            Kernel::Linear,
            &ctx.one(),
            40,
            ctx,
        )
        .unwrap();
        let e_e1 = BigReal::parse("0.596347362323194074341078499369279376074177860152548781573", ctx)
            .unwrap();
        assert!(rel(&r.value, &e_e1) < 1e-40);
    }
}
