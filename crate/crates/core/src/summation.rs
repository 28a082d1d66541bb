//! The convergent expansions and the energy evaluators built on them.
//!
//! Linear kernel:
//! `β∫x^{-ν}g/(1+βx) = Σ_k (−1)^k μ_{−(k+1)}/β^k + π g(−1/β) β^ν / sin(πν)`.
//!
//! Quadratic kernel:
//! `β∫x^{-ν}g/(1+βx²) = Σ_k (−1)^k μ_{−(2k+2)}/β^k + Δ(β)` with
//! `Δ(β) = π β^{(1+ν)/2}/sin(πν) · [cos(πν/2) Im g(i/√β) + sin(πν/2) Re g(i/√β)]`.

use std::collections::HashMap;
use std::sync::{Arc, Mutex};
use std::time::{Duration, Instant};

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::finite_part::{assemble_head_terms, tail_sum, TailTerms};
use crate::moments::{Kernel, MomentSequence, SystemSpec};
use crate::numeric::{
    cos_pi_rational, pow_rational, recommended_digits, sin_pi_rational, BigComplex, BigRational,
    BigReal, PrecisionContext,
};
use crate::reconstruction::{solve_density, ReconstructedDensity};

/// One evaluation of the expansion at a single coupling.
#[derive(Clone, Debug, PartialEq)]
pub struct ExpansionResult {
    pub beta: BigReal,
    /// The series in `1/β` over the negative-power moments.
    pub head_tail: BigReal,
    /// The residue term, or `Δ(β)` for the quadratic kernel.
    pub correction: BigReal,
    /// `head_tail + correction`: the Stieltjes value.
    pub stieltjes: BigReal,
    /// `subtraction + prefactor · stieltjes`.
    pub total: BigReal,
    /// `log10(max(|head_tail|, |correction|) / |stieltjes|)`, floored at 0.
    pub cancellation_digits: u32,
    pub tail_terms_used: usize,
    /// Relative residual of the density's moment fit, and the bound it met.
    pub moment_residual: BigReal,
    pub moment_residual_bound: BigReal,
    pub ctx: PrecisionContext,
}

/// A solved density with its head terms, ready for evaluation at any β.
#[derive(Debug)]
pub struct Expansion {
    pub density: ReconstructedDensity,
    pub terms: TailTerms,
    pi_over_sin: BigReal,
    ctx: PrecisionContext,
}

fn cancellation(parts: &[&BigReal], total: &BigReal) -> u32 {
    let big = parts.iter().map(|p| p.log10_abs()).fold(f64::NEG_INFINITY, f64::max);
    let digits = if total.is_zero() {
        f64::INFINITY
    } else {
        big - total.log10_abs()
    };
    if digits.is_finite() {
        digits.max(0.0).ceil() as u32
    } else {
        u32::MAX / 2
    }
}

impl Expansion {
    pub fn new(density: ReconstructedDensity, ctx: PrecisionContext) -> Result<Self> {
        let terms = assemble_head_terms(&density, ctx)?;
        let pi_over_sin = &ctx.pi() / &sin_pi_rational(&density.nu, ctx);
        Ok(Expansion {
            density,
            terms,
            pi_over_sin,
            ctx,
        })
    }

    pub fn ctx(&self) -> PrecisionContext {
        self.ctx
    }

    pub fn kernel(&self) -> Kernel {
        self.density.kernel
    }

    /// `π g(−1/β) β^ν / sin(πν)`.
    pub fn residue(&self, beta: &BigReal) -> BigReal {
        let ctx = self.ctx;
        let g = self.density.eval_g_real(&-beta.recip());
        &(&self.pi_over_sin * &g) * &pow_rational(beta, &self.density.nu, ctx)
    }

    /// `Δ(β)` with `g` evaluated at `i/√β`.
    pub fn delta(&self, beta: &BigReal) -> BigReal {
        let g = self.density.eval_g(&BigComplex::imag(beta.sqrt().recip()));
        self.delta_with(beta, &g)
    }

    /// `Δ(β)` for a given value `g = g(i/√β)`.
    fn delta_with(&self, beta: &BigReal, g: &BigComplex) -> BigReal {
        let ctx = self.ctx;
        let nu = &self.density.nu;
        let half_nu = nu.clone() / BigRational::new(2, 1);
        let mix = &(&cos_pi_rational(&half_nu, ctx) * &g.im) + &(&sin_pi_rational(&half_nu, ctx) * &g.re);
        let exponent = (BigRational::new(1, 1) + nu.clone()) / BigRational::new(2, 1);
        &(&self.pi_over_sin * &pow_rational(beta, &exponent, ctx)) * &mix
    }

    /// Evaluates the Stieltjes value at `beta` and assembles the energy of
    /// `spec`; `PrecisionTooLow` if cancellation leaves fewer than
    /// `output_digits` correct digits.
    pub fn evaluate(&self, spec: &SystemSpec, beta: &BigReal, output_digits: u32) -> Result<ExpansionResult> {
        let ctx = self.ctx;
        let beta = beta.to_ctx(ctx);
        let op = match self.kernel() {
            Kernel::Linear => "stieltjes_value",
            Kernel::Quadratic => "generalized_value",
        };
        if !beta.is_positive() {
            return Err(Error::Domain {
                op,
                detail: "beta must be positive".into(),
            });
        }
        let (head_tail, used) = tail_sum(&self.terms, &beta, &ctx.epsilon(), ctx)?;
        let correction = match self.kernel() {
            Kernel::Linear => self.residue(&beta),
            Kernel::Quadratic => self.delta(&beta),
        };
        let stieltjes = &head_tail + &correction;
        let cancellation_digits = cancellation(&[&head_tail, &correction], &stieltjes);
        if cancellation_digits.saturating_add(output_digits) > ctx.decimal_digits() {
            return Err(Error::PrecisionTooLow {
                op,
                detail: format!(
                    "{cancellation_digits} digits cancel at beta = {}",
                    beta.to_sig_string(6)
                ),
                needed_digits: ctx.decimal_digits().saturating_add(cancellation_digits) + 50,
            });
        }
        let total = spec.energy(&stieltjes, ctx);
        Ok(ExpansionResult {
            beta,
            head_tail,
            correction,
            stieltjes,
            total,
            cancellation_digits,
            tail_terms_used: used,
            moment_residual: self.density.residual.clone(),
            moment_residual_bound: self.density.residual_bound(),
            ctx,
        })
    }
}

fn bare_spec(density: &ReconstructedDensity) -> SystemSpec {
    let nu = density.nu.clone();
    let strong_exponent = match density.kernel {
        Kernel::Linear => nu.clone(),
        Kernel::Quadratic => (BigRational::new(1, 1) + nu.clone()) / BigRational::new(2, 1),
    };
    SystemSpec {
        id: crate::moments::SystemId::Custom,
        subtraction: BigRational::zero(),
        prefactor: BigRational::new(1, 1),
        kernel: density.kernel,
        strong_exponent,
        nu,
    }
}

fn check_kernel(op: &'static str, density: &ReconstructedDensity, want: Kernel) -> Result<()> {
    if density.kernel != want {
        return Err(Error::Validation {
            op,
            detail: format!("density has the {} kernel", density.kernel.name()),
        });
    }
    Ok(())
}

/// `β∫₀^∞ x^{-ν}g(x)/(1+βx) dx` by the finite-part expansion; `total`
/// equals `stieltjes`.
pub fn stieltjes_value(
    density: &ReconstructedDensity,
    beta: &BigReal,
    ctx: PrecisionContext,
) -> Result<ExpansionResult> {
    check_kernel("stieltjes_value", density, Kernel::Linear)?;
    Expansion::new(density.clone(), ctx)?.evaluate(&bare_spec(density), beta, 0)
}

/// `β∫₀^∞ x^{-ν}g(x)/(1+βx²) dx` by the finite-part expansion.
pub fn generalized_value(
    density: &ReconstructedDensity,
    beta: &BigReal,
    ctx: PrecisionContext,
) -> Result<ExpansionResult> {
    check_kernel("generalized_value", density, Kernel::Quadratic)?;
    Expansion::new(density.clone(), ctx)?.evaluate(&bare_spec(density), beta, 0)
}

/// The weak-coupling series itself, summed over every available moment:
/// `subtraction + prefactor · Σ_k (−1)^k μ_k β^{k+1}`.
pub fn partial_sum(moments: &MomentSequence, beta: &BigReal, ctx: PrecisionContext) -> BigReal {
    let beta = beta.to_ctx(ctx);
    let series = moments.stieltjes_series(ctx);
    let s = series.iter().rev().fold(ctx.zero(), |acc, a| acc * &beta + a);
    moments.spec.energy(&(s * &beta), ctx)
}

/// How many times a too-imprecise density solve is retried with more digits.
const SOLVE_RETRIES: usize = 3;

/// [`solve_density`], retried at higher precision while the solve reports
/// a singular pivot or an excessive residual.
pub fn solve_density_escalating(
    moments: &MomentSequence,
    ctx: PrecisionContext,
) -> Result<ReconstructedDensity> {
    let mut ctx = ctx;
    let mut attempt = 0;
    loop {
        match solve_density(moments, ctx) {
            Ok(d) => return Ok(d),
            Err(e) if attempt < SOLVE_RETRIES => {
                let needed = match &e {
                    Error::PrecisionTooLow { needed_digits, .. } => *needed_digits,
                    Error::SingularMatrix { .. } => ctx.decimal_digits() * 3 / 2,
                    _ => return Err(e),
                };
                ctx = ctx.widened(needed.saturating_sub(ctx.decimal_digits()).max(50));
                attempt += 1;
            }
            Err(e) => return Err(e),
        }
    }
}

/// A batch of couplings for one moment sequence.
#[derive(Clone, Debug)]
pub struct EvaluationRequest {
    pub moments: MomentSequence,
    pub betas: Vec<BigReal>,
    /// Working precision; `None` picks [`recommended_digits`] of `d`.
    pub digits: Option<u32>,
    /// Digits that must survive cancellation in every result.
    pub output_digits: u32,
}

impl EvaluationRequest {
    pub fn new(moments: MomentSequence, betas: Vec<BigReal>) -> Self {
        EvaluationRequest {
            moments,
            betas,
            digits: None,
            output_digits: 30,
        }
    }

    pub fn d(&self) -> usize {
        self.moments.len() - 1
    }

    pub fn ctx(&self) -> Result<PrecisionContext> {
        PrecisionContext::new(self.digits.unwrap_or_else(|| recommended_digits(self.d())))
    }

    fn validate(&self) -> Result<()> {
        if self.moments.len() < 2 {
            return Err(Error::Validation {
                op: "energy",
                detail: "need d >= 1".into(),
            });
        }
        if let Some(i) = self.betas.iter().position(|b| !b.is_positive()) {
            return Err(Error::Validation {
                op: "energy",
                detail: format!("beta[{i}] = {} must be positive", self.betas[i].to_sig_string(6)),
            });
        }
        Ok(())
    }
}

/// Expansions keyed by working precision, shared by the β workers so
/// that an escalated solve happens once per precision.
struct ExpansionCache<'a> {
    moments: &'a MomentSequence,
    built: Mutex<HashMap<u32, Slot>>,
}

/// One precision's expansion, built by whichever worker locks it first.
type Slot = Arc<Mutex<Option<Arc<Expansion>>>>;

impl<'a> ExpansionCache<'a> {
    fn new(moments: &'a MomentSequence) -> Self {
        ExpansionCache {
            moments,
            built: Mutex::new(HashMap::new()),
        }
    }

    fn get(&self, ctx: PrecisionContext) -> Result<Arc<Expansion>> {
        let slot = {
            let mut map = self.built.lock().expect("cache lock");
            map.entry(ctx.decimal_digits()).or_default().clone()
        };
        let mut guard = slot.lock().expect("slot lock");
        if let Some(e) = guard.as_ref() {
            return Ok(e.clone());
        }
        let density = solve_density_escalating(self.moments, ctx)?;
        let ctx = density.ctx;
        let e = Arc::new(Expansion::new(density, ctx)?);
        *guard = Some(e.clone());
        Ok(e)
    }
}

/// Energies of the request's system at every β, in input order.
///
/// The evaluation fans out over β; a β whose cancellation exhausts the
/// precision is retried once at `digits + cancellation + 50`.
pub fn energy(request: &EvaluationRequest) -> Result<Vec<ExpansionResult>> {
    Ok(energy_timed(request)?.into_iter().map(|(r, _)| r).collect())
}

/// [`energy`] with the wall time spent on each β, including any escalated
/// re-solve that β triggered but not the initial density solve.
pub fn energy_timed(request: &EvaluationRequest) -> Result<Vec<(ExpansionResult, Duration)>> {
    request.validate()?;
    let ctx = request.ctx()?;
    let cache = ExpansionCache::new(&request.moments);
    let base = cache.get(ctx)?;
    let spec = &request.moments.spec;
    request
        .betas
        .par_iter()
        .map(|beta| {
            let start = Instant::now();
            let r = match base.evaluate(spec, beta, request.output_digits) {
                Err(Error::PrecisionTooLow { needed_digits, .. }) => {
                    let wider = PrecisionContext::with_guard(needed_digits, ctx.guard_digits())?;
                    cache.get(wider)?.evaluate(spec, beta, request.output_digits)
                }
                other => other,
            }?;
            Ok((r, start.elapsed()))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ctx() -> PrecisionContext {
        PrecisionContext::new(50).unwrap()
    }

    #[test]
    fn constant_g_delta() {
        // g ≡ 1: Δ(β) = π β^{(1+ν)/2} / (2 cos(πν/2))
        let c = ctx();
        let nu = BigRational::new(-1, 2);
        let density =
            ReconstructedDensity::from_coefficients(nu.clone(), Kernel::Quadratic, vec![c.one()], c).unwrap();
        let e = Expansion::new(density, c).unwrap();
        let beta = c.int(9);
        let delta = e.delta_with(&beta, &BigComplex::one(c));
        let exponent = BigRational::new(1, 4);
        let expected = &(&c.pi() * &pow_rational(&beta, &exponent, c))
            / &cos_pi_rational(&BigRational::new(-1, 4), c).mul_i64(2);
        assert!((&delta - &expected).abs() < &c.epsilon() * &expected.abs());
    }

    #[test]
    fn kernel_mismatch_rejected() {
        let c = ctx();
        let density =
            ReconstructedDensity::from_coefficients(BigRational::new(1, 3), Kernel::Linear, vec![c.one()], c).unwrap();
        assert!(generalized_value(&density, &c.one(), c).is_err());
        assert!(stieltjes_value(&density, &c.zero(), c).is_err());
    }

    #[test]
    fn dominant_term_at_large_beta() {
        // total / β^ν → π g(0) / sin(πν)
        let c = ctx();
        let nu = BigRational::new(1, 3);
        let coeffs = vec![c.one(), c.one().div_i64(3), c.one().div_i64(9)];
        let density = ReconstructedDensity::from_coefficients(nu.clone(), Kernel::Linear, coeffs, c).unwrap();
        let beta = c.int(10).powi(30);
        let r = stieltjes_value(&density, &beta, c).unwrap();
        let ratio = &r.total / &pow_rational(&beta, &nu, c);
        let limit = &(&c.pi() * &density.g0()) / &sin_pi_rational(&nu, c);
        assert!((&ratio - &limit).abs() < &limit.abs() * &c.int(10).powi(-8));
    }

    #[test]
    fn quadratic_dominant_term() {
        // total / β^{(1+ν)/2} → π g(0) sin(πν/2) / sin(πν)
        let c = ctx();
        let nu = BigRational::new(-1, 2);
        let coeffs = vec![c.one(), c.one().div_i64(2)];
        let density = ReconstructedDensity::from_coefficients(nu.clone(), Kernel::Quadratic, coeffs, c).unwrap();
        let beta = c.int(10).powi(30);
        let r = generalized_value(&density, &beta, c).unwrap();
        let exponent = BigRational::new(1, 4);
        let ratio = &r.total / &pow_rational(&beta, &exponent, c);
        let half_nu = BigRational::new(-1, 4);
        let limit = &(&(&c.pi() * &density.g0()) * &sin_pi_rational(&half_nu, c)) / &sin_pi_rational(&nu, c);
        assert!((&ratio - &limit).abs() < &limit.abs() * &c.int(10).powi(-6));
    }

    #[test]
    fn partial_sum_of_quartic() {
        // 1 + (3/4)β − (21/16)β² at β = 1/10
        let c = ctx();
        let seq = crate::moments::generate_moments(
            crate::moments::SystemId::Quartic,
            2,
            &crate::moments::GeneratorConfig::default(),
            c,
        )
        .unwrap();
        let beta = c.one().div_i64(10);
        let expected = BigReal::parse("1.061875", c).unwrap();
        assert!((partial_sum(&seq, &beta, c) - expected).abs() < c.epsilon());
    }

    #[test]
    fn cancellation_digits_floor() {
        let c = ctx();
        assert_eq!(cancellation(&[&c.int(3), &c.int(-1)], &c.int(2)), 1);
        assert_eq!(cancellation(&[&c.int(1), &c.int(1)], &c.int(2)), 0);
        assert_eq!(cancellation(&[&c.int(10).powi(9), &c.int(-1)], &c.one()), 9);
    }
}
