//! Laguerre reconstruction of the Stieltjes density.
//!
//! The density is `ρ(x) = x^{-ν} g(x)` with `g(x) = e^{-x/2} Σ_{m≤d} c_m L_m(x)`.
//! Its moments are linear in the `c_m`, `μ_s = Σ_m c_m P(s, m)`, and the
//! truncated moment problem is the square system `P·c = μ`.

use std::fs;
use std::path::Path;

use rayon::prelude::*;
use rug::Rational;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::moments::{Kernel, MomentSequence};
use crate::numeric::{
    gamma, lu_solve, pow_rational, BigComplex, BigRational, BigReal, Matrix, PrecisionContext,
};

fn check_nu(op: &'static str, nu: &BigRational) -> Result<()> {
    if nu.abs() >= BigRational::new(1, 1) {
        return Err(Error::Domain {
            op,
            detail: format!("|nu| = |{nu}| must be < 1"),
        });
    }
    Ok(())
}

/// `P(s, m) / (Γ(1−ν) 2^{1−ν})` for `s ≤ s_max`, `m ≤ d`, as exact rationals.
///
/// Column 0 is `2^s (1−ν)_s`; the remaining columns follow from
/// `(m+1) L_{m+1} = (2m+1−x) L_m − m L_{m−1}`, where multiplying by `x`
/// shifts the moment order: `(m+1) P(s,m+1) = (2m+1) P(s,m) − P(s+1,m) − m P(s,m−1)`.
fn scaled_p_columns(d: usize, s_max: usize, nu: &BigRational) -> Vec<Vec<Rational>> {
    let one_minus_nu = Rational::from(1) - nu.as_rug();
    let top = s_max + d;
    let mut col0 = Vec::with_capacity(top + 1);
    let mut acc = Rational::from(1);
    for s in 0..=top {
        col0.push(acc.clone());
        acc *= Rational::from(&one_minus_nu + s as u32) * 2u32;
    }
    let mut cols = vec![col0];
    for m in 0..d {
        let cur = &cols[m];
        let prev = if m > 0 { Some(&cols[m - 1]) } else { None };
        let len = top - m;
        let next: Vec<Rational> = (0..len)
            .into_par_iter()
            .map(|s| {
                let mut v = Rational::from(&cur[s] * (2 * m as u32 + 1));
                v -= &cur[s + 1];
                if let Some(p) = prev {
                    v -= Rational::from(&p[s] * m as u32);
                }
                v / (m as u32 + 1)
            })
            .collect();
        cols.push(next);
    }
    cols
}

/// `Γ(1−ν) 2^{1−ν}`, the common factor of all `P(s, m)`.
fn p_scale(nu: &BigRational, ctx: PrecisionContext) -> Result<BigReal> {
    let one_minus_nu = BigRational::new(1, 1) - nu.clone();
    let g = gamma(&BigReal::from_rational(&one_minus_nu, ctx), ctx)?;
    Ok(&g * &pow_rational(&ctx.int(2), &one_minus_nu, ctx))
}

/// Moment matrix for the orders `rows`, columns `m = 0..=d`.
fn p_matrix_for_orders(
    d: usize,
    nu: &BigRational,
    orders: &[usize],
    ctx: PrecisionContext,
) -> Result<Matrix> {
    let s_max = orders.iter().copied().max().unwrap_or(0);
    let cols = scaled_p_columns(d, s_max, nu);
    let k = p_scale(nu, ctx)?;
    let rows: Vec<Vec<BigReal>> = orders
        .par_iter()
        .map(|&s| {
            cols.iter()
                .map(|col| &k * &BigReal::from_rational(&BigRational::from_rug(col[s].clone()), ctx))
                .collect()
        })
        .collect();
    Matrix::from_rows(rows)
}

/// The `(d+1)×(d+1)` moment matrix: row `n` holds `P(n, m)` for the linear
/// kernel and `P(2n, m)` for the quadratic one, with
/// `P(n,m) = m!·2^{n−ν+1}·Σ_k (−2)^k Γ(n+k−ν+1) / ((k!)² (m−k)!)`.
///
/// Entries are formed exactly up to the common factor `Γ(1−ν)2^{1−ν}`, so the
/// alternating sum loses nothing to cancellation.
pub fn build_p_matrix(
    d: usize,
    nu: &BigRational,
    kernel: Kernel,
    ctx: PrecisionContext,
) -> Result<Matrix> {
    check_nu("build_p_matrix", nu)?;
    let orders: Vec<usize> = (0..=d).map(|n| kernel.moment_order(n)).collect();
    p_matrix_for_orders(d, nu, &orders, ctx)
}

/// `P(s, m)` straight from its Γ-sum definition; a test oracle for
/// [`build_p_matrix`] that needs generous precision for large `m`.
pub fn p_entry_direct(s: usize, m: usize, nu: &BigRational, ctx: PrecisionContext) -> Result<BigReal> {
    check_nu("build_p_matrix", nu)?;
    let nu_r = BigReal::from_rational(nu, ctx);
    let mut sum = ctx.zero();
    let mut fact_k = ctx.one();
    for k in 0..=m {
        if k > 0 {
            fact_k = fact_k.mul_i64(k as i64);
        }
        let mut fact_mk = ctx.one();
        for j in 2..=(m - k) {
            fact_mk = fact_mk.mul_i64(j as i64);
        }
        let arg = &ctx.int((s + k + 1) as i64) - &nu_r;
        let term = &(&ctx.int(-2).powi(k as i32) * &gamma(&arg, ctx)?) / &(&(&fact_k * &fact_k) * &fact_mk);
        sum += &term;
    }
    let mut fact_m = ctx.one();
    for j in 2..=m {
        fact_m = fact_m.mul_i64(j as i64);
    }
    let e = BigRational::new(s as i64 + 1, 1) - nu.clone();
    Ok(&(&fact_m * &pow_rational(&ctx.int(2), &e, ctx)) * &sum)
}

/// Quality indicators for the reconstructed `g` near the origin.
#[derive(Clone, Debug, PartialEq)]
pub struct GibbsDiagnostic {
    /// `|g(0)| = |Σ c_m|`.
    pub g0_abs: BigReal,
    /// `|c_d| / max_m |c_m|`: how far the expansion has decayed at its end.
    pub tail_decay: BigReal,
}

/// Density `x^{-ν} e^{-x/2} Σ_{m=0}^{d} c_m L_m(x)`.
#[derive(Clone, Debug, PartialEq)]
pub struct ReconstructedDensity {
    pub nu: BigRational,
    pub kernel: Kernel,
    pub d: usize,
    pub c: Vec<BigReal>,
    /// `max_n |Σ_m c_m P(n,m) − μ_n| / μ_n`.
    pub residual: BigReal,
    /// Digits lost to cancellation when forming `Σ_m c_m P(n,m)`.
    pub cancellation_digits: u32,
    pub ctx: PrecisionContext,
}

/// Residual and cancellation of `P·c` against `μ`, both relative to `μ_n`.
fn moment_fit(p: &Matrix, c: &[BigReal], mu: &[BigReal]) -> (BigReal, u32) {
    let pc = p.mul_vec(c);
    let mut residual = BigReal::zero_like(&mu[0]);
    let mut cancel = 0f64;
    for (n, (fit, target)) in pc.iter().zip(mu).enumerate() {
        let r = &(fit - target).abs() / target;
        if r > residual {
            residual = r;
        }
        let mag: BigReal = p.row(n).iter().zip(c).map(|(a, b)| (a * b).abs()).sum();
        cancel = cancel.max((mag / target).log10_abs());
    }
    (residual, cancel.max(0.0).ceil() as u32)
}

fn allowed_residual_digits(ctx: PrecisionContext, cancellation_digits: u32) -> i64 {
    ctx.decimal_digits() as i64 - ctx.guard_digits() as i64 - cancellation_digits as i64
}

fn residual_bound(ctx: PrecisionContext, cancellation_digits: u32) -> BigReal {
    let allowed = allowed_residual_digits(ctx, cancellation_digits);
    ctx.int(10).powi(-(allowed.max(0) as i32))
}

/// Solves `P·c = μ` for the Laguerre coefficients.
///
/// The residual must stay below `10^{-(digits − guard − cancellation)}`;
/// otherwise the factorial growth of the moments has outrun the working
/// precision and `PrecisionTooLow` reports how many digits would do.
pub fn solve_density(moments: &MomentSequence, ctx: PrecisionContext) -> Result<ReconstructedDensity> {
    let spec = &moments.spec;
    check_nu("solve_density", &spec.nu)?;
    let d = moments.len() - 1;
    let p = build_p_matrix(d, &spec.nu, spec.kernel, ctx)?;
    let mu = moments.at(ctx);
    // Row n scaled by 1/μ_n: the rows span hundreds of orders of magnitude.
    let mut scaled = p.clone();
    for (n, m) in mu.iter().enumerate() {
        let inv = m.recip();
        for j in 0..=d {
            scaled[(n, j)] = &scaled[(n, j)] * &inv;
        }
    }
    let ones = vec![ctx.one(); d + 1];
    let c = lu_solve(&scaled, &ones, ctx).map_err(|e| match e {
        Error::SingularMatrix { column, .. } => Error::SingularMatrix {
            op: "solve_density",
            column,
        },
        other => other,
    })?;
    let (residual, cancellation_digits) = moment_fit(&p, &c, &mu);
    let allowed = allowed_residual_digits(ctx, cancellation_digits);
    if allowed <= 0 || residual >= residual_bound(ctx, cancellation_digits) {
        return Err(Error::PrecisionTooLow {
            op: "solve_density",
            detail: format!(
                "moment residual {} with {cancellation_digits} digits of cancellation at d = {d}",
                residual.to_sig_string(3)
            ),
            needed_digits: ctx.decimal_digits() + cancellation_digits + 50,
        });
    }
    Ok(ReconstructedDensity {
        nu: spec.nu.clone(),
        kernel: spec.kernel,
        d,
        c,
        residual,
        cancellation_digits,
        ctx,
    })
}

impl ReconstructedDensity {
    /// `10^{-(digits − guard − cancellation)}`: the largest moment residual
    /// a solve at this precision may leave.
    pub fn residual_bound(&self) -> BigReal {
        residual_bound(self.ctx, self.cancellation_digits)
    }

    /// A density with given coefficients and no moment fit behind it.
    pub fn from_coefficients(
        nu: BigRational,
        kernel: Kernel,
        c: Vec<BigReal>,
        ctx: PrecisionContext,
    ) -> Result<Self> {
        check_nu("solve_density", &nu)?;
        if c.is_empty() {
            return Err(Error::Validation {
                op: "solve_density",
                detail: "no Laguerre coefficients".into(),
            });
        }
        Ok(ReconstructedDensity {
            nu,
            kernel,
            d: c.len() - 1,
            c: c.into_iter().map(|v| v.to_ctx(ctx)).collect(),
            residual: ctx.zero(),
            cancellation_digits: 0,
            ctx,
        })
    }

    /// `g(0) = Σ c_m`.
    pub fn g0(&self) -> BigReal {
        self.c.iter().cloned().sum()
    }

    /// `Σ c_m L_m(x)` at real `x` by the three-term recurrence.
    fn laguerre_sum_real(&self, x: &BigReal) -> BigReal {
        let ctx = self.ctx;
        let mut prev = ctx.one();
        let mut acc = &self.c[0] * &prev;
        if self.d == 0 {
            return acc;
        }
        let mut cur = &ctx.one() - x;
        acc += &(&self.c[1] * &cur);
        for m in 1..self.d {
            let a = &ctx.int(2 * m as i64 + 1) - x;
            let next = (&(&a * &cur) - &prev.mul_i64(m as i64)).div_i64(m as i64 + 1);
            prev = cur;
            cur = next;
            acc += &(&self.c[m + 1] * &cur);
        }
        acc
    }

    /// `g(x)` at real `x`.
    pub fn eval_g_real(&self, x: &BigReal) -> BigReal {
        let x = x.to_ctx(self.ctx);
        &(-x.div_i64(2)).exp() * &self.laguerre_sum_real(&x)
    }

    /// `g(z) = e^{-z/2} Σ c_m L_m(z)` with the Laguerre recurrence.
    pub fn eval_g(&self, z: &BigComplex) -> BigComplex {
        let ctx = self.ctx;
        let z = BigComplex::new(z.re.to_ctx(ctx), z.im.to_ctx(ctx));
        if z.is_real() {
            return BigComplex::from_real(self.eval_g_real(&z.re));
        }
        let mut prev = BigComplex::one(ctx);
        let mut acc = prev.scale(&self.c[0]);
        if self.d > 0 {
            let mut cur = &BigComplex::one(ctx) - &z;
            acc = &acc + &cur.scale(&self.c[1]);
            for m in 1..self.d {
                let a = &BigComplex::from_real(ctx.int(2 * m as i64 + 1)) - &z;
                let t = &(&a * &cur) - &prev.scale(&ctx.int(m as i64));
                let next = t.scale(&ctx.one().div_i64(m as i64 + 1));
                prev = cur;
                cur = next;
                acc = &acc + &cur.scale(&self.c[m + 1]);
            }
        }
        let half = BigComplex::new(-z.re.div_i64(2), -z.im.div_i64(2));
        &half.exp() * &acc
    }

    /// `g(z)` from the explicit double sum `Σ_m c_m Σ_k C(m,k) (−z)^k / k!`;
    /// slow and cancellation-prone, kept as an oracle for [`Self::eval_g`].
    pub fn eval_g_double_sum(&self, z: &BigComplex) -> BigComplex {
        let ctx = self.ctx;
        let mut powers = vec![BigComplex::one(ctx)];
        let minus_z = -z;
        for k in 1..=self.d {
            powers.push(&powers[k - 1] * &minus_z);
        }
        let mut acc = BigComplex::zero(ctx);
        for (m, cm) in self.c.iter().enumerate() {
            let mut inner = BigComplex::zero(ctx);
            let mut binom = ctx.one();
            let mut fact = ctx.one();
            for (k, pk) in powers.iter().enumerate().take(m + 1) {
                if k > 0 {
                    binom = binom.mul_i64((m - k + 1) as i64).div_i64(k as i64);
                    fact = fact.mul_i64(k as i64);
                }
                inner = &inner + &pk.scale(&(&binom / &fact));
            }
            acc = &acc + &inner.scale(cm);
        }
        let half = BigComplex::new(-z.re.div_i64(2), -z.im.div_i64(2));
        &half.exp() * &acc
    }

    pub fn gibbs(&self) -> GibbsDiagnostic {
        let max = BigReal::max_abs(&self.c).expect("non-empty coefficients");
        let last = self.c[self.d].abs();
        GibbsDiagnostic {
            g0_abs: self.g0().abs(),
            tail_decay: if max.is_zero() { max.clone() } else { &last / &max },
        }
    }

    /// Odd moments `Σ_m c_m P(2k+1, m)` predicted by a quadratic-kernel
    /// density, which only the even moments constrain.
    pub fn odd_moment_predictions(&self) -> Result<Vec<BigReal>> {
        let orders: Vec<usize> = (0..=self.d).map(|k| 2 * k + 1).collect();
        let p = p_matrix_for_orders(self.d, &self.nu, &orders, self.ctx)?;
        Ok(p.mul_vec(&self.c))
    }

    pub fn to_dump(&self) -> DensityDump {
        DensityDump {
            nu: self.nu.to_exact_string(),
            kernel: self.kernel,
            d: self.d,
            digits: self.ctx.decimal_digits(),
            guard_digits: self.ctx.guard_digits(),
            residual: self.residual.to_decimal_string(),
            cancellation_digits: self.cancellation_digits,
            c: self.c.iter().map(BigReal::to_decimal_string).collect(),
        }
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let text = serde_json::to_string_pretty(&self.to_dump()).expect("plain data serializes");
        fs::write(path, text + "\n").map_err(|e| Error::Io {
            op: "save_density",
            path: path.display().to_string(),
            detail: e.to_string(),
        })
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::Io {
            op: "load_density",
            path: path.display().to_string(),
            detail: e.to_string(),
        })?;
        let dump: DensityDump = serde_json::from_str(&text).map_err(|e| Error::Parse {
            op: "load_density",
            detail: format!("{}: {e}", path.display()),
        })?;
        dump.into_density()
    }
}

/// Serialized density: everything needed to skip the solve.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DensityDump {
    pub nu: String,
    pub kernel: Kernel,
    pub d: usize,
    pub digits: u32,
    pub guard_digits: u32,
    pub residual: String,
    pub cancellation_digits: u32,
    pub c: Vec<String>,
}

impl DensityDump {
    pub fn into_density(self) -> Result<ReconstructedDensity> {
        let ctx = PrecisionContext::with_guard(self.digits, self.guard_digits)?;
        let nu = BigRational::parse(&self.nu)?;
        check_nu("load_density", &nu)?;
        if self.c.len() != self.d + 1 {
            return Err(Error::Validation {
                op: "load_density",
                detail: format!("d = {} but {} coefficients", self.d, self.c.len()),
            });
        }
        let c = self
            .c
            .iter()
            .map(|s| BigReal::parse(s, ctx))
            .collect::<Result<Vec<_>>>()?;
        Ok(ReconstructedDensity {
            nu,
            kernel: self.kernel,
            d: self.d,
            c,
            residual: BigReal::parse(&self.residual, ctx)?,
            cancellation_digits: self.cancellation_digits,
            ctx,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::moments::{MomentSource, SystemId, SystemSpec};

    fn ctx() -> PrecisionContext {
        PrecisionContext::new(60).unwrap()
    }

    fn custom_spec(nu: BigRational) -> SystemSpec {
        SystemSpec {
            id: SystemId::Custom,
            subtraction: BigRational::zero(),
            prefactor: BigRational::new(1, 1),
            kernel: Kernel::Linear,
            strong_exponent: nu.clone(),
            nu,
        }
    }

    #[test]
    fn small_p_entries() {
        let c = ctx();
        let p = build_p_matrix(1, &BigRational::zero(), Kernel::Linear, c).unwrap();
        assert_eq!(p[(0, 0)], c.int(2));
        assert_eq!(p[(1, 0)], c.int(4));
        assert_eq!(p[(0, 1)], c.int(-2));
    }

    #[test]
    fn recurrence_matches_gamma_sum() {
        let c = PrecisionContext::new(120).unwrap();
        let nu = BigRational::new(1, 3);
        let p = build_p_matrix(12, &nu, Kernel::Quadratic, c).unwrap();
        for (n, m) in [(0, 0), (3, 5), (7, 12), (12, 12), (12, 1)] {
            let direct = p_entry_direct(2 * n, m, &nu, c).unwrap();
            let rel = &(&p[(n, m)] - &direct).abs() / &direct.abs();
            assert!(rel < PrecisionContext::new(90).unwrap().epsilon(), "({n},{m})");
        }
    }

    #[test]
    fn rejects_large_nu() {
        let e = build_p_matrix(3, &BigRational::new(1, 1), Kernel::Linear, ctx()).unwrap_err();
        assert!(matches!(e, Error::Domain { .. }));
    }

    #[test]
    fn one_term_density_recovered() {
        let c = ctx();
        let nu = BigRational::new(1, 5);
        let p = build_p_matrix(6, &nu, Kernel::Linear, c).unwrap();
        // μ_n = P(n, 0)
        let seq = MomentSequence {
            spec: custom_spec(nu),
            mu: (0..7).map(|n| p[(n, 0)].clone()).collect(),
            source: MomentSource::File,
            exact: None,
        };
        let dens = solve_density(&seq, c).unwrap();
        assert!((&dens.c[0] - &c.one()).abs() < c.epsilon());
        for cm in &dens.c[1..] {
            assert!(cm.abs() < c.epsilon());
        }
    }

    #[test]
    fn eval_g_examples() {
        let c = ctx();
        let nu = BigRational::zero();
        let unit = |k: usize| {
            let mut v = vec![c.zero(); 3];
            v[k] = c.one();
            ReconstructedDensity::from_coefficients(nu.clone(), Kernel::Linear, v, c).unwrap()
        };
        let g = unit(0).eval_g(&BigComplex::from_real(c.int(2)));
        assert!((&g.re - &c.int(-1).exp()).abs() < c.epsilon());
        // L_1(i) e^{-i/2} = (1 − i) e^{-i/2}
        let g = unit(1).eval_g(&BigComplex::imag(c.one()));
        let expected = &BigComplex::new(c.one(), c.int(-1)) * &BigComplex::imag(c.one().div_i64(-2)).exp();
        assert!((&g - &expected).abs() < c.epsilon());
        let dens = ReconstructedDensity::from_coefficients(
            nu,
            Kernel::Linear,
            vec![c.int(3), c.int(-1), c.int(2)],
            c,
        )
        .unwrap();
        assert_eq!(dens.eval_g(&BigComplex::zero(c)).re, c.int(4));
    }

    #[test]
    fn dump_round_trip() {
        let c = ctx();
        let dens = ReconstructedDensity::from_coefficients(
            BigRational::new(-1, 2),
            Kernel::Quadratic,
            vec![c.pi(), c.int(-7).recip(), c.int(3).sqrt()],
            c,
        )
        .unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("density.json");
        dens.save(&path).unwrap();
        assert_eq!(ReconstructedDensity::load(&path).unwrap(), dens);
    }

    #[test]
    fn quadratic_rows_use_even_orders() {
        let c = ctx();
        let nu = BigRational::new(-1, 2);
        let lin = build_p_matrix(4, &nu, Kernel::Linear, c).unwrap();
        let quad = build_p_matrix(2, &nu, Kernel::Quadratic, c).unwrap();
        for m in 0..3 {
            assert_eq!(quad[(1, m)], lin[(2, m)]);
            assert_eq!(quad[(2, m)], lin[(4, m)]);
        }
    }
}
