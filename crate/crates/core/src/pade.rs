//! Padé approximants `[N/M]` of a power series.
//!
//! The denominator comes from the `M×M` Toeplitz system of the matching
//! conditions, solved with the generic LU solver; the numerator is then the
//! truncated convolution of the series with the denominator.

use crate::error::{Error, Result};
use crate::moments::{MomentSequence, SystemSpec};
use crate::numeric::{lu_solve, BigReal, Matrix, PrecisionContext};

/// `p(β)/q(β)` with `deg p = N`, `deg q = M` and `q_0 = 1`.
#[derive(Clone, Debug)]
pub struct PadeApproximant {
    pub n: usize,
    pub m: usize,
    pub p: Vec<BigReal>,
    pub q: Vec<BigReal>,
    ctx: PrecisionContext,
}

fn coefficient(series: &[BigReal], i: isize, ctx: PrecisionContext) -> BigReal {
    if i < 0 {
        ctx.zero()
    } else {
        series[i as usize].to_ctx(ctx)
    }
}

/// Builds `[N/M]` from the first `N+M+1` terms of `series`.
pub fn pade_build(
    series: &[BigReal],
    n: usize,
    m: usize,
    ctx: PrecisionContext,
) -> Result<PadeApproximant> {
    if series.len() < n + m + 1 {
        return Err(Error::Validation {
            op: "pade_build",
            detail: format!("[{n}/{m}] needs {} terms, got {}", n + m + 1, series.len()),
        });
    }
    let a = |i: isize| coefficient(series, i, ctx);
    let mut q = vec![ctx.one()];
    if m > 0 {
        // Σ_{j=1}^{M} q_j a_{N+1+r−j} = −a_{N+1+r},  r = 0..M−1.
        let rows = (0..m)
            .map(|r| {
                (1..=m)
                    .map(|j| a((n + 1 + r) as isize - j as isize))
                    .collect()
            })
            .collect();
        let rhs: Vec<BigReal> = (0..m).map(|r| -a((n + 1 + r) as isize)).collect();
        let sol = lu_solve(&Matrix::from_rows(rows)?, &rhs, ctx).map_err(|e| match e {
            Error::SingularMatrix { column, .. } => Error::SingularMatrix {
                op: "pade_build",
                column,
            },
            other => other,
        })?;
        q.extend(sol);
    }
    let p = (0..=n).map(|i| convolve(series, &q, i, ctx)).collect();
    let approx = PadeApproximant { n, m, p, q, ctx };
    approx.verify(series)?;
    Ok(approx)
}

/// `Σ_{j ≤ min(i, M)} q_j a_{i−j}` together with the sum of magnitudes.
fn convolve_with_scale(
    series: &[BigReal],
    q: &[BigReal],
    i: usize,
    ctx: PrecisionContext,
) -> (BigReal, BigReal) {
    let mut sum = ctx.zero();
    let mut scale = ctx.zero();
    for (j, qj) in q.iter().enumerate().take(i + 1) {
        let t = qj * &coefficient(series, (i - j) as isize, ctx);
        scale += t.abs();
        sum += t;
    }
    (sum, scale)
}

fn convolve(series: &[BigReal], q: &[BigReal], i: usize, ctx: PrecisionContext) -> BigReal {
    convolve_with_scale(series, q, i, ctx).0
}

impl PadeApproximant {
    pub fn ctx(&self) -> PrecisionContext {
        self.ctx
    }

    /// Checks that `q·Σa_iβ^i − p` vanishes through order `N+M`.
    fn verify(&self, series: &[BigReal]) -> Result<()> {
        let tol = self.ctx.epsilon();
        for i in 0..=self.n + self.m {
            let (mut r, scale) = convolve_with_scale(series, &self.q, i, self.ctx);
            if i <= self.n {
                r -= &self.p[i];
            }
            if r.abs() > &tol * &scale {
                return Err(Error::SingularMatrix {
                    op: "pade_build",
                    column: i,
                });
            }
        }
        Ok(())
    }

    /// Taylor coefficients of `p/q` through order `len − 1`.
    pub fn taylor(&self, len: usize) -> Vec<BigReal> {
        let mut c: Vec<BigReal> = Vec::with_capacity(len);
        for i in 0..len {
            let mut v = self.p.get(i).cloned().unwrap_or_else(|| self.ctx.zero());
            for j in 1..=self.m.min(i) {
                v -= &self.q[j] * &c[i - j];
            }
            c.push(v);
        }
        c
    }
}

fn horner(coeffs: &[BigReal], beta: &BigReal, ctx: PrecisionContext) -> BigReal {
    coeffs
        .iter()
        .rev()
        .fold(ctx.zero(), |acc, c| acc * beta + c)
}

/// `p(β)/q(β)`, refusing to divide by a denominator lost in rounding.
pub fn pade_eval(approx: &PadeApproximant, beta: &BigReal) -> Result<BigReal> {
    let ctx = approx.ctx;
    let beta = beta.to_ctx(ctx);
    let den = horner(&approx.q, &beta, ctx);
    let mut power = ctx.one();
    let mut largest = ctx.zero();
    for qi in &approx.q {
        let t = (qi * &power).abs();
        if t > largest {
            largest = t;
        }
        power *= &beta;
    }
    if den.abs() <= ctx.epsilon() * largest {
        return Err(Error::Pole {
            op: "pade_eval",
            arg: beta.to_short_string(12),
        });
    }
    Ok(horner(&approx.p, &beta, ctx) / den)
}

/// Padé approximant of a system's energy,
/// `E(β) = subtraction + prefactor·β·[N/M](β)`, where `[N/M]` approximates
/// the Stieltjes series `Σ(−1)^k μ_k β^k`.
///
/// Factoring out the subtraction and the leading power of `β` keeps the
/// `[M−1/M]` family bounded at large coupling, which is where its failure to
/// follow the strong-coupling growth shows up as a plateau.
#[derive(Clone, Debug)]
pub struct EnergyPade {
    pub spec: SystemSpec,
    pub approx: PadeApproximant,
}

impl EnergyPade {
    pub fn build(
        moments: &MomentSequence,
        n: usize,
        m: usize,
        ctx: PrecisionContext,
    ) -> Result<Self> {
        let series = moments.stieltjes_series(ctx);
        Ok(EnergyPade {
            spec: moments.spec.clone(),
            approx: pade_build(&series, n, m, ctx)?,
        })
    }

    pub fn eval(&self, beta: &BigReal) -> Result<BigReal> {
        let ctx = self.approx.ctx;
        let s = pade_eval(&self.approx, beta)?;
        let beta = beta.to_ctx(ctx);
        Ok(BigReal::from_rational(&self.spec.subtraction, ctx)
            + BigReal::from_rational(&self.spec.prefactor, ctx) * beta * s)
    }
}
