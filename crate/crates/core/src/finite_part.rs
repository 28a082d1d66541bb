//! Hadamard finite parts of the exponential kernel and the negative-power
//! moments of a reconstructed density.
//!
//! With `g(x) = e^{-x/2} Σ_l w_l x^l`, the negative-power moments are
//! `D_k = μ_{−(k+1)} = Σ_l w_l M(k+1−l)`, where `M(j)` is the finite part of
//! `∫ e^{-x/2} x^{-(j+ν)} dx` for `j ≥ 1` and an ordinary convergent integral
//! for `j ≤ 0`. For `k ≤ d` the sum is split into the `A_k`, `B_k`, `C_k`
//! groups of the head; beyond `d` only finite parts remain.

use std::sync::OnceLock;

use crate::error::{Error, Result};
use crate::moments::Kernel;
use crate::numeric::{
    gamma, pow_rational, sin_pi_rational, BigRational, BigReal, GammaLadder, PrecisionContext,
};
use crate::reconstruction::ReconstructedDensity;

fn check_nu(op: &'static str, nu: &BigRational) -> Result<()> {
    if nu.is_zero() {
        return Err(Error::Domain {
            op,
            detail: "nu = 0 puts a pole in 1/sin(pi nu)".into(),
        });
    }
    if nu.abs() >= BigRational::new(1, 1) {
        return Err(Error::Domain {
            op,
            detail: format!("|nu| = |{nu}| must be < 1"),
        });
    }
    Ok(())
}

fn check_b(op: &'static str, b: &BigReal) -> Result<()> {
    if !b.is_positive() {
        return Err(Error::Domain {
            op,
            detail: format!("rate b = {} must be positive", b.to_sig_string(10)),
        });
    }
    Ok(())
}

/// `FP ∫₀^∞ e^{-bx} x^{-(m+ν)} dx = (−1)^m b^{m+ν−1} π / (sin(πν) Γ(m+ν))`.
pub fn finite_part_exp(m: usize, nu: &BigRational, b: &BigReal, ctx: PrecisionContext) -> Result<BigReal> {
    check_nu("finite_part_exp", nu)?;
    check_b("finite_part_exp", b)?;
    if m == 0 {
        return Err(Error::Domain {
            op: "finite_part_exp",
            detail: "m must be at least 1".into(),
        });
    }
    let lambda = BigRational::new(m as i64, 1) + nu.clone();
    let g = gamma(&BigReal::from_rational(&lambda, ctx), ctx)?;
    let power = pow_rational(b, &(lambda - BigRational::new(1, 1)), ctx);
    let v = &(&ctx.pi() * &power) / &(&sin_pi_rational(nu, ctx) * &g);
    Ok(if m % 2 == 1 { -v } else { v })
}

/// Analytic continuation of the Mellin transform, `Γ(1−λ) b^{λ−1}`. For
/// `λ < 1` this is the convergent integral; for non-integer `λ > 1` it is
/// the finite part.
pub fn finite_part_mellin(lambda: &BigRational, b: &BigReal, ctx: PrecisionContext) -> Result<BigReal> {
    check_b("finite_part_exp", b)?;
    let one = BigRational::new(1, 1);
    let g = gamma(&BigReal::from_rational(&(&one - lambda), ctx), ctx)?;
    Ok(&g * &pow_rational(b, &(lambda - &one), ctx))
}

/// The finite part over `[0, a]`,
/// `Σ_{k≥0} (−1)^k b^k a^{k+1−m−ν} / (k! (k+1−m−ν))`,
/// which differs from the full finite part by `∫_a^∞ e^{-bx} x^{-(m+ν)} dx`
/// and so converges to it like `e^{-ab}`.
///
/// The alternating terms peak near `k = ab`, so the sum runs with
/// `ab·log10(e)` extra digits.
pub fn finite_part_limitform(
    m: usize,
    nu: &BigRational,
    b: &BigReal,
    a: &BigReal,
    ctx: PrecisionContext,
) -> Result<BigReal> {
    check_nu("finite_part_limitform", nu)?;
    check_b("finite_part_limitform", b)?;
    if !a.is_positive() {
        return Err(Error::Domain {
            op: "finite_part_limitform",
            detail: "cutoff a must be positive".into(),
        });
    }
    let ab = (a * b).to_f64();
    let extra = (ab * std::f64::consts::LOG10_E).ceil() as u32 + 10;
    let wide = ctx.widened(extra);
    let (a, b) = (a.to_ctx(wide), b.to_ctx(wide));
    let shift = BigRational::new(1 - m as i64, 1) - nu.clone();
    let shift_r = BigReal::from_rational(&shift, wide);
    // term_k = (−ab)^k/k! · a^{shift} / (k + shift)
    let mut coeff = pow_rational(&a, &shift, wide);
    let minus_ab = -(&a * &b);
    let eps = wide.epsilon();
    let mut sum = wide.zero();
    let limit = 100 + 20 * ab.ceil() as usize + 10 * wide.decimal_digits() as usize;
    for k in 0..limit {
        if k > 0 {
            coeff = (&coeff * &minus_ab).div_i64(k as i64);
        }
        let term = &coeff / &(&wide.int(k as i64) + &shift_r);
        sum += &term;
        if (k as f64) > ab && term.abs() <= &eps * &sum.abs() {
            return Ok(sum.to_ctx(ctx));
        }
    }
    Err(Error::NonConvergence {
        op: "finite_part_limitform",
        terms: limit,
        detail: format!("a·b = {ab}"),
    })
}

/// `FP ∫ e^{-bx} x^{-(m+ν)} dx` for `m = 1..=max_m`, by the recurrence
/// `FP(m+1) = −b·FP(m) / (m+ν)` from a single Γ evaluation.
#[derive(Clone, Debug)]
pub struct FinitePartTable {
    nu: BigRational,
    b: BigReal,
    values: Vec<BigReal>,
}

impl FinitePartTable {
    pub fn new(nu: &BigRational, b: &BigReal, max_m: usize, ctx: PrecisionContext) -> Result<Self> {
        let first = finite_part_exp(1, nu, b, ctx)?;
        let nu_r = BigReal::from_rational(nu, ctx);
        let minus_b = -b.to_ctx(ctx);
        let mut values = Vec::with_capacity(max_m);
        values.push(first);
        for m in 1..max_m {
            let next = &(&values[m - 1] * &minus_b) / &(&ctx.int(m as i64) + &nu_r);
            values.push(next);
        }
        Ok(FinitePartTable {
            nu: nu.clone(),
            b: b.to_ctx(ctx),
            values,
        })
    }

    pub fn nu(&self) -> &BigRational {
        &self.nu
    }

    pub fn b(&self) -> &BigReal {
        &self.b
    }

    pub fn max_m(&self) -> usize {
        self.values.len()
    }

    /// Entry for `1 ≤ m ≤ max_m`.
    pub fn get(&self, m: usize) -> &BigReal {
        assert!(m >= 1, "finite parts start at m = 1");
        &self.values[m - 1]
    }
}

/// Head terms and the generator of the negative-power moments of one
/// density, all for the exponential rate `b = 1/2`.
#[derive(Clone, Debug)]
pub struct TailTerms {
    pub d: usize,
    pub kernel: Kernel,
    /// `A_j`, `B_j`, `C_j` for `j = 0..=d`.
    pub a: Vec<BigReal>,
    pub b: Vec<BigReal>,
    pub c: Vec<BigReal>,
    /// Power-series weights of `g(x) e^{x/2} = Σ_l w_l x^l`.
    weights: Vec<BigReal>,
    /// `M(−i) = Γ(1+i−ν) 2^{1+i−ν}` for `i = 0..=d`: the convergent pieces.
    convergent: Vec<BigReal>,
    fp: FinitePartTable,
    max_tail: usize,
    /// Generated series coefficients beyond the head, filled on first use.
    tail: Vec<OnceLock<BigReal>>,
}

impl TailTerms {
    /// Index `j` of `D_j` feeding term `k` of the series in `1/β`.
    pub fn moment_index(&self, k: usize) -> usize {
        match self.kernel {
            Kernel::Linear => k,
            Kernel::Quadratic => 2 * k + 1,
        }
    }

    /// Number of series terms covered by the head split.
    pub fn head_len(&self) -> usize {
        match self.kernel {
            Kernel::Linear => self.d + 1,
            Kernel::Quadratic => self.d.div_ceil(2),
        }
    }

    /// Most tail terms [`tail_sum`] may use before giving up.
    pub fn max_tail(&self) -> usize {
        self.max_tail
    }

    /// `M(j)`: finite part for `j ≥ 1`, convergent integral for `j ≤ 0`.
    fn m_value(&self, j: i64) -> &BigReal {
        if j >= 1 {
            self.fp.get(j as usize)
        } else {
            &self.convergent[(-j) as usize]
        }
    }

    /// `D_j = Σ_l w_l M(j+1−l)`, valid for every `j`; for `j ≤ d` the
    /// convergent pieces enter through `M` at non-positive arguments.
    pub fn d_term(&self, j: usize) -> BigReal {
        let mut acc = BigReal::zero_like(&self.weights[0]);
        for (l, w) in self.weights.iter().enumerate() {
            acc += &(w * self.m_value(j as i64 + 1 - l as i64));
        }
        acc
    }

    /// `A_j + B_j + C_j`.
    pub fn head(&self, j: usize) -> BigReal {
        &(&self.a[j] + &self.b[j]) + &self.c[j]
    }

    /// Coefficient of `(−1)^k / β^k`: the head split where it applies,
    /// the generator beyond it.
    pub fn series_coefficient(&self, k: usize) -> BigReal {
        let j = self.moment_index(k);
        if j <= self.d {
            return self.head(j);
        }
        match self.tail.get(k - self.head_len()) {
            Some(cell) => cell.get_or_init(|| self.d_term(j)).clone(),
            None => self.d_term(j),
        }
    }
}

/// Builds `A_j`, `B_j`, `C_j` (`j = 0..=d`) and the tables behind the `D_j`
/// generator for `density`.
///
/// With `F_l(a..b) = Σ_{m=a}^{b} c_m m!/(m−l)!` and `v_l = (−1)^l/(l!)²`:
/// `A_j = Σ_{l≤j} v_l F_l(l..j) FP(j−l+1)`,
/// `B_j = Σ_{l≤j} v_l F_l(j+1..d) FP(j−l+1)` and
/// `C_j = Σ_{l>j} v_l F_l(l..d) Γ(l−j−ν) 2^{l−j−ν}`.
pub fn assemble_head_terms(density: &ReconstructedDensity, ctx: PrecisionContext) -> Result<TailTerms> {
    let nu = &density.nu;
    check_nu("assemble_head_terms", nu)?;
    let d = density.d;
    let kernel = density.kernel;
    let max_tail = 10 * (d + 10);
    let last_series = match kernel {
        Kernel::Linear => d + 1 + max_tail,
        Kernel::Quadratic => d.div_ceil(2) + max_tail,
    };
    let last_j = match kernel {
        Kernel::Linear => last_series,
        Kernel::Quadratic => 2 * last_series + 1,
    };
    let half = ctx.one().div_i64(2);
    let fp = FinitePartTable::new(nu, &half, last_j + 2, ctx)?;

    // convergent[i] = M(−i) = Γ(1+i−ν) 2^{1+i−ν}
    let one_minus_nu = BigRational::new(1, 1) - nu.clone();
    let ladder = GammaLadder::new(&one_minus_nu, d + 1, ctx)?;
    let mut two_pow = pow_rational(&ctx.int(2), &one_minus_nu, ctx);
    let mut convergent = Vec::with_capacity(d + 1);
    for i in 0..=d {
        convergent.push(ladder.get(i) * &two_pow);
        two_pow = two_pow.mul_i64(2);
    }

    let c: Vec<BigReal> = density.c.iter().map(|v| v.to_ctx(ctx)).collect();
    // prefix[l][n − l] = Σ_{m=l}^{n} c_m m!/(m−l)!
    let mut prefix: Vec<Vec<BigReal>> = Vec::with_capacity(d + 1);
    let mut ff: Vec<BigReal> = vec![ctx.one(); d + 1];
    for l in 0..=d {
        if l > 0 {
            for (m, f) in ff.iter_mut().enumerate().skip(l) {
                *f = f.mul_i64((m - l + 1) as i64);
            }
        }
        let mut acc = ctx.zero();
        let row: Vec<BigReal> = (l..=d)
            .map(|m| {
                acc += &(&c[m] * &ff[m]);
                acc.clone()
            })
            .collect();
        prefix.push(row);
    }
    let range = |l: usize, lo: usize, hi: usize| -> BigReal {
        // Σ_{m=lo}^{hi} with lo ≥ l
        if hi < lo {
            return ctx.zero();
        }
        let upper = &prefix[l][hi - l];
        if lo == l {
            upper.clone()
        } else {
            upper - &prefix[l][lo - 1 - l]
        }
    };
    let mut v = Vec::with_capacity(d + 1);
    let mut fact = ctx.one();
    for l in 0..=d {
        if l > 0 {
            fact = fact.mul_i64(l as i64);
        }
        let inv = (&fact * &fact).recip();
        v.push(if l % 2 == 1 { -inv } else { inv });
    }
    let weights: Vec<BigReal> = (0..=d).map(|l| &v[l] * &range(l, l, d)).collect();

    let mut a_terms = Vec::with_capacity(d + 1);
    let mut b_terms = Vec::with_capacity(d + 1);
    let mut c_terms = Vec::with_capacity(d + 1);
    for j in 0..=d {
        let mut a = ctx.zero();
        let mut b = ctx.zero();
        for (l, vl) in v.iter().enumerate().take(j + 1) {
            let f = fp.get(j - l + 1);
            a += &(&(vl * &range(l, l, j)) * f);
            b += &(&(vl * &range(l, j + 1, d)) * f);
        }
        let mut cc = ctx.zero();
        for l in j + 1..=d {
            cc += &(&weights[l] * &convergent[l - j - 1]);
        }
        a_terms.push(a);
        b_terms.push(b);
        c_terms.push(cc);
    }
    Ok(TailTerms {
        d,
        kernel,
        a: a_terms,
        b: b_terms,
        c: c_terms,
        weights,
        convergent,
        fp,
        max_tail,
        tail: (0..max_tail).map(|_| OnceLock::new()).collect(),
    })
}

/// `Σ_k (−1)^k T_k / β^k` with `T_k = μ_{−(k+1)}` (linear kernel) or
/// `μ_{−(2k+2)}` (quadratic kernel): the head terms first, then generated
/// terms until three in a row fall below `tol·|partial sum|`.
///
/// Returns the sum and the number of generated tail terms used.
pub fn tail_sum(
    terms: &TailTerms,
    beta: &BigReal,
    tol: &BigReal,
    ctx: PrecisionContext,
) -> Result<(BigReal, usize)> {
    if !beta.is_positive() {
        return Err(Error::Domain {
            op: "tail_sum",
            detail: "beta must be positive".into(),
        });
    }
    if !tol.is_positive() {
        return Err(Error::Domain {
            op: "tail_sum",
            detail: "tolerance must be positive".into(),
        });
    }
    let step = -beta.to_ctx(ctx).recip();
    let mut scale = ctx.one();
    let mut sum = ctx.zero();
    let head = terms.head_len();
    for k in 0..head {
        sum += &(&terms.series_coefficient(k) * &scale);
        scale = &scale * &step;
    }
    let mut small = 0;
    for used in 1..=terms.max_tail {
        let k = head + used - 1;
        let t = &terms.series_coefficient(k) * &scale;
        sum += &t;
        scale = &scale * &step;
        if t.abs() < tol * &sum.abs() {
            small += 1;
            if small == 3 {
                return Ok((sum, used));
            }
        } else {
            small = 0;
        }
    }
    Err(Error::NonConvergence {
        op: "tail_sum",
        terms: terms.max_tail,
        detail: format!(
            "beta = {} too small for d = {} at {} digits",
            beta.to_sig_string(6),
            terms.d,
            ctx.decimal_digits()
        ),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ctx() -> PrecisionContext {
        PrecisionContext::new(50).unwrap()
    }

    fn q(n: i64, d: i64) -> BigRational {
        BigRational::new(n, d)
    }

    fn rel(a: &BigReal, b: &BigReal) -> BigReal {
        &(a - b).abs() / &b.abs()
    }

    #[test]
    fn closed_form_example() {
        let c = ctx();
        let v = finite_part_exp(1, &q(1, 2), &c.one().div_i64(2), c).unwrap();
        let expected = -c.pi().mul_i64(2).sqrt();
        assert!(rel(&v, &expected) < c.epsilon());
        assert!(v.to_sig_string(11).starts_with("-2.5066282746"));
    }

    #[test]
    fn closed_form_matches_mellin() {
        let c = ctx();
        for (m, nu, b) in [(1, q(1, 2), 2), (2, q(1, 2), 1), (5, q(-1, 3), 3)] {
            let b = c.int(b).recip();
            let lambda = q(m as i64, 1) + nu.clone();
            let closed = finite_part_exp(m, &nu, &b, c).unwrap();
            let mellin = finite_part_mellin(&lambda, &b, c).unwrap();
            assert!(rel(&closed, &mellin) < c.epsilon());
        }
    }

    #[test]
    fn sign_alternates() {
        let c = ctx();
        let b = c.one().div_i64(2);
        let f1 = finite_part_exp(1, &q(1, 2), &b, c).unwrap();
        let f2 = finite_part_exp(2, &q(1, 2), &b, c).unwrap();
        assert!(f1.is_negative() && f2.is_positive());
    }

    #[test]
    fn domain_errors() {
        let c = ctx();
        let b = c.one();
        assert!(matches!(finite_part_exp(1, &q(0, 1), &b, c), Err(Error::Domain { .. })));
        assert!(finite_part_exp(1, &q(1, 1), &b, c).is_err());
        assert!(finite_part_exp(1, &q(1, 3), &c.int(-1), c).is_err());
        assert!(finite_part_limitform(1, &q(0, 1), &b, &b, c).is_err());
    }

    #[test]
    fn limit_form_converges() {
        let c = ctx();
        let nu = q(1, 3);
        let b = c.one().div_i64(2);
        let exact = finite_part_exp(1, &nu, &b, c).unwrap();
        let e50 = rel(&finite_part_limitform(1, &nu, &b, &c.int(50), c).unwrap(), &exact);
        let e100 = rel(&finite_part_limitform(1, &nu, &b, &c.int(100), c).unwrap(), &exact);
        let e200 = rel(&finite_part_limitform(1, &nu, &b, &c.int(200), c).unwrap(), &exact);
        assert!(e50 > e100);
        assert!(e200 < PrecisionContext::new(30).unwrap().epsilon());
        let half = q(1, 2);
        let exact = finite_part_exp(1, &half, &b, c).unwrap();
        let e = rel(&finite_part_limitform(1, &half, &b, &c.int(100), c).unwrap(), &exact);
        assert!(e < PrecisionContext::new(30).unwrap().epsilon().mul_i64(10_000_000_000));
    }

    #[test]
    fn table_matches_closed_form() {
        let c = ctx();
        let nu = q(-1, 2);
        let b = c.int(2);
        let t = FinitePartTable::new(&nu, &b, 30, c).unwrap();
        for m in [1, 2, 7, 30] {
            let direct = finite_part_exp(m, &nu, &b, c).unwrap();
            assert!(rel(t.get(m), &direct) < c.epsilon());
        }
    }

    fn density(c: Vec<BigReal>, nu: BigRational, kernel: Kernel) -> ReconstructedDensity {
        ReconstructedDensity::from_coefficients(nu, kernel, c, ctx()).unwrap()
    }

    #[test]
    fn single_coefficient_head() {
        let c = ctx();
        let nu = q(1, 3);
        let t = assemble_head_terms(&density(vec![c.one()], nu.clone(), Kernel::Linear), c).unwrap();
        let fp1 = finite_part_exp(1, &nu, &c.one().div_i64(2), c).unwrap();
        assert!(rel(&t.a[0], &fp1) < c.epsilon());
        assert!(t.b[0].is_zero() && t.c[0].is_zero());
    }

    #[test]
    fn c0_for_first_laguerre_function() {
        let c = ctx();
        let nu = q(1, 5);
        let t = assemble_head_terms(&density(vec![c.zero(), c.one()], nu.clone(), Kernel::Linear), c)
            .unwrap();
        let one_minus = q(4, 5);
        let g = gamma(&BigReal::from_rational(&one_minus, c), c).unwrap();
        let expected = -(&g * &pow_rational(&c.int(2), &one_minus, c));
        assert!(rel(&t.c[0], &expected) < c.epsilon());
    }

    #[test]
    fn head_split_identity() {
        let c = ctx();
        let coeffs: Vec<BigReal> = [3, -1, 4, -1, 5, -9].iter().map(|&v| c.int(v).div_i64(7)).collect();
        let t = assemble_head_terms(&density(coeffs, q(-1, 3), Kernel::Linear), c).unwrap();
        for j in 0..=3 {
            let d = t.d_term(j);
            assert!((&t.head(j) - &d).abs() < &c.epsilon() * &d.abs().mul_i64(1000), "j = {j}");
        }
    }

    #[test]
    fn tail_sum_single_term_density() {
        // c = (1): Σ_k (−1)^k FP(k+1)/β^k summed directly
        let c = ctx();
        let nu = q(1, 3);
        let t = assemble_head_terms(&density(vec![c.one()], nu.clone(), Kernel::Linear), c).unwrap();
        let beta = c.int(10);
        let (v, used) = tail_sum(&t, &beta, &c.epsilon(), c).unwrap();
        assert!(used >= 3);
        let fp = FinitePartTable::new(&nu, &c.one().div_i64(2), 200, c).unwrap();
        let mut direct = c.zero();
        let mut scale = c.one();
        for k in 0..100 {
            direct += &(fp.get(k + 1) * &scale);
            scale = &scale * &(-beta.recip());
        }
        assert!(rel(&v, &direct) < PrecisionContext::new(40).unwrap().epsilon());
        let (huge, _) = tail_sum(&t, &c.int(10).powi(40), &c.epsilon(), c).unwrap();
        assert!(rel(&huge, &t.a[0]) < PrecisionContext::new(39).unwrap().epsilon());
    }

    #[test]
    fn tail_sum_rejects_bad_input() {
        let c = ctx();
        let t = assemble_head_terms(&density(vec![c.one()], q(1, 3), Kernel::Linear), c).unwrap();
        assert!(tail_sum(&t, &c.zero(), &c.epsilon(), c).is_err());
        assert!(tail_sum(&t, &c.one(), &c.zero(), c).is_err());
    }

    #[test]
    fn quadratic_uses_odd_indices() {
        let c = ctx();
        let coeffs: Vec<BigReal> = [2, 1, -1, 3].iter().map(|&v| c.int(v)).collect();
        let t = assemble_head_terms(&density(coeffs, q(-1, 2), Kernel::Quadratic), c).unwrap();
        assert_eq!(t.head_len(), 2);
        assert_eq!(t.moment_index(1), 3);
        assert!((&t.series_coefficient(1) - &t.d_term(3)).abs() < &c.epsilon() * &t.d_term(3).abs().mul_i64(100));
    }
}
