//! Perturbation coefficients from finite-basis diagonalization.
//!
//! The ground-state energy of the truncated Hamiltonian is computed by
//! shifted inverse iteration at a handful of tiny couplings and the low
//! Taylor coefficients are read off by polynomial interpolation. The
//! truncated eigenvalue is analytic in the coupling and its low-order Taylor
//! coefficients coincide with the exact ones, so the only errors are
//! interpolation truncation (negligible at these couplings) and rounding
//! (covered by the working precision).
//!
//! * Oscillators `p² + x² + β x^n`: harmonic number basis with
//!   `x = (a + a†)/√2`, even states only for even `n`.
//! * Funnel `p²/2 − 1/r + β r`: the non-orthogonal s-wave basis
//!   `r^j e^{-r}`, whose matrix elements are exact factorial ratios.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::moments::SystemId;
use crate::numeric::{lu_solve, BigReal, LuFactorization, Matrix, PrecisionContext};

/// Number of oscillator basis states.
pub const OSCILLATOR_BASIS: usize = 200;
/// Number of `r^j e^{-r}` functions for the funnel.
pub const FUNNEL_BASIS: usize = 40;
/// Interpolation nodes per fit.
const NODES: usize = 12;

/// `⟨m|x^power|n⟩` for all `m`, by applying `x` to `|n⟩` `power` times.
fn x_power_column(n: usize, power: usize, ctx: PrecisionContext) -> BTreeMap<usize, BigReal> {
    let inv_sqrt2 = ctx.int(2).sqrt().recip();
    let mut v = BTreeMap::new();
    v.insert(n, ctx.one());
    for _ in 0..power {
        let mut next: BTreeMap<usize, BigReal> = BTreeMap::new();
        for (&k, c) in &v {
            let up = c * &ctx.int(k as i64 + 1).sqrt();
            let e = next.entry(k + 1).or_insert_with(|| ctx.zero());
            *e = &*e + &up;
            if k > 0 {
                let down = c * &ctx.int(k as i64).sqrt();
                let e = next.entry(k - 1).or_insert_with(|| ctx.zero());
                *e = &*e + &down;
            }
        }
        v = next.into_iter().map(|(k, c)| (k, c * &inv_sqrt2)).collect();
    }
    v
}

/// Symmetric banded matrix stored densely; only the band is touched.
struct Banded {
    a: Vec<Vec<BigReal>>,
    width: usize,
}

impl Banded {
    fn mul(&self, x: &[BigReal], ctx: PrecisionContext) -> Vec<BigReal> {
        let n = x.len();
        (0..n)
            .map(|i| {
                let lo = i.saturating_sub(self.width);
                let hi = (i + self.width + 1).min(n);
                (lo..hi).fold(ctx.zero(), |s, j| s + &self.a[i][j] * &x[j])
            })
            .collect()
    }

    /// Solves `(A − σ)y = x` by banded elimination without pivoting;
    /// `σ` sits below the spectrum, so the shifted matrix is definite.
    fn shifted_solver(&self, sigma: &BigReal) -> impl Fn(&[BigReal]) -> Vec<BigReal> {
        let n = self.a.len();
        let w = self.width;
        let mut u = self.a.clone();
        for (i, row) in u.iter_mut().enumerate() {
            row[i] = &row[i] - sigma;
        }
        let mut l = vec![Vec::new(); n];
        for k in 0..n {
            let end = (k + w + 1).min(n);
            let (upper, lower) = u.split_at_mut(k + 1);
            let pivot = &upper[k];
            for (row, li) in lower[..end - k - 1].iter_mut().zip(&mut l[k + 1..end]) {
                let f = &row[k] / &pivot[k];
                for (x, p) in row[k..end].iter_mut().zip(&pivot[k..end]) {
                    *x = &*x - &(&f * p);
                }
                li.push((k, f));
            }
        }
        move |x: &[BigReal]| {
            let mut y = x.to_vec();
            for i in 0..n {
                for (k, f) in &l[i] {
                    let t = f * &y[*k];
                    y[i] = &y[i] - &t;
                }
            }
            for i in (0..n).rev() {
                for j in i + 1..(i + w + 1).min(n) {
                    let t = &u[i][j] * &y[j];
                    y[i] = &y[i] - &t;
                }
                y[i] = &y[i] / &u[i][i];
            }
            y
        }
    }
}

fn dot(a: &[BigReal], b: &[BigReal], ctx: PrecisionContext) -> BigReal {
    a.iter().zip(b).fold(ctx.zero(), |s, (x, y)| s + x * y)
}

fn normalize(v: Vec<BigReal>, ctx: PrecisionContext) -> Vec<BigReal> {
    let norm = dot(&v, &v, ctx).sqrt();
    v.into_iter().map(|x| x / &norm).collect()
}

const MAX_ITERATIONS: usize = 5000;

fn not_converged(what: &str) -> Error {
    Error::NonConvergence {
        op: "diagonalization",
        terms: MAX_ITERATIONS,
        detail: format!("inverse iteration for {what}"),
    }
}

/// Lowest eigenvalue of `H0 + g·V` (banded, symmetric) by inverse
/// iteration at a fixed shift `σ`.
fn banded_ground_state(h: &Banded, sigma: &BigReal, ctx: PrecisionContext) -> Result<BigReal> {
    let n = h.a.len();
    let solve = h.shifted_solver(sigma);
    let mut x = vec![ctx.zero(); n];
    x[0] = ctx.one();
    let mut last = ctx.zero();
    let tol = ctx.epsilon();
    for _ in 0..MAX_ITERATIONS {
        x = normalize(solve(&x), ctx);
        let rq = dot(&x, &h.mul(&x, ctx), ctx);
        if (&rq - &last).abs() <= &tol * &rq.abs() {
            return Ok(rq);
        }
        last = rq;
    }
    Err(not_converged("oscillator"))
}

/// Solves the Vandermonde system `Σ_k f_k t_j^k = y_j`, `t_j = j`, and
/// returns `e_k = f_k / h^k`.
fn taylor_from_samples(samples: &[BigReal], h: &BigReal, ctx: PrecisionContext) -> Result<Vec<BigReal>> {
    let k = samples.len();
    let rows = (1..=k)
        .map(|j| (1..=k).map(|p| ctx.int(j as i64).powi(p as i32)).collect())
        .collect();
    let f = lu_solve(&Matrix::from_rows(rows)?, samples, ctx)?;
    Ok(f.into_iter()
        .enumerate()
        .map(|(i, fk)| fk / h.powi(i as i32 + 1))
        .collect())
}

/// `E_1 … E_orders` of `p² + x² + β x^power`, in powers of `β` (for the
/// odd power, in powers of `β²`).
pub fn oscillator_series(power: usize, orders: usize, ctx: PrecisionContext) -> Result<Vec<BigReal>> {
    if orders == 0 || orders > NODES {
        return Err(Error::Validation {
            op: "diagonalization",
            detail: format!("orders must be in 1..={NODES}"),
        });
    }
    let even = power.is_multiple_of(2);
    let states: Vec<usize> = (0..OSCILLATOR_BASIS)
        .map(|i| if even { 2 * i } else { i })
        .collect();
    let index: BTreeMap<usize, usize> = states.iter().enumerate().map(|(i, &s)| (s, i)).collect();
    let n = states.len();
    let mut v = vec![vec![ctx.zero(); n]; n];
    for (j, &s) in states.iter().enumerate() {
        for (m, c) in x_power_column(s, power, ctx) {
            if let Some(&i) = index.get(&m) {
                v[i][j] = c;
            }
        }
    }
    let width = if even { power / 2 } else { power };
    // Couplings: β_j = j·h, or β_j = √(j·h) for the odd power, so that the
    // fit variable is always s = j·h.
    let h = match power {
        3 => ctx.int(10).powi(-8),
        4 => ctx.int(10).powi(-6),
        _ => ctx.int(10).powi(-7),
    };
    let mut samples = Vec::with_capacity(NODES);
    for j in 1..=NODES {
        let s = &h * &ctx.int(j as i64);
        let g = if even { s.clone() } else { s.sqrt() };
        let a = (0..n)
            .map(|r| {
                (0..n)
                    .map(|c| {
                        let base = if r == c {
                            ctx.int(2 * states[r] as i64 + 1)
                        } else {
                            ctx.zero()
                        };
                        base + &g * &v[r][c]
                    })
                    .collect()
            })
            .collect();
        let sigma = ctx.one() - ctx.int(4).recip();
        let e = banded_ground_state(&Banded { a, width }, &sigma, ctx)?;
        samples.push(e - ctx.one());
    }
    Ok(taylor_from_samples(&samples, &h, ctx)?.into_iter().take(orders).collect())
}

/// `E_1 … E_orders` of the s-wave `p²/2 − 1/r + β r` (`E_0 = −1/2`).
pub fn funnel_series(orders: usize, ctx: PrecisionContext) -> Result<Vec<BigReal>> {
    if orders == 0 || orders > NODES {
        return Err(Error::Validation {
            op: "diagonalization",
            detail: format!("orders must be in 1..={NODES}"),
        });
    }
    let n = FUNNEL_BASIS;
    // I(k) = ∫ r^k e^{-2r} dr = k!/2^{k+1}
    let mut integral = vec![ctx.one().div_i64(2)];
    for k in 1..=2 * n + 3 {
        let prev = integral[k - 1].clone();
        integral.push(prev.mul_i64(k as i64).div_i64(2));
    }
    let entry = |f: &dyn Fn(usize, usize) -> BigReal| -> Matrix {
        let rows = (0..n).map(|i| (0..n).map(|j| f(i, j)).collect()).collect();
        Matrix::from_rows(rows).expect("square")
    };
    let overlap = entry(&|i, j| integral[i + j + 2].clone());
    let h0 = entry(&|i, j| {
        let s = i + j;
        let kinetic = ctx.int((i * j) as i64) * &integral[s] - ctx.int(s as i64) * &integral[s + 1]
            + &integral[s + 2];
        kinetic.div_i64(2) - &integral[s + 1]
    });
    let linear = entry(&|i, j| integral[i + j + 3].clone());
    let h = ctx.int(10).powi(-6);
    let tol = ctx.epsilon();
    let mut samples = Vec::with_capacity(NODES);
    for j in 1..=NODES {
        let beta = &h * &ctx.int(j as i64);
        let estimate = ctx.int(-1).div_i64(2) + beta.mul_i64(3).div_i64(2);
        let sigma = estimate - ctx.one().div_i64(20);
        let mut shifted = Matrix::zeros(n, n, ctx);
        let mut ham = Matrix::zeros(n, n, ctx);
        for r in 0..n {
            for c in 0..n {
                ham[(r, c)] = &h0[(r, c)] + &(&beta * &linear[(r, c)]);
                shifted[(r, c)] = &ham[(r, c)] - &(&sigma * &overlap[(r, c)]);
            }
        }
        let lu = LuFactorization::factor(&shifted, ctx)?;
        let mut x = vec![ctx.zero(); n];
        x[0] = ctx.one();
        let mut last = ctx.zero();
        let mut energy = None;
        for _ in 0..MAX_ITERATIONS {
            let y = lu.solve(&overlap.mul_vec(&x))?;
            let sy = overlap.mul_vec(&y);
            let norm = dot(&y, &sy, ctx).sqrt();
            x = y.into_iter().map(|v| v / &norm).collect();
            let rq = dot(&x, &ham.mul_vec(&x), ctx);
            if (&rq - &last).abs() <= &tol * &rq.abs() {
                energy = Some(rq);
                break;
            }
            last = rq;
        }
        let e = energy.ok_or_else(|| not_converged("funnel"))?;
        samples.push(e + ctx.one().div_i64(2));
    }
    Ok(taylor_from_samples(&samples, &h, ctx)?.into_iter().take(orders).collect())
}

/// The system's RS coefficients at orders `1..=orders`, in the same
/// convention as the generators.
pub fn diagonalization_rs(id: SystemId, orders: usize, ctx: PrecisionContext) -> Result<Vec<BigReal>> {
    match id {
        SystemId::Quartic => oscillator_series(4, orders, ctx),
        SystemId::Sextic => oscillator_series(6, orders, ctx),
        // e_{0,j} = (−1)^j E_{2j} of the Hermitian cubic.
        SystemId::PtCubic => Ok(oscillator_series(3, orders, ctx)?
            .into_iter()
            .enumerate()
            .map(|(i, e)| if i % 2 == 0 { -e } else { e })
            .collect()),
        // ε_k = −2(−1)^k E_k
        SystemId::Funnel => Ok(funnel_series(orders, ctx)?
            .into_iter()
            .enumerate()
            .map(|(i, e)| if i % 2 == 0 { e.mul_i64(2) } else { e.mul_i64(-2) })
            .collect()),
        SystemId::Custom => Err(Error::Validation {
            op: "diagonalization",
            detail: "custom series have no Hamiltonian".into(),
        }),
    }
}
