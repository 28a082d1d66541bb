//! The acceptance checks, each returning a pass/fail report.
//!
//! A [`Suite`] remembers every pipeline run it makes so that the moment
//! residual check can cover all of them.

use std::fmt;
use std::sync::Mutex;
use std::time::{Duration, Instant};

use crate::error::Result;
use crate::finite_part::{finite_part_exp, finite_part_limitform, finite_part_mellin};
use crate::moments::{generate_moments, generate_rs, GeneratorConfig, Kernel, SystemId};
use crate::numeric::{recommended_digits, BigRational, BigReal, PrecisionContext};
use crate::pade::EnergyPade;
use crate::quadrature::stieltjes_quadrature;
use crate::reconstruction::ReconstructedDensity;
use crate::summation::{energy, generalized_value, stieltjes_value, EvaluationRequest, ExpansionResult};

use super::oracle::diagonalization_rs;
use super::reference::{Reference, PADE_VALUES, TABLE_VALUES};

/// Outcome of one acceptance criterion.
#[derive(Clone, Debug)]
pub struct CriterionReport {
    pub id: u32,
    pub title: &'static str,
    pub passed: bool,
    /// One line per individual check.
    pub details: Vec<String>,
    pub elapsed: Duration,
}

impl fmt::Display for CriterionReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} criterion {}: {} ({:.1} s)",
            if self.passed { "PASS" } else { "FAIL" },
            self.id,
            self.title,
            self.elapsed.as_secs_f64()
        )
    }
}

/// Residual record of one density solve.
#[derive(Clone, Debug)]
pub struct RunRecord {
    pub system: SystemId,
    pub moments: usize,
    pub residual: BigReal,
    pub bound: BigReal,
}

pub const CRITERIA: [(u32, &str); 9] = [
    (1, "PT-symmetric cubic table values"),
    (2, "quartic table values"),
    (3, "funnel table values"),
    (4, "sextic table values and Padé plateau"),
    (5, "weak-coupling cancellation and Padé agreement"),
    (6, "expansion against direct quadrature"),
    (7, "finite-part identities"),
    (8, "moment round trip and perturbation coefficients"),
    (9, "strong-coupling exponents"),
];

/// Collects the details of one criterion and tracks whether all passed.
struct Checks {
    details: Vec<String>,
    passed: bool,
}

impl Checks {
    fn new() -> Self {
        Checks {
            details: Vec::new(),
            passed: true,
        }
    }

    fn record(&mut self, ok: bool, line: String) {
        self.passed &= ok;
        self.details.push(format!("{} {line}", if ok { "ok  " } else { "FAIL" }));
    }

    fn error(&mut self, what: &str, e: crate::Error) {
        self.record(false, format!("{what}: {e}"));
    }
}

/// Runs criteria and keeps the residuals of every density solve.
#[derive(Default)]
pub struct Suite {
    runs: Mutex<Vec<RunRecord>>,
}

fn ctx_for(moments: usize) -> PrecisionContext {
    PrecisionContext::new(recommended_digits(moments - 1)).expect("at least 100 digits")
}

impl Suite {
    pub fn new() -> Self {
        Suite::default()
    }

    pub fn runs(&self) -> Vec<RunRecord> {
        self.runs.lock().expect("run log").clone()
    }

    /// The full pipeline for `moments` moments of `system` at `betas`.
    pub fn evaluate(&self, system: SystemId, moments: usize, betas: &[BigReal]) -> Result<Vec<ExpansionResult>> {
        let ctx = ctx_for(moments);
        let seq = generate_moments(system, moments, &GeneratorConfig::default(), ctx)?;
        let mut request = EvaluationRequest::new(seq, betas.to_vec());
        request.output_digits = 20;
        let results = energy(&request)?;
        let mut log = self.runs.lock().expect("run log");
        for r in &results {
            log.push(RunRecord {
                system,
                moments,
                residual: r.moment_residual.clone(),
                bound: r.moment_residual_bound.clone(),
            });
        }
        Ok(results)
    }

    fn table(&self, system: SystemId, checks: &mut Checks) {
        let rows: Vec<&Reference> = TABLE_VALUES.iter().filter(|r| r.system == system).collect();
        let mut sizes: Vec<usize> = rows.iter().map(|r| r.moments).collect();
        sizes.dedup();
        for n in sizes {
            let group: Vec<&&Reference> = rows.iter().filter(|r| r.moments == n).collect();
            let ctx = ctx_for(n);
            let betas: Result<Vec<BigReal>> = group.iter().map(|r| r.beta(ctx)).collect();
            let results = match betas.and_then(|b| self.evaluate(system, n, &b)) {
                Ok(r) => r,
                Err(e) => {
                    checks.error(&format!("{system} with {n} moments"), e);
                    continue;
                }
            };
            for (r, res) in group.iter().zip(&results) {
                compare(checks, r, &res.total, "");
            }
        }
    }

    fn table_criterion(&self, system: SystemId) -> Checks {
        let mut checks = Checks::new();
        self.table(system, &mut checks);
        checks
    }

    fn sextic(&self) -> Checks {
        let mut checks = self.table_criterion(SystemId::Sextic);
        for p in PADE_VALUES {
            let r = p.as_reference();
            let ctx = PrecisionContext::new(100).expect("valid");
            let value = generate_moments(p.system, r.moments, &GeneratorConfig::default(), ctx)
                .and_then(|seq| EnergyPade::build(&seq, p.n, p.m, ctx))
                .and_then(|pade| pade.eval(&r.beta(ctx)?));
            match value {
                Ok(v) => compare(&mut checks, &r, &v, &format!(" Padé [{}/{}]", p.n, p.m)),
                Err(e) => checks.error("Padé", e),
            }
        }
        checks
    }

    fn weak_coupling(&self) -> Checks {
        let mut checks = Checks::new();
        let run = || -> Result<(ExpansionResult, BigReal)> {
            let ctx = ctx_for(102);
            let beta = BigReal::parse("0.1", ctx)?;
            let fp = self.evaluate(SystemId::PtCubic, 100, std::slice::from_ref(&beta))?.remove(0);
            let seq = generate_moments(SystemId::PtCubic, 102, &GeneratorConfig::default(), ctx)?;
            let pade = EnergyPade::build(&seq, 50, 51, ctx)?.eval(&beta)?;
            Ok((fp, pade))
        };
        match run() {
            Ok((fp, pade)) => {
                let scale = if fp.head_tail.abs() > fp.correction.abs() {
                    fp.head_tail.abs()
                } else {
                    fp.correction.abs()
                };
                let rel = (&fp.head_tail + &fp.correction).abs() / scale;
                checks.record(
                    rel.to_f64() < 1e-6,
                    format!(
                        "head_tail {} and correction {} cancel to {} of their size",
                        fp.head_tail.to_sig_string(6),
                        fp.correction.to_sig_string(6),
                        rel.to_sig_string(3)
                    ),
                );
                let diff = (&fp.total - &pade).abs();
                checks.record(
                    diff.to_f64() <= 1e-9,
                    format!(
                        "E(0.1) = {} vs Padé [50/51] {} (difference {})",
                        fp.total.to_sig_string(20),
                        pade.to_sig_string(20),
                        diff.to_sig_string(3)
                    ),
                );
            }
            Err(e) => checks.error("PT cubic at beta = 0.1", e),
        }
        checks
    }

    fn moment_round_trip(&self) -> Checks {
        let mut checks = Checks::new();
        if self.runs().is_empty() {
            for system in SystemId::BUILTIN {
                let mut scratch = Checks::new();
                self.table(system, &mut scratch);
            }
        }
        let runs = self.runs();
        let worst = runs.iter().filter(|r| r.residual >= r.bound).count();
        checks.record(
            worst == 0 && !runs.is_empty(),
            format!("{} evaluations, {worst} with moment residual above its bound", runs.len()),
        );
        for (system, moments) in distinct_runs(&runs) {
            let r = runs
                .iter()
                .filter(|r| r.system == system && r.moments == moments)
                .max_by(|a, b| (&a.residual / &a.bound).partial_cmp(&(&b.residual / &b.bound)).expect("finite"))
                .expect("non-empty");
            checks.details.push(format!(
                "     {system} with {moments} moments: residual {} (bound {})",
                r.residual.to_sig_string(3),
                r.bound.to_sig_string(3)
            ));
        }
        let ctx = PrecisionContext::new(150).expect("valid");
        for system in SystemId::BUILTIN {
            let compared = generate_rs(system, 6, &GeneratorConfig::default()).and_then(|rs| {
                // Drop the funnel's ε_0 so both lists start at order 1.
                let generated = &rs.values.rounded(ctx)[1 - rs.first_index..];
                let oracle = diagonalization_rs(system, 6, ctx)?;
                Ok(generated
                    .iter()
                    .zip(&oracle)
                    .map(|(g, o)| ((g - o) / g).abs().to_f64())
                    .fold(0f64, f64::max))
            });
            match compared {
                Ok(worst) => checks.record(
                    worst < 1e-8,
                    format!("{system} orders 1-6 vs diagonalization: max relative difference {worst:.1e}"),
                ),
                Err(e) => checks.error(&format!("{system} diagonalization"), e),
            }
        }
        checks
    }

    fn strong_coupling(&self) -> Checks {
        let mut checks = Checks::new();
        let exponents = ["1e8", "1e9", "1e10", "1e11", "1e12"];
        for system in SystemId::BUILTIN {
            let ctx = ctx_for(100);
            let lambda = match crate::moments::SystemSpec::builtin(system) {
                Ok(s) => s.strong_exponent.to_f64(),
                Err(e) => {
                    checks.error(system.name(), e);
                    continue;
                }
            };
            let betas: Vec<BigReal> = exponents
                .iter()
                .map(|s| BigReal::parse(s, ctx).expect("literal"))
                .collect();
            match self.evaluate(system, 100, &betas) {
                Ok(results) => {
                    let pts: Vec<(f64, f64)> = results
                        .iter()
                        .map(|r| (r.beta.log10_abs(), r.total.log10_abs()))
                        .collect();
                    let slope = least_squares_slope(&pts);
                    let rel = (slope - lambda).abs() / lambda;
                    checks.record(
                        rel < 0.01,
                        format!("{system}: slope {slope:.5} vs exponent {lambda:.5} ({:.2}% off)", 100.0 * rel),
                    );
                }
                Err(e) => checks.error(system.name(), e),
            }
        }
        checks
    }

    /// Runs criterion `id` (1–9).
    pub fn run(&self, id: u32) -> Option<CriterionReport> {
        let (_, title) = *CRITERIA.iter().find(|(i, _)| *i == id)?;
        let start = Instant::now();
        let mut checks = match id {
            1 => self.table_criterion(SystemId::PtCubic),
            2 => self.table_criterion(SystemId::Quartic),
            3 => self.table_criterion(SystemId::Funnel),
            4 => self.sextic(),
            5 => self.weak_coupling(),
            6 => quadrature_oracle(),
            7 => finite_part_identities(),
            8 => self.moment_round_trip(),
            _ => self.strong_coupling(),
        };
        let elapsed = start.elapsed();
        let budget = match id {
            1 | 6 => Some(60),
            2 => Some(120),
            _ => None,
        };
        if let Some(limit) = budget {
            checks.record(
                elapsed.as_secs() < limit,
                format!("runtime {:.1} s (limit {limit} s)", elapsed.as_secs_f64()),
            );
        }
        Some(CriterionReport {
            id,
            title,
            passed: checks.passed,
            details: checks.details,
            elapsed,
        })
    }

    /// Runs every criterion in order.
    pub fn run_all(&self) -> Vec<CriterionReport> {
        CRITERIA.iter().filter_map(|(id, _)| self.run(*id)).collect()
    }
}

fn distinct_runs(runs: &[RunRecord]) -> Vec<(SystemId, usize)> {
    let mut keys: Vec<(SystemId, usize)> = Vec::new();
    for r in runs {
        if !keys.contains(&(r.system, r.moments)) {
            keys.push((r.system, r.moments));
        }
    }
    keys
}

fn compare(checks: &mut Checks, r: &Reference, value: &BigReal, label: &str) {
    let ctx = PrecisionContext::new(60).expect("valid");
    let (expected, tol) = match r.expected(ctx) {
        Ok(e) => (e, r.tolerance(ctx)),
        Err(e) => return checks.error(r.value, e),
    };
    let diff = (&value.to_ctx(ctx) - &expected).abs();
    let shown = r.value.len() + 3;
    checks.record(
        diff <= tol,
        format!(
            "{}{label}, {} moments, beta = {}: {} vs {}",
            r.system,
            r.moments,
            r.beta,
            value.to_short_string(shown),
            r.value
        ),
    );
}

fn least_squares_slope(pts: &[(f64, f64)]) -> f64 {
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    sxy / sxx
}

/// Laguerre coefficients of `e^{-x/2}` (just `c_0 = 1`) and of `e^{-x}`,
/// `c_m = (2/3)(1/3)^m`, truncated where the terms drop below `10^{-60}`.
fn oracle_densities(ctx: PrecisionContext) -> Vec<(&'static str, Vec<BigReal>, BigReal)> {
    let third = ctx.one().div_i64(3);
    let mut c = Vec::new();
    let mut t = ctx.int(2).div_i64(3);
    while t.log10_abs() > -60.0 {
        c.push(t.clone());
        t = &t * &third;
    }
    vec![
        ("exp(-x/2)", vec![ctx.one()], ctx.one().div_i64(2)),
        ("exp(-x)", c, ctx.one()),
    ]
}

fn quadrature_oracle() -> Checks {
    let mut checks = Checks::new();
    let ctx = PrecisionContext::new(80).expect("valid");
    let qctx = PrecisionContext::new(60).expect("valid");
    let nus = [(1, 5), (1, 3), (2, 3), (-1, 2)];
    let betas = ["0.5", "10", "1000"];
    let mut worst = 0f64;
    let mut cases = 0;
    for (name, coeffs, rate) in oracle_densities(ctx) {
        for &(p, q) in &nus {
            let nu = BigRational::new(p, q);
            for kernel in [Kernel::Linear, Kernel::Quadratic] {
                let density = match ReconstructedDensity::from_coefficients(nu.clone(), kernel, coeffs.clone(), ctx) {
                    Ok(d) => d,
                    Err(e) => {
                        checks.error(name, e);
                        continue;
                    }
                };
                for b in betas {
                    let beta = BigReal::parse(b, ctx).expect("literal");
                    let fp = match kernel {
                        Kernel::Linear => stieltjes_value(&density, &beta, ctx),
                        Kernel::Quadratic => generalized_value(&density, &beta, ctx),
                    };
                    let rate = rate.to_ctx(qctx);
                    let quad = stieltjes_quadrature(|x| (-(&rate * x)).exp(), &nu, kernel, &beta, 45, qctx);
                    cases += 1;
                    match (fp, quad) {
                        (Ok(fp), Ok(quad)) => {
                            let rel = ((&fp.total.to_ctx(qctx) - &quad.value) / &quad.value).abs().to_f64();
                            worst = worst.max(rel);
                            if rel >= 1e-30 {
                                checks.record(
                                    false,
                                    format!("g = {name}, nu = {nu}, {} kernel, beta = {b}: relative difference {rel:.1e}", kernel.name()),
                                );
                            }
                        }
                        (Err(e), _) | (_, Err(e)) => checks.error(&format!("g = {name}, nu = {nu}, beta = {b}"), e),
                    }
                }
            }
        }
    }
    checks.record(
        worst < 1e-30,
        format!("{cases} cases, worst relative difference {worst:.1e}"),
    );
    checks
}

/// Twenty `(m, ν, b)` cases covering every listed `ν` and `b`.
pub fn finite_part_grid() -> Vec<(usize, BigRational, BigRational)> {
    let nus = [(1, 5), (-1, 5), (1, 3), (-1, 3), (1, 2), (-1, 2), (2, 3)];
    let bs = [(1, 4), (1, 2), (2, 1)];
    (0..20)
        .map(|i| {
            let m = 1 + (7 * i) % 10;
            let (p, q) = nus[i % nus.len()];
            let (r, s) = bs[(i / 2) % bs.len()];
            (m, BigRational::new(p, q), BigRational::new(r, s))
        })
        .collect()
}

fn finite_part_identities() -> Checks {
    let mut checks = Checks::new();
    let digits = 60u32;
    let ctx = PrecisionContext::new(digits).expect("valid");
    let mut worst_limit = 0f64;
    let mut worst_mellin = 0f64;
    for (m, nu, b) in finite_part_grid() {
        let bf = BigReal::from_rational(&b, ctx);
        // The limit form misses ∫_a^∞ e^{-bx} x^{-(m+ν)} dx < e^{-ab}.
        let a = ctx.int(((digits as f64 + 20.0) * std::f64::consts::LN_10 / b.to_f64()).ceil() as i64);
        let lambda = BigRational::new(m as i64, 1) + nu.clone();
        let run = || -> Result<(f64, f64)> {
            let closed = finite_part_exp(m, &nu, &bf, ctx)?;
            let limit = finite_part_limitform(m, &nu, &bf, &a, ctx)?;
            let mellin = finite_part_mellin(&lambda, &bf, ctx)?;
            Ok((
                ((&closed - &limit) / &closed).abs().to_f64(),
                ((&closed - &mellin) / &closed).abs().to_f64(),
            ))
        };
        match run() {
            Ok((l, me)) => {
                worst_limit = worst_limit.max(l);
                worst_mellin = worst_mellin.max(me);
            }
            Err(e) => checks.error(&format!("m = {m}, nu = {nu}, b = {b}"), e),
        }
    }
    let limit_tol = 10f64.powi(-(digits as i32 - 10));
    checks.record(
        worst_limit <= limit_tol,
        format!("closed vs limit form over 20 cases: worst relative difference {worst_limit:.1e} (need {limit_tol:.0e})"),
    );
    let eps = ctx.epsilon().to_f64();
    checks.record(
        worst_mellin <= eps,
        format!("closed form vs Mellin continuation: worst relative difference {worst_mellin:.1e} (working precision {eps:.0e})"),
    );
    checks
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_covers_all_parameters() {
        let grid = finite_part_grid();
        assert_eq!(grid.len(), 20);
        for nu in ["1/5", "-1/5", "1/3", "-1/3", "1/2", "-1/2", "2/3"] {
            assert!(grid.iter().any(|(_, n, _)| n.to_exact_string() == nu));
        }
        for b in ["1/4", "1/2", "2"] {
            assert!(grid.iter().any(|(_, _, x)| x.to_exact_string() == b));
        }
        assert!(grid.iter().all(|(m, _, _)| (1..=10).contains(m)));
    }

    #[test]
    fn slope_of_power_law() {
        let pts: Vec<(f64, f64)> = (0..5).map(|i| (i as f64, 0.25 * i as f64 + 1.0)).collect();
        assert!((least_squares_slope(&pts) - 0.25).abs() < 1e-12);
    }
}
