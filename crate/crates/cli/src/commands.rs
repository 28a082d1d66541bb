//! Subcommand bodies. Each writes an RFC-4180 table with a header row,
//! one row per coupling in input order.

use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use rayon::prelude::*;
use serde::Serialize;

use fpi_core::moments::{generate_rs, GeneratorConfig, MomentFile, MomentSequence, SystemId, SystemSpec};
use fpi_core::numeric::{BigReal, PrecisionContext};
use fpi_core::pade::EnergyPade;
use fpi_core::summation::{energy_timed, partial_sum, EvaluationRequest, ExpansionResult};
use fpi_core::validation::{Suite, CRITERIA};
use fpi_core::{Error, Result};

use crate::config::{default_digits, resolve_betas, BetaSpec, Method, PadeDegrees, RunConfig, Source};

pub const SUM_HEADER: [&str; 12] = [
    "beta",
    "d",
    "digits",
    "fp_value",
    "fp_value_50",
    "fp_head_tail",
    "fp_correction",
    "cancellation_digits",
    "tail_terms",
    "pade_value",
    "partial_sum_value",
    "wall_time_ms",
];

pub const PADE_HEADER: [&str; 6] = ["beta", "pade_n", "pade_m", "digits", "pade_value", "wall_time_ms"];

pub const COMPARE_HEADER: [&str; 9] = [
    "beta",
    "d",
    "digits",
    "head_tail",
    "correction",
    "stieltjes",
    "total",
    "correction_over_total",
    "cancellation_digits",
];

/// Significant digits of the fixed-width diffing column.
const FIXED_DIGITS: usize = 50;

fn io_error(path: &Path, e: impl std::fmt::Display) -> Error {
    Error::Io {
        op: "write_output",
        path: path.display().to_string(),
        detail: e.to_string(),
    }
}

/// Where a table goes: a file, or stdout.
pub struct Output {
    pub path: Option<PathBuf>,
    /// Leave `wall_time_ms` empty so reruns are byte-identical.
    pub no_timing: bool,
}

impl Output {
    fn write_table(&self, header: &[&str], rows: &[Vec<String>]) -> Result<()> {
        let target = self.path.as_deref().unwrap_or(Path::new("<stdout>"));
        let sink: Box<dyn Write> = match &self.path {
            Some(p) => Box::new(std::fs::File::create(p).map_err(|e| io_error(p, e))?),
            None => Box::new(std::io::stdout().lock()),
        };
        let mut w = csv::Writer::from_writer(sink);
        w.write_record(header).map_err(|e| io_error(target, e))?;
        for row in rows {
            w.write_record(row).map_err(|e| io_error(target, e))?;
        }
        w.flush().map_err(|e| io_error(target, e))
    }

    fn millis(&self, t: Duration) -> String {
        if self.no_timing {
            String::new()
        } else {
            format!("{:.3}", t.as_secs_f64() * 1e3)
        }
    }
}

fn short(x: &BigReal, digits: u32) -> String {
    x.to_short_string(digits as usize)
}

fn seconds(t: Duration, no_timing: bool) -> Option<f64> {
    (!no_timing).then_some(t.as_secs_f64())
}

/// `moments`: generate and export a system's series.
pub fn moments(id: SystemId, count: usize, rs: bool, out: Option<&Path>) -> Result<()> {
    let cfg = GeneratorConfig::default();
    let file = if rs {
        MomentFile::from_rs(&SystemSpec::builtin(id)?, &generate_rs(id, count, &cfg)?)
    } else {
        let ctx = PrecisionContext::new(default_digits(count)?)?;
        MomentFile::from_sequence(&fpi_core::moments::generate_moments(id, count, &cfg, ctx)?)
    };
    match out {
        Some(p) => file.write(p),
        None => {
            let text = serde_json::to_string_pretty(&file).expect("plain strings serialize");
            println!("{text}");
            Ok(())
        }
    }
}

/// Moment count of the configured source, known before the working
/// precision is. A file is mapped once at low precision just to count.
fn source_len(cfg: &RunConfig) -> Result<usize> {
    match (&cfg.source, cfg.moments) {
        (_, Some(n)) => Ok(n),
        (Source::File(p), None) => Ok(MomentFile::read(p)?.to_sequence(PrecisionContext::new(30)?)?.len()),
        (Source::System(_), None) => Err(Error::Validation {
            op: "run_config",
            detail: "-d is required with --system".into(),
        }),
    }
}

#[derive(Serialize)]
struct SidecarRow {
    beta: String,
    cancellation_digits: u32,
    tail_terms: usize,
    moment_residual: String,
    moment_residual_bound: String,
    working_digits: u32,
}

#[derive(Serialize)]
struct Sidecar<'a> {
    config: &'a RunConfig,
    moments: usize,
    digits: u32,
    density_residual: Option<String>,
    density_residual_bound: Option<String>,
    setup_seconds: Option<f64>,
    rows: Vec<SidecarRow>,
}

/// `sum`: the main pipeline. Resolves `cfg` in place so the sidecar holds
/// exactly what ran.
pub fn sum(mut cfg: RunConfig, out: &Output, sidecar: Option<&Path>) -> Result<()> {
    cfg.validate()?;
    let count = source_len(&cfg)?;
    cfg.moments = Some(count);
    let digits = cfg.resolve_digits(count)?;
    cfg.digits = Some(digits);
    let ctx = PrecisionContext::new(digits)?;
    let start = Instant::now();
    let seq = cfg.load_moments(ctx)?;
    let betas = cfg.betas(ctx)?;
    let want = |m: Method| cfg.methods.contains(&m);
    let (with_fp, with_pade, with_partial) =
        (want(Method::FinitePart), want(Method::Pade), want(Method::PartialSum));

    let fp: Option<Vec<(ExpansionResult, Duration)>> = if with_fp {
        let mut request = EvaluationRequest::new(seq.clone(), betas.clone());
        request.digits = Some(digits);
        request.output_digits = cfg.output_digits;
        Some(energy_timed(&request)?)
    } else {
        None
    };
    let pade = if with_pade {
        let p = *cfg.pade.get_or_insert(PadeDegrees::diagonal(count));
        let pseq = cfg.pade_moments(&seq, p.terms(), ctx)?;
        Some(pade_values(&pseq, p, &betas, ctx)?)
    } else {
        None
    };
    let partial: Option<Vec<(BigReal, Duration)>> = with_partial.then(|| {
        betas
            .par_iter()
            .map(|b| {
                let t = Instant::now();
                (partial_sum(&seq, b, ctx), t.elapsed())
            })
            .collect()
    });
    let setup = start.elapsed().saturating_sub(row_time(&fp, &pade, &partial, betas.len()));

    let mut rows = Vec::with_capacity(betas.len());
    let mut side_rows = Vec::new();
    for (i, beta) in betas.iter().enumerate() {
        let mut row = vec![short(beta, digits), count.to_string(), digits.to_string()];
        let mut elapsed = Duration::ZERO;
        match &fp {
            Some(v) => {
                let (r, t) = &v[i];
                elapsed += *t;
                let d = r.ctx.decimal_digits().max(digits);
                row.extend([
                    short(&r.total, d),
                    r.total.to_sig_string(FIXED_DIGITS),
                    short(&r.head_tail, d),
                    short(&r.correction, d),
                    r.cancellation_digits.to_string(),
                    r.tail_terms_used.to_string(),
                ]);
                side_rows.push(SidecarRow {
                    beta: short(beta, digits),
                    cancellation_digits: r.cancellation_digits,
                    tail_terms: r.tail_terms_used,
                    moment_residual: r.moment_residual.to_sig_string(6),
                    moment_residual_bound: r.moment_residual_bound.to_sig_string(6),
                    working_digits: r.ctx.decimal_digits(),
                });
            }
            None => row.extend(std::iter::repeat_n(String::new(), 6)),
        }
        for col in [&pade, &partial] {
            match col {
                Some(v) => {
                    elapsed += v[i].1;
                    row.push(short(&v[i].0, digits));
                }
                None => row.push(String::new()),
            }
        }
        row.push(out.millis(elapsed));
        rows.push(row);
    }
    out.write_table(&SUM_HEADER, &rows)?;

    let sidecar = sidecar.map(Path::to_path_buf).or_else(|| out.path.as_ref().map(|p| sidecar_path(p)));
    if let Some(path) = sidecar {
        let first = fp.as_ref().and_then(|v| v.first()).map(|(r, _)| r);
        let doc = Sidecar {
            config: &cfg,
            moments: count,
            digits,
            density_residual: first.map(|r| r.moment_residual.to_sig_string(6)),
            density_residual_bound: first.map(|r| r.moment_residual_bound.to_sig_string(6)),
            setup_seconds: seconds(setup, out.no_timing),
            rows: side_rows,
        };
        let text = serde_json::to_string_pretty(&doc).expect("sidecar serializes");
        std::fs::write(&path, text + "\n").map_err(|e| io_error(&path, e))?;
    }
    Ok(())
}

/// Sum of the per-β times, which run in parallel with each other but not
/// with the setup.
fn row_time(
    fp: &Option<Vec<(ExpansionResult, Duration)>>,
    pade: &Option<Vec<(BigReal, Duration)>>,
    partial: &Option<Vec<(BigReal, Duration)>>,
    n: usize,
) -> Duration {
    let col = |i: usize| {
        fp.as_ref().map_or(Duration::ZERO, |v| v[i].1)
            + pade.as_ref().map_or(Duration::ZERO, |v| v[i].1)
            + partial.as_ref().map_or(Duration::ZERO, |v| v[i].1)
    };
    (0..n).map(col).max().unwrap_or_default()
}

/// `results.csv` → `results.json`; a `.json` table gets `.sidecar.json`.
pub fn sidecar_path(out: &Path) -> PathBuf {
    if out.extension().is_some_and(|e| e == "json") {
        out.with_extension("sidecar.json")
    } else {
        out.with_extension("json")
    }
}

fn pade_values(
    seq: &MomentSequence,
    p: PadeDegrees,
    betas: &[BigReal],
    ctx: PrecisionContext,
) -> Result<Vec<(BigReal, Duration)>> {
    let approx = EnergyPade::build(seq, p.n, p.m, ctx)?;
    betas
        .par_iter()
        .map(|b| {
            let t = Instant::now();
            Ok((approx.eval(b)?, t.elapsed()))
        })
        .collect()
}

/// `pade`: the baseline alone.
pub fn pade(
    source: Source,
    degrees: PadeDegrees,
    digits: Option<u32>,
    betas: &BetaSpec,
    out: &Output,
) -> Result<()> {
    if degrees.m == 0 {
        return Err(Error::Validation {
            op: "run_config",
            detail: "Padé denominator degree must be positive".into(),
        });
    }
    let terms = degrees.terms();
    let cfg = RunConfig {
        source,
        moments: Some(terms),
        digits,
        betas: betas.clone(),
        methods: vec![Method::Pade],
        pade: Some(degrees),
        output_digits: 0,
    };
    let digits = cfg.resolve_digits(terms)?;
    let ctx = PrecisionContext::new(digits)?;
    let seq = cfg.load_moments(ctx)?;
    let betas = resolve_betas(betas, ctx)?;
    let values = pade_values(&seq, degrees, &betas, ctx)?;
    let rows: Vec<Vec<String>> = betas
        .iter()
        .zip(&values)
        .map(|(b, (v, t))| {
            vec![
                short(b, digits),
                degrees.n.to_string(),
                degrees.m.to_string(),
                digits.to_string(),
                short(v, digits),
                out.millis(*t),
            ]
        })
        .collect();
    out.write_table(&PADE_HEADER, &rows)
}

/// `compare-terms`: how the head-and-tail series and the correction share
/// the Stieltjes value.
pub fn compare_terms(mut cfg: RunConfig, out: &Output) -> Result<()> {
    cfg.methods = vec![Method::FinitePart];
    cfg.validate()?;
    let count = source_len(&cfg)?;
    cfg.moments = Some(count);
    let digits = cfg.resolve_digits(count)?;
    let ctx = PrecisionContext::new(digits)?;
    let mut request = EvaluationRequest::new(cfg.load_moments(ctx)?, cfg.betas(ctx)?);
    request.digits = Some(digits);
    request.output_digits = cfg.output_digits;
    let rows: Vec<Vec<String>> = energy_timed(&request)?
        .into_iter()
        .map(|(r, _)| {
            let d = r.ctx.decimal_digits().max(digits);
            vec![
                short(&r.beta, digits),
                count.to_string(),
                digits.to_string(),
                short(&r.head_tail, d),
                short(&r.correction, d),
                short(&r.stieltjes, d),
                short(&r.total, d),
                (&r.correction / &r.total).to_sig_string(12),
                r.cancellation_digits.to_string(),
            ]
        })
        .collect();
    out.write_table(&COMPARE_HEADER, &rows)
}

/// `selftest`: runs the acceptance criteria; true when all pass.
pub fn selftest(ids: &[u32]) -> Result<bool> {
    let suite = Suite::new();
    let reports = if ids.is_empty() {
        suite.run_all()
    } else {
        ids.iter()
            .map(|&id| {
                suite.run(id).ok_or_else(|| Error::Validation {
                    op: "selftest",
                    detail: format!(
                        "no criterion {id} (valid: 1..={})",
                        CRITERIA.len()
                    ),
                })
            })
            .collect::<Result<Vec<_>>>()?
    };
    let mut ok = true;
    for report in &reports {
        println!("{report}");
        for line in &report.details {
            println!("    {line}");
        }
        ok &= report.passed;
    }
    Ok(ok)
}
