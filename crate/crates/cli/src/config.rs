//! Run configuration: everything needed to reproduce a table.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use fpi_core::moments::{load_moments, generate_moments, GeneratorConfig, MomentSequence, SystemId};
use fpi_core::numeric::{pow_rational, recommended_digits, BigRational, BigReal, PrecisionContext};
use fpi_core::{Error, Result};

/// Overrides the digits heuristic when `--digits` is absent.
pub const DIGITS_ENV: &str = "FPI_DEFAULT_DIGITS";

fn config_error(detail: impl Into<String>) -> Error {
    Error::Validation {
        op: "run_config",
        detail: detail.into(),
    }
}

/// Where the moments come from.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Source {
    System(SystemId),
    File(PathBuf),
}

/// Couplings: an explicit list or a logarithmic grid.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BetaSpec {
    /// Exact literals: integers, decimals or `p/q`.
    List(Vec<String>),
    /// `start · 10^{j/per_decade}` for `j = 0, 1, …` up to `stop`.
    Grid {
        start: String,
        stop: String,
        per_decade: u32,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    FinitePart,
    Pade,
    PartialSum,
}

impl FromStr for Method {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s.trim() {
            "finite_part" => Ok(Method::FinitePart),
            "pade" => Ok(Method::Pade),
            "partial_sum" => Ok(Method::PartialSum),
            other => Err(format!(
                "unknown method {other:?} (expected finite_part, pade or partial_sum)"
            )),
        }
    }
}

/// Padé degrees `[n/m]`, written `n/m` on the command line.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PadeDegrees {
    pub n: usize,
    pub m: usize,
}

impl PadeDegrees {
    /// Terms of the series the approximant consumes.
    pub fn terms(&self) -> usize {
        self.n + self.m + 1
    }

    /// `[M−1/M]` using as many of `available` terms as possible.
    pub fn diagonal(available: usize) -> Self {
        let m = (available / 2).max(1);
        PadeDegrees { n: m - 1, m }
    }
}

impl FromStr for PadeDegrees {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        let (n, m) = s
            .split_once('/')
            .ok_or_else(|| format!("expected N/M, got {s:?}"))?;
        let parse = |t: &str| t.trim().parse::<usize>().map_err(|e| format!("{t:?}: {e}"));
        Ok(PadeDegrees {
            n: parse(n)?,
            m: parse(m)?,
        })
    }
}

impl fmt::Display for PadeDegrees {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.n, self.m)
    }
}

/// A complete, serializable description of a `sum` run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub source: Source,
    /// Number of moments used; `None` takes every moment of a file.
    pub moments: Option<usize>,
    /// Working precision; `None` resolves from the environment or the
    /// heuristic.
    pub digits: Option<u32>,
    pub betas: BetaSpec,
    pub methods: Vec<Method>,
    pub pade: Option<PadeDegrees>,
    /// Digits that must survive cancellation in every finite-part value.
    pub output_digits: u32,
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Io {
            op: "run_config",
            path: path.display().to_string(),
            detail: e.to_string(),
        })?;
        let value: serde_json::Value = serde_json::from_str(&text).map_err(|e| Error::Parse {
            op: "run_config",
            detail: format!("{}: {e}", path.display()),
        })?;
        // A sidecar carries the config under "config".
        let inner = value.get("config").cloned().unwrap_or(value);
        serde_json::from_value(inner).map_err(|e| Error::Parse {
            op: "run_config",
            detail: format!("{}: {e}", path.display()),
        })
    }

    pub fn validate(&self) -> Result<()> {
        if self.methods.is_empty() {
            return Err(config_error("no methods selected"));
        }
        if let Some(n) = self.moments {
            if n < 2 {
                return Err(config_error(format!("-d {n}: at least 2 moments are needed")));
            }
        }
        if matches!(self.source, Source::System(SystemId::Custom)) {
            return Err(config_error("custom series must be read with --moments"));
        }
        if let Some(p) = self.pade {
            if p.m == 0 {
                return Err(config_error("Padé denominator degree must be positive"));
            }
        }
        match &self.betas {
            BetaSpec::List(v) if v.is_empty() => return Err(config_error("no beta values")),
            BetaSpec::Grid { per_decade: 0, .. } => {
                return Err(config_error("grid needs at least one point per decade"))
            }
            _ => {}
        }
        Ok(())
    }

    /// Precision for `moments` moments: `--digits`, else the environment
    /// override, else the heuristic.
    pub fn resolve_digits(&self, moments: usize) -> Result<u32> {
        if let Some(d) = self.digits {
            return Ok(d);
        }
        default_digits(moments)
    }

    /// Loads or generates the moments, truncated to `moments` if set.
    pub fn load_moments(&self, ctx: PrecisionContext) -> Result<MomentSequence> {
        match &self.source {
            Source::System(id) => {
                let n = self.moments.ok_or_else(|| config_error("-d is required with --system"))?;
                generate_moments(*id, n, &GeneratorConfig::default(), ctx)
            }
            Source::File(path) => {
                let seq = load_moments(path, ctx)?;
                match self.moments {
                    Some(n) if n > seq.len() => Err(config_error(format!(
                        "-d {n} but {} holds only {} moments",
                        path.display(),
                        seq.len()
                    ))),
                    Some(n) => seq.truncated(n),
                    None => Ok(seq),
                }
            }
        }
    }

    /// Moments for a Padé approximant needing `terms` terms: generated
    /// afresh for built-in systems, taken from the file otherwise.
    pub fn pade_moments(&self, base: &MomentSequence, terms: usize, ctx: PrecisionContext) -> Result<MomentSequence> {
        if terms <= base.len() {
            return base.truncated(terms.max(2));
        }
        match &self.source {
            Source::System(id) => generate_moments(*id, terms, &GeneratorConfig::default(), ctx),
            Source::File(path) => Err(config_error(format!(
                "Padé needs {terms} terms but {} provides {}",
                path.display(),
                base.len()
            ))),
        }
    }

    pub fn betas(&self, ctx: PrecisionContext) -> Result<Vec<BigReal>> {
        resolve_betas(&self.betas, ctx)
    }
}

/// Digits for `moments` moments when none were requested.
pub fn default_digits(moments: usize) -> Result<u32> {
    match std::env::var(DIGITS_ENV) {
        Ok(v) => v
            .trim()
            .parse()
            .map_err(|_| config_error(format!("{DIGITS_ENV}={v:?} is not a digit count"))),
        Err(_) => Ok(recommended_digits(moments.saturating_sub(1))),
    }
}

fn positive(text: &str) -> Result<BigRational> {
    let q = BigRational::parse(text)?;
    if !q.is_positive() {
        return Err(config_error(format!("beta = {text} must be positive")));
    }
    Ok(q)
}

pub fn resolve_betas(spec: &BetaSpec, ctx: PrecisionContext) -> Result<Vec<BigReal>> {
    match spec {
        BetaSpec::List(items) => items
            .iter()
            .map(|s| Ok(BigReal::from_rational(&positive(s)?, ctx)))
            .collect(),
        BetaSpec::Grid {
            start,
            stop,
            per_decade,
        } => {
            let (a, b) = (positive(start)?, positive(stop)?);
            let decades = (b.to_f64() / a.to_f64()).log10();
            if decades < 0.0 {
                return Err(config_error(format!("grid stop {stop} is below start {start}")));
            }
            let points = (decades * *per_decade as f64 + 1e-9).floor() as i64 + 1;
            let a = BigReal::from_rational(&a, ctx);
            let ten = ctx.int(10);
            Ok((0..points)
                .map(|j| &a * &pow_rational(&ten, &BigRational::new(j, *per_decade as i64), ctx))
                .collect())
        }
    }
}
