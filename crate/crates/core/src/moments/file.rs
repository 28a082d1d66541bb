use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numeric::{BigRational, PrecisionContext};

use super::{
    map_to_moments, Coefficients, Kernel, MomentSequence, MomentSource, RSCoefficients, SystemId,
    SystemSpec,
};

/// Whether `coeffs` holds RS coefficients or the moments themselves.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Convention {
    Rs,
    Mu,
}

/// On-disk moment file. Every number is a string so that values round-trip
/// exactly: rationals as `p/q`, everything else as decimals.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MomentFile {
    pub system: String,
    pub nu: String,
    pub lambda: String,
    pub kernel: Kernel,
    pub subtraction: String,
    pub prefactor: String,
    pub coeffs: Vec<String>,
    pub convention: Convention,
}

fn rational_text(q: &BigRational) -> String {
    q.to_terminating_decimal().unwrap_or_else(|| q.to_exact_string())
}

fn coefficient_texts(values: &Coefficients) -> Vec<String> {
    match values {
        Coefficients::Exact(v) => v.iter().map(BigRational::to_exact_string).collect(),
        Coefficients::Approx(v) => v.iter().map(|x| x.to_decimal_string()).collect(),
    }
}

impl MomentFile {
    fn header(spec: &SystemSpec, coeffs: Vec<String>, convention: Convention) -> Self {
        MomentFile {
            system: spec.id.name().to_string(),
            nu: spec.nu.to_exact_string(),
            lambda: spec.strong_exponent.to_exact_string(),
            kernel: spec.kernel,
            subtraction: rational_text(&spec.subtraction),
            prefactor: rational_text(&spec.prefactor),
            coeffs,
            convention,
        }
    }

    pub fn from_rs(spec: &SystemSpec, rs: &RSCoefficients) -> Self {
        MomentFile::header(spec, coefficient_texts(&rs.values), Convention::Rs)
    }

    pub fn from_sequence(seq: &MomentSequence) -> Self {
        let coeffs = match &seq.exact {
            Some(v) => v.iter().map(BigRational::to_exact_string).collect(),
            None => seq.mu.iter().map(|x| x.to_decimal_string()).collect(),
        };
        MomentFile::header(&seq.spec, coeffs, Convention::Mu)
    }

    pub fn spec(&self) -> Result<SystemSpec> {
        let id = self.system.parse().unwrap_or(SystemId::Custom);
        let spec = SystemSpec {
            id,
            subtraction: BigRational::parse(&self.subtraction)?,
            prefactor: BigRational::parse(&self.prefactor)?,
            kernel: self.kernel,
            strong_exponent: BigRational::parse(&self.lambda)?,
            nu: BigRational::parse(&self.nu)?,
        };
        spec.validate()?;
        Ok(spec)
    }

    /// Parses and validates the file's contents into moments.
    pub fn to_sequence(&self, ctx: PrecisionContext) -> Result<MomentSequence> {
        let spec = self.spec()?;
        let values = self
            .coeffs
            .iter()
            .map(|s| BigRational::parse(s))
            .collect::<Result<Vec<_>>>()?;
        match self.convention {
            Convention::Mu => {
                MomentSequence::new(spec, Coefficients::Exact(values), MomentSource::File, ctx)
            }
            Convention::Rs => {
                let rs = RSCoefficients {
                    system: spec.id,
                    first_index: if spec.id == SystemId::Funnel { 0 } else { 1 },
                    values: Coefficients::Exact(values),
                };
                map_to_moments(&rs, &spec, MomentSource::File, ctx)
            }
        }
    }

    pub fn read(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::Io {
            op: "load_moments",
            path: path.display().to_string(),
            detail: e.to_string(),
        })?;
        serde_json::from_str(&text).map_err(|e| Error::Parse {
            op: "load_moments",
            detail: format!("{}: {e}", path.display()),
        })
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        let text = serde_json::to_string_pretty(self).expect("plain strings serialize");
        fs::write(path, text + "\n").map_err(|e| Error::Io {
            op: "save_moments",
            path: path.display().to_string(),
            detail: e.to_string(),
        })
    }
}

/// Reads a moment file and returns its validated moment sequence.
pub fn load_moments(path: &Path, ctx: PrecisionContext) -> Result<MomentSequence> {
    MomentFile::read(path)?.to_sequence(ctx)
}
