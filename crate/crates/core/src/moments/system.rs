use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numeric::{BigRational, BigReal, PrecisionContext};

/// The physical systems with built-in coefficient generators, plus
/// user-supplied series.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SystemId {
    /// `p² + x² + i√β x³`
    PtCubic,
    /// `p² + x² + β x⁴`
    Quartic,
    /// `p² + x² + β x⁶`
    Sextic,
    /// `p²/2 − 1/r + β r`, s-wave
    Funnel,
    Custom,
}

impl SystemId {
    pub const BUILTIN: [SystemId; 4] = [
        SystemId::PtCubic,
        SystemId::Quartic,
        SystemId::Sextic,
        SystemId::Funnel,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            SystemId::PtCubic => "pt_cubic",
            SystemId::Quartic => "quartic",
            SystemId::Sextic => "sextic",
            SystemId::Funnel => "funnel",
            SystemId::Custom => "custom",
        }
    }
}

impl fmt::Display for SystemId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for SystemId {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "pt_cubic" => Ok(SystemId::PtCubic),
            "quartic" => Ok(SystemId::Quartic),
            "sextic" => Ok(SystemId::Sextic),
            "funnel" => Ok(SystemId::Funnel),
            "custom" => Ok(SystemId::Custom),
            other => Err(Error::Parse {
                op: "system_spec",
                detail: format!("unknown system {other:?}"),
            }),
        }
    }
}

/// Denominator of the Stieltjes integral: `1 + βx` or `1 + βx²`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Kernel {
    Linear,
    Quadratic,
}

impl Kernel {
    pub fn name(&self) -> &'static str {
        match self {
            Kernel::Linear => "linear",
            Kernel::Quadratic => "quadratic",
        }
    }

    /// Moment order addressed by equation `n` of the moment system.
    pub fn moment_order(&self, n: usize) -> usize {
        match self {
            Kernel::Linear => n,
            Kernel::Quadratic => 2 * n,
        }
    }
}

impl FromStr for Kernel {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "linear" => Ok(Kernel::Linear),
            "quadratic" => Ok(Kernel::Quadratic),
            other => Err(Error::Parse {
                op: "system_spec",
                detail: format!("unknown kernel {other:?}"),
            }),
        }
    }
}

/// How a system's energy is assembled from its Stieltjes value `S(β)`:
/// `E(β) = subtraction + prefactor · S(β)`, with `S(β) = β∫ρ(x)/(1+βx)dx`
/// (or `1+βx²` for the quadratic kernel) and `ρ(x) = x^{-ν} g(x)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SystemSpec {
    pub id: SystemId,
    /// `E(0)`, the constant split off the once-subtracted series.
    pub subtraction: BigRational,
    /// Multiplier of the Stieltjes value in the energy.
    pub prefactor: BigRational,
    pub kernel: Kernel,
    /// Leading strong-coupling power λ in `E ~ β^λ`.
    pub strong_exponent: BigRational,
    /// Exponent of the reconstructed density `x^{-ν} g(x)`.
    pub nu: BigRational,
}

impl SystemSpec {
    pub fn builtin(id: SystemId) -> Result<Self> {
        let q = BigRational::new;
        let spec = match id {
            SystemId::PtCubic => SystemSpec {
                id,
                subtraction: q(1, 1),
                prefactor: q(1, 1),
                kernel: Kernel::Linear,
                strong_exponent: q(1, 5),
                nu: q(1, 5),
            },
            SystemId::Quartic => SystemSpec {
                id,
                subtraction: q(1, 1),
                prefactor: q(1, 1),
                kernel: Kernel::Linear,
                strong_exponent: q(1, 3),
                nu: q(1, 3),
            },
            SystemId::Sextic => SystemSpec {
                id,
                subtraction: q(1, 1),
                prefactor: q(1, 1),
                kernel: Kernel::Quadratic,
                strong_exponent: q(1, 4),
                nu: q(-1, 2),
            },
            // E = -(1/2)(1 - S)
            SystemId::Funnel => SystemSpec {
                id,
                subtraction: q(-1, 2),
                prefactor: q(1, 2),
                kernel: Kernel::Linear,
                strong_exponent: q(2, 3),
                nu: q(2, 3),
            },
            SystemId::Custom => {
                return Err(Error::Validation {
                    op: "system_spec",
                    detail: "custom systems have no built-in parameters".into(),
                })
            }
        };
        Ok(spec)
    }

    /// Checks `|ν| < 1`, a non-zero prefactor, and the ν-selection rule
    /// tying ν to the strong-coupling exponent for the chosen kernel.
    pub fn validate(&self) -> Result<()> {
        let err = |detail: String| Error::Validation {
            op: "system_spec",
            detail,
        };
        let one = BigRational::new(1, 1);
        if self.nu.abs() >= one {
            return Err(err(format!("|nu| = |{}| must be < 1", self.nu)));
        }
        if self.prefactor.is_zero() {
            return Err(err("prefactor must be non-zero".into()));
        }
        let expected = match self.kernel {
            Kernel::Linear => self.nu.clone(),
            Kernel::Quadratic => (&one + &self.nu) / BigRational::new(2, 1),
        };
        if expected != self.strong_exponent {
            return Err(err(format!(
                "kernel {} with nu = {} implies lambda = {}, got {}",
                self.kernel.name(),
                self.nu,
                expected,
                self.strong_exponent
            )));
        }
        Ok(())
    }

    /// `subtraction + prefactor · stieltjes`.
    pub fn energy(&self, stieltjes: &BigReal, ctx: PrecisionContext) -> BigReal {
        let a = BigReal::from_rational(&self.subtraction, ctx);
        let b = BigReal::from_rational(&self.prefactor, ctx);
        &a + &(&b * stieltjes)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn builtins_satisfy_selection_rule() {
        for id in SystemId::BUILTIN {
            SystemSpec::builtin(id).unwrap().validate().unwrap();
        }
    }

    #[test]
    fn inconsistent_lambda_rejected() {
        let mut s = SystemSpec::builtin(SystemId::Sextic).unwrap();
        s.strong_exponent = BigRational::new(1, 3);
        assert!(s.validate().is_err());
        let mut s = SystemSpec::builtin(SystemId::Quartic).unwrap();
        s.nu = BigRational::new(1, 1);
        s.strong_exponent = BigRational::new(1, 1);
        assert!(s.validate().is_err());
    }

    #[test]
    fn names_round_trip() {
        for id in SystemId::BUILTIN {
            assert_eq!(id.name().parse::<SystemId>().unwrap(), id);
        }
        assert!("octic".parse::<SystemId>().is_err());
    }
}
