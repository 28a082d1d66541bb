use thiserror::Error;

/// Errors raised by the numerical pipeline.
///
/// Every variant names the operation that failed and the offending
/// parameter so the CLI can surface a precise diagnostic.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("{op}: pole at {arg}")]
    Pole { op: &'static str, arg: String },

    #[error("{op}: singular matrix (pivot column {column})")]
    SingularMatrix { op: &'static str, column: usize },

    #[error("{op}: domain error: {detail}")]
    Domain { op: &'static str, detail: String },

    #[error("{op}: resource limit exceeded: {detail}")]
    ResourceLimit { op: &'static str, detail: String },

    #[error("{op}: parse error: {detail}")]
    Parse { op: &'static str, detail: String },

    #[error("{op}: validation failed: {detail}")]
    Validation { op: &'static str, detail: String },

    #[error("{op}: precision too low ({detail}); needed about {needed_digits} digits")]
    PrecisionTooLow {
        op: &'static str,
        detail: String,
        needed_digits: u32,
    },

    #[error("{op}: no convergence after {terms} terms ({detail})")]
    NonConvergence {
        op: &'static str,
        terms: usize,
        detail: String,
    },

    #[error("{op}: I/O error on {path}: {detail}")]
    Io {
        op: &'static str,
        path: String,
        detail: String,
    },
}

impl Error {
    /// Name of the module the failing operation belongs to.
    pub fn module(&self) -> &'static str {
        let op = match self {
            Error::Pole { op, .. }
            | Error::SingularMatrix { op, .. }
            | Error::Domain { op, .. }
            | Error::ResourceLimit { op, .. }
            | Error::Parse { op, .. }
            | Error::Validation { op, .. }
            | Error::PrecisionTooLow { op, .. }
            | Error::NonConvergence { op, .. }
            | Error::Io { op, .. } => *op,
        };
        match op {
            "gamma" | "lu_solve" | "parse_real" | "parse_rational" | "precision" => "numeric-core",
            "generate_rs" | "load_moments" | "save_moments" | "map_to_moments" | "system_spec" => {
                "moments"
            }
            "build_p_matrix" | "solve_density" | "load_density" | "save_density" => "reconstruction",
            "finite_part_exp" | "finite_part_limitform" | "assemble_head_terms" | "tail_sum" => {
                "finite-part"
            }
            "stieltjes_value" | "generalized_value" | "energy" => "summation",
            "pade_build" | "pade_eval" => "pade",
            "quadrature" => "quadrature",
            _ => "cli",
        }
    }

    /// True for errors caused by the numerics rather than the inputs.
    pub fn is_numeric(&self) -> bool {
        matches!(
            self,
            Error::PrecisionTooLow { .. }
                | Error::SingularMatrix { .. }
                | Error::NonConvergence { .. }
                | Error::Pole { .. }
        )
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
