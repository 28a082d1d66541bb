//! Reference values, independent oracles and the acceptance checks.

pub mod criteria;
pub mod oracle;
pub mod reference;

pub use criteria::{CriterionReport, Suite, CRITERIA};
