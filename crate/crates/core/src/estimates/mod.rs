//! Post-hoc measurements on computed solutions and sampled fields: weak
//! Harnack quotients, Hölder exponents, oscillations, Caccioppoli-type
//! ratios and the tail bounds used for solutions that change sign far away.

mod caccioppoli;
mod cylinder;
mod tail;

pub use caccioppoli::{caccioppoli_audit, log_caccioppoli_audit, AuditVariant, CaccioppoliReport, LogCaccioppoliReport};
pub use cylinder::{harnack_quotient, holder_fit, oscillation, Cylinder, HolderFit, Oscillation, Window};
pub use tail::{tail_beta_threshold, tail_source_bound, TailBound, TailVariant};

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EstimateError {
    #[error("no lattice point of the solution lies in {0}")]
    Empty(String),
    #[error("{0} must be strictly positive (found {1})")]
    NotPositive(&'static str, f64),
    #[error("invalid parameter: {0}")]
    Parameter(String),
}
