//! Two-occasion mark-recapture estimation.
//!
//! Counts come from an [`IndividualPartition`](crate::IndividualPartition)
//! and an occasion map: `n` individuals seen on the first occasion, `K` on
//! the second, `k` on both. Estimates are kept as reals; rounding is a
//! display concern ([`round_for_display`]).

mod counts;
mod estimators;
mod feasibility;
mod report;

pub use counts::two_occasion_counts;
pub use estimators::{chapman, estimate, lincoln_petersen, CensusEstimate, CensusInput, Estimator, Z_95};
pub use feasibility::{feasibility_search, FeasibleCounts};
pub use report::{census_csv, census_report, CensusReport, CENSUS_CSV_HEADER};

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CensusError {
    #[error("Lincoln-Petersen is undefined with no recaptures; use chapman")]
    UndefinedEstimate,

    #[error("invalid counts: recaptured {recaptured} exceeds min(first {first}, second {second})")]
    InvalidCounts { first: u64, second: u64, recaptured: u64 },

    #[error("occasion pair must name two different occasions (got {0}, {0})")]
    SameOccasion(u32),

    #[error("unknown estimator `{0}` (expected lincoln-petersen or chapman)")]
    UnknownEstimator(String),
}

/// Round half away from zero, for display only.
pub fn round_for_display(x: f64) -> i64 {
    x.round() as i64
}
