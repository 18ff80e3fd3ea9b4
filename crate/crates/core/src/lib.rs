//! Photographic mark-recapture census engine.
//!
//! The crate follows the path a photo rally takes from raw sightings to a
//! population estimate:
//!
//! - [`sighting`]: photo records, deduplicating ingestion, occasion
//!   assignment and collection statistics.
//! - [`matching`]: embedding similarity, candidate generation, reviewer
//!   verdicts and clustering of annotations into individuals.
//! - [`census`]: two-occasion counts and the Lincoln-Petersen and Chapman
//!   estimators, plus a feasibility search for published point estimates.
//! - [`sim`]: seeded synthetic populations, biased sampling processes and an
//!   estimator-evaluation harness against known ground truth.
//! - [`journal`]: append-only JSON-lines journals that the CLI and server
//!   replay to reconstruct state.
//!
//! ```
//! use photocensus::census::{lincoln_petersen, CensusInput};
//!
//! let input = CensusInput::new(100, 50, 25).unwrap();
//! let estimate = lincoln_petersen(input).unwrap();
//! assert_eq!(estimate.n_est, 200.0);
//! ```

#![forbid(unsafe_code)]

pub mod census;
pub mod journal;
pub mod matching;
pub mod sighting;
pub mod sim;

pub use census::{CensusEstimate, CensusInput, CensusReport, Estimator};
pub use matching::{IndividualPartition, MatchGraph, Verdict};
pub use sighting::{Annotation, Dataset, PhotoRecord};
