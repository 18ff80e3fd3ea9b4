//! Seeded simulation of photo rallies over a known population, used to
//! measure how sampling biases move census estimates.
//!
//! Each bias is a small parametric mechanism:
//!
//! - spatial coverage: detection probability scales with
//!   `exp(-sharpness * d)`, `d` the normalized distance to a straight road
//!   across the middle of the region;
//! - photographer fatigue: a photographer's willingness to shoot decays by
//!   `exp(-fatigue_rate)` per photo taken, reset each occasion;
//! - photographing bias: per-species attractiveness weights rescale the
//!   detection probability;
//! - sharing and platform bias: independent per-photo thinning after the
//!   rally ([`apply_bias_layers`]).
//!
//! Every random draw comes from a ChaCha stream dedicated to one purpose
//! (see [`rng::Purpose`]), so enabling a layer never shifts the draws of
//! another.

mod bias;
mod evaluate;
mod population;
mod process;
pub mod rng;
mod scenario;

pub use bias::{apply_bias_layers, BiasLayerConfig, PlatformFilter};
pub use evaluate::{evaluate_end_to_end, evaluate_estimator, run_end_to_end, EndToEndRun, MatchingOptions, SimResult};
pub use population::DEFAULT_SPECIES;
pub use population::{generate_population, generate_population_with_species, Individual, Region, SyntheticPopulation};
pub use process::{
    simulate_rally, simulate_rally_weighted, PhotosPerDetection, SamplingProcess, SimulatedRally, RALLY_START,
};
pub use scenario::{run_scenario, ScenarioConfig};

use thiserror::Error;

use crate::census::CensusError;
use crate::matching::MatchError;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SimError {
    #[error("invalid population: {0}")]
    InvalidPopulation(String),

    #[error("invalid sampling process: {0}")]
    InvalidProcess(String),

    #[error("invalid bias layers: {0}")]
    InvalidLayers(String),

    #[error("all {runs} runs failed to produce an estimate")]
    NoSuccessfulRuns { runs: usize },

    #[error(transparent)]
    Census(#[from] CensusError),

    #[error(transparent)]
    Match(#[from] MatchError),
}
