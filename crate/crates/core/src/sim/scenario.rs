use serde::{Deserialize, Serialize};

use super::bias::BiasLayerConfig;
use super::evaluate::{evaluate_end_to_end, evaluate_estimator, MatchingOptions, SimResult};
use super::population::{generate_population, Region};
use super::process::SamplingProcess;
use super::SimError;
use crate::census::Estimator;
use crate::sighting::DEFAULT_EMBEDDING_DIM;

fn default_dim() -> usize {
    DEFAULT_EMBEDDING_DIM
}

fn default_estimator() -> Estimator {
    Estimator::Chapman
}

/// Scenario file contents. `process` and `layers` carry the
/// [`SamplingProcess`] and [`BiasLayerConfig`] fields unchanged.
///
/// ```json
/// {
///   "true_n": 500,
///   "process": {"capture_prob": 0.3, "occasions": 2, "photographer_count": 20},
///   "layers": {"sharing_prob": 0.5}
/// }
/// ```
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioConfig {
    pub true_n: usize,
    #[serde(default = "default_dim")]
    pub embedding_dim: usize,
    #[serde(default)]
    pub region: Region,
    #[serde(default = "default_estimator")]
    pub estimator: Estimator,
    pub process: SamplingProcess,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub layers: Option<BiasLayerConfig>,
    /// When present, cluster through the match graph instead of the
    /// simulator's ground truth.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub matching: Option<MatchingOptions>,
}

/// Generates the population from `seed` and evaluates `runs` rallies.
pub fn run_scenario(config: &ScenarioConfig, runs: usize, seed: u64) -> Result<SimResult, SimError> {
    let population = generate_population(config.true_n, config.embedding_dim, &config.region, seed)?;
    let layers = config.layers.as_ref();
    match &config.matching {
        None => evaluate_estimator(&population, &config.process, layers, config.estimator, runs, seed),
        Some(m) => evaluate_end_to_end(&population, &config.process, layers, config.estimator, m, runs, seed),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_scenario_parses_with_defaults() {
        let json = r#"{"true_n": 50, "process": {"capture_prob": 1.0, "occasions": 2, "photographer_count": 4}}"#;
        let cfg: ScenarioConfig = serde_json::from_str(json).unwrap();
        assert_eq!(cfg.embedding_dim, 64);
        assert_eq!(cfg.estimator, Estimator::Chapman);
        let r = run_scenario(&cfg, 3, 0).unwrap();
        assert_eq!(r.mean_estimate, 50.0);
    }

    #[test]
    fn unknown_fields_are_tolerated_but_bad_values_are_not() {
        let json = r#"{"true_n": 0, "process": {"capture_prob": 1.0, "occasions": 2, "photographer_count": 4}}"#;
        let cfg: ScenarioConfig = serde_json::from_str(json).unwrap();
        assert!(run_scenario(&cfg, 1, 0).is_err());
    }
}
