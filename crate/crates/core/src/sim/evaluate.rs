use chrono::TimeDelta;
use rand::RngCore;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::bias::{apply_bias_layers, BiasLayerConfig};
use super::population::SyntheticPopulation;
use super::process::{rally_start, simulate_rally_weighted, SamplingProcess, SimulatedRally};
use super::rng::{stream, Purpose};
use super::SimError;
use crate::census::{estimate, two_occasion_counts, CensusError, CensusEstimate, Estimator};
use crate::matching::{cluster_individuals, generate_candidates, IndividualPartition, MatchGraph};
use crate::sighting::{assign_occasions, Dataset, OccasionMap, OccasionRule};

/// Estimator accuracy over repeated simulated rallies.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimResult {
    pub runs: usize,
    /// Runs with no defined estimate (Lincoln-Petersen with `k = 0`). They
    /// are excluded from every other statistic.
    pub failures: usize,
    pub true_n: usize,
    pub mean_estimate: f64,
    pub bias: f64,
    pub rmse: f64,
    /// `None` for estimators without an interval.
    pub ci_coverage: Option<f64>,
}

impl SimResult {
    pub const CSV_HEADER: &'static str = "runs,failures,true_n,mean_estimate,bias,rmse,ci_coverage";

    pub fn csv_row(&self) -> String {
        format!(
            "{},{},{},{:.4},{:.4},{:.4},{}",
            self.runs,
            self.failures,
            self.true_n,
            self.mean_estimate,
            self.bias,
            self.rmse,
            self.ci_coverage.map(|c| format!("{c:.4}")).unwrap_or_default()
        )
    }

    pub fn to_csv(&self) -> String {
        format!("{}\n{}\n", Self::CSV_HEADER, self.csv_row())
    }
}

/// Settings for clustering with the real match graph instead of the
/// simulator's ground truth.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MatchingOptions {
    /// Candidates scoring at least this are accepted as "same".
    pub auto_accept: f64,
    pub top_k: usize,
}

impl Default for MatchingOptions {
    fn default() -> Self {
        MatchingOptions { auto_accept: 0.8, top_k: 10 }
    }
}

/// One end-to-end run: simulate, ingest, match, cluster, estimate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EndToEndRun {
    pub annotations: usize,
    pub individuals: usize,
    /// Distinct true individuals among the retained photos.
    pub true_individuals: usize,
    pub estimate: CensusEstimate,
}

fn occasion_rule() -> OccasionRule {
    OccasionRule::fixed_window(rally_start(), TimeDelta::days(1))
}

fn sample(
    population: &SyntheticPopulation,
    process: &SamplingProcess,
    layers: Option<&BiasLayerConfig>,
    seed: u64,
) -> Result<(SimulatedRally, Dataset, OccasionMap), SimError> {
    if process.occasions < 2 {
        return Err(SimError::InvalidProcess("a census needs at least 2 occasions".into()));
    }
    let empty = Default::default();
    let weights = layers.map_or(&empty, |l| &l.photographing_bias);
    let mut rally = simulate_rally_weighted(population, process, weights, seed)?;
    if let Some(layers) = layers {
        rally.records = apply_bias_layers(&rally.records, layers, seed)?;
    }
    let dataset = rally.to_dataset();
    let occasions = assign_occasions(&dataset, &occasion_rule()).expect("fixed window is fully specified");
    Ok((rally, dataset, occasions))
}

fn oracle_run(
    population: &SyntheticPopulation,
    process: &SamplingProcess,
    layers: Option<&BiasLayerConfig>,
    estimator: Estimator,
    seed: u64,
) -> Result<CensusEstimate, SimError> {
    let (rally, dataset, occasions) = sample(population, process, layers, seed)?;
    let partition = IndividualPartition::from_labels(dataset.annotations().into_iter().map(|a| {
        let who = rally.truth[&a.annotation_id];
        (a.annotation_id, who)
    }));
    let counts = two_occasion_counts(&partition, &occasions, (0, 1))?;
    Ok(estimate(counts, estimator)?)
}

/// Simulate, thin, ingest, generate candidates, auto-accept those at or
/// above the threshold, cluster and estimate on occasions `(0, 1)`.
pub fn run_end_to_end(
    population: &SyntheticPopulation,
    process: &SamplingProcess,
    layers: Option<&BiasLayerConfig>,
    estimator: Estimator,
    matching: &MatchingOptions,
    seed: u64,
) -> Result<EndToEndRun, SimError> {
    let (rally, dataset, occasions) = sample(population, process, layers, seed)?;
    let annotations = dataset.annotations();
    let mut graph = MatchGraph::new(&annotations);
    graph.set_candidates(generate_candidates(&annotations, matching.auto_accept, matching.top_k)?);
    graph.auto_accept(matching.auto_accept, "auto", rally_start());
    let partition = cluster_individuals(&graph);
    let counts = two_occasion_counts(&partition, &occasions, (0, 1))?;
    let true_individuals =
        annotations.iter().map(|a| rally.truth[&a.annotation_id]).collect::<std::collections::BTreeSet<_>>().len();
    Ok(EndToEndRun {
        annotations: annotations.len(),
        individuals: partition.individual_count(),
        true_individuals,
        estimate: estimate(counts, estimator)?,
    })
}

fn run_seeds(seed: u64, runs: usize) -> Vec<u64> {
    let mut rng = stream(seed, Purpose::Runs);
    (0..runs).map(|_| rng.next_u64()).collect()
}

fn aggregate(true_n: usize, outcomes: Vec<Result<CensusEstimate, SimError>>) -> Result<SimResult, SimError> {
    let runs = outcomes.len();
    let mut estimates = Vec::with_capacity(runs);
    let mut failures = 0;
    for outcome in outcomes {
        match outcome {
            Ok(e) => estimates.push(e),
            Err(SimError::Census(CensusError::UndefinedEstimate)) => failures += 1,
            Err(e) => return Err(e),
        }
    }
    if estimates.is_empty() {
        return Err(SimError::NoSuccessfulRuns { runs });
    }
    let truth = true_n as f64;
    let m = estimates.len() as f64;
    let mean_estimate = estimates.iter().map(|e| e.n_est).sum::<f64>() / m;
    let mse = estimates.iter().map(|e| (e.n_est - truth).powi(2)).sum::<f64>() / m;
    let ci_coverage = if estimates.iter().all(|e| e.ci95.is_some()) {
        let covered = estimates.iter().filter(|e| e.ci_contains(truth) == Some(true)).count();
        Some(covered as f64 / m)
    } else {
        None
    };
    Ok(SimResult { runs, failures, true_n, mean_estimate, bias: mean_estimate - truth, rmse: mse.sqrt(), ci_coverage })
}

/// Estimator accuracy with oracle clustering: the simulator's ground-truth
/// identities stand in for matching, so only sampling and estimator error
/// remain. Runs execute in parallel; results are reduced in run order.
pub fn evaluate_estimator(
    population: &SyntheticPopulation,
    process: &SamplingProcess,
    layers: Option<&BiasLayerConfig>,
    estimator: Estimator,
    runs: usize,
    seed: u64,
) -> Result<SimResult, SimError> {
    if runs == 0 {
        return Err(SimError::InvalidProcess("runs must be at least 1".into()));
    }
    let outcomes =
        run_seeds(seed, runs).into_par_iter().map(|s| oracle_run(population, process, layers, estimator, s)).collect();
    aggregate(population.true_n, outcomes)
}

/// As [`evaluate_estimator`] but clustering through the match graph.
pub fn evaluate_end_to_end(
    population: &SyntheticPopulation,
    process: &SamplingProcess,
    layers: Option<&BiasLayerConfig>,
    estimator: Estimator,
    matching: &MatchingOptions,
    runs: usize,
    seed: u64,
) -> Result<SimResult, SimError> {
    if runs == 0 {
        return Err(SimError::InvalidProcess("runs must be at least 1".into()));
    }
    let outcomes = run_seeds(seed, runs)
        .into_par_iter()
        .map(|s| run_end_to_end(population, process, layers, estimator, matching, s).map(|r| r.estimate))
        .collect();
    aggregate(population.true_n, outcomes)
}
