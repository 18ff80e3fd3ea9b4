use std::collections::BTreeSet;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::{estimate, two_occasion_counts, CensusError, CensusEstimate, Estimator};
use crate::matching::IndividualPartition;
use crate::sighting::{Dataset, OccasionMap};

pub const CENSUS_CSV_HEADER: &str = "species,annotations,individuals,estimator,n,K,k,n_est,var,ci_lo,ci_hi";

/// One row of the census table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CensusReport {
    pub species: String,
    pub annotations: usize,
    pub individuals: usize,
    pub estimate: CensusEstimate,
}

impl CensusReport {
    pub fn csv_row(&self) -> String {
        let e = &self.estimate;
        let real = |x: Option<f64>| x.map(|v| format!("{v:.4}")).unwrap_or_default();
        format!(
            "{},{},{},{},{},{},{},{:.4},{},{},{}",
            csv_field(&self.species),
            self.annotations,
            self.individuals,
            e.estimator,
            e.input.first,
            e.input.second,
            e.input.recaptured,
            e.n_est,
            real(e.variance),
            real(e.ci95.map(|c| c.0)),
            real(e.ci95.map(|c| c.1)),
        )
    }
}

/// Header plus one row per report.
pub fn census_csv(reports: &[CensusReport]) -> String {
    let mut out = String::new();
    writeln!(out, "{CENSUS_CSV_HEADER}").unwrap();
    for r in reports {
        writeln!(out, "{}", r.csv_row()).unwrap();
    }
    out
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n', '\r']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_owned()
    }
}

/// Census for one species: annotation and individual totals over the whole
/// dataset, and the estimate for the chosen occasion pair.
pub fn census_report(
    dataset: &Dataset,
    partition: &IndividualPartition,
    occasions: &OccasionMap,
    occasion_pair: (u32, u32),
    species: &str,
    estimator: Estimator,
) -> Result<CensusReport, CensusError> {
    let ids: BTreeSet<String> = dataset.species_annotations(species).into_iter().map(|a| a.annotation_id).collect();
    let restricted = partition.restrict(|id| ids.contains(id));
    let input = two_occasion_counts(&restricted, occasions, occasion_pair)?;
    Ok(CensusReport {
        species: species.to_owned(),
        annotations: ids.len(),
        individuals: restricted.individual_count(),
        estimate: estimate(input, estimator)?,
    })
}
