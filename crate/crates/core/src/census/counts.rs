use std::collections::BTreeSet;

use super::{CensusError, CensusInput};
use crate::matching::IndividualPartition;
use crate::sighting::OccasionMap;

/// Presence counts for occasions `(i, j)`: any number of sightings on an
/// occasion counts once. Annotations without an assigned occasion are
/// ignored.
pub fn two_occasion_counts(
    partition: &IndividualPartition,
    occasions: &OccasionMap,
    (i, j): (u32, u32),
) -> Result<CensusInput, CensusError> {
    if i == j {
        return Err(CensusError::SameOccasion(i));
    }
    let mut first = BTreeSet::new();
    let mut second = BTreeSet::new();
    for (annotation, individual) in partition.assignment() {
        match occasions.get(annotation) {
            Some(&o) if o == i => {
                first.insert(individual.as_str());
            }
            Some(&o) if o == j => {
                second.insert(individual.as_str());
            }
            _ => {}
        }
    }
    let recaptured = first.intersection(&second).count() as u64;
    CensusInput::new(first.len() as u64, second.len() as u64, recaptured)
}
