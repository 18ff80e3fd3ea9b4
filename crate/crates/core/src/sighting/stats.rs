use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use super::dataset::Dataset;

/// Collection-level counts for one dataset.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CollectionStats {
    pub cars: usize,
    pub cameras: usize,
    pub photographs: usize,
    pub annotations: usize,
    pub per_species: BTreeMap<String, usize>,
}

impl CollectionStats {
    pub const CSV_HEADER: &'static str = "cars,cameras,photographs,annotations";

    pub fn csv_row(&self) -> String {
        format!("{},{},{},{}", self.cars, self.cameras, self.photographs, self.annotations)
    }

    /// Header plus one data row, newline-terminated.
    pub fn to_csv(&self) -> String {
        format!("{}\n{}\n", Self::CSV_HEADER, self.csv_row())
    }
}

/// Photographs are counted as records; a camera burst of five frames is five
/// photographs. Records without a car do not count towards `cars`.
pub fn collection_stats(dataset: &Dataset) -> CollectionStats {
    let mut cars = BTreeSet::new();
    let mut cameras = BTreeSet::new();
    let mut per_species = BTreeMap::new();
    let mut annotations = 0;
    for rec in dataset.records() {
        if let Some(car) = &rec.car_id {
            cars.insert(car.as_str());
        }
        cameras.insert(rec.camera_id.as_str());
        annotations += rec.annotations.len();
        if !rec.annotations.is_empty() {
            *per_species.entry(rec.species.clone()).or_insert(0) += rec.annotations.len();
        }
    }
    CollectionStats { cars: cars.len(), cameras: cameras.len(), photographs: dataset.len(), annotations, per_species }
}
