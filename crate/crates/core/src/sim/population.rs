use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use super::rng::{stream, Purpose};
use super::SimError;

pub const DEFAULT_SPECIES: &str = "grevys_zebra";

/// Axis-aligned lat/lon box. The simulated road runs east-west along the
/// middle latitude.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Region {
    pub lat_min: f64,
    pub lat_max: f64,
    pub lon_min: f64,
    pub lon_max: f64,
}

impl Default for Region {
    fn default() -> Self {
        Region { lat_min: 0.0, lat_max: 1.0, lon_min: 36.5, lon_max: 37.5 }
    }
}

impl Region {
    pub fn contains(&self, lat: f64, lon: f64) -> bool {
        (self.lat_min..=self.lat_max).contains(&lat) && (self.lon_min..=self.lon_max).contains(&lon)
    }

    pub fn road_lat(&self) -> f64 {
        0.5 * (self.lat_min + self.lat_max)
    }

    /// Distance to the road in units of the half-height, in `[0, 1]`.
    pub fn road_distance(&self, lat: f64) -> f64 {
        let half = 0.5 * (self.lat_max - self.lat_min);
        if half <= 0.0 {
            0.0
        } else {
            ((lat - self.road_lat()).abs() / half).min(1.0)
        }
    }

    fn validate(&self) -> Result<(), SimError> {
        let ok = self.lat_min <= self.lat_max
            && self.lon_min <= self.lon_max
            && self.lat_min >= -90.0
            && self.lat_max <= 90.0
            && self.lon_min >= -180.0
            && self.lon_max <= 180.0;
        if ok {
            Ok(())
        } else {
            Err(SimError::InvalidPopulation(format!("bad region {self:?}")))
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Individual {
    pub id: String,
    pub species: String,
    /// Unit-norm mean appearance embedding.
    pub mean_embedding: Vec<f64>,
    pub home_lat: f64,
    pub home_lon: f64,
}

/// Ground truth for a simulation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SyntheticPopulation {
    pub true_n: usize,
    pub embedding_dim: usize,
    pub region: Region,
    pub individuals: Vec<Individual>,
}

impl SyntheticPopulation {
    pub fn species(&self) -> Vec<String> {
        let mut s: Vec<String> = self.individuals.iter().map(|i| i.species.clone()).collect();
        s.sort();
        s.dedup();
        s
    }
}

/// Single-species population of `true_n` individuals.
pub fn generate_population(
    true_n: usize,
    embedding_dim: usize,
    region: &Region,
    seed: u64,
) -> Result<SyntheticPopulation, SimError> {
    generate_population_with_species(&[(DEFAULT_SPECIES, true_n)], embedding_dim, region, seed)
}

/// Population with the given per-species head counts. Mean embeddings are
/// isotropic Gaussian directions; homes are uniform over the region.
pub fn generate_population_with_species(
    counts: &[(&str, usize)],
    embedding_dim: usize,
    region: &Region,
    seed: u64,
) -> Result<SyntheticPopulation, SimError> {
    let true_n: usize = counts.iter().map(|c| c.1).sum();
    if true_n == 0 {
        return Err(SimError::InvalidPopulation("true_n must be at least 1".into()));
    }
    if embedding_dim < 2 {
        return Err(SimError::InvalidPopulation("embedding_dim must be at least 2".into()));
    }
    region.validate()?;

    let mut rng = stream(seed, Purpose::Population);
    let mut individuals: Vec<Individual> = Vec::with_capacity(true_n);
    for (species, count) in counts {
        for _ in 0..*count {
            let mean_embedding = loop {
                let v = random_unit_vector(&mut rng, embedding_dim);
                if individuals.iter().all(|i| i.mean_embedding != v) {
                    break v;
                }
            };
            let home_lat = rng.random_range(region.lat_min..=region.lat_max);
            let home_lon = rng.random_range(region.lon_min..=region.lon_max);
            individuals.push(Individual {
                id: format!("ind-{:05}", individuals.len()),
                species: (*species).to_owned(),
                mean_embedding,
                home_lat,
                home_lon,
            });
        }
    }
    Ok(SyntheticPopulation { true_n, embedding_dim, region: *region, individuals })
}

pub(crate) fn random_unit_vector<R: Rng>(rng: &mut R, dim: usize) -> Vec<f64> {
    loop {
        let v: Vec<f64> = (0..dim).map(|_| rng.sample(StandardNormal)).collect();
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm > 1e-12 {
            return v.into_iter().map(|x| x / norm).collect();
        }
    }
}
