use std::collections::BTreeMap;

use chrono::{DateTime, TimeDelta, Utc};
use rand::Rng;
use rand_distr::{Distribution, Geometric, Normal};
use serde::{Deserialize, Serialize};

use super::population::SyntheticPopulation;
use super::rng::{stream, Purpose};
use super::SimError;
use crate::sighting::{annotation_id, AnnotationInput, Dataset, PhotoRecord};

/// Midnight UTC of the first simulated occasion. Occasion `d` is the UTC day
/// `RALLY_START + d days`.
pub const RALLY_START: &str = "2016-01-30T00:00:00Z";

pub(crate) fn rally_start() -> DateTime<Utc> {
    RALLY_START.parse().expect("valid constant")
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PhotosPerDetection {
    Fixed(u32),
    /// Support `1, 2, ...` with the given mean (at least 1).
    Geometric {
        mean: f64,
    },
}

impl Default for PhotosPerDetection {
    fn default() -> Self {
        PhotosPerDetection::Fixed(1)
    }
}

/// How a rally samples the population.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SamplingProcess {
    pub capture_prob: f64,
    #[serde(default)]
    pub photos_per_detection: PhotosPerDetection,
    #[serde(default)]
    pub embedding_noise_sd: f64,
    pub occasions: u32,
    pub photographer_count: u32,
    #[serde(default)]
    pub fatigue_rate: f64,
    #[serde(default)]
    pub spatial_bias_sharpness: f64,
}

impl Default for SamplingProcess {
    fn default() -> Self {
        SamplingProcess {
            capture_prob: 0.3,
            photos_per_detection: PhotosPerDetection::Fixed(1),
            embedding_noise_sd: 0.0,
            occasions: 2,
            photographer_count: 20,
            fatigue_rate: 0.0,
            spatial_bias_sharpness: 0.0,
        }
    }
}

impl SamplingProcess {
    pub fn validate(&self) -> Result<(), SimError> {
        let bad = |m: &str| Err(SimError::InvalidProcess(m.to_owned()));
        if !(0.0..=1.0).contains(&self.capture_prob) {
            return bad("capture_prob must be in [0, 1]");
        }
        match self.photos_per_detection {
            PhotosPerDetection::Fixed(0) => return bad("photos_per_detection must be at least 1"),
            PhotosPerDetection::Geometric { mean } if !(mean >= 1.0 && mean.is_finite()) => {
                return bad("geometric photos_per_detection mean must be at least 1")
            }
            _ => {}
        }
        if !(self.embedding_noise_sd >= 0.0 && self.embedding_noise_sd.is_finite()) {
            return bad("embedding_noise_sd must be non-negative");
        }
        if self.photographer_count == 0 {
            return bad("photographer_count must be at least 1");
        }
        if !(self.fatigue_rate >= 0.0 && self.fatigue_rate.is_finite()) {
            return bad("fatigue_rate must be non-negative");
        }
        if !(self.spatial_bias_sharpness >= 0.0 && self.spatial_bias_sharpness.is_finite()) {
            return bad("spatial_bias_sharpness must be non-negative");
        }
        Ok(())
    }
}

/// Photos from one simulated rally plus the ground-truth identity of every
/// annotation.
#[derive(Debug, Clone, PartialEq)]
pub struct SimulatedRally {
    pub embedding_dim: usize,
    pub records: Vec<PhotoRecord>,
    /// annotation_id -> index into the population's individuals.
    pub truth: BTreeMap<String, usize>,
}

impl SimulatedRally {
    pub fn to_dataset(&self) -> Dataset {
        let mut ds = Dataset::new(self.embedding_dim);
        let report = ds.ingest(self.records.iter().cloned().map(Ok));
        debug_assert_eq!(report.accepted, self.records.len());
        ds
    }

    /// Individuals seen on occasion `occasion`, by index.
    pub fn seen_on(&self, occasion: u32) -> std::collections::BTreeSet<usize> {
        let start = rally_start() + TimeDelta::days(i64::from(occasion));
        let end = start + TimeDelta::days(1);
        self.records
            .iter()
            .filter(|r| r.timestamp >= start && r.timestamp < end)
            .flat_map(|r| (0..r.annotations.len()).map(move |i| annotation_id(&r.photo_id, i)))
            .map(|id| self.truth[&id])
            .collect()
    }
}

/// [`simulate_rally_weighted`] with uniform species weights.
pub fn simulate_rally(
    population: &SyntheticPopulation,
    process: &SamplingProcess,
    seed: u64,
) -> Result<SimulatedRally, SimError> {
    simulate_rally_weighted(population, process, &BTreeMap::new(), seed)
}

/// Runs one rally. On each occasion every individual is available to be
/// photographed with probability
/// `capture_prob * exp(-sharpness * road_distance) * species_weight`,
/// where species weights are divided by the largest weight present
/// (unlisted species weigh 1). An available individual is met by a
/// uniformly chosen photographer, who shoots with probability equal to
/// their current willingness; each photo taken multiplies that
/// willingness by `exp(-fatigue_rate)`.
pub fn simulate_rally_weighted(
    population: &SyntheticPopulation,
    process: &SamplingProcess,
    species_weights: &BTreeMap<String, f64>,
    seed: u64,
) -> Result<SimulatedRally, SimError> {
    process.validate()?;
    if species_weights.values().any(|&w| !(w > 0.0 && w.is_finite())) {
        return Err(SimError::InvalidLayers("photographing_bias weights must be positive".into()));
    }
    let weight = |s: &str| species_weights.get(s).copied().unwrap_or(1.0);
    let max_weight = population.individuals.iter().map(|i| weight(&i.species)).fold(f64::MIN, f64::max);
    let factors: Vec<f64> = population
        .individuals
        .iter()
        .map(|i| {
            let spatial = (-process.spatial_bias_sharpness * population.region.road_distance(i.home_lat)).exp();
            process.capture_prob * spatial * weight(&i.species) / max_weight
        })
        .collect();

    let mut detection = stream(seed, Purpose::Detection);
    let mut photographer = stream(seed, Purpose::Photographer);
    let mut fatigue = stream(seed, Purpose::Fatigue);
    let mut photo_count = stream(seed, Purpose::PhotoCount);
    let mut noise = stream(seed, Purpose::Noise);
    let mut timing = stream(seed, Purpose::Timing);

    let geometric = match process.photos_per_detection {
        PhotosPerDetection::Geometric { mean } => {
            Some(Geometric::new(1.0 / mean).map_err(|e| SimError::InvalidProcess(e.to_string()))?)
        }
        PhotosPerDetection::Fixed(_) => None,
    };
    let noise_sd = Normal::new(0.0, process.embedding_noise_sd).map_err(|e| SimError::InvalidProcess(e.to_string()))?;
    let decay = (-process.fatigue_rate).exp();
    let start = rally_start();

    let mut records = Vec::new();
    let mut truth = BTreeMap::new();
    for occasion in 0..process.occasions {
        let day = start + TimeDelta::days(i64::from(occasion));
        let mut willingness = vec![1.0f64; process.photographer_count as usize];
        for (idx, ind) in population.individuals.iter().enumerate() {
            if detection.random::<f64>() >= factors[idx] {
                continue;
            }
            let who = photographer.random_range(0..process.photographer_count) as usize;
            if fatigue.random::<f64>() >= willingness[who] {
                continue;
            }
            let shots = match (process.photos_per_detection, &geometric) {
                (PhotosPerDetection::Fixed(m), _) => m,
                (_, Some(g)) => 1 + g.sample(&mut photo_count).min(u64::from(u32::MAX - 1)) as u32,
                _ => unreachable!(),
            };
            // daylight hours, 06:00-18:00
            let base = day + TimeDelta::seconds(6 * 3600 + timing.random_range(0..12 * 3600));
            for shot in 0..shots {
                let photo_id = format!("sim-{occasion}-{:07}", records.len());
                let embedding = noisy_embedding(&ind.mean_embedding, &noise_sd, process.embedding_noise_sd, &mut noise);
                truth.insert(annotation_id(&photo_id, 0), idx);
                records.push(PhotoRecord {
                    photo_id,
                    camera_id: format!("cam-{who:03}"),
                    car_id: Some(format!("car-{:03}", who / 2)),
                    timestamp: base + TimeDelta::seconds(i64::from(shot)),
                    lat: ind.home_lat,
                    lon: ind.home_lon,
                    species: ind.species.clone(),
                    annotations: vec![AnnotationInput { bbox: [0, 0, 64, 64], embedding, quality: 1.0 }],
                });
                willingness[who] *= decay;
            }
        }
    }
    Ok(SimulatedRally { embedding_dim: population.embedding_dim, records, truth })
}

fn noisy_embedding<R: Rng>(mean: &[f64], normal: &Normal<f64>, sd: f64, rng: &mut R) -> Vec<f64> {
    if sd == 0.0 {
        return mean.to_vec();
    }
    loop {
        let v: Vec<f64> = mean.iter().map(|m| m + normal.sample(rng)).collect();
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm > 1e-12 {
            return v.into_iter().map(|x| x / norm).collect();
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sim::{generate_population, Region};

    fn process(p: f64) -> SamplingProcess {
        SamplingProcess { capture_prob: p, ..SamplingProcess::default() }
    }

    #[test]
    fn perfect_capture_photographs_everyone_every_occasion() {
        let pop = generate_population(40, 8, &Region::default(), 3).unwrap();
        let rally = simulate_rally(&pop, &process(1.0), 9).unwrap();
        assert_eq!(rally.records.len(), 80);
        assert_eq!(rally.seen_on(0).len(), 40);
        assert_eq!(rally.seen_on(1).len(), 40);
        for r in &rally.records {
            let ind = &pop.individuals[rally.truth[&annotation_id(&r.photo_id, 0)]];
            assert_eq!(r.annotations[0].embedding, ind.mean_embedding);
        }
    }

    #[test]
    fn zero_capture_is_empty() {
        let pop = generate_population(40, 8, &Region::default(), 3).unwrap();
        assert!(simulate_rally(&pop, &process(0.0), 9).unwrap().records.is_empty());
    }

    #[test]
    fn deterministic_given_seed() {
        let pop = generate_population(60, 8, &Region::default(), 3).unwrap();
        let proc_ = SamplingProcess {
            embedding_noise_sd: 0.1,
            photos_per_detection: PhotosPerDetection::Geometric { mean: 2.0 },
            fatigue_rate: 0.05,
            ..process(0.5)
        };
        let a = simulate_rally(&pop, &proc_, 11).unwrap();
        assert_eq!(a, simulate_rally(&pop, &proc_, 11).unwrap());
        assert_ne!(a, simulate_rally(&pop, &proc_, 12).unwrap());
    }

    #[test]
    fn records_are_valid_and_ingestable() {
        let pop = generate_population(50, 16, &Region::default(), 3).unwrap();
        let proc_ = SamplingProcess { embedding_noise_sd: 0.2, ..process(0.6) };
        let rally = simulate_rally(&pop, &proc_, 1).unwrap();
        let ds = rally.to_dataset();
        assert_eq!(ds.len(), rally.records.len());
        for r in &rally.records {
            let norm: f64 = r.annotations[0].embedding.iter().map(|x| x * x).sum::<f64>().sqrt();
            assert!((norm - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn geometric_photo_count_has_requested_mean() {
        let pop = generate_population(400, 4, &Region::default(), 3).unwrap();
        let proc_ =
            SamplingProcess { photos_per_detection: PhotosPerDetection::Geometric { mean: 3.0 }, ..process(1.0) };
        let rally = simulate_rally(&pop, &proc_, 5).unwrap();
        let mean = rally.records.len() as f64 / 800.0;
        // sd of the mean: sqrt(6 / 800) ~ 0.087
        assert!((mean - 3.0).abs() < 0.4, "mean photos per detection {mean}");
    }

    #[test]
    fn spatial_bias_favors_the_road() {
        let pop = generate_population(2000, 4, &Region::default(), 3).unwrap();
        let proc_ = SamplingProcess { spatial_bias_sharpness: 3.0, ..process(1.0) };
        let rally = simulate_rally(&pop, &proc_, 5).unwrap();
        let road = pop.region.road_lat();
        let (near, far): (Vec<_>, Vec<_>) =
            pop.individuals.iter().enumerate().partition(|(_, i)| (i.home_lat - road).abs() < 0.25);
        let seen = rally.seen_on(0);
        let rate = |group: &[(usize, &crate::sim::Individual)]| {
            group.iter().filter(|(i, _)| seen.contains(i)).count() as f64 / group.len() as f64
        };
        assert!(rate(&near) > rate(&far) + 0.2);
    }

    #[test]
    fn species_weights_rescale_detection() {
        let pop = crate::sim::generate_population_with_species(&[("a", 1000), ("b", 1000)], 4, &Region::default(), 3)
            .unwrap();
        let weights = BTreeMap::from([("a".to_string(), 1.0), ("b".to_string(), 0.25)]);
        let rally = simulate_rally_weighted(&pop, &process(0.8), &weights, 5).unwrap();
        let count = |s: &str| rally.records.iter().filter(|r| r.species == s).count() as f64;
        // expected 1600 vs 400
        let ratio = count("b") / count("a");
        assert!((ratio - 0.25).abs() < 0.05, "ratio {ratio}");
        let bad = BTreeMap::from([("a".to_string(), 0.0)]);
        assert!(simulate_rally_weighted(&pop, &process(0.8), &bad, 5).is_err());
    }

    #[test]
    fn invalid_process_rejected() {
        let pop = generate_population(5, 4, &Region::default(), 3).unwrap();
        for bad in [
            process(1.5),
            SamplingProcess { photographer_count: 0, ..process(0.5) },
            SamplingProcess { photos_per_detection: PhotosPerDetection::Fixed(0), ..process(0.5) },
            SamplingProcess { photos_per_detection: PhotosPerDetection::Geometric { mean: 0.5 }, ..process(0.5) },
            SamplingProcess { fatigue_rate: -1.0, ..process(0.5) },
        ] {
            assert!(matches!(simulate_rally(&pop, &bad, 0), Err(SimError::InvalidProcess(_))));
        }
    }

    #[test]
    fn process_json_field_names() {
        let json = r#"{"capture_prob":0.3,"photos_per_detection":{"geometric":{"mean":2.0}},"embedding_noise_sd":0.05,"occasions":2,"photographer_count":162,"fatigue_rate":0.01,"spatial_bias_sharpness":1.5}"#;
        let p: SamplingProcess = serde_json::from_str(json).unwrap();
        assert_eq!(p.photos_per_detection, PhotosPerDetection::Geometric { mean: 2.0 });
        assert_eq!(serde_json::to_string(&p).unwrap(), json);
    }
}
