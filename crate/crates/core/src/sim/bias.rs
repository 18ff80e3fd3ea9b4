use std::collections::BTreeMap;

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::rng::{stream, Purpose};
use super::SimError;
use crate::sighting::PhotoRecord;

/// Which shared photos a platform keeps.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum PlatformFilter {
    #[default]
    PassAll,
    /// Keep photos whose best annotation quality is at least `min`.
    MinQuality { min: f64 },
    /// Keep only the listed species.
    Species { allow: Vec<String> },
}

impl PlatformFilter {
    pub fn keeps(&self, photo: &PhotoRecord) -> bool {
        match self {
            PlatformFilter::PassAll => true,
            PlatformFilter::MinQuality { min } => photo.annotations.iter().any(|a| a.quality >= *min),
            PlatformFilter::Species { allow } => allow.contains(&photo.species),
        }
    }
}

/// Photographing, sharing and platform biases.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BiasLayerConfig {
    /// Relative attractiveness per species; applied while photographing.
    #[serde(default)]
    pub photographing_bias: BTreeMap<String, f64>,
    pub sharing_prob: f64,
    #[serde(default)]
    pub platform_filter: PlatformFilter,
}

impl Default for BiasLayerConfig {
    fn default() -> Self {
        BiasLayerConfig {
            photographing_bias: BTreeMap::new(),
            sharing_prob: 1.0,
            platform_filter: PlatformFilter::PassAll,
        }
    }
}

impl BiasLayerConfig {
    pub fn validate(&self) -> Result<(), SimError> {
        if !(0.0..=1.0).contains(&self.sharing_prob) {
            return Err(SimError::InvalidLayers("sharing_prob must be in [0, 1]".into()));
        }
        if self.photographing_bias.values().any(|&w| !(w > 0.0 && w.is_finite())) {
            return Err(SimError::InvalidLayers("photographing_bias weights must be positive".into()));
        }
        Ok(())
    }
}

/// Independent per-photo thinning: each photo is kept with probability
/// `sharing_prob` and then only if the platform filter accepts it. Exactly
/// one uniform draw is made per input photo.
pub fn apply_bias_layers(
    records: &[PhotoRecord],
    layers: &BiasLayerConfig,
    seed: u64,
) -> Result<Vec<PhotoRecord>, SimError> {
    layers.validate()?;
    let mut rng = stream(seed, Purpose::Thinning);
    Ok(records
        .iter()
        .filter(|r| {
            let shared = rng.random::<f64>() < layers.sharing_prob;
            shared && layers.platform_filter.keeps(r)
        })
        .cloned()
        .collect())
}
