use std::collections::{BTreeMap, BTreeSet};

use chrono::{DateTime, NaiveDate, TimeDelta, Utc};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::dataset::Dataset;
use super::record::annotation_id;

/// annotation_id -> zero-based occasion index.
pub type OccasionMap = BTreeMap<String, u32>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ConfigError {
    #[error("fixed-window occasions need both window_start and window_length")]
    MissingWindow,

    #[error("window_length must be positive")]
    NonPositiveWindow,

    #[error("occasion index exceeds u32 range")]
    IndexOverflow,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OccasionMode {
    /// One occasion per distinct UTC calendar date.
    CalendarDay,
    /// Consecutive windows of equal length starting at `window_start`.
    FixedWindow,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct OccasionRule {
    pub mode: OccasionMode,
    pub window_start: Option<DateTime<Utc>>,
    pub window_length: Option<TimeDelta>,
}

impl OccasionRule {
    pub fn calendar_day() -> Self {
        OccasionRule { mode: OccasionMode::CalendarDay, window_start: None, window_length: None }
    }

    pub fn fixed_window(start: DateTime<Utc>, length: TimeDelta) -> Self {
        OccasionRule { mode: OccasionMode::FixedWindow, window_start: Some(start), window_length: Some(length) }
    }
}

impl Default for OccasionRule {
    fn default() -> Self {
        OccasionRule::calendar_day()
    }
}

/// Config-file form of an [`OccasionRule`].
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum OccasionSetting {
    #[default]
    CalendarDay,
    FixedWindow {
        window_start: DateTime<Utc>,
        window_seconds: i64,
    },
}

impl From<OccasionSetting> for OccasionRule {
    fn from(setting: OccasionSetting) -> Self {
        match setting {
            OccasionSetting::CalendarDay => OccasionRule::calendar_day(),
            OccasionSetting::FixedWindow { window_start, window_seconds } => {
                OccasionRule::fixed_window(window_start, TimeDelta::seconds(window_seconds))
            }
        }
    }
}

/// Maps every annotation to its sampling occasion. All arithmetic is in UTC.
/// Under a fixed window, annotations from photos taken before the window
/// start are left out of the map.
pub fn assign_occasions(dataset: &Dataset, rule: &OccasionRule) -> Result<OccasionMap, ConfigError> {
    let mut out = OccasionMap::new();
    match rule.mode {
        OccasionMode::CalendarDay => {
            let dates: BTreeSet<NaiveDate> = dataset.records().iter().map(|r| r.timestamp.date_naive()).collect();
            let ordinal: BTreeMap<NaiveDate, u32> = dates.into_iter().zip(0u32..).collect();
            for rec in dataset.records() {
                let occ = ordinal[&rec.timestamp.date_naive()];
                for i in 0..rec.annotations.len() {
                    out.insert(annotation_id(&rec.photo_id, i), occ);
                }
            }
        }
        OccasionMode::FixedWindow => {
            let (Some(start), Some(length)) = (rule.window_start, rule.window_length) else {
                return Err(ConfigError::MissingWindow);
            };
            let length = total_nanos(length);
            if length <= 0 {
                return Err(ConfigError::NonPositiveWindow);
            }
            for rec in dataset.records() {
                let offset = total_nanos(rec.timestamp - start);
                if offset < 0 {
                    continue;
                }
                let occ = u32::try_from(offset / length).map_err(|_| ConfigError::IndexOverflow)?;
                for i in 0..rec.annotations.len() {
                    out.insert(annotation_id(&rec.photo_id, i), occ);
                }
            }
        }
    }
    Ok(out)
}

fn total_nanos(d: TimeDelta) -> i128 {
    i128::from(d.num_seconds()) * 1_000_000_000 + i128::from(d.subsec_nanos())
}
