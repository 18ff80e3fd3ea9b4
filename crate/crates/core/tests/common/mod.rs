#![allow(dead_code)]

use chrono::{DateTime, TimeDelta, Utc};
use photocensus::sighting::{AnnotationInput, PhotoRecord};

pub fn fixture(name: &str) -> std::path::PathBuf {
    std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures").join(name)
}

pub fn day(d: i64) -> DateTime<Utc> {
    "2016-01-30T08:00:00Z".parse::<DateTime<Utc>>().unwrap() + TimeDelta::days(d)
}

/// One-annotation photo whose embedding is the unit basis vector `axis`.
pub fn photo(id: &str, species: &str, when: DateTime<Utc>, axis: usize, dim: usize) -> PhotoRecord {
    let mut embedding = vec![0.0; dim];
    embedding[axis % dim] = 1.0;
    PhotoRecord {
        photo_id: id.into(),
        camera_id: "cam-1".into(),
        car_id: None,
        timestamp: when,
        lat: 0.5,
        lon: 37.0,
        species: species.into(),
        annotations: vec![AnnotationInput { bbox: [0, 0, 8, 8], embedding, quality: 1.0 }],
    }
}
