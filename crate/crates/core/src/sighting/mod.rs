//! Sighting evidence: photo records, the deduplicated dataset built from
//! them, sampling-occasion assignment and collection statistics.

mod dataset;
mod occasion;
mod record;
mod stats;

pub use dataset::{Dataset, DatasetError, DatasetHeader, IngestReport, Inserted, Rejection};
pub use dataset::{DEFAULT_EMBEDDING_DIM, FORMAT_VERSION};
pub use occasion::{assign_occasions, ConfigError, OccasionMap, OccasionMode, OccasionRule, OccasionSetting};
pub use record::RecordError;
pub use record::{annotation_id, parse_photo_record, Annotation, AnnotationInput, PhotoRecord};
pub use stats::{collection_stats, CollectionStats};
