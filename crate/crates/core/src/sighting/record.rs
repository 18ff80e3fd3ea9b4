use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Problems with a single input record. Ingestion tallies these instead of
/// failing the whole stream.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum RecordError {
    #[error("parse error at byte {offset}: {message}")]
    Parse { offset: usize, message: String },

    #[error("invalid `{field}`: {reason}")]
    Validation { field: String, reason: String },
}

impl RecordError {
    pub(crate) fn validation(field: impl Into<String>, reason: impl Into<String>) -> Self {
        RecordError::Validation { field: field.into(), reason: reason.into() }
    }

    /// Name of the offending field for validation errors.
    pub fn field(&self) -> Option<&str> {
        match self {
            RecordError::Validation { field, .. } => Some(field),
            RecordError::Parse { .. } => None,
        }
    }
}

/// One detected animal region as submitted with a photo.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnnotationInput {
    /// `[x, y, w, h]` in pixels.
    pub bbox: [u32; 4],
    pub embedding: Vec<f64>,
    pub quality: f64,
}

/// One photograph with its metadata and annotations. This is the unit of
/// the JSON-lines dataset format.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhotoRecord {
    pub photo_id: String,
    pub camera_id: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub car_id: Option<String>,
    pub timestamp: DateTime<Utc>,
    pub lat: f64,
    pub lon: f64,
    pub species: String,
    #[serde(default)]
    pub annotations: Vec<AnnotationInput>,
}

impl PhotoRecord {
    /// Embedding dimension shared by this record's annotations, if it has any.
    pub fn embedding_dim(&self) -> Option<usize> {
        self.annotations.first().map(|a| a.embedding.len())
    }

    /// Checks every record invariant that does not depend on the dataset.
    pub fn validate(&self) -> Result<(), RecordError> {
        if self.photo_id.is_empty() {
            return Err(RecordError::validation("photo_id", "must not be empty"));
        }
        if self.camera_id.is_empty() {
            return Err(RecordError::validation("camera_id", "must not be empty"));
        }
        if self.species.is_empty() {
            return Err(RecordError::validation("species", "must not be empty"));
        }
        if !(self.lat.is_finite() && (-90.0..=90.0).contains(&self.lat)) {
            return Err(RecordError::validation("lat", format!("{} outside [-90, 90]", self.lat)));
        }
        if !(self.lon.is_finite() && (-180.0..=180.0).contains(&self.lon)) {
            return Err(RecordError::validation("lon", format!("{} outside [-180, 180]", self.lon)));
        }
        let dim = self.embedding_dim();
        for (i, ann) in self.annotations.iter().enumerate() {
            let [_, _, w, h] = ann.bbox;
            if w == 0 || h == 0 {
                return Err(RecordError::validation(
                    format!("annotations[{i}].bbox"),
                    "width and height must be at least 1",
                ));
            }
            if !(ann.quality.is_finite() && (0.0..=1.0).contains(&ann.quality)) {
                return Err(RecordError::validation(
                    format!("annotations[{i}].quality"),
                    format!("{} outside [0, 1]", ann.quality),
                ));
            }
            let field = || format!("annotations[{i}].embedding");
            if ann.embedding.is_empty() {
                return Err(RecordError::validation(field(), "must not be empty"));
            }
            if Some(ann.embedding.len()) != dim {
                return Err(RecordError::validation(field(), "dimension differs within record"));
            }
            if ann.embedding.iter().any(|x| !x.is_finite()) {
                return Err(RecordError::validation(field(), "non-finite component"));
            }
            if ann.embedding.iter().all(|&x| x == 0.0) {
                return Err(RecordError::validation(field(), "zero norm"));
            }
        }
        Ok(())
    }

    /// Expands the record into dataset-level annotations, occasion unset.
    pub fn to_annotations(&self) -> impl Iterator<Item = Annotation> + '_ {
        self.annotations.iter().enumerate().map(|(i, ann)| Annotation {
            annotation_id: annotation_id(&self.photo_id, i),
            photo_id: self.photo_id.clone(),
            species: self.species.clone(),
            embedding: ann.embedding.clone(),
            quality: ann.quality,
            occasion: None,
        })
    }
}

/// Identifier of the `index`-th annotation of a photo. The photo id is
/// recoverable by splitting at the last `#`.
pub fn annotation_id(photo_id: &str, index: usize) -> String {
    format!("{photo_id}#{index}")
}

/// An annotation as the match graph and census see it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Annotation {
    pub annotation_id: String,
    pub photo_id: String,
    pub species: String,
    pub embedding: Vec<f64>,
    pub quality: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub occasion: Option<u32>,
}

// Mirrors PhotoRecord but keeps the timestamp as text so a bad value can be
// reported as a validation failure rather than a syntax error.
#[derive(Deserialize)]
struct RawRecord {
    photo_id: String,
    camera_id: String,
    #[serde(default)]
    car_id: Option<String>,
    timestamp: String,
    lat: f64,
    lon: f64,
    species: String,
    #[serde(default)]
    annotations: Vec<AnnotationInput>,
}

/// Parses and validates one line of the JSON-lines record format.
pub fn parse_photo_record(line: &str) -> Result<PhotoRecord, RecordError> {
    let raw: RawRecord = serde_json::from_str(line).map_err(|e| RecordError::Parse {
        offset: if e.is_eof() { line.len() } else { byte_offset(line, e.line(), e.column()) },
        message: e.to_string(),
    })?;
    let timestamp = DateTime::parse_from_rfc3339(&raw.timestamp)
        .map_err(|e| RecordError::validation("timestamp", e.to_string()))?
        .with_timezone(&Utc);
    let record = PhotoRecord {
        photo_id: raw.photo_id,
        camera_id: raw.camera_id,
        car_id: raw.car_id,
        timestamp,
        lat: raw.lat,
        lon: raw.lon,
        species: raw.species,
        annotations: raw.annotations,
    };
    record.validate()?;
    Ok(record)
}

// serde_json reports 1-based line and column; column counts bytes.
fn byte_offset(text: &str, line: usize, column: usize) -> usize {
    let line_start: usize = text.split_inclusive('\n').take(line.saturating_sub(1)).map(str::len).sum();
    (line_start + column.saturating_sub(1)).min(text.len())
}

#[cfg(test)]
mod tests {
    use super::*;

    const GOOD: &str = r#"{"photo_id":"p1","camera_id":"c1","car_id":"car1","timestamp":"2016-01-30T08:15:00Z","lat":0.5,"lon":37.2,"species":"grevys_zebra","annotations":[{"bbox":[0,0,10,10],"embedding":[1.0,0.0],"quality":0.9}]}"#;

    #[test]
    fn parses_well_formed_record() {
        let rec = parse_photo_record(GOOD).unwrap();
        assert_eq!(rec.photo_id, "p1");
        assert_eq!(rec.car_id.as_deref(), Some("car1"));
        assert_eq!(rec.annotations.len(), 1);
        assert_eq!(rec.embedding_dim(), Some(2));
    }

    #[test]
    fn latitude_out_of_range_names_field() {
        let line = GOOD.replace(r#""lat":0.5"#, r#""lat":91.0"#);
        let err = parse_photo_record(&line).unwrap_err();
        assert_eq!(err.field(), Some("lat"));
    }

    #[test]
    fn longitude_out_of_range_names_field() {
        let line = GOOD.replace(r#""lon":37.2"#, r#""lon":-180.5"#);
        assert_eq!(parse_photo_record(&line).unwrap_err().field(), Some("lon"));
    }

    #[test]
    fn boundary_coordinates_are_valid() {
        let line = GOOD.replace(r#""lat":0.5"#, r#""lat":-90.0"#).replace(r#""lon":37.2"#, r#""lon":180.0"#);
        assert!(parse_photo_record(&line).is_ok());
    }

    #[test]
    fn zero_annotations_is_valid() {
        let line = r#"{"photo_id":"p2","camera_id":"c1","timestamp":"2016-01-30T08:15:00Z","lat":0.5,"lon":37.2,"species":"grevys_zebra","annotations":[]}"#;
        let rec = parse_photo_record(line).unwrap();
        assert!(rec.annotations.is_empty());
        assert!(rec.car_id.is_none());
    }

    #[test]
    fn bad_timestamp_is_validation_error() {
        let line = GOOD.replace("2016-01-30T08:15:00Z", "2016-13-30T08:15:00Z");
        assert_eq!(parse_photo_record(&line).unwrap_err().field(), Some("timestamp"));
    }

    #[test]
    fn syntax_error_reports_byte_offset() {
        let line = r#"{"photo_id": "p1", "camera_id" "c1"}"#;
        match parse_photo_record(line).unwrap_err() {
            RecordError::Parse { offset, .. } => assert_eq!(offset, 31),
            other => panic!("expected parse error, got {other:?}"),
        }
    }

    #[test]
    fn truncated_line_offset_is_end_of_input() {
        let line = &GOOD[..40];
        match parse_photo_record(line).unwrap_err() {
            RecordError::Parse { offset, .. } => assert_eq!(offset, 40),
            other => panic!("expected parse error, got {other:?}"),
        }
    }

    #[test]
    fn degenerate_annotations_rejected() {
        let zero = GOOD.replace("[1.0,0.0]", "[0.0,0.0]");
        assert_eq!(parse_photo_record(&zero).unwrap_err().field(), Some("annotations[0].embedding"));
        let flat = GOOD.replace("[0,0,10,10]", "[0,0,0,10]");
        assert_eq!(parse_photo_record(&flat).unwrap_err().field(), Some("annotations[0].bbox"));
        let q = GOOD.replace(r#""quality":0.9"#, r#""quality":1.5"#);
        assert_eq!(parse_photo_record(&q).unwrap_err().field(), Some("annotations[0].quality"));
    }

    #[test]
    fn annotation_ids_follow_photo_and_index() {
        let rec = parse_photo_record(GOOD).unwrap();
        let anns: Vec<_> = rec.to_annotations().collect();
        assert_eq!(anns[0].annotation_id, "p1#0");
        assert_eq!(anns[0].species, "grevys_zebra");
    }
}
