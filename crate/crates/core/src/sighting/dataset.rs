use std::collections::HashMap;
use std::io::{self, BufRead, Write};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::record::{parse_photo_record, Annotation, PhotoRecord, RecordError};

pub const FORMAT_VERSION: u32 = 1;
pub const DEFAULT_EMBEDDING_DIM: usize = 64;

/// First line of a `.pcjl` dataset file.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct DatasetHeader {
    pub format_version: u32,
    pub embedding_dim: usize,
}

#[derive(Debug, Error)]
pub enum DatasetError {
    #[error("i/o error: {0}")]
    Io(#[from] io::Error),

    #[error("line 1 is not a dataset header: {0}")]
    BadHeader(String),

    #[error("unsupported format_version {0}")]
    UnsupportedVersion(u32),

    #[error("embedding_dim must be at least 1")]
    ZeroDimension,
}

/// Outcome of inserting one record.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Inserted {
    Accepted,
    Duplicate,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Rejection {
    /// Zero-based position in the input stream.
    pub index: usize,
    pub error: String,
}

/// Tally of one ingestion pass. The three counts always sum to the number of
/// input records.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct IngestReport {
    pub accepted: usize,
    pub duplicates_skipped: usize,
    pub rejected: usize,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub rejections: Vec<Rejection>,
}

impl IngestReport {
    pub fn total(&self) -> usize {
        self.accepted + self.duplicates_skipped + self.rejected
    }

    pub fn merge(&mut self, other: IngestReport) {
        let offset = self.total();
        self.accepted += other.accepted;
        self.duplicates_skipped += other.duplicates_skipped;
        self.rejected += other.rejected;
        self.rejections.extend(other.rejections.into_iter().map(|mut r| {
            r.index += offset;
            r
        }));
    }
}

/// The stored collection of photo records. Each `photo_id` appears at most
/// once; the first submission wins.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    embedding_dim: usize,
    records: Vec<PhotoRecord>,
    index: HashMap<String, usize>,
}

impl Default for Dataset {
    fn default() -> Self {
        Dataset::new(DEFAULT_EMBEDDING_DIM)
    }
}

impl Dataset {
    pub fn new(embedding_dim: usize) -> Self {
        Dataset { embedding_dim, records: Vec::new(), index: HashMap::new() }
    }

    pub fn embedding_dim(&self) -> usize {
        self.embedding_dim
    }

    pub fn header(&self) -> DatasetHeader {
        DatasetHeader { format_version: FORMAT_VERSION, embedding_dim: self.embedding_dim }
    }

    /// Records in ingestion order.
    pub fn records(&self) -> &[PhotoRecord] {
        &self.records
    }

    pub fn get(&self, photo_id: &str) -> Option<&PhotoRecord> {
        self.index.get(photo_id).map(|&i| &self.records[i])
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn annotation_count(&self) -> usize {
        self.records.iter().map(|r| r.annotations.len()).sum()
    }

    /// All annotations in record order.
    pub fn annotations(&self) -> Vec<Annotation> {
        self.records.iter().flat_map(PhotoRecord::to_annotations).collect()
    }

    /// Annotations of one species, in record order.
    pub fn species_annotations(&self, species: &str) -> Vec<Annotation> {
        self.records.iter().filter(|r| r.species == species).flat_map(PhotoRecord::to_annotations).collect()
    }

    /// Distinct species labels, sorted.
    pub fn species(&self) -> Vec<String> {
        let mut out: Vec<String> = self.records.iter().map(|r| r.species.clone()).collect();
        out.sort();
        out.dedup();
        out
    }

    /// Inserts a validated record. A record whose annotations disagree with
    /// the dataset's embedding dimension is rejected.
    pub fn insert(&mut self, record: PhotoRecord) -> Result<Inserted, RecordError> {
        record.validate()?;
        if let Some(dim) = record.embedding_dim() {
            if dim != self.embedding_dim {
                return Err(RecordError::validation(
                    "annotations.embedding",
                    format!("dimension {dim}, dataset expects {}", self.embedding_dim),
                ));
            }
        }
        if self.index.contains_key(&record.photo_id) {
            return Ok(Inserted::Duplicate);
        }
        self.index.insert(record.photo_id.clone(), self.records.len());
        self.records.push(record);
        Ok(Inserted::Accepted)
    }

    pub fn ingest<I>(&mut self, records: I) -> IngestReport
    where
        I: IntoIterator<Item = Result<PhotoRecord, RecordError>>,
    {
        let mut report = IngestReport::default();
        for (index, item) in records.into_iter().enumerate() {
            match item.and_then(|r| self.insert(r)) {
                Ok(Inserted::Accepted) => report.accepted += 1,
                Ok(Inserted::Duplicate) => report.duplicates_skipped += 1,
                Err(e) => {
                    report.rejected += 1;
                    report.rejections.push(Rejection { index, error: e.to_string() });
                }
            }
        }
        report
    }

    /// Ingests JSON-lines text, one record per non-blank line.
    pub fn ingest_lines(&mut self, text: &str) -> IngestReport {
        self.ingest(text.lines().filter(|l| !l.trim().is_empty()).map(parse_photo_record))
    }

    /// Reads a `.pcjl` file. An empty input yields an empty dataset with the
    /// default embedding dimension.
    pub fn read_pcjl<R: BufRead>(reader: R) -> Result<(Dataset, IngestReport), DatasetError> {
        let mut lines = reader.lines();
        let header = loop {
            match lines.next() {
                None => return Ok((Dataset::default(), IngestReport::default())),
                Some(line) => {
                    let line = line?;
                    if !line.trim().is_empty() {
                        break parse_header(&line)?;
                    }
                }
            }
        };
        let mut dataset = Dataset::new(header.embedding_dim);
        let mut report = IngestReport::default();
        for line in lines {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            report.merge(dataset.ingest(std::iter::once(parse_photo_record(&line))));
        }
        Ok((dataset, report))
    }

    pub fn write_pcjl<W: Write>(&self, mut writer: W) -> io::Result<()> {
        writeln!(writer, "{}", serde_json::to_string(&self.header())?)?;
        for record in &self.records {
            writeln!(writer, "{}", serde_json::to_string(record)?)?;
        }
        Ok(())
    }
}

pub(crate) fn parse_header(line: &str) -> Result<DatasetHeader, DatasetError> {
    let header: DatasetHeader = serde_json::from_str(line).map_err(|e| DatasetError::BadHeader(e.to_string()))?;
    if header.format_version != FORMAT_VERSION {
        return Err(DatasetError::UnsupportedVersion(header.format_version));
    }
    if header.embedding_dim == 0 {
        return Err(DatasetError::ZeroDimension);
    }
    Ok(header)
}
