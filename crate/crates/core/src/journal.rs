//! Append-only JSON-lines journals.
//!
//! A data directory holds two files. `dataset.pcjl` is the dataset header
//! followed by every accepted photo record. `decisions.jsonl` holds every
//! reviewer verdict in application order. Replaying both reconstructs the
//! match graph exactly.

use std::fs::{File, OpenOptions};
use std::io::{self, BufRead, BufReader, Write};
use std::path::{Path, PathBuf};

use serde::Serialize;
use thiserror::Error;

use crate::matching::{DecisionEdge, MatchError, MatchGraph};
use crate::sighting::{Dataset, DatasetError, IngestReport, PhotoRecord};

pub const DATASET_FILE: &str = "dataset.pcjl";
pub const DECISIONS_FILE: &str = "decisions.jsonl";

#[derive(Debug, Error)]
pub enum JournalError {
    #[error("i/o error on {path}: {source}")]
    Io { path: PathBuf, source: io::Error },

    #[error(transparent)]
    Dataset(#[from] DatasetError),

    #[error("decision log line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("decision log line {line}: {source}")]
    Decision { line: usize, source: MatchError },
}

fn io_err(path: &Path) -> impl FnOnce(io::Error) -> JournalError + '_ {
    move |source| JournalError::Io { path: path.to_owned(), source }
}

/// Append handle for one JSON-lines file. Every append is flushed before it
/// returns.
#[derive(Debug)]
pub struct Journal {
    path: PathBuf,
    file: File,
}

impl Journal {
    pub fn open_append(path: impl Into<PathBuf>) -> Result<Journal, JournalError> {
        let path = path.into();
        let file = OpenOptions::new().create(true).append(true).open(&path).map_err(io_err(&path))?;
        Ok(Journal { path, file })
    }

    pub fn path(&self) -> &Path {
        &self.path
    }

    pub fn append<T: Serialize>(&mut self, value: &T) -> Result<(), JournalError> {
        let mut line =
            serde_json::to_vec(value).map_err(|e| JournalError::Io { path: self.path.clone(), source: e.into() })?;
        line.push(b'\n');
        self.file.write_all(&line).map_err(io_err(&self.path))?;
        self.file.flush().map_err(io_err(&self.path))
    }
}

/// Loads `path` (creating it with a header if absent or empty) and returns
/// the dataset plus an append handle positioned at its end.
pub fn open_dataset(path: &Path, embedding_dim: usize) -> Result<(Dataset, IngestReport, Journal), JournalError> {
    let existing = match File::open(path) {
        Ok(f) => Some(Dataset::read_pcjl(BufReader::new(f))?),
        Err(e) if e.kind() == io::ErrorKind::NotFound => None,
        Err(e) => return Err(io_err(path)(e)),
    };
    let empty_file = std::fs::metadata(path).map(|m| m.len() == 0).unwrap_or(true);
    let (dataset, report) = match existing {
        Some(loaded) if !empty_file => loaded,
        _ => (Dataset::new(embedding_dim), IngestReport::default()),
    };
    let mut journal = Journal::open_append(path)?;
    if empty_file {
        journal.append(&dataset.header())?;
    }
    Ok((dataset, report, journal))
}

/// Inserts records into `dataset`, journaling each accepted one.
pub fn ingest_journaled<I>(
    dataset: &mut Dataset,
    journal: &mut Journal,
    records: I,
) -> Result<IngestReport, JournalError>
where
    I: IntoIterator<Item = Result<PhotoRecord, crate::sighting::RecordError>>,
{
    let mut report = IngestReport::default();
    for item in records {
        let before = dataset.len();
        report.merge(dataset.ingest(std::iter::once(item)));
        if dataset.len() > before {
            journal.append(dataset.records().last().expect("just inserted"))?;
        }
    }
    Ok(report)
}

/// Parses a decision log. Blank lines are skipped; line numbers are 1-based.
pub fn read_decision_log<R: BufRead>(reader: R) -> Result<Vec<DecisionEdge>, JournalError> {
    let mut out = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line.map_err(|source| JournalError::Io { path: PathBuf::from("<decision log>"), source })?;
        if line.trim().is_empty() {
            continue;
        }
        let edge =
            serde_json::from_str(&line).map_err(|e| JournalError::Parse { line: i + 1, message: e.to_string() })?;
        out.push(edge);
    }
    Ok(out)
}

pub fn read_decision_file(path: &Path) -> Result<Vec<DecisionEdge>, JournalError> {
    match File::open(path) {
        Ok(f) => read_decision_log(BufReader::new(f)),
        Err(e) if e.kind() == io::ErrorKind::NotFound => Ok(Vec::new()),
        Err(e) => Err(io_err(path)(e)),
    }
}

/// Applies logged decisions in order. Position `i` in `edges` is reported
/// as line `i + 1` on failure.
pub fn replay_decisions(
    graph: &mut MatchGraph,
    edges: impl IntoIterator<Item = DecisionEdge>,
) -> Result<usize, JournalError> {
    let mut applied = 0;
    for (i, edge) in edges.into_iter().enumerate() {
        graph.apply_edge(edge).map_err(|source| JournalError::Decision { line: i + 1, source })?;
        applied += 1;
    }
    Ok(applied)
}

/// Serializes decisions exactly as the journal stores them.
pub fn write_decision_log<W: Write>(mut writer: W, edges: &[DecisionEdge]) -> io::Result<()> {
    for e in edges {
        serde_json::to_writer(&mut writer, e)?;
        writer.write_all(b"\n")?;
    }
    Ok(())
}
