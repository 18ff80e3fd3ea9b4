use std::collections::HashMap;
use std::fs;

use chrono::{DateTime, Utc};
use photocensus::census::{census_report, CensusError, CensusReport, Estimator};
use photocensus::journal::{
    ingest_journaled, open_dataset, read_decision_file, replay_decisions, Journal, DATASET_FILE, DECISIONS_FILE,
};
use photocensus::matching::{
    cluster_individuals, generate_candidates, DecisionEdge, IndividualPartition, MatchGraph, Pair, Verdict,
};
use photocensus::sighting::{
    assign_occasions, parse_photo_record, AnnotationInput, Dataset, IngestReport, OccasionRule, PhotoRecord,
};

use crate::config::ServerConfig;
use crate::error::{ApiError, ServerError};

/// Dataset, match graph and their journals. Mutations go through `&mut self`
/// and are journaled before they become visible.
#[derive(Debug)]
pub struct Store {
    dataset: Dataset,
    graph: MatchGraph,
    /// annotation_id -> (record index, annotation index)
    locations: HashMap<String, (usize, usize)>,
    data_journal: Journal,
    decision_journal: Journal,
    threshold: f64,
    top_k: usize,
    occasions: OccasionRule,
}

/// Outcome of a review decision request.
#[derive(Debug, Clone, PartialEq)]
pub enum DecisionOutcome {
    Applied(DecisionEdge),
    /// The pair already has a live verdict and supersede was not requested.
    AlreadyDecided(DecisionEdge),
}

impl Store {
    /// Opens or creates the journals under `config.data_dir` and replays them.
    pub fn open(config: &ServerConfig) -> Result<Store, ServerError> {
        config.validate()?;
        fs::create_dir_all(&config.data_dir)?;
        let (dataset, report, data_journal) = open_dataset(&config.data_dir.join(DATASET_FILE), config.embedding_dim)?;
        if report.rejected > 0 {
            tracing::warn!(rejected = report.rejected, "dataset journal contains invalid lines");
        }
        let decisions_path = config.data_dir.join(DECISIONS_FILE);
        let edges = read_decision_file(&decisions_path)?;
        let mut store = Store {
            graph: MatchGraph::new(&dataset.annotations()),
            dataset,
            locations: HashMap::new(),
            data_journal,
            decision_journal: Journal::open_append(decisions_path)?,
            threshold: config.threshold,
            top_k: config.top_k,
            occasions: config.occasions.into(),
        };
        let replayed = replay_decisions(&mut store.graph, edges)?;
        store.refresh()?;
        tracing::info!(photos = store.dataset.len(), decisions = replayed, "journals replayed");
        Ok(store)
    }

    fn refresh(&mut self) -> Result<(), photocensus::matching::MatchError> {
        self.locations.clear();
        for (r, rec) in self.dataset.records().iter().enumerate() {
            for i in 0..rec.annotations.len() {
                self.locations.insert(photocensus::sighting::annotation_id(&rec.photo_id, i), (r, i));
            }
        }
        let annotations = self.dataset.annotations();
        self.graph.add_annotations(&annotations);
        self.graph.set_candidates(generate_candidates(&annotations, self.threshold, self.top_k)?);
        Ok(())
    }

    pub fn dataset(&self) -> &Dataset {
        &self.dataset
    }

    pub fn graph(&self) -> &MatchGraph {
        &self.graph
    }

    pub fn partition(&self) -> IndividualPartition {
        cluster_individuals(&self.graph)
    }

    /// The record and annotation behind an annotation id.
    pub fn locate(&self, annotation_id: &str) -> Option<(&PhotoRecord, &AnnotationInput)> {
        let &(r, i) = self.locations.get(annotation_id)?;
        let rec = &self.dataset.records()[r];
        Some((rec, &rec.annotations[i]))
    }

    /// Ingests JSON-lines text and regenerates candidates.
    pub fn ingest(&mut self, text: &str) -> Result<IngestReport, ApiError> {
        let lines = text.lines().filter(|l| !l.trim().is_empty()).map(parse_photo_record);
        let report = ingest_journaled(&mut self.dataset, &mut self.data_journal, lines)?;
        if report.accepted > 0 {
            self.refresh().map_err(|e| ApiError::Internal(e.to_string()))?;
        }
        Ok(report)
    }

    /// Records a verdict. Validation happens before the journal append so a
    /// rejected request leaves no trace.
    pub fn decide(
        &mut self,
        a: &str,
        b: &str,
        verdict: Verdict,
        supersede: bool,
        reviewer: &str,
        at: DateTime<Utc>,
    ) -> Result<DecisionOutcome, ApiError> {
        let pair = Pair::new(a, b).map_err(|e| ApiError::BadRequest(e.to_string()))?;
        let species_a =
            self.graph.species_of(&pair.a).ok_or_else(|| ApiError::NotFound(format!("no annotation {}", pair.a)))?;
        let species_b =
            self.graph.species_of(&pair.b).ok_or_else(|| ApiError::NotFound(format!("no annotation {}", pair.b)))?;
        if species_a != species_b {
            return Err(ApiError::BadRequest(format!("{} and {} are different species", pair.a, pair.b)));
        }
        if let Some(existing) = self.graph.verdict(&pair) {
            if !supersede {
                return Ok(DecisionOutcome::AlreadyDecided(existing.clone()));
            }
        }
        let edge = DecisionEdge { a: pair.a, b: pair.b, verdict, decided_by: reviewer.to_owned(), decided_at: at };
        self.decision_journal.append(&edge)?;
        let applied = self.graph.apply_edge(edge).map_err(|e| ApiError::Internal(e.to_string()))?;
        Ok(DecisionOutcome::Applied(applied.clone()))
    }

    pub fn census(&self, species: &str, pair: (u32, u32), estimator: Estimator) -> Result<CensusReport, ApiError> {
        let occasions =
            assign_occasions(&self.dataset, &self.occasions).map_err(|e| ApiError::Internal(e.to_string()))?;
        census_report(&self.dataset, &self.partition(), &occasions, pair, species, estimator)
            .map_err(|e: CensusError| ApiError::BadRequest(e.to_string()))
    }
}
