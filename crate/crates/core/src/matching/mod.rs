//! Semi-automated identification: similarity scoring, candidate pairs,
//! reviewer verdicts and clustering of annotations into individuals.
//!
//! Only "same" verdicts merge annotations. Unreviewed candidates never do,
//! unless a pipeline explicitly opts in through [`MatchGraph::auto_accept`].

mod candidates;
mod cluster;
mod graph;
mod score;

pub use candidates::{generate_candidates, generate_candidates_with, MatchCandidate};
pub use cluster::{cluster_individuals, detect_conflicts, Conflict, IndividualPartition};
pub use graph::{DecisionEdge, MatchGraph, Pair, Verdict};
pub use score::{score, CosineScorer, Scorer};

pub use crate::sighting::Annotation;

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MatchError {
    #[error("embedding dimensions differ ({left} vs {right})")]
    Dimension { left: usize, right: usize },

    #[error("embedding of `{0}` has zero norm")]
    DegenerateEmbedding(String),

    #[error("an annotation cannot be matched with itself (`{0}`)")]
    SelfMatch(String),

    #[error("unknown annotation `{0}`")]
    UnknownAnnotation(String),

    #[error("`{a}` and `{b}` belong to different species")]
    SpeciesMismatch { a: String, b: String },
}
