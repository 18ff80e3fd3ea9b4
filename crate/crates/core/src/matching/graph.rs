use std::collections::BTreeMap;
use std::fmt;

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};

use super::candidates::{review_order, MatchCandidate};
use super::{Annotation, MatchError};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Same,
    Different,
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Verdict::Same => "same",
            Verdict::Different => "different",
        })
    }
}

/// Unordered annotation pair stored as `(min, max)`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Pair {
    pub a: String,
    pub b: String,
}

impl Pair {
    pub fn new(x: impl Into<String>, y: impl Into<String>) -> Result<Pair, MatchError> {
        let (x, y) = (x.into(), y.into());
        match x.cmp(&y) {
            std::cmp::Ordering::Equal => Err(MatchError::SelfMatch(x)),
            std::cmp::Ordering::Less => Ok(Pair { a: x, b: y }),
            std::cmp::Ordering::Greater => Ok(Pair { a: y, b: x }),
        }
    }
}

/// One reviewer verdict. This is also the decision-log line format.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DecisionEdge {
    pub a: String,
    pub b: String,
    pub verdict: Verdict,
    pub decided_by: String,
    pub decided_at: DateTime<Utc>,
}

impl DecisionEdge {
    pub fn pair(&self) -> Pair {
        Pair { a: self.a.clone(), b: self.b.clone() }
    }
}

/// Identification state: annotations, scored candidates, and the live
/// verdict per pair backed by an append-only decision log.
///
/// Later verdicts on a pair supersede earlier ones; the log keeps both.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct MatchGraph {
    species: BTreeMap<String, String>,
    candidates: Vec<MatchCandidate>,
    candidate_index: BTreeMap<Pair, usize>,
    live: BTreeMap<Pair, DecisionEdge>,
    log: Vec<DecisionEdge>,
}

impl MatchGraph {
    pub fn new<'a, I>(annotations: I) -> Self
    where
        I: IntoIterator<Item = &'a Annotation>,
    {
        let mut graph = MatchGraph::default();
        graph.add_annotations(annotations);
        graph
    }

    pub fn add_annotations<'a, I>(&mut self, annotations: I)
    where
        I: IntoIterator<Item = &'a Annotation>,
    {
        for a in annotations {
            self.species.insert(a.annotation_id.clone(), a.species.clone());
        }
    }

    /// Replaces the candidate list. Pairs naming unknown annotations are
    /// dropped.
    pub fn set_candidates(&mut self, mut candidates: Vec<MatchCandidate>) {
        candidates.retain(|c| self.contains(&c.a) && self.contains(&c.b) && c.a != c.b);
        candidates.sort_by(review_order);
        candidates.dedup_by(|x, y| x.a == y.a && x.b == y.b);
        self.candidate_index =
            candidates.iter().enumerate().map(|(i, c)| (Pair { a: c.a.clone(), b: c.b.clone() }, i)).collect();
        self.candidates = candidates;
    }

    pub fn contains(&self, annotation_id: &str) -> bool {
        self.species.contains_key(annotation_id)
    }

    pub fn species_of(&self, annotation_id: &str) -> Option<&str> {
        self.species.get(annotation_id).map(String::as_str)
    }

    /// Annotation ids in lexicographic order.
    pub fn annotation_ids(&self) -> impl Iterator<Item = &str> {
        self.species.keys().map(String::as_str)
    }

    pub fn annotation_count(&self) -> usize {
        self.species.len()
    }

    /// Candidates in review order.
    pub fn candidates(&self) -> &[MatchCandidate] {
        &self.candidates
    }

    pub fn candidate(&self, pair: &Pair) -> Option<&MatchCandidate> {
        self.candidate_index.get(pair).map(|&i| &self.candidates[i])
    }

    pub fn verdict(&self, pair: &Pair) -> Option<&DecisionEdge> {
        self.live.get(pair)
    }

    /// Live verdicts, one per pair, ordered by pair.
    pub fn live_decisions(&self) -> impl Iterator<Item = &DecisionEdge> {
        self.live.values()
    }

    /// Every decision ever applied, in application order.
    pub fn log(&self) -> &[DecisionEdge] {
        &self.log
    }

    /// Highest-scoring candidate with no live verdict.
    pub fn next_undecided(&self) -> Option<&MatchCandidate> {
        self.candidates.iter().find(|c| !self.live.contains_key(&Pair { a: c.a.clone(), b: c.b.clone() }))
    }

    pub fn undecided_count(&self) -> usize {
        self.candidates.iter().filter(|c| !self.live.contains_key(&Pair { a: c.a.clone(), b: c.b.clone() })).count()
    }

    /// Records a verdict on `(x, y)`. Any pair of known same-species
    /// annotations may be decided, candidate or not.
    pub fn apply_decision(
        &mut self,
        x: &str,
        y: &str,
        verdict: Verdict,
        reviewer: &str,
        at: DateTime<Utc>,
    ) -> Result<&DecisionEdge, MatchError> {
        let pair = Pair::new(x, y)?;
        self.apply_edge(DecisionEdge { a: pair.a, b: pair.b, verdict, decided_by: reviewer.to_owned(), decided_at: at })
    }

    /// Applies a decision-log entry verbatim (after normalizing pair order).
    pub fn apply_edge(&mut self, mut edge: DecisionEdge) -> Result<&DecisionEdge, MatchError> {
        let pair = Pair::new(std::mem::take(&mut edge.a), std::mem::take(&mut edge.b))?;
        let sa = self.species.get(&pair.a).ok_or_else(|| MatchError::UnknownAnnotation(pair.a.clone()))?;
        let sb = self.species.get(&pair.b).ok_or_else(|| MatchError::UnknownAnnotation(pair.b.clone()))?;
        if sa != sb {
            return Err(MatchError::SpeciesMismatch { a: pair.a, b: pair.b });
        }
        edge.a = pair.a.clone();
        edge.b = pair.b.clone();
        self.log.push(edge.clone());
        let slot = self.live.entry(pair).or_insert_with(|| edge.clone());
        *slot = edge;
        Ok(slot)
    }

    /// Marks every undecided candidate scoring at least `threshold` as
    /// "same". Off unless a caller invokes it; returns how many verdicts
    /// were added.
    pub fn auto_accept(&mut self, threshold: f64, reviewer: &str, at: DateTime<Utc>) -> usize {
        let accepted: Vec<(String, String)> = self
            .candidates
            .iter()
            .filter(|c| c.score >= threshold)
            .filter(|c| !self.live.contains_key(&Pair { a: c.a.clone(), b: c.b.clone() }))
            .map(|c| (c.a.clone(), c.b.clone()))
            .collect();
        for (a, b) in &accepted {
            self.apply_decision(a, b, Verdict::Same, reviewer, at)
                .expect("candidates reference known same-species annotations");
        }
        accepted.len()
    }
}
