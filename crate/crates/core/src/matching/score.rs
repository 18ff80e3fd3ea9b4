use super::{Annotation, MatchError};

/// Pairwise similarity between two annotations, in `[-1, 1]`.
///
/// Implementations must be symmetric. The cosine scorer stands in until a
/// real pattern matcher is plugged in.
pub trait Scorer: Send + Sync {
    fn score(&self, a: &Annotation, b: &Annotation) -> Result<f64, MatchError>;
}

#[derive(Debug, Clone, Copy, Default)]
pub struct CosineScorer;

impl Scorer for CosineScorer {
    fn score(&self, a: &Annotation, b: &Annotation) -> Result<f64, MatchError> {
        score(a, b)
    }
}

/// Cosine similarity of the two embeddings.
pub fn score(a: &Annotation, b: &Annotation) -> Result<f64, MatchError> {
    if a.embedding.len() != b.embedding.len() {
        return Err(MatchError::Dimension { left: a.embedding.len(), right: b.embedding.len() });
    }
    let sa = squared_norm(&a.embedding);
    if sa == 0.0 {
        return Err(MatchError::DegenerateEmbedding(a.annotation_id.clone()));
    }
    let sb = squared_norm(&b.embedding);
    if sb == 0.0 {
        return Err(MatchError::DegenerateEmbedding(b.annotation_id.clone()));
    }
    Ok(cosine_from_parts(dot(&a.embedding, &b.embedding), sa, sb))
}

pub(crate) fn squared_norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum()
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

// sqrt(s * s) == s exactly in IEEE arithmetic, so self-similarity is exactly 1.
pub(crate) fn cosine_from_parts(dot: f64, sa: f64, sb: f64) -> f64 {
    (dot / (sa * sb).sqrt()).clamp(-1.0, 1.0)
}
