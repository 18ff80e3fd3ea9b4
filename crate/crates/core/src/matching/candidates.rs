use std::cmp::Ordering;
use std::collections::{BTreeMap, HashMap};

use serde::{Deserialize, Serialize};

use super::score::{cosine_from_parts, dot, squared_norm, Scorer};
use super::{Annotation, MatchError};

/// A proposed same-individual pair awaiting review. `a < b`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatchCandidate {
    pub a: String,
    pub b: String,
    pub score: f64,
}

/// Descending score, then lexicographic `(a, b)`.
pub(crate) fn review_order(x: &MatchCandidate, y: &MatchCandidate) -> Ordering {
    y.score.total_cmp(&x.score).then_with(|| x.a.cmp(&y.a)).then_with(|| x.b.cmp(&y.b))
}

/// Cosine candidates. Scores are computed exactly as [`super::score`] does.
pub fn generate_candidates(
    annotations: &[Annotation],
    threshold: f64,
    top_k: usize,
) -> Result<Vec<MatchCandidate>, MatchError> {
    let mut norms = Vec::with_capacity(annotations.len());
    for a in annotations {
        let s = squared_norm(&a.embedding);
        if s == 0.0 {
            return Err(MatchError::DegenerateEmbedding(a.annotation_id.clone()));
        }
        norms.push(s);
    }
    collect(annotations, threshold, top_k, |i, j| {
        let (a, b) = (&annotations[i], &annotations[j]);
        if a.embedding.len() != b.embedding.len() {
            return Err(MatchError::Dimension { left: a.embedding.len(), right: b.embedding.len() });
        }
        Ok(cosine_from_parts(dot(&a.embedding, &b.embedding), norms[i], norms[j]))
    })
}

/// Candidates under an arbitrary scorer.
///
/// For each annotation, keeps its `top_k` best same-species partners scoring
/// at least `threshold` (ties go to the smaller partner id). The union of
/// those per-annotation lists is returned once per pair, in review order.
pub fn generate_candidates_with<S: Scorer + ?Sized>(
    scorer: &S,
    annotations: &[Annotation],
    threshold: f64,
    top_k: usize,
) -> Result<Vec<MatchCandidate>, MatchError> {
    collect(annotations, threshold, top_k, |i, j| scorer.score(&annotations[i], &annotations[j]))
}

fn collect<F>(
    annotations: &[Annotation],
    threshold: f64,
    top_k: usize,
    mut pair_score: F,
) -> Result<Vec<MatchCandidate>, MatchError>
where
    F: FnMut(usize, usize) -> Result<f64, MatchError>,
{
    if top_k == 0 {
        return Ok(Vec::new());
    }
    let mut by_species: BTreeMap<&str, Vec<usize>> = BTreeMap::new();
    for (i, a) in annotations.iter().enumerate() {
        by_species.entry(a.species.as_str()).or_default().push(i);
    }

    let mut chosen: HashMap<(usize, usize), f64> = HashMap::new();
    for members in by_species.values() {
        let mut partners: Vec<Vec<(f64, usize)>> = vec![Vec::new(); members.len()];
        for (x, &i) in members.iter().enumerate() {
            for (y, &j) in members.iter().enumerate().skip(x + 1) {
                if annotations[i].annotation_id == annotations[j].annotation_id {
                    continue;
                }
                let s = pair_score(i, j)?;
                if s >= threshold {
                    partners[x].push((s, j));
                    partners[y].push((s, i));
                }
            }
        }
        for (x, list) in partners.iter_mut().enumerate() {
            let i = members[x];
            list.sort_by(|p, q| {
                q.0.total_cmp(&p.0).then_with(|| annotations[p.1].annotation_id.cmp(&annotations[q.1].annotation_id))
            });
            for &(s, j) in list.iter().take(top_k) {
                chosen.insert((i.min(j), i.max(j)), s);
            }
        }
    }

    let mut out: Vec<MatchCandidate> = chosen
        .into_iter()
        .map(|((i, j), score)| {
            let (x, y) = (&annotations[i].annotation_id, &annotations[j].annotation_id);
            let (a, b) = if x < y { (x, y) } else { (y, x) };
            MatchCandidate { a: a.clone(), b: b.clone(), score }
        })
        .collect();
    out.sort_by(review_order);
    Ok(out)
}
