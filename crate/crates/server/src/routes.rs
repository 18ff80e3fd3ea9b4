use axum::extract::{Path, Query, State};
use axum::http::{header, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use chrono::{DateTime, Utc};
use photocensus::census::{CensusReport, Estimator};
use photocensus::matching::{DecisionEdge, Pair, Verdict};
use photocensus::sighting::{collection_stats, CollectionStats, PhotoRecord};
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::auth::{Caller, Role};
use crate::error::ApiError;
use crate::store::{DecisionOutcome, Store};
use crate::AppState;

pub fn router(state: AppState) -> Router {
    Router::new()
        .route("/encounters", post(post_encounters))
        .route("/individuals", get(list_individuals))
        .route("/individuals/{id}", get(get_individual))
        .route("/census", get(get_census))
        .route("/review/next", get(review_next))
        .route("/review/decision", post(review_decision))
        .route("/stats", get(get_stats))
        .route("/export", get(export))
        .with_state(state)
}

fn require_curator(caller: &Caller, action: &'static str) -> Result<(), ApiError> {
    if caller.role.can_curate() {
        Ok(())
    } else {
        Err(ApiError::Forbidden(caller.role, action))
    }
}

/// One annotation as a caller may see it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnnotationView {
    pub annotation_id: String,
    pub photo_id: String,
    pub camera_id: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub car_id: Option<String>,
    pub timestamp: DateTime<Utc>,
    pub lat: f64,
    pub lon: f64,
    pub bbox: [u32; 4],
    pub quality: f64,
}

fn annotation_view(state: &AppState, store: &Store, role: Role, annotation_id: &str) -> Option<AnnotationView> {
    let (rec, ann) = store.locate(annotation_id)?;
    let (lat, lon) = state.policies.view(&rec.species, role, rec.lat, rec.lon);
    Some(AnnotationView {
        annotation_id: annotation_id.to_owned(),
        photo_id: rec.photo_id.clone(),
        camera_id: rec.camera_id.clone(),
        car_id: rec.car_id.clone(),
        timestamp: rec.timestamp,
        lat,
        lon,
        bbox: ann.bbox,
        quality: ann.quality,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IndividualView {
    pub individual_id: String,
    pub species: String,
    pub sightings: Vec<AnnotationView>,
}

fn individual_view(state: &AppState, store: &Store, role: Role, id: &str, members: &[&str]) -> IndividualView {
    IndividualView {
        individual_id: id.to_owned(),
        species: store.graph().species_of(id).unwrap_or_default().to_owned(),
        sightings: members.iter().filter_map(|m| annotation_view(state, store, role, m)).collect(),
    }
}

async fn post_encounters(State(state): State<AppState>, caller: Caller, body: String) -> Result<Response, ApiError> {
    require_curator(&caller, "ingest")?;
    let report = state.store.write().ingest(&body)?;
    if report.accepted + report.duplicates_skipped == 0 {
        let body = json!({ "error": "no valid records in request body", "report": report });
        return Ok((StatusCode::BAD_REQUEST, Json(body)).into_response());
    }
    tracing::info!(by = %caller.name, accepted = report.accepted, "ingest");
    Ok((StatusCode::CREATED, Json(report)).into_response())
}

#[derive(Debug, Default, Deserialize)]
struct SpeciesFilter {
    species: Option<String>,
}

async fn list_individuals(
    State(state): State<AppState>,
    caller: Caller,
    Query(filter): Query<SpeciesFilter>,
) -> Json<Vec<IndividualView>> {
    let store = state.store.read();
    let partition = store.partition();
    let list = partition
        .members()
        .into_iter()
        .filter(|(id, _)| filter.species.as_deref().is_none_or(|s| store.graph().species_of(id) == Some(s)))
        .map(|(id, members)| individual_view(&state, &store, caller.role, id, &members))
        .collect();
    Json(list)
}

async fn get_individual(
    State(state): State<AppState>,
    caller: Caller,
    Path(id): Path<String>,
) -> Result<Json<IndividualView>, ApiError> {
    let store = state.store.read();
    let partition = store.partition();
    let members = partition.members();
    let list = members.get(id.as_str()).ok_or_else(|| ApiError::NotFound(format!("no individual {id}")))?;
    Ok(Json(individual_view(&state, &store, caller.role, &id, list)))
}

#[derive(Debug, Default, Deserialize)]
struct CensusQuery {
    species: Option<String>,
    estimator: Option<String>,
    occasions: Option<String>,
}

fn parse_occasions(text: &str) -> Result<(u32, u32), ApiError> {
    let bad = || ApiError::BadRequest(format!("occasions must look like 0,1 (got {text:?})"));
    let (i, j) = text.split_once(',').ok_or_else(bad)?;
    Ok((i.trim().parse().map_err(|_| bad())?, j.trim().parse().map_err(|_| bad())?))
}

async fn get_census(
    State(state): State<AppState>,
    _caller: Caller,
    Query(q): Query<CensusQuery>,
) -> Result<Json<CensusReport>, ApiError> {
    let estimator: Estimator = match q.estimator.as_deref() {
        Some(name) => {
            name.parse().map_err(|e: photocensus::census::CensusError| ApiError::BadRequest(e.to_string()))?
        }
        None => Estimator::Chapman,
    };
    let pair = q.occasions.as_deref().map(parse_occasions).transpose()?.unwrap_or((0, 1));
    let store = state.store.read();
    let species = match q.species {
        Some(s) => s,
        None => match store.dataset().species().as_slice() {
            [only] => only.clone(),
            _ => return Err(ApiError::BadRequest("species is required".into())),
        },
    };
    Ok(Json(store.census(&species, pair, estimator)?))
}

/// The next pair awaiting review, with what a reviewer needs to judge it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReviewCard {
    pub a: String,
    pub b: String,
    pub score: f64,
    pub species: String,
    pub annotations: [AnnotationView; 2],
    /// Current cluster sizes of `a` and `b`.
    pub cluster_sizes: [usize; 2],
}

async fn review_next(
    State(state): State<AppState>,
    caller: Caller,
    Query(filter): Query<SpeciesFilter>,
) -> Result<Json<serde_json::Value>, ApiError> {
    require_curator(&caller, "review")?;
    let store = state.store.read();
    let graph = store.graph();
    let mut undecided = graph.candidates().iter().filter(|c| {
        let pair = Pair { a: c.a.clone(), b: c.b.clone() };
        graph.verdict(&pair).is_none() && filter.species.as_deref().is_none_or(|s| graph.species_of(&c.a) == Some(s))
    });
    let card = match undecided.next() {
        None => None,
        Some(c) => {
            let partition = store.partition();
            let view = |id: &str| {
                annotation_view(&state, &store, caller.role, id)
                    .ok_or_else(|| ApiError::Internal(format!("candidate names unknown annotation {id}")))
            };
            Some(ReviewCard {
                a: c.a.clone(),
                b: c.b.clone(),
                score: c.score,
                species: graph.species_of(&c.a).unwrap_or_default().to_owned(),
                annotations: [view(&c.a)?, view(&c.b)?],
                cluster_sizes: [partition.cluster_size(&c.a), partition.cluster_size(&c.b)],
            })
        }
    };
    let remaining = card.is_some() as usize + undecided.count();
    Ok(Json(json!({ "card": card, "remaining": remaining })))
}

#[derive(Debug, Clone, Deserialize)]
struct DecisionRequest {
    a: String,
    b: String,
    verdict: Verdict,
    #[serde(default)]
    supersede: bool,
}

#[derive(Debug, Clone, Serialize)]
struct DecisionResponse {
    decision: DecisionEdge,
    /// Individuals of the pair's species after the decision.
    individuals: usize,
}

async fn review_decision(
    State(state): State<AppState>,
    caller: Caller,
    body: axum::body::Bytes,
) -> Result<Json<DecisionResponse>, ApiError> {
    require_curator(&caller, "review")?;
    let req: DecisionRequest =
        serde_json::from_slice(&body).map_err(|e| ApiError::BadRequest(format!("decision body: {e}")))?;
    let mut store = state.store.write();
    match store.decide(&req.a, &req.b, req.verdict, req.supersede, &caller.name, Utc::now())? {
        DecisionOutcome::AlreadyDecided(e) => Err(ApiError::Conflict(format!(
            "{} / {} already decided {:?} by {}; resend with supersede to replace it",
            e.a, e.b, e.verdict, e.decided_by
        ))),
        DecisionOutcome::Applied(decision) => {
            let species = store.graph().species_of(&decision.a).unwrap_or_default().to_owned();
            let individuals = store
                .partition()
                .members()
                .keys()
                .filter(|id| store.graph().species_of(id) == Some(species.as_str()))
                .count();
            tracing::info!(by = %caller.name, a = %decision.a, b = %decision.b, "decision");
            Ok(Json(DecisionResponse { decision, individuals }))
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StatsView {
    #[serde(flatten)]
    pub collection: CollectionStats,
    pub individuals: usize,
    pub candidates: usize,
    pub undecided: usize,
    pub decisions: usize,
}

async fn get_stats(State(state): State<AppState>, _caller: Caller) -> Json<StatsView> {
    let store = state.store.read();
    let graph = store.graph();
    Json(StatsView {
        collection: collection_stats(store.dataset()),
        individuals: store.partition().individual_count(),
        candidates: graph.candidates().len(),
        undecided: graph.undecided_count(),
        decisions: graph.log().len(),
    })
}

async fn export(State(state): State<AppState>, caller: Caller) -> Result<Response, ApiError> {
    require_curator(&caller, "export")?;
    let store = state.store.read();
    let mut out = String::new();
    for rec in store.dataset().records() {
        let (lat, lon) = state.policies.view(&rec.species, caller.role, rec.lat, rec.lon);
        let line = serde_json::to_string(&PhotoRecord { lat, lon, ..rec.clone() })
            .map_err(|e| ApiError::Internal(e.to_string()))?;
        out.push_str(&line);
        out.push('\n');
    }
    Ok(([(header::CONTENT_TYPE, "application/x-ndjson")], out).into_response())
}
