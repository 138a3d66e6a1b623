use axum::extract::rejection::JsonRejection;
use axum::extract::{Path, State};
use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use genehub_core::gep::{AgentId, AssetId};
use genehub_core::hub::wire::*;
use genehub_core::hub::{
    AssetRecord, Bounty, BountyId, FetchHit, HubError, KeywordOverlap, LedgerEntry, PublishReceipt, RecomputeReport,
    Resolution, ReuseReceipt,
};

use crate::AppState;

/// A hub error on its way to the wire.
pub struct ApiError(HubError);

impl From<HubError> for ApiError {
    fn from(e: HubError) -> Self {
        ApiError(e)
    }
}

fn status_of(e: &HubError) -> StatusCode {
    match e {
        HubError::UnknownAgent { .. } | HubError::UnknownAsset { .. } | HubError::UnknownBounty { .. } => {
            StatusCode::NOT_FOUND
        }
        HubError::InsufficientCredits { .. } => StatusCode::PAYMENT_REQUIRED,
        HubError::DuplicateAsset { .. }
        | HubError::AlreadySettled
        | HubError::Expired
        | HubError::NoSubmissions
        | HubError::IllegalTransition { .. } => StatusCode::CONFLICT,
        HubError::SelfVote => StatusCode::FORBIDDEN,
        HubError::InvalidRequest { .. } => StatusCode::UNPROCESSABLE_ENTITY,
        HubError::Unavailable { .. } => StatusCode::SERVICE_UNAVAILABLE,
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        (status_of(&self.0), Json(ErrorBody::from(self.0))).into_response()
    }
}

type ApiResult<T> = Result<Json<T>, ApiError>;

fn invalid(reason: impl Into<String>) -> ApiError {
    ApiError(HubError::InvalidRequest { reason: reason.into() })
}

/// Unwrap a JSON body, turning any rejection into an `invalid_request`.
fn body<T>(payload: Result<Json<T>, JsonRejection>) -> Result<T, ApiError> {
    payload.map(|Json(v)| v).map_err(|e| invalid(e.body_text()))
}

fn asset_id(raw: &str) -> Result<AssetId, ApiError> {
    AssetId::parse(raw).map_err(|e| invalid(e.to_string()))
}

pub fn router(state: AppState) -> Router {
    Router::new()
        .route("/health", get(health))
        .route("/agents", post(register))
        .route("/agents/{agent}/balance", get(balance))
        .route("/agents/{agent}/ledger", get(ledger))
        .route("/assets", get(list_assets).post(publish))
        .route("/assets/{id}", get(asset))
        .route("/assets/{id}/reports", post(report))
        .route("/assets/{id}/votes", post(vote))
        .route("/fetch", post(fetch))
        .route("/recompute", post(recompute))
        .route("/bounties", get(list_bounties).post(post_bounty))
        .route("/bounties/{id}", get(bounty))
        .route("/bounties/{id}/submissions", post(submit))
        .route("/bounties/{id}/resolve", post(resolve))
        .route("/conservation", get(conservation))
        .route("/snapshot", post(snapshot))
        .with_state(state)
}

async fn health() -> &'static str {
    "ok"
}

async fn register(State(s): State<AppState>, req: Result<Json<RegisterRequest>, JsonRejection>) -> ApiResult<RegisterResponse> {
    let req = body(req)?;
    let agent_id = s.hub().register_agent(&req.name)?;
    Ok(Json(RegisterResponse { agent_id }))
}

async fn balance(State(s): State<AppState>, Path(agent): Path<String>) -> ApiResult<BalanceResponse> {
    let agent = AgentId::new(agent);
    let hub = s.hub();
    if hub.agent(&agent).is_none() {
        return Err(HubError::UnknownAgent { agent }.into());
    }
    let balance = hub.balance(&agent);
    Ok(Json(BalanceResponse { agent, balance }))
}

async fn ledger(State(s): State<AppState>, Path(agent): Path<String>) -> ApiResult<Vec<LedgerEntry>> {
    let agent = AgentId::new(agent);
    let hub = s.hub();
    if hub.agent(&agent).is_none() {
        return Err(HubError::UnknownAgent { agent }.into());
    }
    Ok(Json(hub.ledger().entries_for(&agent).cloned().collect()))
}

async fn list_assets(State(s): State<AppState>) -> Json<Vec<AssetSummary>> {
    let hub = s.hub();
    Json(
        hub.records()
            .iter()
            .map(|r| AssetSummary {
                asset_id: r.id.clone(),
                kind: r.kind,
                status: r.status,
                author: r.author.clone(),
                gdi: r.gdi,
            })
            .collect(),
    )
}

async fn publish(State(s): State<AppState>, req: Result<Json<PublishRequest>, JsonRejection>) -> ApiResult<PublishReceipt> {
    let req = body(req)?;
    Ok(Json(s.hub().publish(&req.author, req.asset)?))
}

async fn asset(State(s): State<AppState>, Path(id): Path<String>) -> ApiResult<AssetRecord> {
    let id = asset_id(&id)?;
    let hub = s.hub();
    hub.record(&id).cloned().map(Json).ok_or_else(|| HubError::UnknownAsset { asset: id }.into())
}

async fn report(
    State(s): State<AppState>,
    Path(id): Path<String>,
    req: Result<Json<ReportRequest>, JsonRejection>,
) -> ApiResult<ReuseReceipt> {
    let id = asset_id(&id)?;
    let req = body(req)?;
    Ok(Json(s.hub().report_reuse(&req.caller, &id, req.success, &req.commands)?))
}

async fn vote(
    State(s): State<AppState>,
    Path(id): Path<String>,
    req: Result<Json<VoteRequest>, JsonRejection>,
) -> Result<StatusCode, ApiError> {
    let id = asset_id(&id)?;
    let req = body(req)?;
    s.hub().vote(&req.voter, &id, req.direction)?;
    Ok(StatusCode::NO_CONTENT)
}

async fn fetch(State(s): State<AppState>, req: Result<Json<FetchRequest>, JsonRejection>) -> ApiResult<Vec<FetchHit>> {
    let req = body(req)?;
    Ok(Json(s.hub().fetch(&req.caller, &req.query, req.limit)?))
}

async fn recompute(
    State(s): State<AppState>,
    req: Result<Json<RecomputeRequest>, JsonRejection>,
) -> ApiResult<RecomputeReport> {
    let req = body(req)?;
    let mut hub = s.hub();
    let now = req.now.unwrap_or_else(|| hub.clock());
    Ok(Json(hub.recompute_and_promote(now)))
}

async fn list_bounties(State(s): State<AppState>) -> Json<Vec<Bounty>> {
    Json(s.hub().bounties().to_vec())
}

async fn post_bounty(
    State(s): State<AppState>,
    req: Result<Json<PostBountyRequest>, JsonRejection>,
) -> ApiResult<PostBountyResponse> {
    let req = body(req)?;
    let bounty_id = s.hub().post_bounty(&req.poster, &req.title, req.signals, req.amount, req.expires_at)?;
    Ok(Json(PostBountyResponse { bounty_id }))
}

async fn bounty(State(s): State<AppState>, Path(id): Path<String>) -> ApiResult<Bounty> {
    let id = BountyId(id);
    let hub = s.hub();
    hub.bounty(&id).cloned().map(Json).ok_or_else(|| HubError::UnknownBounty { bounty: id }.into())
}

async fn submit(
    State(s): State<AppState>,
    Path(id): Path<String>,
    req: Result<Json<SubmitRequest>, JsonRejection>,
) -> ApiResult<SubmitResponse> {
    let req = body(req)?;
    let index = s.hub().submit(&BountyId(id), &req.submitter, &req.asset)?;
    Ok(Json(SubmitResponse { index }))
}

async fn resolve(State(s): State<AppState>, Path(id): Path<String>) -> ApiResult<Resolution> {
    Ok(Json(s.hub().resolve_bounty(&BountyId(id), &KeywordOverlap)?))
}

async fn conservation(State(s): State<AppState>) -> Json<ConservationResponse> {
    let hub = s.hub();
    let check = hub.check_conservation();
    Json(ConservationResponse { conserved: check.is_ok(), violation: check.err(), totals: hub.ledger().totals() })
}

async fn snapshot(State(s): State<AppState>) -> Result<StatusCode, ApiError> {
    match s.persist() {
        Ok(Some(_)) => Ok(StatusCode::NO_CONTENT),
        Ok(None) => Err(invalid("server runs without a data directory")),
        Err(e) => Err(ApiError(HubError::Unavailable { reason: e.to_string() })),
    }
}
