//! Request and response bodies of the hub's HTTP protocol.

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};

use super::{BountyId, Credits, HubError, LedgerTotals, VoteDirection};
use crate::gep::{AgentId, Asset, AssetId};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegisterRequest {
    pub name: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegisterResponse {
    pub agent_id: AgentId,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PublishRequest {
    pub author: AgentId,
    pub asset: Asset,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FetchRequest {
    pub caller: AgentId,
    pub query: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub limit: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportRequest {
    pub caller: AgentId,
    pub success: bool,
    #[serde(default)]
    pub commands: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VoteRequest {
    pub voter: AgentId,
    pub direction: VoteDirection,
}

/// Without `now` the hub's own logical clock is used; the wall clock never is.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct RecomputeRequest {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub now: Option<DateTime<Utc>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BalanceResponse {
    pub agent: AgentId,
    pub balance: Credits,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PostBountyRequest {
    pub poster: AgentId,
    pub title: String,
    #[serde(default)]
    pub signals: Vec<String>,
    pub amount: Credits,
    pub expires_at: DateTime<Utc>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PostBountyResponse {
    pub bounty_id: BountyId,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SubmitRequest {
    pub submitter: AgentId,
    pub asset: AssetId,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SubmitResponse {
    pub index: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConservationResponse {
    pub conserved: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub violation: Option<String>,
    pub totals: LedgerTotals,
}

/// Short listing entry for `GET /assets`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AssetSummary {
    pub asset_id: AssetId,
    pub kind: crate::gep::AssetKind,
    pub status: super::AssetStatus,
    pub author: AgentId,
    pub gdi: f64,
}

/// Error body: the machine-readable error plus its rendered message.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ErrorBody {
    #[serde(flatten)]
    pub error: HubError,
    pub message: String,
}

impl From<HubError> for ErrorBody {
    fn from(error: HubError) -> Self {
        let message = error.to_string();
        ErrorBody { error, message }
    }
}
