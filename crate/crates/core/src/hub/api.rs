use chrono::{DateTime, Utc};

use super::{AssetRecord, Credits, FetchHit, Hub, HubError, PublishReceipt, RecomputeReport, ReuseReceipt, VoteDirection};
use crate::gep::{AgentId, Asset, AssetId};

/// The agent-facing hub protocol, implemented in-process by [`Hub`] and
/// remotely by HTTP clients. Remote implementations report transport
/// failures as [`HubError::Unavailable`].
pub trait HubApi {
    fn register_agent(&mut self, name: &str) -> Result<AgentId, HubError>;
    fn publish(&mut self, author: &AgentId, asset: &Asset) -> Result<PublishReceipt, HubError>;
    fn fetch(&mut self, caller: &AgentId, query: &str, limit: Option<usize>) -> Result<Vec<FetchHit>, HubError>;
    fn report_reuse(
        &mut self,
        caller: &AgentId,
        asset: &AssetId,
        success: bool,
        reported_commands: &[String],
    ) -> Result<ReuseReceipt, HubError>;
    fn vote(&mut self, voter: &AgentId, asset: &AssetId, direction: VoteDirection) -> Result<(), HubError>;
    fn recompute(&mut self, now: DateTime<Utc>) -> Result<RecomputeReport, HubError>;
    fn asset(&mut self, id: &AssetId) -> Result<AssetRecord, HubError>;
    fn balance(&mut self, agent: &AgentId) -> Result<Credits, HubError>;
}

impl HubApi for Hub {
    fn register_agent(&mut self, name: &str) -> Result<AgentId, HubError> {
        Hub::register_agent(self, name)
    }

    fn publish(&mut self, author: &AgentId, asset: &Asset) -> Result<PublishReceipt, HubError> {
        Hub::publish(self, author, asset.clone())
    }

    fn fetch(&mut self, caller: &AgentId, query: &str, limit: Option<usize>) -> Result<Vec<FetchHit>, HubError> {
        Hub::fetch(self, caller, query, limit)
    }

    fn report_reuse(
        &mut self,
        caller: &AgentId,
        asset: &AssetId,
        success: bool,
        reported_commands: &[String],
    ) -> Result<ReuseReceipt, HubError> {
        Hub::report_reuse(self, caller, asset, success, reported_commands)
    }

    fn vote(&mut self, voter: &AgentId, asset: &AssetId, direction: VoteDirection) -> Result<(), HubError> {
        Hub::vote(self, voter, asset, direction)
    }

    fn recompute(&mut self, now: DateTime<Utc>) -> Result<RecomputeReport, HubError> {
        Ok(self.recompute_and_promote(now))
    }

    fn asset(&mut self, id: &AssetId) -> Result<AssetRecord, HubError> {
        self.record(id).cloned().ok_or_else(|| HubError::UnknownAsset { asset: id.clone() })
    }

    fn balance(&mut self, agent: &AgentId) -> Result<Credits, HubError> {
        self.require_agent(agent)?;
        Ok(Hub::balance(self, agent))
    }
}
