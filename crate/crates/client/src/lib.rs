//! Client for the hub's HTTP/JSON service.
//!
//! [`HubClient`] is async. [`BlockingHubClient`] drives it on a private
//! single-threaded runtime and implements [`HubApi`], so anything written
//! against the in-process hub runs unchanged against a remote one. Transport
//! failures and unreadable responses surface as [`HubError::Unavailable`];
//! error bodies from the server decode back into the hub error they carry.

use chrono::{DateTime, Utc};
use genehub_core::gep::{AgentId, Asset, AssetId};
use genehub_core::hub::wire::*;
use genehub_core::hub::{
    AssetRecord, Bounty, BountyId, Credits, FetchHit, HubApi, HubError, LedgerEntry, PublishReceipt, RecomputeReport,
    Resolution, ReuseReceipt, VoteDirection,
};
use reqwest::{Method, RequestBuilder, Response};
use serde::de::DeserializeOwned;
use serde::Serialize;

fn unavailable(reason: impl ToString) -> HubError {
    HubError::Unavailable { reason: reason.to_string() }
}

#[derive(Debug, Clone)]
pub struct HubClient {
    http: reqwest::Client,
    base: String,
}

impl HubClient {
    /// `base` is the server root, e.g. `http://127.0.0.1:7878`.
    pub fn new(base: impl Into<String>) -> Self {
        HubClient { http: reqwest::Client::new(), base: base.into().trim_end_matches('/').to_string() }
    }

    pub fn base_url(&self) -> &str {
        &self.base
    }

    fn request(&self, method: Method, path: &str) -> RequestBuilder {
        self.http.request(method, format!("{}{path}", self.base))
    }

    async fn send(&self, req: RequestBuilder) -> Result<Response, HubError> {
        let resp = req.send().await.map_err(unavailable)?;
        if resp.status().is_success() {
            return Ok(resp);
        }
        let status = resp.status();
        let bytes = resp.bytes().await.map_err(unavailable)?;
        match serde_json::from_slice::<ErrorBody>(&bytes) {
            Ok(body) => Err(body.error),
            Err(_) => Err(unavailable(format!("HTTP {status}: {}", String::from_utf8_lossy(&bytes)))),
        }
    }

    async fn call<B: Serialize + ?Sized, T: DeserializeOwned>(&self, method: Method, path: &str, body: Option<&B>) -> Result<T, HubError> {
        let mut req = self.request(method, path);
        if let Some(body) = body {
            req = req.json(body);
        }
        self.send(req).await?.json().await.map_err(unavailable)
    }

    async fn get<T: DeserializeOwned>(&self, path: &str) -> Result<T, HubError> {
        self.call::<(), T>(Method::GET, path, None).await
    }

    async fn post<B: Serialize + ?Sized, T: DeserializeOwned>(&self, path: &str, body: &B) -> Result<T, HubError> {
        self.call(Method::POST, path, Some(body)).await
    }

    pub async fn health(&self) -> Result<(), HubError> {
        self.send(self.request(Method::GET, "/health")).await.map(|_| ())
    }

    pub async fn register_agent(&self, name: &str) -> Result<AgentId, HubError> {
        let r: RegisterResponse = self.post("/agents", &RegisterRequest { name: name.to_string() }).await?;
        Ok(r.agent_id)
    }

    pub async fn balance(&self, agent: &AgentId) -> Result<Credits, HubError> {
        let r: BalanceResponse = self.get(&format!("/agents/{agent}/balance")).await?;
        Ok(r.balance)
    }

    pub async fn ledger(&self, agent: &AgentId) -> Result<Vec<LedgerEntry>, HubError> {
        self.get(&format!("/agents/{agent}/ledger")).await
    }

    pub async fn publish(&self, author: &AgentId, asset: &Asset) -> Result<PublishReceipt, HubError> {
        self.post("/assets", &PublishRequest { author: author.clone(), asset: asset.clone() }).await
    }

    pub async fn assets(&self) -> Result<Vec<AssetSummary>, HubError> {
        self.get("/assets").await
    }

    pub async fn asset(&self, id: &AssetId) -> Result<AssetRecord, HubError> {
        self.get(&format!("/assets/{id}")).await
    }

    pub async fn fetch(&self, caller: &AgentId, query: &str, limit: Option<usize>) -> Result<Vec<FetchHit>, HubError> {
        self.post("/fetch", &FetchRequest { caller: caller.clone(), query: query.to_string(), limit }).await
    }

    pub async fn report_reuse(
        &self,
        caller: &AgentId,
        asset: &AssetId,
        success: bool,
        commands: &[String],
    ) -> Result<ReuseReceipt, HubError> {
        let req = ReportRequest { caller: caller.clone(), success, commands: commands.to_vec() };
        self.post(&format!("/assets/{asset}/reports"), &req).await
    }

    pub async fn vote(&self, voter: &AgentId, asset: &AssetId, direction: VoteDirection) -> Result<(), HubError> {
        let req = self.request(Method::POST, &format!("/assets/{asset}/votes")).json(&VoteRequest { voter: voter.clone(), direction });
        self.send(req).await.map(|_| ())
    }

    /// Recompute scores at `now`, or at the hub's logical clock when `None`.
    pub async fn recompute(&self, now: Option<DateTime<Utc>>) -> Result<RecomputeReport, HubError> {
        self.post("/recompute", &RecomputeRequest { now }).await
    }

    pub async fn post_bounty(
        &self,
        poster: &AgentId,
        title: &str,
        signals: Vec<String>,
        amount: Credits,
        expires_at: DateTime<Utc>,
    ) -> Result<BountyId, HubError> {
        let req = PostBountyRequest { poster: poster.clone(), title: title.to_string(), signals, amount, expires_at };
        let r: PostBountyResponse = self.post("/bounties", &req).await?;
        Ok(r.bounty_id)
    }

    pub async fn bounties(&self) -> Result<Vec<Bounty>, HubError> {
        self.get("/bounties").await
    }

    pub async fn bounty(&self, id: &BountyId) -> Result<Bounty, HubError> {
        self.get(&format!("/bounties/{id}")).await
    }

    pub async fn submit(&self, bounty: &BountyId, submitter: &AgentId, asset: &AssetId) -> Result<usize, HubError> {
        let req = SubmitRequest { submitter: submitter.clone(), asset: asset.clone() };
        let r: SubmitResponse = self.post(&format!("/bounties/{bounty}/submissions"), &req).await?;
        Ok(r.index)
    }

    pub async fn resolve(&self, bounty: &BountyId) -> Result<Resolution, HubError> {
        self.post(&format!("/bounties/{bounty}/resolve"), &()).await
    }

    pub async fn conservation(&self) -> Result<ConservationResponse, HubError> {
        self.get("/conservation").await
    }

    /// Ask the server to write its snapshot now.
    pub async fn snapshot(&self) -> Result<(), HubError> {
        self.send(self.request(Method::POST, "/snapshot")).await.map(|_| ())
    }
}

/// Synchronous facade over [`HubClient`]. Must not be used from inside an
/// async runtime.
pub struct BlockingHubClient {
    runtime: tokio::runtime::Runtime,
    inner: HubClient,
}

impl BlockingHubClient {
    pub fn new(base: impl Into<String>) -> Result<Self, HubError> {
        let runtime = tokio::runtime::Builder::new_current_thread().enable_all().build().map_err(unavailable)?;
        Ok(BlockingHubClient { runtime, inner: HubClient::new(base) })
    }

    pub fn client(&self) -> &HubClient {
        &self.inner
    }

    /// Run any async client call to completion.
    pub fn block_on<F: std::future::Future>(&self, f: F) -> F::Output {
        self.runtime.block_on(f)
    }
}

impl HubApi for BlockingHubClient {
    fn register_agent(&mut self, name: &str) -> Result<AgentId, HubError> {
        self.runtime.block_on(self.inner.register_agent(name))
    }

    fn publish(&mut self, author: &AgentId, asset: &Asset) -> Result<PublishReceipt, HubError> {
        self.runtime.block_on(self.inner.publish(author, asset))
    }

    fn fetch(&mut self, caller: &AgentId, query: &str, limit: Option<usize>) -> Result<Vec<FetchHit>, HubError> {
        self.runtime.block_on(self.inner.fetch(caller, query, limit))
    }

    fn report_reuse(
        &mut self,
        caller: &AgentId,
        asset: &AssetId,
        success: bool,
        reported_commands: &[String],
    ) -> Result<ReuseReceipt, HubError> {
        self.runtime.block_on(self.inner.report_reuse(caller, asset, success, reported_commands))
    }

    fn vote(&mut self, voter: &AgentId, asset: &AssetId, direction: VoteDirection) -> Result<(), HubError> {
        self.runtime.block_on(self.inner.vote(voter, asset, direction))
    }

    fn recompute(&mut self, now: DateTime<Utc>) -> Result<RecomputeReport, HubError> {
        self.runtime.block_on(self.inner.recompute(Some(now)))
    }

    fn asset(&mut self, id: &AssetId) -> Result<AssetRecord, HubError> {
        self.runtime.block_on(self.inner.asset(id))
    }

    fn balance(&mut self, agent: &AgentId) -> Result<Credits, HubError> {
        self.runtime.block_on(self.inner.balance(agent))
    }
}
