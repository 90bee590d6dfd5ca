//! Typed async client for the service's `/v1` HTTP/JSON interface.

use reqwest::StatusCode;
use serde::de::DeserializeOwned;
use serde::Serialize;

use ssoa_core::analysis::{ComparisonTable, SweepResult};
use ssoa_core::api::{
    CompareRequest, CountRequest, CreateSessionRequest, ErrorDocument, ExportRequest, ExportResponse,
    GenerateRequest, Health, HeuristicRequest, HeuristicResponse, InstanceInput, JobStatus, PenaltySweepRequest,
    RoundAccepted, SessionCreated, SessionState, SolveInstanceRequest, SolveResponse, SolveRoundRequest,
    SourcingSweepRequest, SubmitRoundRequest, TuneRequest, TwoPhaseRequest, ValidateResponse, WhatIfRequest,
    API_PREFIX,
};
use ssoa_core::exact::TwoPhaseReport;
use ssoa_core::heuristics::TuneResult;
use ssoa_core::instance::{BidDelta, InstanceDocument};
use ssoa_core::milp::VariableCount;
use ssoa_core::session::{AllocationView, LedgerRecord, SessionSummary, WhatIfRecord};

#[derive(Debug, thiserror::Error)]
pub enum ClientError {
    #[error("request failed: {0}")]
    Transport(#[from] reqwest::Error),
    /// The service answered with an error document.
    #[error("{status}: {doc}")]
    Api { status: StatusCode, doc: ErrorDocument },
    #[error("unexpected response ({status}): {body}")]
    Unexpected { status: StatusCode, body: String },
}

pub type Result<T> = std::result::Result<T, ClientError>;

/// Outcome of a round solve that was not waited for.
#[derive(Debug, Clone, PartialEq)]
pub enum SolveOutcome {
    Done(Box<AllocationView>),
    Accepted(Box<JobStatus>),
}

#[derive(Clone, Debug)]
pub struct Client {
    http: reqwest::Client,
    base: String,
}

impl Client {
    /// `base_url` is the server root, e.g. `http://127.0.0.1:8080`.
    pub fn new(base_url: &str) -> Client {
        Client {
            http: reqwest::Client::new(),
            base: format!("{}{API_PREFIX}", base_url.trim_end_matches('/')),
        }
    }

    pub fn base_url(&self) -> &str {
        &self.base
    }

    async fn decode<T: DeserializeOwned>(resp: reqwest::Response) -> Result<T> {
        let status = resp.status();
        let text = resp.text().await?;
        if status.is_success() {
            return serde_json::from_str(&text).map_err(|_| ClientError::Unexpected { status, body: text });
        }
        match serde_json::from_str::<ErrorDocument>(&text) {
            Ok(doc) => Err(ClientError::Api { status, doc }),
            Err(_) => Err(ClientError::Unexpected { status, body: text }),
        }
    }

    async fn post<B: Serialize + ?Sized, T: DeserializeOwned>(&self, path: &str, body: &B) -> Result<T> {
        let resp = self.http.post(format!("{}{path}", self.base)).json(body).send().await?;
        Self::decode(resp).await
    }

    async fn get<T: DeserializeOwned>(&self, path: &str) -> Result<T> {
        let resp = self.http.get(format!("{}{path}", self.base)).send().await?;
        Self::decode(resp).await
    }

    pub async fn health(&self) -> Result<Health> {
        self.get("/health").await
    }

    pub async fn generate(&self, req: &GenerateRequest) -> Result<InstanceDocument> {
        self.post("/instances/generate", req).await
    }

    pub async fn validate(&self, input: &InstanceInput) -> Result<ValidateResponse> {
        self.post("/instances/validate", input).await
    }

    pub async fn count(&self, req: &CountRequest) -> Result<VariableCount> {
        self.post("/models/count", req).await
    }

    pub async fn export(&self, req: &ExportRequest) -> Result<ExportResponse> {
        self.post("/models/export", req).await
    }

    pub async fn solve(&self, req: &SolveInstanceRequest) -> Result<SolveResponse> {
        self.post("/solve", req).await
    }

    pub async fn two_phase(&self, req: &TwoPhaseRequest) -> Result<TwoPhaseReport> {
        self.post("/two-phase", req).await
    }

    pub async fn heuristic(&self, req: &HeuristicRequest) -> Result<HeuristicResponse> {
        self.post("/heuristics", req).await
    }

    pub async fn tune(&self, req: &TuneRequest) -> Result<TuneResult> {
        self.post("/tune", req).await
    }

    pub async fn sweep_sourcing(&self, req: &SourcingSweepRequest) -> Result<SweepResult> {
        self.post("/sweeps/sourcing", req).await
    }

    pub async fn sweep_penalty(&self, req: &PenaltySweepRequest) -> Result<SweepResult> {
        self.post("/sweeps/penalty", req).await
    }

    pub async fn compare(&self, req: &CompareRequest) -> Result<ComparisonTable> {
        self.post("/compare", req).await
    }

    pub async fn sessions(&self) -> Result<Vec<String>> {
        self.get("/sessions").await
    }

    pub async fn create_session(&self, req: &CreateSessionRequest) -> Result<SessionCreated> {
        self.post("/sessions", req).await
    }

    pub async fn session(&self, id: &str) -> Result<SessionState> {
        self.get(&format!("/sessions/{id}")).await
    }

    pub async fn summary(&self, id: &str) -> Result<SessionSummary> {
        self.get(&format!("/sessions/{id}/summary")).await
    }

    pub async fn ledger(&self, id: &str) -> Result<Vec<LedgerRecord>> {
        self.get(&format!("/sessions/{id}/ledger")).await
    }

    pub async fn submit_round(&self, id: &str, delta: BidDelta) -> Result<u32> {
        let r: RoundAccepted = self
            .post(&format!("/sessions/{id}/rounds"), &SubmitRoundRequest { delta })
            .await?;
        Ok(r.round)
    }

    pub async fn skip_round(&self, id: &str, round: u32) -> Result<()> {
        let _: RoundAccepted = self
            .post(&format!("/sessions/{id}/rounds/{round}/skip"), &serde_json::json!({}))
            .await?;
        Ok(())
    }

    /// Solves a round. With `req.wait` the call returns the allocation;
    /// otherwise it returns the job to poll with [`Client::job`].
    pub async fn solve_round(&self, id: &str, round: u32, req: &SolveRoundRequest) -> Result<SolveOutcome> {
        let path = format!("/sessions/{id}/rounds/{round}/solve");
        if req.wait {
            Ok(SolveOutcome::Done(Box::new(self.post(&path, req).await?)))
        } else {
            Ok(SolveOutcome::Accepted(Box::new(self.post(&path, req).await?)))
        }
    }

    pub async fn job(&self, id: &str, job: &str) -> Result<JobStatus> {
        self.get(&format!("/sessions/{id}/jobs/{job}")).await
    }

    pub async fn allocation(&self, id: &str, round: u32) -> Result<AllocationView> {
        self.get(&format!("/sessions/{id}/rounds/{round}/allocation")).await
    }

    pub async fn what_if(&self, id: &str, req: &WhatIfRequest) -> Result<WhatIfRecord> {
        self.post(&format!("/sessions/{id}/whatif"), req).await
    }

    pub async fn close_session(&self, id: &str) -> Result<SessionSummary> {
        self.post(&format!("/sessions/{id}/close"), &serde_json::json!({})).await
    }
}
