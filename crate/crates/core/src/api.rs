//! Request and response documents of the HTTP service, shared by the
//! server and its clients. Instances travel as [`InstanceDocument`]s.

use serde::{Deserialize, Serialize};

use crate::analysis::{PenaltyAxis, SplitRatio};
use crate::costs::CostBreakdown;
use crate::exact::{SolveLimits, SolveReport};
use crate::heuristics::{ConvergenceTrace, ParamSet, RunOptions, SearchRanges};
use crate::instance::{
    GeneratorConfig, InstanceDocument, InstanceError, SourcingMode, SupplyChainInstance, Violation,
};
use crate::milp::{ExportFormat, ModelKind, VariableCount};
use crate::session::{Mutation, Round, SessionSettings};
use crate::solver::{SolveRequest, SolverChoice};

/// Path prefix of every endpoint.
pub const API_PREFIX: &str = "/v1";
/// Version stamped on error documents and session state documents.
pub const API_SCHEMA_VERSION: u32 = 1;

/// Body of every non-2xx response.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ErrorDocument {
    pub schema_version: u32,
    /// Stable machine-readable code such as `invalid_instance`.
    pub error: String,
    pub message: String,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub violations: Vec<Violation>,
}

impl ErrorDocument {
    pub fn new(error: impl Into<String>, message: impl Into<String>) -> Self {
        ErrorDocument {
            schema_version: API_SCHEMA_VERSION,
            error: error.into(),
            message: message.into(),
            violations: Vec::new(),
        }
    }
}

impl std::fmt::Display for ErrorDocument {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}: {}", self.error, self.message)
    }
}

/// Instance plus an optional sourcing-mode override.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InstanceInput {
    pub instance: InstanceDocument,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mode: Option<SourcingMode>,
}

impl InstanceInput {
    pub fn new(inst: &SupplyChainInstance) -> Self {
        InstanceInput {
            instance: InstanceDocument::from(inst),
            mode: None,
        }
    }

    pub fn with_mode(mut self, mode: Option<SourcingMode>) -> Self {
        self.mode = mode;
        self
    }

    pub fn to_instance(&self) -> Result<SupplyChainInstance, InstanceError> {
        let inst = self.instance.clone().into_instance()?;
        Ok(match self.mode {
            Some(m) => inst.with_mode(m),
            None => inst,
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ValidateResponse {
    pub valid: bool,
    pub violations: Vec<Violation>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GenerateRequest {
    pub config: GeneratorConfig,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CountRequest {
    #[serde(flatten)]
    pub input: InstanceInput,
    pub kind: ModelKind,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExportRequest {
    #[serde(flatten)]
    pub input: InstanceInput,
    pub kind: ModelKind,
    pub format: ExportFormat,
    /// Tier1 allocation the forger model is conditioned on; when absent the
    /// machinist problem is solved first.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tier1: Option<Vec<usize>>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExportResponse {
    pub format: ExportFormat,
    pub count: VariableCount,
    pub text: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolveInstanceRequest {
    #[serde(flatten)]
    pub input: InstanceInput,
    #[serde(flatten)]
    pub request: SolveRequest,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolveResponse {
    pub report: SolveReport,
    /// Cost breakdown of the reported allocation, with per-supplier spend
    /// and penalty flags.
    pub breakdown: Option<CostBreakdown>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TwoPhaseRequest {
    #[serde(flatten)]
    pub input: InstanceInput,
    #[serde(default)]
    pub limits: SolveLimits,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HeuristicRequest {
    #[serde(flatten)]
    pub input: InstanceInput,
    pub kind: ModelKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tier1: Option<Vec<usize>>,
    pub params: ParamSet,
    #[serde(default)]
    pub run: RunOptions,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HeuristicResponse {
    pub report: SolveReport,
    pub trace: ConvergenceTrace,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TuneRequest {
    #[serde(flatten)]
    pub input: InstanceInput,
    pub kind: ModelKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tier1: Option<Vec<usize>>,
    pub base: ParamSet,
    /// Search box per parameter; the published box when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ranges: Option<SearchRanges>,
    pub trials: usize,
    pub seeds_per_trial: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub run: RunOptions,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SourcingSweepRequest {
    #[serde(flatten)]
    pub input: InstanceInput,
    /// The standard 50:50 to 100:0 grid when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ratios: Option<Vec<SplitRatio>>,
    pub kind: ModelKind,
    pub solver: SolverChoice,
    #[serde(default)]
    pub limits: SolveLimits,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PenaltySweepRequest {
    #[serde(flatten)]
    pub input: InstanceInput,
    pub axis: PenaltyAxis,
    pub supplier: usize,
    pub values: Vec<f64>,
    pub kind: ModelKind,
    pub solver: SolverChoice,
    #[serde(default)]
    pub limits: SolveLimits,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CompareRequest {
    #[serde(flatten)]
    pub input: InstanceInput,
    pub solvers: Vec<SolverChoice>,
    pub kinds: Vec<ModelKind>,
    #[serde(default)]
    pub limits: SolveLimits,
    #[serde(default = "default_seeds")]
    pub seeds: Vec<u64>,
}

fn default_seeds() -> Vec<u64> {
    vec![0]
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CreateSessionRequest {
    pub instance: InstanceDocument,
    #[serde(default)]
    pub settings: SessionSettings,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SessionCreated {
    pub id: String,
    pub settings: SessionSettings,
}

/// Full state of a session as returned by `GET /v1/sessions/{id}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SessionState {
    pub schema_version: u32,
    pub id: String,
    pub settings: SessionSettings,
    pub closed: bool,
    pub base: InstanceDocument,
    pub rounds: Vec<Round>,
    /// Round whose solve is running, if any.
    pub solving: Option<u32>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SubmitRoundRequest {
    #[serde(default)]
    pub delta: crate::instance::BidDelta,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RoundAccepted {
    pub round: u32,
}

/// Overrides of the session settings for one solve or what-if.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct SolveOverrides {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kind: Option<ModelKind>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub solver: Option<SolverChoice>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub limits: Option<SolveLimits>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

impl SolveOverrides {
    pub fn resolve(&self, s: &SessionSettings) -> (ModelKind, SolverChoice, SolveLimits, u64) {
        (
            self.kind.unwrap_or(s.kind),
            self.solver.clone().unwrap_or_else(|| s.solver.clone()),
            self.limits.unwrap_or(s.limits),
            self.seed.unwrap_or(s.seed),
        )
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolveRoundRequest {
    #[serde(flatten)]
    pub overrides: SolveOverrides,
    /// Hold the response until the solve ends; otherwise answer `202` with
    /// a job to poll.
    #[serde(default = "yes")]
    pub wait: bool,
}

impl Default for SolveRoundRequest {
    fn default() -> Self {
        SolveRoundRequest {
            overrides: SolveOverrides::default(),
            wait: true,
        }
    }
}

fn yes() -> bool {
    true
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum JobState {
    Running,
    Done,
    Failed,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct JobStatus {
    pub job: String,
    pub round: u32,
    pub state: JobState,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub result: Option<crate::session::AllocationView>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<ErrorDocument>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WhatIfRequest {
    pub base_round: u32,
    pub mutation: Mutation,
    #[serde(flatten)]
    pub overrides: SolveOverrides,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Health {
    pub status: String,
    pub api: String,
}
