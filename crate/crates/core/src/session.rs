//! Bidding-conference ledger: a session is a base instance plus an ordered
//! list of bid rounds, each solved at most once, and a log of what-if
//! scenarios. State is the fold of an append-only event list, so a session
//! is persisted by appending [`LedgerRecord`]s and restored by replaying
//! them.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::costs::{evaluate, AllocationTable, CostBreakdown};
use crate::exact::{SolveLimits, SolveReport};
use crate::instance::{
    apply_bid_round, validate_instance, BidDelta, Grid2, Grid3, InstanceDocument, InstanceError, ItemId,
    SourcingMode, SupplyChainInstance, Violation,
};
use crate::milp::ModelKind;
use crate::solver::SolverChoice;

/// Version of the ledger record layout.
pub const LEDGER_SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SessionError {
    #[error("instance rejected: {}", format_violations(.0))]
    Invalid(Vec<Violation>),
    #[error(transparent)]
    Instance(#[from] InstanceError),
    #[error("round {0} does not exist")]
    UnknownRound(u32),
    #[error("round {round} cannot be submitted: round {previous} is still open")]
    OutOfOrder { round: u32, previous: u32 },
    #[error("round {0} is already closed")]
    Closed(u32),
    #[error("round {0} has not been solved")]
    NotSolved(u32),
    #[error("session is closed")]
    SessionClosed,
    #[error("{0}")]
    Scenario(String),
    #[error("corrupt ledger: {0}")]
    Ledger(String),
}

fn format_violations(v: &[Violation]) -> String {
    v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join("; ")
}

/// How rounds are solved unless a solve request overrides it.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SessionSettings {
    #[serde(default = "default_kind")]
    pub kind: ModelKind,
    /// Sourcing mode override applied to the base instance.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mode: Option<SourcingMode>,
    #[serde(default = "default_solver")]
    pub solver: SolverChoice,
    #[serde(default)]
    pub limits: SolveLimits,
    #[serde(default)]
    pub seed: u64,
}

fn default_kind() -> ModelKind {
    ModelKind::Integrated
}

fn default_solver() -> SolverChoice {
    SolverChoice::BranchAndBound
}

impl Default for SessionSettings {
    fn default() -> Self {
        SessionSettings {
            kind: default_kind(),
            mode: None,
            solver: default_solver(),
            limits: SolveLimits::default(),
            seed: 0,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RoundState {
    Open,
    Skipped,
    Solved,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Round {
    pub number: u32,
    pub delta: BidDelta,
    pub submitted_at: String,
    pub state: RoundState,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub report: Option<SolveReport>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub closed_at: Option<String>,
}

/// An ephemeral change to a solved round's instance.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Mutation {
    /// Drops a supplier from its tier; higher indices shift down by one.
    RemoveSupplier { tier: u8, supplier: usize },
    /// Adds a must-make pair (`tier2` set for a forging assignment).
    ForceAssignment {
        item: ItemId,
        tier1: usize,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        tier2: Option<usize>,
    },
    /// Adds a cannot-make pair.
    ForbidAssignment {
        item: ItemId,
        tier1: usize,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        tier2: Option<usize>,
    },
    /// Moves a part away from one machinist onto another.
    ShiftOrder { item: ItemId, from: usize, to: usize },
    ChangePenalty {
        supplier: usize,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        threshold: Option<f64>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        factor: Option<f64>,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WhatIfScenario {
    pub base_round: u32,
    pub mutation: Mutation,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WhatIfRecord {
    pub scenario: WhatIfScenario,
    pub report: SolveReport,
    pub baseline_cost: Option<f64>,
    pub scenario_cost: Option<f64>,
    /// `scenario_cost - baseline_cost`.
    pub delta: Option<f64>,
    pub at: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "event", rename_all = "snake_case")]
pub enum SessionEvent {
    Created {
        id: String,
        instance: Box<InstanceDocument>,
        settings: SessionSettings,
    },
    RoundSubmitted { round: u32, delta: BidDelta },
    RoundSkipped { round: u32 },
    RoundSolved { round: u32, report: Box<SolveReport> },
    WhatIf { record: Box<WhatIfRecord> },
    SessionClosed,
}

impl SessionEvent {
    pub fn name(&self) -> &'static str {
        match self {
            SessionEvent::Created { .. } => "created",
            SessionEvent::RoundSubmitted { .. } => "round_submitted",
            SessionEvent::RoundSkipped { .. } => "round_skipped",
            SessionEvent::RoundSolved { .. } => "round_solved",
            SessionEvent::WhatIf { .. } => "what_if",
            SessionEvent::SessionClosed => "session_closed",
        }
    }
}

/// One line of a session's append-only ledger.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LedgerRecord {
    pub schema_version: u32,
    pub seq: u64,
    pub at: String,
    #[serde(flatten)]
    pub event: SessionEvent,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TimelineEntry {
    pub seq: u64,
    pub at: String,
    pub event: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub round: Option<u32>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RoundSummary {
    pub number: u32,
    pub state: RoundState,
    pub overrides: usize,
    pub objective: Option<f64>,
    pub status: Option<crate::exact::SolveStatus>,
    pub submitted_at: String,
    pub closed_at: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SessionSummary {
    pub id: String,
    pub settings: SessionSettings,
    pub closed: bool,
    pub rounds: Vec<RoundSummary>,
    pub what_ifs: Vec<WhatIfRecord>,
    pub timeline: Vec<TimelineEntry>,
}

/// Everything the negotiation display needs about a solved round.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AllocationView {
    pub round: u32,
    pub report: SolveReport,
    pub breakdown: Option<CostBreakdown>,
    pub table: Option<AllocationTable>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Session {
    pub id: String,
    pub settings: SessionSettings,
    pub base: SupplyChainInstance,
    pub rounds: Vec<Round>,
    pub what_ifs: Vec<WhatIfRecord>,
    pub closed: bool,
    pub ledger: Vec<LedgerRecord>,
}

impl Session {
    /// Validates the instance and opens a session; the returned record is
    /// the first ledger entry.
    pub fn create(
        id: String,
        instance: &SupplyChainInstance,
        settings: SessionSettings,
        at: String,
    ) -> Result<Session, SessionError> {
        let base = match settings.mode {
            Some(m) => instance.with_mode(m),
            None => instance.clone(),
        };
        let violations = validate_instance(&base);
        if !violations.is_empty() {
            return Err(SessionError::Invalid(violations));
        }
        let event = SessionEvent::Created {
            id,
            instance: Box::new(InstanceDocument::from(instance)),
            settings,
        };
        Session::replay(vec![LedgerRecord {
            schema_version: LEDGER_SCHEMA_VERSION,
            seq: 0,
            at,
            event,
        }])
    }

    /// Rebuilds a session from its ledger.
    pub fn replay(records: Vec<LedgerRecord>) -> Result<Session, SessionError> {
        let mut it = records.into_iter();
        let first = it.next().ok_or_else(|| SessionError::Ledger("empty ledger".into()))?;
        if first.schema_version != LEDGER_SCHEMA_VERSION {
            return Err(SessionError::Ledger(format!(
                "schema version {} unsupported",
                first.schema_version
            )));
        }
        let SessionEvent::Created { id, instance, settings } = &first.event else {
            return Err(SessionError::Ledger("first record is not `created`".into()));
        };
        let inst = (**instance).clone().into_instance()?;
        let base = match settings.mode {
            Some(m) => inst.with_mode(m),
            None => inst,
        };
        let mut s = Session {
            id: id.clone(),
            settings: settings.clone(),
            base,
            rounds: Vec::new(),
            what_ifs: Vec::new(),
            closed: false,
            ledger: vec![first],
        };
        for r in it {
            if r.seq != s.ledger.len() as u64 {
                return Err(SessionError::Ledger(format!("record {} out of sequence", r.seq)));
            }
            s.apply(r.event.clone(), &r.at)?;
            s.ledger.push(r);
        }
        Ok(s)
    }

    fn record(&mut self, event: SessionEvent, at: String) -> Result<LedgerRecord, SessionError> {
        self.apply(event.clone(), &at)?;
        let r = LedgerRecord {
            schema_version: LEDGER_SCHEMA_VERSION,
            seq: self.ledger.len() as u64,
            at,
            event,
        };
        self.ledger.push(r.clone());
        Ok(r)
    }

    fn apply(&mut self, event: SessionEvent, at: &str) -> Result<(), SessionError> {
        if self.closed {
            return Err(SessionError::SessionClosed);
        }
        match event {
            SessionEvent::Created { .. } => {
                return Err(SessionError::Ledger("duplicate `created` record".into()))
            }
            SessionEvent::RoundSubmitted { round, delta } => {
                let expected = self.rounds.len() as u32 + 1;
                if round != expected {
                    return Err(SessionError::Ledger(format!("round {round} submitted, expected {expected}")));
                }
                if let Some(prev) = self.rounds.last() {
                    if prev.state == RoundState::Open {
                        return Err(SessionError::OutOfOrder {
                            round,
                            previous: prev.number,
                        });
                    }
                }
                // reject bad keys before anything is recorded
                apply_bid_round(&self.snapshot(round - 1)?, &delta)?;
                self.rounds.push(Round {
                    number: round,
                    delta,
                    submitted_at: at.to_string(),
                    state: RoundState::Open,
                    report: None,
                    closed_at: None,
                });
            }
            SessionEvent::RoundSkipped { round } => {
                let r = self.open_round_mut(round)?;
                r.state = RoundState::Skipped;
                r.closed_at = Some(at.to_string());
            }
            SessionEvent::RoundSolved { round, report } => {
                let r = self.open_round_mut(round)?;
                r.state = RoundState::Solved;
                r.report = Some(*report);
                r.closed_at = Some(at.to_string());
            }
            SessionEvent::WhatIf { record } => {
                self.solved_round(record.scenario.base_round)?;
                self.what_ifs.push(*record);
            }
            SessionEvent::SessionClosed => self.closed = true,
        }
        Ok(())
    }

    fn open_round_mut(&mut self, round: u32) -> Result<&mut Round, SessionError> {
        let r = self
            .rounds
            .get_mut((round as usize).wrapping_sub(1))
            .ok_or(SessionError::UnknownRound(round))?;
        if r.state != RoundState::Open {
            return Err(SessionError::Closed(round));
        }
        Ok(r)
    }

    pub fn round(&self, round: u32) -> Result<&Round, SessionError> {
        self.rounds
            .get((round as usize).wrapping_sub(1))
            .ok_or(SessionError::UnknownRound(round))
    }

    fn solved_round(&self, round: u32) -> Result<&Round, SessionError> {
        let r = self.round(round)?;
        if r.state != RoundState::Solved {
            return Err(SessionError::NotSolved(round));
        }
        Ok(r)
    }

    /// Instance of round `round`: the base with deltas `1..=round` applied
    /// in order. Round 0 is the base itself.
    pub fn snapshot(&self, round: u32) -> Result<SupplyChainInstance, SessionError> {
        if round as usize > self.rounds.len() {
            return Err(SessionError::UnknownRound(round));
        }
        let mut inst = self.base.clone();
        for r in &self.rounds[..round as usize] {
            inst = apply_bid_round(&inst, &r.delta)?;
        }
        Ok(inst)
    }

    pub fn submit_round(&mut self, delta: BidDelta, at: String) -> Result<LedgerRecord, SessionError> {
        let round = self.rounds.len() as u32 + 1;
        self.record(SessionEvent::RoundSubmitted { round, delta }, at)
    }

    pub fn skip_round(&mut self, round: u32, at: String) -> Result<LedgerRecord, SessionError> {
        self.record(SessionEvent::RoundSkipped { round }, at)
    }

    /// Snapshot of an open round, ready to be solved off the request path.
    pub fn prepare_solve(&self, round: u32) -> Result<SupplyChainInstance, SessionError> {
        if self.closed {
            return Err(SessionError::SessionClosed);
        }
        if self.round(round)?.state != RoundState::Open {
            return Err(SessionError::Closed(round));
        }
        self.snapshot(round)
    }

    pub fn record_solution(
        &mut self,
        round: u32,
        report: SolveReport,
        at: String,
    ) -> Result<LedgerRecord, SessionError> {
        self.record(
            SessionEvent::RoundSolved {
                round,
                report: Box::new(report),
            },
            at,
        )
    }

    /// Mutated snapshot of a solved round plus its baseline cost.
    pub fn prepare_what_if(
        &self,
        scenario: &WhatIfScenario,
    ) -> Result<(SupplyChainInstance, Option<f64>), SessionError> {
        if self.closed {
            return Err(SessionError::SessionClosed);
        }
        let base = self.solved_round(scenario.base_round)?;
        let baseline = base.report.as_ref().and_then(|r| r.objective);
        let inst = apply_mutation(&self.snapshot(scenario.base_round)?, &scenario.mutation)?;
        Ok((inst, baseline))
    }

    pub fn record_what_if(
        &mut self,
        scenario: WhatIfScenario,
        baseline_cost: Option<f64>,
        report: SolveReport,
        at: String,
    ) -> Result<(WhatIfRecord, LedgerRecord), SessionError> {
        let scenario_cost = report.objective;
        let record = WhatIfRecord {
            scenario,
            delta: match (scenario_cost, baseline_cost) {
                (Some(s), Some(b)) => Some(s - b),
                _ => None,
            },
            report,
            baseline_cost,
            scenario_cost,
            at: at.clone(),
        };
        let l = self.record(
            SessionEvent::WhatIf {
                record: Box::new(record.clone()),
            },
            at,
        )?;
        Ok((record, l))
    }

    pub fn close(&mut self, at: String) -> Result<LedgerRecord, SessionError> {
        self.record(SessionEvent::SessionClosed, at)
    }

    pub fn allocation_view(&self, round: u32) -> Result<AllocationView, SessionError> {
        let r = self.solved_round(round)?;
        let report = r.report.clone().expect("solved rounds carry a report");
        let inst = self.snapshot(round)?;
        let (breakdown, table) = match &report.allocation {
            Some(a) => (
                evaluate(&inst, a).ok(),
                Some(AllocationTable::build(&inst, a)),
            ),
            None => (None, None),
        };
        Ok(AllocationView {
            round,
            report,
            breakdown,
            table,
        })
    }

    pub fn summary(&self) -> SessionSummary {
        SessionSummary {
            id: self.id.clone(),
            settings: self.settings.clone(),
            closed: self.closed,
            rounds: self
                .rounds
                .iter()
                .map(|r| RoundSummary {
                    number: r.number,
                    state: r.state,
                    overrides: r.delta.overrides.len(),
                    objective: r.report.as_ref().and_then(|x| x.objective),
                    status: r.report.as_ref().map(|x| x.status),
                    submitted_at: r.submitted_at.clone(),
                    closed_at: r.closed_at.clone(),
                })
                .collect(),
            what_ifs: self.what_ifs.clone(),
            timeline: self
                .ledger
                .iter()
                .map(|l| TimelineEntry {
                    seq: l.seq,
                    at: l.at.clone(),
                    event: l.event.name().to_string(),
                    round: match &l.event {
                        SessionEvent::RoundSubmitted { round, .. }
                        | SessionEvent::RoundSkipped { round }
                        | SessionEvent::RoundSolved { round, .. } => Some(*round),
                        SessionEvent::WhatIf { record } => Some(record.scenario.base_round),
                        _ => None,
                    },
                })
                .collect(),
        }
    }
}

fn shift_down(set_idx: usize, removed: usize) -> usize {
    if set_idx > removed {
        set_idx - 1
    } else {
        set_idx
    }
}

fn remove_tier1(inst: &SupplyChainInstance, j0: usize) -> Result<SupplyChainInstance, SessionError> {
    let shape = inst.shape;
    if j0 >= shape.tier1_count {
        return Err(SessionError::Scenario(format!("tier1 supplier {j0} does not exist")));
    }
    if inst.must_make_tier1.iter().any(|&(_, j)| j == j0) || inst.must_make_tier2.iter().any(|&(_, j, _)| j == j0) {
        return Err(SessionError::Scenario(format!(
            "tier1 supplier {j0} appears in a must-make pair"
        )));
    }
    let nj = shape.tier1_count - 1;
    let mut out = inst.clone();
    out.shape.tier1_count = nj;
    let keep: Vec<usize> = (0..shape.tier1_count).filter(|&j| j != j0).collect();
    let g2 = |g: &Grid2| {
        let mut n = Grid2::filled(g.rows, nj, 0.0);
        for r in 0..g.rows {
            for (c, &j) in keep.iter().enumerate() {
                n.set(r, c, g.get(r, j));
            }
        }
        n
    };
    let g3 = |g: &Grid3| {
        let [a, _, l] = g.dims;
        let mut n = Grid3::filled(a, nj, l, 0.0);
        for k in 0..a {
            for (c, &j) in keep.iter().enumerate() {
                for x in 0..l {
                    n.set(k, c, x, g.get(k, j, x));
                }
            }
        }
        n
    };
    out.machining_unit_cost = g2(&inst.machining_unit_cost);
    out.machining_transport_cost = g2(&inst.machining_transport_cost);
    out.forging_unit_cost = g3(&inst.forging_unit_cost);
    out.forging_transport_cost = g3(&inst.forging_transport_cost);
    out.tier1_budget.remove(j0);
    out.must_make_tier1 = inst.must_make_tier1.iter().map(|&(i, j)| (i, shift_down(j, j0))).collect();
    out.must_make_tier2 = inst
        .must_make_tier2
        .iter()
        .map(|&(k, j, l)| (k, shift_down(j, j0), l))
        .collect();
    out.cannot_make_tier1 = inst
        .cannot_make_tier1
        .iter()
        .filter(|&&(_, j)| j != j0)
        .map(|&(i, j)| (i, shift_down(j, j0)))
        .collect();
    out.cannot_make_tier2 = inst
        .cannot_make_tier2
        .iter()
        .filter(|&&(_, j, _)| j != j0)
        .map(|&(k, j, l)| (k, shift_down(j, j0), l))
        .collect();
    Ok(out)
}

fn remove_tier2(inst: &SupplyChainInstance, l0: usize) -> Result<SupplyChainInstance, SessionError> {
    let shape = inst.shape;
    if l0 >= shape.tier2_count {
        return Err(SessionError::Scenario(format!("tier2 supplier {l0} does not exist")));
    }
    if inst.must_make_tier2.iter().any(|&(_, _, l)| l == l0) {
        return Err(SessionError::Scenario(format!(
            "tier2 supplier {l0} appears in a must-make pair"
        )));
    }
    let nl = shape.tier2_count - 1;
    let mut out = inst.clone();
    out.shape.tier2_count = nl;
    let keep: Vec<usize> = (0..shape.tier2_count).filter(|&l| l != l0).collect();
    let g3 = |g: &Grid3| {
        let [a, b, _] = g.dims;
        let mut n = Grid3::filled(a, b, nl, 0.0);
        for k in 0..a {
            for j in 0..b {
                for (c, &l) in keep.iter().enumerate() {
                    n.set(k, j, c, g.get(k, j, l));
                }
            }
        }
        n
    };
    out.forging_unit_cost = g3(&inst.forging_unit_cost);
    out.forging_transport_cost = g3(&inst.forging_transport_cost);
    out.tier2_budget.remove(l0);
    out.penalty.threshold.remove(l0);
    out.penalty.factor.remove(l0);
    out.must_make_tier2 = inst
        .must_make_tier2
        .iter()
        .map(|&(k, j, l)| (k, j, shift_down(l, l0)))
        .collect();
    out.cannot_make_tier2 = inst
        .cannot_make_tier2
        .iter()
        .filter(|&&(_, _, l)| l != l0)
        .map(|&(k, j, l)| (k, j, shift_down(l, l0)))
        .collect();
    Ok(out)
}

fn pair_index(
    inst: &SupplyChainInstance,
    item: ItemId,
    tier1: usize,
    tier2: Option<usize>,
) -> Result<(usize, Option<usize>), SessionError> {
    let shape = inst.shape;
    let bad = |m: &str| SessionError::Scenario(format!("{item}: {m}"));
    if tier1 >= shape.tier1_count {
        return Err(bad("unknown tier1 supplier"));
    }
    match tier2 {
        None => shape.part_index(item).map(|i| (i, None)).ok_or_else(|| bad("not a part")),
        Some(l) if l < shape.tier2_count => shape
            .forging_index(item)
            .map(|k| (k, Some(l)))
            .ok_or_else(|| bad("not a forging")),
        Some(_) => Err(bad("unknown tier2 supplier")),
    }
}

/// Applies a what-if mutation and validates the result.
pub fn apply_mutation(inst: &SupplyChainInstance, m: &Mutation) -> Result<SupplyChainInstance, SessionError> {
    let out = match m {
        Mutation::RemoveSupplier { tier: 1, supplier } => remove_tier1(inst, *supplier)?,
        Mutation::RemoveSupplier { tier: 2, supplier } => remove_tier2(inst, *supplier)?,
        Mutation::RemoveSupplier { tier, .. } => {
            return Err(SessionError::Scenario(format!("tier must be 1 or 2, got {tier}")))
        }
        Mutation::ForceAssignment { item, tier1, tier2 } | Mutation::ForbidAssignment { item, tier1, tier2 } => {
            let force = matches!(m, Mutation::ForceAssignment { .. });
            let mut out = inst.clone();
            match pair_index(inst, *item, *tier1, *tier2)? {
                (i, None) => {
                    if force {
                        out.must_make_tier1.insert((i, *tier1));
                    } else {
                        out.cannot_make_tier1.insert((i, *tier1));
                    }
                }
                (k, Some(l)) => {
                    if force {
                        out.must_make_tier2.insert((k, *tier1, l));
                    } else {
                        out.cannot_make_tier2.insert((k, *tier1, l));
                    }
                }
            }
            out
        }
        Mutation::ShiftOrder { item, from, to } => {
            let (i, _) = pair_index(inst, *item, *from, None)?;
            pair_index(inst, *item, *to, None)?;
            let mut out = inst.clone();
            out.must_make_tier1.remove(&(i, *from));
            out.cannot_make_tier1.insert((i, *from));
            out.cannot_make_tier1.remove(&(i, *to));
            out.must_make_tier1.insert((i, *to));
            out
        }
        Mutation::ChangePenalty { supplier, threshold, factor } => {
            if *supplier >= inst.shape.tier2_count {
                return Err(SessionError::Scenario(format!("tier2 supplier {supplier} does not exist")));
            }
            let mut out = inst.clone();
            if let Some(t) = threshold {
                out.penalty.threshold[*supplier] = *t;
            }
            if let Some(f) = factor {
                out.penalty.factor[*supplier] = *f;
            }
            out
        }
    };
    let violations = validate_instance(&out);
    if !violations.is_empty() {
        return Err(SessionError::Invalid(violations));
    }
    Ok(out)
}

/// Suppliers of each tier that received any order in `report`.
pub fn active_suppliers(report: &SolveReport) -> (BTreeSet<usize>, BTreeSet<usize>) {
    match &report.allocation {
        Some(a) => (
            a.tier1.iter().copied().collect(),
            a.tier2.iter().map(|c| c.supplier).collect(),
        ),
        None => Default::default(),
    }
}
