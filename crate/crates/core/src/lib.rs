//! Two-tier supplier selection and order allocation (SSOA).
//!
//! The crate covers the whole offline pipeline: instance generation and
//! validation, the cost algebra shared by every solver, compilation into
//! solver-agnostic MILP models (with LP/MPS export), an exact
//! branch-and-bound solver with an enumeration oracle, the GA/PSO/ACO
//! meta-heuristics, and the sweeps used for sensitivity analysis. The
//! [`session`] module holds the bidding-conference ledger that the HTTP
//! service persists.

pub mod analysis;
pub mod api;
pub mod costs;
pub mod exact;
pub mod heuristics;
pub mod instance;
pub mod milp;
pub mod session;
pub mod solver;

pub use costs::{evaluate, Allocation, CostBreakdown, Scope, Tier2Choice};
pub use instance::{
    apply_bid_round, generate_instance, load_instance, save_instance, validate_instance,
    BidDelta, GeneratorConfig, ItemId, ItemKind, ProblemShape, SourcingMode, SupplyChainInstance,
};

/// Absolute tolerance used for every money comparison.
pub const MONEY_TOL: f64 = 1e-6;
