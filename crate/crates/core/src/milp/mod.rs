//! Compilation of instances into solver-agnostic MILP models.
//!
//! Variable order is lexicographic by family (X, Y, v, U), then item,
//! Tier1 supplier, Tier2 supplier, penalty level and proportion, so exports
//! and solver runs are reproducible.

mod build;
mod count;
mod export;
mod model;

pub use build::{
    build_forger, build_integrated_linearized, build_machinist, build_model, decode_allocation,
    encode_allocation, BuildOptions, BIG_M_FACTOR, DEFAULT_LINEARIZATION_CAP,
};
pub use count::{count_variables, count_variables_for_shape, VariableCount, YieldLinks};
pub use export::{export_model, import_model, read_lp, read_mps, ExportFormat, ParsedModel, MAX_NAME_LEN};
pub use model::{
    Constraint, Integrality, LinearModel, ModelKind, ModelMetadata, Relation, VarTag, Variable,
};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ModelError {
    #[error("structurally infeasible: {0}")]
    StructurallyInfeasible(String),
    #[error("intractable at this scale: about {estimated} variables, cap is {cap}")]
    Intractable { estimated: usize, cap: usize },
    #[error("tier1 allocation: {0}")]
    IncompleteTier1(String),
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("invalid model: {0}")]
    Invalid(String),
    #[error("export: {0}")]
    Export(String),
    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },
}
