use std::collections::HashSet;

use serde::{Deserialize, Serialize};

use crate::instance::{PenaltyLevel, SourcingMode};

use super::ModelError;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelKind {
    Machinist,
    Forger,
    /// The bilinear integrated model; only counted, never built.
    Integrated,
    IntegratedLinearized,
}

impl ModelKind {
    pub fn name(self) -> &'static str {
        match self {
            ModelKind::Machinist => "machinist",
            ModelKind::Forger => "forger",
            ModelKind::Integrated => "integrated",
            ModelKind::IntegratedLinearized => "integrated-linearized",
        }
    }
}

impl std::fmt::Display for ModelKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Integrality {
    Binary,
    Continuous,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Relation {
    #[serde(rename = "<=")]
    Le,
    #[serde(rename = "=")]
    Eq,
    #[serde(rename = ">=")]
    Ge,
}

/// What a model variable means in terms of the allocation.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum VarTag {
    X {
        part: usize,
        tier1: usize,
        proportion: usize,
    },
    Y {
        forging: usize,
        tier1: usize,
        tier2: usize,
        level: PenaltyLevel,
        proportion: usize,
    },
    V {
        tier2: usize,
    },
    /// Product of an X and a Y variable.
    U {
        forging: usize,
        tier1: usize,
        tier2: usize,
        level: PenaltyLevel,
        proportion: usize,
        part: usize,
        part_proportion: usize,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Variable {
    pub name: String,
    pub lower: f64,
    pub upper: f64,
    pub integrality: Integrality,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tag: Option<VarTag>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Constraint {
    pub label: String,
    pub row: Vec<(usize, f64)>,
    pub relation: Relation,
    pub rhs: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModelMetadata {
    pub kind: ModelKind,
    pub mode: SourcingMode,
    pub fingerprint: String,
    pub big_m: Option<f64>,
    pub epsilon: f64,
    pub variable_estimate: usize,
}

/// A minimization MILP over binary and continuous variables.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LinearModel {
    pub variables: Vec<Variable>,
    /// Sparse objective coefficients.
    pub objective: Vec<(usize, f64)>,
    pub objective_constant: f64,
    pub constraints: Vec<Constraint>,
    pub metadata: ModelMetadata,
    /// Tier1 allocation a forger model was built for.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fixed_tier1: Option<Vec<usize>>,
}

impl LinearModel {
    pub fn new(metadata: ModelMetadata) -> Self {
        LinearModel {
            variables: Vec::new(),
            objective: Vec::new(),
            objective_constant: 0.0,
            constraints: Vec::new(),
            metadata,
            fixed_tier1: None,
        }
    }

    pub fn add_binary(&mut self, name: String, tag: Option<VarTag>, cost: f64) -> usize {
        let idx = self.variables.len();
        self.variables.push(Variable {
            name,
            lower: 0.0,
            upper: 1.0,
            integrality: Integrality::Binary,
            tag,
        });
        if cost != 0.0 {
            self.objective.push((idx, cost));
        }
        idx
    }

    pub fn add_row(&mut self, label: String, row: Vec<(usize, f64)>, relation: Relation, rhs: f64) {
        self.constraints.push(Constraint {
            label,
            row,
            relation,
            rhs,
        });
    }

    pub fn num_binaries(&self) -> usize {
        self.variables
            .iter()
            .filter(|v| v.integrality == Integrality::Binary)
            .count()
    }

    /// Dense objective vector.
    pub fn objective_dense(&self) -> Vec<f64> {
        let mut c = vec![0.0; self.variables.len()];
        for &(j, a) in &self.objective {
            c[j] += a;
        }
        c
    }

    pub fn objective_value(&self, values: &[f64]) -> f64 {
        self.objective_constant
            + self
                .objective
                .iter()
                .map(|&(j, a)| a * values[j])
                .sum::<f64>()
    }

    /// Checks the structural invariants: declared variables only, unique
    /// labels and names, binary bounds, finite data.
    pub fn validate(&self) -> Result<(), ModelError> {
        let n = self.variables.len();
        let mut names = HashSet::with_capacity(n);
        for v in &self.variables {
            if !names.insert(v.name.as_str()) {
                return Err(ModelError::Invalid(format!("duplicate variable `{}`", v.name)));
            }
            if v.integrality == Integrality::Binary && (v.lower != 0.0 || v.upper != 1.0) {
                return Err(ModelError::Invalid(format!(
                    "binary `{}` has bounds [{}, {}]",
                    v.name, v.lower, v.upper
                )));
            }
            if v.lower.is_nan() || v.upper.is_nan() || v.lower > v.upper {
                return Err(ModelError::Invalid(format!("bad bounds on `{}`", v.name)));
            }
        }
        for &(j, a) in &self.objective {
            if j >= n || !a.is_finite() {
                return Err(ModelError::Invalid(format!("bad objective entry ({j}, {a})")));
            }
        }
        if !self.objective_constant.is_finite() {
            return Err(ModelError::Invalid("non-finite objective constant".into()));
        }
        let mut labels = HashSet::with_capacity(self.constraints.len());
        for c in &self.constraints {
            if !labels.insert(c.label.as_str()) {
                return Err(ModelError::Invalid(format!("duplicate row label `{}`", c.label)));
            }
            if !c.rhs.is_finite() {
                return Err(ModelError::Invalid(format!("non-finite rhs in `{}`", c.label)));
            }
            for &(j, a) in &c.row {
                if j >= n {
                    return Err(ModelError::Invalid(format!(
                        "row `{}` references undeclared variable {j}",
                        c.label
                    )));
                }
                if !a.is_finite() {
                    return Err(ModelError::Invalid(format!(
                        "non-finite coefficient in `{}`",
                        c.label
                    )));
                }
            }
        }
        Ok(())
    }

    /// Labels of rows violated by `values`, each with its violation. The
    /// tolerance is relative to the magnitude of the row terms.
    pub fn violated_rows(&self, values: &[f64], rel_tol: f64) -> Vec<(String, f64)> {
        let mut out = Vec::new();
        for c in &self.constraints {
            let mut act = 0.0;
            let mut scale = c.rhs.abs().max(1.0);
            for &(j, a) in &c.row {
                let t = a * values[j];
                act += t;
                scale = scale.max(t.abs());
            }
            let viol = match c.relation {
                Relation::Le => act - c.rhs,
                Relation::Ge => c.rhs - act,
                Relation::Eq => (act - c.rhs).abs(),
            };
            if viol > rel_tol * scale {
                out.push((c.label.clone(), viol));
            }
        }
        for (j, v) in self.variables.iter().enumerate() {
            let x = values[j];
            if x < v.lower - rel_tol || x > v.upper + rel_tol {
                out.push((format!("bound:{}", v.name), x));
            }
        }
        out
    }
}
