use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::time::Instant;

use crate::instance::SupplyChainInstance;
use crate::milp::{decode_allocation, Integrality, LinearModel, Relation};

use super::simplex::{DualSimplex, LpOutcome};
use super::{relative_gap, SolveError, SolveLimits, SolveReport, SolveStatus, TracePoint};

const INT_TOL: f64 = 1e-6;
const ROW_ABS_TOL: f64 = 1e-9;
const ROW_REL_TOL: f64 = 1e-12;
const RESIDUAL_TOL: f64 = 1e-7;

/// Raw branch-and-bound result on a model.
#[derive(Clone, Debug, PartialEq)]
pub struct MilpOutcome {
    pub status: SolveStatus,
    pub values: Option<Vec<f64>>,
    pub objective: Option<f64>,
    pub best_bound: Option<f64>,
    pub nodes: u64,
    pub iterations: u64,
    pub trace: Vec<TracePoint>,
    pub certificate: Vec<String>,
    pub wall_time: f64,
}

struct Node {
    bound: f64,
    seq: u64,
    fixes: Vec<(u32, bool)>,
}

impl PartialEq for Node {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}
impl Eq for Node {}
impl PartialOrd for Node {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Node {
    // max-heap on "best": lower bound first, then older node
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .bound
            .total_cmp(&self.bound)
            .then_with(|| other.seq.cmp(&self.seq))
    }
}

struct Search<'a> {
    model: &'a LinearModel,
    lp: DualSimplex,
    root_lo: Vec<f64>,
    root_up: Vec<f64>,
    binaries: Vec<usize>,
    cost: Vec<f64>,
    max_iter: usize,
    iterations: u64,
}

enum NodeLp {
    Solved { objective: f64, values: Vec<f64> },
    Infeasible(Vec<(usize, f64)>),
    Failed,
}

impl<'a> Search<'a> {
    fn solve_node(&mut self, fixes: &[(u32, bool)]) -> NodeLp {
        let mut lo = self.root_lo.clone();
        let mut up = self.root_up.clone();
        for &(j, v) in fixes {
            let b = if v { 1.0 } else { 0.0 };
            lo[j as usize] = b;
            up[j as usize] = b;
        }
        for attempt in 0..2 {
            if attempt == 1 {
                // cold restart from the slack basis
                self.lp = DualSimplex::new(self.model);
            }
            self.lp.set_bounds(&lo, &up);
            let before = self.lp.iterations;
            let out = self.lp.solve(self.max_iter);
            self.iterations += (self.lp.iterations - before) as u64;
            match out {
                LpOutcome::Optimal if self.lp.residual() <= RESIDUAL_TOL && !self.lp.hit_box() => {
                    return NodeLp::Solved {
                        objective: self.lp.objective() + self.model.objective_constant,
                        values: self.lp.values().to_vec(),
                    }
                }
                LpOutcome::Infeasible(cert) if attempt == 1 || fixes.is_empty() => {
                    return NodeLp::Infeasible(cert)
                }
                // trust infeasibility only when the tableau is accurate
                LpOutcome::Infeasible(cert) if self.lp.residual() <= RESIDUAL_TOL => {
                    return NodeLp::Infeasible(cert);
                }
                _ => {}
            }
        }
        NodeLp::Failed
    }

    /// Rounds binaries and checks every row in model units.
    fn rounded_if_feasible(&self, values: &[f64]) -> Option<(Vec<f64>, f64)> {
        let mut x = values.to_vec();
        for &j in &self.binaries {
            x[j] = x[j].round();
        }
        for c in &self.model.constraints {
            let mut act = 0.0;
            let mut scale = c.rhs.abs();
            for &(j, a) in &c.row {
                act += a * x[j];
                scale = scale.max((a * x[j]).abs());
            }
            let tol = ROW_ABS_TOL + ROW_REL_TOL * scale;
            let ok = match c.relation {
                Relation::Le => act <= c.rhs + tol,
                Relation::Ge => act >= c.rhs - tol,
                Relation::Eq => (act - c.rhs).abs() <= tol,
            };
            if !ok {
                return None;
            }
        }
        let obj = self.model.objective_constant
            + x.iter().zip(&self.cost).map(|(a, b)| a * b).sum::<f64>();
        Some((x, obj))
    }
}

/// Branch-and-bound over a model whose integer variables are binary.
/// Best-bound node selection with depth-first diving into the child nearest
/// the LP value; branching on the most fractional binary, ties by index.
pub fn solve_model(model: &LinearModel, limits: &SolveLimits) -> Result<MilpOutcome, SolveError> {
    limits.validate()?;
    model.validate()?;
    let start = Instant::now();
    let budget = limits.time_budget();
    let binaries: Vec<usize> = model
        .variables
        .iter()
        .enumerate()
        .filter(|(_, v)| v.integrality == Integrality::Binary)
        .map(|(j, _)| j)
        .collect();
    let mut search = Search {
        model,
        lp: DualSimplex::new(model),
        root_lo: model.variables.iter().map(|v| v.lower).collect(),
        root_up: model.variables.iter().map(|v| v.upper).collect(),
        binaries,
        cost: model.objective_dense(),
        max_iter: 50 * (model.variables.len() + model.constraints.len()) + 1000,
        iterations: 0,
    };

    let mut incumbent: Option<(Vec<f64>, f64)> = None;
    let mut trace = Vec::new();
    let mut heap = BinaryHeap::new();
    let mut seq = 0u64;
    let mut nodes = 0u64;
    let mut lost_nodes = false;
    let mut stopped = false;
    let mut certificate = Vec::new();
    let mut dive: Option<Node> = Some(Node {
        bound: f64::NEG_INFINITY,
        seq: 0,
        fixes: Vec::new(),
    });

    let prune_tol = |inc: f64| limits.gap_target * inc.abs().max(1.0);

    while let Some(node) = dive.take().or_else(|| heap.pop()) {
        if let Some((_, inc)) = &incumbent {
            if node.bound >= inc - prune_tol(*inc) {
                // best-bound order: everything left is no better
                if heap.peek().is_none_or(|n: &Node| n.bound >= node.bound) {
                    heap.clear();
                    break;
                }
                continue;
            }
        }
        if nodes >= limits.node_limit || start.elapsed() > budget {
            heap.push(node);
            stopped = true;
            break;
        }
        nodes += 1;
        let (obj, values) = match search.solve_node(&node.fixes) {
            NodeLp::Solved { objective, values } => (objective, values),
            NodeLp::Infeasible(cert) => {
                if node.fixes.is_empty() {
                    certificate = cert
                        .iter()
                        .map(|&(i, _)| model.constraints[i].label.clone())
                        .collect();
                }
                continue;
            }
            NodeLp::Failed => {
                log::warn!("LP failed at a node with {} fixings; node dropped", node.fixes.len());
                lost_nodes = true;
                continue;
            }
        };
        if let Some((_, inc)) = &incumbent {
            if obj >= inc - prune_tol(*inc) {
                continue;
            }
        }

        let mut branch: Option<(usize, f64)> = None;
        let mut best_dist = INT_TOL;
        for &j in &search.binaries {
            let x = values[j];
            let dist = (x - x.floor()).min(x.ceil() - x);
            if dist > best_dist {
                best_dist = dist;
                branch = Some((j, x));
            }
        }
        if branch.is_none() {
            match search.rounded_if_feasible(&values) {
                Some((x, value)) => {
                    let better = incumbent.as_ref().is_none_or(|(_, inc)| value < *inc);
                    if better {
                        trace.push(TracePoint {
                            time: start.elapsed().as_secs_f64(),
                            incumbent: value,
                        });
                        incumbent = Some((x, value));
                    }
                    continue;
                }
                None => {
                    // near-integral but the rounded point breaks a row:
                    // branch on the largest remaining fractionality
                    let mut best = 0.0;
                    for &j in &search.binaries {
                        let x = values[j];
                        let dist = (x - x.floor()).min(x.ceil() - x);
                        if dist > best {
                            best = dist;
                            branch = Some((j, x));
                        }
                    }
                    if branch.is_none() {
                        log::warn!("integral LP point violates rows after rounding; node dropped");
                        lost_nodes = true;
                        continue;
                    }
                }
            }
        }
        let (j, x) = branch.expect("branch variable chosen");
        let near_one = x >= 0.5;
        let mut child = |value: bool| {
            seq += 1;
            let mut fixes = node.fixes.clone();
            fixes.push((j as u32, value));
            Node {
                bound: obj,
                seq,
                fixes,
            }
        };
        let first = child(near_one);
        let second = child(!near_one);
        heap.push(second);
        dive = Some(first);
    }

    let elapsed = start.elapsed().as_secs_f64();
    let open_bound = heap.iter().map(|n| n.bound).fold(f64::INFINITY, f64::min);
    let (status, values, objective, best_bound) = match incumbent {
        Some((x, inc)) => {
            let bound = open_bound.min(inc);
            let status = if stopped || lost_nodes {
                SolveStatus::Feasible
            } else {
                SolveStatus::Optimal
            };
            (status, Some(x), Some(inc), Some(bound))
        }
        None => {
            let status = if stopped || lost_nodes {
                SolveStatus::TimeLimit
            } else {
                SolveStatus::Infeasible
            };
            let bound = open_bound.is_finite().then_some(open_bound);
            (status, None, None, bound)
        }
    };
    Ok(MilpOutcome {
        status,
        values,
        objective,
        best_bound,
        nodes,
        iterations: search.iterations,
        trace,
        certificate,
        wall_time: elapsed,
    })
}

/// Solves a model built from `inst` and decodes the allocation.
pub fn solve_bb(
    inst: &SupplyChainInstance,
    model: &LinearModel,
    limits: &SolveLimits,
) -> Result<SolveReport, SolveError> {
    let out = solve_model(model, limits)?;
    let allocation = match &out.values {
        Some(x) => Some(decode_allocation(model, inst, x)?),
        None => None,
    };
    Ok(SolveReport {
        solver: "branch_and_bound".into(),
        model: model.metadata.kind,
        status: out.status,
        objective: out.objective,
        allocation,
        best_bound: out.best_bound,
        relative_gap: out
            .objective
            .zip(out.best_bound)
            .map(|(inc, b)| relative_gap(inc, b)),
        nodes: out.nodes,
        iterations: out.iterations,
        wall_time: out.wall_time,
        trace: out.trace,
        certificate: out.certificate,
    })
}
