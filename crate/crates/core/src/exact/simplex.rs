//! Dense bounded-variable dual simplex on an explicit tableau.
//!
//! Every row `a x (<=|=|>=) b` becomes `a x + s = b` with a bounded slack,
//! so the slack basis is always available. Nonbasic variables sit at the
//! bound that keeps their reduced cost dual feasible, which makes the dual
//! simplex the only algorithm needed: the objective never changes, and
//! branch-and-bound nodes differ only in bounds. Rows are scaled to unit
//! max-norm and the objective to unit max-norm.

use crate::milp::{LinearModel, Relation};

const PRIMAL_TOL: f64 = 1e-9;
const DUAL_TOL: f64 = 1e-11;
const PIVOT_TOL: f64 = 1e-9;
const HARRIS_TOL: f64 = 1e-12;
/// Stand-in for an infinite bound a nonbasic variable must sit on.
const BIG_BOX: f64 = 1e9;
const DEGENERATE_LIMIT: usize = 200;

#[derive(Debug, Clone, PartialEq)]
pub enum LpOutcome {
    Optimal,
    /// Row of the tableau proving infeasibility, as original-row multipliers.
    Infeasible(Vec<(usize, f64)>),
    /// Iteration limit or numerical breakdown.
    Failed,
}

pub struct DualSimplex {
    m: usize,
    n: usize,
    w: usize,
    t: Vec<f64>,
    d: Vec<f64>,
    lo: Vec<f64>,
    up: Vec<f64>,
    x: Vec<f64>,
    basis: Vec<usize>,
    is_basic: Vec<bool>,
    /// Original scaled rows, kept for residual checks.
    rows: Vec<Vec<(usize, f64)>>,
    rhs: Vec<f64>,
    cost: Vec<f64>,
    obj_scale: f64,
    pub iterations: usize,
    boxed: Vec<usize>,
}

impl DualSimplex {
    pub fn new(model: &LinearModel) -> Self {
        let n = model.variables.len();
        let m = model.constraints.len();
        let w = n + m + 1;
        let mut t = vec![0.0; m * w];
        let mut rows = Vec::with_capacity(m);
        let mut rhs = Vec::with_capacity(m);
        let mut lo = vec![0.0; n + m];
        let mut up = vec![0.0; n + m];
        for (j, v) in model.variables.iter().enumerate() {
            lo[j] = v.lower;
            up[j] = v.upper;
        }
        for (i, c) in model.constraints.iter().enumerate() {
            let norm = c.row.iter().fold(0.0f64, |a, &(_, v)| a.max(v.abs()));
            let s = if norm > 0.0 { 1.0 / norm } else { 1.0 };
            let mut row = Vec::with_capacity(c.row.len());
            for &(j, a) in &c.row {
                t[i * w + j] += a * s;
                row.push((j, a * s));
            }
            t[i * w + n + i] = 1.0;
            t[i * w + w - 1] = c.rhs * s;
            rows.push(row);
            rhs.push(c.rhs * s);
            let (l, u) = match c.relation {
                Relation::Le => (0.0, f64::INFINITY),
                Relation::Ge => (f64::NEG_INFINITY, 0.0),
                Relation::Eq => (0.0, 0.0),
            };
            lo[n + i] = l;
            up[n + i] = u;
        }
        let raw = model.objective_dense();
        let cmax = raw.iter().fold(0.0f64, |a, v| a.max(v.abs()));
        let obj_scale = if cmax > 0.0 { cmax } else { 1.0 };
        let mut cost = vec![0.0; n + m];
        for j in 0..n {
            cost[j] = raw[j] / obj_scale;
        }
        let mut s = DualSimplex {
            m,
            n,
            w,
            t,
            d: cost.clone(),
            lo,
            up,
            x: vec![0.0; n + m],
            basis: (n..n + m).collect(),
            is_basic: (0..n + m).map(|j| j >= n).collect(),
            rows,
            rhs,
            cost,
            obj_scale,
            iterations: 0,
            boxed: Vec::new(),
        };
        s.place_nonbasics();
        s.recompute_basics();
        s
    }

    /// Replaces the structural bounds; the basis is kept.
    pub fn set_bounds(&mut self, lo: &[f64], up: &[f64]) {
        self.lo[..self.n].copy_from_slice(lo);
        self.up[..self.n].copy_from_slice(up);
        self.place_nonbasics();
        self.recompute_basics();
    }

    fn place_nonbasics(&mut self) {
        self.boxed.clear();
        for j in 0..self.n + self.m {
            if self.is_basic[j] {
                continue;
            }
            let (l, u, dj) = (self.lo[j], self.up[j], self.d[j]);
            let want_upper = if dj > DUAL_TOL {
                false
            } else if dj < -DUAL_TOL {
                true
            } else {
                l == f64::NEG_INFINITY && u != f64::INFINITY
            };
            self.x[j] = if want_upper {
                if u.is_finite() {
                    u
                } else {
                    self.boxed.push(j);
                    BIG_BOX
                }
            } else if l.is_finite() {
                l
            } else if dj.abs() <= DUAL_TOL {
                0.0
            } else {
                self.boxed.push(j);
                -BIG_BOX
            };
        }
    }

    fn recompute_basics(&mut self) {
        let w = self.w;
        let nonzero: Vec<(usize, f64)> = (0..self.n + self.m)
            .filter(|&j| !self.is_basic[j] && self.x[j] != 0.0)
            .map(|j| (j, self.x[j]))
            .collect();
        for i in 0..self.m {
            let row = &self.t[i * w..(i + 1) * w];
            let mut v = row[w - 1];
            for &(j, xj) in &nonzero {
                v -= row[j] * xj;
            }
            self.x[self.basis[i]] = v;
        }
    }

    fn infeasibility(&self, i: usize) -> f64 {
        let b = self.basis[i];
        let v = self.x[b];
        if v < self.lo[b] - PRIMAL_TOL {
            self.lo[b] - v
        } else if v > self.up[b] + PRIMAL_TOL {
            v - self.up[b]
        } else {
            0.0
        }
    }

    fn pivot(&mut self, r: usize, q: usize) {
        let w = self.w;
        let piv = self.t[r * w + q];
        let inv = 1.0 / piv;
        let mut nz = Vec::new();
        for k in 0..w {
            let v = self.t[r * w + k];
            if v != 0.0 {
                let nv = v * inv;
                if nv.abs() < 1e-14 {
                    self.t[r * w + k] = 0.0;
                } else {
                    self.t[r * w + k] = nv;
                    nz.push(k);
                }
            }
        }
        self.t[r * w + q] = 1.0;
        let (before, rest) = self.t.split_at_mut(r * w);
        let (prow, after) = rest.split_at_mut(w);
        for row in before.chunks_exact_mut(w).chain(after.chunks_exact_mut(w)) {
            let f = row[q];
            if f != 0.0 {
                for &k in &nz {
                    row[k] -= f * prow[k];
                }
                row[q] = 0.0;
            }
        }
        let f = self.d[q];
        if f != 0.0 {
            for &k in &nz {
                if k < w - 1 {
                    self.d[k] -= f * prow[k];
                }
            }
            self.d[q] = 0.0;
        }
        let leaving = self.basis[r];
        self.is_basic[leaving] = false;
        self.is_basic[q] = true;
        self.basis[r] = q;
        self.iterations += 1;
    }

    /// Runs dual simplex iterations until primal feasibility.
    pub fn solve(&mut self, max_iter: usize) -> LpOutcome {
        let w = self.w;
        let mut degenerate = 0usize;
        let mut iter = 0usize;
        loop {
            iter += 1;
            if iter > max_iter {
                return LpOutcome::Failed;
            }
            let bland = degenerate > DEGENERATE_LIMIT;
            // leaving row
            let mut r = usize::MAX;
            let mut best = 0.0;
            for i in 0..self.m {
                let inf = self.infeasibility(i);
                if inf > 0.0 {
                    if bland {
                        if r == usize::MAX || self.basis[i] < self.basis[r] {
                            r = i;
                        }
                    } else if inf > best {
                        best = inf;
                        r = i;
                    }
                }
            }
            if r == usize::MAX {
                return LpOutcome::Optimal;
            }
            let b = self.basis[r];
            let to_lower = self.x[b] < self.lo[b];
            let target = if to_lower { self.lo[b] } else { self.up[b] };
            let row = &self.t[r * w..(r + 1) * w];

            // Harris two-pass ratio test
            let eligible = |j: usize| -> Option<f64> {
                if self.is_basic[j] || self.lo[j] == self.up[j] {
                    return None;
                }
                let a = row[j];
                if a.abs() < PIVOT_TOL {
                    return None;
                }
                let at_lower = self.x[j] == self.lo[j];
                let at_upper = self.x[j] == self.up[j];
                let free = !at_lower && !at_upper;
                // increasing x_j moves x_b by -a
                let can_up = at_lower || free;
                let can_down = at_upper || free;
                let ok = if to_lower {
                    (can_up && a < 0.0) || (can_down && a > 0.0)
                } else {
                    (can_up && a > 0.0) || (can_down && a < 0.0)
                };
                ok.then_some(a)
            };
            let mut theta_max = f64::INFINITY;
            for j in 0..self.n + self.m {
                if let Some(a) = eligible(j) {
                    let bound = if bland {
                        self.d[j].abs() / a.abs()
                    } else {
                        (self.d[j].abs() + HARRIS_TOL) / a.abs()
                    };
                    theta_max = theta_max.min(bound);
                }
            }
            if theta_max == f64::INFINITY {
                let cert = (0..self.m)
                    .filter_map(|i| {
                        let v = row[self.n + i];
                        (v.abs() > 1e-9).then_some((i, v))
                    })
                    .collect();
                return LpOutcome::Infeasible(cert);
            }
            let mut q = usize::MAX;
            let mut qa = 0.0f64;
            for j in 0..self.n + self.m {
                if let Some(a) = eligible(j) {
                    let ratio = self.d[j].abs() / a.abs();
                    if ratio <= theta_max + if bland { 1e-15 } else { 0.0 } {
                        let better = if bland {
                            q == usize::MAX
                        } else {
                            a.abs() > qa.abs()
                        };
                        if better {
                            q = j;
                            qa = a;
                        }
                    }
                }
            }
            let step_dual = self.d[q].abs() / qa.abs();
            if step_dual <= 1e-14 {
                degenerate += 1;
            } else {
                degenerate = 0;
            }

            let delta = (self.x[b] - target) / qa;
            for i in 0..self.m {
                let a = self.t[i * w + q];
                if a != 0.0 {
                    self.x[self.basis[i]] -= a * delta;
                }
            }
            self.x[q] += delta;
            self.x[b] = target;
            self.pivot(r, q);
            if !self.d[b].is_finite() {
                return LpOutcome::Failed;
            }
        }
    }

    /// Scaled max residual of `A x + s = b`.
    pub fn residual(&self) -> f64 {
        let mut worst = 0.0f64;
        for (i, row) in self.rows.iter().enumerate() {
            let mut v = self.x[self.n + i] - self.rhs[i];
            for &(j, a) in row {
                v += a * self.x[j];
            }
            worst = worst.max(v.abs());
        }
        worst
    }

    /// A variable is resting on an artificial box bound: the LP is unbounded
    /// in that direction.
    pub fn hit_box(&self) -> bool {
        self.boxed.iter().any(|&j| self.x[j].abs() >= BIG_BOX * 0.999)
    }

    pub fn values(&self) -> &[f64] {
        &self.x[..self.n]
    }

    /// Objective in model units, without the model constant.
    pub fn objective(&self) -> f64 {
        (0..self.n).map(|j| self.cost[j] * self.x[j]).sum::<f64>() * self.obj_scale
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instance::SourcingMode;
    use crate::milp::{Integrality, ModelKind, ModelMetadata, Variable};

    type Row<'a> = (&'a [(usize, f64)], Relation, f64);

    fn model(vars: &[(f64, f64, f64)], rows: &[Row<'_>]) -> LinearModel {
        let mut m = LinearModel::new(ModelMetadata {
            kind: ModelKind::Machinist,
            mode: SourcingMode::Single,
            fingerprint: String::new(),
            big_m: None,
            epsilon: 1e-3,
            variable_estimate: 0,
        });
        for (j, &(lo, up, c)) in vars.iter().enumerate() {
            m.variables.push(Variable {
                name: format!("v{j}"),
                lower: lo,
                upper: up,
                integrality: Integrality::Continuous,
                tag: None,
            });
            if c != 0.0 {
                m.objective.push((j, c));
            }
        }
        for (i, (row, rel, rhs)) in rows.iter().enumerate() {
            m.add_row(format!("r{i}"), row.to_vec(), *rel, *rhs);
        }
        m
    }

    #[test]
    fn small_lp_optimum() {
        // min -x - 2y, x + y <= 4, x + 3y <= 6, 0 <= x, y <= 3
        let m = model(
            &[(0.0, 3.0, -1.0), (0.0, 3.0, -2.0)],
            &[
                (&[(0, 1.0), (1, 1.0)], Relation::Le, 4.0),
                (&[(0, 1.0), (1, 3.0)], Relation::Le, 6.0),
            ],
        );
        let mut s = DualSimplex::new(&m);
        assert_eq!(s.solve(1000), LpOutcome::Optimal);
        assert!((s.objective() + 5.0).abs() < 1e-9, "{}", s.objective());
        assert!((s.values()[0] - 3.0).abs() < 1e-9);
        assert!((s.values()[1] - 1.0).abs() < 1e-9);
    }

    #[test]
    fn equality_and_ge_rows() {
        // min x + y + z, x + y + z = 2, x - z >= 0.5, bounds [0, 1]
        let m = model(
            &[(0.0, 1.0, 1.0), (0.0, 1.0, 3.0), (0.0, 1.0, 2.0)],
            &[
                (&[(0, 1.0), (1, 1.0), (2, 1.0)], Relation::Eq, 2.0),
                (&[(0, 1.0), (2, -1.0)], Relation::Ge, 0.5),
            ],
        );
        let mut s = DualSimplex::new(&m);
        assert_eq!(s.solve(1000), LpOutcome::Optimal);
        // x = 1, then z <= 0.5, y = 1 - z: cost 1 + 3(1 - z) + 2z minimized at z = 0.5
        assert!((s.objective() - 3.5).abs() < 1e-9, "{}", s.objective());
        assert!(s.residual() < 1e-12);
    }

    #[test]
    fn infeasible_rows_give_a_certificate() {
        let m = model(
            &[(0.0, 1.0, 1.0), (0.0, 1.0, 1.0)],
            &[
                (&[(0, 1.0), (1, 1.0)], Relation::Eq, 1.0),
                (&[(0, 1.0)], Relation::Eq, 1.0),
                (&[(1, 1.0)], Relation::Eq, 1.0),
            ],
        );
        let mut s = DualSimplex::new(&m);
        match s.solve(1000) {
            LpOutcome::Infeasible(cert) => assert!(!cert.is_empty()),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn warm_start_after_bound_change() {
        let m = model(
            &[(0.0, 1.0, -1.0), (0.0, 1.0, -1.0)],
            &[(&[(0, 2.0), (1, 2.0)], Relation::Le, 3.0)],
        );
        let mut s = DualSimplex::new(&m);
        assert_eq!(s.solve(100), LpOutcome::Optimal);
        assert!((s.objective() + 1.5).abs() < 1e-9);
        s.set_bounds(&[0.0, 0.0], &[0.0, 1.0]);
        assert_eq!(s.solve(100), LpOutcome::Optimal);
        assert!((s.objective() + 1.0).abs() < 1e-9);
        s.set_bounds(&[0.0, 0.0], &[1.0, 1.0]);
        assert_eq!(s.solve(100), LpOutcome::Optimal);
        assert!((s.objective() + 1.5).abs() < 1e-9);
    }
}
