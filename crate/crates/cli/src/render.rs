//! Plain-text tables for the terminal.

use std::fmt::Write;

use ssoa_core::analysis::{ComparisonTable, SweepResult};
use ssoa_core::costs::AllocationTable;
use ssoa_core::exact::{SolveReport, TwoPhaseReport};
use ssoa_core::heuristics::TuneResult;
use ssoa_core::milp::VariableCount;
use ssoa_core::session::{SessionSummary, WhatIfRecord};
use ssoa_core::CostBreakdown;

fn opt(v: Option<f64>) -> String {
    v.map(|x| format!("{x:.2}")).unwrap_or_else(|| "-".into())
}

/// Left-aligned columns padded to the widest cell.
pub fn table(header: &[&str], rows: &[Vec<String>]) -> String {
    let mut width: Vec<usize> = header.iter().map(|h| h.len()).collect();
    for r in rows {
        for (w, c) in width.iter_mut().zip(r) {
            *w = (*w).max(c.len());
        }
    }
    let mut out = String::new();
    let mut line = |cells: Vec<&str>| {
        let s: Vec<String> = cells.iter().zip(&width).map(|(c, w)| format!("{c:<w$}")).collect();
        writeln!(out, "{}", s.join("  ").trim_end()).unwrap();
    };
    line(header.to_vec());
    for r in rows {
        line(r.iter().map(String::as_str).collect());
    }
    out
}

pub fn report(r: &SolveReport) -> String {
    let mut out = format!(
        "model      {}\nsolver     {}\nstatus     {:?}\nobjective  {}\n",
        r.model,
        r.solver,
        r.status,
        opt(r.objective)
    );
    if let Some(g) = r.relative_gap {
        writeln!(out, "gap        {g:.2e}").unwrap();
    }
    writeln!(out, "time       {:.3}s  nodes {}  iterations {}", r.wall_time, r.nodes, r.iterations).unwrap();
    if !r.certificate.is_empty() {
        writeln!(out, "infeasible rows: {}", r.certificate.join(", ")).unwrap();
    }
    out
}

pub fn breakdown(b: &CostBreakdown) -> String {
    let mut out = format!(
        "machining  blue {:.2}  llv {:.2}\nforging    blue {:.2}  llv {:.2}\ntotal      {:.2}\n",
        b.machining_blue, b.machining_llv, b.forging_blue, b.forging_llv, b.total
    );
    let penalized: Vec<String> = b
        .penalty_flags
        .iter()
        .enumerate()
        .filter(|(_, &f)| f)
        .map(|(i, _)| i.to_string())
        .collect();
    if !penalized.is_empty() {
        writeln!(out, "penalized forgers: {}", penalized.join(", ")).unwrap();
    }
    if !b.cannot_make_selections.is_empty() {
        writeln!(out, "cannot-make selections: {}", b.cannot_make_selections.join(", ")).unwrap();
    }
    out
}

pub fn allocation(t: &AllocationTable) -> String {
    let rows: Vec<Vec<String>> = t
        .tier1
        .iter()
        .map(|r| {
            vec![
                r.item.to_string(),
                r.proportion.to_string(),
                r.supplier.to_string(),
                format!("{:.2}", r.quantity),
                format!("{:.2}", r.cost),
            ]
        })
        .collect();
    let mut out = table(&["part", "share", "machinist", "quantity", "cost"], &rows);
    if !t.tier2.is_empty() {
        let rows: Vec<Vec<String>> = t
            .tier2
            .iter()
            .map(|r| {
                vec![
                    r.item.to_string(),
                    r.tier1.to_string(),
                    r.proportion.to_string(),
                    r.supplier.to_string(),
                    r.level.number().to_string(),
                    format!("{:.2}", r.quantity),
                    format!("{:.2}", r.cost),
                ]
            })
            .collect();
        out.push('\n');
        out.push_str(&table(
            &["forging", "machinist", "share", "forger", "level", "quantity", "cost"],
            &rows,
        ));
    }
    out
}

pub fn count(c: &VariableCount) -> String {
    format!(
        "x {}\ny_blue {}\ny_llv {}\nv {}\nu {}\ntotal {}\nga_genes {}\n",
        c.x, c.y_blue, c.y_llv, c.v, c.u, c.total, c.ga_genes
    )
}

pub fn two_phase(r: &TwoPhaseReport) -> String {
    let mut out = format!(
        "machinist  {:?} {}\n",
        r.machinist.status,
        opt(r.machinist.objective)
    );
    match &r.forger {
        Some(f) => writeln!(out, "forger     {:?} {}", f.status, opt(f.objective)).unwrap(),
        None => writeln!(out, "forger     not run").unwrap(),
    }
    if let Some(b) = &r.combined {
        writeln!(out, "total      {:.2}", b.total).unwrap();
    }
    out
}

pub fn sweep(s: &SweepResult) -> String {
    let rows: Vec<Vec<String>> = s
        .points
        .iter()
        .map(|p| {
            vec![
                p.label.clone(),
                p.status.map(|s| format!("{s:?}")).unwrap_or_else(|| "-".into()),
                opt(p.total_cost),
                p.penalized_suppliers.to_string(),
                p.designated_penalized.map(|b| b.to_string()).unwrap_or_else(|| "-".into()),
                p.error.clone().unwrap_or_default(),
            ]
        })
        .collect();
    table(&[s.axis.as_str(), "status", "cost", "penalized", "designated", "error"], &rows)
}

pub fn comparison(c: &ComparisonTable) -> String {
    let rows: Vec<Vec<String>> = c
        .rows
        .iter()
        .map(|r| {
            vec![
                r.kind.to_string(),
                r.solver.clone(),
                format!("{:.3}", r.time),
                opt(r.cost),
                r.cost_over_best.map(|x| format!("{x:.5}")).unwrap_or_else(|| "-".into()),
                r.error.clone().unwrap_or_default(),
            ]
        })
        .collect();
    table(&["model", "solver", "time_s", "cost", "vs_best", "error"], &rows)
}

pub fn tune(t: &TuneResult) -> String {
    let rows: Vec<Vec<String>> = t
        .leaderboard
        .iter()
        .enumerate()
        .map(|(i, r)| {
            vec![
                i.to_string(),
                if r.mean_cost.is_finite() { format!("{:.2}", r.mean_cost) } else { "-".into() },
                serde_json::to_string(&r.params).unwrap_or_default(),
            ]
        })
        .collect();
    let mut out = table(&["trial", "mean_cost", "params"], &rows);
    writeln!(out, "\nbest {}", serde_json::to_string(&t.best).unwrap_or_default()).unwrap();
    out
}

pub fn summary(s: &SessionSummary) -> String {
    let mut out = format!("session {}{}\n", s.id, if s.closed { " (closed)" } else { "" });
    let rows: Vec<Vec<String>> = s
        .rounds
        .iter()
        .map(|r| {
            vec![
                r.number.to_string(),
                format!("{:?}", r.state).to_lowercase(),
                r.overrides.to_string(),
                r.status.map(|s| format!("{s:?}")).unwrap_or_else(|| "-".into()),
                opt(r.objective),
            ]
        })
        .collect();
    out.push_str(&table(&["round", "state", "overrides", "status", "objective"], &rows));
    if !s.what_ifs.is_empty() {
        out.push('\n');
        for w in &s.what_ifs {
            out.push_str(&what_if(w));
        }
    }
    out
}

pub fn what_if(w: &WhatIfRecord) -> String {
    format!(
        "what-if on round {}: {}  baseline {}  scenario {}  delta {}\n",
        w.scenario.base_round,
        serde_json::to_string(&w.scenario.mutation).unwrap_or_default(),
        opt(w.baseline_cost),
        opt(w.scenario_cost),
        opt(w.delta)
    )
}
