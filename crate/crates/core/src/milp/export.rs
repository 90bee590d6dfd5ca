//! CPLEX LP and free-format MPS writers, plus readers for the subset the
//! writers emit.
//!
//! LP grammar subset: whitespace separates every token, each row starts
//! with `label:`, the objective constant is a bare numeric term, binaries
//! are listed in a `Binaries` section and continuous bounds in `Bounds`.
//! MPS: free format, integer columns between `INTORG`/`INTEND` markers with
//! `BV` bounds, and the objective constant stored as the negated RHS of the
//! objective row.

use std::collections::HashMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::model::{Constraint, Integrality, LinearModel, Relation, Variable};
use super::ModelError;

/// Longest row or column name either format accepts.
pub const MAX_NAME_LEN: usize = 255;

const LP_LINE_WIDTH: usize = 200;
const OBJ_ROW: &str = "obj";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ExportFormat {
    Lp,
    Mps,
}

impl std::str::FromStr for ExportFormat {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s.to_ascii_lowercase().as_str() {
            "lp" => Ok(ExportFormat::Lp),
            "mps" => Ok(ExportFormat::Mps),
            other => Err(format!("unknown export format `{other}`")),
        }
    }
}

/// Model data as read back from a document: no metadata, no tags.
#[derive(Clone, Debug, PartialEq)]
pub struct ParsedModel {
    pub variables: Vec<Variable>,
    pub objective: Vec<(usize, f64)>,
    pub objective_constant: f64,
    pub constraints: Vec<Constraint>,
}

impl ParsedModel {
    pub fn from_model(m: &LinearModel) -> Self {
        ParsedModel {
            variables: m.variables.clone(),
            objective: m.objective.clone(),
            objective_constant: m.objective_constant,
            constraints: m.constraints.clone(),
        }
    }

    /// Compares two models by names, with coefficients equal to within
    /// `tol` (relative to magnitude, absolute below 1). Returns the first
    /// difference found.
    pub fn compare(&self, other: &ParsedModel, tol: f64) -> Result<(), String> {
        let close = |a: f64, b: f64| {
            (a == b) || (a - b).abs() <= tol * a.abs().max(b.abs()).max(1.0)
        };
        let vars = |m: &ParsedModel| -> HashMap<String, (f64, f64, Integrality)> {
            m.variables
                .iter()
                .map(|v| (v.name.clone(), (v.lower, v.upper, v.integrality)))
                .collect()
        };
        let (va, vb) = (vars(self), vars(other));
        if va.len() != vb.len() {
            return Err(format!("{} variables vs {}", va.len(), vb.len()));
        }
        for (name, a) in &va {
            let b = vb.get(name).ok_or_else(|| format!("variable `{name}` missing"))?;
            if a.2 != b.2 || !close(a.0, b.0) || !close(a.1, b.1) {
                return Err(format!("variable `{name}`: {a:?} vs {b:?}"));
            }
        }
        let terms = |m: &ParsedModel, row: &[(usize, f64)]| -> HashMap<String, f64> {
            let mut out = HashMap::new();
            for &(j, a) in row {
                *out.entry(m.variables[j].name.clone()).or_insert(0.0) += a;
            }
            out.retain(|_, a| *a != 0.0);
            out
        };
        let same_terms = |what: &str, a: HashMap<String, f64>, b: HashMap<String, f64>| {
            if a.len() != b.len() {
                return Err(format!("{what}: {} terms vs {}", a.len(), b.len()));
            }
            for (n, x) in &a {
                match b.get(n) {
                    Some(y) if close(*x, *y) => {}
                    other => return Err(format!("{what}: `{n}` {x} vs {other:?}")),
                }
            }
            Ok(())
        };
        same_terms(
            "objective",
            terms(self, &self.objective),
            terms(other, &other.objective),
        )?;
        if !close(self.objective_constant, other.objective_constant) {
            return Err(format!(
                "objective constant {} vs {}",
                self.objective_constant, other.objective_constant
            ));
        }
        let rows_b: HashMap<&str, &Constraint> = other
            .constraints
            .iter()
            .map(|c| (c.label.as_str(), c))
            .collect();
        if rows_b.len() != self.constraints.len() {
            return Err(format!(
                "{} rows vs {}",
                self.constraints.len(),
                other.constraints.len()
            ));
        }
        for c in &self.constraints {
            let d = rows_b
                .get(c.label.as_str())
                .ok_or_else(|| format!("row `{}` missing", c.label))?;
            if c.relation != d.relation || !close(c.rhs, d.rhs) {
                return Err(format!("row `{}` sense or rhs differs", c.label));
            }
            same_terms(&c.label, terms(self, &c.row), terms(other, &d.row))?;
        }
        Ok(())
    }
}

fn check_name(name: &str) -> Result<(), ModelError> {
    if name.is_empty() || name.len() > MAX_NAME_LEN {
        return Err(ModelError::Export(format!(
            "name `{name}` must have 1..={MAX_NAME_LEN} characters"
        )));
    }
    if name.chars().any(|c| c.is_whitespace() || c == ':') {
        return Err(ModelError::Export(format!("name `{name}` has a reserved character")));
    }
    Ok(())
}

fn check_number(what: &str, x: f64) -> Result<(), ModelError> {
    if !x.is_finite() {
        return Err(ModelError::Export(format!("non-finite coefficient {x} in {what}")));
    }
    Ok(())
}

fn check_exportable(model: &LinearModel) -> Result<(), ModelError> {
    for v in &model.variables {
        check_name(&v.name)?;
    }
    for c in &model.constraints {
        check_name(&c.label)?;
        check_number(&c.label, c.rhs)?;
        for &(_, a) in &c.row {
            check_number(&c.label, a)?;
        }
    }
    for &(_, a) in &model.objective {
        check_number("objective", a)?;
    }
    check_number("objective constant", model.objective_constant)?;
    model.validate()
}

/// Writes `model` in `format`. Output is a pure function of the model.
pub fn export_model(model: &LinearModel, format: ExportFormat) -> Result<String, ModelError> {
    check_exportable(model)?;
    Ok(match format {
        ExportFormat::Lp => write_lp(model),
        ExportFormat::Mps => write_mps(model),
    })
}

fn fmt_bound(x: f64) -> String {
    if x == f64::INFINITY {
        "+inf".into()
    } else if x == f64::NEG_INFINITY {
        "-inf".into()
    } else {
        x.to_string()
    }
}

struct LineWriter {
    out: String,
    line: String,
}

impl LineWriter {
    fn token(&mut self, t: &str) {
        if self.line.len() + t.len() + 1 > LP_LINE_WIDTH && !self.line.trim().is_empty() {
            self.out.push_str(self.line.trim_end());
            self.out.push('\n');
            self.line = String::from("  ");
        }
        self.line.push(' ');
        self.line.push_str(t);
    }

    fn terms(&mut self, model: &LinearModel, row: &[(usize, f64)]) {
        for (n, &(j, a)) in row.iter().enumerate() {
            if a < 0.0 {
                self.token("-");
            } else if n > 0 {
                self.token("+");
            }
            self.token(&a.abs().to_string());
            self.token(&model.variables[j].name);
        }
    }

    fn end_line(&mut self) {
        self.out.push_str(self.line.trim_end());
        self.out.push('\n');
        self.line.clear();
    }
}

fn write_lp(model: &LinearModel) -> String {
    let mut w = LineWriter {
        out: String::new(),
        line: String::new(),
    };
    let _ = writeln!(
        w.out,
        "\\ {} model, {} variables, {} rows",
        model.metadata.kind,
        model.variables.len(),
        model.constraints.len()
    );
    w.out.push_str("Minimize\n");
    w.line.push_str(" obj:");
    w.terms(model, &model.objective);
    let k = model.objective_constant;
    if k != 0.0 || model.objective.is_empty() {
        if k < 0.0 {
            w.token("-");
        } else if !model.objective.is_empty() {
            w.token("+");
        }
        w.token(&k.abs().to_string());
    }
    w.end_line();
    w.out.push_str("Subject To\n");
    for c in &model.constraints {
        w.line.push(' ');
        w.line.push_str(&c.label);
        w.line.push(':');
        if c.row.is_empty() {
            w.token("0");
            w.token(&model.variables[0].name);
        } else {
            w.terms(model, &c.row);
        }
        w.token(match c.relation {
            Relation::Le => "<=",
            Relation::Eq => "=",
            Relation::Ge => ">=",
        });
        w.token(&c.rhs.to_string());
        w.end_line();
    }
    let continuous: Vec<&Variable> = model
        .variables
        .iter()
        .filter(|v| v.integrality == Integrality::Continuous)
        .collect();
    if !continuous.is_empty() {
        w.out.push_str("Bounds\n");
        for v in continuous {
            if v.lower == f64::NEG_INFINITY && v.upper == f64::INFINITY {
                let _ = writeln!(w.out, " {} free", v.name);
            } else {
                let _ = writeln!(
                    w.out,
                    " {} <= {} <= {}",
                    fmt_bound(v.lower),
                    v.name,
                    fmt_bound(v.upper)
                );
            }
        }
    }
    let binaries: Vec<&str> = model
        .variables
        .iter()
        .filter(|v| v.integrality == Integrality::Binary)
        .map(|v| v.name.as_str())
        .collect();
    if !binaries.is_empty() {
        w.out.push_str("Binaries\n");
        for name in binaries {
            w.token(name);
        }
        w.end_line();
    }
    w.out.push_str("End\n");
    w.out
}

fn write_mps(model: &LinearModel) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "NAME {}", model.metadata.kind.name());
    out.push_str("ROWS\n");
    let _ = writeln!(out, " N {OBJ_ROW}");
    for c in &model.constraints {
        let sense = match c.relation {
            Relation::Le => "L",
            Relation::Eq => "E",
            Relation::Ge => "G",
        };
        let _ = writeln!(out, " {sense} {}", c.label);
    }
    let n = model.variables.len();
    let mut cols: Vec<Vec<(usize, f64)>> = vec![Vec::new(); n];
    for &(j, a) in &model.objective {
        cols[j].push((0, a));
    }
    for (r, c) in model.constraints.iter().enumerate() {
        for &(j, a) in &c.row {
            cols[j].push((r + 1, a));
        }
    }
    out.push_str("COLUMNS\n");
    let mut in_int = false;
    let mut marker = 0;
    for (j, v) in model.variables.iter().enumerate() {
        let is_int = v.integrality == Integrality::Binary;
        if is_int != in_int {
            let tag = if is_int { "INTORG" } else { "INTEND" };
            let _ = writeln!(out, "    M{marker} 'MARKER' '{tag}'");
            marker += 1;
            in_int = is_int;
        }
        if cols[j].is_empty() {
            let _ = writeln!(out, "    {} {OBJ_ROW} 0", v.name);
        }
        for &(r, a) in &cols[j] {
            let row = if r == 0 {
                OBJ_ROW
            } else {
                model.constraints[r - 1].label.as_str()
            };
            let _ = writeln!(out, "    {} {row} {a}", v.name);
        }
    }
    if in_int {
        let _ = writeln!(out, "    M{marker} 'MARKER' 'INTEND'");
    }
    out.push_str("RHS\n");
    if model.objective_constant != 0.0 {
        let _ = writeln!(out, "    RHS {OBJ_ROW} {}", -model.objective_constant);
    }
    for c in &model.constraints {
        if c.rhs != 0.0 {
            let _ = writeln!(out, "    RHS {} {}", c.label, c.rhs);
        }
    }
    out.push_str("BOUNDS\n");
    for v in &model.variables {
        match v.integrality {
            Integrality::Binary => {
                let _ = writeln!(out, " BV BND {}", v.name);
            }
            Integrality::Continuous => {
                if v.lower == f64::NEG_INFINITY && v.upper == f64::INFINITY {
                    let _ = writeln!(out, " FR BND {}", v.name);
                    continue;
                }
                if v.lower == f64::NEG_INFINITY {
                    let _ = writeln!(out, " MI BND {}", v.name);
                } else if v.lower != 0.0 {
                    let _ = writeln!(out, " LO BND {} {}", v.name, v.lower);
                }
                if v.upper != f64::INFINITY {
                    let _ = writeln!(out, " UP BND {} {}", v.name, v.upper);
                }
            }
        }
    }
    out.push_str("ENDATA\n");
    out
}

fn parse_err(line: usize, message: impl Into<String>) -> ModelError {
    ModelError::Parse {
        line,
        message: message.into(),
    }
}

fn parse_num(tok: &str, line: usize) -> Result<f64, ModelError> {
    match tok {
        "+inf" | "inf" | "+infinity" | "infinity" => Ok(f64::INFINITY),
        "-inf" | "-infinity" => Ok(f64::NEG_INFINITY),
        _ => tok
            .parse::<f64>()
            .map_err(|_| parse_err(line, format!("expected a number, found `{tok}`"))),
    }
}

fn is_number(tok: &str) -> bool {
    tok.parse::<f64>().is_ok()
}

#[derive(Default)]
struct Names {
    index: HashMap<String, usize>,
    vars: Vec<Variable>,
}

impl Names {
    fn get(&mut self, name: &str) -> usize {
        if let Some(&j) = self.index.get(name) {
            return j;
        }
        let j = self.vars.len();
        self.index.insert(name.to_string(), j);
        self.vars.push(Variable {
            name: name.to_string(),
            lower: 0.0,
            upper: f64::INFINITY,
            integrality: Integrality::Continuous,
            tag: None,
        });
        j
    }
}

/// Parses `[sign] [coef] name | [sign] constant` terms.
fn parse_expr(
    toks: &[(usize, String)],
    names: &mut Names,
) -> Result<(Vec<(usize, f64)>, f64), ModelError> {
    let mut row = Vec::new();
    let mut constant = 0.0;
    let mut i = 0;
    while i < toks.len() {
        let mut sign = 1.0;
        while i < toks.len() && (toks[i].1 == "+" || toks[i].1 == "-") {
            if toks[i].1 == "-" {
                sign = -sign;
            }
            i += 1;
        }
        let Some((line, tok)) = toks.get(i) else {
            return Err(parse_err(toks.last().map_or(0, |t| t.0), "dangling sign"));
        };
        if is_number(tok) {
            let a = parse_num(tok, *line)?;
            match toks.get(i + 1) {
                Some((_, next)) if next != "+" && next != "-" && !is_number(next) => {
                    row.push((names.get(next), sign * a));
                    i += 2;
                }
                _ => {
                    constant += sign * a;
                    i += 1;
                }
            }
        } else {
            row.push((names.get(tok), sign));
            i += 1;
        }
    }
    Ok((row, constant))
}

#[derive(PartialEq, Clone, Copy)]
enum LpSection {
    Preamble,
    Objective,
    Rows,
    Bounds,
    Binaries,
    Generals,
    End,
}

fn lp_section(line: &str) -> Option<LpSection> {
    match line.trim().to_ascii_lowercase().as_str() {
        "minimize" | "minimise" | "min" => Some(LpSection::Objective),
        "subject to" | "such that" | "st" | "s.t." => Some(LpSection::Rows),
        "bounds" => Some(LpSection::Bounds),
        "binaries" | "binary" | "bin" => Some(LpSection::Binaries),
        "generals" | "general" | "gen" => Some(LpSection::Generals),
        "end" => Some(LpSection::End),
        _ => None,
    }
}

/// Reads the LP subset written by [`export_model`].
pub fn read_lp(text: &str) -> Result<ParsedModel, ModelError> {
    let mut section = LpSection::Preamble;
    let mut buckets: HashMap<u8, Vec<(usize, String)>> = HashMap::new();
    for (n, raw) in text.lines().enumerate() {
        let line_no = n + 1;
        let line = raw.split('\\').next().unwrap_or("");
        if line.trim().is_empty() {
            continue;
        }
        if let Some(s) = lp_section(line) {
            section = s;
            continue;
        }
        let key = match section {
            LpSection::Preamble => return Err(parse_err(line_no, "content before `Minimize`")),
            LpSection::End => return Err(parse_err(line_no, "content after `End`")),
            LpSection::Objective => 0,
            LpSection::Rows => 1,
            LpSection::Bounds => {
                // one bound per line
                buckets
                    .entry(2)
                    .or_default()
                    .push((line_no, line.trim().to_string()));
                continue;
            }
            LpSection::Binaries => 3,
            LpSection::Generals => 4,
        };
        let bucket = buckets.entry(key).or_default();
        for tok in line.split_whitespace() {
            bucket.push((line_no, tok.to_string()));
        }
    }
    if section != LpSection::End {
        return Err(parse_err(text.lines().count(), "missing `End`"));
    }

    let mut names = Names::default();
    let mut obj = buckets.remove(&0).unwrap_or_default();
    if obj.first().is_some_and(|t| t.1.ends_with(':')) {
        obj.remove(0);
    }
    let (objective, objective_constant) = parse_expr(&obj, &mut names)?;

    let mut constraints = Vec::new();
    let toks = buckets.remove(&1).unwrap_or_default();
    let mut i = 0;
    while i < toks.len() {
        let (line, head) = &toks[i];
        let label = head
            .strip_suffix(':')
            .ok_or_else(|| parse_err(*line, format!("expected `label:`, found `{head}`")))?
            .to_string();
        i += 1;
        let start = i;
        while i < toks.len() && !matches!(toks[i].1.as_str(), "<=" | ">=" | "=" | "=<" | "=>" | "<" | ">") {
            i += 1;
        }
        let Some((rline, rel)) = toks.get(i) else {
            return Err(parse_err(*line, format!("row `{label}` has no relation")));
        };
        let relation = match rel.as_str() {
            "<=" | "=<" | "<" => Relation::Le,
            ">=" | "=>" | ">" => Relation::Ge,
            _ => Relation::Eq,
        };
        let (row, k) = parse_expr(&toks[start..i], &mut names)?;
        let rhs_tok = toks
            .get(i + 1)
            .ok_or_else(|| parse_err(*rline, format!("row `{label}` has no right-hand side")))?;
        let rhs = parse_num(&rhs_tok.1, rhs_tok.0)? - k;
        i += 2;
        constraints.push(Constraint {
            label,
            row: row.into_iter().filter(|&(_, a)| a != 0.0).collect(),
            relation,
            rhs,
        });
    }

    for (line, text) in buckets.remove(&2).unwrap_or_default() {
        let t: Vec<&str> = text.split_whitespace().collect();
        match t.as_slice() {
            [name, free] if free.eq_ignore_ascii_case("free") => {
                let j = names.get(name);
                names.vars[j].lower = f64::NEG_INFINITY;
                names.vars[j].upper = f64::INFINITY;
            }
            [lo, "<=", name, "<=", up] => {
                let j = names.get(name);
                names.vars[j].lower = parse_num(lo, line)?;
                names.vars[j].upper = parse_num(up, line)?;
            }
            [name, op, b] if !is_number(name) => {
                let j = names.get(name);
                let b = parse_num(b, line)?;
                match *op {
                    "<=" => names.vars[j].upper = b,
                    ">=" => names.vars[j].lower = b,
                    "=" => {
                        names.vars[j].lower = b;
                        names.vars[j].upper = b;
                    }
                    _ => return Err(parse_err(line, format!("bad bound `{text}`"))),
                }
            }
            _ => return Err(parse_err(line, format!("bad bound `{text}`"))),
        }
    }
    for (_, name) in buckets.remove(&3).unwrap_or_default() {
        let j = names.get(&name);
        let v = &mut names.vars[j];
        v.integrality = Integrality::Binary;
        v.lower = 0.0;
        v.upper = 1.0;
    }
    if let Some((line, _)) = buckets.get(&4).and_then(|g| g.first()) {
        return Err(parse_err(*line, "general integers are not supported"));
    }
    Ok(ParsedModel {
        variables: names.vars,
        objective,
        objective_constant,
        constraints,
    })
}

/// Reads the free-MPS subset written by [`export_model`].
pub fn read_mps(text: &str) -> Result<ParsedModel, ModelError> {
    #[derive(PartialEq)]
    enum Sec {
        Head,
        Rows,
        Columns,
        Rhs,
        Bounds,
        Done,
    }
    let mut sec = Sec::Head;
    let mut obj_name: Option<String> = None;
    let mut row_index: HashMap<String, usize> = HashMap::new();
    let mut constraints: Vec<Constraint> = Vec::new();
    let mut names = Names::default();
    let mut objective = Vec::new();
    let mut objective_constant = 0.0;
    let mut in_int = false;

    for (n, raw) in text.lines().enumerate() {
        let line_no = n + 1;
        if raw.trim().is_empty() || raw.starts_with('*') {
            continue;
        }
        let t: Vec<&str> = raw.split_whitespace().collect();
        if !raw.starts_with(' ') && !raw.starts_with('\t') {
            sec = match t[0] {
                "NAME" => Sec::Head,
                "ROWS" => Sec::Rows,
                "COLUMNS" => Sec::Columns,
                "RHS" => Sec::Rhs,
                "BOUNDS" => Sec::Bounds,
                "ENDATA" => Sec::Done,
                other => return Err(parse_err(line_no, format!("unknown section `{other}`"))),
            };
            continue;
        }
        match sec {
            Sec::Head | Sec::Done => return Err(parse_err(line_no, "data outside a section")),
            Sec::Rows => {
                let [sense, name] = t.as_slice() else {
                    return Err(parse_err(line_no, "expected `sense name`"));
                };
                let relation = match *sense {
                    "N" => {
                        if obj_name.is_none() {
                            obj_name = Some(name.to_string());
                        }
                        continue;
                    }
                    "L" => Relation::Le,
                    "G" => Relation::Ge,
                    "E" => Relation::Eq,
                    other => return Err(parse_err(line_no, format!("unknown row sense `{other}`"))),
                };
                row_index.insert(name.to_string(), constraints.len());
                constraints.push(Constraint {
                    label: name.to_string(),
                    row: Vec::new(),
                    relation,
                    rhs: 0.0,
                });
            }
            Sec::Columns => {
                if t.len() == 3 && t[1] == "'MARKER'" {
                    in_int = match t[2] {
                        "'INTORG'" => true,
                        "'INTEND'" => false,
                        other => return Err(parse_err(line_no, format!("bad marker {other}"))),
                    };
                    continue;
                }
                if t.len() != 3 && t.len() != 5 {
                    return Err(parse_err(line_no, "expected `column row value [row value]`"));
                }
                let j = names.get(t[0]);
                if in_int {
                    names.vars[j].integrality = Integrality::Binary;
                }
                for pair in t[1..].chunks(2) {
                    let a = parse_num(pair[1], line_no)?;
                    if Some(pair[0]) == obj_name.as_deref() {
                        if a != 0.0 {
                            objective.push((j, a));
                        }
                    } else {
                        let r = *row_index
                            .get(pair[0])
                            .ok_or_else(|| parse_err(line_no, format!("unknown row `{}`", pair[0])))?;
                        constraints[r].row.push((j, a));
                    }
                }
            }
            Sec::Rhs => {
                if t.len() != 3 && t.len() != 5 {
                    return Err(parse_err(line_no, "expected `set row value [row value]`"));
                }
                for pair in t[1..].chunks(2) {
                    let b = parse_num(pair[1], line_no)?;
                    if Some(pair[0]) == obj_name.as_deref() {
                        objective_constant = -b;
                    } else {
                        let r = *row_index
                            .get(pair[0])
                            .ok_or_else(|| parse_err(line_no, format!("unknown row `{}`", pair[0])))?;
                        constraints[r].rhs = b;
                    }
                }
            }
            Sec::Bounds => {
                let (kind, name) = match t.as_slice() {
                    [kind, _set, name] | [kind, _set, name, _] => (*kind, *name),
                    _ => return Err(parse_err(line_no, "bad bound line")),
                };
                let j = *names
                    .index
                    .get(name)
                    .ok_or_else(|| parse_err(line_no, format!("unknown column `{name}`")))?;
                let value = || -> Result<f64, ModelError> {
                    t.get(3)
                        .ok_or_else(|| parse_err(line_no, "bound needs a value"))
                        .and_then(|v| parse_num(v, line_no))
                };
                let v = &mut names.vars[j];
                match kind {
                    "BV" => {
                        v.integrality = Integrality::Binary;
                        v.lower = 0.0;
                        v.upper = 1.0;
                    }
                    "LO" => v.lower = value()?,
                    "UP" => v.upper = value()?,
                    "FX" => {
                        let b = value()?;
                        v.lower = b;
                        v.upper = b;
                    }
                    "FR" => {
                        v.lower = f64::NEG_INFINITY;
                        v.upper = f64::INFINITY;
                    }
                    "MI" => v.lower = f64::NEG_INFINITY,
                    "PL" => v.upper = f64::INFINITY,
                    other => return Err(parse_err(line_no, format!("unknown bound type `{other}`"))),
                }
            }
        }
    }
    if sec != Sec::Done {
        return Err(parse_err(text.lines().count(), "missing ENDATA"));
    }
    Ok(ParsedModel {
        variables: names.vars,
        objective,
        objective_constant,
        constraints,
    })
}

/// Parses a document in `format`.
pub fn import_model(text: &str, format: ExportFormat) -> Result<ParsedModel, ModelError> {
    match format {
        ExportFormat::Lp => read_lp(text),
        ExportFormat::Mps => read_mps(text),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instance::SourcingMode;
    use crate::milp::{ModelKind, ModelMetadata};

    fn small() -> LinearModel {
        let mut m = LinearModel::new(ModelMetadata {
            kind: ModelKind::Machinist,
            mode: SourcingMode::Single,
            fingerprint: "test".into(),
            big_m: None,
            epsilon: 1e-3,
            variable_estimate: 3,
        });
        let a = m.add_binary("a".into(), None, 1.5);
        let b = m.add_binary("b".into(), None, -2.0);
        let c = m.add_binary("c".into(), None, 0.0);
        m.objective_constant = 12.25;
        m.add_row("r1".into(), vec![(a, 1.0), (b, 1.0), (c, 1.0)], Relation::Eq, 1.0);
        m.add_row("r2".into(), vec![(a, -3.0), (c, 1e-7)], Relation::Ge, -2.5);
        m
    }

    #[test]
    fn round_trip_both_formats() {
        let m = small();
        for f in [ExportFormat::Lp, ExportFormat::Mps] {
            let text = export_model(&m, f).unwrap();
            let back = import_model(&text, f).unwrap();
            ParsedModel::from_model(&m).compare(&back, 1e-9).unwrap();
            assert_eq!(text, export_model(&m, f).unwrap());
        }
    }

    #[test]
    fn objective_constant_conventions() {
        let m = small();
        let lp = export_model(&m, ExportFormat::Lp).unwrap();
        assert!(lp.contains("+ 12.25\n"), "{lp}");
        let mps = export_model(&m, ExportFormat::Mps).unwrap();
        assert!(mps.contains("RHS obj -12.25"), "{mps}");
    }

    #[test]
    fn bad_names_and_numbers_are_rejected() {
        let mut m = small();
        m.variables[0].name = "x".repeat(MAX_NAME_LEN + 1);
        assert!(matches!(export_model(&m, ExportFormat::Lp), Err(ModelError::Export(_))));
        let mut m = small();
        m.constraints[0].row[0].1 = f64::NAN;
        assert!(matches!(export_model(&m, ExportFormat::Mps), Err(ModelError::Export(_))));
    }

    #[test]
    fn long_rows_wrap() {
        let mut m = small();
        let row: Vec<(usize, f64)> = (0..200).map(|i| (i % 3, 1.0 + i as f64)).collect();
        m.add_row("wide".into(), row, Relation::Le, 1e6);
        let lp = export_model(&m, ExportFormat::Lp).unwrap();
        assert!(lp.lines().all(|l| l.len() <= LP_LINE_WIDTH));
        let back = read_lp(&lp).unwrap();
        ParsedModel::from_model(&m).compare(&back, 1e-9).unwrap();
    }

    #[test]
    fn truncated_documents_fail_with_a_line() {
        let lp = export_model(&small(), ExportFormat::Lp).unwrap();
        let cut = lp.replace("End\n", "");
        assert!(matches!(read_lp(&cut), Err(ModelError::Parse { .. })));
        let mps = export_model(&small(), ExportFormat::Mps).unwrap();
        let bad = mps.replace(" E r1", " Q r1");
        assert!(matches!(read_mps(&bad), Err(ModelError::Parse { line: 4, .. })));
    }
}
