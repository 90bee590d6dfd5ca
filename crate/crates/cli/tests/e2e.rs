use std::io::{BufRead, BufReader};
use std::path::{Path, PathBuf};
use std::process::{Command, Output, Stdio};

use ssoa_core::api::{ErrorDocument, SolveResponse};
use ssoa_core::exact::brute_force;
use ssoa_core::load_instance;
use ssoa_core::milp::{import_model, ExportFormat, ModelKind};
use ssoa_core::session::{AllocationView, SessionSummary, WhatIfRecord};

const SHAPE: &str = "3,2,2,1,1,1";

fn ssoa(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ssoa"))
        .args(args)
        .env_remove("SSOA_SERVER")
        .env_remove("SSOA_DATA_DIR")
        .output()
        .expect("binary runs")
}

fn ok(args: &[&str]) -> String {
    let out = ssoa(args);
    assert!(
        out.status.success(),
        "ssoa {args:?} failed\nstdout: {}\nstderr: {}",
        String::from_utf8_lossy(&out.stdout),
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

fn error_doc(out: &Output) -> ErrorDocument {
    serde_json::from_slice(&out.stderr)
        .unwrap_or_else(|e| panic!("stderr is not an error document ({e}): {}", String::from_utf8_lossy(&out.stderr)))
}

fn read<T: serde::de::DeserializeOwned>(p: &Path) -> T {
    serde_json::from_str(&std::fs::read_to_string(p).unwrap()).unwrap()
}

struct Fixture {
    dir: tempfile::TempDir,
}

impl Fixture {
    fn new(seed: u64, mode: &str) -> Fixture {
        let dir = tempfile::tempdir().unwrap();
        let f = Fixture { dir };
        ok(&[
            "gen",
            "--shape",
            SHAPE,
            "--seed",
            &seed.to_string(),
            "--mode",
            mode,
            "--out",
            f.s("inst.json"),
        ]);
        std::fs::write(f.path("ga.json"), r#"{"population": 20, "generations": 25}"#).unwrap();
        std::fs::write(f.path("pso.json"), r#"{"swarm": 15, "iterations": 25}"#).unwrap();
        std::fs::write(f.path("aco.json"), r#"{"ants": 10, "iterations": 15}"#).unwrap();
        f
    }

    fn path(&self, name: &str) -> PathBuf {
        self.dir.path().join(name)
    }

    /// Leaks a `&str` path; fine for short-lived tests.
    fn s(&self, name: &str) -> &'static str {
        Box::leak(self.path(name).to_str().unwrap().to_string().into_boxed_str())
    }
}

#[test]
fn generated_instances_validate() {
    let f = Fixture::new(1, "dual");
    assert_eq!(ok(&["validate", "-i", f.s("inst.json")]).trim(), "valid");
    // stdout variant carries the same document
    let doc = ok(&["gen", "--shape", SHAPE, "--seed", "1", "--mode", "dual"]);
    assert_eq!(
        serde_json::from_str::<serde_json::Value>(&doc).unwrap(),
        read::<serde_json::Value>(&f.path("inst.json"))
    );
}

#[test]
fn invalid_instances_fail_with_violations() {
    let f = Fixture::new(2, "single");
    let mut doc: serde_json::Value = read(&f.path("inst.json"));
    doc["machining_unit_cost"]["PB0"][0] = serde_json::json!(-5.0);
    std::fs::write(f.path("bad.json"), doc.to_string()).unwrap();
    let out = ssoa(&["validate", "-i", f.s("bad.json")]);
    assert_eq!(out.status.code(), Some(1));
    let err = error_doc(&out);
    assert_eq!(err.error, "invalid_instance");
    assert!(!err.violations.is_empty());

    let out = ssoa(&["solve", "-i", f.s("bad.json")]);
    assert_eq!(out.status.code(), Some(1));
    assert_eq!(error_doc(&out).error, "invalid_instance");
}

#[test]
fn usage_errors_exit_2() {
    let out = ssoa(&["solve", "--no-such-flag"]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("Usage:"), "{err}");
    assert_eq!(ssoa(&["solve", "-i", "x.json", "--solver", "simplex"]).status.code(), Some(2));
}

#[test]
fn missing_files_are_reported() {
    let out = ssoa(&["count", "-i", "/nonexistent/inst.json"]);
    assert_eq!(out.status.code(), Some(1));
    assert_eq!(error_doc(&out).error, "io_error");
}

#[test]
fn solve_matches_the_enumeration_oracle() {
    for (seed, mode) in [(3, "single"), (4, "dual")] {
        let f = Fixture::new(seed, mode);
        let inst = load_instance(&std::fs::read_to_string(f.path("inst.json")).unwrap()).unwrap();
        for (model, kind) in [("machinist", ModelKind::Machinist), ("integrated", ModelKind::IntegratedLinearized)] {
            for solver in ["bb", "brute"] {
                let stdout = ok(&[
                    "solve", "-i", f.s("inst.json"), "--model", model, "--solver", solver, "--out", f.s("r.json"),
                ]);
                assert!(stdout.contains("Optimal"), "{stdout}");
                let r: SolveResponse = read(&f.path("r.json"));
                let oracle = brute_force(&inst, kind, inst.mode(), None).unwrap();
                let (a, b) = (r.report.objective.unwrap(), oracle.objective.unwrap());
                assert!((a - b).abs() <= 1e-6 * b.abs().max(1.0), "{model}/{solver}: {a} vs {b}");
            }
        }
    }
}

#[test]
fn model_commands() {
    let f = Fixture::new(5, "dual");
    let inst = load_instance(&std::fs::read_to_string(f.path("inst.json")).unwrap()).unwrap();
    let count = ok(&["count", "-i", f.s("inst.json"), "--model", "machinist"]);
    let expect = ssoa_core::milp::count_variables(&inst, ModelKind::Machinist, inst.mode());
    assert!(count.contains(&format!("total {}", expect.total)), "{count}");

    for (fmt, ext) in [("lp", ExportFormat::Lp), ("mps", ExportFormat::Mps)] {
        for model in ["machinist", "forger", "integrated"] {
            let out = f.s("model.txt");
            ok(&["build", "-i", f.s("inst.json"), "--model", model, "--export", fmt, "--out", out]);
            let parsed = import_model(&std::fs::read_to_string(out).unwrap(), ext).unwrap();
            assert!(!parsed.variables.is_empty(), "{model} {fmt}");
        }
    }
    // `export` is an alias that prints to stdout
    assert!(ok(&["export", "-i", f.s("inst.json"), "--model", "machinist"]).contains("Minimize"));

    let stdout = ok(&["two-phase", "-i", f.s("inst.json"), "--out", f.s("tp.json")]);
    assert!(stdout.contains("machinist") && stdout.contains("total"), "{stdout}");
    let tp: serde_json::Value = read(&f.path("tp.json"));
    assert!(tp["combined"]["total"].as_f64().unwrap() > 0.0);
}

#[test]
fn heuristic_commands() {
    let f = Fixture::new(6, "single");
    for algo in ["ga", "pso", "aco"] {
        let params = f.s(&format!("{algo}.json"));
        let trace = f.s("trace.csv");
        ok(&[
            "heur", "-i", f.s("inst.json"), "--algo", algo, "--params", params, "--seed", "7", "--trace-out", trace,
            "--out", f.s("h1.json"),
        ]);
        let csv = std::fs::read_to_string(trace).unwrap();
        assert!(csv.starts_with("iter,best,relative"), "{csv}");
        assert!(csv.lines().count() > 1);
        ok(&["heur", "-i", f.s("inst.json"), "--algo", algo, "--params", params, "--seed", "7", "--out", f.s("h2.json")]);
        let (a, b): (serde_json::Value, serde_json::Value) = (read(&f.path("h1.json")), read(&f.path("h2.json")));
        assert_eq!(a["report"]["objective"], b["report"]["objective"], "{algo} is seeded");
        assert_eq!(a["trace"], b["trace"]);

        ok(&[
            "solve", "-i", f.s("inst.json"), "--solver", algo, "--params", params, "--trace-out", f.s("inc.csv"),
        ]);
        assert!(std::fs::read_to_string(f.path("inc.csv")).unwrap().starts_with("time,incumbent"));
    }

    let stdout = ok(&[
        "tune", "-i", f.s("inst.json"), "--algo", "ga", "--params", f.s("ga.json"), "--trials", "3", "--seeds", "2",
        "--out", f.s("tune.json"),
    ]);
    assert!(stdout.contains("best"), "{stdout}");
    let t: serde_json::Value = read(&f.path("tune.json"));
    assert_eq!(t["leaderboard"].as_array().unwrap().len(), 3);
}

#[test]
fn analysis_commands() {
    let f = Fixture::new(7, "dual");
    ok(&[
        "sweep", "-i", f.s("inst.json"), "--axis", "sourcing", "--ratios", "60:40,100:0", "--out", f.s("s.csv"),
        "--json-out", f.s("s.json"),
    ]);
    let csv = std::fs::read_to_string(f.path("s.csv")).unwrap();
    assert_eq!(csv.lines().count(), 3, "{csv}");
    assert!(csv.starts_with("axis,label,value,status,total_cost"));

    let stdout = ok(&["sweep", "-i", f.s("inst.json"), "--axis", "factor", "--supplier", "1", "--values", "1,2,8"]);
    assert_eq!(stdout.lines().count(), 4, "{stdout}");
    let out = ssoa(&["sweep", "-i", f.s("inst.json"), "--axis", "threshold"]);
    assert_eq!(out.status.code(), Some(1));
    assert_eq!(error_doc(&out).error, "invalid_input");

    std::fs::write(
        f.path("cmp.json"),
        r#"{"ga": {"population": 20, "generations": 25}, "pso": {"swarm": 15, "iterations": 25}, "aco": {"ants": 10, "iterations": 15}}"#,
    )
    .unwrap();
    ok(&[
        "compare", "-i", f.s("inst.json"), "--params", f.s("cmp.json"), "--seeds", "0,1", "--out", f.s("c.csv"),
    ]);
    let csv = std::fs::read_to_string(f.path("c.csv")).unwrap();
    assert_eq!(csv.lines().count(), 1 + 2 * 4, "{csv}");
    // the exact solver is the reference on every model kind
    for line in csv.lines().filter(|l| l.contains("branch_and_bound")) {
        assert!(line.contains(",1.00000,"), "{line}");
    }
}

#[test]
fn session_commands_share_a_data_dir() {
    let f = Fixture::new(8, "single");
    let data = f.s("data");
    let s = |args: &[&str]| {
        let mut all = vec!["--data-dir", data, "session"];
        all.extend_from_slice(args);
        ok(&all)
    };
    let id = s(&["create", "-i", f.s("inst.json")]).trim().to_string();
    assert_eq!(s(&["list"]).trim(), id);

    assert_eq!(s(&["submit", &id]).trim(), "1");
    let stdout = s(&["solve", &id, "1", "--out", f.s("a1.json")]);
    assert!(stdout.contains("Optimal"), "{stdout}");
    let view: AllocationView = read(&f.path("a1.json"));
    assert_eq!(view.round, 1);
    s(&["allocation", &id, "1", "--out", f.s("a1b.json")]);
    assert_eq!(read::<AllocationView>(&f.path("a1b.json")), view);

    // forbidding an unused pair leaves the optimum unchanged
    let used = view.report.allocation.as_ref().unwrap().tier1[0];
    let other = (used + 1) % 3;
    std::fs::write(
        f.path("mut.json"),
        format!(r#"{{"type": "forbid_assignment", "item": "PB0", "tier1": {other}}}"#),
    )
    .unwrap();
    s(&["whatif", &id, "--round", "1", "--mutation", f.s("mut.json"), "--out", f.s("w.json")]);
    let w: WhatIfRecord = read(&f.path("w.json"));
    assert!(w.delta.unwrap().abs() < 1e-6, "{w:?}");

    assert_eq!(s(&["submit", &id]).trim(), "2");
    s(&["skip", &id, "2"]);
    assert_eq!(s(&["submit", &id]).trim(), "3");
    s(&["solve", &id, "3", "--solver", "ga", "--params", f.s("ga.json")]);
    // a job outlives only a running server, never an embedded one
    let out = ssoa(&["--data-dir", data, "session", "solve", &id, "3", "--no-wait"]);
    assert_eq!(out.status.code(), Some(1));
    assert_eq!(error_doc(&out).error, "invalid_input");
    s(&["summary", &id, "--out", f.s("sum.json")]);
    let summary: SessionSummary = read(&f.path("sum.json"));
    assert_eq!(summary.rounds.len(), 3);
    assert_eq!(summary.what_ifs.len(), 1);

    let closed = s(&["close", &id]);
    assert!(closed.contains("(closed)"), "{closed}");
    let out = ssoa(&["--data-dir", data, "session", "submit", &id]);
    assert_eq!(out.status.code(), Some(1));
    assert_eq!(error_doc(&out).error, "session_closed");
}

#[test]
fn serve_and_connect() {
    let f = Fixture::new(9, "single");
    let mut child = Command::new(env!("CARGO_BIN_EXE_ssoa"))
        .args(["--data-dir", f.s("srv"), "serve", "--port", "0"])
        .env("RUST_LOG", "warn")
        .stderr(Stdio::piped())
        .stdout(Stdio::null())
        .spawn()
        .unwrap();
    let mut line = String::new();
    BufReader::new(child.stderr.take().unwrap()).read_line(&mut line).unwrap();
    let url = line
        .split_whitespace()
        .find(|w| w.starts_with("http://"))
        .unwrap_or_else(|| panic!("no address in {line:?}"))
        .to_string();

    let count = ok(&["--server", &url, "count", "-i", f.s("inst.json"), "--model", "machinist"]);
    assert!(count.contains("total 9"), "{count}");
    let id = ok(&["--server", &url, "session", "create", "-i", f.s("inst.json")]);
    assert_eq!(ok(&["--server", &url, "session", "list"]), id);
    let id = id.trim();
    assert_eq!(ok(&["--server", &url, "session", "submit", id]).trim(), "1");
    let job = ok(&["--server", &url, "session", "solve", id, "1", "--no-wait"]).trim().to_string();
    let done = loop {
        let status: serde_json::Value = serde_json::from_str(&ok(&["--server", &url, "session", "job", id, &job])).unwrap();
        if status["state"] != "running" {
            break status;
        }
        std::thread::sleep(std::time::Duration::from_millis(50));
    };
    assert_eq!(done["state"], "done", "{done}");
    let out = ssoa(&["--server", &url, "session", "summary", "nope"]);
    assert_eq!(out.status.code(), Some(1));
    assert_eq!(error_doc(&out).error, "not_found");
    child.kill().unwrap();
    child.wait().unwrap();

    // the session survives in the data directory
    assert_eq!(ok(&["--data-dir", f.s("srv"), "session", "list"]).trim(), id);
}
