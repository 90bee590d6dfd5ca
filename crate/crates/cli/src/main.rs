mod args;
mod render;

use std::net::SocketAddr;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::Parser;
use serde::de::DeserializeOwned;
use serde::Serialize;

use ssoa_client::{Client, ClientError, SolveOutcome};
use ssoa_core::analysis::PenaltyAxis;
use ssoa_core::api::{
    CompareRequest, CountRequest, CreateSessionRequest, ErrorDocument, ExportRequest, GenerateRequest,
    HeuristicRequest, InstanceInput, PenaltySweepRequest, SolveInstanceRequest, SolveOverrides, SolveRoundRequest,
    SourcingSweepRequest, TuneRequest, TwoPhaseRequest, WhatIfRequest,
};
use ssoa_core::costs::AllocationTable;
use ssoa_core::exact::SolveLimits;
use ssoa_core::heuristics::{AcoParams, Algorithm, GaParams, ParamSet, PsoParams, RunOptions, SearchRanges};
use ssoa_core::instance::InstanceDocument;
use ssoa_core::milp::ModelKind;
use ssoa_core::session::{Mutation, SessionSettings};
use ssoa_core::solver::{SolveRequest, SolverChoice};
use ssoa_core::{BidDelta, GeneratorConfig};

use args::*;

type Outcome<T> = Result<T, ErrorDocument>;

fn main() -> ExitCode {
    let cli = Cli::parse();
    let rt = match tokio::runtime::Runtime::new() {
        Ok(rt) => rt,
        Err(e) => return fail(ErrorDocument::new("runtime", e.to_string())),
    };
    match rt.block_on(run(cli)) {
        Ok(()) => ExitCode::SUCCESS,
        Err(doc) => fail(doc),
    }
}

fn fail(doc: ErrorDocument) -> ExitCode {
    eprintln!("{}", serde_json::to_string_pretty(&doc).expect("error documents serialize"));
    ExitCode::FAILURE
}

fn api(e: ClientError) -> ErrorDocument {
    match e {
        ClientError::Api { doc, .. } => doc,
        ClientError::Transport(e) => ErrorDocument::new("transport", e.to_string()),
        ClientError::Unexpected { status, body } => {
            ErrorDocument::new("unexpected_response", format!("{status}: {body}"))
        }
    }
}

fn io_err(path: &Path, e: std::io::Error) -> ErrorDocument {
    ErrorDocument::new("io_error", format!("{}: {e}", path.display()))
}

fn read_json<T: DeserializeOwned>(path: &Path) -> Outcome<T> {
    let text = std::fs::read_to_string(path).map_err(|e| io_err(path, e))?;
    serde_json::from_str(&text)
        .map_err(|e| ErrorDocument::new("invalid_input", format!("{}: {e}", path.display())))
}

fn write_text(path: &Path, text: &str) -> Outcome<()> {
    std::fs::write(path, text).map_err(|e| io_err(path, e))
}

fn write_json<T: Serialize>(path: &Path, v: &T) -> Outcome<()> {
    let mut text = serde_json::to_string_pretty(v).expect("documents serialize");
    text.push('\n');
    write_text(path, &text)
}

fn save(out: &OutArgs, v: &impl Serialize) -> Outcome<()> {
    match &out.out {
        Some(p) => write_json(p, v),
        None => Ok(()),
    }
}

/// Keeps the embedded server (and its temporary data directory) alive.
struct Backend {
    client: Client,
    _dir: Option<tempfile::TempDir>,
}

async fn connect(cli: &Cli) -> Outcome<Backend> {
    if let Some(url) = &cli.server {
        return Ok(Backend {
            client: Client::new(url),
            _dir: None,
        });
    }
    let (dir, tmp) = match &cli.data_dir {
        Some(d) => (d.clone(), None),
        None => {
            let t = tempfile::tempdir().map_err(|e| ErrorDocument::new("io_error", e.to_string()))?;
            (t.path().to_path_buf(), Some(t))
        }
    };
    let (addr, _task) = ssoa_server::spawn(SocketAddr::from(([127, 0, 0, 1], 0)), &dir)
        .await
        .map_err(|e| io_err(&dir, e))?;
    Ok(Backend {
        client: Client::new(&format!("http://{addr}")),
        _dir: tmp,
    })
}

async fn run(cli: Cli) -> Outcome<()> {
    if let Command::Serve(a) = &cli.command {
        return serve(a, cli.data_dir.clone()).await;
    }
    if let Command::Session(SessionCommand::Solve(a)) = &cli.command {
        if a.no_wait && cli.server.is_none() {
            return Err(ErrorDocument::new(
                "invalid_input",
                "--no-wait needs --server: an in-process server stops when the command exits",
            ));
        }
    }
    let backend = connect(&cli).await?;
    let c = &backend.client;
    match cli.command {
        Command::Gen(a) => gen(c, a).await,
        Command::Validate(a) => validate(c, a).await,
        Command::Count(a) => {
            let req = CountRequest {
                input: input(&a.instance)?,
                kind: a.model.into(),
            };
            print!("{}", render::count(&c.count(&req).await.map_err(api)?));
            Ok(())
        }
        Command::Build(a) => build(c, a).await,
        Command::Solve(a) => solve(c, a).await,
        Command::TwoPhase(a) => {
            let inp = input(&a.instance)?;
            let req = TwoPhaseRequest {
                input: inp.clone(),
                limits: a.limits.apply(SolveLimits::default()),
            };
            let r = c.two_phase(&req).await.map_err(api)?;
            print!("{}", render::two_phase(&r));
            if let Some(alloc) = &r.allocation {
                println!();
                print!("{}", render::allocation(&AllocationTable::build(&local(&inp)?, alloc)));
            }
            save(&a.out, &r)
        }
        Command::Heur(a) => heur(c, a).await,
        Command::Tune(a) => tune(c, a).await,
        Command::Sweep(a) => sweep(c, a).await,
        Command::Compare(a) => compare(c, a).await,
        Command::Session(s) => session(c, s).await,
        Command::Serve(_) => unreachable!("handled above"),
    }
}

async fn serve(a: &ServeArgs, data_dir: Option<PathBuf>) -> Outcome<()> {
    tracing_subscriber::fmt()
        .with_env_filter(
            tracing_subscriber::EnvFilter::try_from_default_env().unwrap_or_else(|_| tracing_subscriber::EnvFilter::new("info")),
        )
        .with_writer(std::io::stderr)
        .init();
    let dir = data_dir.unwrap_or_else(|| PathBuf::from("ssoa-data"));
    let addr: SocketAddr = format!("{}:{}", a.host, a.port)
        .parse()
        .map_err(|e| ErrorDocument::new("invalid_input", format!("address: {e}")))?;
    let (bound, task) = ssoa_server::spawn(addr, &dir).await.map_err(|e| io_err(&dir, e))?;
    eprintln!("listening on http://{bound} (data in {})", dir.display());
    match task.await {
        Ok(Ok(())) => Ok(()),
        Ok(Err(e)) => Err(ErrorDocument::new("io_error", e.to_string())),
        Err(e) => Err(ErrorDocument::new("internal", e.to_string())),
    }
}

fn input(a: &InstanceArgs) -> Outcome<InstanceInput> {
    let instance: InstanceDocument = read_json(&a.instance)?;
    Ok(InstanceInput {
        instance,
        mode: a.mode.map(Into::into),
    })
}

fn local(inp: &InstanceInput) -> Outcome<ssoa_core::SupplyChainInstance> {
    inp.to_instance()
        .map_err(|e| ErrorDocument::new("invalid_instance", e.to_string()))
}

fn params(algo: Algorithm, file: Option<&Path>) -> Outcome<ParamSet> {
    let Some(p) = file else {
        return Ok(ParamSet::defaults(algo));
    };
    Ok(match algo {
        Algorithm::Ga => ParamSet::Ga(read_json::<GaParams>(p)?),
        Algorithm::Pso => ParamSet::Pso(read_json::<PsoParams>(p)?),
        Algorithm::Aco => ParamSet::Aco(read_json::<AcoParams>(p)?),
    })
}

fn algorithm(a: Algo) -> Algorithm {
    match a {
        Algo::Ga => Algorithm::Ga,
        Algo::Pso => Algorithm::Pso,
        Algo::Aco => Algorithm::Aco,
    }
}

fn choice(solver: Solver, params_file: Option<&Path>) -> Outcome<SolverChoice> {
    let heur = |a| params(a, params_file);
    Ok(match solver {
        Solver::Bb => SolverChoice::BranchAndBound,
        Solver::Brute => SolverChoice::BruteForce,
        Solver::Ga => match heur(Algorithm::Ga)? {
            ParamSet::Ga(params) => SolverChoice::Ga { params },
            _ => unreachable!(),
        },
        Solver::Pso => match heur(Algorithm::Pso)? {
            ParamSet::Pso(params) => SolverChoice::Pso { params },
            _ => unreachable!(),
        },
        Solver::Aco => match heur(Algorithm::Aco)? {
            ParamSet::Aco(params) => SolverChoice::Aco { params },
            _ => unreachable!(),
        },
    })
}

fn run_options(r: &RunArgs) -> RunOptions {
    RunOptions {
        seed: r.seed,
        threads: r.threads,
        time_limit: r.time_limit,
        reference: r.reference,
    }
}

fn tier1(path: Option<&PathBuf>) -> Outcome<Option<Vec<usize>>> {
    path.map(|p| read_json(p)).transpose()
}

async fn gen(c: &Client, a: GenArgs) -> Outcome<()> {
    let mut config: GeneratorConfig = match &a.config {
        Some(p) => read_json(p)?,
        None => GeneratorConfig::default(),
    };
    if let Some(s) = a.seed {
        config.seed = s;
    }
    if let Some(s) = a.shape {
        config.shape = s;
    }
    if let Some(m) = a.mode {
        config.sourcing_mode = m.into();
    }
    let doc = c.generate(&GenerateRequest { config }).await.map_err(api)?;
    match &a.out.out {
        Some(p) => {
            write_json(p, &doc)?;
            println!("wrote {}", p.display());
            Ok(())
        }
        None => {
            println!("{}", serde_json::to_string_pretty(&doc).expect("documents serialize"));
            Ok(())
        }
    }
}

async fn validate(c: &Client, a: InstanceArgs) -> Outcome<()> {
    let r = c.validate(&input(&a)?).await.map_err(api)?;
    if r.valid {
        println!("valid");
        return Ok(());
    }
    for v in &r.violations {
        println!("{v}");
    }
    let mut doc = ErrorDocument::new(
        "invalid_instance",
        format!("{} violation(s)", r.violations.len()),
    );
    doc.violations = r.violations;
    Err(doc)
}

async fn build(c: &Client, a: BuildArgs) -> Outcome<()> {
    let req = ExportRequest {
        input: input(&a.model.instance)?,
        kind: a.model.model.into(),
        format: a.export.into(),
        tier1: tier1(a.tier1.as_ref())?,
    };
    let r = c.export(&req).await.map_err(api)?;
    match &a.out.out {
        Some(p) => {
            write_text(p, &r.text)?;
            print!("{}", render::count(&r.count));
            println!("wrote {}", p.display());
        }
        None => print!("{}", r.text),
    }
    Ok(())
}

async fn solve(c: &Client, a: SolveArgs) -> Outcome<()> {
    let inp = input(&a.model.instance)?;
    let req = SolveInstanceRequest {
        input: inp.clone(),
        request: SolveRequest {
            limits: a.limits.apply(SolveLimits::default()),
            seed: a.seed,
            tier1: tier1(a.tier1.as_ref())?,
            ..SolveRequest::new(a.model.model.into(), choice(a.solver.solver, a.solver.params.as_deref())?)
        },
    };
    let r = c.solve(&req).await.map_err(api)?;
    print!("{}", render::report(&r.report));
    if let Some(b) = &r.breakdown {
        println!();
        print!("{}", render::breakdown(b));
    }
    if let Some(alloc) = &r.report.allocation {
        println!();
        print!("{}", render::allocation(&AllocationTable::build(&local(&inp)?, alloc)));
    }
    if let Some(p) = &a.trace_out {
        write_text(p, &r.report.trace_csv())?;
    }
    save(&a.out, &r)
}

async fn heur(c: &Client, a: HeurArgs) -> Outcome<()> {
    let algo = algorithm(a.algo);
    let req = HeuristicRequest {
        input: input(&a.model.instance)?,
        kind: a.model.model.into(),
        tier1: tier1(a.tier1.as_ref())?,
        params: params(algo, a.params.as_deref())?,
        run: run_options(&a.run),
    };
    let r = c.heuristic(&req).await.map_err(api)?;
    print!("{}", render::report(&r.report));
    if let Some(p) = &a.trace_out {
        write_text(p, &r.trace.to_csv())?;
    }
    save(&a.out, &r)
}

async fn tune(c: &Client, a: TuneArgs) -> Outcome<()> {
    let algo = algorithm(a.algo);
    let ranges: Option<SearchRanges> = a.ranges.as_deref().map(read_json).transpose()?;
    let req = TuneRequest {
        input: input(&a.model.instance)?,
        kind: a.model.model.into(),
        tier1: None,
        base: params(algo, a.params.as_deref())?,
        ranges,
        trials: a.trials,
        seeds_per_trial: a.seeds,
        seed: a.run.seed,
        run: run_options(&a.run),
    };
    let r = c.tune(&req).await.map_err(api)?;
    print!("{}", render::tune(&r));
    save(&a.out, &r)
}

async fn sweep(c: &Client, a: SweepArgs) -> Outcome<()> {
    let inp = input(&a.model.instance)?;
    let kind: ModelKind = a.model.model.into();
    let solver = choice(a.solver.solver, a.solver.params.as_deref())?;
    let limits = a.limits.apply(SolveLimits::default());
    let r = match a.axis {
        SweepAxis::Sourcing => {
            let req = SourcingSweepRequest {
                input: inp,
                ratios: (!a.ratios.is_empty()).then_some(a.ratios),
                kind,
                solver,
                limits,
            };
            c.sweep_sourcing(&req).await.map_err(api)?
        }
        SweepAxis::Factor | SweepAxis::Threshold => {
            if a.values.is_empty() {
                return Err(ErrorDocument::new("invalid_input", "--values is required for penalty sweeps"));
            }
            let req = PenaltySweepRequest {
                input: inp,
                axis: if a.axis == SweepAxis::Factor { PenaltyAxis::Factor } else { PenaltyAxis::Threshold },
                supplier: a.supplier,
                values: a.values,
                kind,
                solver,
                limits,
            };
            c.sweep_penalty(&req).await.map_err(api)?
        }
    };
    print!("{}", render::sweep(&r));
    if let Some(p) = &a.out.out {
        write_text(p, &r.to_csv())?;
    }
    if let Some(p) = &a.json_out {
        write_json(p, &r)?;
    }
    Ok(())
}

#[derive(serde::Deserialize, Default)]
#[serde(default)]
struct CompareParams {
    ga: Option<GaParams>,
    pso: Option<PsoParams>,
    aco: Option<AcoParams>,
}

async fn compare(c: &Client, a: CompareArgs) -> Outcome<()> {
    let p: CompareParams = match &a.params {
        Some(f) => read_json(f)?,
        None => CompareParams::default(),
    };
    let solvers = a
        .solvers
        .iter()
        .map(|s| match s {
            Solver::Bb => SolverChoice::BranchAndBound,
            Solver::Brute => SolverChoice::BruteForce,
            Solver::Ga => SolverChoice::Ga { params: p.ga.unwrap_or_default() },
            Solver::Pso => SolverChoice::Pso { params: p.pso.unwrap_or_default() },
            Solver::Aco => SolverChoice::Aco { params: p.aco.unwrap_or_default() },
        })
        .collect();
    let req = CompareRequest {
        input: input(&a.instance)?,
        solvers,
        kinds: a.models.iter().map(|&m| m.into()).collect(),
        limits: a.limits.apply(SolveLimits::default()),
        seeds: a.seeds,
    };
    let r = c.compare(&req).await.map_err(api)?;
    print!("{}", render::comparison(&r));
    if let Some(p) = &a.out.out {
        write_text(p, &r.to_csv())?;
    }
    if let Some(p) = &a.json_out {
        write_json(p, &r)?;
    }
    Ok(())
}

/// Overrides for a session solve; limit flags refine the session's limits.
async fn overrides(
    c: &Client,
    id: &str,
    model: Option<Model>,
    solver: &OptSolverArgs,
    limits: &LimitArgs,
    seed: Option<u64>,
) -> Outcome<SolveOverrides> {
    let limits = if limits.any() {
        let base = c.session(id).await.map_err(api)?.settings.limits;
        Some(limits.apply(base))
    } else {
        None
    };
    Ok(SolveOverrides {
        kind: model.map(Into::into),
        solver: solver.solver.map(|s| choice(s, solver.params.as_deref())).transpose()?,
        limits,
        seed,
    })
}

async fn session(c: &Client, cmd: SessionCommand) -> Outcome<()> {
    match cmd {
        SessionCommand::Create(a) => {
            let inp = input(&a.instance)?;
            let mut settings: SessionSettings = match &a.settings {
                Some(p) => read_json(p)?,
                None => SessionSettings::default(),
            };
            if let Some(m) = a.model {
                settings.kind = m.into();
            }
            if let Some(s) = a.solver.solver {
                settings.solver = choice(s, a.solver.params.as_deref())?;
            }
            settings.limits = a.limits.apply(settings.limits);
            if let Some(s) = a.seed {
                settings.seed = s;
            }
            if inp.mode.is_some() {
                settings.mode = inp.mode;
            }
            let r = c
                .create_session(&CreateSessionRequest {
                    instance: inp.instance,
                    settings,
                })
                .await
                .map_err(api)?;
            println!("{}", r.id);
        }
        SessionCommand::List => {
            for id in c.sessions().await.map_err(api)? {
                println!("{id}");
            }
        }
        SessionCommand::Submit { id, delta } => {
            let delta: BidDelta = match &delta {
                Some(p) => read_json(p)?,
                None => BidDelta::default(),
            };
            println!("{}", c.submit_round(&id, delta).await.map_err(api)?);
        }
        SessionCommand::Solve(a) => {
            let req = SolveRoundRequest {
                overrides: overrides(c, &a.id, a.model, &a.solver, &a.limits, a.seed).await?,
                wait: !a.no_wait,
            };
            match c.solve_round(&a.id, a.round, &req).await.map_err(api)? {
                SolveOutcome::Done(view) => {
                    print!("{}", render::report(&view.report));
                    if let Some(b) = &view.breakdown {
                        println!();
                        print!("{}", render::breakdown(b));
                    }
                    if let Some(t) = &view.table {
                        println!();
                        print!("{}", render::allocation(t));
                    }
                    save(&a.out, &view)?;
                }
                SolveOutcome::Accepted(job) => {
                    println!("{}", job.job);
                    save(&a.out, &job)?;
                }
            }
        }
        SessionCommand::Skip { id, round } => {
            c.skip_round(&id, round).await.map_err(api)?;
            println!("round {round} skipped");
        }
        SessionCommand::Allocation { id, round, out } => {
            let view = c.allocation(&id, round).await.map_err(api)?;
            print!("{}", render::report(&view.report));
            if let Some(t) = &view.table {
                println!();
                print!("{}", render::allocation(t));
            }
            save(&out, &view)?;
        }
        SessionCommand::Whatif(a) => {
            let mutation: Mutation = read_json(&a.mutation)?;
            let req = WhatIfRequest {
                base_round: a.round,
                mutation,
                overrides: overrides(c, &a.id, a.model, &a.solver, &a.limits, None).await?,
            };
            let r = c.what_if(&a.id, &req).await.map_err(api)?;
            print!("{}", render::what_if(&r));
            save(&a.out, &r)?;
        }
        SessionCommand::Summary { id, out } => {
            let s = c.summary(&id).await.map_err(api)?;
            print!("{}", render::summary(&s));
            save(&out, &s)?;
        }
        SessionCommand::Job { id, job } => {
            let j = c.job(&id, &job).await.map_err(api)?;
            println!("{}", serde_json::to_string_pretty(&j).expect("documents serialize"));
        }
        SessionCommand::Close { id } => {
            let s = c.close_session(&id).await.map_err(api)?;
            print!("{}", render::summary(&s));
        }
    }
    Ok(())
}
