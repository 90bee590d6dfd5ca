use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

use ssoa_core::analysis::SplitRatio;
use ssoa_core::exact::SolveLimits;
use ssoa_core::instance::SourcingMode;
use ssoa_core::milp::{ExportFormat, ModelKind};

/// Supplier selection and order allocation for two-tier supply chains.
///
/// Every command is served by the HTTP service: `--server` points at a
/// running one, otherwise an in-process server is started for the call,
/// keeping sessions under `--data-dir`.
#[derive(Parser, Debug)]
#[command(name = "ssoa", version)]
pub struct Cli {
    /// Base URL of a running service, e.g. http://127.0.0.1:8080.
    #[arg(long, global = true, env = "SSOA_SERVER")]
    pub server: Option<String>,
    /// Session storage of the in-process server (a temporary directory
    /// when omitted).
    #[arg(long, global = true, env = "SSOA_DATA_DIR")]
    pub data_dir: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Generate a random instance document.
    Gen(GenArgs),
    /// Check an instance document against every invariant.
    Validate(InstanceArgs),
    /// Count model variables.
    Count(ModelArgs),
    /// Build a model and export it as LP or MPS.
    #[command(alias = "export")]
    Build(BuildArgs),
    /// Solve with an exact solver or a meta-heuristic.
    Solve(SolveArgs),
    /// Solve the machinist problem, then the forger problem given it.
    TwoPhase(TwoPhaseArgs),
    /// Run a meta-heuristic and write its convergence trace.
    Heur(HeurArgs),
    /// Random-search parameter tuning of a meta-heuristic.
    Tune(TuneArgs),
    /// Sweep the sourcing split or a penalty parameter.
    Sweep(SweepArgs),
    /// Run several solvers on several model kinds.
    Compare(CompareArgs),
    /// Run the HTTP service.
    Serve(ServeArgs),
    /// Bidding sessions.
    #[command(subcommand)]
    Session(SessionCommand),
}

#[derive(Args, Debug)]
pub struct OutArgs {
    /// Write the machine-readable result here.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct GenArgs {
    /// Generator configuration (JSON; missing fields take defaults).
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Shape as tier1,tier2,parts_blue,parts_llv,forgings_blue,forgings_llv.
    #[arg(long, value_parser = parse_shape)]
    pub shape: Option<ssoa_core::ProblemShape>,
    #[arg(long, value_enum)]
    pub mode: Option<Mode>,
    #[command(flatten)]
    pub out: OutArgs,
}

#[derive(Args, Debug)]
pub struct InstanceArgs {
    /// Instance document.
    #[arg(long, short)]
    pub instance: PathBuf,
    /// Override the instance's sourcing mode.
    #[arg(long, value_enum)]
    pub mode: Option<Mode>,
}

#[derive(Args, Debug)]
pub struct ModelArgs {
    #[command(flatten)]
    pub instance: InstanceArgs,
    #[arg(long, value_enum, default_value = "integrated")]
    pub model: Model,
}

#[derive(Args, Debug)]
pub struct BuildArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    #[arg(long, value_enum, default_value = "lp")]
    pub export: Format,
    /// Tier1 allocation for the forger model (JSON array); solved when absent.
    #[arg(long)]
    pub tier1: Option<PathBuf>,
    #[command(flatten)]
    pub out: OutArgs,
}

#[derive(Args, Debug, Clone)]
pub struct LimitArgs {
    /// Wall-clock limit in seconds.
    #[arg(long)]
    pub time_limit: Option<f64>,
    #[arg(long)]
    pub node_limit: Option<u64>,
    #[arg(long)]
    pub gap: Option<f64>,
    #[arg(long)]
    pub threads: Option<usize>,
}

impl LimitArgs {
    pub fn any(&self) -> bool {
        self.time_limit.is_some() || self.node_limit.is_some() || self.gap.is_some() || self.threads.is_some()
    }

    pub fn apply(&self, mut l: SolveLimits) -> SolveLimits {
        if let Some(v) = self.time_limit {
            l.time_limit = v;
        }
        if let Some(v) = self.node_limit {
            l.node_limit = v;
        }
        if let Some(v) = self.gap {
            l.gap_target = v;
        }
        if let Some(v) = self.threads {
            l.threads = v;
        }
        l
    }
}

#[derive(Args, Debug, Clone)]
pub struct SolverArgs {
    #[arg(long, value_enum, default_value = "bb")]
    pub solver: Solver,
    /// Meta-heuristic parameters (JSON; missing fields take defaults).
    #[arg(long)]
    pub params: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct SolveArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    #[command(flatten)]
    pub solver: SolverArgs,
    #[command(flatten)]
    pub limits: LimitArgs,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Tier1 allocation for the forger problem (JSON array).
    #[arg(long)]
    pub tier1: Option<PathBuf>,
    /// Incumbent trace as time,incumbent CSV.
    #[arg(long)]
    pub trace_out: Option<PathBuf>,
    #[command(flatten)]
    pub out: OutArgs,
}

#[derive(Args, Debug)]
pub struct TwoPhaseArgs {
    #[command(flatten)]
    pub instance: InstanceArgs,
    #[command(flatten)]
    pub limits: LimitArgs,
    #[command(flatten)]
    pub out: OutArgs,
}

#[derive(Args, Debug)]
pub struct RunArgs {
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 1)]
    pub threads: usize,
    #[arg(long)]
    pub time_limit: Option<f64>,
    /// Known optimum for the relative column of the trace.
    #[arg(long)]
    pub reference: Option<f64>,
}

#[derive(Args, Debug)]
pub struct HeurArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    #[arg(long, value_enum)]
    pub algo: Algo,
    #[arg(long)]
    pub params: Option<PathBuf>,
    #[command(flatten)]
    pub run: RunArgs,
    #[arg(long)]
    pub tier1: Option<PathBuf>,
    /// Convergence trace as iter,best,relative CSV.
    #[arg(long)]
    pub trace_out: Option<PathBuf>,
    #[command(flatten)]
    pub out: OutArgs,
}

#[derive(Args, Debug)]
pub struct TuneArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    #[arg(long, value_enum)]
    pub algo: Algo,
    /// Starting parameters (JSON).
    #[arg(long)]
    pub params: Option<PathBuf>,
    /// Search box per parameter, as JSON {"name": [lo, hi]}.
    #[arg(long)]
    pub ranges: Option<PathBuf>,
    #[arg(long, default_value_t = 10)]
    pub trials: usize,
    #[arg(long, default_value_t = 3)]
    pub seeds: usize,
    #[command(flatten)]
    pub run: RunArgs,
    #[command(flatten)]
    pub out: OutArgs,
}

#[derive(Args, Debug)]
pub struct SweepArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    #[arg(long, value_enum)]
    pub axis: SweepAxis,
    /// Split ratios for the sourcing axis, e.g. 50:50,70:30,100:0.
    #[arg(long, value_delimiter = ',')]
    pub ratios: Vec<SplitRatio>,
    /// Tier2 supplier whose penalty is varied.
    #[arg(long, default_value_t = 0)]
    pub supplier: usize,
    /// Values for the factor or threshold axis.
    #[arg(long, value_delimiter = ',')]
    pub values: Vec<f64>,
    #[command(flatten)]
    pub solver: SolverArgs,
    #[command(flatten)]
    pub limits: LimitArgs,
    /// Also write the result document (JSON) here; `--out` gets CSV.
    #[arg(long)]
    pub json_out: Option<PathBuf>,
    #[command(flatten)]
    pub out: OutArgs,
}

#[derive(Args, Debug)]
pub struct CompareArgs {
    #[command(flatten)]
    pub instance: InstanceArgs,
    #[arg(long, value_enum, value_delimiter = ',', default_value = "bb,ga,pso,aco")]
    pub solvers: Vec<Solver>,
    #[arg(long, value_enum, value_delimiter = ',', default_value = "machinist,integrated")]
    pub models: Vec<Model>,
    #[arg(long, value_delimiter = ',', default_value = "0")]
    pub seeds: Vec<u64>,
    /// Parameters for the meta-heuristics as JSON {"ga": {...}, ...}.
    #[arg(long)]
    pub params: Option<PathBuf>,
    #[command(flatten)]
    pub limits: LimitArgs,
    #[arg(long)]
    pub json_out: Option<PathBuf>,
    #[command(flatten)]
    pub out: OutArgs,
}

#[derive(Args, Debug)]
pub struct ServeArgs {
    #[arg(long, default_value = "127.0.0.1")]
    pub host: String,
    #[arg(long, default_value_t = 8080)]
    pub port: u16,
}

#[derive(Subcommand, Debug)]
pub enum SessionCommand {
    /// Open a session on an instance; prints its id.
    Create(SessionCreateArgs),
    /// List session ids.
    List,
    /// Submit the next round's bid changes.
    Submit {
        id: String,
        /// Bid delta document (JSON); an empty delta when omitted.
        #[arg(long)]
        delta: Option<PathBuf>,
    },
    /// Solve an open round.
    Solve(SessionSolveArgs),
    /// Close an open round without solving it.
    Skip { id: String, round: u32 },
    /// Show the allocation of a solved round.
    Allocation {
        id: String,
        round: u32,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Solve a mutated copy of a solved round.
    Whatif(WhatIfArgs),
    /// Show rounds, what-ifs and the timeline.
    Summary {
        id: String,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Poll a solve job.
    Job { id: String, job: String },
    /// Close the session.
    Close { id: String },
}

#[derive(Args, Debug)]
pub struct SessionCreateArgs {
    #[command(flatten)]
    pub instance: InstanceArgs,
    /// Settings document (JSON); flags below override it.
    #[arg(long)]
    pub settings: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub model: Option<Model>,
    #[command(flatten)]
    pub solver: OptSolverArgs,
    #[command(flatten)]
    pub limits: LimitArgs,
    #[arg(long)]
    pub seed: Option<u64>,
}

#[derive(Args, Debug, Clone)]
pub struct OptSolverArgs {
    #[arg(long, value_enum)]
    pub solver: Option<Solver>,
    #[arg(long)]
    pub params: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct SessionSolveArgs {
    pub id: String,
    pub round: u32,
    #[arg(long, value_enum)]
    pub model: Option<Model>,
    #[command(flatten)]
    pub solver: OptSolverArgs,
    #[command(flatten)]
    pub limits: LimitArgs,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Return the job id at once instead of waiting.
    #[arg(long)]
    pub no_wait: bool,
    #[command(flatten)]
    pub out: OutArgs,
}

#[derive(Args, Debug)]
pub struct WhatIfArgs {
    pub id: String,
    #[arg(long)]
    pub round: u32,
    /// Mutation document (JSON), e.g. {"type":"remove_supplier","tier":1,"supplier":2}.
    #[arg(long)]
    pub mutation: PathBuf,
    #[arg(long, value_enum)]
    pub model: Option<Model>,
    #[command(flatten)]
    pub solver: OptSolverArgs,
    #[command(flatten)]
    pub limits: LimitArgs,
    #[command(flatten)]
    pub out: OutArgs,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum Model {
    Machinist,
    Forger,
    Integrated,
}

impl From<Model> for ModelKind {
    fn from(m: Model) -> Self {
        match m {
            Model::Machinist => ModelKind::Machinist,
            Model::Forger => ModelKind::Forger,
            Model::Integrated => ModelKind::Integrated,
        }
    }
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum Mode {
    Single,
    Dual,
}

impl From<Mode> for SourcingMode {
    fn from(m: Mode) -> Self {
        match m {
            Mode::Single => SourcingMode::Single,
            Mode::Dual => SourcingMode::Dual,
        }
    }
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum Format {
    Lp,
    Mps,
}

impl From<Format> for ExportFormat {
    fn from(f: Format) -> Self {
        match f {
            Format::Lp => ExportFormat::Lp,
            Format::Mps => ExportFormat::Mps,
        }
    }
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum Solver {
    /// Branch-and-bound.
    Bb,
    /// Full enumeration (tiny instances only).
    Brute,
    Ga,
    Pso,
    Aco,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum Algo {
    Ga,
    Pso,
    Aco,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum SweepAxis {
    Sourcing,
    Factor,
    Threshold,
}

fn parse_shape(s: &str) -> Result<ssoa_core::ProblemShape, String> {
    let v: Vec<usize> = s
        .split(',')
        .map(|x| x.trim().parse::<usize>().map_err(|e| format!("`{x}`: {e}")))
        .collect::<Result<_, _>>()?;
    let [tier1_count, tier2_count, parts_blue, parts_llv, forgings_blue, forgings_llv] = v[..] else {
        return Err("expected six comma-separated counts".into());
    };
    Ok(ssoa_core::ProblemShape {
        tier1_count,
        tier2_count,
        parts_blue,
        parts_llv,
        forgings_blue,
        forgings_llv,
    })
}
