use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use latticeds::{Algorithm, BoundVariant, Error, DEFAULT_CAP};

mod commands;

#[derive(Parser)]
#[command(name = "latticeds", version, about = "Minimise differences of lattice submodular functions")]
struct Cli {
    /// Largest domain (in points) any enumerating step may touch.
    #[arg(long, global = true, env = "LATTICEDS_CAP", default_value_t = DEFAULT_CAP)]
    cap: usize,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one of the majorisation-minimisation algorithms.
    Solve {
        problem: PathBuf,
        #[command(flatten)]
        opts: SolveArgs,
        /// Write one JSON record per iteration here.
        #[arg(long)]
        trace: Option<PathBuf>,
        /// Write a one-row CSV summary here.
        #[arg(long)]
        summary: Option<PathBuf>,
    },
    /// Submodularity, DR and monotonicity verdicts for f, g and v.
    Check { problem: PathBuf },
    /// Curvature split, modular-plus-monotone splits and additive bounds.
    Decompose {
        problem: PathBuf,
        #[arg(long)]
        lambda: Option<f64>,
    },
    /// Modular lower bound of g and upper bound of f at an anchor.
    Bounds {
        problem: PathBuf,
        /// Anchor point, comma separated.
        #[arg(long, value_delimiter = ',', required = true)]
        at: Vec<usize>,
        #[arg(long, value_enum, default_value_t = ChainArg::Canonical)]
        chain: ChainArg,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        lambda: Option<f64>,
        #[arg(long, value_enum, default_value_t = VariantArg::Grow1)]
        variant: VariantArg,
    },
    /// Exact minimum of v by enumeration.
    Oracle { problem: PathBuf },
    /// Solve a seeded ensemble and compare against exact minima.
    Bench(BenchArgs),
}

#[derive(Args, Clone)]
struct SolveArgs {
    #[arg(long, value_enum, default_value_t = AlgorithmArg::Modmod)]
    algorithm: AlgorithmArg,
    #[arg(long, default_value_t = 0.0)]
    epsilon: f64,
    #[arg(long, default_value_t = 100)]
    max_iters: usize,
    #[arg(long, value_enum, default_value_t = ChainArg::Canonical)]
    chain: ChainArg,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Curvature bound for f; overrides the problem file.
    #[arg(long)]
    lambda: Option<f64>,
    #[arg(long, value_enum, default_value_t = UbArg::TryBoth)]
    ub: UbArg,
    #[arg(long, value_enum, default_value_t = SfmArg::Brute)]
    sfm: SfmArg,
    #[arg(long, default_value_t = 500)]
    sfm_iters: usize,
    /// Cardinality budget (modmod only); overrides the problem file.
    #[arg(long)]
    budget: Option<usize>,
}

#[derive(Args)]
struct BenchArgs {
    #[arg(long, value_enum, default_value_t = KindArg::Coverage)]
    kind: KindArg,
    #[arg(long, default_value_t = 20)]
    count: usize,
    #[arg(long, value_delimiter = ',', default_value = "3,3,3")]
    sizes: Vec<usize>,
    #[arg(long, default_value_t = 4)]
    regions: usize,
    /// Comma-separated algorithms; all three by default.
    #[arg(long, value_enum, value_delimiter = ',')]
    algorithms: Vec<AlgorithmArg>,
    #[command(flatten)]
    opts: SolveArgs,
    /// CSV with one row per (instance, algorithm).
    #[arg(long)]
    summary: Option<PathBuf>,
}

#[derive(ValueEnum, Clone, Copy)]
enum AlgorithmArg {
    Subsup,
    Supsub,
    Modmod,
}

impl From<AlgorithmArg> for Algorithm {
    fn from(a: AlgorithmArg) -> Self {
        match a {
            AlgorithmArg::Subsup => Algorithm::SubSup,
            AlgorithmArg::Supsub => Algorithm::SupSub,
            AlgorithmArg::Modmod => Algorithm::ModMod,
        }
    }
}

#[derive(ValueEnum, Clone, Copy)]
enum ChainArg {
    Canonical,
    Randomized,
}

#[derive(ValueEnum, Clone, Copy)]
#[value(rename_all = "snake_case")]
enum UbArg {
    TryBoth,
    Grow1,
    Grow2,
}

#[derive(ValueEnum, Clone, Copy)]
enum SfmArg {
    Brute,
    Subgrad,
}

#[derive(ValueEnum, Clone, Copy)]
enum VariantArg {
    Grow1,
    Grow2,
    Tight1,
    Tight2,
}

impl From<VariantArg> for BoundVariant {
    fn from(v: VariantArg) -> Self {
        match v {
            VariantArg::Grow1 => BoundVariant::Grow1,
            VariantArg::Grow2 => BoundVariant::Grow2,
            VariantArg::Tight1 => BoundVariant::Tight1,
            VariantArg::Tight2 => BoundVariant::Tight2,
        }
    }
}

#[derive(ValueEnum, Clone, Copy)]
#[value(rename_all = "snake_case")]
enum KindArg {
    Coverage,
    ConcaveOfLinearSums,
    RandomTableAutosplit,
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Validation { .. } | Error::Parse { .. } => 2,
        Error::CapExceeded { .. } | Error::MissingLambda { .. } => 3,
        _ => 1,
    }
}

fn error_record(e: &Error) -> serde_json::Value {
    let kind = match e {
        Error::InvalidDomain(_) => "invalid_domain",
        Error::OutOfDomain { .. } => "out_of_domain",
        Error::InvalidArgument(_) => "invalid_argument",
        Error::CapExceeded { .. } => "cap_exceeded",
        Error::Validation { .. } => "validation",
        Error::Construction(_) => "construction",
        Error::MissingLambda { .. } => "missing_lambda",
        Error::Parse { .. } => "parse",
        Error::Io(_) => "io",
    };
    let mut rec = serde_json::json!({ "error": kind, "message": e.to_string(), "exit_code": exit_code(e) });
    match e {
        Error::Validation { what, witness } => {
            rec["what"] = what.clone().into();
            rec["witness"] = serde_json::to_value(witness).expect("witnesses serialise");
        }
        Error::Parse { path, .. } => rec["path"] = path.clone().into(),
        _ => {}
    }
    rec
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match commands::run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("{}", error_record(&e));
            ExitCode::from(exit_code(&e))
        }
    }
}
