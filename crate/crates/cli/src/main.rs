//! `sbr`: generate instances, solve them, evaluate strategies and run
//! seeded experiments.
//!
//! Exit codes: 0 success, 1 runtime error, 2 usage error, 3 when every run
//! hit the timeout.

use std::fs;
use std::io::{self, BufReader, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::{Duration, Instant};

use clap::{Args, Parser, Subcommand, ValueEnum};
use sbr_core::budget::ingest_bids;
use sbr_core::experiment::{
    evaluate, run_experiment, solve, strategy_from_text, strategy_to_text, Algorithm, BudgetFamily,
    Domain, ExperimentConfig, Instance, SolveParams,
};
use sbr_core::nsg::ResourceRule;
use sbr_core::{Error, StartPoint};

#[derive(Parser)]
#[command(name = "sbr", version, about = "Approximate minimax strategies for submodular best-response games")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct Common {
    /// Random seed.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Time limit in seconds.
    #[arg(long, default_value_t = 300.0)]
    timeout: f64,
    /// Output file (standard output when omitted).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum DomainArg {
    Nsg,
    Budget,
}

#[derive(Clone, Copy, ValueEnum)]
enum AlgorithmArg {
    Equator,
    EquatorBrmi,
    DoubleOracle,
    Greedy,
}

#[derive(Clone, Copy, ValueEnum)]
enum StartArg {
    Origin,
    Shifted,
}

#[derive(Clone, Copy, ValueEnum)]
enum FamilyArg {
    Bipartite,
    Skewed,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a random instance file.
    Gen(GenArgs),
    /// Run one algorithm on an instance file and report its worst-case value.
    Solve(SolveArgs),
    /// Run an experiment described by a key=value config file and write CSV.
    Exp(ExpArgs),
    /// Worst-case value of a strategy file against an instance.
    Eval(EvalArgs),
    /// Build a budget instance from a bid log.
    Ingest(IngestArgs),
}

#[derive(Args)]
struct GenArgs {
    #[arg(long, value_enum)]
    domain: DomainArg,
    /// Vertices (nsg) or channels = customers (budget).
    #[arg(long)]
    n: usize,
    /// Expected fraction of vertex pairs joined (nsg).
    #[arg(long)]
    density: Option<f64>,
    /// Number of sources and of targets (nsg).
    #[arg(long)]
    sources: Option<usize>,
    /// Fixed number of defender resources (nsg); default is 1% of the edges.
    #[arg(long)]
    k: Option<usize>,
    /// Instance family (budget).
    #[arg(long, value_enum, default_value = "bipartite")]
    family: FamilyArg,
    /// Budget B (budget); default 5 + n/100.
    #[arg(long)]
    budget: Option<usize>,
    /// gamma as a fraction of the number of customers (budget).
    #[arg(long)]
    gamma_frac: Option<f64>,
    #[command(flatten)]
    common: Common,
}

#[derive(Args)]
struct SolveArgs {
    /// Instance file.
    instance: PathBuf,
    #[arg(long, value_enum, default_value = "equator")]
    algorithm: AlgorithmArg,
    /// Frank-Wolfe iterations.
    #[arg(long = "iterations", short = 'K')]
    iterations: Option<usize>,
    /// Gradient samples per iteration.
    #[arg(long = "samples-per-step", short = 'c')]
    samples_per_step: Option<usize>,
    /// Smoothing radius.
    #[arg(long = "radius", short = 'u')]
    radius: Option<f64>,
    /// Solver starting point; `shifted` starts at u·1 and subtracts it at the end.
    #[arg(long, value_enum, default_value = "origin")]
    start: StartArg,
    #[arg(long, default_value_t = 0.5)]
    eps: f64,
    #[arg(long, default_value_t = 0.1)]
    delta: f64,
    #[arg(long, default_value_t = 4)]
    rho: usize,
    /// Number of swap-rounded samples in the mixed strategy.
    #[arg(long)]
    samples: Option<usize>,
    #[arg(long, default_value_t = 10_000)]
    path_cap: usize,
    #[command(flatten)]
    common: Common,
}

#[derive(Args)]
struct ExpArgs {
    /// Experiment config file.
    config: PathBuf,
    /// Overrides `seed` from the config.
    #[arg(long)]
    seed: Option<u64>,
    /// Overrides `timeout` from the config.
    #[arg(long)]
    timeout: Option<f64>,
    /// Overrides `out` from the config.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct EvalArgs {
    instance: PathBuf,
    strategy: PathBuf,
    #[arg(long, default_value_t = 10_000)]
    path_cap: usize,
    #[command(flatten)]
    common: Common,
}

#[derive(Args)]
struct IngestArgs {
    /// Bid file with `<phrase> <account> <p> [w]` records.
    bids: PathBuf,
    /// Keep a random subset of this many phrases.
    #[arg(long)]
    channels: Option<usize>,
    #[arg(long, default_value_t = 5)]
    budget: usize,
    /// gamma as a fraction of the number of customers.
    #[arg(long, default_value_t = 0.5)]
    gamma_frac: f64,
    #[command(flatten)]
    common: Common,
}

fn read(path: &Path) -> Result<String, Error> {
    fs::read_to_string(path)
        .map_err(|e| Error::Io(io::Error::new(e.kind(), format!("{}: {e}", path.display()))))
}

fn emit(out: Option<&Path>, text: &str) -> Result<(), Error> {
    match out {
        Some(p) => fs::write(p, text)?,
        None => io::stdout().write_all(text.as_bytes())?,
    }
    Ok(())
}

fn deadline(seconds: f64) -> Result<Instant, Error> {
    if !(seconds > 0.0 && seconds.is_finite()) {
        return Err(Error::Config(format!("--timeout {seconds} must be positive")));
    }
    Ok(Instant::now() + Duration::from_secs_f64(seconds))
}

fn gen(args: GenArgs) -> Result<(), Error> {
    let domain = match args.domain {
        DomainArg::Nsg => Domain::Nsg,
        DomainArg::Budget => Domain::Budget,
    };
    let mut cfg = ExperimentConfig::new(domain, Algorithm::Greedy, args.n);
    if let Some(d) = args.density {
        cfg.geometric.density = d;
    }
    if let Some(s) = args.sources {
        cfg.geometric.n_source_target = s;
    }
    if let Some(k) = args.k {
        cfg.geometric.resources = ResourceRule::Fixed(k);
    }
    if let Some(g) = args.gamma_frac {
        cfg.bipartite.gamma_frac = g;
    }
    cfg.bipartite.budget = args.budget;
    cfg.budget_family = match args.family {
        FamilyArg::Bipartite => BudgetFamily::Bipartite,
        FamilyArg::Skewed => BudgetFamily::Skewed,
    };
    let instance = Instance::generate(&cfg, args.common.seed)?;
    emit(args.common.out.as_deref(), &instance.to_text())
}

fn solve_cmd(args: SolveArgs) -> Result<(), Error> {
    let instance = Instance::from_text(&read(&args.instance)?)?;
    let mut params = SolveParams {
        eps: args.eps,
        delta: args.delta,
        rho: args.rho,
        samples: args.samples,
        path_cap: args.path_cap,
        start: match args.start {
            StartArg::Origin => StartPoint::Origin,
            StartArg::Shifted => StartPoint::Shifted,
        },
        ..SolveParams::default()
    };
    if args.iterations.is_some() || args.samples_per_step.is_some() || args.radius.is_some() {
        let d = params.sfw_config(instance.domain(), 0);
        params.sfw = Some((
            args.iterations.unwrap_or(d.iterations),
            args.samples_per_step.unwrap_or(d.samples),
            args.radius.unwrap_or(d.radius),
        ));
    }
    let algorithm = match args.algorithm {
        AlgorithmArg::Equator => Algorithm::Equator,
        AlgorithmArg::EquatorBrmi => Algorithm::EquatorBrmi,
        AlgorithmArg::DoubleOracle => Algorithm::DoubleOracle,
        AlgorithmArg::Greedy => Algorithm::Greedy,
    };
    let start = Instant::now();
    let strategy = solve(
        &instance,
        algorithm,
        &params,
        args.common.seed,
        Some(deadline(args.common.timeout)?),
    )?;
    let runtime = start.elapsed();
    let wc = evaluate(&instance, &strategy, params.path_cap)?;
    println!("value {}", wc.value);
    println!("exact {}", wc.exact);
    println!("support {}", strategy.support().len());
    println!("runtime_ms {}", runtime.as_millis());
    if let Some(out) = &args.common.out {
        fs::write(out, strategy_to_text(&strategy))?;
    }
    Ok(())
}

/// Returns whether every trial timed out.
fn exp(args: ExpArgs) -> Result<bool, Error> {
    let mut cfg = ExperimentConfig::parse(&read(&args.config)?)?;
    if let Some(s) = args.seed {
        cfg.seed = s;
    }
    if let Some(t) = args.timeout {
        deadline(t)?;
        cfg.timeout = Duration::from_secs_f64(t);
    }
    if let Some(o) = args.out {
        cfg.out = Some(o.display().to_string());
    }
    let report = run_experiment(&cfg)?;
    emit(cfg.out.as_deref().map(Path::new), &report.to_csv())?;
    Ok(report.all_timed_out())
}

fn eval(args: EvalArgs) -> Result<(), Error> {
    let instance = Instance::from_text(&read(&args.instance)?)?;
    let strategy = strategy_from_text(&read(&args.strategy)?)?;
    let wc = evaluate(&instance, &strategy, args.path_cap)?;
    let text = format!("value {}\nexact {}\n", wc.value, wc.exact);
    emit(args.common.out.as_deref(), &text)
}

fn ingest(args: IngestArgs) -> Result<(), Error> {
    let file = fs::File::open(&args.bids)
        .map_err(|e| Error::Io(io::Error::new(e.kind(), format!("{}: {e}", args.bids.display()))))?;
    let mut table = ingest_bids(BufReader::new(file))?;
    if let Some(c) = args.channels {
        table = table.subsample(c, args.common.seed);
    }
    let gamma = args.gamma_frac * table.accounts.len() as f64;
    let (inst, u) = table.into_instance(args.budget, gamma)?;
    emit(args.common.out.as_deref(), &inst.to_text(&u))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Gen(a) => gen(a).map(|_| false),
        Command::Solve(a) => solve_cmd(a).map(|_| false),
        Command::Exp(a) => exp(a),
        Command::Eval(a) => eval(a).map(|_| false),
        Command::Ingest(a) => ingest(a).map(|_| false),
    };
    match outcome {
        Ok(false) => ExitCode::SUCCESS,
        Ok(true) => {
            eprintln!("sbr: every run hit the timeout");
            ExitCode::from(3)
        }
        Err(Error::Timeout) => {
            eprintln!("sbr: timed out");
            ExitCode::from(3)
        }
        Err(e @ Error::Config(_)) => {
            eprintln!("sbr: {e}");
            ExitCode::from(2)
        }
        Err(e) => {
            eprintln!("sbr: {e}");
            ExitCode::from(1)
        }
    }
}
