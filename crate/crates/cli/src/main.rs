//! Command-line interface for censored-response feature screening.

mod io;

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use dcscreen::error_model::{
    assumed_diagonal, sigma_from_repeats, sigma_from_validation, ErrorCovariance, SigmaSource,
};
use dcscreen::screening::{
    default_q, default_q1, iterative_screen, select, ActiveEntry, CorrectionMode, ScreeningConfig,
    SelectionRule,
};
use dcscreen::simgen::{run_experiment, ExperimentReport, Knowledge, ModelKind, ScenarioConfig};
use dcscreen::survival::{impute_response, CensoredSample};

use io::{CliError, CliResult, Dataset};

#[derive(Parser)]
#[command(
    name = "dcscreen",
    version,
    about = "Feature screening for right-censored responses measured with error"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Screen a dataset and report the selected covariates.
    Screen(ScreenArgs),
    /// Run a simulation scenario and report selection proportions.
    Simulate(SimulateArgs),
    /// Estimate the measurement-error covariance from auxiliary data.
    EstimateSigma(EstimateSigmaArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ModeArg {
    Naive,
    Corrected,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum FormatArg {
    Json,
    Csv,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ModelArg {
    Ph,
    Po,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum KnowledgeArg {
    Known,
    Repeated,
    Validation,
    ErrorFree,
}

#[derive(Args)]
struct ScreenArgs {
    /// Input CSV with `time`, `status`, and covariate columns.
    data: PathBuf,
    /// Known error covariance matrix as CSV.
    #[arg(long, value_name = "FILE", group = "sigma_source")]
    sigma_known: Option<PathBuf>,
    /// Repeated measurements CSV used to estimate the error covariance.
    #[arg(long, value_name = "FILE", group = "sigma_source")]
    repeats: Option<PathBuf>,
    /// Validation pairs CSV used to estimate the error covariance.
    #[arg(long, value_name = "FILE", group = "sigma_source")]
    validation: Option<PathBuf>,
    /// Assume the diagonal covariance sigma2 * I.
    #[arg(long, value_name = "SIGMA2", group = "sigma_source")]
    assume_sigma: Option<f64>,
    /// Active-set budget; defaults to floor(n / ln n).
    #[arg(long)]
    q: Option<usize>,
    /// Stage-one budget for the iterated screen; defaults to ceil(0.4 q).
    #[arg(long)]
    q1: Option<usize>,
    /// Regression flavor used in improvement rounds.
    #[arg(long, value_enum, default_value_t = ModeArg::Naive)]
    mode: ModeArg,
    /// Run the iterated screen instead of the one-shot ranking.
    #[arg(long)]
    iterate: bool,
    /// Keep only utilities at or above c * n^(-zeta), written as `c,zeta`.
    #[arg(long, value_name = "C,ZETA")]
    threshold: Option<String>,
    /// Write the machine-readable result here instead of stdout.
    #[arg(long, value_name = "FILE")]
    out: Option<PathBuf>,
    /// Machine-readable output format.
    #[arg(long, value_enum, default_value_t = FormatArg::Json)]
    format: FormatArg,
}

#[derive(Args)]
struct SimulateArgs {
    /// Failure-time model.
    #[arg(long, value_enum)]
    model: ModelArg,
    /// Equicorrelation parameter.
    #[arg(long, default_value_t = 0.5)]
    rho: f64,
    /// Measurement-error variance; omit for error-free runs.
    #[arg(long)]
    sigma_e2: Option<f64>,
    /// How the error covariance reaches the corrected screen.
    #[arg(long, value_enum, default_value_t = KnowledgeArg::Known)]
    knowledge: KnowledgeArg,
    /// Replicates per subject in the repeated knowledge scenario.
    #[arg(long, default_value_t = 2)]
    replicates: usize,
    /// Validation sample size in the validation knowledge scenario.
    #[arg(long, default_value_t = 100)]
    m: usize,
    /// Subjects per replication.
    #[arg(long)]
    n: Option<usize>,
    /// Covariates per subject.
    #[arg(long)]
    p: Option<usize>,
    /// Number of Monte Carlo replications.
    #[arg(long)]
    replications: Option<usize>,
    /// Master seed.
    #[arg(long, default_value_t = 1729)]
    seed: u64,
    /// Target censoring rate.
    #[arg(long, default_value_t = 0.2)]
    censoring: f64,
    /// Active-set budget override.
    #[arg(long)]
    q: Option<usize>,
    /// Stage-one budget override.
    #[arg(long)]
    q1: Option<usize>,
    /// Use the full-size design: n = 400, p = 2000, 1000 replications.
    #[arg(long)]
    paper_scale: bool,
    /// Write the machine-readable result here instead of stdout.
    #[arg(long, value_name = "FILE")]
    out: Option<PathBuf>,
    /// Machine-readable output format.
    #[arg(long, value_enum, default_value_t = FormatArg::Json)]
    format: FormatArg,
}

#[derive(Args)]
#[command(group(clap::ArgGroup::new("source").required(true)))]
struct EstimateSigmaArgs {
    /// Repeated measurements CSV.
    #[arg(long, value_name = "FILE", group = "source")]
    repeats: Option<PathBuf>,
    /// Validation pairs CSV.
    #[arg(long, value_name = "FILE", group = "source")]
    validation: Option<PathBuf>,
    /// Write the covariance CSV here instead of stdout.
    #[arg(long, value_name = "FILE")]
    out: Option<PathBuf>,
}

/// Machine-readable result document shared by the subcommands.
#[derive(Serialize)]
struct ResultDoc<'a> {
    config: serde_json::Value,
    seed: Option<u64>,
    active_set: Option<Vec<ActiveRow>>,
    report: Option<&'a ExperimentReport>,
}

/// One selected covariate in the result document; indices are 1-based.
#[derive(Serialize)]
struct ActiveRow {
    index: usize,
    name: String,
    utility: f64,
    round: usize,
}

/// Echo of the resolved screen configuration.
#[derive(Serialize)]
struct ScreenEcho {
    data: String,
    n: usize,
    p: usize,
    screening: ScreeningConfig,
    iterate: bool,
    sigma_source: Option<SigmaSource>,
}

fn main() {
    env_logger::init();
    let cli = Cli::parse();
    if let Err(e) = setup_workers().and_then(|()| run(cli)) {
        eprintln!("{e}");
        std::process::exit(e.code());
    }
}

/// Applies the DCSCREEN_WORKERS override to the global thread pool.
fn setup_workers() -> CliResult<()> {
    match std::env::var("DCSCREEN_WORKERS") {
        Err(_) => Ok(()),
        Ok(v) => {
            let n: usize = v.trim().parse().map_err(|_| {
                CliError::Usage(format!("DCSCREEN_WORKERS must be a positive integer, got {v:?}"))
            })?;
            if n == 0 {
                return Err(CliError::Usage(
                    "DCSCREEN_WORKERS must be a positive integer, got 0".into(),
                ));
            }
            rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build_global()
                .map_err(|e| CliError::Data(format!("thread pool: {e}")))
        }
    }
}

fn run(cli: Cli) -> CliResult<()> {
    match cli.command {
        Command::Screen(args) => run_screen(args),
        Command::Simulate(args) => run_simulate(args),
        Command::EstimateSigma(args) => run_estimate_sigma(args),
    }
}

fn parse_threshold(raw: &str) -> CliResult<SelectionRule> {
    let parts: Vec<&str> = raw.split(',').collect();
    if parts.len() != 2 {
        return Err(CliError::Usage(format!(
            "--threshold takes `c,zeta`, got {raw:?}"
        )));
    }
    let c: f64 = parts[0]
        .trim()
        .parse()
        .map_err(|_| CliError::Usage(format!("threshold constant {:?} is not a number", parts[0])))?;
    let zeta: f64 = parts[1]
        .trim()
        .parse()
        .map_err(|_| CliError::Usage(format!("threshold exponent {:?} is not a number", parts[1])))?;
    Ok(SelectionRule::Threshold { c, zeta })
}

/// Resolves the error covariance requested by the screen flags.
fn resolve_sigma(args: &ScreenArgs, ds: &Dataset) -> CliResult<Option<ErrorCovariance>> {
    let sigma = if let Some(path) = &args.sigma_known {
        let (matrix, names) = io::load_sigma_csv(path)?;
        if names != ds.names {
            log::warn!("covariance column names do not match the dataset; using positional order");
        }
        Some(ErrorCovariance::new(matrix, SigmaSource::Known)?)
    } else if let Some(path) = &args.repeats {
        let (reps, _) = io::load_repeats_csv(path)?;
        Some(sigma_from_repeats(&reps)?)
    } else if let Some(path) = &args.validation {
        let (pairs, _) = io::load_validation_csv(path)?;
        Some(sigma_from_validation(&pairs)?)
    } else if let Some(s2) = args.assume_sigma {
        Some(assumed_diagonal(ds.p(), s2)?)
    } else {
        None
    };
    if let Some(sig) = &sigma {
        if sig.dim() != ds.p() {
            return Err(CliError::Data(format!(
                "error covariance is {} by {} but the dataset has {} covariates",
                sig.dim(),
                sig.dim(),
                ds.p()
            )));
        }
    }
    Ok(sigma)
}

fn run_screen(args: ScreenArgs) -> CliResult<()> {
    let ds = io::load_main_csv(&args.data)?;
    let sigma = resolve_sigma(&args, &ds)?;
    let mode = match args.mode {
        ModeArg::Naive => CorrectionMode::Naive,
        ModeArg::Corrected => CorrectionMode::Corrected,
    };
    if mode == CorrectionMode::Corrected && sigma.is_none() {
        return Err(CliError::Usage(
            "corrected mode needs an error covariance source: \
             --sigma-known, --repeats, --validation, or --assume-sigma"
                .into(),
        ));
    }
    let n = ds.n();
    let p = ds.p();
    let q = args.q.unwrap_or_else(|| default_q(n, p));
    let rule = match &args.threshold {
        Some(raw) => parse_threshold(raw)?,
        None => SelectionRule::TopQ,
    };
    let config = ScreeningConfig {
        n,
        p,
        q,
        q1: args.q1.unwrap_or_else(|| default_q1(q)),
        mode,
        rule,
        max_rounds: q.max(1),
    };
    config.validate().map_err(|e| CliError::Usage(e.to_string()))?;

    let sample = CensoredSample::new(ds.time.clone(), ds.status.clone())?;
    let imputed = impute_response(&sample)?;
    let entries: Vec<ActiveEntry> = if args.iterate {
        let sig = sigma
            .clone()
            .unwrap_or_else(|| ErrorCovariance::zero(p));
        let result = iterative_screen(&imputed, ds.x.view(), &sig, &config)?;
        result.active.entries().to_vec()
    } else {
        let utilities = dcscreen::dcorr::marginal_sweep(&imputed, ds.x.view())?;
        select(&utilities, &config)?.entries().to_vec()
    };
    let active_set: Vec<ActiveRow> = entries
        .iter()
        .map(|e| ActiveRow {
            index: e.index + 1,
            name: ds.names[e.index].clone(),
            utility: e.utility,
            round: e.round,
        })
        .collect();

    let echo = ScreenEcho {
        data: args.data.display().to_string(),
        n,
        p,
        screening: config,
        iterate: args.iterate,
        sigma_source: sigma.as_ref().map(|s| s.source()),
    };
    let doc = ResultDoc {
        config: serde_json::to_value(&echo).map_err(|e| CliError::Data(e.to_string()))?,
        seed: None,
        active_set: Some(active_set),
        report: None,
    };
    let rendered = match args.format {
        FormatArg::Json => render_json(&doc)?,
        FormatArg::Csv => render_screen_csv(doc.active_set.as_deref().unwrap_or(&[])),
    };
    match &args.out {
        Some(path) => {
            std::fs::write(path, rendered)?;
            print_screen_table(doc.active_set.as_deref().unwrap_or(&[]));
        }
        None => print!("{rendered}"),
    }
    Ok(())
}

fn render_json(doc: &ResultDoc) -> CliResult<String> {
    let mut s = serde_json::to_string_pretty(doc).map_err(|e| CliError::Data(e.to_string()))?;
    s.push('\n');
    Ok(s)
}

fn render_screen_csv(rows: &[ActiveRow]) -> String {
    let mut out = String::from("rank,index,name,utility,round\n");
    for (rank, row) in rows.iter().enumerate() {
        out.push_str(&format!(
            "{},{},{},{},{}\n",
            rank + 1,
            row.index,
            row.name,
            row.utility,
            row.round
        ));
    }
    out
}

fn print_screen_table(rows: &[ActiveRow]) {
    println!("{:>5}  {:>7}  {:<24}  {:>12}  {:>5}", "rank", "index", "name", "utility", "round");
    for (rank, row) in rows.iter().enumerate() {
        println!(
            "{:>5}  {:>7}  {:<24}  {:>12.6}  {:>5}",
            rank + 1,
            row.index,
            row.name,
            row.utility,
            row.round
        );
    }
}

fn run_simulate(args: SimulateArgs) -> CliResult<()> {
    let model = match args.model {
        ModelArg::Ph => ModelKind::Ph,
        ModelArg::Po => ModelKind::Po,
    };
    let knowledge = match args.knowledge {
        KnowledgeArg::Known => Knowledge::Known,
        KnowledgeArg::Repeated => Knowledge::Repeated {
            replicates: args.replicates,
        },
        KnowledgeArg::Validation => Knowledge::Validation { m: args.m },
        KnowledgeArg::ErrorFree => Knowledge::ErrorFree,
    };
    let mut cfg = ScenarioConfig::desk(model, args.rho, args.sigma_e2, knowledge);
    if args.paper_scale {
        cfg = cfg.paper_scale();
        log::warn!("paper-scale run: this takes orders of magnitude longer than desk scale");
    }
    if let Some(n) = args.n {
        cfg.n = n;
    }
    if let Some(p) = args.p {
        cfg.p = p;
    }
    if let Some(r) = args.replications {
        cfg.replications = r;
    }
    cfg.seed = args.seed;
    cfg.censoring_target = args.censoring;
    cfg.q = args.q;
    cfg.q1 = args.q1;
    cfg.validate().map_err(|e| CliError::Usage(e.to_string()))?;

    let report = run_experiment(&cfg)?;
    let doc = ResultDoc {
        config: serde_json::to_value(&cfg).map_err(|e| CliError::Data(e.to_string()))?,
        seed: Some(cfg.seed),
        active_set: None,
        report: Some(&report),
    };
    let rendered = match args.format {
        FormatArg::Json => render_json(&doc)?,
        FormatArg::Csv => report.to_csv(),
    };
    match &args.out {
        Some(path) => {
            std::fs::write(path, rendered)?;
            print!("{}", report.to_csv());
        }
        None => print!("{rendered}"),
    }
    Ok(())
}

fn run_estimate_sigma(args: EstimateSigmaArgs) -> CliResult<()> {
    let (sigma, names) = if let Some(path) = &args.repeats {
        let (reps, names) = io::load_repeats_csv(path)?;
        (sigma_from_repeats(&reps)?, names)
    } else if let Some(path) = &args.validation {
        let (pairs, names) = io::load_validation_csv(path)?;
        (sigma_from_validation(&pairs)?, names)
    } else {
        return Err(CliError::Usage(
            "estimate-sigma needs --repeats or --validation".into(),
        ));
    };
    if sigma.was_projected() {
        log::warn!("estimated covariance was projected onto the nearest positive semidefinite matrix");
    }
    match &args.out {
        Some(path) => io::write_sigma_csv(path, &names, sigma.matrix())?,
        None => print!("{}", io::sigma_csv(&names, sigma.matrix())),
    }
    Ok(())
}
