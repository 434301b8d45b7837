use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use holevo_lab::error::{LabError, Result};
use holevo_lab::experiments::{self, ExperimentConfig, ExperimentKind, ScanFile};
use holevo_lab::linalg::LogBase;

#[derive(Parser)]
#[command(name = "holevo-lab", version, about = "Random-channel and concentration experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Mean of the reshaped operator norm of Haar vectors.
    HaarOpnormMean(RunArgs),
    /// Mean purity deviation of reshaped Haar vectors.
    HaarFroMean(RunArgs),
    /// Witness-state certificates for random subspace channels.
    HaydenWinter(RunArgs),
    /// Frame potential and moments of Haar or brickwork unitaries.
    DesignQuality(RunArgs),
    /// Empirical tails of a Lipschitz function on the sphere.
    LevyTails(RunArgs),
    /// Largest deviation of a function over random subspaces.
    SubspaceVariation(RunArgs),
    /// Build and check a monotone polynomial envelope.
    PolyEnvelope(RunArgs),
    /// Estimated additivity gap for conjugate channel pairs.
    AdditivityGap(RunArgs),
    /// Run every config in a TOML scan file.
    Scan(ScanArgs),
}

#[derive(Args)]
struct RunArgs {
    /// TOML config; flags below override its values.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    k: Option<usize>,
    #[arg(long)]
    d: Option<usize>,
    #[arg(long)]
    m: Option<usize>,
    #[arg(long)]
    p: Option<f64>,
    #[arg(long)]
    t: Option<usize>,
    #[arg(long)]
    depth: Option<usize>,
    #[arg(long = "samples")]
    n_samples: Option<usize>,
    #[arg(long)]
    eps: Option<f64>,
    #[arg(long)]
    lambda: Option<f64>,
    #[arg(long)]
    j: Option<f64>,
    #[arg(long)]
    precision_bits: Option<u32>,
    #[arg(long)]
    restarts: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    stream: Option<u64>,
    /// Output JSON path; the CSV goes next to it.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    parallel: bool,
    #[arg(long, value_parser = parse_log_base)]
    log_base: Option<LogBase>,
}

#[derive(Args)]
struct ScanArgs {
    #[arg(long)]
    file: PathBuf,
    /// Index path; defaults to the file's `index` key or `scan-index.json`.
    #[arg(long)]
    index: Option<PathBuf>,
    #[arg(long)]
    parallel: bool,
}

fn parse_log_base(s: &str) -> std::result::Result<LogBase, String> {
    match s {
        "bits" | "2" => Ok(LogBase::Bits),
        "nats" | "e" => Ok(LogBase::Nats),
        _ => Err(format!("expected `bits` or `nats`, got `{s}`")),
    }
}

fn build_config(kind: ExperimentKind, a: RunArgs) -> Result<ExperimentConfig> {
    let mut c = match &a.config {
        Some(path) => {
            let c = ExperimentConfig::from_file(path)?;
            if c.experiment != kind {
                return Err(LabError::Validation(format!(
                    "config is for `{}` but the subcommand is `{kind}`",
                    c.experiment
                )));
            }
            c
        }
        None => ExperimentConfig::new(kind, a.out.clone().unwrap_or_else(|| format!("{kind}.json").into())),
    };
    macro_rules! over {
        ($($f:ident),*) => { $( if a.$f.is_some() { c.$f = a.$f; } )* };
    }
    over!(k, d, m, p, t, depth, n_samples, eps, lambda, j, precision_bits, restarts);
    if let Some(s) = a.seed {
        c.seed = s;
    }
    if let Some(s) = a.stream {
        c.stream = s;
    }
    if let Some(o) = a.out {
        c.out_path = o;
    }
    if let Some(b) = a.log_base {
        c.log_base = b;
    }
    c.parallel |= a.parallel;
    Ok(c)
}

fn run_one(kind: ExperimentKind, a: RunArgs) -> Result<()> {
    let cfg = build_config(kind, a)?;
    let r = experiments::run(&cfg)?;
    let s = &r.summary;
    println!(
        "{kind}: {} = {:.6} +- {:.2e} over {} rows -> {}",
        s.metric,
        s.mean,
        s.stderr,
        s.n,
        cfg.out_path.display()
    );
    for b in &s.bounds {
        if b.value.is_finite() {
            println!("  {:?} {}: {}", b.direction, b.quantity, b.value);
        }
    }
    Ok(())
}

fn run_scan(a: ScanArgs) -> Result<()> {
    let file = ScanFile::from_file(&a.file)?;
    let index = a.index.or(file.index).unwrap_or_else(|| "scan-index.json".into());
    let (idx, _) = experiments::scan(&file.run, a.parallel || file.parallel, &index)?;
    for e in &idx.entries {
        match &e.error {
            None => println!("ok    {} {}", e.experiment, e.out_path.display()),
            Some(msg) => println!("FAIL  {} {}: {msg}", e.experiment, e.out_path.display()),
        }
    }
    println!("{} of {} runs failed; index at {}", idx.failures(), idx.entries.len(), index.display());
    if idx.failures() > 0 {
        return Err(LabError::Validation(format!("{} scan entries failed", idx.failures())));
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Err(e) = experiments::init_threads_from_env() {
        eprintln!("error: {e}");
        return ExitCode::from(e.exit_code() as u8);
    }
    let res = match cli.command {
        Command::HaarOpnormMean(a) => run_one(ExperimentKind::HaarOpnormMean, a),
        Command::HaarFroMean(a) => run_one(ExperimentKind::HaarFroMean, a),
        Command::HaydenWinter(a) => run_one(ExperimentKind::HaydenWinter, a),
        Command::DesignQuality(a) => run_one(ExperimentKind::DesignQuality, a),
        Command::LevyTails(a) => run_one(ExperimentKind::LevyTails, a),
        Command::SubspaceVariation(a) => run_one(ExperimentKind::SubspaceVariation, a),
        Command::PolyEnvelope(a) => run_one(ExperimentKind::PolyEnvelope, a),
        Command::AdditivityGap(a) => run_one(ExperimentKind::AdditivityGap, a),
        Command::Scan(a) => run_scan(a),
    };
    match res {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
