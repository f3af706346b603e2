use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use ctxband_core::environments::certify_constants;
use ctxband_core::harness::{self, assemble, ExperimentConfig, OutputSpec, RunOptions, Seeds};
use ctxband_core::randomness::SeedStream;
use ctxband_core::regret::{rate_fit, RatePoints};
use ctxband_core::{Error, Result};

#[derive(Parser)]
#[command(
    name = "ctxband",
    version,
    about = "Contextual bandit simulations with reproducible transcripts"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run every seed of a config and print the summary.
    Run(RunArgs),
    /// Run a config over several horizons and fit the regret exponent.
    Sweep(SweepArgs),
    /// Sample the declared loss constants.
    Certify(CertifyArgs),
    /// Fit log R against log T from a two-column CSV (T, R).
    Fit { csv: PathBuf },
}

#[derive(Args)]
struct RunArgs {
    config: PathBuf,
    /// Run only this seed.
    #[arg(long, conflicts_with = "seeds")]
    seed: Option<u64>,
    /// Run seeds 0..N.
    #[arg(long)]
    seeds: Option<u64>,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Also write one CSV transcript per seed (needs --out or [output]).
    #[arg(long)]
    transcript: bool,
    #[arg(long)]
    horizon: Option<u64>,
    /// Worker cap; defaults to CTXBAND_WORKERS, then the core count.
    #[arg(long)]
    workers: Option<usize>,
}

#[derive(Args)]
struct SweepArgs {
    config: PathBuf,
    /// `2^a..2^b` or a comma list.
    #[arg(long, default_value = "2^10..2^16")]
    horizons: String,
    #[arg(long)]
    workers: Option<usize>,
    /// Write the report here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct CertifyArgs {
    config: PathBuf,
    #[arg(long, default_value_t = 10_000)]
    samples: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

fn run(args: RunArgs) -> Result<()> {
    let mut cfg = ExperimentConfig::from_path(&args.config)?;
    if let Some(s) = args.seed {
        cfg.seeds = Seeds::List(vec![s]);
    }
    if let Some(n) = args.seeds {
        cfg.seeds = Seeds::Count(n);
    }
    if let Some(dir) = args.out {
        cfg.output = Some(OutputSpec {
            dir,
            transcript: args.transcript,
        });
    } else if let Some(out) = cfg.output.as_mut() {
        out.transcript |= args.transcript;
    } else if args.transcript {
        return Err(Error::Config(
            "--transcript needs --out or an [output] table".into(),
        ));
    }
    let summary = harness::run_experiment(
        &cfg,
        &RunOptions {
            workers: args.workers,
            horizon: args.horizon,
        },
    )?;
    print!("{}", summary.to_json());
    eprintln!("wall-clock: {:.3} s", summary.wall_clock.as_secs_f64());
    Ok(())
}

fn sweep(args: SweepArgs) -> Result<()> {
    let cfg = ExperimentConfig::from_path(&args.config)?;
    let horizons = harness::parse_horizons(&args.horizons)?;
    let report = harness::sweep_rates(&cfg, &horizons, args.workers)?;
    let text = serde_json::to_string_pretty(&report).expect("report serializes") + "\n";
    match args.out {
        Some(path) => std::fs::write(path, text)?,
        None => print!("{text}"),
    }
    Ok(())
}

fn certify(args: CertifyArgs) -> Result<()> {
    let cfg = ExperimentConfig::from_path(&args.config)?;
    let asm = assemble(&cfg, cfg.horizon)?;
    let report = certify_constants(
        &asm.model,
        args.samples,
        &SeedStream::new(args.seed).child("certify"),
    )?;
    let c = asm.model.constants();
    println!("samples           {}", report.samples);
    println!(
        "hoelder ratio     {:.6e} (L = {})",
        report.max_hoelder_ratio, c.lipschitz
    );
    println!(
        "hessian spectrum  [{:.6e}, {:.6e}] (alpha = {}, beta = {})",
        report.min_eigenvalue, report.max_eigenvalue, c.alpha, c.beta
    );
    println!(
        "max |f|           {:.6e} (M = {})",
        report.max_abs_value, c.sup_bound
    );
    Ok(())
}

fn fit(path: PathBuf) -> Result<()> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .from_path(&path)
        .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
    let (mut ts, mut rs) = (Vec::new(), Vec::new());
    for (i, row) in reader.records().enumerate() {
        let row = row.map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        let parsed = (
            row.get(0).and_then(|v| v.parse::<f64>().ok()),
            row.get(1).and_then(|v| v.parse::<f64>().ok()),
        );
        match parsed {
            (Some(t), Some(r)) => {
                ts.push(t);
                rs.push(r);
            }
            // a header line
            _ if i == 0 => {}
            _ => {
                return Err(Error::Config(format!(
                    "{}: row {} is not two numbers",
                    path.display(),
                    i + 1
                )))
            }
        }
    }
    let fit = rate_fit(&RatePoints::new(ts, rs)?)?;
    println!(
        "slope {}\nintercept {}\nmax_residual {}",
        fit.slope, fit.intercept, fit.max_residual
    );
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run(a) => run(a),
        Command::Sweep(a) => sweep(a),
        Command::Certify(a) => certify(a),
        Command::Fit { csv } => fit(csv),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
