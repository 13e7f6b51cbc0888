use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use decompound::asymptotics::{default_grid, matrix_csv, CovarianceReport};
use decompound::estimators::{EstimateSet, SpectralEstimator};
use decompound::harness::bands::build_bands;
use decompound::harness::io::{errors_csv, increments_csv, read_increments, read_json, write_atomic, write_json};
use decompound::harness::{run_montecarlo_with_threads, EstimateConfig, ExperimentPlan, OracleConfig};
use decompound::model::{simulate, ModelSpec};
use decompound::{Error, Result};

#[derive(Parser)]
#[command(name = "decompound", version, about = "Spectral inference for discretely observed compound Poisson processes")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate `n` increments of a model and write them as a `z` CSV.
    Simulate {
        /// Model JSON.
        #[arg(long)]
        config: PathBuf,
        #[arg(short, long)]
        n: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Estimate every quantity from an increments CSV.
    Estimate {
        /// Increments CSV with the single column `z`.
        input: PathBuf,
        /// Estimation settings JSON.
        #[arg(long)]
        config: PathBuf,
        /// Optional true model, adds remainder diagnostics.
        #[arg(long)]
        reference: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Exact limiting covariances of a model. Writes the report JSON and
    /// `<stem>_sigma_n.csv`, `<stem>_sigma_f.csv` next to it.
    Oracle {
        /// Model JSON.
        model: PathBuf,
        /// Optional grid/tolerance JSON.
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Monte Carlo run of a plan. Writes `report.json` and `errors.csv` into `--out`.
    Montecarlo {
        /// Plan JSON.
        #[arg(long)]
        config: PathBuf,
        /// Overrides the plan seed.
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        threads: Option<usize>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Pointwise and uniform bands for F from an estimate and an oracle report.
    Bands {
        #[arg(long)]
        estimates: PathBuf,
        #[arg(long)]
        oracle: PathBuf,
        #[arg(long, default_value_t = 0.95)]
        level: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
}

fn sibling(path: &Path, suffix: &str) -> PathBuf {
    let stem = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_else(|| "oracle".into());
    path.with_file_name(format!("{stem}_{suffix}.csv"))
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Simulate { config, n, seed, out } => {
            let model: ModelSpec = read_json(&config)?;
            let triple = model.to_triple()?;
            let sample = simulate(&triple, model.delta, n, seed)?;
            write_atomic(&out, &increments_csv(&sample.values)?)
        }
        Command::Estimate { input, config, reference, out } => {
            let cfg: EstimateConfig = read_json(&config)?;
            cfg.validate()?;
            let reference = match reference {
                Some(p) => Some(read_json::<ModelSpec>(&p)?.to_triple()?),
                None => None,
            };
            let sample = read_increments(&input, cfg.delta)?;
            let est = SpectralEstimator::from_sample(&sample, cfg.atom_spacing, &cfg.spectral)?;
            let set = est.estimate_set(&cfg.grid(), cfg.isotonic, reference.as_ref())?;
            write_json(&out, &set)
        }
        Command::Oracle { model, config, out } => {
            let model: ModelSpec = read_json(&model)?;
            let cfg = match config {
                Some(p) => read_json(&p)?,
                None => OracleConfig::default(),
            };
            let triple = model.to_triple()?;
            let ts = cfg.ts.unwrap_or_else(|| default_grid(model.atom_spacing));
            let report = CovarianceReport::compute(&triple, model.delta, cfg.series_tol, &ts)?;
            write_json(&out, &report)?;
            write_atomic(&sibling(&out, "sigma_n"), matrix_csv(&ts, &report.exact.sigma_n).as_bytes())?;
            write_atomic(&sibling(&out, "sigma_f"), matrix_csv(&ts, &report.exact.sigma_f).as_bytes())
        }
        Command::Montecarlo { config, seed, threads, out } => {
            let mut plan: ExperimentPlan = read_json(&config)?;
            if let Some(s) = seed {
                plan.seed = s;
            }
            let run = run_montecarlo_with_threads(&plan, threads)?;
            std::fs::create_dir_all(&out)?;
            write_json(&out.join("report.json"), &run.report)?;
            write_atomic(&out.join("errors.csv"), &errors_csv(&run.errors)?)
        }
        Command::Bands { estimates, oracle, level, seed, out } => {
            let set: EstimateSet = read_json(&estimates)?;
            let report: CovarianceReport = read_json(&oracle)?;
            if !(level > 0.0 && level < 1.0) {
                return Err(Error::Config(format!("level must lie in (0, 1), got {level}")));
            }
            let bands = build_bands(&set, &report, level, seed)?;
            write_atomic(&out, &bands.to_csv()?)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
