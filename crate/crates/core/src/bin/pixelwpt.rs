use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use pixelwpt::antenna::{synthesize_antenna, AntennaConfig};
use pixelwpt::harness::{self, Coding, Experiment, ExperimentConfig, SweepAxis};
use pixelwpt::{Error, Result};

#[derive(Parser)]
#[command(name = "pixelwpt", version, about = "Pixel-antenna MIMO wireless power transfer experiments")]
struct Cli {
    /// Overrides `master_seed` of the config.
    #[arg(long, env = "PIXELWPT_SEED", global = true, hide_env_values = true)]
    master_seed: Option<String>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one Monte Carlo experiment and write its CSV.
    Run {
        #[arg(long)]
        config: PathBuf,
        /// Output CSV; stdout when absent.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        workers: Option<usize>,
        /// Full-size antenna geometry and 1000 trials.
        #[arg(long)]
        paper_scale: bool,
        /// Fixed-configuration coder as a bit string of length q.
        #[arg(long)]
        baseline_coder: Option<String>,
    },
    /// Run paired trials under several codings.
    Compare {
        #[arg(long)]
        config: PathBuf,
        /// Comma-separated codings, e.g. fixed,binary,continuous.
        #[arg(long, value_delimiter = ',', default_value = "fixed,binary")]
        codings: Vec<String>,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        workers: Option<usize>,
        #[arg(long)]
        paper_scale: bool,
        #[arg(long)]
        baseline_coder: Option<String>,
    },
    /// One summary row per axis value on shared seeds.
    Sweep {
        #[arg(long)]
        config: PathBuf,
        /// receive_antennas or codebook_size.
        #[arg(long)]
        axis: String,
        #[arg(long, value_delimiter = ',', required = true)]
        values: Vec<usize>,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        workers: Option<usize>,
    },
    /// Train a codebook on optimized coders of random training channels.
    TrainCodebook {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        pool_channels: usize,
        #[arg(long)]
        size: usize,
        #[arg(long)]
        out: PathBuf,
    },
    /// Write a synthetic antenna as JSON.
    GenAntenna {
        #[arg(long)]
        seed: u64,
        #[arg(long)]
        q: usize,
        #[arg(long)]
        k: usize,
        #[arg(long)]
        rank: usize,
        #[arg(long)]
        out: PathBuf,
    },
}

fn load(path: &Path, seed: Option<&str>, workers: Option<usize>, paper_scale: bool) -> Result<ExperimentConfig> {
    let mut cfg = ExperimentConfig::load(path)
        .map_err(|e| Error::ConfigInvalid {
        field: "config".into(),
        reason: format!("{}: {e}", path.display()),
    })?;
    if paper_scale {
        cfg = cfg.paper_scale();
    }
    cfg.apply_seed_override(seed)?;
    if let Some(w) = workers {
        cfg.workers = w;
    }
    Ok(cfg)
}

fn emit(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(p) => Ok(std::fs::write(p, text)?),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn main_inner(cli: Cli) -> Result<()> {
    let seed = cli.master_seed.as_deref();
    match cli.command {
        Command::Run {
            config,
            out,
            workers,
            paper_scale,
            baseline_coder,
        } => {
            let mut cfg = load(&config, seed, workers, paper_scale)?;
            if baseline_coder.is_some() {
                cfg.baseline_coder = baseline_coder;
            }
            let report = harness::run_experiment(&cfg)?;
            emit(out.as_deref(), &report.to_csv())
        }
        Command::Compare {
            config,
            codings,
            out,
            workers,
            paper_scale,
            baseline_coder,
        } => {
            let mut cfg = load(&config, seed, workers, paper_scale)?;
            if baseline_coder.is_some() {
                cfg.baseline_coder = baseline_coder;
            }
            let codings = codings.iter().map(|c| Coding::parse(c.trim())).collect::<Result<Vec<_>>>()?;
            if codings.contains(&Coding::Codebook) {
                cfg.coding = Coding::Codebook;
            }
            let report = harness::compare(&cfg, &codings)?;
            emit(out.as_deref(), &report.to_csv())
        }
        Command::Sweep {
            config,
            axis,
            values,
            out,
            workers,
        } => {
            let cfg = load(&config, seed, workers, false)?;
            let axis = SweepAxis::parse(&axis)?;
            let rows = harness::sweep(&cfg, axis, &values)?;
            emit(out.as_deref(), &harness::sweep_csv(&cfg, axis, &rows))
        }
        Command::TrainCodebook {
            config,
            pool_channels,
            size,
            out,
        } => {
            let mut cfg = load(&config, seed, None, false)?;
            // Training does not deploy, so an existing codebook is not needed.
            cfg.coding = Coding::Binary;
            let report = Experiment::new(cfg)?.train_codebook(pool_channels, size)?;
            report.codebook.save(&out)?;
            eprintln!(
                "trained {} codewords in {} iterations, final distortion {:.6}, {} duplicates",
                report.codebook.d(),
                report.iterations,
                report.distortions.last().copied().unwrap_or(f64::NAN),
                report.duplicates
            );
            Ok(())
        }
        Command::GenAntenna { seed, q, k, rank, out } => {
            let net = synthesize_antenna(seed, q, k, rank, &AntennaConfig::default())?;
            Ok(std::fs::write(out, net.to_json()?)?)
        }
    }
}

fn main() -> ExitCode {
    match main_inner(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
