use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use pfmc::config::{ExperimentConfig, PlotSpec};
use pfmc::exec::RayonExecutor;
use pfmc::output;
use pfmc::runner::{run_experiment, run_oracle};

/// Mixed-Pfaffian Monte Carlo for paired fermionic states under
/// number-preserving linear optics.
#[derive(Parser)]
#[command(name = "pfmc", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the estimators described by an experiment config.
    Run {
        config: PathBuf,
        /// Override the config seed.
        #[arg(long)]
        seed: Option<u64>,
        /// Worker threads (default: PFMC_THREADS or all cores).
        #[arg(long)]
        threads: Option<usize>,
        /// Output directory (default: config's output_path or ".").
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Check a config against the schema and input invariants.
    Validate { config: PathBuf },
    /// Run the brute-force oracle path on guard-sized inputs.
    Oracle {
        config: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Reshape a result CSV into tidy (x, y, yerr, series) plot data.
    Plotdata {
        result: PathBuf,
        plotspec: PathBuf,
        /// Output file (default: stdout).
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

const EXIT_VALIDATION: u8 = 2;
const EXIT_CAPACITY: u8 = 3;

fn main() -> ExitCode {
    let cli = Cli::parse();
    match main_inner(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err:#}");
            match err.downcast_ref::<pfmc_core::Error>() {
                Some(pfmc_core::Error::Validation(_)) => ExitCode::from(EXIT_VALIDATION),
                Some(pfmc_core::Error::Capacity { .. }) => ExitCode::from(EXIT_CAPACITY),
                None => ExitCode::FAILURE,
            }
        }
    }
}

fn load_config(path: &PathBuf, seed: Option<u64>) -> anyhow::Result<ExperimentConfig> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| anyhow::anyhow!("cannot read {}: {e}", path.display()))?;
    let mut cfg = ExperimentConfig::from_json(&text)?;
    if let Some(s) = seed {
        cfg.seed = s;
    }
    Ok(cfg)
}

fn thread_count(flag: Option<usize>) -> usize {
    flag.or_else(|| {
        std::env::var("PFMC_THREADS")
            .ok()
            .and_then(|v| v.parse().ok())
    })
    .unwrap_or_else(|| {
        std::thread::available_parallelism()
            .map(|n| n.get())
            .unwrap_or(1)
    })
}

fn stem_of(config: &PathBuf, suffix: &str) -> String {
    let base = config
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "result".into());
    format!("{base}{suffix}")
}

fn main_inner(cli: Cli) -> anyhow::Result<()> {
    match cli.command {
        Command::Run {
            config,
            seed,
            threads,
            out,
        } => {
            let cfg = load_config(&config, seed)?;
            let exec = RayonExecutor::new(thread_count(threads))?;
            let result = run_experiment(&cfg, &exec)?;
            let dir = out
                .or_else(|| cfg.output_path.clone())
                .unwrap_or_else(|| PathBuf::from("."));
            let (csv, meta) = output::write_result(&dir, &stem_of(&config, ""), &cfg, &result)?;
            println!("wrote {} and {}", csv.display(), meta.display());
            Ok(())
        }
        Command::Validate { config } => {
            let cfg = load_config(&config, None)?;
            // a full dispatch resolution without sampling: reuse the oracle
            // path's input resolution by validating budget and inputs
            pfmc_core::sampling::validate_budget(cfg.budget.eps, cfg.budget.delta)?;
            pfmc::runner::validate_inputs(&cfg)?;
            println!("config ok: kind={} seed={}", cfg.kind, cfg.seed);
            Ok(())
        }
        Command::Oracle { config, seed, out } => {
            let cfg = load_config(&config, seed)?;
            let result = run_oracle(&cfg)?;
            let dir = out
                .or_else(|| cfg.output_path.clone())
                .unwrap_or_else(|| PathBuf::from("."));
            let (csv, meta) =
                output::write_result(&dir, &stem_of(&config, ".oracle"), &cfg, &result)?;
            println!("wrote {} and {}", csv.display(), meta.display());
            Ok(())
        }
        Command::Plotdata {
            result,
            plotspec,
            out,
        } => {
            let rows = output::parse_csv(&std::fs::read_to_string(&result)?)?;
            let spec: PlotSpec = serde_json::from_str(&std::fs::read_to_string(&plotspec)?)
                .map_err(|e| pfmc_core::Error::Validation(format!("plot spec: {e}")))?;
            let table = pfmc::plotdata::render_plot_data(&rows, &spec)?;
            match out {
                Some(path) => std::fs::write(&path, table)?,
                None => print!("{table}"),
            }
            Ok(())
        }
    }
}
