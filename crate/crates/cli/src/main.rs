//! `hrris-sim`: runs figure presets or config-file sweeps and writes CSV data
//! plus a manifest per sweep.

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use hrris::experiment::{
    preset, run_experiment_with, write_csv, write_manifest, Execution, ExperimentSpec, Manifest,
    Scheme, FAST_TRIALS,
};
use log::info;

#[derive(Debug, Parser)]
#[command(
    name = "hrris-sim",
    version,
    about = "HR-RIS spectral- and energy-efficiency sweeps"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Runs the sweeps of a figure preset (`fig4`) or of one of its sweeps
    /// (`fig4_pa0dBm`).
    Run {
        #[arg(long)]
        figure: String,
        #[command(flatten)]
        overrides: Overrides,
    },
    /// Runs the sweep described by a key-value config file.
    Sweep {
        #[arg(long)]
        config: PathBuf,
        /// Replaces the figure id of the file.
        #[arg(long)]
        figure: Option<String>,
        #[command(flatten)]
        overrides: Overrides,
    },
}

#[derive(Debug, Args)]
struct Overrides {
    /// Output directory.
    #[arg(long = "out-dir", visible_alias = "out", default_value = "results")]
    out_dir: PathBuf,
    /// Channel realizations per sweep point.
    #[arg(long)]
    trials: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// Uses the reduced trial count unless `--trials` is given.
    #[arg(long)]
    fast: bool,
    /// Comma-separated sweep values.
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    sweep: Option<Vec<f64>>,
    /// Comma-separated schemes, or repeated.
    #[arg(long = "scheme", value_delimiter = ',')]
    schemes: Vec<Scheme>,
    /// Runs trials on one thread.
    #[arg(long)]
    sequential: bool,
}

impl Overrides {
    fn apply(&self, spec: &mut ExperimentSpec) {
        if let Some(t) = self.trials {
            spec.trials = t;
        } else if self.fast {
            spec.trials = FAST_TRIALS;
        }
        if let Some(s) = self.seed {
            spec.seed = s;
        }
        if let Some(v) = &self.sweep {
            spec.sweep_values = v.clone();
        }
        if !self.schemes.is_empty() {
            spec.schemes = self.schemes.clone();
        }
    }

    fn execution(&self) -> Execution {
        if self.sequential {
            Execution::Sequential
        } else {
            Execution::Parallel
        }
    }
}

fn run_spec(spec: &ExperimentSpec, out_dir: &Path, execution: Execution) -> Result<()> {
    let started = Instant::now();
    info!(
        "{}: {} schemes x {} points x {} trials",
        spec.figure_id,
        spec.schemes.len(),
        spec.sweep_values.len(),
        spec.trials
    );
    let result = run_experiment_with(spec, execution)?;
    let csv_name = format!("{}.csv", spec.figure_id);
    let csv_path = out_dir.join(&csv_name);
    write_csv(&result, &csv_path)?;
    let manifest = Manifest::new(spec, &result, &csv_name, execution == Execution::Parallel);
    write_manifest(
        &manifest,
        &out_dir.join(format!("{}.manifest.toml", spec.figure_id)),
    )?;
    info!(
        "{}: {} resampled channels, {:.1}s",
        spec.figure_id,
        result.total_resamples(),
        started.elapsed().as_secs_f64()
    );
    println!("{}", csv_path.display());
    Ok(())
}

fn run(cli: Cli) -> Result<()> {
    let (mut specs, overrides) = match &cli.command {
        Command::Run { figure, overrides } => (preset(figure)?, overrides),
        Command::Sweep {
            config,
            figure,
            overrides,
        } => {
            let text = std::fs::read_to_string(config)
                .with_context(|| format!("reading {}", config.display()))?;
            let mut spec = ExperimentSpec::from_config(&text)
                .with_context(|| format!("parsing {}", config.display()))?;
            if let Some(f) = figure {
                spec.figure_id = f.clone();
            }
            (vec![spec], overrides)
        }
    };
    for spec in &mut specs {
        overrides.apply(spec);
        if spec.figure_id.is_empty() || spec.figure_id.contains(['/', '\\']) {
            bail!("figure id `{}` cannot name an output file", spec.figure_id);
        }
        spec.validate()?;
    }
    for spec in &specs {
        run_spec(spec, &overrides.out_dir, overrides.execution())?;
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
