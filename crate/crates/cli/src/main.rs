use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use dollard_cli::{exit, run, validate, CliError, ExperimentConfig, ExperimentKind, RunOptions};

#[derive(Parser)]
#[command(
    name = "dollard-lab",
    version,
    about = "Numerical experiments on Dollard-modified scattering"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the experiment described by a config file.
    Run {
        config: PathBuf,
        /// Worker threads for independent jobs.
        #[arg(long, env = "DOLLARD_LAB_WORKERS")]
        workers: Option<usize>,
        /// Output directory (overrides `output.dir`).
        #[arg(long)]
        out: Option<PathBuf>,
        /// Replace a config value, e.g. `--override potential.alpha=0`.
        #[arg(long = "override", value_name = "KEY=VALUE")]
        overrides: Vec<String>,
    },
    /// Check a config without running it.
    Validate {
        config: PathBuf,
        #[arg(long = "override", value_name = "KEY=VALUE")]
        overrides: Vec<String>,
    },
    /// Print the experiment catalog.
    ListExperiments,
}

fn fail(e: &CliError) -> ExitCode {
    eprintln!("error: {e}");
    ExitCode::from(e.exit_code())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.command {
        Command::ListExperiments => {
            for kind in ExperimentKind::ALL {
                println!("{:<24} {}", kind.name(), kind.description());
            }
            ExitCode::SUCCESS
        }
        Command::Validate { config, overrides } => {
            let cfg = match ExperimentConfig::load(&config, &overrides) {
                Ok(cfg) => cfg,
                Err(e) => return fail(&e),
            };
            let diagnostics = validate(&cfg);
            if diagnostics.is_empty() {
                println!("{}: ok ({})", config.display(), cfg.experiment);
                ExitCode::SUCCESS
            } else {
                for d in &diagnostics {
                    eprintln!("{}: {d}", config.display());
                }
                ExitCode::from(exit::CONFIG_ERROR)
            }
        }
        Command::Run {
            config,
            workers,
            out,
            overrides,
        } => {
            let cfg = match ExperimentConfig::load(&config, &overrides) {
                Ok(cfg) => cfg,
                Err(e) => return fail(&e),
            };
            let workers = workers
                .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()));
            let outcome = match run(
                &cfg,
                &RunOptions {
                    workers,
                    out_dir: out,
                },
            ) {
                Ok(outcome) => outcome,
                Err(e) => return fail(&e),
            };
            for row in outcome.rows.iter().filter(|r| r.pass.is_some()) {
                println!(
                    "{} {} {} = {} (tolerance {})",
                    if row.pass == Some(true) {
                        "PASS"
                    } else {
                        "FAIL"
                    },
                    row.probe_id,
                    row.param,
                    row.value,
                    row.tolerance.unwrap_or(f64::NAN)
                );
            }
            let m = &outcome.manifest;
            if let Some(e) = &m.error {
                eprintln!("error: {e}");
            }
            println!(
                "{}: {} in {:.1}s, {} split steps, outputs in {}",
                m.experiment,
                m.status,
                m.wall_clock_seconds,
                m.split_steps,
                outcome.out_dir.display()
            );
            ExitCode::from(outcome.exit_code())
        }
    }
}
