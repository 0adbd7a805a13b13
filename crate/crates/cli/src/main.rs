use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use sl2drift_cli::config::*;
use sl2drift_cli::{acceptance, commands, RunError};

/// Monte Carlo and spectral toolkit for a critical planar drift-diffusion
/// problem and the canonical matrix diffusion it couples to.
#[derive(Parser)]
#[command(name = "sl2drift", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug)]
struct CommonArgs {
    /// JSON configuration file (unknown keys are rejected).
    #[arg(long)]
    config: Option<PathBuf>,
    /// Master seed override.
    #[arg(long)]
    seed: Option<u64>,
    /// Worker thread count override.
    #[arg(long)]
    workers: Option<usize>,
    /// Output directory override.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Time-step override.
    #[arg(long)]
    dt: Option<f64>,
    /// Drift amplitude override.
    #[arg(long)]
    eps: Option<f64>,
}

impl CommonArgs {
    fn overrides(&self) -> Overrides<'_> {
        Overrides {
            seed: self.seed,
            workers: self.workers,
            out: self.out.as_deref(),
            dt: self.dt,
            eps: self.eps,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Moments of the matrix diffusion at a list of times.
    #[command(name = "sl2-sim")]
    Sl2Sim(CommonArgs),
    /// Moments of the scalar companion processes.
    #[command(name = "scalar-sim")]
    ScalarSim(CommonArgs),
    /// Sample one velocity-field realization and write its spectral dump.
    #[command(name = "field-sample")]
    FieldSample(CommonArgs),
    /// Covariance of the coupling process over a field ensemble.
    #[command(name = "couple-check")]
    CoupleCheck(CommonArgs),
    /// Scale-by-scale gradient recursion against the scale function.
    #[command(name = "corrector-run")]
    CorrectorRun(CommonArgs),
    /// Advection-diffusion solve with increment and residual diagnostics.
    #[command(name = "pde-run")]
    PdeRun(CommonArgs),
    /// Run the acceptance suite and write the JSON report.
    Accept(CommonArgs),
}

fn write_output(out_dir: &PathBuf, name: &str, content: &str) -> Result<PathBuf, RunError> {
    std::fs::create_dir_all(out_dir)?;
    let path = out_dir.join(name);
    std::fs::write(&path, content)?;
    Ok(path)
}

fn run() -> Result<i32, RunError> {
    let cli = Cli::parse();
    match cli.command {
        Command::Sl2Sim(args) => {
            let cfg = Sl2SimConfig::load(args.config.as_deref())?.with_overrides(&args.overrides());
            let csv = commands::sl2_sim(&cfg)?;
            let path = write_output(&cfg.out, "sl2_sim.csv", &csv)?;
            print!("{csv}");
            eprintln!("wrote {}", path.display());
            Ok(0)
        }
        Command::ScalarSim(args) => {
            let cfg =
                ScalarSimConfig::load(args.config.as_deref())?.with_overrides(&args.overrides());
            let csv = commands::scalar_sim(&cfg)?;
            let path = write_output(&cfg.out, "scalar_sim.csv", &csv)?;
            print!("{csv}");
            eprintln!("wrote {}", path.display());
            Ok(0)
        }
        Command::FieldSample(args) => {
            let cfg =
                FieldSampleConfig::load(args.config.as_deref())?.with_overrides(&args.overrides());
            let dump = commands::field_sample(&cfg)?;
            let path = write_output(&cfg.out, "field_dump.txt", &dump)?;
            eprintln!("wrote {}", path.display());
            Ok(0)
        }
        Command::CoupleCheck(args) => {
            let cfg =
                CoupleCheckConfig::load(args.config.as_deref())?.with_overrides(&args.overrides());
            let csv = commands::couple_check(&cfg)?;
            let path = write_output(&cfg.out, "couple_check.csv", &csv)?;
            print!("{csv}");
            eprintln!("wrote {}", path.display());
            Ok(0)
        }
        Command::CorrectorRun(args) => {
            let cfg =
                CorrectorRunConfig::load(args.config.as_deref())?.with_overrides(&args.overrides());
            let csv = commands::corrector_run(&cfg)?;
            let path = write_output(&cfg.out, "corrector_run.csv", &csv)?;
            print!("{csv}");
            eprintln!("wrote {}", path.display());
            Ok(0)
        }
        Command::PdeRun(args) => {
            let cfg = PdeRunConfig::load(args.config.as_deref())?.with_overrides(&args.overrides());
            let csv = commands::pde_run(&cfg)?;
            let path = write_output(&cfg.out, "pde_run.csv", &csv)?;
            print!("{csv}");
            eprintln!("wrote {}", path.display());
            Ok(0)
        }
        Command::Accept(args) => {
            let cfg = AcceptConfig::load(args.config.as_deref())?.with_overrides(&args.overrides());
            let results = acceptance::run_all(&cfg)?;
            for r in &results {
                println!("{}", r.summary_line());
            }
            let path = acceptance::write_report(&results, &cfg.out)?;
            eprintln!("wrote {}", path.display());
            let all_pass = results.iter().all(|r| r.pass);
            Ok(if all_pass { 0 } else { 1 })
        }
    }
}

fn main() -> ExitCode {
    match run() {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("{e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
