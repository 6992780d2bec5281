use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use cgflow::config::{parse_number, RunConfig};
use cgflow::run::{self, ExitStatus};
use cgflow::Error;

/// Constrained gradient flow simulations.
#[derive(Parser)]
#[command(name = "cgflow", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a single simulation.
    Run {
        #[arg(long)]
        config: PathBuf,
        /// Output directory (overrides output.dir).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Time-step convergence study against a fine reference run.
    Converge {
        #[arg(long)]
        config: PathBuf,
        /// Comma-separated time steps.
        #[arg(long)]
        dts: String,
        #[arg(long)]
        ref_dt: String,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run several approaches on the same problem and compare multipliers.
    Compare {
        #[arg(long)]
        config: PathBuf,
        /// Comma-separated approaches (generic: scheme names; vesicle: 1,2,3).
        #[arg(long)]
        approaches: String,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn load(path: &Path) -> Result<RunConfig, Error> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::Config(vec![format!("{}: {e}", path.display())]))?;
    RunConfig::parse(&text).map_err(Error::Config)
}

fn numbers(list: &str, what: &str) -> Result<Vec<f64>, Error> {
    list.split(',')
        .map(|s| {
            parse_number(s)
                .ok_or_else(|| Error::Config(vec![format!("{what}: bad number '{}'", s.trim())]))
        })
        .collect()
}

fn setup_threads() -> Result<(), Error> {
    if let Ok(v) = std::env::var("CGFLOW_THREADS") {
        let n: usize = v.trim().parse().ok().filter(|&n| n > 0).ok_or_else(|| {
            Error::Config(vec![format!(
                "CGFLOW_THREADS must be a positive integer, got '{v}'"
            )])
        })?;
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| Error::Config(vec![e.to_string()]))?;
    }
    Ok(())
}

fn execute(cli: Cli) -> Result<ExitStatus, Error> {
    setup_threads()?;
    match cli.command {
        Command::Run { config, out } => {
            let cfg = load(&config)?;
            let dir = out.unwrap_or_else(|| cfg.out_dir.clone());
            let status = run::run(&cfg, &dir)?;
            if status == ExitStatus::Numerical {
                eprintln!(
                    "numerical failure; see {}",
                    dir.join("failure.json").display()
                );
            }
            Ok(status)
        }
        Command::Converge {
            config,
            dts,
            ref_dt,
            out,
        } => {
            let cfg = load(&config)?;
            let dts = numbers(&dts, "--dts")?;
            let ref_dt = numbers(&ref_dt, "--ref-dt")?;
            let [ref_dt] = ref_dt[..] else {
                return Err(Error::Config(vec!["--ref-dt takes one value".into()]));
            };
            let dir = out.unwrap_or_else(|| cfg.out_dir.clone());
            let (status, report) = run::converge(&cfg, &dts, ref_dt, &dir)?;
            match report {
                Some(r) => {
                    for (dt, e) in r.dts.iter().zip(&r.errors) {
                        println!("dt = {dt:e}  linf error = {e:e}");
                    }
                    match r.observed_order {
                        Some(p) => println!("observed order {p:.3}"),
                        None => println!("errors at round-off floor; no order fitted"),
                    }
                }
                None => eprintln!(
                    "a run failed; see {}",
                    dir.join("convergence.json").display()
                ),
            }
            Ok(status)
        }
        Command::Compare {
            config,
            approaches,
            out,
        } => {
            let cfg = load(&config)?;
            let labels: Vec<String> = approaches
                .split(',')
                .map(|s| s.trim().to_string())
                .collect();
            let dir = out.unwrap_or_else(|| cfg.out_dir.clone());
            let (status, cmp) = run::compare(&cfg, &labels, &dir)?;
            for r in &cmp.runs {
                match &r.failure {
                    None => println!("{}: {} steps", r.label, r.series.len()),
                    Some(f) => println!("{}: failed after {} steps: {f}", r.label, r.series.len()),
                }
            }
            for (a, b, d) in &cmp.lambda_discrepancy {
                println!("max |lambda_{a} - lambda_{b}| = {d:e}");
            }
            Ok(status)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli) {
        Ok(status) => ExitCode::from(status as u8),
        Err(e) => {
            eprintln!("error: {e}");
            match e {
                Error::Config(_) => ExitCode::from(ExitStatus::Config as u8),
                e if e.is_numerical() => ExitCode::from(ExitStatus::Numerical as u8),
                _ => ExitCode::from(ExitStatus::Config as u8),
            }
        }
    }
}
