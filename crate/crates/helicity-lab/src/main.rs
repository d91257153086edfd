//! Experiment runner: reproducible numerical checks of the helicity /
//! self-duality correspondence, with CSV + JSON records and SVG plots per run.

mod config;
mod experiments;
mod plot;

use std::io::Write as _;
use std::path::PathBuf;
use std::process::ExitCode;
use std::sync::Mutex;
use std::time::Instant;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand};

use config::{Config, FileConfig, Overrides};
use experiments::{Outcome, EXPERIMENTS};

#[derive(Parser)]
#[command(name = "helicity-lab", version, about = "numerical experiments for the helicity / self-duality correspondence")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Run one experiment, a comma-separated list, or `all`
    Run {
        /// experiment name(s); see `list`
        experiment: String,
        /// TOML file with parameter overrides
        #[arg(long)]
        config: Option<PathBuf>,
        /// grid points per axis
        #[arg(long)]
        n: Option<usize>,
        /// torus side length
        #[arg(long = "L")]
        length: Option<f64>,
        /// RNG seed
        #[arg(long)]
        seed: Option<u64>,
        /// output root directory
        #[arg(long)]
        out: Option<PathBuf>,
        /// run up to this many experiments concurrently
        #[arg(long, default_value_t = 1)]
        jobs: usize,
    },
    /// List the registered experiments and the statements they test
    List,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.cmd {
        Cmd::List => {
            for (name, statement) in EXPERIMENTS {
                println!("{name}\n    {statement}");
            }
            ExitCode::SUCCESS
        }
        Cmd::Run {
            experiment,
            config,
            n,
            length,
            seed,
            out,
            jobs,
        } => {
            let flags = Overrides {
                n,
                length,
                seed,
                out,
            };
            match run_command(&experiment, config.as_deref(), &flags, jobs.max(1)) {
                Ok(true) => ExitCode::SUCCESS,
                Ok(false) => ExitCode::FAILURE,
                Err(e) => {
                    eprintln!("error: {e:#}");
                    ExitCode::FAILURE
                }
            }
        }
    }
}

fn run_command(
    experiment: &str,
    config_path: Option<&std::path::Path>,
    flags: &Overrides,
    jobs: usize,
) -> Result<bool> {
    let file = match config_path {
        Some(p) => FileConfig::load(p)?,
        None => FileConfig::default(),
    };
    let names: Vec<&str> = if experiment == "all" {
        EXPERIMENTS.iter().map(|(n, _)| *n).collect()
    } else {
        experiment.split(',').map(str::trim).collect()
    };
    for name in &names {
        if !EXPERIMENTS.iter().any(|(n, _)| n == name) {
            bail!("unknown experiment '{name}'; run `helicity-lab list` for the registry");
        }
    }
    let configs: Vec<Config> = names
        .iter()
        .map(|name| config::resolve(name, &file, flags))
        .collect();

    // Each experiment owns its configuration and output directory; the only
    // shared state is a results sink behind a mutex.
    let results: Mutex<Vec<(String, Result<(Outcome, f64)>)>> = Mutex::new(Vec::new());
    let queue = Mutex::new(configs.into_iter());
    std::thread::scope(|scope| {
        for _ in 0..jobs.min(names.len()) {
            scope.spawn(|| loop {
                let Some(cfg) = queue.lock().unwrap().next() else {
                    return;
                };
                let name = cfg.experiment.clone();
                let res = run_one(&cfg);
                results.lock().unwrap().push((name, res));
            });
        }
    });

    let mut results = results.into_inner().unwrap();
    // restore the requested order for the report
    results.sort_by_key(|(name, _)| names.iter().position(|n| n == name).unwrap_or(usize::MAX));
    let mut all_pass = true;
    for (name, res) in &results {
        match res {
            Ok((outcome, wall)) => {
                println!("{name} ({wall:.2}s)");
                for c in &outcome.checks {
                    let status = if c.pass { "PASS" } else { "FAIL" };
                    println!("  [{status}] {} — {}", c.name, c.detail);
                }
                all_pass &= outcome.pass();
            }
            Err(e) => {
                println!("{name}");
                println!("  [FAIL] experiment errored — {e:#}");
                all_pass = false;
            }
        }
    }
    println!("{}", if all_pass { "all checks passed" } else { "some checks FAILED" });
    Ok(all_pass)
}

fn run_one(cfg: &Config) -> Result<(Outcome, f64)> {
    let dir = cfg.run_dir();
    std::fs::create_dir_all(&dir).with_context(|| format!("creating {}", dir.display()))?;
    let t0 = Instant::now();
    let outcome = experiments::run(cfg, &dir)?;
    let wall = t0.elapsed().as_secs_f64();
    write_metrics_csv(&dir.join("metrics.csv"), &outcome)?;
    write_record(&dir.join("record.json"), cfg, &outcome, wall)?;
    Ok((outcome, wall))
}

fn write_metrics_csv(path: &std::path::Path, outcome: &Outcome) -> Result<()> {
    let file = std::fs::File::create(path).with_context(|| format!("creating {}", path.display()))?;
    let mut w = std::io::BufWriter::new(file);
    writeln!(w, "metric,value,tests")?;
    for m in &outcome.metrics {
        writeln!(w, "{},{:.17e},\"{}\"", m.name, m.value, m.tests.replace('"', "\"\""))?;
    }
    Ok(())
}

fn write_record(
    path: &std::path::Path,
    cfg: &Config,
    outcome: &Outcome,
    wall: f64,
) -> Result<()> {
    let metrics: Vec<_> = outcome
        .metrics
        .iter()
        .map(|m| {
            serde_json::json!({
                "name": m.name,
                "value": m.value,
                "tests": m.tests,
            })
        })
        .collect();
    let checks: Vec<_> = outcome
        .checks
        .iter()
        .map(|c| {
            serde_json::json!({
                "name": c.name,
                "pass": c.pass,
                "detail": c.detail,
            })
        })
        .collect();
    let record = serde_json::json!({
        "experiment": cfg.experiment,
        "config_hash": cfg.hash(),
        "config": cfg,
        "metrics": metrics,
        "checks": checks,
        "pass": outcome.pass(),
        "wall_time_s": wall,
    });
    let text = serde_json::to_string_pretty(&record)?;
    std::fs::write(path, text + "\n").with_context(|| format!("writing {}", path.display()))?;
    Ok(())
}
