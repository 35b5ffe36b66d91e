use std::path::PathBuf;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand};
use simuav::config::{load_config, SimConfig};
use simuav::harness::{dump_physics, run_experiment, summarize, ExperimentPlan, Method};

#[derive(Parser)]
#[command(name = "simuav", version, about = "UAV-SIM network optimization experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one method for one layer count and one seed.
    Run {
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long, default_value = "ao")]
        method: Method,
        #[arg(long, default_value_t = 3)]
        layers: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value = "out")]
        out: PathBuf,
    },
    /// Run every (method, L, seed) combination.
    Sweep {
        #[arg(long)]
        config: Option<PathBuf>,
        /// Comma-separated method names.
        #[arg(long, default_value = "ao")]
        methods: String,
        /// Layer counts, e.g. `1-8` or `1,2,3,5,7`.
        #[arg(long, default_value = "1-8")]
        layers: String,
        /// Seeds, e.g. `0-19` or `3,5`.
        #[arg(long, default_value = "0-19")]
        seeds: String,
        #[arg(long, default_value = "out")]
        out: PathBuf,
    },
    /// Aggregate a sweep.csv into per-(method, L) statistics.
    Summarize {
        sweep: PathBuf,
        #[arg(long, default_value = "summary.csv")]
        out: PathBuf,
    },
    /// Write the diffraction, antenna and correlation matrices as CSV.
    DumpPhysics {
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long, default_value_t = 2)]
        layers: usize,
        #[arg(long, default_value = "physics")]
        out: PathBuf,
    },
}

fn base_config(path: Option<&PathBuf>) -> Result<SimConfig> {
    match path {
        Some(p) => load_config(p).with_context(|| format!("loading {}", p.display())),
        None => Ok(SimConfig::paper_default(3)),
    }
}

/// Parses `a-b` (inclusive) and comma-separated lists, or a mix of both.
fn parse_list(spec: &str) -> Result<Vec<u64>> {
    let mut out = Vec::new();
    for part in spec.split(',').map(str::trim).filter(|p| !p.is_empty()) {
        match part.split_once('-') {
            Some((a, b)) => {
                let (a, b): (u64, u64) = (a.trim().parse()?, b.trim().parse()?);
                if a > b {
                    bail!("empty range `{part}`");
                }
                out.extend(a..=b);
            }
            None => out.push(part.parse()?),
        }
    }
    if out.is_empty() {
        bail!("empty list `{spec}`");
    }
    Ok(out)
}

fn run_plan(plan: ExperimentPlan) -> Result<()> {
    let output = run_experiment(&plan)?;
    let failed = output.records.iter().filter(|r| r.capacity.is_none()).count();
    for r in output.records.iter().filter(|r| r.capacity.is_none()) {
        eprintln!("{} L={} seed={}: {}", r.method, r.layers, r.seed, r.status);
    }
    println!(
        "{} runs ({} failed) -> {}, {}, {}",
        output.records.len(),
        failed,
        output.sweep.display(),
        output.trace.display(),
        output.manifest.display()
    );
    Ok(())
}

fn main() -> Result<()> {
    match Cli::parse().command {
        Command::Run {
            config,
            method,
            layers,
            seed,
            out,
        } => run_plan(ExperimentPlan {
            config: base_config(config.as_ref())?,
            methods: vec![method],
            layers: vec![layers],
            seeds: vec![seed],
            out_dir: out,
        }),
        Command::Sweep {
            config,
            methods,
            layers,
            seeds,
            out,
        } => {
            let methods = methods
                .split(',')
                .map(|m| m.parse::<Method>())
                .collect::<Result<Vec<_>, _>>()?;
            let layers = parse_list(&layers)?.into_iter().map(|l| l as usize).collect();
            run_plan(ExperimentPlan {
                config: base_config(config.as_ref())?,
                methods,
                layers,
                seeds: parse_list(&seeds)?,
                out_dir: out,
            })
        }
        Command::Summarize { sweep, out } => {
            let rows = summarize(&sweep, &out)?;
            println!("{} groups -> {}", rows.len(), out.display());
            Ok(())
        }
        Command::DumpPhysics { config, layers, out } => {
            let cfg = base_config(config.as_ref())?.with_layers(layers);
            cfg.validate()?;
            for p in dump_physics(&cfg, &out)? {
                println!("{}", p.display());
            }
            Ok(())
        }
    }
}
