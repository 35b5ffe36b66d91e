//! Experiment runner and CSV artifacts.
//!
//! Files written by [`run_experiment`] into the output directory:
//!
//! - `sweep.csv`: `method,L,seed,capacity_bps_hz,wall_ms,status,config_hash`
//! - `trace.csv`: `method,seed,L,tau,block,capacity_bps_hz,config_hash`
//! - `manifest.json`: config hash, the full config, methods, layers, seeds
//!   and the crate version
//!
//! [`summarize`] turns a sweep into `summary.csv`: `method,L,mean,std,n`.

use std::collections::BTreeMap;
use std::fmt;
use std::fs::File;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::ao::{run_ao, Solution};
use crate::baselines::{evolutionary_optimize, random_solution, uniform_deployment, without_sim_capacity, Metaheuristic};
use crate::channel::sample_channels;
use crate::config::SimConfig;
use crate::error::{Error, Result};
use crate::physics::SimStack;
use crate::scenario::build_scenario;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Ao,
    Rd,
    Ud,
    Nosim,
    Pso,
    De,
}

impl Method {
    pub const ALL: [Method; 6] = [Method::Ao, Method::Rd, Method::Ud, Method::Nosim, Method::Pso, Method::De];

    pub fn as_str(self) -> &'static str {
        match self {
            Method::Ao => "ao",
            Method::Rd => "rd",
            Method::Ud => "ud",
            Method::Nosim => "nosim",
            Method::Pso => "pso",
            Method::De => "de",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Method::ALL
            .into_iter()
            .find(|m| m.as_str() == s.trim().to_ascii_lowercase())
            .ok_or_else(|| Error::InvalidPlan(format!("unknown method `{s}` (expected one of ao, rd, ud, nosim, pso, de)")))
    }
}

/// Builds the scenario, stack and channels for `seed` and runs one method.
/// The scenario and channels depend on the seed only, so all methods and
/// layer counts see the same draws for a given seed.
pub fn run_method(cfg: &SimConfig, method: Method, seed: u64) -> Result<Solution> {
    let stack = SimStack::build(cfg)?;
    let scenario = build_scenario(cfg, seed)?;
    let channels = sample_channels(&stack, &scenario, cfg.ref_gain, seed)?;
    match method {
        Method::Ao => run_ao(cfg, &stack, &scenario, &channels, seed),
        Method::Rd => random_solution(cfg, &stack, &scenario, &channels, seed, cfg.experiment.rd_candidates),
        Method::Ud => uniform_deployment(cfg, &stack, &scenario, &channels, seed),
        Method::Nosim => without_sim_capacity(cfg, &scenario, &channels),
        Method::Pso => evolutionary_optimize(cfg, &stack, &scenario, &channels, Metaheuristic::Pso, seed),
        Method::De => evolutionary_optimize(cfg, &stack, &scenario, &channels, Metaheuristic::De, seed),
    }
}

#[derive(Debug, Clone)]
pub struct ExperimentPlan {
    pub config: SimConfig,
    pub methods: Vec<Method>,
    pub layers: Vec<usize>,
    pub seeds: Vec<u64>,
    pub out_dir: PathBuf,
}

impl ExperimentPlan {
    pub fn validate(&self) -> Result<()> {
        if self.methods.is_empty() {
            return Err(Error::InvalidPlan("no methods".into()));
        }
        if self.seeds.is_empty() {
            return Err(Error::InvalidPlan("no seeds".into()));
        }
        if self.layers.is_empty() || self.layers.contains(&0) {
            return Err(Error::InvalidPlan("layer counts must be ≥ 1 and non-empty".into()));
        }
        self.config.validate()
    }

    /// (method, L, seed) in sorted order, duplicates removed.
    pub fn jobs(&self) -> Vec<(Method, usize, u64)> {
        let mut jobs: Vec<_> = self
            .methods
            .iter()
            .flat_map(|&m| self.layers.iter().flat_map(move |&l| self.seeds.iter().map(move |&s| (m, l, s))))
            .collect();
        jobs.sort();
        jobs.dedup();
        jobs
    }
}

/// Outcome of one (method, L, seed) run.
#[derive(Debug, Clone, PartialEq)]
pub struct RunRecord {
    pub method: Method,
    pub layers: usize,
    pub seed: u64,
    /// `None` when the run could not produce a solution.
    pub capacity: Option<f64>,
    pub wall_ms: u64,
    /// Termination reason, or `failed` when setup or solving errored.
    pub status: String,
    pub trace: Vec<(usize, &'static str, f64)>,
}

pub fn execute(cfg: &SimConfig, method: Method, layers: usize, seed: u64) -> RunRecord {
    let cfg = cfg.with_layers(layers);
    let start = Instant::now();
    let result = run_method(&cfg, method, seed);
    let wall_ms = start.elapsed().as_millis() as u64;
    match result {
        Ok(sol) => RunRecord {
            method,
            layers,
            seed,
            capacity: Some(sol.capacity),
            wall_ms,
            status: sol.termination.as_str().to_string(),
            trace: sol.trace_rows().into_iter().map(|(t, b, c)| (t, b.as_str(), c)).collect(),
        },
        Err(e) => RunRecord {
            method,
            layers,
            seed,
            capacity: None,
            wall_ms,
            status: format!("failed: {e}"),
            trace: Vec::new(),
        },
    }
}

#[derive(Debug, Clone)]
pub struct ExperimentOutput {
    pub records: Vec<RunRecord>,
    pub sweep: PathBuf,
    pub trace: PathBuf,
    pub manifest: PathBuf,
}

#[derive(Debug, Serialize, Deserialize)]
struct SweepRow {
    method: Method,
    #[serde(rename = "L")]
    layers: usize,
    seed: u64,
    capacity_bps_hz: Option<f64>,
    wall_ms: u64,
    status: String,
    config_hash: String,
}

#[derive(Debug, Serialize)]
struct TraceRow<'a> {
    method: Method,
    seed: u64,
    #[serde(rename = "L")]
    layers: usize,
    tau: usize,
    block: &'a str,
    capacity_bps_hz: f64,
    config_hash: &'a str,
}

#[derive(Debug, Serialize)]
struct Manifest<'a> {
    config_hash: String,
    config: &'a SimConfig,
    methods: Vec<&'static str>,
    layers: &'a [usize],
    seeds: &'a [u64],
    version: &'static str,
}

/// Runs every job of the plan on the rayon pool and writes the artifacts.
/// Failed runs are recorded with status `failed: ...` and an empty capacity.
pub fn run_experiment(plan: &ExperimentPlan) -> Result<ExperimentOutput> {
    plan.validate()?;
    std::fs::create_dir_all(&plan.out_dir)?;
    let hash = plan.config.hash();
    let records: Vec<RunRecord> = plan
        .jobs()
        .into_par_iter()
        .map(|(m, l, s)| execute(&plan.config, m, l, s))
        .collect();

    let sweep = plan.out_dir.join("sweep.csv");
    let mut w = csv::Writer::from_path(&sweep)?;
    for r in &records {
        w.serialize(SweepRow {
            method: r.method,
            layers: r.layers,
            seed: r.seed,
            capacity_bps_hz: r.capacity,
            wall_ms: r.wall_ms,
            status: r.status.clone(),
            config_hash: hash.clone(),
        })?;
    }
    w.flush()?;

    let trace = plan.out_dir.join("trace.csv");
    let mut w = csv::Writer::from_path(&trace)?;
    for r in &records {
        for &(tau, block, cap) in &r.trace {
            w.serialize(TraceRow {
                method: r.method,
                seed: r.seed,
                layers: r.layers,
                tau,
                block,
                capacity_bps_hz: cap,
                config_hash: &hash,
            })?;
        }
    }
    w.flush()?;

    let manifest = plan.out_dir.join("manifest.json");
    let body = Manifest {
        config_hash: hash.clone(),
        config: &plan.config,
        methods: plan.methods.iter().map(|m| m.as_str()).collect(),
        layers: &plan.layers,
        seeds: &plan.seeds,
        version: env!("CARGO_PKG_VERSION"),
    };
    let mut f = File::create(&manifest)?;
    serde_json::to_writer_pretty(&mut f, &body)?;
    writeln!(f)?;

    Ok(ExperimentOutput {
        records,
        sweep,
        trace,
        manifest,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SummaryRow {
    pub method: Method,
    #[serde(rename = "L")]
    pub layers: usize,
    pub mean: f64,
    /// Sample standard deviation; zero for a single row.
    pub std: f64,
    pub n: usize,
}

/// Groups successful sweep rows by (method, L). Rows without a capacity
/// are skipped. Fails on unreadable rows or more than one config hash.
pub fn summarize_rows(sweep: &Path) -> Result<Vec<SummaryRow>> {
    let mut reader = csv::Reader::from_path(sweep)?;
    let mut groups: BTreeMap<(Method, usize), Vec<f64>> = BTreeMap::new();
    let mut hashes: Vec<String> = Vec::new();
    for (i, row) in reader.deserialize::<SweepRow>().enumerate() {
        let row = row.map_err(|e| Error::MalformedCsv(format!("row {}: {e}", i + 2)))?;
        if !hashes.contains(&row.config_hash) {
            hashes.push(row.config_hash.clone());
        }
        if let Some(c) = row.capacity_bps_hz {
            groups.entry((row.method, row.layers)).or_default().push(c);
        }
    }
    if hashes.len() > 1 {
        return Err(Error::MixedConfigs(hashes));
    }
    Ok(groups
        .into_iter()
        .map(|((method, layers), v)| {
            let (mean, std) = mean_std(&v);
            SummaryRow {
                method,
                layers,
                mean,
                std,
                n: v.len(),
            }
        })
        .collect())
}

/// Writes `summary.csv` for `sweep` to `out`.
pub fn summarize(sweep: &Path, out: &Path) -> Result<Vec<SummaryRow>> {
    let rows = summarize_rows(sweep)?;
    let mut w = csv::Writer::from_path(out)?;
    for r in &rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(rows)
}

/// Mean and sample standard deviation (zero when fewer than two values).
pub fn mean_std(v: &[f64]) -> (f64, f64) {
    let n = v.len() as f64;
    let mean = v.iter().sum::<f64>() / n;
    if v.len() < 2 {
        return (mean, 0.0);
    }
    let var = v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}

/// Writes the inter-layer matrix, the antenna response and the correlation
/// matrix as long-format CSVs (`row,col,re,im`) into `dir`.
pub fn dump_physics(cfg: &SimConfig, dir: &Path) -> Result<Vec<PathBuf>> {
    std::fs::create_dir_all(dir)?;
    let stack = SimStack::build(cfg)?;
    let mut written = Vec::new();
    let mut dump = |name: &str, rows: usize, cols: usize, at: &dyn Fn(usize, usize) -> (f64, f64)| -> Result<()> {
        let path = dir.join(name);
        let mut w = csv::Writer::from_path(&path)?;
        w.write_record(["row", "col", "re", "im"])?;
        for i in 0..rows {
            for j in 0..cols {
                let (re, im) = at(i, j);
                w.write_record([i.to_string(), j.to_string(), re.to_string(), im.to_string()])?;
            }
        }
        w.flush()?;
        written.push(path);
        Ok(())
    };
    let k = stack.atoms();
    if stack.layers > 1 {
        let w = stack.w(2);
        dump("inter_layer.csv", k, k, &|i, j| (w[(i, j)].re, w[(i, j)].im))?;
    }
    let v = &stack.output_vec;
    dump("output_vector.csv", k, 1, &|i, _| (v[i].re, v[i].im))?;
    let r = &stack.corr;
    dump("correlation.csv", k, k, &|i, j| (r[(i, j)], 0.0))?;
    Ok(written)
}
