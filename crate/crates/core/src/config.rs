//! Simulation configuration and its TOML file format.
//!
//! The file has four sections, `[network]`, `[sim]`, `[solver]` and
//! `[experiment]`. Lengths are meters. Powers carry their unit in the key
//! name (`tx_power_mw`, `noise_power_dbm`, ...) and are converted to watts
//! on load; nothing past this module sees dBm. See `docs/config.md`.

use std::f64::consts::PI;
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

/// Solver tolerances and iteration caps.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    /// AO termination threshold on the per-sweep capacity increment.
    pub ao_tolerance: f64,
    pub ao_max_iters: usize,
    /// Layer-by-layer sweeps per phase update.
    pub phase_iters: usize,
    /// Outer SCA iterations per AO round.
    pub sca_max_iters: usize,
    /// SCA stops once no UAV moves more than this (meters).
    pub sca_position_tol: f64,
    pub inner_max_iters: usize,
    pub inner_tolerance: f64,
    /// Floor for the linearized squared distances (m²).
    pub slack_floor: f64,
    /// Rejection-sampling cap for random UAV placement.
    pub placement_attempts: usize,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            ao_tolerance: 1e-6,
            ao_max_iters: 50,
            phase_iters: 10,
            sca_max_iters: 10,
            sca_position_tol: 1e-4,
            inner_max_iters: 500,
            inner_tolerance: 1e-6,
            slack_floor: 1.0,
            placement_attempts: 10_000,
        }
    }
}

/// Baseline budgets and the master seed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub seed: u64,
    pub rd_candidates: usize,
    pub evo_iters: usize,
    pub evo_population: usize,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            seed: 1,
            rd_candidates: 100,
            evo_iters: 50,
            evo_population: 30,
        }
    }
}

/// Every physical and solver parameter of one experiment. Powers are watts.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    pub num_users: usize,
    pub num_uavs: usize,
    pub layers: usize,
    pub atoms_per_layer: usize,
    pub wavelength: f64,
    pub sim_thickness: f64,
    pub atom_area: f64,
    pub atom_spacing: f64,
    /// Distance from the output layer to the receive antenna; `None` means
    /// one layer spacing.
    pub antenna_offset: Option<f64>,
    pub altitude: f64,
    pub safety_distance: f64,
    pub area_side: f64,
    pub tx_power: f64,
    pub noise_power: f64,
    pub ref_gain: f64,
    pub solver: SolverConfig,
    pub experiment: ExperimentConfig,
}

impl SimConfig {
    /// The 28 GHz setup: 5 users, 3 UAVs at 50 m, K = 36, T = 5λ.
    pub fn paper_default(layers: usize) -> Self {
        let wavelength = 0.0107;
        Self {
            num_users: 5,
            num_uavs: 3,
            layers,
            atoms_per_layer: 36,
            wavelength,
            sim_thickness: 5.0 * wavelength,
            atom_area: (wavelength / 2.0).powi(2),
            atom_spacing: wavelength / 2.0,
            antenna_offset: None,
            altitude: 50.0,
            safety_distance: 100.0,
            area_side: 1000.0,
            tx_power: 0.5,
            noise_power: dbm_to_watts(-110.0),
            ref_gain: (wavelength / (4.0 * PI)).powi(2),
            solver: SolverConfig::default(),
            experiment: ExperimentConfig::default(),
        }
    }

    /// Layer spacing r = T_SIM / L.
    pub fn layer_spacing(&self) -> f64 {
        self.sim_thickness / self.layers as f64
    }

    /// Atoms per lattice row; `atoms_per_layer` is a perfect square.
    pub fn k_max(&self) -> usize {
        integer_sqrt(self.atoms_per_layer).unwrap_or(0)
    }

    pub fn antenna_offset(&self) -> f64 {
        self.antenna_offset.unwrap_or_else(|| self.layer_spacing())
    }

    /// Same config with a different layer count (thickness is kept, so the
    /// spacing shrinks as layers are added).
    pub fn with_layers(&self, layers: usize) -> Self {
        Self {
            layers,
            ..self.clone()
        }
    }

    pub fn validate(&self) -> Result<()> {
        let fail = |msg: String| Err(Error::InvalidConfig(msg));
        if self.num_users == 0 {
            return fail("num_users must be at least 1".into());
        }
        if self.num_uavs == 0 {
            return fail("num_uavs must be at least 1".into());
        }
        if self.num_uavs > self.num_users {
            return fail(format!(
                "num_uavs ({}) must not exceed num_users ({})",
                self.num_uavs, self.num_users
            ));
        }
        if self.layers == 0 {
            return fail("layers must be at least 1".into());
        }
        if self.atoms_per_layer == 0 || integer_sqrt(self.atoms_per_layer).is_none() {
            return fail(format!(
                "K must be a perfect square (got {})",
                self.atoms_per_layer
            ));
        }
        let positive = [
            ("wavelength", self.wavelength),
            ("sim_thickness", self.sim_thickness),
            ("atom_area", self.atom_area),
            ("atom_spacing", self.atom_spacing),
            ("altitude", self.altitude),
            ("safety_distance", self.safety_distance),
            ("area_side", self.area_side),
            ("tx_power", self.tx_power),
            ("noise_power", self.noise_power),
            ("ref_gain", self.ref_gain),
        ];
        for (name, v) in positive {
            if !(v.is_finite() && v > 0.0) {
                return fail(format!("{name} must be positive and finite (got {v})"));
            }
        }
        if let Some(d) = self.antenna_offset {
            if !(d.is_finite() && d > 0.0) {
                return fail(format!("antenna_offset must be positive (got {d})"));
            }
        }
        let s = &self.solver;
        if s.ao_tolerance.is_nan() || s.ao_tolerance < 0.0 {
            return fail("ao_tolerance must be non-negative".into());
        }
        if s.ao_max_iters == 0 || s.phase_iters == 0 || s.placement_attempts == 0 {
            return fail("iteration caps must be at least 1".into());
        }
        if s.slack_floor.is_nan() || s.slack_floor <= 0.0 {
            return fail("slack_floor must be positive".into());
        }
        if self.experiment.rd_candidates == 0 || self.experiment.evo_population < 4 {
            return fail("rd_candidates >= 1 and evo_population >= 4 required".into());
        }
        Ok(())
    }

    pub fn from_toml_str(text: &str) -> Result<Self> {
        let file: ConfigFile = toml::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
        let cfg = file.into_config()?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Hex SHA-256 over the canonical JSON form of the config.
    pub fn hash(&self) -> String {
        let canonical = serde_json::to_string(self).expect("config serializes");
        let digest = Sha256::digest(canonical.as_bytes());
        digest.iter().map(|b| format!("{b:02x}")).collect()
    }
}

/// Reads and validates a TOML config file.
pub fn load_config(path: impl AsRef<Path>) -> Result<SimConfig> {
    let text = std::fs::read_to_string(path)?;
    SimConfig::from_toml_str(&text)
}

pub fn dbm_to_watts(dbm: f64) -> f64 {
    10f64.powf(dbm / 10.0) * 1e-3
}

fn integer_sqrt(n: usize) -> Option<usize> {
    let r = (n as f64).sqrt().round() as usize;
    (r * r == n).then_some(r)
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct ConfigFile {
    network: NetworkSection,
    sim: SimSection,
    #[serde(default)]
    solver: Option<SolverSection>,
    #[serde(default)]
    experiment: Option<ExperimentSection>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct NetworkSection {
    num_users: usize,
    num_uavs: usize,
    area_side_m: f64,
    altitude_m: f64,
    safety_distance_m: f64,
    tx_power_mw: Option<f64>,
    tx_power_dbm: Option<f64>,
    noise_power_mw: Option<f64>,
    noise_power_dbm: Option<f64>,
    ref_gain: Option<f64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct SimSection {
    layers: usize,
    atoms_per_layer: usize,
    wavelength_m: f64,
    thickness_m: Option<f64>,
    thickness_wavelengths: Option<f64>,
    atom_area_m2: Option<f64>,
    atom_spacing_m: Option<f64>,
    antenna_offset_m: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct SolverSection {
    ao_tolerance: Option<f64>,
    ao_max_iters: Option<usize>,
    phase_iters: Option<usize>,
    sca_max_iters: Option<usize>,
    sca_position_tol_m: Option<f64>,
    inner_max_iters: Option<usize>,
    inner_tolerance: Option<f64>,
    slack_floor_m2: Option<f64>,
    placement_attempts: Option<usize>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct ExperimentSection {
    seed: Option<u64>,
    rd_candidates: Option<usize>,
    evo_iters: Option<usize>,
    evo_population: Option<usize>,
}

fn power_watts(name: &str, mw: Option<f64>, dbm: Option<f64>) -> Result<f64> {
    match (mw, dbm) {
        (Some(mw), None) => Ok(mw * 1e-3),
        (None, Some(dbm)) => Ok(dbm_to_watts(dbm)),
        (Some(_), Some(_)) => Err(Error::InvalidConfig(format!(
            "give exactly one of {name}_mw or {name}_dbm"
        ))),
        (None, None) => Err(Error::InvalidConfig(format!(
            "missing {name}_mw or {name}_dbm"
        ))),
    }
}

impl ConfigFile {
    fn into_config(self) -> Result<SimConfig> {
        let net = self.network;
        let sim = self.sim;
        let lambda = sim.wavelength_m;
        let sim_thickness = match (sim.thickness_m, sim.thickness_wavelengths) {
            (Some(t), None) => t,
            (None, Some(n)) => n * lambda,
            _ => {
                return Err(Error::InvalidConfig(
                    "give exactly one of thickness_m or thickness_wavelengths".into(),
                ))
            }
        };
        let sd = SolverConfig::default();
        let s = self.solver.unwrap_or_default();
        let ed = ExperimentConfig::default();
        let e = self.experiment.unwrap_or_default();
        Ok(SimConfig {
            num_users: net.num_users,
            num_uavs: net.num_uavs,
            layers: sim.layers,
            atoms_per_layer: sim.atoms_per_layer,
            wavelength: lambda,
            sim_thickness,
            atom_area: sim.atom_area_m2.unwrap_or((lambda / 2.0).powi(2)),
            atom_spacing: sim.atom_spacing_m.unwrap_or(lambda / 2.0),
            antenna_offset: sim.antenna_offset_m,
            altitude: net.altitude_m,
            safety_distance: net.safety_distance_m,
            area_side: net.area_side_m,
            tx_power: power_watts("tx_power", net.tx_power_mw, net.tx_power_dbm)?,
            noise_power: power_watts("noise_power", net.noise_power_mw, net.noise_power_dbm)?,
            ref_gain: net.ref_gain.unwrap_or((lambda / (4.0 * PI)).powi(2)),
            solver: SolverConfig {
                ao_tolerance: s.ao_tolerance.unwrap_or(sd.ao_tolerance),
                ao_max_iters: s.ao_max_iters.unwrap_or(sd.ao_max_iters),
                phase_iters: s.phase_iters.unwrap_or(sd.phase_iters),
                sca_max_iters: s.sca_max_iters.unwrap_or(sd.sca_max_iters),
                sca_position_tol: s.sca_position_tol_m.unwrap_or(sd.sca_position_tol),
                inner_max_iters: s.inner_max_iters.unwrap_or(sd.inner_max_iters),
                inner_tolerance: s.inner_tolerance.unwrap_or(sd.inner_tolerance),
                slack_floor: s.slack_floor_m2.unwrap_or(sd.slack_floor),
                placement_attempts: s.placement_attempts.unwrap_or(sd.placement_attempts),
            },
            experiment: ExperimentConfig {
                seed: e.seed.unwrap_or(ed.seed),
                rd_candidates: e.rd_candidates.unwrap_or(ed.rd_candidates),
                evo_iters: e.evo_iters.unwrap_or(ed.evo_iters),
                evo_population: e.evo_population.unwrap_or(ed.evo_population),
            },
        })
    }
}
