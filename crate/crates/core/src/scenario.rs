//! Ground users, UAV positions, and the placement constraints.

use nalgebra::{Vector2, Vector3};
use rand::Rng;

use crate::config::SimConfig;
use crate::error::{Error, Result};
use crate::rng::{self, SimRng};

#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    /// Users on the ground, z = 0.
    pub users: Vec<Vector3<f64>>,
    /// UAVs at z = altitude.
    pub uavs: Vec<Vector3<f64>>,
    pub area_side: f64,
    pub altitude: f64,
    pub safety_distance: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Violation {
    TooClose { a: usize, b: usize, distance: f64 },
    OutOfArea { uav: usize, x: f64, y: f64 },
    WrongAltitude { uav: usize, z: f64 },
}

impl Scenario {
    pub fn num_users(&self) -> usize {
        self.users.len()
    }

    pub fn num_uavs(&self) -> usize {
        self.uavs.len()
    }

    /// d_{m,u} = ‖q_u − p_m‖.
    pub fn distance(&self, user: usize, uav: usize) -> f64 {
        (self.uavs[uav] - self.users[user]).norm()
    }

    pub fn distance_sq(&self, user: usize, uav: usize) -> f64 {
        (self.uavs[uav] - self.users[user]).norm_squared()
    }

    pub fn horizontal(&self, uav: usize) -> Vector2<f64> {
        self.uavs[uav].xy()
    }

    /// Copy with the UAVs moved to the given horizontal positions.
    pub fn with_uavs(&self, horizontal: &[Vector2<f64>]) -> Scenario {
        let mut s = self.clone();
        s.uavs = horizontal
            .iter()
            .map(|p| Vector3::new(p.x, p.y, self.altitude))
            .collect();
        s
    }

    pub fn is_feasible(&self) -> bool {
        check_feasibility(self).is_empty()
    }
}

/// Uniform users and rejection-sampled UAVs; a pure function of `(cfg, seed)`.
pub fn build_scenario(cfg: &SimConfig, seed: u64) -> Result<Scenario> {
    let mut rng = rng::substream(&["scenario".into(), seed.into()]);
    let side = cfg.area_side;
    let users = (0..cfg.num_users)
        .map(|_| Vector3::new(rng.random_range(0.0..=side), rng.random_range(0.0..=side), 0.0))
        .collect();
    let horizontal = random_uav_positions(cfg, &mut rng)?;
    let base = Scenario {
        users,
        uavs: Vec::new(),
        area_side: side,
        altitude: cfg.altitude,
        safety_distance: cfg.safety_distance,
    };
    Ok(base.with_uavs(&horizontal))
}

/// Draws UAV horizontal positions uniformly in the area, rejecting any
/// draw closer than the safety distance to an already placed UAV.
pub fn random_uav_positions(cfg: &SimConfig, rng: &mut SimRng) -> Result<Vec<Vector2<f64>>> {
    let side = cfg.area_side;
    let cap = cfg.solver.placement_attempts;
    let mut placed: Vec<Vector2<f64>> = Vec::with_capacity(cfg.num_uavs);
    let mut attempts = 0;
    while placed.len() < cfg.num_uavs {
        if attempts >= cap {
            return Err(Error::PlacementFailed { attempts });
        }
        attempts += 1;
        let cand = Vector2::new(rng.random_range(0.0..=side), rng.random_range(0.0..=side));
        if placed.iter().all(|p| (p - cand).norm() >= cfg.safety_distance) {
            placed.push(cand);
        }
    }
    Ok(placed)
}

/// Safety-distance (closed inequality), area and altitude checks.
pub fn check_feasibility(s: &Scenario) -> Vec<Violation> {
    let mut out = Vec::new();
    for (u, q) in s.uavs.iter().enumerate() {
        if q.x < 0.0 || q.x > s.area_side || q.y < 0.0 || q.y > s.area_side {
            out.push(Violation::OutOfArea { uav: u, x: q.x, y: q.y });
        }
        if q.z != s.altitude {
            out.push(Violation::WrongAltitude { uav: u, z: q.z });
        }
    }
    for a in 0..s.uavs.len() {
        for b in a + 1..s.uavs.len() {
            let distance = (s.uavs[a] - s.uavs[b]).norm();
            if distance < s.safety_distance {
                out.push(Violation::TooClose { a, b, distance });
            }
        }
    }
    out
}
