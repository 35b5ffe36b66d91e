//! UAV placement by successive convex approximation.
//!
//! With association and phases fixed, each associated link's rate is
//!
//! ```text
//! log2(Σ_l c_l / D_l + σ²) − log2(Σ_{l≠m} c_l / D_l + σ²),   c_l = ρ0 p |g̃_l|²
//! ```
//!
//! where D_l = ‖q_u − p_l‖². The first log is convex in D, so its tangent at
//! the expansion point is a global lower bound (coefficients A, B). The
//! second is replaced by slack variables S ≤ ‖q_u − p‖², whose upper bound
//! is linearized at the expansion point. The objective increases with every
//! S, so the slacks sit at their bound and are substituted out, leaving a
//! concave problem in the 2U horizontal coordinates. That problem is solved
//! by projected gradient ascent over the area box and the linearized
//! safety-distance half-spaces.

use std::f64::consts::LOG2_E;

use nalgebra::{DMatrix, DVector, Vector2, Vector3};

use crate::association::Association;
use crate::config::SolverConfig;
use crate::error::{Error, Result};
use crate::scenario::Scenario;

const ARMIJO_C: f64 = 1e-4;
const START_STEP: f64 = 50.0;
const MAX_BACKTRACKS: usize = 30;
const PROJECTION_PASSES: usize = 100;
/// Accept an SCA step unless it loses more than this much true capacity.
pub const SAFEGUARD_TOL: f64 = 1e-9;

/// Everything the placement problem needs that stays fixed while the UAVs
/// move.
#[derive(Debug, Clone)]
pub struct LocationProblem<'a> {
    pub users: &'a [Vector3<f64>],
    pub altitude: f64,
    pub area_side: f64,
    pub safety_distance: f64,
    pub assoc: &'a Association,
    /// c_{m,u} = ρ0 p_m |g̃_{m,u}|² (M×U).
    pub weights: DMatrix<f64>,
    pub noise_power: f64,
    /// ε_S, the floor on the linearized squared distances.
    pub slack_floor: f64,
}

impl<'a> LocationProblem<'a> {
    /// `gain_power` is |g̃_{m,u}|², the unit-path-loss effective gain.
    pub fn new(
        scenario: &'a Scenario,
        assoc: &'a Association,
        gain_power: &DMatrix<f64>,
        ref_gain: f64,
        tx_power: f64,
        noise_power: f64,
        slack_floor: f64,
    ) -> Self {
        Self {
            users: &scenario.users,
            altitude: scenario.altitude,
            area_side: scenario.area_side,
            safety_distance: scenario.safety_distance,
            assoc,
            weights: gain_power.map(|g| ref_gain * tx_power * g),
            noise_power,
            slack_floor,
        }
    }

    pub fn num_uavs(&self) -> usize {
        self.weights.ncols()
    }

    pub fn num_users(&self) -> usize {
        self.weights.nrows()
    }

    /// ‖q_u − p_m‖² with q at the flight altitude.
    pub fn distance_sq(&self, m: usize, q: &Vector2<f64>) -> f64 {
        let p = &self.users[m];
        (q.x - p.x).powi(2) + (q.y - p.y).powi(2) + (self.altitude - p.z).powi(2)
    }

    /// Σ_l c_{l,u} / D_l(q) + σ².
    fn received_power(&self, u: usize, q: &Vector2<f64>, skip: Option<usize>) -> f64 {
        (0..self.num_users())
            .filter(|&l| Some(l) != skip)
            .map(|l| self.weights[(l, u)] / self.distance_sq(l, q))
            .sum::<f64>()
            + self.noise_power
    }

    /// Exact network capacity at horizontal positions `q`.
    pub fn true_capacity(&self, q: &[Vector2<f64>]) -> f64 {
        self.assoc
            .pairs()
            .map(|(m, u)| {
                (self.received_power(u, &q[u], None) / self.received_power(u, &q[u], Some(m))).log2()
            })
            .sum()
    }
}

/// Tangent coefficients of the full-sum log term at an expansion point.
#[derive(Debug, Clone)]
pub struct SurrogateCoefficients {
    pub expansion: Vec<Vector2<f64>>,
    /// A_{m,u} > 0.
    pub a: DMatrix<f64>,
    /// B_{m,u}; equal down each column.
    pub b: DMatrix<f64>,
    /// ‖q^τ_u − p_m‖².
    pub dist_sq: DMatrix<f64>,
}

pub fn surrogate_coefficients(
    problem: &LocationProblem<'_>,
    expansion: &[Vector2<f64>],
) -> Result<SurrogateCoefficients> {
    let (m_count, u_count) = (problem.num_users(), problem.num_uavs());
    let mut dist_sq = DMatrix::zeros(m_count, u_count);
    for u in 0..u_count {
        for m in 0..m_count {
            let d = problem.distance_sq(m, &expansion[u]);
            if d.is_nan() || d <= 0.0 {
                return Err(Error::ZeroDistance { uav: u, user: m });
            }
            dist_sq[(m, u)] = d;
        }
    }
    let mut a = DMatrix::zeros(m_count, u_count);
    let mut b = DMatrix::zeros(m_count, u_count);
    for u in 0..u_count {
        let total: f64 = (0..m_count)
            .map(|l| problem.weights[(l, u)] / dist_sq[(l, u)])
            .sum::<f64>()
            + problem.noise_power;
        for m in 0..m_count {
            a[(m, u)] = problem.weights[(m, u)] / dist_sq[(m, u)].powi(2) * LOG2_E / total;
            b[(m, u)] = total.log2();
        }
    }
    Ok(SurrogateCoefficients {
        expansion: expansion.to_vec(),
        a,
        b,
        dist_sq,
    })
}

impl SurrogateCoefficients {
    /// The tangent lower bound of log2(Σ_l c_l/D_l + σ²) for UAV u.
    fn full_sum_bound(&self, problem: &LocationProblem<'_>, u: usize, q: &Vector2<f64>) -> f64 {
        let mut v = self.b[(0, u)];
        for l in 0..problem.num_users() {
            v -= self.a[(l, u)] * (problem.distance_sq(l, q) - self.dist_sq[(l, u)]);
        }
        v
    }

    /// Linearized upper bound on ‖q_u − p_m‖² (before flooring).
    fn linearized_dist_sq(&self, problem: &LocationProblem<'_>, m: usize, u: usize, q: &Vector2<f64>) -> f64 {
        let p = &problem.users[m];
        let qt = &self.expansion[u];
        let diff = Vector2::new(qt.x - p.x, qt.y - p.y);
        self.dist_sq[(m, u)] + 2.0 * diff.dot(&(q - qt))
    }

    /// S*: the optimal slacks for positions `q`.
    pub fn slack_bound(&self, problem: &LocationProblem<'_>, q: &[Vector2<f64>]) -> DMatrix<f64> {
        DMatrix::from_fn(problem.num_users(), problem.num_uavs(), |m, u| {
            self.linearized_dist_sq(problem, m, u, &q[u]).max(problem.slack_floor)
        })
    }
}

/// Surrogate objective for explicit slacks S (M×U, all positive).
pub fn surrogate_value(
    problem: &LocationProblem<'_>,
    coeffs: &SurrogateCoefficients,
    q: &[Vector2<f64>],
    slack: &DMatrix<f64>,
) -> Result<f64> {
    if let Some(s) = slack.iter().find(|s| s.is_nan() || **s <= 0.0) {
        return Err(Error::DimensionMismatch(format!("slack {s} must be positive")));
    }
    let mut total = 0.0;
    for (m, u) in problem.assoc.pairs() {
        let interference: f64 = (0..problem.num_users())
            .filter(|&l| l != m)
            .map(|l| problem.weights[(l, u)] / slack[(l, u)])
            .sum();
        total += coeffs.full_sum_bound(problem, u, &q[u]) - (interference + problem.noise_power).log2();
    }
    Ok(total)
}

/// Surrogate with the slacks substituted by their bound.
pub fn reduced_surrogate(problem: &LocationProblem<'_>, coeffs: &SurrogateCoefficients, q: &[Vector2<f64>]) -> f64 {
    let slack = coeffs.slack_bound(problem, q);
    surrogate_value(problem, coeffs, q, &slack).expect("floored slacks are positive")
}

/// Analytic gradient of [`reduced_surrogate`] w.r.t. each UAV's horizontal
/// position.
pub fn reduced_gradient(
    problem: &LocationProblem<'_>,
    coeffs: &SurrogateCoefficients,
    q: &[Vector2<f64>],
) -> Vec<Vector2<f64>> {
    let mut grad = vec![Vector2::zeros(); problem.num_uavs()];
    for (m, u) in problem.assoc.pairs() {
        let qu = &q[u];
        let mut g = Vector2::zeros();
        for l in 0..problem.num_users() {
            let p = &problem.users[l];
            g -= coeffs.a[(l, u)] * 2.0 * Vector2::new(qu.x - p.x, qu.y - p.y);
        }
        let mut interference = problem.noise_power;
        let mut inner = Vector2::zeros();
        for l in (0..problem.num_users()).filter(|&l| l != m) {
            let lin = coeffs.linearized_dist_sq(problem, l, u, qu);
            let s = lin.max(problem.slack_floor);
            interference += problem.weights[(l, u)] / s;
            if lin > problem.slack_floor {
                let p = &problem.users[l];
                let qt = &coeffs.expansion[u];
                let ds = 2.0 * Vector2::new(qt.x - p.x, qt.y - p.y);
                inner += problem.weights[(l, u)] / (s * s) * ds;
            }
        }
        g += inner * (LOG2_E / interference);
        grad[u] += g;
    }
    grad
}

/// One linear constraint aᵀx ≥ b over the stacked coordinates.
#[derive(Debug, Clone)]
struct HalfSpace {
    normal: DVector<f64>,
    offset: f64,
    norm_sq: f64,
}

impl HalfSpace {
    fn slack(&self, x: &DVector<f64>) -> f64 {
        self.normal.dot(x) - self.offset
    }
}

/// Feasible region of one SCA step: area box plus the linearized
/// safety-distance constraints, one per unordered UAV pair.
#[derive(Debug, Clone)]
pub struct StepRegion {
    side: f64,
    halfspaces: Vec<HalfSpace>,
}

impl StepRegion {
    pub fn new(expansion: &[Vector2<f64>], side: f64, d_min: f64) -> Self {
        let n = expansion.len();
        let mut halfspaces = Vec::new();
        for u in 0..n {
            for i in u + 1..n {
                let delta = expansion[u] - expansion[i];
                let mut normal = DVector::zeros(2 * n);
                normal[2 * u] = 2.0 * delta.x;
                normal[2 * u + 1] = 2.0 * delta.y;
                normal[2 * i] = -2.0 * delta.x;
                normal[2 * i + 1] = -2.0 * delta.y;
                let norm_sq = normal.norm_squared();
                halfspaces.push(HalfSpace {
                    normal,
                    offset: d_min * d_min + delta.norm_squared(),
                    norm_sq,
                });
            }
        }
        Self { side, halfspaces }
    }

    pub fn contains(&self, x: &DVector<f64>) -> bool {
        x.iter().all(|&v| (0.0..=self.side).contains(&v)) && self.halfspaces.iter().all(|h| h.slack(x) >= 0.0)
    }

    /// Dykstra's alternating projection onto box ∩ half-spaces.
    pub fn project(&self, x: &DVector<f64>) -> DVector<f64> {
        let sets = self.halfspaces.len() + 1;
        let mut y = x.clone();
        let mut corrections = vec![DVector::zeros(x.len()); sets];
        for _ in 0..PROJECTION_PASSES {
            let before = y.clone();
            for (s, corr) in corrections.iter_mut().enumerate() {
                let z = &y + &*corr;
                let projected = if s == 0 {
                    z.map(|v| v.clamp(0.0, self.side))
                } else {
                    let h = &self.halfspaces[s - 1];
                    let slack = h.slack(&z);
                    if slack >= 0.0 || h.norm_sq == 0.0 {
                        z.clone()
                    } else {
                        &z - &h.normal * (slack / h.norm_sq)
                    }
                };
                *corr = z - &projected;
                y = projected;
            }
            if (&y - before).norm() < 1e-12 {
                break;
            }
        }
        y
    }

    /// Pulls `target` back along the segment from the feasible `from` until
    /// every constraint holds. Absorbs rounding left by the projection.
    fn restore(&self, from: &DVector<f64>, target: &DVector<f64>) -> DVector<f64> {
        if self.contains(target) {
            return target.clone();
        }
        let d = target - from;
        let mut t: f64 = 1.0;
        for h in &self.halfspaces {
            let at_target = h.slack(target);
            if at_target < 0.0 {
                let at_from = h.slack(from).max(0.0);
                t = t.min(at_from / (at_from - at_target));
            }
        }
        for i in 0..d.len() {
            if target[i] > self.side && d[i] > 0.0 {
                t = t.min((self.side - from[i]).max(0.0) / d[i]);
            } else if target[i] < 0.0 && d[i] < 0.0 {
                t = t.min(from[i].max(0.0) / -d[i]);
            }
        }
        let mut t = t.max(0.0);
        for _ in 0..64 {
            let y = (from + &d * t).map(|v| v.clamp(0.0, self.side));
            if self.contains(&y) {
                return y;
            }
            t *= 0.5;
        }
        from.clone()
    }
}

fn stack_positions(q: &[Vector2<f64>]) -> DVector<f64> {
    DVector::from_iterator(2 * q.len(), q.iter().flat_map(|p| [p.x, p.y]))
}

fn unstack_positions(x: &DVector<f64>) -> Vec<Vector2<f64>> {
    (0..x.len() / 2).map(|u| Vector2::new(x[2 * u], x[2 * u + 1])).collect()
}

#[derive(Debug, Clone)]
pub struct StepOutcome {
    pub positions: Vec<Vector2<f64>>,
    pub surrogate: f64,
    pub inner_iters: usize,
    pub converged: bool,
}

/// Maximizes the reduced surrogate over the step region, starting from the
/// expansion point. Falls back to the expansion point when the inner solver
/// runs out of iterations.
pub fn sca_step(
    problem: &LocationProblem<'_>,
    coeffs: &SurrogateCoefficients,
    solver: &SolverConfig,
) -> StepOutcome {
    let region = StepRegion::new(&coeffs.expansion, problem.area_side, problem.safety_distance);
    let start = stack_positions(&coeffs.expansion);
    let eval = |x: &DVector<f64>| reduced_surrogate(problem, coeffs, &unstack_positions(x));
    let mut x = start.clone();
    let mut fx = eval(&x);
    let mut converged = false;
    let mut iters = 0;
    while iters < solver.inner_max_iters {
        iters += 1;
        let grad = stack_positions(&reduced_gradient(problem, coeffs, &unstack_positions(&x)));
        let gnorm = grad.norm();
        if gnorm == 0.0 {
            converged = true;
            break;
        }
        let dir = &grad / gnorm;
        let mut step = START_STEP;
        let mut accepted = None;
        for _ in 0..=MAX_BACKTRACKS {
            let trial = region.restore(&x, &region.project(&(&x + &dir * step)));
            let moved = &trial - &x;
            let ft = eval(&trial);
            if moved.norm() > 0.0 && ft >= fx + ARMIJO_C * grad.dot(&moved) && ft >= fx {
                accepted = Some((trial, ft));
                break;
            }
            step *= 0.5;
        }
        let Some((next, fnext)) = accepted else {
            // no ascent direction survives projection at the finest step
            converged = true;
            break;
        };
        let moved = (&next - &x).norm();
        x = next;
        fx = fnext;
        if moved < solver.inner_tolerance {
            converged = true;
            break;
        }
    }
    if converged {
        StepOutcome {
            positions: unstack_positions(&x),
            surrogate: fx,
            inner_iters: iters,
            converged,
        }
    } else {
        StepOutcome {
            positions: coeffs.expansion.clone(),
            surrogate: eval(&start),
            inner_iters: iters,
            converged,
        }
    }
}

/// One row of the per-step SCA trace.
#[derive(Debug, Clone, PartialEq)]
pub struct ScaTraceRow {
    pub outer_iter: usize,
    pub surrogate: f64,
    pub true_capacity: f64,
    pub max_position_delta: f64,
    pub accepted: bool,
}

/// Iterate state of the outer SCA loop.
#[derive(Debug, Clone)]
pub struct ScaState {
    pub positions: Vec<Vector2<f64>>,
    pub iteration: usize,
    pub capacity: f64,
    /// True capacity after each accepted step, starting at the initial point.
    pub capacity_history: Vec<f64>,
    pub trace: Vec<ScaTraceRow>,
    pub inner_failures: usize,
}

/// Repeats coefficients → step → safeguard until the UAVs stop moving or
/// `solver.sca_max_iters` is reached. Steps that lose true capacity or
/// break the placement constraints are rejected and end the loop.
pub fn optimize_locations(
    problem: &LocationProblem<'_>,
    start: &[Vector2<f64>],
    solver: &SolverConfig,
) -> Result<ScaState> {
    let mut state = ScaState {
        positions: start.to_vec(),
        iteration: 0,
        capacity: problem.true_capacity(start),
        capacity_history: Vec::new(),
        trace: Vec::new(),
        inner_failures: 0,
    };
    state.capacity_history.push(state.capacity);
    while state.iteration < solver.sca_max_iters {
        state.iteration += 1;
        let coeffs = surrogate_coefficients(problem, &state.positions)?;
        let step = sca_step(problem, &coeffs, solver);
        if !step.converged {
            state.inner_failures += 1;
        }
        let max_delta = step
            .positions
            .iter()
            .zip(&state.positions)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max);
        let cap = problem.true_capacity(&step.positions);
        let feasible = placement_ok(problem, &step.positions);
        let accepted = feasible && cap >= state.capacity - SAFEGUARD_TOL;
        state.trace.push(ScaTraceRow {
            outer_iter: state.iteration,
            surrogate: step.surrogate,
            true_capacity: cap,
            max_position_delta: max_delta,
            accepted,
        });
        if !accepted {
            break;
        }
        state.positions = step.positions;
        state.capacity = cap;
        state.capacity_history.push(cap);
        if max_delta < solver.sca_position_tol {
            break;
        }
    }
    Ok(state)
}

fn placement_ok(problem: &LocationProblem<'_>, q: &[Vector2<f64>]) -> bool {
    let side = problem.area_side;
    if q.iter().any(|p| p.x < 0.0 || p.x > side || p.y < 0.0 || p.y > side) {
        return false;
    }
    for a in 0..q.len() {
        for b in a + 1..q.len() {
            if (q[a] - q[b]).norm() < problem.safety_distance {
                return false;
            }
        }
    }
    true
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::SimConfig;
    use crate::scenario::build_scenario;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn instance(seed: u64) -> (Scenario, Association, DMatrix<f64>) {
        let cfg = SimConfig::paper_default(3);
        let sc = build_scenario(&cfg, seed).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let gp = DMatrix::from_fn(5, 3, |_, _| rng.random_range(0.1..5.0));
        let assoc = Association::from_pairs(5, 3, &[(0, 0), (2, 1), (4, 2)]).unwrap();
        (sc, assoc, gp)
    }

    fn problem<'a>(sc: &'a Scenario, assoc: &'a Association, gp: &DMatrix<f64>) -> LocationProblem<'a> {
        let cfg = SimConfig::paper_default(3);
        LocationProblem::new(sc, assoc, gp, cfg.ref_gain, cfg.tx_power, cfg.noise_power, 1.0)
    }

    #[test]
    fn coefficients_positive_and_tight() {
        for seed in 0..100 {
            let (sc, assoc, gp) = instance(seed);
            let p = problem(&sc, &assoc, &gp);
            let q: Vec<_> = (0..3).map(|u| sc.horizontal(u)).collect();
            let c = surrogate_coefficients(&p, &q).unwrap();
            assert!(c.a.iter().all(|&a| a > 0.0));
            let r = reduced_surrogate(&p, &c, &q);
            assert!((r - p.true_capacity(&q)).abs() <= 1e-10, "{r}");
        }
    }

    #[test]
    fn single_user_b_term() {
        let cfg = SimConfig::paper_default(1);
        let mut sc = build_scenario(&cfg, 2).unwrap();
        sc.users.truncate(1);
        sc.uavs.truncate(1);
        let assoc = Association::from_pairs(1, 1, &[(0, 0)]).unwrap();
        let gp = DMatrix::from_element(1, 1, 2.0);
        let p = problem(&sc, &assoc, &gp);
        let q = vec![sc.horizontal(0)];
        let c = surrogate_coefficients(&p, &q).unwrap();
        let d2 = sc.distance_sq(0, 0);
        let expect = (cfg.ref_gain * cfg.tx_power * 2.0 / d2 + cfg.noise_power).log2();
        assert!((c.b[(0, 0)] - expect).abs() < 1e-12);
    }

    #[test]
    fn increasing_slack_increases_value() {
        let (sc, assoc, gp) = instance(3);
        let p = problem(&sc, &assoc, &gp);
        let q: Vec<_> = (0..3).map(|u| sc.horizontal(u)).collect();
        let c = surrogate_coefficients(&p, &q).unwrap();
        let s = c.slack_bound(&p, &q);
        let base = surrogate_value(&p, &c, &q, &s).unwrap();
        // user 1 is unassociated, so it interferes at every UAV
        let mut bigger = s.clone();
        bigger[(1, 0)] *= 1.5;
        assert!(surrogate_value(&p, &c, &q, &bigger).unwrap() > base);
        let mut bad = s;
        bad[(1, 0)] = 0.0;
        assert!(surrogate_value(&p, &c, &q, &bad).is_err());
    }

    #[test]
    fn projection_lands_in_region() {
        let q = vec![Vector2::new(100.0, 100.0), Vector2::new(250.0, 100.0)];
        let region = StepRegion::new(&q, 1000.0, 100.0);
        let x = DVector::from_vec(vec![180.0, 100.0, 200.0, 100.0]);
        let y = region.project(&x);
        let y = region.restore(&stack_positions(&q), &y);
        assert!(region.contains(&y));
        let pts = unstack_positions(&y);
        assert!((pts[0] - pts[1]).norm() >= 100.0);
        let outside = DVector::from_vec(vec![-5.0, 1200.0, 500.0, 500.0]);
        assert!(region.contains(&region.project(&outside)) || {
            let r = region.restore(&stack_positions(&q), &region.project(&outside));
            region.contains(&r)
        });
    }

    #[test]
    fn lone_uav_moves_toward_user() {
        let cfg = SimConfig::paper_default(1);
        let mut sc = build_scenario(&cfg, 1).unwrap();
        sc.users = vec![Vector3::new(300.0, 400.0, 0.0)];
        sc.uavs = vec![Vector3::new(700.0, 100.0, 50.0)];
        let assoc = Association::from_pairs(1, 1, &[(0, 0)]).unwrap();
        let gp = DMatrix::from_element(1, 1, 1.0);
        let p = problem(&sc, &assoc, &gp);
        let q = vec![sc.horizontal(0)];
        let c = surrogate_coefficients(&p, &q).unwrap();
        let step = sca_step(&p, &c, &SolverConfig::default());
        let before = (q[0] - Vector2::new(300.0, 400.0)).norm();
        let after = (step.positions[0] - Vector2::new(300.0, 400.0)).norm();
        assert!(after < before);
        let dir = (step.positions[0] - q[0]).normalize();
        let want = (Vector2::new(300.0, 400.0) - q[0]).normalize();
        assert!(dir.dot(&want) > 1.0 - 1e-6);
    }

    #[test]
    fn fixed_point_is_kept() {
        let cfg = SimConfig::paper_default(1);
        let mut sc = build_scenario(&cfg, 1).unwrap();
        sc.users = vec![Vector3::new(300.0, 400.0, 0.0)];
        sc.uavs = vec![Vector3::new(300.0, 400.0, 50.0)];
        let assoc = Association::from_pairs(1, 1, &[(0, 0)]).unwrap();
        let gp = DMatrix::from_element(1, 1, 1.0);
        let p = problem(&sc, &assoc, &gp);
        let q = vec![sc.horizontal(0)];
        let out = optimize_locations(&p, &q, &SolverConfig::default()).unwrap();
        assert!((out.positions[0] - q[0]).norm() < 1e-6);
    }

    #[test]
    fn accepted_steps_never_lose_capacity() {
        for seed in 0..20 {
            let (sc, assoc, gp) = instance(seed);
            let p = problem(&sc, &assoc, &gp);
            let q: Vec<_> = (0..3).map(|u| sc.horizontal(u)).collect();
            let out = optimize_locations(&p, &q, &SolverConfig::default()).unwrap();
            for w in out.capacity_history.windows(2) {
                assert!(w[1] >= w[0] - SAFEGUARD_TOL);
            }
            assert!(sc.with_uavs(&out.positions).is_feasible());
        }
    }
}
