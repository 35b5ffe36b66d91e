//! Comparison schemes: uniform and random deployment, a UAV without a SIM,
//! and AO with each block solved by PSO or DE.

use nalgebra::Vector2;
use rand::seq::SliceRandom;
use rand::Rng;
use rayon::prelude::*;

use crate::ao::{
    initialize, run_alternating, AoContext, Block, BlockSolvers, ExactBlocks, Iterate, IterationRecord, Solution,
    Termination,
};
use crate::association::Association;
use crate::channel::{ChannelSet, Evaluator, LinkParams, Receiver};
use crate::config::SimConfig;
use crate::error::Result;
use crate::physics::{wrap_phase, PhaseProfile, SimStack, TWO_PI};
use crate::rng::{self, SimRng};
use crate::scenario::{random_uav_positions, Scenario};

/// Independent stream for one (method, L, seed) run under the master seed.
pub fn method_stream(cfg: &SimConfig, method: &str, seed: u64) -> SimRng {
    rng::substream(&[
        cfg.experiment.seed.into(),
        method.into(),
        cfg.layers.into(),
        seed.into(),
    ])
}

fn start_iterate(cfg: &SimConfig, scenario: &Scenario, seed: u64) -> Iterate {
    let (_, phases) = initialize(cfg, scenario, seed);
    Iterate {
        association: Association::empty(scenario.num_users(), scenario.num_uavs()),
        scenario: scenario.clone(),
        phases,
    }
}

/// Centers of `n` equal-width vertical strips of a square of side `side`.
pub fn strip_centers(n: usize, side: f64) -> Vec<Vector2<f64>> {
    (0..n)
        .map(|i| Vector2::new((2 * i + 1) as f64 * side / (2 * n) as f64, side / 2.0))
        .collect()
}

/// UAVs fixed at the strip centers; association and phases alternate until
/// the usual stopping rule.
pub fn uniform_deployment(
    cfg: &SimConfig,
    stack: &SimStack,
    scenario: &Scenario,
    channels: &ChannelSet,
    seed: u64,
) -> Result<Solution> {
    let placed = scenario.with_uavs(&strip_centers(scenario.num_uavs(), scenario.area_side));
    let start = start_iterate(cfg, &placed, seed);
    let ctx = AoContext::new(cfg, Receiver::Sim(stack), channels.clone());
    let mut blocks = ExactBlocks {
        locations: false,
        phases: true,
    };
    run_alternating(ctx, start, &mut blocks)
}

/// Best of `count` independent draws of placement, association and phases.
/// The trace holds the best capacity after each draw.
pub fn random_solution(
    cfg: &SimConfig,
    stack: &SimStack,
    scenario: &Scenario,
    channels: &ChannelSet,
    seed: u64,
    count: usize,
) -> Result<Solution> {
    let mut rng = method_stream(cfg, "rd", seed);
    let eval = Evaluator::new(Receiver::Sim(stack), channels, LinkParams::from_config(cfg));
    let (m_count, u_count) = (scenario.num_users(), scenario.num_uavs());
    let mut best: Option<(Iterate, f64)> = None;
    let mut trace = Vec::with_capacity(count);
    for i in 0..count.max(1) {
        let q = random_uav_positions(cfg, &mut rng)?;
        let mut users: Vec<usize> = (0..m_count).collect();
        users.shuffle(&mut rng);
        let pairs: Vec<_> = (0..u_count.min(m_count)).map(|u| (users[u], u)).collect();
        let cand = Iterate {
            association: Association::from_pairs(m_count, u_count, &pairs)?,
            scenario: scenario.with_uavs(&q),
            phases: PhaseProfile::random(u_count, cfg.layers, cfg.atoms_per_layer, &mut rng),
        };
        let r = eval.capacity(&cand.scenario, &cand.phases, &cand.association)?;
        if best.as_ref().is_none_or(|(_, b)| r > *b) {
            best = Some((cand, r));
        }
        let best_r = best.as_ref().map_or(r, |b| b.1);
        trace.push(IterationRecord {
            tau: i + 1,
            capacity: best_r,
            blocks: vec![(Block::Sample, best_r)],
        });
    }
    let (state, capacity) = best.expect("at least one candidate");
    Ok(Solution {
        association: state.association,
        scenario: state.scenario,
        phases: state.phases,
        capacity,
        trace,
        termination: Termination::Converged,
    })
}

/// Each UAV carries one bare antenna that sees the first fading component.
/// Association and placement are optimized as in AO; there are no phases.
pub fn without_sim_capacity(cfg: &SimConfig, scenario: &Scenario, channels: &ChannelSet) -> Result<Solution> {
    let start = Iterate {
        association: Association::empty(scenario.num_users(), scenario.num_uavs()),
        scenario: scenario.clone(),
        phases: PhaseProfile::zeros(scenario.num_uavs(), cfg.layers, cfg.atoms_per_layer),
    };
    let ctx = AoContext::new(cfg, Receiver::Bare, channels.clone());
    let mut blocks = ExactBlocks {
        locations: true,
        phases: false,
    };
    run_alternating(ctx, start, &mut blocks)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Metaheuristic {
    Pso,
    De,
}

/// Box for a population search. Periodic boxes wrap instead of clamping.
#[derive(Debug, Clone, Copy)]
pub struct SearchSpace {
    pub dim: usize,
    pub lo: f64,
    pub hi: f64,
    pub periodic: bool,
}

impl SearchSpace {
    fn confine(&self, x: f64) -> f64 {
        if self.periodic {
            self.lo + (x - self.lo).rem_euclid(self.hi - self.lo)
        } else {
            x.clamp(self.lo, self.hi)
        }
    }

    /// Displacement from `from` to `to`, the short way round when periodic.
    fn delta(&self, from: f64, to: f64) -> f64 {
        let d = to - from;
        if self.periodic {
            let w = self.hi - self.lo;
            d - w * (d / w).round()
        } else {
            d
        }
    }

    fn sample(&self, rng: &mut SimRng) -> Vec<f64> {
        (0..self.dim).map(|_| rng.random_range(self.lo..self.hi)).collect()
    }
}

/// A fitness value plus whether the candidate may be returned.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Score {
    pub value: f64,
    pub feasible: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SearchResult {
    /// Best feasible candidate seen, if any.
    pub best: Option<(Vec<f64>, f64)>,
    /// Best feasible value after each generation (generation 0 is the
    /// initial population).
    pub history: Vec<f64>,
}

pub const PSO_INERTIA: f64 = 0.729;
pub const PSO_ACCEL: f64 = 1.49445;
pub const DE_WEIGHT: f64 = 0.5;
pub const DE_CROSSOVER: f64 = 0.9;

struct Tracker {
    best: Option<(Vec<f64>, f64)>,
}

impl Tracker {
    fn offer(&mut self, x: &[f64], s: Score) {
        if s.feasible && self.best.as_ref().is_none_or(|(_, b)| s.value > *b) {
            self.best = Some((x.to_vec(), s.value));
        }
    }

    fn value(&self) -> f64 {
        self.best.as_ref().map_or(f64::NEG_INFINITY, |b| b.1)
    }
}

fn score_all<F>(xs: &[Vec<f64>], fitness: &F) -> Vec<Score>
where
    F: Fn(&[f64]) -> Score + Sync,
{
    xs.par_iter().map(|x| fitness(x)).collect()
}

/// Maximizes `fitness` over `space` with `iters` generations of `pop`
/// individuals. `incumbent`, if given, replaces the first random individual.
pub fn population_search<F>(
    kind: Metaheuristic,
    space: SearchSpace,
    incumbent: Option<&[f64]>,
    fitness: F,
    iters: usize,
    pop: usize,
    rng: &mut SimRng,
) -> SearchResult
where
    F: Fn(&[f64]) -> Score + Sync,
{
    let pop = pop.max(4);
    let mut xs: Vec<Vec<f64>> = (0..pop).map(|_| space.sample(rng)).collect();
    if let Some(x0) = incumbent {
        xs[0] = x0.iter().map(|&v| space.confine(v)).collect();
    }
    let mut scores = score_all(&xs, &fitness);
    let mut tracker = Tracker { best: None };
    for (x, s) in xs.iter().zip(&scores) {
        tracker.offer(x, *s);
    }
    let mut history = vec![tracker.value()];
    match kind {
        Metaheuristic::Pso => {
            let vmax = 0.2 * (space.hi - space.lo);
            let mut vs = vec![vec![0.0; space.dim]; pop];
            let mut pbest = xs.clone();
            let mut pscore: Vec<f64> = scores.iter().map(|s| s.value).collect();
            let lead = |ps: &[f64]| (0..ps.len()).fold(0, |b, i| if ps[i] > ps[b] { i } else { b });
            let mut g = lead(&pscore);
            for _ in 0..iters {
                for i in 0..pop {
                    for d in 0..space.dim {
                        let (r1, r2): (f64, f64) = (rng.random(), rng.random());
                        let v = PSO_INERTIA * vs[i][d]
                            + PSO_ACCEL * r1 * space.delta(xs[i][d], pbest[i][d])
                            + PSO_ACCEL * r2 * space.delta(xs[i][d], pbest[g][d]);
                        vs[i][d] = v.clamp(-vmax, vmax);
                        xs[i][d] = space.confine(xs[i][d] + vs[i][d]);
                    }
                }
                scores = score_all(&xs, &fitness);
                for i in 0..pop {
                    tracker.offer(&xs[i], scores[i]);
                    if scores[i].value > pscore[i] {
                        pscore[i] = scores[i].value;
                        pbest[i].clone_from(&xs[i]);
                    }
                }
                g = lead(&pscore);
                history.push(tracker.value());
            }
        }
        Metaheuristic::De => {
            for _ in 0..iters {
                let trials: Vec<Vec<f64>> = (0..pop)
                    .map(|i| {
                        let [a, b, c] = distinct_three(pop, i, rng);
                        let forced = rng.random_range(0..space.dim);
                        (0..space.dim)
                            .map(|d| {
                                if d == forced || rng.random::<f64>() < DE_CROSSOVER {
                                    let v = xs[a][d] + DE_WEIGHT * space.delta(xs[c][d], xs[b][d]);
                                    space.confine(v)
                                } else {
                                    xs[i][d]
                                }
                            })
                            .collect()
                    })
                    .collect();
                let trial_scores = score_all(&trials, &fitness);
                for (i, (t, s)) in trials.into_iter().zip(trial_scores).enumerate() {
                    tracker.offer(&t, s);
                    if s.value >= scores[i].value {
                        xs[i] = t;
                        scores[i] = s;
                    }
                }
                history.push(tracker.value());
            }
        }
    }
    SearchResult {
        best: tracker.best,
        history,
    }
}

fn distinct_three(pop: usize, exclude: usize, rng: &mut SimRng) -> [usize; 3] {
    let mut out = [usize::MAX; 3];
    let mut n = 0;
    while n < 3 {
        let r = rng.random_range(0..pop);
        if r != exclude && !out[..n].contains(&r) {
            out[n] = r;
            n += 1;
        }
    }
    out
}

/// Users ranked by key; UAV u serves the u-th ranked user.
pub fn decode_association(keys: &[f64], num_uavs: usize) -> Association {
    let mut order: Vec<usize> = (0..keys.len()).collect();
    order.sort_by(|&a, &b| keys[a].total_cmp(&keys[b]).then(a.cmp(&b)));
    let pairs: Vec<_> = (0..num_uavs.min(keys.len())).map(|u| (order[u], u)).collect();
    Association::from_pairs(keys.len(), num_uavs, &pairs).expect("decoded pairs are one-to-one")
}

/// Keys that decode back to `assoc` (served users first, in UAV order).
fn encode_association(assoc: &Association) -> Vec<f64> {
    let n = assoc.num_users() as f64;
    let mut keys = vec![0.0; assoc.num_users()];
    let mut next = assoc.num_uavs();
    for (m, key) in keys.iter_mut().enumerate() {
        *key = match assoc.uav_of(m) {
            Some(u) => u as f64 / n,
            None => {
                next += 1;
                (next - 1) as f64 / n
            }
        };
    }
    keys
}

/// Sum of pairwise shortfalls below the safety distance (meters).
fn separation_shortfall(q: &[Vector2<f64>], d_min: f64) -> f64 {
    let mut total = 0.0;
    for a in 0..q.len() {
        for b in a + 1..q.len() {
            total += (d_min - (q[a] - q[b]).norm()).max(0.0);
        }
    }
    total
}

/// Capacity lost per meter of safety-distance shortfall.
const SEPARATION_PENALTY: f64 = 1.0;

/// Block solvers that run a population search per block, always keeping
/// the incumbent when the search finds nothing better.
pub struct EvolutionaryBlocks {
    pub kind: Metaheuristic,
    pub iters: usize,
    pub population: usize,
    pub rng: SimRng,
    /// Best-so-far value per generation, appended by every block.
    pub generations: Vec<(Block, Vec<f64>)>,
}

impl EvolutionaryBlocks {
    fn search<F>(&mut self, block: Block, space: SearchSpace, incumbent: Option<&[f64]>, fitness: F) -> Option<Vec<f64>>
    where
        F: Fn(&[f64]) -> Score + Sync,
    {
        let res = population_search(
            self.kind,
            space,
            incumbent,
            fitness,
            self.iters,
            self.population,
            &mut self.rng,
        );
        self.generations.push((block, res.history));
        res.best.map(|b| b.0)
    }
}

impl BlockSolvers for EvolutionaryBlocks {
    fn association(&mut self, ctx: &AoContext<'_>, it: &Iterate) -> Result<Option<Association>> {
        let rates = ctx.evaluator().metrics(&it.scenario, &it.phases)?.rate;
        let (m_count, u_count) = rates.shape();
        let objective = |a: &Association| a.objective(&rates);
        let fitness = |x: &[f64]| Score {
            value: objective(&decode_association(x, u_count)),
            feasible: true,
        };
        let space = SearchSpace {
            dim: m_count,
            lo: 0.0,
            hi: 1.0,
            periodic: false,
        };
        let incumbent = (!it.association.is_empty()).then(|| encode_association(&it.association));
        let found = self.search(Block::Assoc, space, incumbent.as_deref(), fitness);
        let cand = found.map(|x| decode_association(&x, u_count));
        Ok(match cand {
            Some(a) if it.association.is_empty() || objective(&a) >= objective(&it.association) => Some(a),
            _ => Some(it.association.clone()),
        })
    }

    fn locations(&mut self, ctx: &AoContext<'_>, it: &Iterate) -> Result<Option<Vec<Vector2<f64>>>> {
        let eval = ctx.evaluator();
        let normalized = eval.normalized_gains(&it.phases)?;
        let u_count = it.scenario.num_uavs();
        let d_min = it.scenario.safety_distance;
        let as_points = |x: &[f64]| -> Vec<Vector2<f64>> { x.chunks(2).map(|c| Vector2::new(c[0], c[1])).collect() };
        let fitness = |x: &[f64]| {
            let q = as_points(x);
            let shortfall = separation_shortfall(&q, d_min);
            let cap = eval
                .metrics_from_normalized(&normalized, &it.scenario.with_uavs(&q))
                .capacity(&it.association);
            Score {
                value: cap - SEPARATION_PENALTY * shortfall,
                feasible: shortfall == 0.0,
            }
        };
        let current: Vec<f64> = (0..u_count)
            .flat_map(|u| {
                let p = it.scenario.horizontal(u);
                [p.x, p.y]
            })
            .collect();
        let space = SearchSpace {
            dim: 2 * u_count,
            lo: 0.0,
            hi: it.scenario.area_side,
            periodic: false,
        };
        let base = fitness(&current).value;
        let found = self.search(Block::Loc, space, Some(&current), fitness);
        Ok(Some(match found {
            Some(x) if fitness(&x).value >= base => as_points(&x),
            _ => as_points(&current),
        }))
    }

    fn phases(&mut self, ctx: &AoContext<'_>, it: &Iterate) -> Result<Option<PhaseProfile>> {
        if matches!(ctx.receiver, Receiver::Bare) {
            return Ok(None);
        }
        let eval = ctx.evaluator();
        let (u_count, layers, atoms) = (it.phases.num_uavs(), it.phases.num_layers(), it.phases.num_atoms());
        let capacity_of = |x: &[f64]| -> f64 {
            PhaseProfile::from_angles(u_count, layers, atoms, x)
                .and_then(|p| eval.capacity(&it.scenario, &p, &it.association))
                .unwrap_or(f64::NEG_INFINITY)
        };
        let fitness = |x: &[f64]| Score {
            value: capacity_of(x),
            feasible: true,
        };
        let space = SearchSpace {
            dim: u_count * layers * atoms,
            lo: 0.0,
            hi: TWO_PI,
            periodic: true,
        };
        let current = it.phases.as_slice().to_vec();
        let base = capacity_of(&current);
        let found = self.search(Block::Phase, space, Some(&current), fitness);
        Ok(Some(match found {
            Some(x) if capacity_of(&x) >= base => {
                let wrapped: Vec<f64> = x.iter().map(|&t| wrap_phase(t)).collect();
                PhaseProfile::from_angles(u_count, layers, atoms, &wrapped)?
            }
            _ => it.phases.clone(),
        }))
    }
}

/// The AO loop with every block replaced by a PSO or DE search.
pub fn evolutionary_optimize(
    cfg: &SimConfig,
    stack: &SimStack,
    scenario: &Scenario,
    channels: &ChannelSet,
    kind: Metaheuristic,
    seed: u64,
) -> Result<Solution> {
    let label = match kind {
        Metaheuristic::Pso => "pso",
        Metaheuristic::De => "de",
    };
    let mut blocks = EvolutionaryBlocks {
        kind,
        iters: cfg.experiment.evo_iters,
        population: cfg.experiment.evo_population,
        rng: method_stream(cfg, label, seed),
        generations: Vec::new(),
    };
    let start = start_iterate(cfg, scenario, seed);
    let ctx = AoContext::new(cfg, Receiver::Sim(stack), channels.clone());
    run_alternating(ctx, start, &mut blocks)
}
