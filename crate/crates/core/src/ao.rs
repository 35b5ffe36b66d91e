//! Alternating optimization over association, placement and SIM phases.
//!
//! [`run_alternating`] is the outer loop. What each block does is supplied by
//! a [`BlockSolvers`] implementation: the exact solvers give the AO scheme,
//! and the baselines plug in restricted or population-based variants.

use nalgebra::Vector2;

use crate::association::{solve_association, Association};
use crate::channel::{ChannelSet, Evaluator, LinkParams, Receiver};
use crate::config::SimConfig;
use crate::error::Result;
use crate::location::{optimize_locations, LocationProblem};
use crate::phase::optimize_phases;
use crate::physics::{PhaseProfile, SimStack};
use crate::rng;
use crate::scenario::Scenario;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Block {
    Init,
    Assoc,
    Loc,
    Phase,
    /// One candidate of a sampling baseline.
    Sample,
}

impl Block {
    pub fn as_str(self) -> &'static str {
        match self {
            Block::Init => "init",
            Block::Assoc => "assoc",
            Block::Loc => "loc",
            Block::Phase => "phase",
            Block::Sample => "sample",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Termination {
    Converged,
    MaxIters,
    Error(String),
}

impl Termination {
    pub fn as_str(&self) -> &'static str {
        match self {
            Termination::Converged => "converged",
            Termination::MaxIters => "max_iters",
            Termination::Error(_) => "error",
        }
    }
}

/// Capacities seen during one outer iteration.
#[derive(Debug, Clone, PartialEq)]
pub struct IterationRecord {
    pub tau: usize,
    /// R^τ, the capacity at the end of the iteration.
    pub capacity: f64,
    /// Capacity after each block that ran, in order.
    pub blocks: Vec<(Block, f64)>,
}

/// A network state: who is served by whom, where the UAVs are and how the
/// SIMs are configured.
#[derive(Debug, Clone, PartialEq)]
pub struct Iterate {
    pub association: Association,
    pub scenario: Scenario,
    pub phases: PhaseProfile,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Solution {
    pub association: Association,
    pub scenario: Scenario,
    pub phases: PhaseProfile,
    pub capacity: f64,
    pub trace: Vec<IterationRecord>,
    pub termination: Termination,
}

impl Solution {
    pub fn positions(&self) -> Vec<Vector2<f64>> {
        (0..self.scenario.num_uavs()).map(|u| self.scenario.horizontal(u)).collect()
    }

    /// Flattened (τ, block, capacity) rows, one per recorded block.
    pub fn trace_rows(&self) -> Vec<(usize, Block, f64)> {
        self.trace
            .iter()
            .flat_map(|r| r.blocks.iter().map(move |&(b, c)| (r.tau, b, c)))
            .collect()
    }
}

/// Fixed inputs shared by every block of one run. The channel set is owned so
/// the driver can refresh its path gains when the UAVs move.
#[derive(Debug, Clone)]
pub struct AoContext<'a> {
    pub cfg: &'a SimConfig,
    pub receiver: Receiver<'a>,
    pub channels: ChannelSet,
    pub params: LinkParams,
}

impl<'a> AoContext<'a> {
    pub fn new(cfg: &'a SimConfig, receiver: Receiver<'a>, channels: ChannelSet) -> Self {
        Self {
            cfg,
            receiver,
            channels,
            params: LinkParams::from_config(cfg),
        }
    }

    pub fn evaluator(&self) -> Evaluator<'_> {
        Evaluator::new(self.receiver, &self.channels, self.params)
    }

    pub fn capacity(&self, it: &Iterate) -> Result<f64> {
        self.evaluator().capacity(&it.scenario, &it.phases, &it.association)
    }
}

/// One solver per block. Returning `None` skips the block for this run.
pub trait BlockSolvers {
    fn association(&mut self, ctx: &AoContext<'_>, it: &Iterate) -> Result<Option<Association>>;
    fn locations(&mut self, ctx: &AoContext<'_>, it: &Iterate) -> Result<Option<Vec<Vector2<f64>>>>;
    fn phases(&mut self, ctx: &AoContext<'_>, it: &Iterate) -> Result<Option<PhaseProfile>>;
}

/// Exact association, safeguarded SCA and layer-by-layer phases, each of
/// which can be switched off.
#[derive(Debug, Clone, Copy)]
pub struct ExactBlocks {
    pub locations: bool,
    pub phases: bool,
}

impl ExactBlocks {
    pub const FULL: ExactBlocks = ExactBlocks {
        locations: true,
        phases: true,
    };
}

impl BlockSolvers for ExactBlocks {
    fn association(&mut self, ctx: &AoContext<'_>, it: &Iterate) -> Result<Option<Association>> {
        let metrics = ctx.evaluator().metrics(&it.scenario, &it.phases)?;
        solve_association(&metrics.rate).map(Some)
    }

    fn locations(&mut self, ctx: &AoContext<'_>, it: &Iterate) -> Result<Option<Vec<Vector2<f64>>>> {
        if !self.locations {
            return Ok(None);
        }
        let gain_power = ctx.evaluator().gain_power(&it.phases)?;
        let problem = LocationProblem::new(
            &it.scenario,
            &it.association,
            &gain_power,
            ctx.params.ref_gain,
            ctx.params.tx_power,
            ctx.params.noise_power,
            ctx.cfg.solver.slack_floor,
        );
        let start: Vec<_> = (0..it.scenario.num_uavs()).map(|u| it.scenario.horizontal(u)).collect();
        Ok(Some(optimize_locations(&problem, &start, &ctx.cfg.solver)?.positions))
    }

    fn phases(&mut self, ctx: &AoContext<'_>, it: &Iterate) -> Result<Option<PhaseProfile>> {
        let Receiver::Sim(stack) = ctx.receiver else {
            return Ok(None);
        };
        if !self.phases {
            return Ok(None);
        }
        let (phases, _) = optimize_phases(
            stack,
            &it.phases,
            &it.association,
            &ctx.channels,
            ctx.cfg.solver.phase_iters,
        )?;
        Ok(Some(phases))
    }
}

/// Q⁰ from the scenario and ϑ⁰ uniform on [0, 2π), drawn from a stream keyed
/// by `(seed, L)` so every method starting at the same L starts from the
/// same phases.
pub fn initialize(cfg: &SimConfig, scenario: &Scenario, seed: u64) -> (Vec<Vector2<f64>>, PhaseProfile) {
    let mut r = rng::substream(&["init-phases".into(), seed.into(), cfg.layers.into()]);
    let q = (0..scenario.num_uavs()).map(|u| scenario.horizontal(u)).collect();
    let phases = PhaseProfile::random(scenario.num_uavs(), cfg.layers, cfg.atoms_per_layer, &mut r);
    (q, phases)
}

/// Alternates association → placement → phases until R^τ − R^{τ−1} ≤ ε or
/// τ reaches the iteration cap. The returned state is the best one visited;
/// the trace keeps the raw sequence. A failing block ends the run with
/// [`Termination::Error`] and whatever was reached so far.
pub fn run_alternating(
    mut ctx: AoContext<'_>,
    start: Iterate,
    solvers: &mut dyn BlockSolvers,
) -> Result<Solution> {
    let solver = &ctx.cfg.solver;
    let (tolerance, max_iters) = (solver.ao_tolerance, solver.ao_max_iters);
    ctx.channels.relocate(&start.scenario);
    let mut current = start;
    let mut prev = ctx.capacity(&current)?;
    let mut best = (current.clone(), prev);
    let mut trace = vec![IterationRecord {
        tau: 0,
        capacity: prev,
        blocks: vec![(Block::Init, prev)],
    }];
    let mut termination = Termination::MaxIters;

    for tau in 1..=max_iters {
        let mut record = IterationRecord {
            tau,
            capacity: prev,
            blocks: Vec::new(),
        };
        let outcome = one_round(&mut ctx, &mut current, solvers, &mut record, &mut best);
        record.capacity = record.blocks.last().map_or(prev, |&(_, c)| c);
        let r_tau = record.capacity;
        trace.push(record);
        if let Err(e) = outcome {
            termination = Termination::Error(e.to_string());
            break;
        }
        if r_tau - prev <= tolerance {
            termination = Termination::Converged;
            break;
        }
        prev = r_tau;
    }

    let (state, capacity) = best;
    Ok(Solution {
        association: state.association,
        scenario: state.scenario,
        phases: state.phases,
        capacity,
        trace,
        termination,
    })
}

fn one_round(
    ctx: &mut AoContext<'_>,
    current: &mut Iterate,
    solvers: &mut dyn BlockSolvers,
    record: &mut IterationRecord,
    best: &mut (Iterate, f64),
) -> Result<()> {
    let mut note = |ctx: &AoContext<'_>, it: &Iterate, block: Block| -> Result<()> {
        let r = ctx.capacity(it)?;
        record.blocks.push((block, r));
        if r > best.1 {
            *best = (it.clone(), r);
        }
        Ok(())
    };
    if let Some(a) = solvers.association(ctx, current)? {
        current.association = a;
        note(ctx, current, Block::Assoc)?;
    }
    if let Some(q) = solvers.locations(ctx, current)? {
        current.scenario = current.scenario.with_uavs(&q);
        ctx.channels.relocate(&current.scenario);
        note(ctx, current, Block::Loc)?;
    }
    if let Some(p) = solvers.phases(ctx, current)? {
        current.phases = p;
        note(ctx, current, Block::Phase)?;
    }
    Ok(())
}

/// The full scheme: exact association, SCA placement and layer-by-layer
/// phases from the seeded initial point.
pub fn run_ao(
    cfg: &SimConfig,
    stack: &SimStack,
    scenario: &Scenario,
    channels: &ChannelSet,
    seed: u64,
) -> Result<Solution> {
    let (_, phases) = initialize(cfg, scenario, seed);
    let start = Iterate {
        association: Association::empty(scenario.num_users(), scenario.num_uavs()),
        scenario: scenario.clone(),
        phases,
    };
    let ctx = AoContext::new(cfg, Receiver::Sim(stack), channels.clone());
    let mut blocks = ExactBlocks::FULL;
    run_alternating(ctx, start, &mut blocks)
}
