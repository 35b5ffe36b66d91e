//! Correlated Rayleigh user→SIM channels and the link metrics built on
//! them (effective gain, SINR, rate, network capacity).

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::StandardNormal;

use crate::association::Association;
use crate::config::SimConfig;
use crate::error::{Error, Result};
use crate::physics::{combiner, PhaseProfile, SimStack, C64};
use crate::rng::{self, SimRng};
use crate::scenario::Scenario;

/// Eigenvalues below this (negative) value mean the geometry is broken.
const PSD_TOLERANCE: f64 = -1e-6;

/// Factor F with F Fᵀ = R, via symmetric eigendecomposition with negative
/// eigenvalues clamped to zero. R from the sinc kernel is rank-deficient
/// enough at λ/2 pitch that Cholesky is unreliable.
pub fn correlation_factor(corr: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let eig = corr.clone().symmetric_eigen();
    let min = eig.eigenvalues.min();
    if min < PSD_TOLERANCE {
        return Err(Error::Factorization(min));
    }
    let roots = eig.eigenvalues.map(|e| e.max(0.0).sqrt());
    Ok(&eig.eigenvectors * DMatrix::from_diagonal(&roots))
}

/// Draws CN(0, R) vectors.
#[derive(Debug, Clone)]
pub struct CorrelatedRayleigh {
    factor: DMatrix<f64>,
}

impl CorrelatedRayleigh {
    pub fn new(corr: &DMatrix<f64>) -> Result<Self> {
        Ok(Self {
            factor: correlation_factor(corr)?,
        })
    }

    pub fn factor(&self) -> &DMatrix<f64> {
        &self.factor
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> DVector<C64> {
        let k = self.factor.ncols();
        let half = std::f64::consts::FRAC_1_SQRT_2;
        let z = DVector::from_fn(k, |_, _| {
            let re: f64 = rng.sample(StandardNormal);
            let im: f64 = rng.sample(StandardNormal);
            C64::new(re * half, im * half)
        });
        self.factor.map(|x| C64::new(x, 0.0)) * z
    }
}

/// Small-scale fading per (user, UAV) pair, fixed for one optimization run,
/// plus the distance-dependent path gains of the current placement.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelSet {
    num_users: usize,
    num_uavs: usize,
    /// h̃_{m,u} at index m·U + u.
    fading: Vec<DVector<C64>>,
    path_gain: Vec<f64>,
    realized: Vec<DVector<C64>>,
    ref_gain: f64,
    pub corr_factor: DMatrix<f64>,
}

/// Samples h̃_{m,u} ~ CN(0, R) for every pair and sets β from the scenario.
pub fn sample_channels(
    stack: &SimStack,
    scenario: &Scenario,
    ref_gain: f64,
    seed: u64,
) -> Result<ChannelSet> {
    let gen = CorrelatedRayleigh::new(&stack.corr)?;
    let mut rng: SimRng = rng::substream(&["channels".into(), seed.into()]);
    let (m_count, u_count) = (scenario.num_users(), scenario.num_uavs());
    let mut fading = Vec::with_capacity(m_count * u_count);
    for _m in 0..m_count {
        for _u in 0..u_count {
            fading.push(gen.sample(&mut rng));
        }
    }
    let mut set = ChannelSet {
        num_users: m_count,
        num_uavs: u_count,
        fading,
        path_gain: Vec::new(),
        realized: Vec::new(),
        ref_gain,
        corr_factor: gen.factor,
    };
    set.relocate(scenario);
    Ok(set)
}

impl ChannelSet {
    pub fn num_users(&self) -> usize {
        self.num_users
    }

    pub fn num_uavs(&self) -> usize {
        self.num_uavs
    }

    pub fn ref_gain(&self) -> f64 {
        self.ref_gain
    }

    fn idx(&self, m: usize, u: usize) -> usize {
        m * self.num_uavs + u
    }

    pub fn fading(&self, m: usize, u: usize) -> &DVector<C64> {
        &self.fading[self.idx(m, u)]
    }

    pub fn path_gain(&self, m: usize, u: usize) -> f64 {
        self.path_gain[self.idx(m, u)]
    }

    /// h_{m,u} = √β h̃_{m,u}.
    pub fn channel(&self, m: usize, u: usize) -> &DVector<C64> {
        &self.realized[self.idx(m, u)]
    }

    /// Recomputes β = ρ0 / d² and the realized channels for new UAV
    /// positions. The fading vectors are untouched.
    pub fn relocate(&mut self, scenario: &Scenario) {
        let mut gains = Vec::with_capacity(self.fading.len());
        let mut realized = Vec::with_capacity(self.fading.len());
        for m in 0..self.num_users {
            for u in 0..self.num_uavs {
                let beta = self.ref_gain / scenario.distance_sq(m, u);
                realized.push(&self.fading[self.idx(m, u)] * C64::new(beta.sqrt(), 0.0));
                gains.push(beta);
            }
        }
        self.path_gain = gains;
        self.realized = realized;
    }

    pub fn relocated(&self, scenario: &Scenario) -> Self {
        let mut c = self.clone();
        c.relocate(scenario);
        c
    }
}

/// w¹ᴴ Gᴴ h.
pub fn effective_gain(output_vec: &DVector<C64>, g: &DMatrix<C64>, h: &DVector<C64>) -> Result<C64> {
    let k = output_vec.len();
    if g.shape() != (k, k) || h.len() != k {
        return Err(Error::DimensionMismatch(format!(
            "w¹ has {k} entries, G is {:?}, h has {}",
            g.shape(),
            h.len()
        )));
    }
    Ok((g * output_vec).dotc(h))
}

/// Powers and reference gain shared by every link.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinkParams {
    pub tx_power: f64,
    pub noise_power: f64,
    pub ref_gain: f64,
}

impl LinkParams {
    pub fn from_config(cfg: &SimConfig) -> Self {
        Self {
            tx_power: cfg.tx_power,
            noise_power: cfg.noise_power,
            ref_gain: cfg.ref_gain,
        }
    }
}

/// SINR of user m at the UAV whose per-user gains are `gains_at_uav`.
/// Every other user interferes, associated or not.
pub fn sinr(m: usize, gains_at_uav: &[C64], params: &LinkParams) -> f64 {
    let p = params.tx_power;
    let signal = gains_at_uav[m].norm_sqr() * p;
    let interference: f64 = gains_at_uav
        .iter()
        .enumerate()
        .filter(|&(i, _)| i != m)
        .map(|(_, g)| g.norm_sqr() * p)
        .sum();
    signal / (interference + params.noise_power)
}

pub fn link_rate(sinr: f64) -> f64 {
    (1.0 + sinr).log2()
}

/// Σ α_{m,u} R_{m,u}.
pub fn network_capacity(assoc: &Association, rates: &DMatrix<f64>) -> Result<f64> {
    assoc.validate()?;
    if rates.shape() != (assoc.num_users(), assoc.num_uavs()) {
        return Err(Error::DimensionMismatch(format!(
            "rates {:?} vs association {}x{}",
            rates.shape(),
            assoc.num_users(),
            assoc.num_uavs()
        )));
    }
    Ok(assoc.pairs().map(|(m, u)| rates[(m, u)]).fold(0.0, |acc, r| acc + r))
}

/// Per-pair effective gains, SINRs and rates for one network state.
#[derive(Debug, Clone)]
pub struct LinkMetrics {
    /// g_{m,u} (M×U), path gain included.
    pub gains: DMatrix<C64>,
    pub sinr: DMatrix<f64>,
    pub rate: DMatrix<f64>,
}

impl LinkMetrics {
    pub fn from_gains(gains: DMatrix<C64>, params: &LinkParams) -> Self {
        let (m_count, u_count) = gains.shape();
        let mut sinr_m = DMatrix::zeros(m_count, u_count);
        for u in 0..u_count {
            let col: Vec<C64> = gains.column(u).iter().copied().collect();
            for m in 0..m_count {
                sinr_m[(m, u)] = sinr(m, &col, params);
            }
        }
        let rate = sinr_m.map(link_rate);
        Self {
            gains,
            sinr: sinr_m,
            rate,
        }
    }

    pub fn capacity(&self, assoc: &Association) -> f64 {
        assoc.pairs().map(|(m, u)| self.rate[(m, u)]).fold(0.0, |acc, r| acc + r)
    }
}

/// How a UAV turns a user's fading vector into a scalar gain.
#[derive(Debug, Clone, Copy)]
pub enum Receiver<'a> {
    /// Through the SIM cascade and the output antenna.
    Sim(&'a SimStack),
    /// A bare single antenna seeing the first fading component.
    Bare,
}

/// Evaluates link metrics for a fixed channel realization.
#[derive(Debug, Clone, Copy)]
pub struct Evaluator<'a> {
    pub receiver: Receiver<'a>,
    pub channels: &'a ChannelSet,
    pub params: LinkParams,
}

impl<'a> Evaluator<'a> {
    pub fn new(receiver: Receiver<'a>, channels: &'a ChannelSet, params: LinkParams) -> Self {
        Self {
            receiver,
            channels,
            params,
        }
    }

    /// g̃_{m,u}: the gain with unit path loss. Depends on the phases only.
    pub fn normalized_gains(&self, phases: &PhaseProfile) -> Result<DMatrix<C64>> {
        let (m_count, u_count) = (self.channels.num_users(), self.channels.num_uavs());
        let mut out = DMatrix::zeros(m_count, u_count);
        for u in 0..u_count {
            match self.receiver {
                Receiver::Sim(stack) => {
                    let c = combiner(phases.uav(u), stack)?;
                    for m in 0..m_count {
                        out[(m, u)] = c.dotc(self.channels.fading(m, u));
                    }
                }
                Receiver::Bare => {
                    for m in 0..m_count {
                        out[(m, u)] = self.channels.fading(m, u)[0];
                    }
                }
            }
        }
        Ok(out)
    }

    /// |g̃_{m,u}|².
    pub fn gain_power(&self, phases: &PhaseProfile) -> Result<DMatrix<f64>> {
        Ok(self.normalized_gains(phases)?.map(|g| g.norm_sqr()))
    }

    pub fn metrics_from_normalized(&self, normalized: &DMatrix<C64>, scenario: &Scenario) -> LinkMetrics {
        let gains = DMatrix::from_fn(normalized.nrows(), normalized.ncols(), |m, u| {
            let beta = self.params.ref_gain / scenario.distance_sq(m, u);
            normalized[(m, u)] * beta.sqrt()
        });
        LinkMetrics::from_gains(gains, &self.params)
    }

    pub fn metrics(&self, scenario: &Scenario, phases: &PhaseProfile) -> Result<LinkMetrics> {
        let normalized = self.normalized_gains(phases)?;
        Ok(self.metrics_from_normalized(&normalized, scenario))
    }

    pub fn capacity(&self, scenario: &Scenario, phases: &PhaseProfile, assoc: &Association) -> Result<f64> {
        Ok(self.metrics(scenario, phases)?.capacity(assoc))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scenario::build_scenario;
    use approx::assert_relative_eq;

    fn params() -> LinkParams {
        LinkParams {
            tx_power: 0.5,
            noise_power: 1e-14,
            ref_gain: 1.0,
        }
    }

    #[test]
    fn effective_gain_hand_chain() {
        let w = DVector::from_element(1, C64::new(1.0, 0.0));
        let g = DMatrix::from_element(1, 1, C64::new(0.0, 1.0));
        let h = DVector::from_element(1, C64::new(0.0, 1.0));
        let v = effective_gain(&w, &g, &h).unwrap();
        assert!((v - C64::new(1.0, 0.0)).norm() < 1e-15);
        let zero = DVector::zeros(1);
        assert_eq!(effective_gain(&w, &g, &zero).unwrap(), C64::new(0.0, 0.0));
        let c = C64::new(0.3, -2.0);
        let scaled = effective_gain(&w, &g, &(&h * c)).unwrap();
        assert!((scaled - v * c).norm() < 1e-14);
        assert!(effective_gain(&w, &g, &DVector::zeros(2)).is_err());
    }

    #[test]
    fn sinr_cases() {
        let p = params();
        let one = [C64::new(2.0, 0.0)];
        assert_relative_eq!(sinr(0, &one, &p), 4.0 * 0.5 / 1e-14);
        let zeros = [C64::new(0.0, 0.0); 3];
        assert_eq!(sinr(1, &zeros, &p), 0.0);
        let two = [C64::new(1.0, 0.0), C64::new(0.0, 1.0)];
        assert_relative_eq!(sinr(0, &two, &p), 0.5 / (0.5 + 1e-14), max_relative = 1e-15);
        // common rotation leaves SINR unchanged
        let rot = C64::from_polar(1.0, 0.77);
        let rotated: Vec<C64> = two.iter().map(|g| g * rot).collect();
        assert_relative_eq!(sinr(0, &rotated, &p), sinr(0, &two, &p), max_relative = 1e-14);
    }

    #[test]
    fn rates() {
        assert_eq!(link_rate(0.0), 0.0);
        assert_eq!(link_rate(1.0), 1.0);
        assert_eq!(link_rate(3.0), 2.0);
    }

    #[test]
    fn capacity_sums_associated_rates() {
        let rates = DMatrix::from_row_slice(3, 2, &[1.5, 0.2, 0.1, 2.5, 9.0, 9.0]);
        let none = Association::empty(3, 2);
        assert_eq!(network_capacity(&none, &rates).unwrap(), 0.0);
        let single = Association::from_pairs(3, 2, &[(2, 1)]).unwrap();
        assert_eq!(network_capacity(&single, &rates).unwrap(), 9.0);
        let two = Association::from_pairs(3, 2, &[(0, 0), (1, 1)]).unwrap();
        assert_eq!(network_capacity(&two, &rates).unwrap(), 4.0);
        let bad = Association::from_matrix(&DMatrix::from_row_slice(3, 2, &[1, 1, 0, 0, 0, 0]));
        assert!(bad.is_err());
    }

    #[test]
    fn sampling_is_deterministic_and_separated_from_physics() {
        let cfg = SimConfig::paper_default(3);
        let stack = SimStack::build(&cfg).unwrap();
        let sc = build_scenario(&cfg, 1).unwrap();
        let a = sample_channels(&stack, &sc, cfg.ref_gain, 11).unwrap();
        let b = sample_channels(&stack, &sc, cfg.ref_gain, 11).unwrap();
        assert_eq!(a, b);
        let c = sample_channels(&stack, &sc, cfg.ref_gain, 12).unwrap();
        assert_ne!(a.fading(0, 0), c.fading(0, 0));
        assert_eq!(stack.corr, SimStack::build(&cfg).unwrap().corr);
    }

    #[test]
    fn relocation_scales_by_path_gain_only() {
        let cfg = SimConfig::paper_default(2);
        let stack = SimStack::build(&cfg).unwrap();
        let sc = build_scenario(&cfg, 4).unwrap();
        let ch = sample_channels(&stack, &sc, cfg.ref_gain, 5).unwrap();
        let moved = sc.with_uavs(&[
            nalgebra::Vector2::new(10.0, 20.0),
            nalgebra::Vector2::new(600.0, 20.0),
            nalgebra::Vector2::new(300.0, 900.0),
        ]);
        let ch2 = ch.relocated(&moved);
        for m in 0..5 {
            for u in 0..3 {
                assert_eq!(ch.fading(m, u), ch2.fading(m, u));
                let ratio = (ch.path_gain(m, u) / ch2.path_gain(m, u)).sqrt();
                for k in 0..36 {
                    let a = ch.channel(m, u)[k];
                    let b = ch2.channel(m, u)[k];
                    assert!((a - b * ratio).norm() <= 1e-12 * a.norm().max(1e-300));
                }
                let beta = cfg.ref_gain / moved.distance_sq(m, u);
                assert_eq!(ch2.path_gain(m, u), beta);
                assert_eq!(ch2.channel(m, u), &(ch2.fading(m, u) * C64::new(beta.sqrt(), 0.0)));
            }
        }
    }

    #[test]
    fn capacity_monotone_in_single_sinr() {
        let p = params();
        let assoc = Association::from_pairs(2, 1, &[(0, 0)]).unwrap();
        let mut last = -1.0;
        for scale in [0.0, 1e-8, 1e-7, 1e-6, 1e-3] {
            let gains = DMatrix::from_row_slice(2, 1, &[C64::new(scale, 0.0), C64::new(1e-7, 0.0)]);
            let cap = LinkMetrics::from_gains(gains, &p).capacity(&assoc);
            assert!(cap >= last);
            last = cap;
        }
    }

    #[test]
    fn bad_correlation_rejected() {
        let r = DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 2.0, 1.0]);
        assert!(matches!(correlation_factor(&r), Err(Error::Factorization(_))));
    }
}
