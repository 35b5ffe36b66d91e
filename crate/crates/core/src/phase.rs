//! Layer-by-layer phase optimization.
//!
//! For one UAV and its associated user, the gain w¹ᴴ Gᴴ h factors around
//! any layer l as `F^{lH} Φ^{lH} L^{lH}`, where F collects everything on the
//! antenna side of layer l and L^{lH} everything on the user side. Given the
//! other layers, the gain is Σ_k conj(F_k) e^{−jθ_k} L^H_k, which is
//! maximized in modulus by aligning every summand to phase zero.

use nalgebra::DVector;

use crate::association::Association;
use crate::channel::ChannelSet;
use crate::error::{Error, Result};
use crate::physics::{apply_phases, wrap_phase, PhaseProfile, SimStack, C64};

/// Partial products around one layer.
#[derive(Debug, Clone, PartialEq)]
pub struct LayerPartials {
    /// F^l (so that the antenna-side row vector is F^{lH}).
    pub f: DVector<C64>,
    /// L^{lH}, the user-side column vector.
    pub l_h: DVector<C64>,
}

impl LayerPartials {
    /// F^{lH} Φ^{lH} L^{lH} for the given layer phases.
    pub fn gain(&self, phases: &[f64]) -> C64 {
        self.f
            .iter()
            .zip(self.l_h.iter())
            .zip(phases)
            .map(|((f, l), &t)| f.conj() * C64::from_polar(1.0, -t) * l)
            .sum()
    }

    /// Σ_k |F_k| |L^H_k|, the best gain any unit-modulus Φ^l can reach.
    pub fn aligned_gain(&self) -> f64 {
        self.f.iter().zip(self.l_h.iter()).map(|(f, l)| f.norm() * l.norm()).sum()
    }
}

fn user_side(stack: &SimStack, phases: &[f64], h: &DVector<C64>, l: usize) -> DVector<C64> {
    let k = stack.atoms();
    let mut v = h.clone();
    for j in (l + 1..=stack.layers).rev() {
        // Φ^{jH} then W^{jH}
        let conj: Vec<f64> = phases[(j - 1) * k..j * k].iter().map(|t| -t).collect();
        apply_phases(&mut v, &conj);
        v = stack.w(j).adjoint() * v;
    }
    v
}

fn antenna_side(stack: &SimStack, phases: &[f64], l: usize) -> DVector<C64> {
    let k = stack.atoms();
    let mut f = stack.output_vec.clone();
    for j in 2..=l {
        apply_phases(&mut f, &phases[(j - 2) * k..(j - 1) * k]);
        f = stack.w(j) * f;
    }
    f
}

/// F^l and L^{lH} for layer `l` (1-based) of one UAV's layer-major phases.
pub fn layer_partials(stack: &SimStack, phases: &[f64], h: &DVector<C64>, l: usize) -> Result<LayerPartials> {
    let k = stack.atoms();
    if l == 0 || l > stack.layers {
        return Err(Error::IndexOutOfRange {
            index: l,
            max: stack.layers,
        });
    }
    if phases.len() != stack.layers * k || h.len() != k {
        return Err(Error::DimensionMismatch(format!(
            "phases {} (need {}), channel {} (need {k})",
            phases.len(),
            stack.layers * k,
            h.len()
        )));
    }
    Ok(LayerPartials {
        f: antenna_side(stack, phases, l),
        l_h: user_side(stack, phases, h, l),
    })
}

/// Closed-form optimum for one layer: θ_k = ∠L^H_k − ∠F_k, which makes
/// every summand of the gain real and positive. Entries with
/// |F_k||L^H_k| = 0 do not affect the gain and keep their current phase.
pub fn update_layer(partials: &LayerPartials, current: &[f64]) -> Vec<f64> {
    partials
        .f
        .iter()
        .zip(partials.l_h.iter())
        .zip(current)
        .map(|((f, l), &old)| {
            if f.norm() * l.norm() == 0.0 {
                old
            } else {
                wrap_phase(l.arg() - f.arg())
            }
        })
        .collect()
}

/// |gain| after every single-layer update, per UAV.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct GainTrace {
    /// (uav, sweep, layer, |gain|), sweep and layer 1-based.
    pub rows: Vec<(usize, usize, usize, f64)>,
}

/// Runs `sweeps` passes over layers 1..=L for one UAV targeting channel `h`,
/// updating `phases` (layer-major, L·K entries) in place.
pub fn optimize_uav_phases(
    stack: &SimStack,
    phases: &mut [f64],
    h: &DVector<C64>,
    sweeps: usize,
    mut on_update: impl FnMut(usize, usize, f64),
) -> Result<()> {
    let k = stack.atoms();
    let layers = stack.layers;
    if phases.len() != layers * k || h.len() != k {
        return Err(Error::DimensionMismatch("phase slice or channel length".into()));
    }
    for sweep in 1..=sweeps {
        // user-side partials for every layer under the current phases;
        // updating layer l never changes L^{l'H} for l' ≥ l
        let mut l_side = vec![DVector::zeros(k); layers + 1];
        l_side[layers] = h.clone();
        for l in (1..layers).rev() {
            let mut v = l_side[l + 1].clone();
            let conj: Vec<f64> = phases[l * k..(l + 1) * k].iter().map(|t| -t).collect();
            apply_phases(&mut v, &conj);
            l_side[l] = stack.w(l + 1).adjoint() * v;
        }
        let mut f = stack.output_vec.clone();
        for l in 1..=layers {
            let partials = LayerPartials {
                f,
                l_h: std::mem::replace(&mut l_side[l], DVector::zeros(0)),
            };
            let slot = &mut phases[(l - 1) * k..l * k];
            let updated = update_layer(&partials, slot);
            slot.copy_from_slice(&updated);
            on_update(sweep, l, partials.gain(slot).norm());
            let mut next = partials.f;
            if l < layers {
                apply_phases(&mut next, slot);
                next = stack.w(l + 1) * next;
            }
            f = next;
        }
    }
    Ok(())
}

/// Every associated UAV aligns its SIM to its user's channel; UAVs without a
/// user keep their phases.
pub fn optimize_phases(
    stack: &SimStack,
    phases: &PhaseProfile,
    assoc: &Association,
    channels: &ChannelSet,
    sweeps: usize,
) -> Result<(PhaseProfile, GainTrace)> {
    let mut out = phases.clone();
    let mut trace = GainTrace::default();
    for u in 0..phases.num_uavs() {
        let Some(m) = assoc.user_of(u) else { continue };
        let mut slice = out.uav(u).to_vec();
        optimize_uav_phases(stack, &mut slice, channels.channel(m, u), sweeps, |sweep, l, g| {
            trace.rows.push((u, sweep, l, g));
        })?;
        out.set_uav(u, &slice);
    }
    Ok((out, trace))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::{effective_gain, CorrelatedRayleigh};
    use crate::config::SimConfig;
    use crate::physics::{cascade_response, TWO_PI};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn stack(layers: usize, k_max: usize) -> SimStack {
        let mut cfg = SimConfig::paper_default(layers);
        cfg.atoms_per_layer = k_max * k_max;
        SimStack::build(&cfg).unwrap()
    }

    fn random_case(layers: usize, k_max: usize, seed: u64) -> (SimStack, Vec<f64>, DVector<C64>) {
        let s = stack(layers, k_max);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let p = PhaseProfile::random(1, layers, k_max * k_max, &mut rng);
        let h = CorrelatedRayleigh::new(&s.corr).unwrap().sample(&mut rng);
        (s, p.uav(0).to_vec(), h)
    }

    #[test]
    fn single_layer_partials_are_trivial() {
        let (s, p, h) = random_case(1, 3, 1);
        let lp = layer_partials(&s, &p, &h, 1).unwrap();
        assert_eq!(lp.f, s.output_vec);
        assert_eq!(lp.l_h, h);
    }

    #[test]
    fn factorization_holds_at_every_layer() {
        for seed in 0..10 {
            let (s, p, h) = random_case(4, 3, seed);
            let g = cascade_response(&p, &s).unwrap();
            let direct = effective_gain(&s.output_vec, &g, &h).unwrap();
            for l in 1..=4 {
                let lp = layer_partials(&s, &p, &h, l).unwrap();
                let via = lp.gain(&p[(l - 1) * 9..l * 9]);
                assert!((via - direct).norm() <= 1e-10 * direct.norm().max(1e-30), "l={l}");
            }
        }
    }

    #[test]
    fn scalar_two_layer_partials() {
        let s = stack(2, 1);
        let (t1, t2) = (0.4, 2.2);
        let h = DVector::from_element(1, C64::new(0.3, -0.8));
        let lp = layer_partials(&s, &[t1, t2], &h, 2).unwrap();
        // F^{2H} = w¹* e^{−jθ¹} W²*, so F² = W² e^{jθ¹} w¹
        let f = s.w(2)[(0, 0)] * C64::from_polar(1.0, t1) * s.output_vec[0];
        assert!((lp.f[0] - f).norm() < 1e-15);
        assert_eq!(lp.l_h[0], h[0]);
    }

    #[test]
    fn update_aligns_hand_case() {
        let lp = LayerPartials {
            f: DVector::from_element(1, C64::new(1.0, 0.0)),
            l_h: DVector::from_element(1, C64::new(0.0, 1.0)),
        };
        let th = update_layer(&lp, &[0.0]);
        let g = lp.gain(&th);
        assert!((g - C64::new(1.0, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn aligned_inputs_need_no_rotation() {
        let lp = LayerPartials {
            f: DVector::from_vec(vec![C64::new(2.0, 0.0), C64::new(0.5, 0.0)]),
            l_h: DVector::from_vec(vec![C64::new(1.0, 0.0), C64::new(3.0, 0.0)]),
        };
        assert_eq!(update_layer(&lp, &[1.0, 2.0]), vec![0.0, 0.0]);
    }

    #[test]
    fn zero_entries_keep_phase() {
        let lp = LayerPartials {
            f: DVector::from_vec(vec![C64::new(0.0, 0.0), C64::new(1.0, 1.0)]),
            l_h: DVector::from_vec(vec![C64::new(1.0, 0.0), C64::new(1.0, 0.0)]),
        };
        assert_eq!(update_layer(&lp, &[1.25, 0.0])[0], 1.25);
    }

    #[test]
    fn update_never_lowers_gain() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..100 {
            let f = DVector::from_fn(9, |_, _| C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)));
            let l_h = DVector::from_fn(9, |_, _| C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)));
            let lp = LayerPartials { f, l_h };
            let before: Vec<f64> = (0..9).map(|_| rng.random_range(0.0..TWO_PI)).collect();
            let after = update_layer(&lp, &before);
            assert!(lp.gain(&after).norm() >= lp.gain(&before).norm());
            assert!((lp.gain(&after).norm() - lp.aligned_gain()).abs() <= 1e-12 * lp.aligned_gain());
            let wrapped: Vec<f64> = after.iter().map(|t| t + TWO_PI).collect();
            assert!((lp.gain(&after) - lp.gain(&wrapped)).norm() < 1e-12);
        }
    }

    #[test]
    fn one_layer_one_sweep_is_optimal() {
        let (s, mut p, h) = random_case(1, 6, 5);
        optimize_uav_phases(&s, &mut p, &h, 1, |_, _, _| {}).unwrap();
        let g = effective_gain(&s.output_vec, &cascade_response(&p, &s).unwrap(), &h).unwrap();
        let bound: f64 = s.output_vec.iter().zip(h.iter()).map(|(w, x)| w.norm() * x.norm()).sum();
        assert!((g.norm() - bound).abs() <= 1e-12 * bound);
    }

    #[test]
    fn gain_trace_is_monotone() {
        for seed in 0..10 {
            let (s, mut p, h) = random_case(4, 4, seed);
            let start = effective_gain(&s.output_vec, &cascade_response(&p, &s).unwrap(), &h).unwrap().norm();
            let mut trace = vec![start];
            optimize_uav_phases(&s, &mut p, &h, 5, |_, _, g| trace.push(g)).unwrap();
            for w in trace.windows(2) {
                assert!(w[1] >= w[0] * (1.0 - 1e-12), "{} < {}", w[1], w[0]);
            }
            let end = effective_gain(&s.output_vec, &cascade_response(&p, &s).unwrap(), &h).unwrap().norm();
            assert!((end - trace.last().unwrap()).abs() <= 1e-10 * end);
        }
    }

    #[test]
    fn beats_random_search_on_small_sim() {
        let (s, mut p, h) = random_case(2, 2, 8);
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        optimize_uav_phases(&s, &mut p, &h, 10, |_, _, _| {}).unwrap();
        let ours = effective_gain(&s.output_vec, &cascade_response(&p, &s).unwrap(), &h).unwrap().norm();
        for _ in 0..1000 {
            let cand: Vec<f64> = (0..8).map(|_| rng.random_range(0.0..TWO_PI)).collect();
            let g = effective_gain(&s.output_vec, &cascade_response(&cand, &s).unwrap(), &h).unwrap().norm();
            assert!(ours >= g - 1e-9 * g);
        }
    }
}
