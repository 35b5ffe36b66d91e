//! Deterministic SIM structures: lattice geometry, Rayleigh-Sommerfeld
//! inter-layer responses, the output-layer-to-antenna vector, the sinc
//! spatial correlation, and the cascaded wave-domain response.
//!
//! Meta-atom indices in the public API are 1-based to match the usual
//! lattice notation; everything stored in matrices is 0-based.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::Rng;

use crate::config::SimConfig;
use crate::error::{Error, Result};

pub type C64 = Complex64;

pub const TWO_PI: f64 = 2.0 * PI;

/// Lattice and wave parameters shared by every layer of a SIM.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Geometry {
    pub k_max: usize,
    pub atom_spacing: f64,
    pub layer_spacing: f64,
    pub atom_area: f64,
    pub wavelength: f64,
    pub antenna_offset: f64,
}

impl Geometry {
    pub fn from_config(cfg: &SimConfig) -> Self {
        Self {
            k_max: cfg.k_max(),
            atom_spacing: cfg.atom_spacing,
            layer_spacing: cfg.layer_spacing(),
            atom_area: cfg.atom_area,
            wavelength: cfg.wavelength,
            antenna_offset: cfg.antenna_offset(),
        }
    }

    pub fn atoms(&self) -> usize {
        self.k_max * self.k_max
    }
}

/// (k_x, k_y) of the k-th atom, both 1-based, row-major lattice.
pub fn atom_index(k: usize, k_max: usize) -> Result<(usize, usize)> {
    let max = k_max * k_max;
    if k == 0 || k > max {
        return Err(Error::IndexOutOfRange { index: k, max });
    }
    Ok(((k - 1) % k_max + 1, k.div_ceil(k_max)))
}

/// Same-layer spacing s_{k,k̃}.
pub fn lattice_distance(k: usize, kt: usize, atom_spacing: f64, k_max: usize) -> Result<f64> {
    let (kx, ky) = atom_index(k, k_max)?;
    let (tx, ty) = atom_index(kt, k_max)?;
    let dx = kx as f64 - tx as f64;
    let dy = ky as f64 - ty as f64;
    Ok(atom_spacing * (dx * dx + dy * dy).sqrt())
}

/// Distance between atom k̃ and atom k on a layer `layer_offset` away
/// (0 for the same layer).
pub fn pair_distance(
    k: usize,
    kt: usize,
    atom_spacing: f64,
    k_max: usize,
    layer_offset: f64,
) -> Result<f64> {
    let s = lattice_distance(k, kt, atom_spacing, k_max)?;
    Ok((s * s + layer_offset * layer_offset).sqrt())
}

/// Rayleigh-Sommerfeld point-to-point response
/// `(A cosχ / s)(1/(2πs) − j/λ) e^{j2πs/λ}`.
pub fn propagation_coefficient(s: f64, cos_chi: f64, atom_area: f64, wavelength: f64) -> Result<C64> {
    if s.is_nan() || s <= 0.0 {
        return Err(Error::CoincidentPoints(s));
    }
    let amplitude = atom_area * cos_chi / s;
    let near_far = C64::new(1.0 / (TWO_PI * s), -1.0 / wavelength);
    Ok(near_far * amplitude * C64::from_polar(1.0, TWO_PI * s / wavelength))
}

/// W^l: response of every atom on layer l to every atom on layer l−1.
/// Identical for all l under the isomorphic lattice.
pub fn build_inter_layer_matrix(geom: &Geometry) -> DMatrix<C64> {
    let k = geom.atoms();
    let r = geom.layer_spacing;
    DMatrix::from_fn(k, k, |i, j| {
        let s = pair_distance(i + 1, j + 1, geom.atom_spacing, geom.k_max, r)
            .expect("indices within lattice");
        propagation_coefficient(s, r / s, geom.atom_area, geom.wavelength)
            .expect("layer spacing is positive")
    })
}

/// Lateral offset of an atom from the layer center.
fn lateral_offset(k: usize, geom: &Geometry) -> (f64, f64) {
    let (kx, ky) = atom_index(k, geom.k_max).expect("index within lattice");
    let center = (geom.k_max as f64 + 1.0) / 2.0;
    (
        (kx as f64 - center) * geom.atom_spacing,
        (ky as f64 - center) * geom.atom_spacing,
    )
}

/// w¹: response from each output-layer atom to a single antenna on the
/// boresight through the layer center, `antenna_offset` behind the layer.
pub fn build_output_vector(geom: &Geometry, antenna_offset: f64) -> Result<DVector<C64>> {
    if antenna_offset.is_nan() || antenna_offset <= 0.0 {
        return Err(Error::CoincidentPoints(antenna_offset));
    }
    let k = geom.atoms();
    let mut out = DVector::zeros(k);
    for i in 0..k {
        let (dx, dy) = lateral_offset(i + 1, geom);
        let s = (dx * dx + dy * dy + antenna_offset * antenna_offset).sqrt();
        out[i] = propagation_coefficient(s, antenna_offset / s, geom.atom_area, geom.wavelength)?;
    }
    Ok(out)
}

/// Normalized sinc, sin(πx)/(πx).
pub fn sinc(x: f64) -> f64 {
    if x.abs() < 1e-6 {
        let px = PI * x;
        1.0 - px * px / 6.0
    } else {
        (PI * x).sin() / (PI * x)
    }
}

/// R_{k,k̃} = sinc(2 s_{k,k̃} / λ).
pub fn build_correlation_matrix(geom: &Geometry) -> DMatrix<f64> {
    let k = geom.atoms();
    DMatrix::from_fn(k, k, |i, j| {
        let s = lattice_distance(i + 1, j + 1, geom.atom_spacing, geom.k_max)
            .expect("indices within lattice");
        sinc(2.0 * s / geom.wavelength)
    })
}

/// Precomputed propagation structures of one SIM design, shared read-only
/// by every UAV and every optimizer iteration.
#[derive(Debug, Clone)]
pub struct SimStack {
    pub geometry: Geometry,
    pub layers: usize,
    /// W², …, W^L (index 0 holds W²).
    pub inter_layer: Vec<DMatrix<C64>>,
    pub output_vec: DVector<C64>,
    pub corr: DMatrix<f64>,
}

impl SimStack {
    pub fn build(cfg: &SimConfig) -> Result<Self> {
        let geometry = Geometry::from_config(cfg);
        let w = build_inter_layer_matrix(&geometry);
        Ok(Self {
            geometry,
            layers: cfg.layers,
            inter_layer: vec![w; cfg.layers - 1],
            output_vec: build_output_vector(&geometry, geometry.antenna_offset)?,
            corr: build_correlation_matrix(&geometry),
        })
    }

    pub fn atoms(&self) -> usize {
        self.geometry.atoms()
    }

    /// W^l for l in 2..=L.
    pub fn w(&self, l: usize) -> &DMatrix<C64> {
        &self.inter_layer[l - 2]
    }
}

/// Phase shifts θ for every (UAV, layer, atom), each in [0, 2π).
#[derive(Debug, Clone, PartialEq)]
pub struct PhaseProfile {
    uavs: usize,
    layers: usize,
    atoms: usize,
    theta: Vec<f64>,
}

/// Maps any angle into [0, 2π).
pub fn wrap_phase(x: f64) -> f64 {
    let w = x.rem_euclid(TWO_PI);
    if w >= TWO_PI {
        0.0
    } else {
        w
    }
}

impl PhaseProfile {
    pub fn zeros(uavs: usize, layers: usize, atoms: usize) -> Self {
        Self {
            uavs,
            layers,
            atoms,
            theta: vec![0.0; uavs * layers * atoms],
        }
    }

    /// i.i.d. uniform phases on [0, 2π).
    pub fn random<R: Rng + ?Sized>(uavs: usize, layers: usize, atoms: usize, rng: &mut R) -> Self {
        let theta = (0..uavs * layers * atoms)
            .map(|_| rng.random_range(0.0..TWO_PI))
            .collect();
        Self {
            uavs,
            layers,
            atoms,
            theta,
        }
    }

    /// Builds a profile from raw angles, wrapping each into [0, 2π).
    pub fn from_angles(uavs: usize, layers: usize, atoms: usize, angles: &[f64]) -> Result<Self> {
        if angles.len() != uavs * layers * atoms {
            return Err(Error::DimensionMismatch(format!(
                "expected {} phases, got {}",
                uavs * layers * atoms,
                angles.len()
            )));
        }
        Ok(Self {
            uavs,
            layers,
            atoms,
            theta: angles.iter().map(|&a| wrap_phase(a)).collect(),
        })
    }

    pub fn num_uavs(&self) -> usize {
        self.uavs
    }

    pub fn num_layers(&self) -> usize {
        self.layers
    }

    pub fn num_atoms(&self) -> usize {
        self.atoms
    }

    /// All L·K phases of one UAV, layer-major.
    pub fn uav(&self, u: usize) -> &[f64] {
        let n = self.layers * self.atoms;
        &self.theta[u * n..(u + 1) * n]
    }

    /// θ^l of one UAV, with l 1-based.
    pub fn layer(&self, u: usize, l: usize) -> &[f64] {
        let start = (u * self.layers + (l - 1)) * self.atoms;
        &self.theta[start..start + self.atoms]
    }

    pub fn set_layer(&mut self, u: usize, l: usize, values: &[f64]) {
        let start = (u * self.layers + (l - 1)) * self.atoms;
        for (dst, &v) in self.theta[start..start + self.atoms].iter_mut().zip(values) {
            *dst = wrap_phase(v);
        }
    }

    pub fn set_uav(&mut self, u: usize, values: &[f64]) {
        let n = self.layers * self.atoms;
        for (dst, &v) in self.theta[u * n..(u + 1) * n].iter_mut().zip(values) {
            *dst = wrap_phase(v);
        }
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.theta
    }

    pub fn all_in_range(&self) -> bool {
        self.theta.iter().all(|t| (0.0..TWO_PI).contains(t))
    }
}

fn check_phases(phases: &[f64], stack: &SimStack) -> Result<()> {
    let expect = stack.layers * stack.atoms();
    if phases.len() != expect {
        return Err(Error::DimensionMismatch(format!(
            "phase slice has {} entries, stack needs L*K = {expect}",
            phases.len()
        )));
    }
    Ok(())
}

fn scale_rows(m: &mut DMatrix<C64>, phases: &[f64]) {
    for (i, &t) in phases.iter().enumerate() {
        let phi = C64::from_polar(1.0, t);
        m.row_mut(i).iter_mut().for_each(|x| *x *= phi);
    }
}

/// G = Φ^L W^L Φ^{L−1} … W² Φ¹ for one UAV's layer-major phases.
pub fn cascade_response(phases: &[f64], stack: &SimStack) -> Result<DMatrix<C64>> {
    check_phases(phases, stack)?;
    let k = stack.atoms();
    let mut g = DMatrix::<C64>::identity(k, k);
    scale_rows(&mut g, &phases[..k]);
    for l in 2..=stack.layers {
        let mut next = stack.w(l) * &g;
        scale_rows(&mut next, &phases[(l - 1) * k..l * k]);
        g = next;
    }
    Ok(g)
}

/// G w¹ without forming G; the effective gain for a user channel h is
/// `combiner.dotc(h)` = w¹ᴴ Gᴴ h.
pub fn combiner(phases: &[f64], stack: &SimStack) -> Result<DVector<C64>> {
    check_phases(phases, stack)?;
    let k = stack.atoms();
    let mut v = stack.output_vec.clone();
    apply_phases(&mut v, &phases[..k]);
    for l in 2..=stack.layers {
        v = stack.w(l) * v;
        apply_phases(&mut v, &phases[(l - 1) * k..l * k]);
    }
    Ok(v)
}

pub(crate) fn apply_phases(v: &mut DVector<C64>, phases: &[f64]) {
    for (x, &t) in v.iter_mut().zip(phases) {
        *x *= C64::from_polar(1.0, t);
    }
}
