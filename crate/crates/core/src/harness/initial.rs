//! Initial data on the grid.

use nalgebra::{Vector3, Vector4};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fluid::EosParams;
use crate::geometry::metric::angles;
use crate::geometry::Geometry;
use crate::solver::{Ceiling, ZField};

/// A single component of `Z = (ψ, z¹, z², z³)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Component {
    Psi,
    Z1,
    Z2,
    Z3,
}

impl Component {
    pub fn index(self) -> usize {
        match self {
            Component::Psi => 0,
            Component::Z1 => 1,
            Component::Z2 => 2,
            Component::Z3 => 3,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum InitialData {
    /// Spatially constant state.
    Homogeneous {
        #[serde(default)]
        psi: f64,
        #[serde(default)]
        z: [f64; 3],
    },
    /// `A sin(m·θ)` in one component, zero elsewhere.
    FourierModes { mode: [i32; 3], amplitude: f64, slot: Component },
    /// Growing (least damped) plane wave of the linearised system.
    LinearEigenmode { mode: [i32; 3], amplitude: f64 },
    /// Random superposition of modes with integer wavenumber magnitude in `band`.
    RandomBand { seed: Option<u64>, band: [f64; 2], amplitude: f64 },
}

impl Default for InitialData {
    fn default() -> Self {
        InitialData::Homogeneous { psi: 0.0, z: [0.0; 3] }
    }
}

impl InitialData {
    /// Checks that the data are well posed and start below `ceiling`.
    pub fn validate(&self, ceiling: &Ceiling, k: f64) -> Vec<String> {
        let mut errs = Vec::new();
        let below = |errs: &mut Vec<String>, what: &str, value: f64, cap: f64| {
            if !(value.is_finite() && value <= cap) {
                errs.push(format!("initial: {what} = {value} must not exceed the smallness ceiling {cap}"));
            }
        };
        match self {
            InitialData::Homogeneous { psi, z } => {
                below(&mut errs, "|psi|", psi.abs(), ceiling.psi_max);
                below(&mut errs, "|z|", Vector3::from(*z).norm(), ceiling.z_max);
            }
            InitialData::FourierModes { amplitude, slot, .. } => {
                let cap = if *slot == Component::Psi { ceiling.psi_max } else { ceiling.z_max };
                below(&mut errs, "amplitude", amplitude.abs(), cap);
            }
            InitialData::LinearEigenmode { mode, amplitude } => {
                if mode.iter().all(|&m| m == 0) {
                    errs.push("initial: linear-eigenmode needs a nonzero mode".into());
                } else if k > 0.0 {
                    let ratio = eigen_ratio(k, (mode.iter().map(|&m| (m * m) as f64).sum::<f64>()).sqrt()).norm();
                    below(&mut errs, "amplitude", amplitude.abs(), ceiling.psi_max);
                    below(&mut errs, "velocity amplitude", amplitude.abs() * ratio, ceiling.z_max);
                }
            }
            InitialData::RandomBand { seed, band, amplitude } => {
                if seed.is_none() {
                    errs.push("initial: random-band requires an explicit seed".into());
                }
                if !(band[0] >= 0.0 && band[1] >= band[0] && band[1] > 0.0) {
                    errs.push(format!("initial: band [{}, {}] must satisfy 0 <= lo <= hi, hi > 0", band[0], band[1]));
                }
                below(&mut errs, "amplitude", amplitude.abs(), ceiling.z_max.min(ceiling.psi_max));
            }
        }
        errs
    }

    pub fn with_seed(&mut self, new_seed: u64) {
        if let InitialData::RandomBand { seed, .. } = self {
            *seed = Some(new_seed);
        }
    }

    pub fn build(&self, geom: &Geometry, eos: &EosParams, sigma: f64) -> Result<ZField> {
        let grid = *geom.grid();
        let phase = |idx: usize, m: &[i32; 3]| {
            let th = angles(&grid, idx);
            (0..3).map(|a| m[a] as f64 * th[a]).sum::<f64>()
        };
        match self {
            InitialData::Homogeneous { psi, z } => {
                let p = Vector4::new(*psi, z[0], z[1], z[2]);
                Ok(ZField::from_fn(grid, |_| p))
            }
            InitialData::FourierModes { mode, amplitude, slot } => {
                let c = slot.index();
                Ok(ZField::from_fn(grid, |i| {
                    let mut p = Vector4::zeros();
                    p[c] = amplitude * phase(i, mode).sin();
                    p
                }))
            }
            InitialData::LinearEigenmode { mode, amplitude } => {
                // Covector k_a = 2π m_a / L_a in coordinate units.
                let k = Vector3::from_fn(|a, _| {
                    if grid.is_active(a) {
                        std::f64::consts::TAU * mode[a] as f64 / grid.extent(a)
                    } else {
                        0.0
                    }
                });
                if k.norm() == 0.0 {
                    return Err(Error::Config(vec![
                        "initial: linear-eigenmode has no component along an active axis".into()
                    ]));
                }
                let fields = crate::par::map_indexed(grid.len(), |i| {
                    let g_inv = geom.g_inv(i);
                    let k_up = g_inv * k;
                    let k_norm = k.dot(&k_up).sqrt();
                    // ŵ = −iλ/(σ|k|) relates the velocity amplitude to the ψ amplitude.
                    let w = eigen_ratio(eos.k(), k_norm) / sigma;
                    let th = phase(i, mode);
                    let (s, c) = th.sin_cos();
                    let psi = amplitude * c;
                    let zmag = amplitude * (w.re * c - w.im * s);
                    let z = k_up * (zmag / k_norm);
                    Vector4::new(psi, z[0], z[1], z[2])
                });
                Ok(ZField::from_fn(grid, |i| fields[i]))
            }
            InitialData::RandomBand { seed, band, amplitude } => {
                let seed =
                    seed.ok_or_else(|| Error::Config(vec!["initial: random-band requires an explicit seed".into()]))?;
                random_band(geom, seed, *band, *amplitude)
            }
        }
    }
}

/// `−iλ/|k|` for the least damped root of `λ² + (1−3K)λ + K|k|² = 0`.
pub fn eigen_ratio(k: f64, k_norm: f64) -> rustfft::num_complex::Complex<f64> {
    use rustfft::num_complex::Complex;
    let lambda = eigen_rate(k, k_norm);
    Complex::new(0.0, -1.0) * lambda / k_norm
}

/// Root of `λ² + (1−3K)λ + K|k|² = 0` with the largest real part, taking
/// positive imaginary part when the pair is complex.
pub fn eigen_rate(k: f64, k_norm: f64) -> rustfft::num_complex::Complex<f64> {
    use rustfft::num_complex::Complex;
    let b = 1.0 - 3.0 * k;
    let disc = b * b - 4.0 * k * k_norm * k_norm;
    if disc >= 0.0 {
        Complex::new((-b + disc.sqrt()) / 2.0, 0.0)
    } else {
        Complex::new(-b / 2.0, (-disc).sqrt() / 2.0)
    }
}

/// Sum of modes with random amplitudes and phases, scaled so that the largest
/// pointwise value of each component equals `amplitude`.
fn random_band(geom: &Geometry, seed: u64, band: [f64; 2], amplitude: f64) -> Result<ZField> {
    let grid = *geom.grid();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let kmax = band[1].floor() as i32;
    let range = |a: usize| if grid.is_active(a) { -kmax..=kmax } else { 0..=0 };
    let mut modes = Vec::new();
    for m0 in range(0) {
        for m1 in range(1) {
            for m2 in range(2) {
                let r = ((m0 * m0 + m1 * m1 + m2 * m2) as f64).sqrt();
                if r > 0.0 && r >= band[0] && r <= band[1] {
                    let coeffs: [(f64, f64); 4] = std::array::from_fn(|_| {
                        (rng.random_range(-1.0..1.0), rng.random_range(0.0..std::f64::consts::TAU))
                    });
                    modes.push(([m0, m1, m2], coeffs));
                }
            }
        }
    }
    if modes.is_empty() {
        return Err(Error::Config(vec![format!(
            "initial: band [{}, {}] contains no admissible mode on this grid",
            band[0], band[1]
        )]));
    }
    let mut field = ZField::from_fn(grid, |i| {
        let th = angles(&grid, i);
        let mut p = Vector4::zeros();
        for (m, coeffs) in &modes {
            let phase: f64 = (0..3).map(|a| m[a] as f64 * th[a]).sum();
            for c in 0..4 {
                p[c] += coeffs[c].0 * (phase + coeffs[c].1).sin();
            }
        }
        p
    });
    let peaks: Vec<f64> = (0..4).map(|c| field.component(c).iter().fold(0.0f64, |m, v| m.max(v.abs()))).collect();
    let n = field.len();
    let data = field.data_mut();
    for i in 0..n {
        for c in 0..4 {
            if peaks[c] > 0.0 {
                data[4 * i + c] *= amplitude / peaks[c];
            }
        }
    }
    Ok(field)
}
