//! Rescaled matter quantities of the fluid on the fixed background.
//!
//! Fixed-background runs use lapse `N = 3` and shift `X = 0` in rescaled
//! variables. The velocity `vᵃ` is the conformal velocity `uᵃ` of the
//! transformed state and `v̂^τ` follows from normalisation,
//! `N²(v̂^τ)² = 1 + |v|²_g`, which gives `v̂^τ = 1/3` at rest.

use nalgebra::{Matrix3, Vector3};
use serde::Serialize;

use crate::error::Result;
use crate::fluid::{transform_forward, EosParams, TransformParams};
use crate::geometry::Geometry;
use crate::par;
use crate::solver::ZField;

pub const FIXED_LAPSE: f64 = 3.0;

/// Pointwise `(E, jᵃ, η, S_ab)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MatterPoint {
    pub energy: f64,
    pub momentum: Vector3<f64>,
    pub eta: f64,
    pub stress: Matrix3<f64>,
}

/// Evaluates the closed-form matter expressions at one point.
pub fn matter_point(
    zeta: f64,
    v: &Vector3<f64>,
    g: &Matrix3<f64>,
    lapse: f64,
    t_log: f64,
    eos: &EosParams,
) -> MatterPoint {
    let k = eos.k();
    let v_sq = v.dot(&(g * v));
    let vt = (1.0 + v_sq).sqrt() / lapse;
    let amp = eos.rho0() * (zeta * (1.0 + k)).exp();
    let energy = amp * (-3.0 * k * t_log).exp() * ((1.0 + k) * vt * vt * lapse * lapse + k);
    let momentum = v * (amp * ((1.0 - 3.0 * k) * t_log).exp() * lapse * (1.0 + k) * vt);
    let eta = energy + amp * (-3.0 * k * t_log).exp() * ((1.0 + k) * v_sq + 3.0 * k);
    let v_low = g * v;
    // The trace part is carried by g_ab.
    let stress =
        (v_low * v_low.transpose() * (1.0 + k) + g * (k * (2.0 + k))) * (amp * ((-1.0 - 3.0 * k) * t_log).exp());
    MatterPoint { energy, momentum, eta, stress }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MatterNorms {
    pub t: f64,
    pub energy_l2: f64,
    pub momentum_l2: f64,
    pub eta_l2: f64,
    pub stress_l2: f64,
    /// `|τ|‖η‖e^{(1+3K)T}` with `|τ| = e^{−T}`.
    pub eta_scaled: f64,
    /// `|τ|‖S‖e^{(2+3K)T}`.
    pub stress_scaled: f64,
}

pub struct MatterDiagnostics {
    pub points: Vec<MatterPoint>,
    pub norms: MatterNorms,
}

pub fn matter_diagnostics(
    field: &ZField,
    geom: &Geometry,
    eos: &EosParams,
    params: &TransformParams,
    t_log: f64,
) -> Result<MatterDiagnostics> {
    let points = par::try_map_indexed(field.len(), |i| -> Result<MatterPoint> {
        let g = geom.g(i);
        let (zeta, u) = transform_forward(field.psi(i), &field.z(i), g, eos, params)?;
        Ok(matter_point(zeta, &u, g, FIXED_LAPSE, t_log, eos))
    })?;
    let l2 = |f: &(dyn Fn(usize) -> f64 + Sync + Send)| geom.integrate_fn(f).sqrt();
    let energy_l2 = l2(&|i| points[i].energy.powi(2));
    let momentum_l2 = l2(&|i| {
        let m = points[i].momentum;
        m.dot(&(geom.g(i) * m))
    });
    let eta_l2 = l2(&|i| points[i].eta.powi(2));
    let stress_l2 = l2(&|i| {
        let gi = geom.g_inv(i);
        let s = points[i].stress;
        (gi * s * gi * s).trace()
    });
    let k = eos.k();
    let norms = MatterNorms {
        t: t_log,
        energy_l2,
        momentum_l2,
        eta_l2,
        stress_l2,
        eta_scaled: eta_l2 * (3.0 * k * t_log).exp(),
        stress_scaled: stress_l2 * ((1.0 + 3.0 * k) * t_log).exp(),
    };
    Ok(MatterDiagnostics { points, norms })
}
