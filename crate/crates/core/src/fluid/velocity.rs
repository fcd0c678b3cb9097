use nalgebra::{Matrix3, Matrix4, Vector3};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Which root of the normalization quadratic is taken for `ν = v⁰`.
///
/// `Future` is the `+` root, pointing toward decreasing `t` so that the
/// singular time `t → 0` is the future. `Past` takes the other root.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Orientation {
    #[default]
    Future,
    Past,
}

/// Per-point auxiliary velocity quantities.
#[derive(Debug, Clone, Copy)]
pub struct FluidAux {
    /// `ν = v⁰`.
    pub nu: f64,
    /// `μ = v₀`.
    pub mu: f64,
    /// `w_j = v_j = u_j + νβ_j`.
    pub w: Vector3<f64>,
    /// `u_j = g_jk uᵏ`.
    pub u_low: Vector3<f64>,
    pub orientation: Orientation,
    /// `|g_{μν}v^μv^ν + 1|` computed from the assembled four-metric.
    pub residual: f64,
}

/// Spacetime metric `g_{μν}` in ADM form.
pub fn adm_metric(alpha: f64, beta: &Vector3<f64>, g: &Matrix3<f64>) -> Matrix4<f64> {
    let beta_low = g * beta;
    let mut m = Matrix4::zeros();
    m[(0, 0)] = -alpha * alpha + beta.dot(&beta_low);
    for i in 0..3 {
        m[(0, i + 1)] = beta_low[i];
        m[(i + 1, 0)] = beta_low[i];
        for j in 0..3 {
            m[(i + 1, j + 1)] = g[(i, j)];
        }
    }
    m
}

/// Solves `(−α²+|β|²)ν² + 2β_j uʲ ν + 1 + |u|² = 0` for `ν` and derives `μ`, `w_j`.
pub fn four_velocity_decompose(
    u: &Vector3<f64>,
    alpha: f64,
    beta: &Vector3<f64>,
    g: &Matrix3<f64>,
    orientation: Orientation,
) -> Result<FluidAux> {
    if !(alpha > 0.0) {
        return Err(Error::Domain(format!("lapse {alpha} must be positive")));
    }
    let beta_low = g * beta;
    let u_low = g * u;
    let qa = -alpha * alpha + beta.dot(&beta_low);
    if !(qa < 0.0) {
        return Err(Error::Causality { discriminant: -qa });
    }
    let qb = beta_low.dot(u);
    let qc = 1.0 + u.dot(&u_low);
    let disc = qb * qb - qa * qc;
    if !(disc >= 0.0) {
        return Err(Error::Causality { discriminant: disc });
    }
    let root = disc.sqrt();
    let nu = match orientation {
        Orientation::Future => (-qb + root) / qa,
        Orientation::Past => (-qb - root) / qa,
    };
    let mu = qb + qa * nu;
    let w = u_low + beta_low * nu;

    // g_μν vᵘvᵛ + 1 with vᵘ = (ν, uⁱ), expanded in the ADM blocks.
    let residual = (qa * nu * nu + 2.0 * qb * nu + qc).abs();
    Ok(FluidAux { nu, mu, w, u_low, orientation, residual })
}
