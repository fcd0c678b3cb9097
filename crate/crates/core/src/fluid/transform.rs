//! The change of variables `U = (ζ, uⁱ) ↔ Z = (ψ, zⁱ)`.
//!
//! `ζ = a(ψ, |z|²)` and `uⁱ = b(ψ) zⁱ` with
//! `a = c₁ − ln 4 + ln((ψ+c₂)²) + κ|z|²/(ψ+c₂)²` and `b = 2/(ψ+c₂)`.
//! Since `κ|z|²/(ψ+c₂)² = κ|u|²/4`, the inverse is explicit:
//! `ψ + c₂ = sign(c₂)·2·exp((ζ − c₁ − κ|u|²/4)/2)` and `zⁱ = uⁱ(ψ+c₂)/2`.

use nalgebra::{Matrix3, Matrix4, Vector3, Vector4};
use serde::{Deserialize, Serialize};

use super::eos::EosParams;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TransformParams {
    c1: f64,
    c2: f64,
}

impl Default for TransformParams {
    fn default() -> Self {
        Self { c1: 0.0, c2: -2.0 }
    }
}

impl TransformParams {
    pub fn new(c1: f64, c2: f64) -> Result<Self> {
        if c2 == 0.0 || !c2.is_finite() || !c1.is_finite() {
            return Err(Error::Domain(format!("transform constants (c1, c2) = ({c1}, {c2}); c2 must be nonzero")));
        }
        Ok(Self { c1, c2 })
    }

    pub fn c1(&self) -> f64 {
        self.c1
    }

    pub fn c2(&self) -> f64 {
        self.c2
    }
}

/// `a`, `b` and their derivatives at one state.
#[derive(Debug, Clone, Copy)]
pub struct TransformCoeffs {
    /// `ψ + c₂`.
    pub s: f64,
    pub a: f64,
    pub b: f64,
    /// `∂a/∂ψ`.
    pub d1a: f64,
    /// `∂a/∂(|z|²)`.
    pub d2a: f64,
    /// `b'(ψ)`.
    pub db: f64,
}

impl TransformCoeffs {
    pub fn new(psi: f64, z_sq: f64, eos: &EosParams, params: &TransformParams) -> Result<Self> {
        let s = psi + params.c2;
        if s == 0.0 || s.signum() != params.c2.signum() {
            return Err(Error::TransformDomain { psi_plus_c2: s, c2: params.c2 });
        }
        let kappa = eos.kappa();
        let s2 = s * s;
        let b = 2.0 / s;
        Ok(Self {
            s,
            a: params.c1 - 4f64.ln() + s2.ln() + kappa * z_sq / s2,
            b,
            d1a: b * (1.0 - kappa * z_sq / s2),
            d2a: kappa / s2,
            db: -2.0 / s2,
        })
    }
}

/// `Z → U`. Returns `(ζ, uⁱ)`.
pub fn transform_forward(
    psi: f64,
    z: &Vector3<f64>,
    g: &Matrix3<f64>,
    eos: &EosParams,
    params: &TransformParams,
) -> Result<(f64, Vector3<f64>)> {
    let z_sq = z.dot(&(g * z));
    let c = TransformCoeffs::new(psi, z_sq, eos, params)?;
    Ok((c.a, z * c.b))
}

/// `U → Z`. Returns `(ψ, zⁱ)`.
pub fn transform_inverse(
    zeta: f64,
    u: &Vector3<f64>,
    g: &Matrix3<f64>,
    eos: &EosParams,
    params: &TransformParams,
) -> Result<(f64, Vector3<f64>)> {
    let u_sq = u.dot(&(g * u));
    let s = params.c2.signum() * 2.0 * ((zeta - params.c1 - eos.kappa() * u_sq / 4.0) / 2.0).exp();
    if !(s.is_finite() && s != 0.0) {
        return Err(Error::TransformDomain { psi_plus_c2: s, c2: params.c2 });
    }
    Ok((s - params.c2, u * (s / 2.0)))
}

/// Jacobian blocks of `∂_t U = Q ∂_t Z + Y`.
#[derive(Debug, Clone, Copy)]
pub struct Jacobian {
    pub q: Matrix4<f64>,
    pub y: Vector4<f64>,
}

/// `Q = [[D₁a, 2D₂a z_j], [b′zⁱ, bδⁱ_j]]`, `Y = (D₂a ∂_t g_ij zⁱzʲ, 0)`.
pub fn transform_jacobian(
    coeffs: &TransformCoeffs,
    z: &Vector3<f64>,
    g: &Matrix3<f64>,
    dt_g: &Matrix3<f64>,
) -> Jacobian {
    let zl = g * z;
    let mut q = Matrix4::zeros();
    q[(0, 0)] = coeffs.d1a;
    for j in 0..3 {
        q[(0, j + 1)] = 2.0 * coeffs.d2a * zl[j];
        q[(j + 1, 0)] = coeffs.db * z[j];
        q[(j + 1, j + 1)] = coeffs.b;
    }
    let y = Vector4::new(coeffs.d2a * z.dot(&(dt_g * z)), 0.0, 0.0, 0.0);
    Jacobian { q, y }
}
