//! Fuchsian form of the fluid system on a fixed linearly expanding background.
//!
//! Multiplying `A⁰∂_tZ + (1/ν)Aᵏ∇_kZ = Qᵀ(H − B⁰Y)` by `−t/A⁰₀` and switching to
//! logarithmic time `T = −ln(t/t₀)`, so that `∂_t = −(1/t)∂_T`, gives
//!
//! ```text
//! M⁰∂_TZ − (σCᵏ + Mᵏ)∇_kZ = −𝔅ΠZ − F
//! ```
//!
//! with `M⁰ = A⁰/A⁰₀`, `σCᵏ + Mᵏ = (t/ν)Aᵏ/A⁰₀` and `F = tQᵀ(H − B⁰Y)/A⁰₀ − 𝔅ΠZ`.
//! The explicit `1/t` of the compactified form cancels. `σ = sign(t/ν)` at `Z = 0`
//! is `−1` for the future orientation, so `Mᵏ` vanishes at the origin.
//!
//! The `z` rows are covector valued: `𝔅ΠZ = (0, (K⁻¹−3)g_ij zʲ)`.

pub mod extended;
pub mod probe;

use nalgebra::{Cholesky, Matrix3, Matrix4, Vector3, Vector4};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::fluid::{transformed_closed, transformed_closed_flux, PointContext};

/// `Π = diag(0, 1, 1, 1)`, projecting onto the velocity components.
pub fn pi() -> Matrix4<f64> {
    Matrix4::from_diagonal(&Vector4::new(0.0, 1.0, 1.0, 1.0))
}

/// `Π^⊥ = Id − Π`.
pub fn pi_perp() -> Matrix4<f64> {
    Matrix4::from_diagonal(&Vector4::new(1.0, 0.0, 0.0, 0.0))
}

/// The state-independent blocks `Cᵏ`, the orientation sign `σ` and the damping `K⁻¹ − 3`.
#[derive(Debug, Clone, Copy)]
pub struct FuchsianConstants {
    pub c: [Matrix4<f64>; 3],
    pub sigma: f64,
    pub damping: f64,
    sc: [Matrix4<f64>; 3],
}

impl FuchsianConstants {
    /// Evaluates `Cᵏ = (Aᵏ/A⁰₀)|_{Z=0}` and `σ` from the assembly at the origin.
    pub fn new(ctx: &PointContext) -> Result<Self> {
        let (a0, ak, _, nu) = transformed_closed(0.0, &Vector3::zeros(), ctx)?;
        let a00 = a0[(0, 0)];
        if !(a00 > 0.0) {
            return Err(Error::HyperbolicityLoss { point: None, detail: format!("A00 = {a00} at the origin") });
        }
        let c = ak.map(|a| a / a00);
        let sigma = (ctx.bg.t / nu).signum();
        Ok(Self { c, sigma, damping: ctx.eos.damping(), sc: c.map(|m| m * sigma) })
    }

    /// `σCᵏ`.
    pub fn sigma_c(&self, k: usize) -> Matrix4<f64> {
        self.sc[k]
    }

    /// `𝔅ΠZ = (0, (K⁻¹−3)g_ij zʲ)`.
    pub fn damping_term(&self, z: &Vector3<f64>, g: &Matrix3<f64>) -> Vector4<f64> {
        let zl = g * z * self.damping;
        Vector4::new(0.0, zl[0], zl[1], zl[2])
    }
}

/// Pointwise Fuchsian blocks.
#[derive(Debug, Clone, Copy)]
pub struct FuchsianMatrices {
    pub m0: Matrix4<f64>,
    pub mk: [Matrix4<f64>; 3],
    pub f: Vector4<f64>,
    pub a00: f64,
}

pub fn assemble_fuchsian(
    psi: f64,
    z: &Vector3<f64>,
    ctx: &PointContext,
    consts: &FuchsianConstants,
) -> Result<FuchsianMatrices> {
    let (a0, ak, rhs, nu) = transformed_closed(psi, z, ctx)?;
    let a00 = a0[(0, 0)];
    if !(a00 > 0.0) {
        return Err(Error::HyperbolicityLoss { point: None, detail: format!("A00 = {a00:e} is not positive") });
    }
    let t = ctx.bg.t;
    let scale = t / (nu * a00);
    let mk = std::array::from_fn(|k| ak[k] * scale - consts.sigma_c(k));
    let f = rhs * (t / a00) - consts.damping_term(z, &ctx.bg.g);
    Ok(FuchsianMatrices { m0: a0 / a00, mk, f, a00 })
}

/// `∂_TZ = (M⁰)⁻¹[(σCᵏ + Mᵏ)∇_kZ − 𝔅ΠZ − F]` at one point.
pub fn rhs_logtime(
    fm: &FuchsianMatrices,
    consts: &FuchsianConstants,
    z: &Vector3<f64>,
    g: &Matrix3<f64>,
    grads: &[Vector4<f64>; 3],
) -> Result<Vector4<f64>> {
    let mut x = -consts.damping_term(z, g) - fm.f;
    for k in 0..3 {
        x += (consts.sigma_c(k) + fm.mk[k]) * grads[k];
    }
    solve_spd(&fm.m0, x)
}

/// Same value as [`rhs_logtime`] through `∂_TZ = t(A⁰)⁻¹[(1/ν)Aᵏ∇_kZ − Qᵀ(H − B⁰Y)]`.
///
/// Dividing out `A⁰₀` and re-adding `𝔅ΠZ` cancel identically, so this form skips
/// both along with the three `Aᵏ` matrices. It is the path used in time stepping.
pub fn rhs_logtime_fused(
    psi: f64,
    z: &Vector3<f64>,
    ctx: &PointContext,
    grads: &[Vector4<f64>; 3],
) -> Result<Vector4<f64>> {
    let (a0, flux, rhs, nu) = transformed_closed_flux(psi, z, ctx, grads)?;
    solve_spd(&a0, (flux / nu - rhs) * ctx.bg.t)
}

/// `∂_tZ = (A⁰)⁻¹[−(1/ν)Aᵏ∇_kZ + Qᵀ(H − B⁰Y)]`, the compactified-time form.
pub fn rhs_compactified(
    psi: f64,
    z: &Vector3<f64>,
    ctx: &PointContext,
    grads: &[Vector4<f64>; 3],
) -> Result<Vector4<f64>> {
    let (a0, ak, rhs, nu) = transformed_closed(psi, z, ctx)?;
    let mut x = rhs;
    for k in 0..3 {
        x -= ak[k] * grads[k] / nu;
    }
    solve_spd(&a0, x)
}

pub(crate) fn solve_spd(m: &Matrix4<f64>, x: Vector4<f64>) -> Result<Vector4<f64>> {
    match Cholesky::new(*m) {
        Some(ch) => Ok(ch.solve(&x)),
        None => Err(Error::HyperbolicityLoss { point: None, detail: "M0 is not positive definite".into() }),
    }
}

/// Generalized eigenvalue range of `M⁰` relative to `G = diag(1, g)`.
pub fn m0_spectrum(m0: &Matrix4<f64>, g: &Matrix3<f64>) -> Result<(f64, f64)> {
    let mut gfull = Matrix4::identity();
    gfull.fixed_view_mut::<3, 3>(1, 1).copy_from(g);
    let l = Cholesky::new(gfull).ok_or_else(|| Error::Domain("metric not positive definite".into()))?.l();
    let linv = l.try_inverse().ok_or_else(|| Error::Domain("singular metric factor".into()))?;
    let s = linv * m0 * linv.transpose();
    let ev = ((s + s.transpose()) * 0.5).symmetric_eigenvalues();
    Ok((ev.min(), ev.max()))
}

/// Constants in `γ₁⁻¹Id ≤ M⁰ ≤ γ₃⁻¹𝔅 ≤ γ₂Id` over a set of samples.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct PositivityChain {
    pub gamma1: f64,
    pub gamma2: f64,
    pub gamma3: f64,
    pub lambda_min: f64,
    pub lambda_max: f64,
    pub holds: bool,
}

impl PositivityChain {
    /// Builds the tightest constants from the extreme generalized eigenvalues of `M⁰`.
    pub fn from_spectrum(lambda_min: f64, lambda_max: f64, damping: f64) -> Self {
        let holds = lambda_min > 0.0 && damping > 0.0;
        Self {
            gamma1: 1.0 / lambda_min,
            gamma2: lambda_max,
            gamma3: damping / lambda_max,
            lambda_min,
            lambda_max,
            holds,
        }
    }
}
