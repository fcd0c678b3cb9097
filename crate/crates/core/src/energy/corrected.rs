//! Corrected first and second order energies.
//!
//! On a background with `Ric = −(2/9)g` the commutator terms of the first and
//! second order energy identities are compensated by the fixed coefficients
//! below. For a general fixed metric only the first order correction built
//! from `Ric` itself is available.

use nalgebra::{Matrix4, Vector4};
use serde::Serialize;

use super::sobolev::OrderIntegrals;
use crate::error::{Error, Result};
use crate::fuchsian::{FuchsianConstants, FuchsianMatrices};
use crate::geometry::{commutator_defect, Geometry};
use crate::par;
use crate::solver::ZField;

/// Coefficient of `∫⟨ΠZ, M⁰ΠZ⟩` in `Ẽ₁`.
pub const MILNE_C1: f64 = -1.0 / 9.0;
/// Coefficient of `∫⟨Π∇Z, M⁰Π∇Z⟩` in `Ẽ₂`.
pub const MILNE_C2_GRAD: f64 = -4.0 / 9.0;
/// Coefficient of `∫⟨ΠZ, M⁰ΠZ⟩` in `Ẽ₂`.
pub const MILNE_C2_ZERO: f64 = -4.0 / 81.0;

/// Einstein constant of the reference background, `Ric = λg`.
pub const MILNE_RICCI: f64 = -2.0 / 9.0;

/// Relative tolerance on `‖Ric − λg‖` below which the fixed coefficients are considered matched.
pub const MISMATCH_TOL: f64 = 0.05;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MilneCorrected {
    pub e1: f64,
    /// `None` when the second order integrals were not computed.
    pub e2: Option<f64>,
    /// True when the metric is not close to `Ric = −(2/9)g`.
    pub mismatch: bool,
}

/// The two integrals whose sum the generic correction is designed to cancel.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CancellationPair {
    /// `δ₁σ∫g^{mn}∇_mψ[∇_n, ∇_a]zᵃ`, the commutator term in `∂_TE₁`, from nested covariant derivatives.
    pub commutator: f64,
    /// `δ₁∫⟨ΠZ, SΠ(M⁰)⁻¹(σCᵃ + Mᵃ)∇_aZ⟩`, the transport part of the correction's derivative.
    pub transport: f64,
}

impl CancellationPair {
    /// `|sum| / max(|commutator|, |transport|)`.
    pub fn relative_sum(&self) -> f64 {
        let scale = self.commutator.abs().max(self.transport.abs());
        if scale == 0.0 {
            0.0
        } else {
            (self.commutator + self.transport).abs() / scale
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GenericCorrected {
    pub delta1: f64,
    pub e1: f64,
    /// `½∫⟨ΠZ, Ric M⁰ΠZ⟩`, the correction before the factor `δ₁`.
    pub correction: f64,
    pub pair: CancellationPair,
}

/// Largest relative deviation `|g⁻¹Ric − λ Id|_op / |λ|` over the grid.
pub fn milne_deviation(geom: &Geometry) -> f64 {
    par::map_indexed(geom.grid().len(), |i| {
        let m = geom.g_inv(i) * geom.ricci()[i] - nalgebra::Matrix3::identity() * MILNE_RICCI;
        m.norm() / MILNE_RICCI.abs()
    })
    .into_iter()
    .fold(0.0, f64::max)
}

pub fn corrected_energy_milne(integrals: &OrderIntegrals, geom: &Geometry) -> MilneCorrected {
    let e1 = integrals.energy(1.min(integrals.max_order())).e + MILNE_C1 * integrals.parallel[0];
    let e2 = (integrals.max_order() >= 2)
        .then(|| integrals.energy(2).e + MILNE_C2_GRAD * integrals.parallel[1] + MILNE_C2_ZERO * integrals.parallel[0]);
    MilneCorrected { e1, e2, mismatch: milne_deviation(geom) > MISMATCH_TOL }
}

/// `S = sym(R M⁰)` restricted to the velocity block, with `R = diag(0, Ric g⁻¹)`.
fn ricci_weight(geom: &Geometry, i: usize, m0: &Matrix4<f64>) -> Matrix4<f64> {
    let rg = geom.ricci()[i] * geom.g_inv(i);
    let mut r = Matrix4::zeros();
    r.fixed_view_mut::<3, 3>(1, 1).copy_from(&rg);
    let s = r * m0;
    let mut out = (s + s.transpose()) * 0.5;
    out.row_mut(0).fill(0.0);
    out.column_mut(0).fill(0.0);
    out
}

/// Rejects `δ₁` unless `δ₁ · max|Ric|_op < 1`.
pub fn coercivity_guard(geom: &Geometry, delta1: f64) -> Result<()> {
    let product = delta1 * geom.max_ricci_op();
    if !(delta1 >= 0.0) || !(product < 1.0) {
        return Err(Error::Coercivity { product });
    }
    Ok(())
}

/// `Ẽ₁^gen = E₁ + (δ₁/2)∫⟨ΠZ, Ric M⁰ΠZ⟩` and its cancellation pair.
///
/// `fm[i]` are the Fuchsian blocks at each point and `grads` the covariant gradients.
pub fn corrected_energy_generic(
    field: &ZField,
    geom: &Geometry,
    integrals: &OrderIntegrals,
    fm: &[FuchsianMatrices],
    grads: &[Vec<f64>; 3],
    consts: &FuchsianConstants,
    delta1: f64,
) -> Result<GenericCorrected> {
    coercivity_guard(geom, delta1)?;
    let pz = |i: usize| {
        let z = field.z(i);
        Vector4::new(0.0, z[0], z[1], z[2])
    };
    let correction = if geom.is_flat() {
        0.0
    } else {
        0.5 * geom.integrate_fn(|i| {
            let v = pz(i);
            v.dot(&(ricci_weight(geom, i, &fm[i].m0) * v))
        })
    };
    let transport = if geom.is_flat() {
        0.0
    } else {
        delta1
            * geom.integrate_fn(|i| {
                let mut flux = Vector4::zeros();
                for a in 0..3 {
                    let d = Vector4::from_column_slice(&grads[a][4 * i..4 * i + 4]);
                    flux += (consts.sigma_c(a) + fm[i].mk[a]) * d;
                }
                let rate = fm[i].m0.cholesky().map(|c| c.solve(&flux)).unwrap_or(flux);
                pz(i).dot(&(ricci_weight(geom, i, &fm[i].m0) * rate))
            })
    };
    let commutator = if geom.is_flat() {
        0.0
    } else {
        let zs: Vec<_> = (0..field.len()).map(|i| field.z(i)).collect();
        delta1 * consts.sigma * commutator_defect(geom, &field.component(0), &zs)?.direct
    };
    Ok(GenericCorrected {
        delta1,
        e1: integrals.energy(1).e + delta1 * correction,
        correction,
        pair: CancellationPair { commutator, transport },
    })
}
