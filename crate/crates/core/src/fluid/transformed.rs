//! The system in `Z` variables: `A⁰∂_tZ + (1/ν)Aᵏ𝒟_kZ = Qᵀ(H − B⁰Y)`.
//!
//! Rows are covector-valued: the `z` block of each matrix carries lower indices.
//! `Aᵏ` absorbs the `1/ν` of `Bᵏ`, that is `Aᵏ = Qᵀ(νBᵏ)Q`, so that the
//! evolution operator reads `(1/ν)Aᵏ`.

use nalgebra::{Matrix3, Matrix4, Vector3, Vector4};

use super::conformal::{
    assemble_with_blocks, b0_matrix, m_matrix, source_terms, symmetrize4, BackgroundPoint, ChristoffelBlocks,
    ConformalMatrices,
};
use super::eos::EosParams;
use super::transform::{transform_jacobian, Jacobian, TransformCoeffs, TransformParams};
use super::velocity::{four_velocity_decompose, FluidAux, Orientation};
use crate::error::Result;

/// Everything needed to evaluate the transformed system at one point.
#[derive(Debug, Clone, Copy)]
pub struct PointContext<'a> {
    pub bg: &'a BackgroundPoint,
    pub blocks: &'a ChristoffelBlocks,
    pub eos: &'a EosParams,
    pub params: &'a TransformParams,
    pub orientation: Orientation,
}

#[derive(Debug, Clone, Copy)]
pub struct ClosedForms {
    pub a0: Matrix4<f64>,
    pub ak: [Matrix4<f64>; 3],
}

#[derive(Debug, Clone, Copy)]
pub struct TransformedMatrices {
    pub a0: Matrix4<f64>,
    pub ak: [Matrix4<f64>; 3],
    /// `Qᵀ(H − B⁰Y)`.
    pub rhs: Vector4<f64>,
    pub jacobian: Jacobian,
    pub coeffs: TransformCoeffs,
    pub aux: FluidAux,
    pub conformal: ConformalMatrices,
    /// Independent evaluation of the closed forms, kept for cross-checks.
    pub closed: ClosedForms,
}

impl TransformedMatrices {
    pub fn q_transpose(&self) -> Matrix4<f64> {
        self.jacobian.q.transpose()
    }

    /// Largest relative discrepancy between conjugation and closed forms.
    pub fn closed_form_discrepancy(&self) -> f64 {
        let rel = |a: &Matrix4<f64>, b: &Matrix4<f64>| (a - b).norm() / a.norm().max(f64::MIN_POSITIVE);
        let mut worst = rel(&self.a0, &self.closed.a0);
        for k in 0..3 {
            worst = worst.max(rel(&self.ak[k], &self.closed.ak[k]));
        }
        worst
    }
}

/// Local state shared by both assembly paths.
struct Kinematics {
    coeffs: TransformCoeffs,
    z_low: Vector3<f64>,
    u: Vector3<f64>,
    aux: FluidAux,
    m_ij: Matrix3<f64>,
}

fn kinematics(psi: f64, z: &Vector3<f64>, ctx: &PointContext) -> Result<Kinematics> {
    let bg = ctx.bg;
    let z_low = bg.g * z;
    let coeffs = TransformCoeffs::new(psi, z.dot(&z_low), ctx.eos, ctx.params)?;
    let u = z * coeffs.b;
    let aux = four_velocity_decompose(&u, bg.alpha, &bg.beta, &bg.g, ctx.orientation)?;
    let m_ij = m_matrix(&aux, bg);
    Ok(Kinematics { coeffs, z_low, u, aux, m_ij })
}

/// Assembles `A⁰`, `Aᵏ` by conjugation and the closed forms as a second path.
pub fn assemble_transformed_matrices(psi: f64, z: &Vector3<f64>, ctx: &PointContext) -> Result<TransformedMatrices> {
    let kin = kinematics(psi, z, ctx)?;
    let conformal = assemble_with_blocks(&kin.u, &kin.aux, ctx.bg, ctx.blocks, ctx.eos);
    let jacobian = transform_jacobian(&kin.coeffs, z, &ctx.bg.g, &ctx.bg.dt_g);
    let q = jacobian.q;
    let qt = q.transpose();
    let a0 = symmetrize4(&(qt * conformal.b0 * q));
    let ak = std::array::from_fn(|k| symmetrize4(&(qt * (conformal.bk[k] * kin.aux.nu) * q)));
    let rhs = qt * (conformal.h - conformal.b0 * jacobian.y);
    let closed = closed_forms(&kin, z, ctx.eos);
    Ok(TransformedMatrices { a0, ak, rhs, jacobian, coeffs: kin.coeffs, aux: kin.aux, conformal, closed })
}

/// `(A⁰, [Aᵏ], Qᵀ(H − B⁰Y), ν)`.
pub type ClosedParts = (Matrix4<f64>, [Matrix4<f64>; 3], Vector4<f64>, f64);

/// `(A⁰, Σ_k Aᵏ∇_kZ, Qᵀ(H − B⁰Y), ν)`.
pub type ClosedFluxParts = (Matrix4<f64>, Vector4<f64>, Vector4<f64>, f64);

/// Closed forms only: `(A⁰, Aᵏ, Qᵀ(H − B⁰Y), ν)`. This is the cheap path used in time stepping.
pub fn transformed_closed(psi: f64, z: &Vector3<f64>, ctx: &PointContext) -> Result<ClosedParts> {
    let kin = kinematics(psi, z, ctx)?;
    let cf = closed_forms(&kin, z, ctx.eos);
    Ok((cf.a0, cf.ak, forcing(&kin, z, ctx), kin.aux.nu))
}

/// `(A⁰, Σ_k Aᵏ∇_kZ, Qᵀ(H − B⁰Y), ν)` without forming the three `Aᵏ`.
///
/// Every `Aᵏ` is a combination of `uᵏ`, `zᵏ` and `δᵏ` times fixed blocks, so the
/// contraction with the gradients reduces to the directional derivatives along
/// `u` and `z`, the trace `∇_k zᵏ` and the rows `∇_i z`.
pub fn transformed_closed_flux(
    psi: f64,
    z: &Vector3<f64>,
    ctx: &PointContext,
    grads: &[Vector4<f64>; 3],
) -> Result<ClosedFluxParts> {
    let kin = kinematics(psi, z, ctx)?;
    let a0 = closed_a0(&kin, z, ctx.eos);
    let k = ctx.eos.k();
    let TransformCoeffs { b, d1a, d2a, db, .. } = kin.coeffs;
    let (u, zl) = (kin.u, kin.z_low);
    let mz = kin.m_ij * z;
    let zmz = z.dot(&mz);

    let along = |v: &Vector3<f64>| grads[0] * v[0] + grads[1] * v[1] + grads[2] * v[2];
    let du = along(&u);
    let dz = along(z);
    let (pu, pz) = (du[0], dz[0]);
    let qu = Vector3::new(du[1], du[2], du[3]);
    let qz = Vector3::new(dz[1], dz[2], dz[3]);
    let trace = grads[0][1] + grads[1][2] + grads[2][3];
    let grad_psi = Vector3::new(grads[0][0], grads[1][0], grads[2][0]);
    let zl_rows = Vector3::new(
        zl.dot(&grads[0].fixed_rows::<3>(1)),
        zl.dot(&grads[1].fixed_rows::<3>(1)),
        zl.dot(&grads[2].fixed_rows::<3>(1)),
    );

    let zl_qu = zl.dot(&qu);
    let row0 = (k * d1a * d1a + db * db * zmz) * pu
        + 2.0 * k * db * d1a * pz
        + k * b * d1a * trace
        + 2.0 * k * d1a * d2a * zl_qu
        + 2.0 * k * db * d2a * zl.dot(&qz)
        + b * db * mz.dot(&qu);
    let rows = grad_psi * (k * b * d1a)
        + zl * (2.0 * k * d1a * d2a * pu
            + 2.0 * k * db * d2a * pz
            + 2.0 * k * b * d2a * trace
            + 4.0 * k * d2a * d2a * zl_qu)
        + mz * (b * db * pu)
        + kin.m_ij * qu * (b * b)
        + zl_rows * (2.0 * k * b * d2a);
    let flux = Vector4::new(row0, rows[0], rows[1], rows[2]);
    let rhs = forcing(&kin, z, ctx);
    Ok((a0, flux, rhs, kin.aux.nu))
}

fn forcing(kin: &Kinematics, z: &Vector3<f64>, ctx: &PointContext) -> Vector4<f64> {
    let (h, _, _) = source_terms(&kin.u, &kin.aux, &kin.m_ij, ctx.bg, ctx.blocks, ctx.eos);
    let jac = transform_jacobian(&kin.coeffs, z, &ctx.bg.g, &ctx.bg.dt_g);
    let forcing = if jac.y[0] == 0.0 { h } else { h - b0_matrix(&kin.aux, &kin.m_ij, ctx.eos) * jac.y };
    jac.q.transpose() * forcing
}

fn closed_a0(kin: &Kinematics, z: &Vector3<f64>, eos: &EosParams) -> Matrix4<f64> {
    let k = eos.k();
    let TransformCoeffs { b, d1a, d2a, db, .. } = kin.coeffs;
    let (nu, mu) = (kin.aux.nu, kin.aux.mu);
    let w = kin.aux.w;
    let zl = kin.z_low;
    let m = kin.m_ij;
    let mz = m * z;
    let zw = z.dot(&w);
    let zmz = z.dot(&mz);

    let mut a0 = Matrix4::zeros();
    a0[(0, 0)] = k * d1a * d1a - 2.0 * k * db * d1a / (nu * mu) * zw + db * db * zmz;
    for j in 0..3 {
        let v =
            2.0 * k * d1a * d2a * zl[j] - 2.0 * k * db / (nu * mu) * d2a * zl[j] * zw - k * b * d1a / (nu * mu) * w[j]
                + b * db * mz[j];
        a0[(0, j + 1)] = v;
        a0[(j + 1, 0)] = v;
        for i in 0..3 {
            a0[(i + 1, j + 1)] = b * b * m[(i, j)] - 2.0 * k * b * d2a / (nu * mu) * (zl[i] * w[j] + zl[j] * w[i])
                + 4.0 * k * d2a * d2a * zl[i] * zl[j];
        }
    }

    symmetrize4(&a0)
}

fn closed_forms(kin: &Kinematics, z: &Vector3<f64>, eos: &EosParams) -> ClosedForms {
    let k = eos.k();
    let TransformCoeffs { b, d1a, d2a, db, .. } = kin.coeffs;
    let zl = kin.z_low;
    let u = kin.u;
    let m = kin.m_ij;
    let mz = m * z;
    let zmz = z.dot(&mz);

    let ak = std::array::from_fn(|kk| {
        let mut a = Matrix4::zeros();
        a[(0, 0)] = k * d1a * d1a * u[kk] + 2.0 * k * db * d1a * z[kk] + db * db * zmz * u[kk];
        for j in 0..3 {
            let delta = if j == kk { 1.0 } else { 0.0 };
            let v = k * b * d1a * delta
                + 2.0 * k * d1a * d2a * u[kk] * zl[j]
                + 2.0 * k * db * d2a * z[kk] * zl[j]
                + b * db * mz[j] * u[kk];
            a[(0, j + 1)] = v;
            a[(j + 1, 0)] = v;
            for i in 0..=j {
                let di = if i == kk { 1.0 } else { 0.0 };
                let v = b * b * m[(i, j)] * u[kk]
                    + 2.0 * k * b * d2a * (delta * zl[i] + di * zl[j])
                    + 4.0 * k * d2a * d2a * u[kk] * zl[i] * zl[j];
                a[(i + 1, j + 1)] = v;
                a[(j + 1, i + 1)] = v;
            }
        }
        a
    });
    ClosedForms { a0: closed_a0(kin, z, eos), ak }
}
