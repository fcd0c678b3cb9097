//! Extended unknown `Z̄ = (Z, ∂₁Z, ∂₂Z, ∂₃Z)` on a constant spatial metric.
//!
//! Differentiating the log-time system once in space gives
//! `B̄⁰∂_TZ̄ − (σC̄ᵏ + B̄ᵏ)∂_kZ̄ = −𝔅̄Π̄Z̄ − H̄` with block-diagonal `B̄⁰`, `B̄ᵏ`, `C̄ᵏ`, `Π̄`
//! and `H̄ = (F, G₁, G₂, G₃)`, where
//!
//! ```text
//! G_a = −M⁰[∂_a(M⁰⁻¹)(σCᵏ+Mᵏ)∂_kZ + M⁰⁻¹(∂_aMᵏ)∂_kZ − ∂_a(M⁰⁻¹)𝔅ΠZ − ∂_a(M⁰⁻¹F)].
//! ```
//!
//! Spatial derivatives of state functions follow from the chain rule,
//! `∂_a X(Z) = D_Z X · ∂_aZ`, evaluated by a fourth-order central difference in state space.

use nalgebra::{SMatrix, SVector, Vector3, Vector4};

use super::{assemble_fuchsian, solve_spd, FuchsianConstants, FuchsianMatrices};
use crate::error::Result;
use crate::fluid::PointContext;
use nalgebra::Matrix4;

pub const EXT_DIM: usize = 16;
pub type ExtVector = SVector<f64, EXT_DIM>;
pub type ExtMatrix = SMatrix<f64, EXT_DIM, EXT_DIM>;

/// Default state-space step for directional derivatives.
pub const DEFAULT_FD_STEP: f64 = 1e-3;

fn block(v: &ExtVector, b: usize) -> Vector4<f64> {
    v.fixed_rows::<4>(4 * b).into_owned()
}

fn block_diag(m: &Matrix4<f64>) -> ExtMatrix {
    let mut out = ExtMatrix::zeros();
    for b in 0..4 {
        out.fixed_view_mut::<4, 4>(4 * b, 4 * b).copy_from(m);
    }
    out
}

/// `Π̄ = blockdiag(Π, Π, Π, Π)`.
pub fn pi_bar() -> ExtMatrix {
    block_diag(&super::pi())
}

pub fn pi_bar_perp() -> ExtMatrix {
    block_diag(&super::pi_perp())
}

/// Quantities whose state-space derivatives enter `G_a`.
#[derive(Clone, Copy)]
struct Snapshot {
    m0: Matrix4<f64>,
    m0_inv: Matrix4<f64>,
    mk: [Matrix4<f64>; 3],
    m0_inv_f: Vector4<f64>,
}

impl Snapshot {
    fn axpy(&mut self, c: f64, o: &Snapshot) {
        self.m0 += o.m0 * c;
        self.m0_inv += o.m0_inv * c;
        for k in 0..3 {
            self.mk[k] += o.mk[k] * c;
        }
        self.m0_inv_f += o.m0_inv_f * c;
    }

    fn zero() -> Self {
        Self { m0: Matrix4::zeros(), m0_inv: Matrix4::zeros(), mk: [Matrix4::zeros(); 3], m0_inv_f: Vector4::zeros() }
    }
}

pub struct ExtendedSystem<'a> {
    ctx: PointContext<'a>,
    consts: FuchsianConstants,
    step: f64,
}

impl<'a> ExtendedSystem<'a> {
    pub fn new(ctx: PointContext<'a>, step: f64) -> Result<Self> {
        let consts = FuchsianConstants::new(&ctx)?;
        Ok(Self { ctx, consts, step })
    }

    pub fn constants(&self) -> &FuchsianConstants {
        &self.consts
    }

    fn fuchsian(&self, z: &Vector4<f64>) -> Result<FuchsianMatrices> {
        assemble_fuchsian(z[0], &z.fixed_rows::<3>(1).into_owned(), &self.ctx, &self.consts)
    }

    fn snapshot(&self, z: &Vector4<f64>) -> Result<Snapshot> {
        let fm = self.fuchsian(z)?;
        let m0_inv = fm.m0.try_inverse().ok_or_else(|| crate::error::Error::HyperbolicityLoss {
            point: None,
            detail: "M0 singular in extended system".into(),
        })?;
        Ok(Snapshot { m0: fm.m0, m0_inv, mk: fm.mk, m0_inv_f: solve_spd(&fm.m0, fm.f)? })
    }

    /// `D_Z S · d` by the fourth-order central stencil along the unit direction of `d`.
    fn directional(&self, z: &Vector4<f64>, d: &Vector4<f64>) -> Result<Snapshot> {
        let norm = d.norm();
        let mut out = Snapshot::zero();
        if norm == 0.0 {
            return Ok(out);
        }
        let dir = d / norm;
        let h = self.step;
        for (j, c) in [(-2.0, 1.0), (-1.0, -8.0), (1.0, 8.0), (2.0, -1.0)] {
            out.axpy(c * norm / (12.0 * h), &self.snapshot(&(z + dir * (j * h)))?);
        }
        Ok(out)
    }

    /// State-space directional derivatives `(D_Z M⁰·d, D_Z Mᵏ·d)`.
    pub fn state_derivative(&self, z: &Vector4<f64>, d: &Vector4<f64>) -> Result<(Matrix4<f64>, [Matrix4<f64>; 3])> {
        let s = self.directional(z, d)?;
        Ok((s.m0, s.mk))
    }

    pub fn b0(&self, v: &ExtVector) -> Result<ExtMatrix> {
        Ok(block_diag(&self.fuchsian(&block(v, 0))?.m0))
    }

    pub fn bk(&self, v: &ExtVector, k: usize) -> Result<ExtMatrix> {
        Ok(block_diag(&self.fuchsian(&block(v, 0))?.mk[k]))
    }

    /// `σC̄ᵏ`.
    pub fn c_bar(&self, k: usize) -> ExtMatrix {
        block_diag(&self.consts.sigma_c(k))
    }

    /// `𝔅̄Π̄Z̄` with covector rows.
    pub fn damping_term(&self, v: &ExtVector) -> ExtVector {
        let mut out = ExtVector::zeros();
        for b in 0..4 {
            let z = block(v, b).fixed_rows::<3>(1).into_owned();
            out.fixed_rows_mut::<4>(4 * b).copy_from(&self.consts.damping_term(&z, &self.ctx.bg.g));
        }
        out
    }

    /// `H̄ = (F, G₁, G₂, G₃)`.
    pub fn h_bar(&self, v: &ExtVector) -> Result<ExtVector> {
        let z = block(v, 0);
        let here = self.snapshot(&z)?;
        let fm = self.fuchsian(&z)?;
        let mut out = ExtVector::zeros();
        out.fixed_rows_mut::<4>(0).copy_from(&fm.f);
        let dz: [Vector4<f64>; 3] = std::array::from_fn(|k| block(v, k + 1));
        let bpz = self.consts.damping_term(&z.fixed_rows::<3>(1).into_owned(), &self.ctx.bg.g);
        for a in 0..3 {
            let d = self.directional(&z, &dz[a])?;
            let mut inner = -(d.m0_inv * bpz) - d.m0_inv_f;
            for k in 0..3 {
                inner += d.m0_inv * ((self.consts.sigma_c(k) + here.mk[k]) * dz[k]) + here.m0_inv * (d.mk[k] * dz[k]);
            }
            out.fixed_rows_mut::<4>(4 * (a + 1)).copy_from(&(-(here.m0 * inner)));
        }
        Ok(out)
    }

    /// `divB(t, v, w) = D_vB̄⁰·(B̄⁰)⁻¹(−(1/t)(σC̄ᵏ+B̄ᵏ)w_k + (1/t)𝔅̄Π̄v + (1/t)H̄) + (1/t)D_vB̄ᵏ·w_k`.
    pub fn div_b(&self, t: f64, v: &ExtVector, w: &[ExtVector; 3]) -> Result<ExtMatrix> {
        let z = block(v, 0);
        let b0 = self.b0(v)?;
        let mut x = self.damping_term(v) + self.h_bar(v)?;
        for k in 0..3 {
            x -= (self.c_bar(k) + self.bk(v, k)?) * w[k];
        }
        x /= t;
        let dot_v = b0.cholesky().map(|c| c.solve(&x)).ok_or_else(|| crate::error::Error::HyperbolicityLoss {
            point: None,
            detail: "extended B0 not positive definite".into(),
        })?;
        let mut out = block_diag(&self.directional(&z, &block(&dot_v, 0))?.m0);
        for k in 0..3 {
            out += block_diag(&self.directional(&z, &block(&w[k], 0))?.mk[k]) / t;
        }
        Ok(out)
    }
}

/// Packs `(Z, ∂₁Z, ∂₂Z, ∂₃Z)`.
pub fn pack(z: &Vector4<f64>, dz: &[Vector4<f64>; 3]) -> ExtVector {
    let mut v = ExtVector::zeros();
    v.fixed_rows_mut::<4>(0).copy_from(z);
    for k in 0..3 {
        v.fixed_rows_mut::<4>(4 * (k + 1)).copy_from(&dz[k]);
    }
    v
}

/// `|Π̄Z̄|` using the spatial metric on each velocity block.
pub fn pi_bar_norm(v: &ExtVector, g: &nalgebra::Matrix3<f64>) -> f64 {
    (0..4)
        .map(|b| {
            let z: Vector3<f64> = block(v, b).fixed_rows::<3>(1).into_owned();
            z.dot(&(g * z))
        })
        .sum::<f64>()
        .sqrt()
}
