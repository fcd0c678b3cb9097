//! Exact symmetric-hyperbolic form `B⁰∂_tU + Bᵏ𝒟_kU = H` of the conformal Euler
//! equations on a fixed ADM background.

use nalgebra::{Matrix3, Matrix4, Vector3, Vector4};

use super::eos::EosParams;
use super::velocity::FluidAux;

/// ADM data of a fixed background at one point and time.
///
/// Spatial derivatives are covariant with respect to `g`. `d_beta[(i, j)]` holds `D_jβⁱ`.
#[derive(Debug, Clone, Copy)]
pub struct BackgroundPoint {
    pub t: f64,
    pub alpha: f64,
    pub dt_alpha: f64,
    pub d_alpha: Vector3<f64>,
    pub beta: Vector3<f64>,
    pub dt_beta: Vector3<f64>,
    pub d_beta: Matrix3<f64>,
    pub g: Matrix3<f64>,
    pub g_inv: Matrix3<f64>,
    pub dt_g: Matrix3<f64>,
    /// `∂_tΨ` of the conformal factor.
    pub dt_psi: f64,
    /// `D_iΨ`.
    pub d_psi: Vector3<f64>,
}

impl BackgroundPoint {
    /// Linearly expanding background `α = 1/t`, `β = 0`, static `g`, `Ψ = ln t`.
    pub fn mflrw(t: f64, g: Matrix3<f64>, g_inv: Matrix3<f64>) -> Self {
        Self {
            t,
            alpha: 1.0 / t,
            dt_alpha: -1.0 / (t * t),
            d_alpha: Vector3::zeros(),
            beta: Vector3::zeros(),
            dt_beta: Vector3::zeros(),
            d_beta: Matrix3::zeros(),
            g,
            g_inv,
            dt_g: Matrix3::zeros(),
            dt_psi: 1.0 / t,
            d_psi: Vector3::zeros(),
        }
    }
}

/// Mixed Christoffel blocks of the conformal four-metric.
#[derive(Debug, Clone, Copy)]
pub struct ChristoffelBlocks {
    /// `𝒦_ij`.
    pub k_low: Matrix3<f64>,
    /// `𝒦_jⁱ` stored at `(i, j)`.
    pub k_mixed: Matrix3<f64>,
    /// `Υⁱ`.
    pub upsilon: Vector3<f64>,
    /// `Ξⁱ_j` stored at `(i, j)`.
    pub xi: Matrix3<f64>,
}

impl ChristoffelBlocks {
    pub fn new(bg: &BackgroundPoint) -> Self {
        let alpha = bg.alpha;
        let beta = bg.beta;
        // D_iβ_j at (i, j)
        let dbeta_low = (bg.g * bg.d_beta).transpose();
        let k_low = -(bg.dt_g - dbeta_low - dbeta_low.transpose()) / (2.0 * alpha);
        let k_mixed = bg.g_inv * k_low;

        let k_beta = k_mixed * beta;
        let shift_term = bg.dt_alpha + beta.dot(&bg.d_alpha) - beta.dot(&(k_low * beta));
        let upsilon = (bg.g_inv * bg.d_alpha) * alpha - k_beta * (2.0 * alpha) - beta * (shift_term / alpha)
            + bg.dt_beta
            + bg.d_beta * beta;

        // D_jα − βᵏ𝒦_kj
        let row = bg.d_alpha - k_low.transpose() * beta;
        let xi = -(beta * row.transpose()) / alpha - k_mixed * alpha + bg.d_beta;
        Self { k_low, k_mixed, upsilon, xi }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct ConformalMatrices {
    pub b0: Matrix4<f64>,
    pub bk: [Matrix4<f64>; 3],
    pub h: Vector4<f64>,
    pub ell: f64,
    pub m: Vector3<f64>,
    /// `M_ij`.
    pub m_ij: Matrix3<f64>,
    pub blocks: ChristoffelBlocks,
}

/// `M_ij = g_ij − (w_iβ_j + w_jβ_i)/μ + (−α²+|β|²) w_iw_j/μ²`.
pub fn m_matrix(aux: &FluidAux, bg: &BackgroundPoint) -> Matrix3<f64> {
    let beta_low = bg.g * bg.beta;
    let lapse_term = -bg.alpha * bg.alpha + bg.beta.dot(&beta_low);
    let wb = aux.w * beta_low.transpose();
    let m = bg.g - (wb + wb.transpose()) / aux.mu + aux.w * aux.w.transpose() * (lapse_term / (aux.mu * aux.mu));
    symmetrize3(&m)
}

/// Assembles `B⁰`, `Bᵏ` and `H` from the exact formulas. `u` carries the upper index.
pub fn assemble_conformal_matrices(
    u: &Vector3<f64>,
    aux: &FluidAux,
    bg: &BackgroundPoint,
    eos: &EosParams,
) -> ConformalMatrices {
    let blocks = ChristoffelBlocks::new(bg);
    assemble_with_blocks(u, aux, bg, &blocks, eos)
}

/// As [`assemble_conformal_matrices`] with precomputed background blocks.
pub fn assemble_with_blocks(
    u: &Vector3<f64>,
    aux: &FluidAux,
    bg: &BackgroundPoint,
    blocks: &ChristoffelBlocks,
    eos: &EosParams,
) -> ConformalMatrices {
    let k = eos.k();
    let m_ij = m_matrix(aux, bg);
    let b0 = b0_matrix(aux, &m_ij, eos);
    let bk = std::array::from_fn(|a| {
        let mut b = Matrix4::zeros();
        b[(0, 0)] = k * u[a];
        b[(0, a + 1)] = k;
        b[(a + 1, 0)] = k;
        for i in 0..3 {
            for j in 0..3 {
                b[(i + 1, j + 1)] = m_ij[(i, j)] * u[a];
            }
        }
        b / aux.nu
    });
    let (h, ell, m) = source_terms(u, aux, &m_ij, bg, blocks, eos);
    ConformalMatrices { b0, bk, h, ell, m, m_ij, blocks: *blocks }
}

/// `B⁰ = [[K, −Kw_j/(νμ)], [−Kw_i/(νμ), M_ij]]`.
pub fn b0_matrix(aux: &FluidAux, m_ij: &Matrix3<f64>, eos: &EosParams) -> Matrix4<f64> {
    let k = eos.k();
    let mut b0 = Matrix4::zeros();
    b0[(0, 0)] = k;
    for i in 0..3 {
        let off = -k * aux.w[i] / (aux.nu * aux.mu);
        b0[(0, i + 1)] = off;
        b0[(i + 1, 0)] = off;
        for j in 0..3 {
            b0[(i + 1, j + 1)] = m_ij[(i, j)];
        }
    }
    b0
}

/// Returns `(H, ℓ, m_i)`.
pub fn source_terms(
    u: &Vector3<f64>,
    aux: &FluidAux,
    m_ij: &Matrix3<f64>,
    bg: &BackgroundPoint,
    blocks: &ChristoffelBlocks,
    eos: &EosParams,
) -> (Vector4<f64>, f64, Vector3<f64>) {
    let k = eos.k();
    let (nu, mu) = (aux.nu, aux.mu);
    let w = aux.w;
    let kbu = bg.beta.dot(&(blocks.k_low * u));
    let xi_wu = w.dot(&(blocks.xi * u));
    let ell = -kbu / (nu * bg.alpha) - blocks.xi.trace() + blocks.upsilon.dot(&w) / mu + xi_wu / (nu * mu);

    let kuu = u.dot(&(blocks.k_low * u));
    let inner = bg.beta * (kuu / (nu * bg.alpha)) + blocks.upsilon * nu + blocks.xi * u * 2.0;
    let m = -(m_ij * inner);

    let hz = w * ((3.0 * k - 1.0) / (nu * mu) * bg.dt_psi) + bg.d_psi * ((1.0 - 3.0 * k) / nu) + m;
    (Vector4::new(k * ell, hz[0], hz[1], hz[2]), ell, m)
}

/// Smallest eigenvalue of a symmetric matrix.
pub fn symmetric_min_eigenvalue(m: &Matrix4<f64>) -> f64 {
    m.symmetric_eigenvalues().min()
}

pub(crate) fn symmetrize3(m: &Matrix3<f64>) -> Matrix3<f64> {
    (m + m.transpose()) * 0.5
}

pub(crate) fn symmetrize4(m: &Matrix4<f64>) -> Matrix4<f64> {
    (m + m.transpose()) * 0.5
}
