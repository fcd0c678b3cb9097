//! Fixed spatial geometry on the periodic grid.
//!
//! A [`Geometry`] owns the metric together with quantities derived from it
//! once at construction: inverse, volume density, Christoffel symbols and
//! Ricci tensor. Curvature is obtained by differentiating the Christoffel
//! symbols numerically, so any smooth user metric is supported; constant
//! metrics give exactly zero curvature because every stencil annihilates
//! constants.
//!
//! Index conventions: `christoffel[k][(i, j)] = Γᵏ_ij`,
//! `riemann[i][j][(k, l)] = Rⁱ_jkl = ∂_k Γⁱ_lj − ∂_l Γⁱ_kj + Γⁱ_km Γᵐ_lj − Γⁱ_lm Γᵐ_kj`
//! and `Ric_jl = Rⁱ_jil`.

pub mod deriv;
pub mod field;
pub mod grid;
pub mod metric;
pub mod tensor;

use nalgebra::{Matrix3, SymmetricEigen, Vector3};

pub use deriv::{partial, partial_flat, Scheme};
pub use field::FieldValue;
pub use grid::Grid;
pub use metric::{MetricField, MetricSpec};
pub use tensor::{covariant_derivative, covariant_power, Slot, TensorField};

use crate::error::{Error, Result};
use crate::par;

pub type Christoffel = [Matrix3<f64>; 3];
pub type Riemann = [[Matrix3<f64>; 3]; 3];

/// Curvature quantities at every grid point.
#[derive(Debug, Clone)]
pub struct CurvatureField {
    pub christoffel: Vec<Christoffel>,
    pub riemann: Vec<Riemann>,
    pub ricci: Vec<Matrix3<f64>>,
    pub scalar: Vec<f64>,
    /// Riemann rebuilt from Ricci through the three-dimensional decomposition.
    pub reconstruction: Vec<Riemann>,
}

#[derive(Debug, Clone)]
pub struct Geometry {
    grid: Grid,
    scheme: Scheme,
    metric: MetricField,
    inverse: Vec<Matrix3<f64>>,
    sqrt_det: Vec<f64>,
    christoffel: Vec<Christoffel>,
    ricci: Vec<Matrix3<f64>>,
    flat: bool,
}

impl Geometry {
    pub fn new(grid: Grid, metric: MetricField, scheme: Scheme) -> Result<Self> {
        if metric.g.len() != grid.len() {
            return Err(Error::Grid(format!("metric has {} points, grid has {}", metric.g.len(), grid.len())));
        }
        let inv_det: Vec<(Matrix3<f64>, f64)> = par::try_map_indexed(grid.len(), |i| {
            let g = metric.g[i];
            let sym = (g + g.transpose()) * 0.5;
            let chol = sym.cholesky().ok_or(Error::MetricNotPositive { index: i, coords: grid.coords(i) })?;
            let det = g.determinant();
            if !(det > 0.0) {
                return Err(Error::SingularMetric { index: i, coords: grid.coords(i) });
            }
            Ok((chol.inverse(), det.sqrt()))
        })?;
        let (inverse, sqrt_det) = inv_det.into_iter().unzip();
        let flat = metric.is_constant();
        let mut geom =
            Self { grid, scheme, metric, inverse, sqrt_det, christoffel: Vec::new(), ricci: Vec::new(), flat };
        geom.christoffel = christoffels_from_metric(&geom);
        geom.ricci = ricci_from_christoffels(&geom);
        Ok(geom)
    }

    pub fn flat(grid: Grid, scheme: Scheme) -> Self {
        Self::new(grid, MetricField::flat(&grid), scheme).expect("identity metric is valid")
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }
    pub fn scheme(&self) -> Scheme {
        self.scheme
    }
    pub fn metric(&self) -> &MetricField {
        &self.metric
    }
    pub fn g(&self, idx: usize) -> &Matrix3<f64> {
        &self.metric.g[idx]
    }
    pub fn g_inv(&self, idx: usize) -> &Matrix3<f64> {
        &self.inverse[idx]
    }
    pub fn dt_g(&self, idx: usize) -> Matrix3<f64> {
        self.metric.dt_g.as_ref().map_or_else(Matrix3::zeros, |d| d[idx])
    }
    pub fn sqrt_det(&self) -> &[f64] {
        &self.sqrt_det
    }
    pub fn christoffel(&self) -> &[Christoffel] {
        &self.christoffel
    }
    pub fn ricci(&self) -> &[Matrix3<f64>] {
        &self.ricci
    }
    /// True for constant metrics, where every connection term vanishes.
    pub fn is_flat(&self) -> bool {
        self.flat
    }

    /// `Σ f √det g ΔV` with a deterministic reduction.
    pub fn integrate(&self, f: &[f64]) -> f64 {
        let dv = self.grid.cell_volume();
        par::sum_indexed(f.len(), |i| f[i] * self.sqrt_det[i]) * dv
    }

    /// Integrates a pointwise closure.
    pub fn integrate_fn(&self, f: impl Fn(usize) -> f64 + Sync + Send) -> f64 {
        let dv = self.grid.cell_volume();
        par::sum_indexed(self.grid.len(), |i| f(i) * self.sqrt_det[i]) * dv
    }

    /// Largest `|λ|` of `g⁻¹Ric` over the grid.
    pub fn max_ricci_op(&self) -> f64 {
        par::map_indexed(self.grid.len(), |i| {
            let l = self.metric.g[i].cholesky().map(|c| c.l()).unwrap_or_else(Matrix3::identity);
            let li = l.try_inverse().unwrap_or_else(Matrix3::identity);
            let s = li * self.ricci[i] * li.transpose();
            let s = (s + s.transpose()) * 0.5;
            SymmetricEigen::new(s).eigenvalues.amax()
        })
        .into_iter()
        .fold(0.0, f64::max)
    }

    /// Full curvature field, including Riemann and its reconstruction from Ricci.
    pub fn riemann_ricci(&self) -> CurvatureField {
        riemann_ricci(self)
    }

    /// `∇_a f` for a scalar field.
    pub fn gradient(&self, f: &[f64]) -> Vec<Vector3<f64>> {
        let d: Vec<Vec<f64>> = (0..3).map(|a| partial(&self.grid, f, a, self.scheme)).collect();
        (0..f.len()).map(|i| Vector3::new(d[0][i], d[1][i], d[2][i])).collect()
    }
}

/// `Γᵏ_ij = ½ gᵏˡ(∂_i g_jl + ∂_j g_il − ∂_l g_ij)`.
pub fn christoffels_from_metric(geom: &Geometry) -> Vec<Christoffel> {
    let grid = geom.grid;
    let dg: Vec<Vec<Matrix3<f64>>> = (0..3).map(|a| partial(&grid, &geom.metric.g, a, geom.scheme)).collect();
    par::map_indexed(grid.len(), |p| {
        let ginv = &geom.inverse[p];
        let mut low = [Matrix3::zeros(); 3]; // low[l][(i,j)] = Γ_lij
        for l in 0..3 {
            for i in 0..3 {
                for j in 0..3 {
                    low[l][(i, j)] = 0.5 * (dg[i][p][(j, l)] + dg[j][p][(i, l)] - dg[l][p][(i, j)]);
                }
            }
        }
        let mut gam = [Matrix3::zeros(); 3];
        for k in 0..3 {
            for l in 0..3 {
                let c = ginv[(k, l)];
                if c != 0.0 {
                    gam[k] += low[l] * c;
                }
            }
        }
        gam
    })
}

/// Ricci tensor without materialising Riemann: one axis of `∂Γ` at a time.
fn ricci_from_christoffels(geom: &Geometry) -> Vec<Matrix3<f64>> {
    let grid = geom.grid;
    let gam = &geom.christoffel;
    let mut ric: Vec<Matrix3<f64>> = par::map_indexed(grid.len(), |p| {
        let g = &gam[p];
        let mut r = Matrix3::zeros();
        for j in 0..3 {
            for l in 0..3 {
                let mut v = 0.0;
                for i in 0..3 {
                    for m in 0..3 {
                        v += g[i][(i, m)] * g[m][(l, j)] - g[i][(l, m)] * g[m][(i, j)];
                    }
                }
                r[(j, l)] = v;
            }
        }
        r
    });
    for a in 0..3 {
        if !grid.is_active(a) {
            continue;
        }
        let dga = partial(&grid, gam, a, geom.scheme);
        par::for_each_mut(&mut ric, |p, r| {
            let d = &dga[p];
            // + ∂_a Γᵃ_lj
            for j in 0..3 {
                for l in 0..3 {
                    r[(j, l)] += d[a][(l, j)];
                }
            }
            // − ∂_a Γⁱ_ij  contributes to Ric_ja
            for j in 0..3 {
                let s: f64 = (0..3).map(|i| d[i][(i, j)]).sum();
                r[(j, a)] -= s;
            }
        });
    }
    ric
}

pub fn riemann_ricci(geom: &Geometry) -> CurvatureField {
    let grid = geom.grid;
    let gam = &geom.christoffel;
    let dgam: Vec<Vec<Christoffel>> = (0..3).map(|a| partial(&grid, gam, a, geom.scheme)).collect();
    let riemann: Vec<Riemann> = par::map_indexed(grid.len(), |p| {
        let g = &gam[p];
        let mut r = [[Matrix3::zeros(); 3]; 3];
        for i in 0..3 {
            for j in 0..3 {
                for k in 0..3 {
                    for l in 0..3 {
                        let mut v = dgam[k][p][i][(l, j)] - dgam[l][p][i][(k, j)];
                        for m in 0..3 {
                            v += g[i][(k, m)] * g[m][(l, j)] - g[i][(l, m)] * g[m][(k, j)];
                        }
                        r[i][j][(k, l)] = v;
                    }
                }
            }
        }
        r
    });
    let ricci: Vec<Matrix3<f64>> =
        riemann.iter().map(|r| Matrix3::from_fn(|j, l| (0..3).map(|i| r[i][j][(i, l)]).sum())).collect();
    let scalar: Vec<f64> = (0..grid.len()).map(|p| (geom.inverse[p].component_mul(&ricci[p])).sum()).collect();
    let reconstruction = par::map_indexed(grid.len(), |p| {
        let g = &geom.metric.g[p];
        let ric = &ricci[p];
        let s = scalar[p];
        // R_ijkl = g_ik R_jl − g_il R_jk − g_jk R_il + g_jl R_ik − (R/2)(g_ik g_jl − g_il g_jk)
        let low = |i: usize, j: usize, k: usize, l: usize| {
            g[(i, k)] * ric[(j, l)] - g[(i, l)] * ric[(j, k)] - g[(j, k)] * ric[(i, l)] + g[(j, l)] * ric[(i, k)]
                - 0.5 * s * (g[(i, k)] * g[(j, l)] - g[(i, l)] * g[(j, k)])
        };
        let ginv = &geom.inverse[p];
        let mut r = [[Matrix3::zeros(); 3]; 3];
        for i in 0..3 {
            for j in 0..3 {
                for k in 0..3 {
                    for l in 0..3 {
                        r[i][j][(k, l)] = (0..3).map(|m| ginv[(i, m)] * low(m, j, k, l)).sum();
                    }
                }
            }
        }
        r
    });
    CurvatureField { christoffel: gam.clone(), riemann, ricci, scalar, reconstruction }
}

/// Both routes to `∫ g^{mn} ∇_m ψ [∇_n, ∇_a] zᵃ μ_g`.
///
/// `direct` differentiates `z` twice covariantly and antisymmetrises;
/// `via_ricci` uses `[∇_n, ∇_a] zᵃ = −Ric_bn zᵇ`.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct CommutatorDefect {
    pub direct: f64,
    pub via_ricci: f64,
}

pub fn commutator_defect(geom: &Geometry, psi: &[f64], z: &[Vector3<f64>]) -> Result<CommutatorDefect> {
    let dpsi = geom.gradient(psi);
    let zt = TensorField::vector(z);
    let dz = covariant_derivative(geom, &zt)?; // (∇z)ⁱ_a
    let ddz = covariant_derivative(geom, &dz)?; // (∇∇z)ⁱ_{a n} = ∇_n ∇_a zⁱ
    let direct = geom.integrate_fn(|p| {
        let s = ddz.point(p);
        let at = |i: usize, a: usize, n: usize| s[(i * 3 + a) * 3 + n];
        let ginv = &geom.inverse[p];
        let mut total = 0.0;
        for n in 0..3 {
            let mut comm = 0.0;
            for a in 0..3 {
                comm += at(a, a, n) - at(a, n, a);
            }
            let up_psi: f64 = (0..3).map(|m| ginv[(m, n)] * dpsi[p][m]).sum();
            total += up_psi * comm;
        }
        total
    });
    let via_ricci = geom.integrate_fn(|p| {
        let ginv = &geom.inverse[p];
        let up = ginv * dpsi[p];
        -(up.transpose() * geom.ricci[p] * z[p])[(0, 0)]
    });
    Ok(CommutatorDefect { direct, via_ricci })
}
