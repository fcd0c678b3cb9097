use nalgebra::Matrix3;
use serde::{Deserialize, Serialize};

use super::grid::Grid;

/// Spatial metric `g_ij` sampled on the grid, plus an optional `∂_t g_ij`.
#[derive(Debug, Clone)]
pub struct MetricField {
    pub g: Vec<Matrix3<f64>>,
    pub dt_g: Option<Vec<Matrix3<f64>>>,
}

/// Named analytic metric families available from configuration.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "metric", rename_all = "kebab-case", deny_unknown_fields)]
pub enum MetricSpec {
    /// Euclidean `δ_ij`.
    Flat,
    /// `g = e^{2φ} δ` with `φ = A sin(k·θ)`, `θ_a = 2π x_a / L_a`.
    ConformalBump { amplitude: f64, wavevector: [i32; 3] },
    /// `g = diag(e^{2A sin θ₂}, e^{2A sin θ₃}, e^{2A sin θ₁})`; not conformally flat.
    DiagonalBump { amplitude: f64 },
}

impl MetricSpec {
    pub fn build(&self, grid: &Grid) -> MetricField {
        match *self {
            MetricSpec::Flat => MetricField::flat(grid),
            MetricSpec::ConformalBump { amplitude, wavevector } => {
                MetricField::conformal_bump(grid, amplitude, wavevector)
            }
            MetricSpec::DiagonalBump { amplitude } => MetricField::diagonal_bump(grid, amplitude),
        }
    }

    pub fn is_flat(&self) -> bool {
        matches!(self, MetricSpec::Flat)
    }
}

/// Normalised angle `2π x_a / L_a` of a grid point.
pub fn angles(grid: &Grid, idx: usize) -> [f64; 3] {
    let x = grid.position(idx);
    [0, 1, 2].map(|a| std::f64::consts::TAU * x[a] / grid.extent(a))
}

impl MetricField {
    pub fn from_fn(grid: &Grid, f: impl Fn(usize) -> Matrix3<f64>) -> Self {
        Self { g: (0..grid.len()).map(f).collect(), dt_g: None }
    }

    pub fn flat(grid: &Grid) -> Self {
        Self::from_fn(grid, |_| Matrix3::identity())
    }

    pub fn constant(grid: &Grid, g: Matrix3<f64>) -> Self {
        Self::from_fn(grid, |_| g)
    }

    pub fn conformal_bump(grid: &Grid, amplitude: f64, k: [i32; 3]) -> Self {
        Self::from_fn(grid, |idx| {
            let th = angles(grid, idx);
            let phase: f64 = (0..3).map(|a| k[a] as f64 * th[a]).sum();
            Matrix3::identity() * (2.0 * amplitude * phase.sin()).exp()
        })
    }

    pub fn diagonal_bump(grid: &Grid, amplitude: f64) -> Self {
        Self::from_fn(grid, |idx| {
            let th = angles(grid, idx);
            Matrix3::from_diagonal(&nalgebra::Vector3::new(
                (2.0 * amplitude * th[1].sin()).exp(),
                (2.0 * amplitude * th[2].sin()).exp(),
                (2.0 * amplitude * th[0].sin()).exp(),
            ))
        })
    }

    /// Multiplies every component by `c`.
    pub fn scaled(&self, c: f64) -> Self {
        Self {
            g: self.g.iter().map(|m| m * c).collect(),
            dt_g: self.dt_g.as_ref().map(|d| d.iter().map(|m| m * c).collect()),
        }
    }

    pub fn is_constant(&self) -> bool {
        self.g.iter().all(|m| *m == self.g[0])
    }
}
