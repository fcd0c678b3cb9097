use nalgebra::{Vector3, Vector4};
use serde::Serialize;

use crate::geometry::{Geometry, Grid};
use crate::par;

/// Point-major field of `Z = (ψ, z¹, z², z³)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ZField {
    grid: Grid,
    data: Vec<f64>,
}

impl ZField {
    pub const NCOMP: usize = 4;

    pub fn zeros(grid: Grid) -> Self {
        Self { data: vec![0.0; grid.len() * 4], grid }
    }

    pub fn from_fn(grid: Grid, f: impl Fn(usize) -> Vector4<f64> + Sync + Send) -> Self {
        let mut data = vec![0.0; grid.len() * 4];
        par::for_each_chunk_mut(&mut data, 4, |i, out| out.copy_from_slice(f(i).as_slice()));
        Self { grid, data }
    }

    pub fn from_data(grid: Grid, data: Vec<f64>) -> Self {
        assert_eq!(data.len(), grid.len() * 4, "field data length does not match grid");
        Self { grid, data }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn len(&self) -> usize {
        self.grid.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn point(&self, i: usize) -> Vector4<f64> {
        Vector4::from_column_slice(&self.data[4 * i..4 * i + 4])
    }

    pub fn psi(&self, i: usize) -> f64 {
        self.data[4 * i]
    }

    pub fn z(&self, i: usize) -> Vector3<f64> {
        Vector3::from_column_slice(&self.data[4 * i + 1..4 * i + 4])
    }

    /// Component `c` as its own array (0 = ψ, 1..=3 = zⁱ).
    pub fn component(&self, c: usize) -> Vec<f64> {
        self.data.iter().skip(c).step_by(4).copied().collect()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// `self + c·other`.
    pub fn axpy(&self, c: f64, other: &[f64]) -> Self {
        let mut out = self.clone();
        par::for_each_chunk_mut(&mut out.data, 4, |i, o| {
            for k in 0..4 {
                o[k] += c * other[4 * i + k];
            }
        });
        out
    }
}

/// Admissible state region; leaving it terminates a run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, serde::Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Ceiling {
    pub z_max: f64,
    pub psi_max: f64,
}

impl Default for Ceiling {
    fn default() -> Self {
        Self { z_max: 0.1, psi_max: 0.5 }
    }
}

/// First point (lowest index) violating the ceiling, if any.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Violation {
    pub point: usize,
    pub coords: [usize; 3],
    pub values: [f64; 4],
    pub reason: String,
}

impl Ceiling {
    pub fn check(&self, field: &ZField, geom: &Geometry) -> Option<Violation> {
        let bad = par::map_indexed(field.len(), |i| {
            let p = field.point(i);
            let z = field.z(i);
            let zn = z.dot(&(geom.g(i) * z)).sqrt();
            if !p.iter().all(|v| v.is_finite()) {
                Some("non-finite value".to_string())
            } else if zn > self.z_max {
                Some(format!("|z|_g = {zn:e} exceeds ceiling {}", self.z_max))
            } else if p[0].abs() > self.psi_max {
                Some(format!("|psi| = {:e} exceeds ceiling {}", p[0].abs(), self.psi_max))
            } else {
                None
            }
        });
        bad.into_iter().enumerate().find_map(|(i, r)| {
            r.map(|reason| {
                let p = field.point(i);
                Violation { point: i, coords: field.grid().coords(i), values: [p[0], p[1], p[2], p[3]], reason }
            })
        })
    }
}
