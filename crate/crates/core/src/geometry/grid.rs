use crate::error::{Error, Result};

/// Periodic Cartesian grid. Axis 0 varies slowest in the row-major layout.
///
/// An axis with a single point is degenerate: fields are constant along it
/// and every derivative in that direction vanishes identically.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct Grid {
    dims: [usize; 3],
    spacing: [f64; 3],
}

impl Grid {
    pub fn new(dims: [usize; 3], spacing: [f64; 3]) -> Result<Self> {
        for a in 0..3 {
            if dims[a] == 0 || (dims[a] > 1 && dims[a] < 4) {
                return Err(Error::Grid(format!("axis {a} has {} points; need 1 (degenerate) or at least 4", dims[a])));
            }
            if !(spacing[a] > 0.0 && spacing[a].is_finite()) {
                return Err(Error::Grid(format!("axis {a} spacing {} must be positive", spacing[a])));
            }
        }
        Ok(Self { dims, spacing })
    }

    /// Grid covering `[0, 2π)` along each active axis.
    pub fn torus(dims: [usize; 3]) -> Result<Self> {
        let two_pi = std::f64::consts::TAU;
        let spacing = dims.map(|n| two_pi / n.max(1) as f64);
        Self::new(dims, spacing)
    }

    pub fn cube(n: usize) -> Result<Self> {
        Self::torus([n, n, n])
    }

    pub fn dims(&self) -> [usize; 3] {
        self.dims
    }

    pub fn spacing(&self) -> [f64; 3] {
        self.spacing
    }

    pub fn len(&self) -> usize {
        self.dims.iter().product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn is_active(&self, axis: usize) -> bool {
        self.dims[axis] > 1
    }

    /// Period length along an axis.
    pub fn extent(&self, axis: usize) -> f64 {
        self.dims[axis] as f64 * self.spacing[axis]
    }

    pub fn cell_volume(&self) -> f64 {
        self.spacing.iter().product()
    }

    /// Smallest spacing over active axes (axis 0 if every axis is degenerate).
    pub fn min_spacing(&self) -> f64 {
        (0..3).filter(|&a| self.is_active(a)).map(|a| self.spacing[a]).reduce(f64::min).unwrap_or(self.spacing[0])
    }

    #[inline]
    pub fn index(&self, c: [usize; 3]) -> usize {
        (c[0] * self.dims[1] + c[1]) * self.dims[2] + c[2]
    }

    #[inline]
    pub fn coords(&self, idx: usize) -> [usize; 3] {
        let c2 = idx % self.dims[2];
        let r = idx / self.dims[2];
        [r / self.dims[1], r % self.dims[1], c2]
    }

    /// Coordinate position of a point.
    pub fn position(&self, idx: usize) -> [f64; 3] {
        let c = self.coords(idx);
        [0, 1, 2].map(|a| c[a] as f64 * self.spacing[a])
    }

    /// Row-major stride of an axis.
    #[inline]
    pub fn stride(&self, axis: usize) -> usize {
        match axis {
            0 => self.dims[1] * self.dims[2],
            1 => self.dims[2],
            _ => 1,
        }
    }

    /// Index of the point displaced by `shift` cells along `axis`, wrapping periodically.
    #[inline]
    pub fn shifted(&self, idx: usize, axis: usize, shift: isize) -> usize {
        let n = self.dims[axis] as isize;
        let c = self.coords(idx)[axis] as isize;
        let wrapped = (c + shift).rem_euclid(n);
        (idx as isize + (wrapped - c) * self.stride(axis) as isize) as usize
    }

    /// Indices of several displacements along one axis, sharing the coordinate lookup.
    #[inline]
    pub fn stencil<const N: usize>(&self, idx: usize, axis: usize, shifts: [isize; N]) -> [usize; N] {
        let n = self.dims[axis] as isize;
        let stride = self.stride(axis);
        let c = ((idx / stride) % self.dims[axis]) as isize;
        shifts.map(|s| (idx as isize + ((c + s).rem_euclid(n) - c) * stride as isize) as usize)
    }

    /// Doubles the resolution along every active axis, keeping the extent.
    pub fn refined(&self) -> Result<Self> {
        let mut dims = self.dims;
        let mut spacing = self.spacing;
        for a in 0..3 {
            if self.is_active(a) {
                dims[a] *= 2;
                spacing[a] /= 2.0;
            }
        }
        Self::new(dims, spacing)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn index_roundtrip_and_shift() {
        let g = Grid::new([4, 5, 6], [1.0; 3]).unwrap();
        for idx in 0..g.len() {
            assert_eq!(g.index(g.coords(idx)), idx);
        }
        let idx = g.index([3, 4, 5]);
        assert_eq!(g.coords(g.shifted(idx, 0, 1)), [0, 4, 5]);
        assert_eq!(g.coords(g.shifted(idx, 1, 2)), [3, 1, 5]);
        assert_eq!(g.coords(g.shifted(idx, 2, -7)), [3, 4, 4]);
    }

    #[test]
    fn rejects_short_axes() {
        assert!(Grid::new([3, 8, 8], [1.0; 3]).is_err());
        assert!(Grid::new([8, 8, 8], [0.0, 1.0, 1.0]).is_err());
        assert!(Grid::new([256, 1, 1], [0.1; 3]).is_ok());
    }
}
