//! Tensor fields of rank ≤ 4 and their Levi-Civita covariant derivatives.

use nalgebra::Vector3;

use super::deriv::partial_flat;
use super::Geometry;
use crate::error::{Error, Result};
use crate::par;

pub const MAX_RANK: usize = 4;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Slot {
    Up,
    Down,
}

/// Point-major components; the multi-index is row-major over `slots`.
#[derive(Debug, Clone)]
pub struct TensorField {
    pub slots: Vec<Slot>,
    pub data: Vec<f64>,
}

impl TensorField {
    pub fn new(slots: Vec<Slot>, data: Vec<f64>) -> Result<Self> {
        if slots.len() > MAX_RANK {
            return Err(Error::UnsupportedValence(slots.len()));
        }
        Ok(Self { slots, data })
    }

    pub fn scalar(f: &[f64]) -> Self {
        Self { slots: vec![], data: f.to_vec() }
    }

    pub fn vector(v: &[Vector3<f64>]) -> Self {
        Self { slots: vec![Slot::Up], data: v.iter().flat_map(|x| [x[0], x[1], x[2]]).collect() }
    }

    pub fn rank(&self) -> usize {
        self.slots.len()
    }

    pub fn ncomp(&self) -> usize {
        3usize.pow(self.rank() as u32)
    }

    pub fn point(&self, idx: usize) -> &[f64] {
        let n = self.ncomp();
        &self.data[idx * n..(idx + 1) * n]
    }
}

/// `∇T`, with the new covariant slot appended last.
pub fn covariant_derivative(geom: &Geometry, t: &TensorField) -> Result<TensorField> {
    let rank = t.rank();
    if rank + 1 > MAX_RANK {
        return Err(Error::UnsupportedValence(rank + 1));
    }
    let nc = t.ncomp();
    let grid = geom.grid();
    let partials: Vec<Vec<f64>> = (0..3).map(|a| partial_flat(grid, &t.data, nc, a, geom.scheme())).collect();
    let pow3: Vec<usize> = (0..rank).map(|s| 3usize.pow((rank - 1 - s) as u32)).collect();
    let mut out = vec![0.0; t.data.len() * 3];
    let flat = geom.is_flat();
    par::for_each_chunk_mut(&mut out, nc * 3, |idx, o| {
        let tp = t.point(idx);
        let gam = &geom.christoffel()[idx];
        for c in 0..nc {
            for a in 0..3 {
                let mut v = partials[a][idx * nc + c];
                if !flat {
                    for (s, slot) in t.slots.iter().enumerate() {
                        let is = (c / pow3[s]) % 3;
                        let base = c - is * pow3[s];
                        for m in 0..3 {
                            let tm = tp[base + m * pow3[s]];
                            match slot {
                                Slot::Up => v += gam[is][(a, m)] * tm,
                                Slot::Down => v -= gam[m][(a, is)] * tm,
                            }
                        }
                    }
                }
                o[c * 3 + a] = v;
            }
        }
    });
    let mut slots = t.slots.clone();
    slots.push(Slot::Down);
    Ok(TensorField { slots, data: out })
}

/// `∇^l T` for `l` successive derivatives.
pub fn covariant_power(geom: &Geometry, t: &TensorField, l: usize) -> Result<TensorField> {
    let mut cur = t.clone();
    for _ in 0..l {
        cur = covariant_derivative(geom, &cur)?;
    }
    Ok(cur)
}
