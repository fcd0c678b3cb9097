//! Spatial derivative operators on the periodic grid.

use rustfft::num_complex::Complex;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use super::field::{flatten, unflatten, FieldValue};
use super::grid::Grid;
use crate::par;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum Scheme {
    /// Fourth-order central differences.
    #[default]
    Fd4,
    /// FFT differentiation along each periodic line.
    Spectral,
}

impl Scheme {
    pub fn name(&self) -> &'static str {
        match self {
            Scheme::Fd4 => "fd4",
            Scheme::Spectral => "spectral",
        }
    }
}

/// Partial derivative along `axis` of point-major data with `ncomp` components.
pub fn partial_flat(grid: &Grid, data: &[f64], ncomp: usize, axis: usize, scheme: Scheme) -> Vec<f64> {
    debug_assert_eq!(data.len(), grid.len() * ncomp);
    if !grid.is_active(axis) {
        return vec![0.0; data.len()];
    }
    match scheme {
        Scheme::Fd4 => fd4(grid, data, ncomp, axis),
        Scheme::Spectral => spectral(grid, data, ncomp, axis),
    }
}

/// Typed wrapper around [`partial_flat`].
pub fn partial<T: FieldValue>(grid: &Grid, f: &[T], axis: usize, scheme: Scheme) -> Vec<T> {
    if !grid.is_active(axis) {
        return vec![T::zero(); f.len()];
    }
    unflatten(&partial_flat(grid, &flatten(f), T::LEN, axis, scheme))
}

fn fd4(grid: &Grid, data: &[f64], ncomp: usize, axis: usize) -> Vec<f64> {
    let inv = 1.0 / (12.0 * grid.spacing()[axis]);
    // Opposite taps are adjacent so each pair cancels exactly on constant data.
    apply_stencil(grid, data, ncomp, axis, [1, -1, 2, -2], [8.0 * inv, -8.0 * inv, -inv, inv])
}

/// `out(x) = Σ_j w_j data(x + s_j ê_axis)` with periodic wrapping, processed row by row
/// along the fastest axis so that no per-point index arithmetic is needed.
fn apply_stencil<const N: usize>(
    grid: &Grid,
    data: &[f64],
    ncomp: usize,
    axis: usize,
    shifts: [isize; N],
    weights: [f64; N],
) -> Vec<f64> {
    let [d0, d1, d2] = grid.dims();
    let row = d2 * ncomp;
    let wrap = |c: usize, s: isize, n: usize| (c as isize + s).rem_euclid(n as isize) as usize;
    // Source offsets within a row for the fastest axis.
    let inner: Vec<[usize; N]> = (0..d2).map(|i2| shifts.map(|s| wrap(i2, s, d2) * ncomp)).collect();
    let mut out = vec![0.0; data.len()];
    par::for_each_chunk_mut(&mut out, row, |r, o| {
        let (i0, i1) = (r / d1, r % d1);
        if axis == 2 {
            let src = &data[r * row..(r + 1) * row];
            for (i2, offs) in inner.iter().enumerate() {
                for c in 0..ncomp {
                    let mut acc = 0.0;
                    for j in 0..N {
                        acc += weights[j] * src[offs[j] + c];
                    }
                    o[i2 * ncomp + c] = acc;
                }
            }
        } else {
            let rows = shifts.map(|s| {
                let q = if axis == 0 { wrap(i0, s, d0) * d1 + i1 } else { i0 * d1 + wrap(i1, s, d1) };
                &data[q * row..(q + 1) * row]
            });
            for (k, v) in o.iter_mut().enumerate() {
                let mut acc = 0.0;
                for j in 0..N {
                    acc += weights[j] * rows[j][k];
                }
                *v = acc;
            }
        }
    });
    out
}

fn spectral(grid: &Grid, data: &[f64], ncomp: usize, axis: usize) -> Vec<f64> {
    let n = grid.dims()[axis];
    let stride = grid.stride(axis);
    let lines = grid.len() / n;
    let fft = FftPlanner::<f64>::new().plan_fft_forward(n);
    let ifft = FftPlanner::<f64>::new().plan_fft_inverse(n);
    let dk = std::f64::consts::TAU / grid.extent(axis);
    // Line `l` enumerates points whose axis coordinate is zero.
    let base = |l: usize| -> usize {
        let dims = grid.dims();
        let mut c = [0usize; 3];
        let mut r = l;
        for a in (0..3).rev() {
            if a == axis {
                continue;
            }
            c[a] = r % dims[a];
            r /= dims[a];
        }
        grid.index(c)
    };
    let results: Vec<Vec<f64>> = par::map_indexed(lines * ncomp, |job| {
        let (l, comp) = (job / ncomp, job % ncomp);
        let b = base(l);
        let vals: Vec<f64> = (0..n).map(|i| data[(b + i * stride) * ncomp + comp]).collect();
        if vals.iter().all(|v| *v == vals[0]) {
            return vec![0.0; n];
        }
        let mut buf: Vec<Complex<f64>> = vals.iter().map(|v| Complex::new(*v, 0.0)).collect();
        fft.process(&mut buf);
        for (m, x) in buf.iter_mut().enumerate() {
            let k = if 2 * m < n {
                m as f64
            } else if 2 * m == n {
                0.0
            } else {
                m as f64 - n as f64
            };
            *x *= Complex::new(0.0, k * dk / n as f64);
        }
        ifft.process(&mut buf);
        buf.iter().map(|x| x.re).collect()
    });
    let mut out = vec![0.0; data.len()];
    for (job, vals) in results.into_iter().enumerate() {
        let (l, comp) = (job / ncomp, job % ncomp);
        let b = base(l);
        for (i, v) in vals.into_iter().enumerate() {
            out[(b + i * stride) * ncomp + comp] = v;
        }
    }
    out
}

/// Sixth-difference Kreiss-Oliger operator `δ⁶f / (64 h)` along `axis`.
///
/// Adding `σ` times this to a right-hand side damps grid-scale modes
/// without changing the formal order of the fourth-order scheme.
pub fn kreiss_oliger_flat(grid: &Grid, data: &[f64], ncomp: usize, axis: usize) -> Vec<f64> {
    if !grid.is_active(axis) {
        return vec![0.0; data.len()];
    }
    let inv = 1.0 / (64.0 * grid.spacing()[axis]);
    let w = [1.0, -6.0, 15.0, -20.0, 15.0, -6.0, 1.0].map(|c| c * inv);
    apply_stencil(grid, data, ncomp, axis, [-3, -2, -1, 0, 1, 2, 3], w)
}
