use nalgebra::{Matrix3, Matrix4, Vector3};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::geometry::{covariant_derivative, Geometry, TensorField};
use crate::par;
use crate::solver::ZField;

/// Highest supported derivative order.
pub const MAX_ORDER: usize = 3;

/// `E_s`, `E^p_s` and `Ė_s` for one order.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SobolevEnergy {
    pub order: usize,
    pub e: f64,
    pub ep: f64,
    pub edot: f64,
}

/// Per-order integrals `I_l = ∫⟨∇ˡZ, M⁰∇ˡZ⟩` and `P_l = ∫⟨Π∇ˡZ, M⁰Π∇ˡZ⟩`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OrderIntegrals {
    pub full: Vec<f64>,
    pub parallel: Vec<f64>,
}

impl OrderIntegrals {
    pub fn max_order(&self) -> usize {
        self.full.len() - 1
    }

    pub fn energy(&self, s: usize) -> SobolevEnergy {
        SobolevEnergy {
            order: s,
            e: 0.5 * self.full[..=s].iter().sum::<f64>(),
            ep: 0.5 * self.parallel[..=s].iter().sum::<f64>(),
            edot: self.full[s],
        }
    }
}

/// Contracts every derivative slot of a point's components with `Eᵀ`, where `g⁻¹ = EEᵀ`,
/// so that the `g`-weighted pairing becomes a plain sum over frame indices.
///
/// `x` holds `prefix` blocks of `3ˡ` entries, row-major in the derivative slots.
fn to_frame(x: &mut [f64], l: usize, e: &Matrix3<f64>) {
    let n = 3usize.pow(l as u32);
    let mut tmp = vec![0.0; n];
    for block in x.chunks_exact_mut(n) {
        for s in 0..l {
            let stride = 3usize.pow((l - 1 - s) as u32);
            for (idx, t) in tmp.iter_mut().enumerate() {
                let c = (idx / stride) % 3;
                let base = idx - c * stride;
                *t = (0..3).map(|a| e[(a, c)] * block[base + a * stride]).sum();
            }
            block.copy_from_slice(&tmp);
        }
    }
}

/// Integrals of orders `0..=max_order` for a field and a pointwise `M⁰`.
pub fn order_integrals(
    field: &ZField,
    geom: &Geometry,
    m0: &[Matrix4<f64>],
    max_order: usize,
) -> Result<OrderIntegrals> {
    if max_order > MAX_ORDER {
        return Err(Error::UnsupportedValence(max_order + 1));
    }
    let n = field.len();
    let mut psi = TensorField::scalar(&field.component(0));
    let zs: Vec<Vector3<f64>> = (0..n).map(|i| field.z(i)).collect();
    let mut z = TensorField::vector(&zs);
    let frames: Vec<Matrix3<f64>> = if geom.is_flat() && geom.g_inv(0) == &Matrix3::identity() {
        Vec::new()
    } else {
        par::map_indexed(n, |i| geom.g_inv(i).cholesky().map(|c| c.l()).unwrap_or_else(Matrix3::identity))
    };
    let mut full = Vec::with_capacity(max_order + 1);
    let mut parallel = Vec::with_capacity(max_order + 1);
    for l in 0..=max_order {
        if l > 0 {
            psi = covariant_derivative(geom, &psi)?;
            z = covariant_derivative(geom, &z)?;
        }
        let nd = 3usize.pow(l as u32);
        let dens = par::map_indexed(n, |i| {
            let mut p = psi.point(i).to_vec();
            let mut v = z.point(i).to_vec();
            if !frames.is_empty() {
                to_frame(&mut p, l, &frames[i]);
                to_frame(&mut v, l, &frames[i]);
            }
            let m = &m0[i];
            let (mut total, mut par_part) = (0.0, 0.0);
            for c in 0..nd {
                let w = [p[c], v[c], v[nd + c], v[2 * nd + c]];
                let mut zz = 0.0;
                for a in 1..4 {
                    for b in 1..4 {
                        zz += w[a] * m[(a, b)] * w[b];
                    }
                }
                let mut mixed = 0.0;
                for b in 1..4 {
                    mixed += w[b] * (m[(0, b)] + m[(b, 0)]);
                }
                total += zz + w[0] * (m[(0, 0)] * w[0] + mixed);
                par_part += zz;
            }
            [total, par_part]
        });
        full.push(geom.integrate_fn(|i| dens[i][0]));
        parallel.push(geom.integrate_fn(|i| dens[i][1]));
    }
    Ok(OrderIntegrals { full, parallel })
}

/// `(E_s, E^p_s, Ė_s)` for a single order.
pub fn sobolev_energy(field: &ZField, geom: &Geometry, m0: &[Matrix4<f64>], s: usize) -> Result<SobolevEnergy> {
    Ok(order_integrals(field, geom, m0, s)?.energy(s))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn frame_contraction_matches_inverse_metric_pairing() {
        let g = Matrix3::new(2.0, 0.3, 0.1, 0.3, 1.5, -0.2, 0.1, -0.2, 1.2);
        let gi = g.try_inverse().unwrap();
        let e = gi.cholesky().unwrap().l();
        let x: Vec<f64> = (0..9).map(|k| (k as f64 * 0.7).sin()).collect();
        let mut y = x.clone();
        to_frame(&mut y, 2, &e);
        let direct: f64 = (0..9)
            .flat_map(|ab| (0..9).map(move |cd| (ab, cd)))
            .map(|(ab, cd)| gi[(ab / 3, cd / 3)] * gi[(ab % 3, cd % 3)] * x[ab] * x[cd])
            .sum();
        let framed: f64 = y.iter().map(|v| v * v).sum();
        assert!((direct - framed).abs() < 1e-13 * direct.abs());
    }
}
