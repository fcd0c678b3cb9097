use nalgebra::{Vector3, Vector4};

use super::background::Background;
use super::state::ZField;
use crate::error::{Error, Result};
use crate::fuchsian::rhs_logtime_fused;
use crate::geometry::deriv::{kreiss_oliger_flat, partial_flat};
use crate::geometry::Geometry;
use crate::par;

/// `∇_kZ = (∂_kψ, ∂_kzⁱ + Γⁱ_km zᵐ)` for `k = 1, 2, 3`, point-major with four components.
pub fn spatial_gradients(field: &ZField, geom: &Geometry) -> [Vec<f64>; 3] {
    let grid = field.grid();
    let mut grads: [Vec<f64>; 3] = std::array::from_fn(|k| partial_flat(grid, field.data(), 4, k, geom.scheme()));
    if !geom.is_flat() {
        let gam = geom.christoffel();
        for (k, gk) in grads.iter_mut().enumerate() {
            par::for_each_chunk_mut(gk, 4, |p, o| {
                let z = field.z(p);
                for i in 0..3 {
                    o[i + 1] += (0..3).map(|m| gam[p][i][(k, m)] * z[m]).sum::<f64>();
                }
            });
        }
    }
    grads
}

pub(crate) fn grad_at(grads: &[Vec<f64>; 3], i: usize) -> [Vector4<f64>; 3] {
    std::array::from_fn(|k| Vector4::from_column_slice(&grads[k][4 * i..4 * i + 4]))
}

/// Log-time right-hand side `∂_TZ` of the whole field, plus optional Kreiss-Oliger dissipation.
pub fn logtime_rhs(field: &ZField, t_log: f64, bg: &Background, dissipation: f64) -> Result<Vec<f64>> {
    let geom = &bg.geom;
    let grads = spatial_gradients(field, geom);
    let t = bg.time(t_log);
    let point_rhs = |i: usize| -> Result<Vector4<f64>> {
        let z: Vector3<f64> = field.z(i);
        bg.with_context(i, t, |ctx| rhs_logtime_fused(field.psi(i), &z, ctx, &grad_at(&grads, i)))
            .map_err(|e| Error::HyperbolicityLoss { point: Some(i), detail: e.to_string() })
    };
    let mut out = vec![0.0; field.data().len()];
    let results = par::try_map_indexed(field.len(), point_rhs)?;
    par::for_each_chunk_mut(&mut out, 4, |i, o| o.copy_from_slice(results[i].as_slice()));
    if dissipation > 0.0 {
        for axis in 0..3 {
            let ko = kreiss_oliger_flat(field.grid(), field.data(), 4, axis);
            par::for_each_chunk_mut(&mut out, 4, |i, o| {
                for c in 0..4 {
                    o[c] += dissipation * ko[4 * i + c];
                }
            });
        }
    }
    Ok(out)
}
