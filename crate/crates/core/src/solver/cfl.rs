use nalgebra::{Cholesky, Matrix4};

use super::background::Background;
use super::state::ZField;
use crate::error::{Error, Result};
use crate::fuchsian::assemble_fuchsian;
use crate::par;

/// Sample cap for the characteristic-speed scan.
const MAX_SAMPLES: usize = 4096;

/// Largest `|λ|` of `(σCᵏ + Mᵏ)v = λM⁰v` over sampled points and the coordinate axes.
pub fn max_characteristic_speed(field: &ZField, bg: &Background, t_log: f64) -> Result<f64> {
    let n = field.len();
    let stride = n.div_ceil(MAX_SAMPLES).max(1);
    let t = bg.time(t_log);
    let consts = bg.constants();
    let speeds = par::try_map_indexed(n.div_ceil(stride), |s| -> Result<f64> {
        let i = s * stride;
        bg.with_context(i, t, |ctx| {
            let fm = assemble_fuchsian(field.psi(i), &field.z(i), ctx, consts)?;
            let l = Cholesky::new(fm.m0)
                .ok_or_else(|| Error::HyperbolicityLoss { point: Some(i), detail: "M0 not positive definite".into() })?
                .l();
            let li = l.try_inverse().unwrap_or_else(Matrix4::identity);
            let mut best = 0.0f64;
            for k in 0..3 {
                if !field.grid().is_active(k) {
                    continue;
                }
                let a = li * (consts.sigma_c(k) + fm.mk[k]) * li.transpose();
                best = best.max(((a + a.transpose()) * 0.5).symmetric_eigenvalues().amax());
            }
            Ok(best)
        })
    })?;
    Ok(speeds.into_iter().fold(0.0, f64::max))
}

/// `dt = cfl · h_min / λ_max`.
pub fn cfl_dt(field: &ZField, bg: &Background, t_log: f64, cfl: f64) -> Result<f64> {
    let speed = max_characteristic_speed(field, bg, t_log)?;
    if speed == 0.0 {
        return Err(Error::Domain("no active axis: characteristic speed is zero".into()));
    }
    Ok(cfl * field.grid().min_spacing() / speed)
}
