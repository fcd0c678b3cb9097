use super::state::ZField;
use crate::error::Result;
use crate::par;

/// Classical four-stage Runge-Kutta step of `∂_TZ = rhs(Z, T)`.
pub fn rk4_step<F>(z: &ZField, t: f64, dt: f64, mut rhs: F) -> Result<ZField>
where
    F: FnMut(&ZField, f64) -> Result<Vec<f64>>,
{
    let k1 = rhs(z, t)?;
    let k2 = rhs(&z.axpy(0.5 * dt, &k1), t + 0.5 * dt)?;
    let k3 = rhs(&z.axpy(0.5 * dt, &k2), t + 0.5 * dt)?;
    let k4 = rhs(&z.axpy(dt, &k3), t + dt)?;
    let mut out = z.clone();
    let w = dt / 6.0;
    par::for_each_chunk_mut(out.data_mut(), 4, |i, o| {
        for c in 0..4 {
            let j = 4 * i + c;
            o[c] += w * (k1[j] + 2.0 * k2[j] + 2.0 * k3[j] + k4[j]);
        }
    });
    Ok(out)
}
