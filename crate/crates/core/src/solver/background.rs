use crate::error::Result;
use crate::fluid::{BackgroundPoint, ChristoffelBlocks, EosParams, Orientation, PointContext, TransformParams};
use crate::fuchsian::FuchsianConstants;
use crate::geometry::Geometry;

/// Fixed linearly expanding background `α = 1/t`, `β = 0`, static `g`, evolved in `T = −ln(t/t₀)`.
pub struct Background {
    pub geom: Geometry,
    pub eos: EosParams,
    pub params: TransformParams,
    pub orientation: Orientation,
    pub t0: f64,
    consts: FuchsianConstants,
    blocks: ChristoffelBlocks,
}

impl Background {
    pub fn new(
        geom: Geometry,
        eos: EosParams,
        params: TransformParams,
        orientation: Orientation,
        t0: f64,
    ) -> Result<Self> {
        let bg = BackgroundPoint::mflrw(t0, nalgebra::Matrix3::identity(), nalgebra::Matrix3::identity());
        let blocks = ChristoffelBlocks::new(&bg);
        let ctx = PointContext { bg: &bg, blocks: &blocks, eos: &eos, params: &params, orientation };
        // Cᵏ and σ do not depend on the metric or on t; evaluate them once.
        let consts = FuchsianConstants::new(&ctx)?;
        // With a static metric, zero shift and a spatially constant lapse every
        // Christoffel block vanishes, at every point and time.
        Ok(Self { geom, eos, params, orientation, t0, consts, blocks })
    }

    pub fn constants(&self) -> &FuchsianConstants {
        &self.consts
    }

    pub fn time(&self, t_log: f64) -> f64 {
        self.t0 * (-t_log).exp()
    }

    pub fn blocks(&self) -> &ChristoffelBlocks {
        &self.blocks
    }

    pub fn point(&self, i: usize, t: f64) -> BackgroundPoint {
        BackgroundPoint::mflrw(t, *self.geom.g(i), *self.geom.g_inv(i))
    }

    /// Runs `f` with the point context at grid point `i` and time `t`.
    pub fn with_context<R>(&self, i: usize, t: f64, f: impl FnOnce(&PointContext) -> R) -> R {
        let bg = self.point(i, t);
        let ctx = PointContext {
            bg: &bg,
            blocks: &self.blocks,
            eos: &self.eos,
            params: &self.params,
            orientation: self.orientation,
        };
        f(&ctx)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::Matrix3;

    #[test]
    fn christoffel_blocks_vanish_on_the_background_family() {
        let g = Matrix3::new(1.3, 0.2, -0.1, 0.2, 0.8, 0.05, -0.1, 0.05, 1.1);
        for t in [1e-3, 0.37, 1.0, 12.0] {
            let b = ChristoffelBlocks::new(&BackgroundPoint::mflrw(t, g, g.try_inverse().unwrap()));
            assert_eq!(b.k_low, Matrix3::zeros());
            assert_eq!(b.k_mixed, Matrix3::zeros());
            assert_eq!(b.xi, Matrix3::zeros());
            assert_eq!(b.upsilon, nalgebra::Vector3::zeros());
        }
    }
}
