//! Perfect-fluid kinematics and the exact symmetric-hyperbolic assemblies.

pub mod conformal;
pub mod eos;
pub mod transform;
pub mod transformed;
pub mod velocity;

pub use conformal::{assemble_conformal_matrices, BackgroundPoint, ChristoffelBlocks, ConformalMatrices};
pub use eos::{EosParams, Regime};
pub use transform::{
    transform_forward, transform_inverse, transform_jacobian, Jacobian, TransformCoeffs, TransformParams,
};
pub use transformed::{
    assemble_transformed_matrices, transformed_closed, transformed_closed_flux, PointContext, TransformedMatrices,
};
pub use velocity::{four_velocity_decompose, FluidAux, Orientation};
