//! Method-of-lines evolution of the Fuchsian system in logarithmic time.

pub mod background;
pub mod cfl;
pub mod checkpoint;
pub mod evolve;
pub mod rhs;
pub mod rk4;
pub mod state;

pub use background::Background;
pub use cfl::{cfl_dt, max_characteristic_speed};
pub use checkpoint::{load_checkpoint, save_checkpoint, CheckpointHeader};
pub use evolve::{evolve, IntegratorConfig, Snapshot, StepControl, Termination, Trajectory};
pub use rhs::{logtime_rhs, spatial_gradients};
pub use rk4::rk4_step;
pub use state::{Ceiling, Violation, ZField};
