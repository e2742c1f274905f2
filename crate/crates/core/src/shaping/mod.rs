//! End-to-end constellation shaping under a kurtosis constraint.

mod adam;
mod config;
mod gradient;
mod gumbel;
mod loss;
mod train;

pub use adam::Adam;
pub use config::{Relaxation, TemperatureSchedule, TrainConfig};
pub use gradient::{loss_gradient, Draws, Gradients, LossBreakdown, ShapingProblem, CHUNK};
pub use gumbel::{gumbel_noise, gumbel_sample, relax, GumbelBatch};
pub use loss::{sensing_loss, total_loss};
pub use train::{train, Checkpoint, TraceRow, TrainAbort, TrainTrace, Trainer};
