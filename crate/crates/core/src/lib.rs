#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::excessive_precision)]

pub mod cli;
pub mod couplings;
pub mod dynamics;
pub mod error;
pub mod num;
pub mod ode;
pub mod optimize;
pub mod oracle;
pub mod pulses;
pub mod quad;
pub mod sweep;
pub mod tomography;

pub use error::{Error, Result};
pub use num::Real;

pub type RateSetF64 = couplings::RateSet<f64>;
pub type GeometryF64 = couplings::Geometry<f64>;
pub type PulseSpecF64 = pulses::PulseSpec<f64>;
pub type SystemParamsF64 = dynamics::SystemParams<f64>;
pub type DynamicStateF64 = dynamics::DynamicState<f64>;
pub type TrajectoryF64 = dynamics::Trajectory<f64>;
pub type DensityMatrixF64 = tomography::DensityMatrix<f64>;
pub type EntanglementSeriesF64 = tomography::EntanglementSeries<f64>;
