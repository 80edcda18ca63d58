//! Output-only modal analysis of bridge scale models: record handling,
//! FFT peak picking, covariance-driven subspace identification,
//! logarithmic-decrement damping, similitude scaling and a modal
//! simulator that produces synthetic test records.

// `!(x > 0.0)` also rejects NaN
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod decay;
pub mod error;
pub mod filter;
pub mod records;
pub mod similitude;
pub mod simulator;
pub mod spectral;
pub mod ssi;
pub mod stats;

pub use error::{Error, Result};
pub use records::{ChannelKind, ChannelSpec, MeasurementSet, TimeSeriesRecord, Unit};
