//! Autofocus for event cameras.
//!
//! A focal sweep records events while the lens travels linearly from one end of
//! its range to the other. [`measure`] scores any time window by its event rate,
//! [`search`] locates the best-focused time with a fixed-window scan or the
//! event-based golden search, [`sim`] produces synthetic sweeps with known
//! ground truth and [`eval`] benchmarks methods against that truth.

// `!(x > 0.0)` deliberately rejects NaN along with non-positive values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod eval;
pub mod event;
pub mod grid;
pub mod index;
pub mod io;
pub mod measure;
pub mod search;
pub mod sim;

pub use error::{EvafError, Result};
pub use event::{Event, EventStream, Pixel, Polarity, SweepConfig};
pub use grid::Grid;
pub use index::PrefixIndex;

/// Version of the toolkit.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
