//! Focus measures: the event-rate score computed from a [`PrefixIndex`](crate::index::PrefixIndex)
//! and frame-based baselines evaluated on direct-integration reconstructions.

mod er;
mod frame;
mod recon;

pub use er::{curve_centers, er_focus_score, er_rate, focus_curve, window_bounds, FocusCurve, FocusScore, Variant};
pub use frame::{frame_focus, FrameMeasure};
pub use recon::{reconstruct_frame, Integrator, ReconFrame};

/// Contrast threshold used when none is configured (log-intensity units).
pub const DEFAULT_CONTRAST: f64 = 0.2;
