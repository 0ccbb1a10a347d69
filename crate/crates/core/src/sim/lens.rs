use serde::{Deserialize, Serialize};

use crate::error::{EvafError, Result};

/// Image distance from the thin-lens equation `1/d_o + 1/d_i = 1/f`.
pub fn thin_lens_image_distance(f: f64, d_o: f64) -> Result<f64> {
    if !(f > 0.0) {
        return Err(EvafError::invalid(format!("focal length must be positive, got {f}")));
    }
    if !(d_o > f) {
        return Err(EvafError::invalid(format!(
            "object distance {d_o} does not exceed focal length {f}: no real image"
        )));
    }
    Ok(1.0 / (1.0 / f - 1.0 / d_o))
}

/// Lens geometry plus the gain from focal-position error to blur radius.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LensModel {
    pub f: f64,
    pub d_o: f64,
    /// Blur radius in pixels per focal-position unit of error.
    pub k_blur: f64,
}

impl Default for LensModel {
    fn default() -> Self {
        LensModel {
            f: 0.05,
            d_o: 1.0,
            k_blur: DEFAULT_K_BLUR,
        }
    }
}

/// Default blur gain. Over the 220..3750 motor range a mid-sweep focus reaches
/// about 35 px of blur at either end, and the in-focus plateau (radius under
/// half a pixel) spans 50 motor units.
pub const DEFAULT_K_BLUR: f64 = 0.02;

impl LensModel {
    pub fn validate(&self) -> Result<()> {
        thin_lens_image_distance(self.f, self.d_o)?;
        if !(self.k_blur >= 0.0) || !self.k_blur.is_finite() {
            return Err(EvafError::invalid(format!(
                "k_blur must be non-negative, got {}",
                self.k_blur
            )));
        }
        Ok(())
    }

    pub fn image_distance(&self) -> Result<f64> {
        thin_lens_image_distance(self.f, self.d_o)
    }

    /// Blur radius in pixels for a focal position error `error`.
    pub fn blur_radius(&self, error: f64) -> f64 {
        self.k_blur * error.abs()
    }
}
