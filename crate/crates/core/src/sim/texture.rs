//! Scene textures in linear intensity.

use std::path::PathBuf;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{EvafError, Result};
use crate::grid::Grid;
use crate::io::read_pgm;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BuiltinTexture {
    Checkerboard,
    Stripes,
    Natural,
}

fn default_mean() -> f64 {
    1.0
}

fn default_contrast() -> f64 {
    0.6
}

fn default_period() -> usize {
    16
}

/// Texture source as written in scene JSON: a builtin name or a PGM path.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum TextureSpec {
    Builtin {
        builtin: BuiltinTexture,
        #[serde(default = "default_period")]
        period: usize,
        #[serde(default = "default_contrast")]
        contrast: f64,
        #[serde(default = "default_mean")]
        mean: f64,
    },
    /// Exponential ramp; log intensity rises by `gradient` per column.
    LogRamp { log_ramp: f64 },
    Pgm {
        pgm: PathBuf,
        /// Intensity added to every pixel so that black stays positive.
        #[serde(default = "default_floor")]
        floor: f64,
    },
}

fn default_floor() -> f64 {
    0.05
}

impl TextureSpec {
    pub fn builtin(builtin: BuiltinTexture, period: usize, contrast: f64) -> Self {
        TextureSpec::Builtin {
            builtin,
            period,
            contrast,
            mean: default_mean(),
        }
    }

    /// Renders the texture at sensor resolution. `seed` only affects `natural`.
    pub fn render(&self, width: usize, height: usize, seed: u64) -> Result<Grid> {
        let grid = match self {
            TextureSpec::Builtin {
                builtin,
                period,
                contrast,
                mean,
            } => {
                if *period == 0 {
                    return Err(EvafError::invalid("texture period must be positive"));
                }
                if !(*contrast >= 0.0 && *contrast < 1.0) || !(*mean > 0.0) {
                    return Err(EvafError::invalid(format!(
                        "texture contrast must lie in [0, 1) and mean be positive (contrast {contrast}, mean {mean})"
                    )));
                }
                let pattern = match builtin {
                    BuiltinTexture::Checkerboard => checkerboard(width, height, *period),
                    BuiltinTexture::Stripes => stripes(width, height, *period),
                    BuiltinTexture::Natural => natural(width, height, *period, seed),
                };
                pattern.map(|v| mean * (1.0 + contrast * v))
            }
            TextureSpec::LogRamp { log_ramp } => log_ramp_texture(width, height, *log_ramp),
            TextureSpec::Pgm { pgm, floor } => {
                let img = read_pgm(pgm)?;
                if img.width != width || img.height != height {
                    return Err(EvafError::invalid(format!(
                        "texture {} is {}x{}, sensor is {width}x{height}",
                        pgm.display(),
                        img.width,
                        img.height
                    )));
                }
                Grid::new(width, height, img.data.iter().map(|v| v + floor).collect())
            }
        };
        if grid.data().iter().any(|&v| !(v > 0.0) || !v.is_finite()) {
            return Err(EvafError::invalid("texture intensity must be strictly positive"));
        }
        Ok(grid)
    }
}

/// Pattern values in {-1, 1}.
pub fn checkerboard(width: usize, height: usize, period: usize) -> Grid {
    Grid::from_fn(width, height, |x, y| {
        if (x / period + y / period).is_multiple_of(2) {
            1.0
        } else {
            -1.0
        }
    })
}

pub fn stripes(width: usize, height: usize, period: usize) -> Grid {
    Grid::from_fn(
        width,
        height,
        |x, _| if (x / period).is_multiple_of(2) { 1.0 } else { -1.0 },
    )
}

/// Multi-octave value noise normalized to `[-1, 1]`; `scale` is the coarsest
/// feature size in pixels.
pub fn natural(width: usize, height: usize, scale: usize, seed: u64) -> Grid {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x7e57_u64);
    let mut acc = vec![0.0; width * height];
    let mut cell = scale.max(2) as f64;
    let mut amplitude = 1.0;
    while cell >= 2.0 {
        let gw = (width as f64 / cell).ceil() as usize + 2;
        let gh = (height as f64 / cell).ceil() as usize + 2;
        let lattice: Vec<f64> = (0..gw * gh).map(|_| rng.random_range(-1.0..1.0)).collect();
        for y in 0..height {
            let fy = y as f64 / cell;
            let (y0, ty) = (fy.floor() as usize, smooth(fy.fract()));
            for x in 0..width {
                let fx = x as f64 / cell;
                let (x0, tx) = (fx.floor() as usize, smooth(fx.fract()));
                let at = |i: usize, j: usize| lattice[j * gw + i];
                let top = at(x0, y0) * (1.0 - tx) + at(x0 + 1, y0) * tx;
                let bottom = at(x0, y0 + 1) * (1.0 - tx) + at(x0 + 1, y0 + 1) * tx;
                acc[y * width + x] += amplitude * (top * (1.0 - ty) + bottom * ty);
            }
        }
        cell /= 2.0;
        amplitude *= 0.8;
    }
    let (lo, hi) = acc.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| {
        (lo.min(v), hi.max(v))
    });
    let span = (hi - lo).max(f64::MIN_POSITIVE);
    Grid::new(
        width,
        height,
        acc.into_iter().map(|v| 2.0 * (v - lo) / span - 1.0).collect(),
    )
}

fn smooth(t: f64) -> f64 {
    t * t * (3.0 - 2.0 * t)
}

/// Intensity `exp(gradient * x)`: log intensity with constant horizontal slope.
pub fn log_ramp_texture(width: usize, height: usize, gradient: f64) -> Grid {
    Grid::from_fn(width, height, |x, _| (gradient * x as f64).exp())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn builtins_are_positive_and_bounded() {
        for b in [
            BuiltinTexture::Checkerboard,
            BuiltinTexture::Stripes,
            BuiltinTexture::Natural,
        ] {
            let g = TextureSpec::builtin(b, 8, 0.5).render(32, 24, 3).unwrap();
            assert!(
                g.data().iter().all(|&v| (0.5 - 1e-12..=1.5 + 1e-12).contains(&v)),
                "{b:?}"
            );
        }
    }

    #[test]
    fn natural_is_seeded() {
        assert_eq!(natural(16, 16, 8, 1), natural(16, 16, 8, 1));
        assert_ne!(natural(16, 16, 8, 1), natural(16, 16, 8, 2));
    }

    #[test]
    fn json_forms() {
        let t: TextureSpec = serde_json::from_str(r#"{"builtin":"checkerboard"}"#).unwrap();
        assert_eq!(t, TextureSpec::builtin(BuiltinTexture::Checkerboard, 16, 0.6));
        let t: TextureSpec = serde_json::from_str(r#"{"pgm":"scene.pgm"}"#).unwrap();
        assert!(matches!(t, TextureSpec::Pgm { .. }));
        let t: TextureSpec = serde_json::from_str(r#"{"log_ramp":0.1}"#).unwrap();
        assert_eq!(t, TextureSpec::LogRamp { log_ramp: 0.1 });
    }

    #[test]
    fn rejects_non_positive_intensity() {
        let t = TextureSpec::Builtin {
            builtin: BuiltinTexture::Stripes,
            period: 4,
            contrast: 1.0,
            mean: 1.0,
        };
        assert!(t.render(8, 8, 0).is_err());
    }
}
