//! Frame-based focus measures used as baselines on reconstructed frames.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{EvafError, Result};
use crate::grid::Grid;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FrameMeasure {
    /// Sum of squared central-difference gradient magnitudes.
    Grad,
    /// Sum-modified-Laplacian.
    Sml,
    /// Grey-level variance of 3x3 neighborhoods, summed over pixels.
    Variance,
    /// AC to DC energy ratio of 8x8 block DCTs.
    Dct,
}

impl FrameMeasure {
    pub const ALL: [FrameMeasure; 4] = [
        FrameMeasure::Grad,
        FrameMeasure::Sml,
        FrameMeasure::Variance,
        FrameMeasure::Dct,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            FrameMeasure::Grad => "grad",
            FrameMeasure::Sml => "sml",
            FrameMeasure::Variance => "variance",
            FrameMeasure::Dct => "dct",
        }
    }

    fn kernel(self) -> usize {
        match self {
            FrameMeasure::Dct => 8,
            _ => 3,
        }
    }
}

impl fmt::Display for FrameMeasure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for FrameMeasure {
    type Err = EvafError;

    fn from_str(s: &str) -> Result<Self> {
        FrameMeasure::ALL
            .into_iter()
            .find(|m| m.as_str() == s)
            .ok_or_else(|| EvafError::invalid(format!("unknown frame measure `{s}`")))
    }
}

// Keeps the ratio finite on zero-mean frames.
const DC_FLOOR: f64 = 1e-12;

pub fn frame_focus(frame: &Grid, measure: FrameMeasure) -> Result<f64> {
    let (w, h) = (frame.width(), frame.height());
    let k = measure.kernel();
    if w < k || h < k {
        return Err(EvafError::FrameTooSmall {
            width: w,
            height: h,
            kernel: k,
            measure: measure.as_str(),
        });
    }
    if !frame.is_finite() {
        return Err(EvafError::invalid("frame contains non-finite values"));
    }
    Ok(match measure {
        FrameMeasure::Grad => grad(frame),
        FrameMeasure::Sml => sml(frame),
        FrameMeasure::Variance => local_variance(frame),
        FrameMeasure::Dct => dct_ratio(frame),
    })
}

fn grad(f: &Grid) -> f64 {
    let mut sum = 0.0;
    for y in 0..f.height() as isize {
        for x in 0..f.width() as isize {
            let gx = (f.get_clamped(x + 1, y) - f.get_clamped(x - 1, y)) * 0.5;
            let gy = (f.get_clamped(x, y + 1) - f.get_clamped(x, y - 1)) * 0.5;
            sum += gx * gx + gy * gy;
        }
    }
    sum
}

fn sml(f: &Grid) -> f64 {
    let mut sum = 0.0;
    for y in 0..f.height() as isize {
        for x in 0..f.width() as isize {
            let c = 2.0 * f.get_clamped(x, y);
            let mx = (c - f.get_clamped(x - 1, y) - f.get_clamped(x + 1, y)).abs();
            let my = (c - f.get_clamped(x, y - 1) - f.get_clamped(x, y + 1)).abs();
            sum += mx + my;
        }
    }
    sum
}

fn local_variance(f: &Grid) -> f64 {
    let mut sum = 0.0;
    for y in 0..f.height() as isize {
        for x in 0..f.width() as isize {
            let (mut s, mut s2) = (0.0, 0.0);
            for dy in -1..=1 {
                for dx in -1..=1 {
                    let v = f.get_clamped(x + dx, y + dy);
                    s += v;
                    s2 += v * v;
                }
            }
            let mean = s / 9.0;
            sum += (s2 / 9.0 - mean * mean).max(0.0);
        }
    }
    sum
}

fn dct_basis() -> [[f64; 8]; 8] {
    let mut basis = [[0.0; 8]; 8];
    for (u, row) in basis.iter_mut().enumerate() {
        let scale = if u == 0 {
            (1.0f64 / 8.0).sqrt()
        } else {
            (2.0f64 / 8.0).sqrt()
        };
        for (n, b) in row.iter_mut().enumerate() {
            *b = scale * (std::f64::consts::PI * (2 * n + 1) as f64 * u as f64 / 16.0).cos();
        }
    }
    basis
}

/// Orthonormal 8x8 DCT-II per complete block; partial blocks at the right and
/// bottom edges are ignored.
#[allow(clippy::needless_range_loop)]
fn dct_ratio(f: &Grid) -> f64 {
    let basis = dct_basis();
    let (mut ac, mut dc) = (0.0, 0.0);
    let mut block = [[0.0f64; 8]; 8];
    let mut tmp = [[0.0f64; 8]; 8];
    for by in (0..f.height() / 8).map(|b| b * 8) {
        for bx in (0..f.width() / 8).map(|b| b * 8) {
            for (y, row) in block.iter_mut().enumerate() {
                for (x, v) in row.iter_mut().enumerate() {
                    *v = f.get(bx + x, by + y);
                }
            }
            // rows then columns
            for y in 0..8 {
                for u in 0..8 {
                    tmp[y][u] = (0..8).map(|x| basis[u][x] * block[y][x]).sum();
                }
            }
            for v in 0..8 {
                for u in 0..8 {
                    let c: f64 = (0..8).map(|y| basis[v][y] * tmp[y][u]).sum();
                    if u == 0 && v == 0 {
                        dc += c * c;
                    } else {
                        ac += c * c;
                    }
                }
            }
        }
    }
    ac / (dc + DC_FLOOR)
}
