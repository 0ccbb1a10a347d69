//! Event-rate (ER) focus measure.
//!
//! The per-pixel event rate over a window of length `dt` centered at `t` is
//! `count / dt`. The focus score sums the squared rates over all pixels; the
//! `TotalCount` variant divides the global window count by `dt` instead, which
//! needs only the global prefix sums.

use std::fmt;
use std::io::Write;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{EvafError, Result};
use crate::event::{Pixel, SweepConfig};
use crate::index::PrefixIndex;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Variant {
    #[default]
    SumSquared,
    TotalCount,
}

impl Variant {
    pub fn as_str(self) -> &'static str {
        match self {
            Variant::SumSquared => "sum_squared",
            Variant::TotalCount => "total_count",
        }
    }
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Variant {
    type Err = EvafError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "sum_squared" => Ok(Variant::SumSquared),
            "total_count" => Ok(Variant::TotalCount),
            other => Err(EvafError::invalid(format!(
                "unknown variant `{other}` (expected sum_squared or total_count)"
            ))),
        }
    }
}

/// Score of one evaluation window. `t_us` is the window center and `dt_us` its
/// length, both in microseconds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FocusScore {
    pub value: f64,
    pub t_us: f64,
    pub dt_us: f64,
}

/// Integer window covered by `[center - dt/2, center + dt/2]` after clamping to
/// the sweep. `None` when no integer timestamp falls inside.
pub fn window_bounds(sweep: &SweepConfig, center_us: f64, dt_us: f64) -> Option<(u64, u64)> {
    let lo = (center_us - dt_us / 2.0).max(sweep.t_start as f64);
    let hi = (center_us + dt_us / 2.0).min(sweep.t_end as f64);
    // Tolerate rounding noise from fractional centers.
    let a = (lo - 1e-6).ceil().max(0.0) as u64;
    let b = (hi + 1e-6).floor().max(0.0) as u64;
    let a = a.max(sweep.t_start);
    let b = b.min(sweep.t_end);
    (a <= b && lo <= hi).then_some((a, b))
}

fn check_dt(dt_us: f64) -> Result<()> {
    if !(dt_us > 0.0) || !dt_us.is_finite() {
        return Err(EvafError::invalid(format!(
            "accumulation interval must be positive, got {dt_us} µs"
        )));
    }
    Ok(())
}

/// Event rate (events/s) of one pixel in the window of length `dt_us` centered at `t_us`.
pub fn er_rate(index: &PrefixIndex, pixel: Pixel, t_us: f64, dt_us: f64) -> Result<f64> {
    check_dt(dt_us)?;
    let Some((a, b)) = window_bounds(index.sweep(), t_us, dt_us) else {
        return Ok(0.0);
    };
    Ok(index.pixel_count(pixel, a, b)? as f64 / (dt_us * 1e-6))
}

pub fn er_focus_score(index: &PrefixIndex, t_us: f64, dt_us: f64, variant: Variant) -> Result<FocusScore> {
    check_dt(dt_us)?;
    let dt_s = dt_us * 1e-6;
    let value = match window_bounds(index.sweep(), t_us, dt_us) {
        None => 0.0,
        Some((a, b)) => match variant {
            Variant::TotalCount => index.count_window(a, b)? as f64 / dt_s,
            Variant::SumSquared => {
                // Integer accumulation keeps the sum independent of pixel order.
                let mut sum_sq: u128 = 0;
                index.for_each_pixel_count(a, b, |_, n| sum_sq += (n as u128) * (n as u128));
                sum_sq as f64 / (dt_s * dt_s)
            }
        },
    };
    Ok(FocusScore { value, t_us, dt_us })
}

/// Focus scores ordered by strictly increasing time.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct FocusCurve {
    pub samples: Vec<FocusScore>,
    pub variant: Variant,
}

impl FocusCurve {
    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    /// Index of the highest score, earliest on ties.
    pub fn argmax(&self) -> Option<usize> {
        let mut best: Option<(usize, f64)> = None;
        for (i, s) in self.samples.iter().enumerate() {
            if best.is_none_or(|(_, v)| s.value > v) {
                best = Some((i, s.value));
            }
        }
        best.map(|(i, _)| i)
    }

    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "t_us,dt_us,score,variant")?;
        for s in &self.samples {
            writeln!(out, "{},{},{},{}", s.t_us, s.dt_us, s.value, self.variant)?;
        }
        out.flush()
    }
}

/// Sample centers `t_start + dt/2 + k * stride` not exceeding `t_end - dt/2`.
pub fn curve_centers(sweep: &SweepConfig, dt_us: f64, stride_us: f64) -> Result<Vec<f64>> {
    check_dt(dt_us)?;
    if !(stride_us > 0.0) || !stride_us.is_finite() {
        return Err(EvafError::invalid(format!(
            "stride must be positive, got {stride_us} µs"
        )));
    }
    let span = sweep.duration_us() as f64 - dt_us;
    if span < 0.0 {
        return Err(EvafError::invalid(format!(
            "sweep of {} µs is shorter than the accumulation interval {dt_us} µs",
            sweep.duration_us()
        )));
    }
    let n = (span / stride_us + 1e-9).floor() as usize + 1;
    let first = sweep.t_start as f64 + dt_us / 2.0;
    Ok((0..n).map(|k| first + k as f64 * stride_us).collect())
}

pub fn focus_curve(index: &PrefixIndex, dt_us: f64, stride_us: f64, variant: Variant) -> Result<FocusCurve> {
    let centers = curve_centers(index.sweep(), dt_us, stride_us)?;
    let score = |&t: &f64| er_focus_score(index, t, dt_us, variant);
    #[cfg(feature = "parallel")]
    let samples = {
        use rayon::prelude::*;
        centers.par_iter().map(score).collect::<Result<Vec<_>>>()?
    };
    #[cfg(not(feature = "parallel"))]
    let samples = centers.iter().map(score).collect::<Result<Vec<_>>>()?;
    Ok(FocusCurve { samples, variant })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::event::{Event, EventStream, Polarity};

    fn index(events: &[(u64, u16, u16)], t_end: u64) -> PrefixIndex {
        let events = events
            .iter()
            .map(|&(t, x, y)| Event::new(t, x, y, Polarity::On))
            .collect();
        let sweep = SweepConfig::new(0, t_end, 0.0, 1.0).unwrap();
        PrefixIndex::build(&EventStream::new(events, 8, 8, sweep).unwrap())
    }

    #[test]
    fn rate_of_single_event() {
        let idx = index(&[(500_000, 1, 1)], 1_000_000);
        let rate = er_rate(&idx, Pixel::new(1, 1), 500_000.0, 100_000.0).unwrap();
        assert_eq!(rate, 10.0);
        assert_eq!(er_rate(&idx, Pixel::new(0, 0), 500_000.0, 100_000.0).unwrap(), 0.0);
        assert!(er_rate(&idx, Pixel::new(1, 1), 500_000.0, 0.0).is_err());
    }

    #[test]
    fn sum_squared_and_total_count() {
        let idx = index(&[(490_000, 0, 0), (500_000, 0, 0), (510_000, 3, 3)], 1_000_000);
        let sq = er_focus_score(&idx, 500_000.0, 100_000.0, Variant::SumSquared).unwrap();
        assert!((sq.value - 500.0).abs() < 1e-9, "{}", sq.value);
        let tc = er_focus_score(&idx, 500_000.0, 100_000.0, Variant::TotalCount).unwrap();
        assert!((tc.value - 30.0).abs() < 1e-9);
    }

    #[test]
    fn empty_window_scores_zero() {
        let idx = index(&[(10, 0, 0)], 1_000_000);
        for v in [Variant::SumSquared, Variant::TotalCount] {
            assert_eq!(er_focus_score(&idx, 800_000.0, 1000.0, v).unwrap().value, 0.0);
        }
        assert!(er_focus_score(&idx, 800_000.0, -1.0, Variant::SumSquared).is_err());
    }

    #[test]
    fn curve_sample_count() {
        let idx = index(&[], 1_000_000);
        let curve = focus_curve(&idx, 100_000.0, 100_000.0, Variant::SumSquared).unwrap();
        assert_eq!(curve.len(), 10);
        assert_eq!(curve.samples[0].t_us, 50_000.0);
        assert_eq!(curve.samples[9].t_us, 950_000.0);
        assert!(focus_curve(&idx, 2_000_000.0, 1.0, Variant::SumSquared).is_err());
        assert!(focus_curve(&idx, 1000.0, 0.0, Variant::SumSquared).is_err());
    }

    #[test]
    fn window_is_clamped_to_sweep() {
        let sweep = SweepConfig::new(100, 200, 0.0, 1.0).unwrap();
        assert_eq!(window_bounds(&sweep, 100.0, 50.0), Some((100, 125)));
        assert_eq!(window_bounds(&sweep, 150.0, 10.0), Some((145, 155)));
        assert_eq!(window_bounds(&sweep, 150.5, 0.5), None);
    }

    #[test]
    fn curve_csv_header() {
        let idx = index(&[(10, 0, 0)], 1000);
        let curve = focus_curve(&idx, 500.0, 500.0, Variant::TotalCount).unwrap();
        let mut out = Vec::new();
        curve.write_csv(&mut out).unwrap();
        let text = String::from_utf8(out).unwrap();
        assert_eq!(
            text,
            "t_us,dt_us,score,variant\n250,500,2000,total_count\n750,500,0,total_count\n"
        );
    }

    #[test]
    fn variant_parsing() {
        assert_eq!("sum_squared".parse::<Variant>().unwrap(), Variant::SumSquared);
        assert!("squares".parse::<Variant>().is_err());
    }
}
