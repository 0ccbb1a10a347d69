//! Searching the sweep for the best-focused time.
//!
//! [`naive_search`] scans a focus curve of fixed window length. [`egs`] is the
//! event-based golden search: two overlapping windows, each covering a golden
//! fraction of the active interval, are scored and the interval shrinks to the
//! better one. The window length therefore follows the interval length and no
//! accumulation interval has to be chosen by hand.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{EvafError, Result};
use crate::index::PrefixIndex;
use crate::measure::{er_focus_score, focus_curve, FocusCurve, Variant};

/// Conjugate golden ratio `(sqrt(5) - 1) / 2`.
pub const GOLDEN_PHI: f64 = 0.618_033_988_749_894_8;

/// Stopping threshold used across all sequences.
pub const DEFAULT_MU: f64 = 0.001;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EgsConfig {
    /// Stop once the active interval is at most `mu` times the initial one.
    pub mu: f64,
    pub phi: f64,
}

impl Default for EgsConfig {
    fn default() -> Self {
        EgsConfig {
            mu: DEFAULT_MU,
            phi: GOLDEN_PHI,
        }
    }
}

impl EgsConfig {
    pub fn new(mu: f64, phi: f64) -> Result<Self> {
        let cfg = EgsConfig { mu, phi };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.mu > 0.0 && self.mu < 1.0) {
            return Err(EvafError::invalid(format!("mu must lie in (0, 1), got {}", self.mu)));
        }
        if !(self.phi > 0.5 && self.phi < 1.0) {
            return Err(EvafError::invalid(format!(
                "phi must lie in (0.5, 1), got {}",
                self.phi
            )));
        }
        Ok(())
    }

    /// Iterations needed to shrink the interval to `mu` of its initial length.
    pub fn expected_iterations(&self) -> usize {
        let mut len = 1.0;
        let mut n = 0;
        while len > self.mu {
            len *= self.phi;
            n += 1;
        }
        n
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SearchMethod {
    Egs,
    Naive,
}

impl SearchMethod {
    pub fn as_str(self) -> &'static str {
        match self {
            SearchMethod::Egs => "egs",
            SearchMethod::Naive => "naive",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Side {
    Left,
    Right,
}

/// One golden-search iteration. All times are microseconds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TraceStep {
    pub interval: (f64, f64),
    pub t1: f64,
    pub t2: f64,
    pub dt: f64,
    pub score1: f64,
    pub score2: f64,
    pub kept: Side,
    pub next: (f64, f64),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SearchResult {
    pub method: SearchMethod,
    /// Best-focused time, microseconds.
    pub t_star: f64,
    pub p_star: f64,
    pub iterations: usize,
    pub trace: Vec<TraceStep>,
}

/// Argmax over a fixed-window focus curve; ties go to the earliest sample.
pub fn naive_search(index: &PrefixIndex, dt_us: f64, stride_us: f64, variant: Variant) -> Result<SearchResult> {
    let curve = focus_curve(index, dt_us, stride_us, variant)?;
    naive_from_curve(index, &curve)
}

pub fn naive_from_curve(index: &PrefixIndex, curve: &FocusCurve) -> Result<SearchResult> {
    let best = curve
        .argmax()
        .ok_or_else(|| EvafError::invalid("focus curve has no samples"))?;
    let t_star = curve.samples[best].t_us;
    Ok(SearchResult {
        method: SearchMethod::Naive,
        t_star,
        p_star: index.sweep().position_at(t_star)?,
        iterations: curve.len(),
        trace: Vec::new(),
    })
}

/// Event-based golden search over the whole sweep.
pub fn egs(index: &PrefixIndex, cfg: &EgsConfig, variant: Variant) -> Result<SearchResult> {
    cfg.validate()?;
    if index.is_empty() {
        return Err(EvafError::EmptyStream);
    }
    let sweep = *index.sweep();
    let (mut lo, mut hi) = (sweep.t_start as f64, sweep.t_end as f64);
    let stop = cfg.mu * (hi - lo);
    let mut trace = Vec::new();
    let mut len = hi - lo;
    while len > stop {
        let dt = cfg.phi * len;
        let t1 = lo + dt / 2.0;
        let t2 = hi - dt / 2.0;
        let score = |t: f64| er_focus_score(index, t, dt, variant).map(|s| s.value);
        #[cfg(feature = "parallel")]
        let (s1, s2) = rayon::join(|| score(t1), || score(t2));
        #[cfg(not(feature = "parallel"))]
        let (s1, s2) = (score(t1), score(t2));
        let (s1, s2) = (s1?, s2?);
        let interval = (lo, hi);
        let kept = if s1 >= s2 {
            hi = lo + dt;
            Side::Left
        } else {
            lo = hi - dt;
            Side::Right
        };
        trace.push(TraceStep {
            interval,
            t1,
            t2,
            dt,
            score1: s1,
            score2: s2,
            kept,
            next: (lo, hi),
        });
        len = hi - lo;
    }
    let t_star = (lo + hi) / 2.0;
    Ok(SearchResult {
        method: SearchMethod::Egs,
        t_star,
        p_star: sweep.position_at(t_star)?,
        iterations: trace.len(),
        trace,
    })
}

/// CSV with one row per golden-search iteration. The best estimate after each
/// row is the midpoint of the interval it keeps; `error_bound` is half that
/// interval's extent in position units.
pub fn egs_trace_report(index: &PrefixIndex, result: &SearchResult, truth_position: Option<f64>) -> Result<String> {
    let sweep = index.sweep();
    let scale = sweep.position_range() / sweep.duration_us() as f64;
    let mut out = String::from(
        "iteration,interval_start_us,interval_end_us,t1_us,t2_us,dt_us,score1,score2,kept,best_t_us,best_p,error_bound,abs_error\n",
    );
    for (i, step) in result.trace.iter().enumerate() {
        let best_t = (step.next.0 + step.next.1) / 2.0;
        let best_p = sweep.position_at(best_t)?;
        let bound = (step.next.1 - step.next.0) / 2.0 * scale;
        let error = truth_position
            .map(|p| format!("{}", (best_p - p).abs()))
            .unwrap_or_default();
        let kept = match step.kept {
            Side::Left => "left",
            Side::Right => "right",
        };
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{},{},{},{}",
            i + 1,
            step.interval.0,
            step.interval.1,
            step.t1,
            step.t2,
            step.dt,
            step.score1,
            step.score2,
            kept,
            best_t,
            best_p,
            bound,
            error
        );
    }
    Ok(out)
}
