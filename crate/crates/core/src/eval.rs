//! Benchmark harness: run autofocus methods over a simulated dataset and score
//! them by MAE and RMSE of the estimated focal position.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{EvafError, Result};
use crate::event::EventStream;
use crate::index::PrefixIndex;
use crate::io::read_event_file;
use crate::measure::{frame_focus, FrameMeasure, Integrator, Variant, DEFAULT_CONTRAST};
use crate::search::{egs, naive_search, EgsConfig, DEFAULT_MU, GOLDEN_PHI};
use crate::sim::Manifest;

/// Window length given in seconds or as a fraction of the sweep duration.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Window {
    Seconds(f64),
    Fraction(f64),
}

impl Window {
    pub fn to_us(self, sweep_us: u64) -> f64 {
        match self {
            Window::Seconds(s) => s * 1e6,
            Window::Fraction(f) => f * sweep_us as f64,
        }
    }
}

fn default_mu() -> f64 {
    DEFAULT_MU
}

fn default_phi() -> f64 {
    GOLDEN_PHI
}

fn default_fps() -> f64 {
    100.0
}

fn default_contrast() -> f64 {
    DEFAULT_CONTRAST
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum MethodKind {
    ErEgs {
        #[serde(default = "default_mu")]
        mu: f64,
        #[serde(default = "default_phi")]
        phi: f64,
        #[serde(default)]
        variant: Variant,
    },
    ErNaive {
        dt: Window,
        /// Defaults to `dt`.
        #[serde(default)]
        stride: Option<Window>,
        #[serde(default)]
        variant: Variant,
    },
    FrameBaseline {
        measure: FrameMeasure,
        #[serde(default)]
        decay: f64,
        #[serde(default = "default_fps")]
        fps: f64,
        #[serde(default = "default_contrast")]
        contrast: f64,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MethodSpec {
    pub name: String,
    #[serde(flatten)]
    pub kind: MethodKind,
}

impl MethodSpec {
    pub fn er_egs(mu: f64, variant: Variant) -> Self {
        MethodSpec {
            name: if variant == Variant::SumSquared {
                "ER+EGS".to_string()
            } else {
                format!("ER+EGS[{variant}]")
            },
            kind: MethodKind::ErEgs {
                mu,
                phi: GOLDEN_PHI,
                variant,
            },
        }
    }

    pub fn er_naive(dt: Window, variant: Variant) -> Self {
        let label = match dt {
            Window::Seconds(s) => format!("{s}s"),
            Window::Fraction(f) => format!("{f}T"),
        };
        let suffix = if variant == Variant::SumSquared {
            String::new()
        } else {
            format!("[{variant}]")
        };
        MethodSpec {
            name: format!("ER(dt={label}){suffix}"),
            kind: MethodKind::ErNaive {
                dt,
                stride: None,
                variant,
            },
        }
    }

    pub fn frame(measure: FrameMeasure, decay: f64) -> Self {
        MethodSpec {
            name: format!("{}(recon)", measure.as_str().to_uppercase()),
            kind: MethodKind::FrameBaseline {
                measure,
                decay,
                fps: default_fps(),
                contrast: default_contrast(),
            },
        }
    }

    pub fn validate(&self) -> Result<()> {
        match &self.kind {
            MethodKind::ErEgs { mu, phi, .. } => EgsConfig::new(*mu, *phi).map(|_| ()),
            MethodKind::ErNaive { dt, stride, .. } => {
                for w in std::iter::once(dt).chain(stride.as_ref()) {
                    let v = match w {
                        Window::Seconds(v) | Window::Fraction(v) => *v,
                    };
                    if !(v > 0.0) || !v.is_finite() {
                        return Err(EvafError::invalid(format!(
                            "method `{}`: window must be positive",
                            self.name
                        )));
                    }
                }
                Ok(())
            }
            MethodKind::FrameBaseline {
                decay, fps, contrast, ..
            } => {
                if !(*decay >= 0.0) || !(*fps > 0.0) || !(*contrast > 0.0) {
                    return Err(EvafError::invalid(format!(
                        "method `{}`: decay must be >= 0, fps and contrast > 0",
                        self.name
                    )));
                }
                Ok(())
            }
        }
    }
}

/// ER+EGS, fixed-window ER at 0.055 and 0.065 of the sweep, the gradient
/// baseline on 100 FPS reconstructions, and ER+EGS scored by total count.
pub fn default_methods() -> Vec<MethodSpec> {
    vec![
        MethodSpec::er_egs(DEFAULT_MU, Variant::SumSquared),
        MethodSpec::er_naive(Window::Fraction(0.055), Variant::SumSquared),
        MethodSpec::er_naive(Window::Fraction(0.065), Variant::SumSquared),
        MethodSpec::frame(FrameMeasure::Grad, 0.0),
        MethodSpec::er_egs(DEFAULT_MU, Variant::TotalCount),
    ]
}

/// Estimated time (µs) and focal position.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub t_us: f64,
    pub position: f64,
}

pub fn run_method(method: &MethodSpec, stream: &EventStream) -> Result<Estimate> {
    let index = PrefixIndex::build(stream);
    run_method_indexed(method, stream, &index)
}

/// Same as [`run_method`] with a prebuilt index shared across methods.
pub fn run_method_indexed(method: &MethodSpec, stream: &EventStream, index: &PrefixIndex) -> Result<Estimate> {
    method.validate()?;
    let sweep = stream.sweep();
    let t_us = match &method.kind {
        MethodKind::ErEgs { mu, phi, variant } => egs(index, &EgsConfig::new(*mu, *phi)?, *variant)?.t_star,
        MethodKind::ErNaive { dt, stride, variant } => {
            let dt_us = dt.to_us(sweep.duration_us());
            let stride_us = stride.unwrap_or(*dt).to_us(sweep.duration_us());
            naive_search(index, dt_us, stride_us, *variant)?.t_star
        }
        MethodKind::FrameBaseline {
            measure,
            decay,
            fps,
            contrast,
        } => frame_baseline(stream, *measure, *decay, *fps, *contrast)?,
    };
    Ok(Estimate {
        t_us,
        position: sweep.position_at(t_us)?,
    })
}

/// Scores frames reconstructed at `fps` across the sweep and returns the time
/// of the best one. A run of consecutive frames tied at the maximum (an
/// unchanged scene) resolves to its middle frame.
pub fn frame_baseline(stream: &EventStream, measure: FrameMeasure, decay: f64, fps: f64, contrast: f64) -> Result<f64> {
    let scored = score_frames(stream, measure, decay, fps, contrast)?;
    let best = scored.iter().map(|&(_, s)| s).fold(f64::NEG_INFINITY, f64::max);
    let first = scored.iter().position(|&(_, s)| s == best).expect("at least one frame");
    let run = scored[first..].iter().take_while(|&&(_, s)| s == best).count();
    Ok(scored[first + (run - 1) / 2].0 as f64)
}

/// `(t, score)` for every reconstructed frame.
pub fn score_frames(
    stream: &EventStream,
    measure: FrameMeasure,
    decay: f64,
    fps: f64,
    contrast: f64,
) -> Result<Vec<(u64, f64)>> {
    if !(fps > 0.0) {
        return Err(EvafError::invalid("frame rate must be positive"));
    }
    let sweep = stream.sweep();
    let period = 1e6 / fps;
    let n = ((sweep.duration_us() as f64 / period) + 1e-9).floor() as usize;
    if n == 0 {
        return Err(EvafError::invalid("sweep is shorter than one frame period"));
    }
    let mut integrator = Integrator::new(stream, contrast, decay)?;
    let mut scored = Vec::with_capacity(n);
    for k in 1..=n {
        let t = sweep.t_start + (k as f64 * period).round() as u64;
        integrator.advance_to(t.min(sweep.t_end));
        let frame = integrator.frame();
        scored.push((frame.t, frame_focus(&frame.log_intensity, measure)?));
    }
    Ok(scored)
}

pub fn mae_rmse(estimates: &[f64], truths: &[f64]) -> Result<(f64, f64)> {
    if estimates.len() != truths.len() {
        return Err(EvafError::invalid(format!(
            "{} estimates but {} ground-truth values",
            estimates.len(),
            truths.len()
        )));
    }
    if estimates.is_empty() {
        return Err(EvafError::invalid("no estimates to score"));
    }
    let n = estimates.len() as f64;
    let (abs, sq) = estimates.iter().zip(truths).fold((0.0, 0.0), |(abs, sq), (e, g)| {
        (abs + (e - g).abs(), sq + (e - g) * (e - g))
    });
    Ok((abs / n, (sq / n).sqrt()))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SequenceRow {
    pub sequence: String,
    pub condition: String,
    pub method: String,
    pub estimate: f64,
    pub truth: f64,
    pub abs_error: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AggregateRow {
    pub condition: String,
    pub method: String,
    pub mae: f64,
    pub rmse: f64,
    pub n: usize,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct BenchReport {
    pub rows: Vec<SequenceRow>,
    pub aggregates: Vec<AggregateRow>,
    pub warnings: Vec<String>,
}

pub const TOTAL: &str = "Total";

impl BenchReport {
    /// Builds aggregates per condition (in order of first appearance) and a
    /// `Total` over all rows, for every method.
    pub fn from_rows(rows: Vec<SequenceRow>, methods: &[String], warnings: Vec<String>) -> Result<Self> {
        let mut conditions: Vec<&str> = Vec::new();
        for r in &rows {
            if !conditions.contains(&r.condition.as_str()) {
                conditions.push(&r.condition);
            }
        }
        let mut aggregates = Vec::new();
        for condition in conditions.iter().copied().chain(std::iter::once(TOTAL)) {
            for method in methods {
                let (est, truth): (Vec<f64>, Vec<f64>) = rows
                    .iter()
                    .filter(|r| &r.method == method && (condition == TOTAL || r.condition == condition))
                    .map(|r| (r.estimate, r.truth))
                    .unzip();
                if est.is_empty() {
                    continue;
                }
                let (mae, rmse) = mae_rmse(&est, &truth)?;
                aggregates.push(AggregateRow {
                    condition: condition.to_string(),
                    method: method.clone(),
                    mae,
                    rmse,
                    n: est.len(),
                });
            }
        }
        Ok(BenchReport {
            rows,
            aggregates,
            warnings,
        })
    }

    pub fn aggregate(&self, condition: &str, method: &str) -> Option<&AggregateRow> {
        self.aggregates
            .iter()
            .find(|a| a.condition == condition && a.method == method)
    }

    pub fn rows_csv(&self) -> String {
        let mut out = String::from("sequence,condition,method,estimate,truth,abs_error\n");
        for r in &self.rows {
            let _ = writeln!(
                out,
                "{},{},{},{},{},{}",
                r.sequence, r.condition, r.method, r.estimate, r.truth, r.abs_error
            );
        }
        out
    }

    pub fn aggregates_csv(&self) -> String {
        let mut out = String::from("condition,method,mae,rmse,n\n");
        for a in &self.aggregates {
            let _ = writeln!(out, "{},{},{},{},{}", a.condition, a.method, a.mae, a.rmse, a.n);
        }
        out
    }

    pub fn to_json(&self) -> Result<String> {
        let mut text = serde_json::to_string_pretty(self)?;
        text.push('\n');
        Ok(text)
    }

    /// Writes `<stem>.csv`, `<stem>.aggregate.csv` and `<stem>.json`; any
    /// extension on `out` is replaced. Missing parent directories are created.
    pub fn write(&self, out: &Path) -> Result<Vec<PathBuf>> {
        if let Some(parent) = out.parent().filter(|p| !p.as_os_str().is_empty()) {
            std::fs::create_dir_all(parent).map_err(|e| EvafError::io(parent, e))?;
        }
        let csv = out.with_extension("csv");
        let agg = out.with_extension("aggregate.csv");
        let json = out.with_extension("json");
        for (path, body) in [
            (&csv, self.rows_csv()),
            (&agg, self.aggregates_csv()),
            (&json, self.to_json()?),
        ] {
            std::fs::write(path, body).map_err(|e| EvafError::io(path, e))?;
        }
        Ok(vec![csv, agg, json])
    }
}

/// Runs every method on every sequence of the dataset in `dataset_dir`.
/// Sequences without ground truth are skipped and listed in `warnings`.
pub fn run_benchmark(dataset_dir: &Path, methods: &[MethodSpec]) -> Result<BenchReport> {
    for m in methods {
        m.validate()?;
    }
    let manifest = Manifest::read(dataset_dir)?;
    let evaluate = |entry: &crate::sim::ManifestEntry| -> Result<std::result::Result<Vec<SequenceRow>, String>> {
        let events = dataset_dir.join(&entry.events);
        let sidecar = dataset_dir.join(&entry.sidecar);
        let (stream, meta) = read_event_file(&events, Some(&sidecar))?;
        let Some(truth) = meta.ground_truth_position else {
            return Ok(Err(format!("sequence `{}` has no ground truth; skipped", entry.id)));
        };
        let index = PrefixIndex::build(&stream);
        methods
            .iter()
            .map(|m| {
                let est = run_method_indexed(m, &stream, &index)?;
                Ok(SequenceRow {
                    sequence: entry.id.clone(),
                    condition: entry.condition.clone(),
                    method: m.name.clone(),
                    estimate: est.position,
                    truth,
                    abs_error: (est.position - truth).abs(),
                })
            })
            .collect::<Result<Vec<_>>>()
            .map(Ok)
    };
    #[cfg(feature = "parallel")]
    let outcomes = {
        use rayon::prelude::*;
        manifest
            .sequences
            .par_iter()
            .map(evaluate)
            .collect::<Result<Vec<_>>>()?
    };
    #[cfg(not(feature = "parallel"))]
    let outcomes = manifest.sequences.iter().map(evaluate).collect::<Result<Vec<_>>>()?;

    let mut rows = Vec::new();
    let mut warnings = Vec::new();
    for outcome in outcomes {
        match outcome {
            Ok(r) => rows.extend(r),
            Err(w) => {
                log::warn!("{w}");
                warnings.push(w);
            }
        }
    }
    let names: Vec<String> = methods.iter().map(|m| m.name.clone()).collect();
    BenchReport::from_rows(rows, &names, warnings)
}
