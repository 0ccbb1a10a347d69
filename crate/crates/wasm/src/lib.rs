//! Browser bindings: simulate one sweep, then query focus curves, golden-search
//! traces and frames from it.

use evaf_core::measure::{focus_curve, reconstruct_frame, Variant};
use evaf_core::search::{egs, naive_search, EgsConfig, GOLDEN_PHI};
use evaf_core::sim::{condition_spec, render_defocused, GroundTruth, SceneSpec, SequenceSpec};
use evaf_core::{EventStream, Grid, PrefixIndex, Result, SweepConfig};
use wasm_bindgen::prelude::*;

/// A simulated sweep with its index and ground truth.
#[wasm_bindgen]
pub struct Sweep {
    spec: SequenceSpec,
    scene: SceneSpec,
    stream: EventStream,
    index: PrefixIndex,
    truth: GroundTruth,
}

fn js(e: evaf_core::EvafError) -> JsError {
    JsError::new(&e.to_string())
}

impl Sweep {
    pub fn simulate(condition: &str, seed: u64, size: u16, duration_s: f64, noise_rate: f64) -> Result<Sweep> {
        let mut spec = condition_spec(condition, seed)?;
        spec.width = size;
        spec.height = size;
        spec.noise_rate = noise_rate;
        let t_end = (duration_s * 1e6).round().max(1.0) as u64;
        spec.sweep = SweepConfig::new(0, t_end, spec.sweep.p_min, spec.sweep.p_max)?;
        let scene = spec.scene()?;
        let sim = spec.simulate()?;
        let index = PrefixIndex::build(&sim.stream);
        Ok(Sweep {
            spec,
            scene,
            stream: sim.stream,
            index,
            truth: sim.truth,
        })
    }

    /// `[t_us, score, ...]` for windows of `dt_fraction` of the sweep at
    /// `samples` evenly spaced centers.
    pub fn curve(&self, dt_fraction: f64, samples: u32) -> Result<Vec<f64>> {
        let duration = self.spec.sweep.duration_us() as f64;
        let stride = duration / samples.max(1) as f64;
        let curve = focus_curve(&self.index, dt_fraction * duration, stride, Variant::SumSquared)?;
        Ok(curve.samples.iter().flat_map(|s| [s.t_us, s.value]).collect())
    }

    pub fn search_json(&self, mu: f64, naive_fraction: f64) -> Result<String> {
        let found = egs(&self.index, &EgsConfig::new(mu, GOLDEN_PHI)?, Variant::SumSquared)?;
        let duration = self.spec.sweep.duration_us() as f64;
        let naive = naive_search(
            &self.index,
            naive_fraction * duration,
            duration / 1000.0,
            Variant::SumSquared,
        )?;
        let value = serde_json::json!({
            "egs": found,
            "naive": {"t_star": naive.t_star, "p_star": naive.p_star},
            "truth": {"t_star": self.truth.t_star, "p_star": self.truth.p_star},
        });
        Ok(value.to_string())
    }

    /// Grayscale RGBA of the direct-integration frame at `t_us`, mid-gray at
    /// zero and saturating at `±span` log units.
    pub fn reconstruction(&self, t_us: f64, decay: f64, span: f64) -> Result<Vec<u8>> {
        let t = t_us.clamp(0.0, self.spec.sweep.t_end as f64) as u64;
        let frame = reconstruct_frame(&self.stream, t, decay, self.spec.contrast_threshold)?;
        Ok(rgba(&frame.log_intensity, -span, span))
    }

    /// Grayscale RGBA of the log intensity the sensor sees at `t_us`.
    pub fn scene_view(&self, t_us: f64) -> Result<Vec<u8>> {
        let t = t_us.clamp(0.0, self.spec.sweep.t_end as f64);
        let img = render_defocused(&self.scene, t, &self.spec.sweep, &self.spec.lens, &self.truth)?;
        let lo = img.data().iter().copied().fold(f64::INFINITY, f64::min);
        let hi = img.data().iter().copied().fold(f64::NEG_INFINITY, f64::max);
        Ok(rgba(&img, lo, hi))
    }
}

/// Flat images come out mid-gray.
fn rgba(grid: &Grid, lo: f64, hi: f64) -> Vec<u8> {
    let span = hi - lo;
    grid.data()
        .iter()
        .flat_map(|&v| {
            let g = if span > 1e-12 {
                ((v - lo) / span * 255.0).round().clamp(0.0, 255.0) as u8
            } else {
                128
            };
            [g, g, g, 255]
        })
        .collect()
}

#[wasm_bindgen]
impl Sweep {
    /// Simulates `condition` (`static-light`, `static-dark`, `dynamic-light`
    /// or `dynamic-dark`) on a `size`×`size` sensor.
    #[wasm_bindgen(constructor)]
    pub fn new(
        condition: &str,
        seed: u32,
        size: u16,
        duration_s: f64,
        noise_rate: f64,
    ) -> std::result::Result<Sweep, JsError> {
        Sweep::simulate(condition, seed as u64, size, duration_s, noise_rate).map_err(js)
    }

    pub fn width(&self) -> u16 {
        self.stream.width()
    }

    pub fn height(&self) -> u16 {
        self.stream.height()
    }

    pub fn events(&self) -> usize {
        self.stream.len()
    }

    pub fn duration_us(&self) -> f64 {
        self.spec.sweep.duration_us() as f64
    }

    pub fn truth_time_us(&self) -> f64 {
        self.truth.t_star as f64
    }

    pub fn truth_position(&self) -> f64 {
        self.truth.p_star
    }

    pub fn position_at(&self, t_us: f64) -> std::result::Result<f64, JsError> {
        self.spec.sweep.position_at(t_us).map_err(js)
    }

    #[wasm_bindgen(js_name = focusCurve)]
    pub fn focus_curve(&self, dt_fraction: f64, samples: u32) -> std::result::Result<Vec<f64>, JsError> {
        self.curve(dt_fraction, samples).map_err(js)
    }

    /// JSON with the golden-search result and trace, the fixed-window result
    /// and the ground truth.
    pub fn search(&self, mu: f64, naive_fraction: f64) -> std::result::Result<String, JsError> {
        self.search_json(mu, naive_fraction).map_err(js)
    }

    #[wasm_bindgen(js_name = reconstructRgba)]
    pub fn reconstruct_rgba(&self, t_us: f64, decay: f64, span: f64) -> std::result::Result<Vec<u8>, JsError> {
        self.reconstruction(t_us, decay, span).map_err(js)
    }

    #[wasm_bindgen(js_name = sceneRgba)]
    pub fn scene_rgba(&self, t_us: f64) -> std::result::Result<Vec<u8>, JsError> {
        self.scene_view(t_us).map_err(js)
    }
}
