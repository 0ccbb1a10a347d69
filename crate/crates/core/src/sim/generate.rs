//! Threshold-crossing event generation over a focal sweep.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Poisson};
use serde::{Deserialize, Serialize};

use super::lens::LensModel;
use super::render::Renderer;
use crate::error::{EvafError, Result};
use crate::event::{Event, EventStream, Polarity, SweepConfig};
use crate::grid::Grid;

/// Scene content and sensor behavior for one simulated sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct SceneSpec {
    /// Linear intensity, strictly positive. Its size is the sensor size.
    pub texture: Grid,
    /// Global translation in pixels per second.
    pub motion_velocity: (f64, f64),
    /// Background events per pixel per second.
    pub noise_rate: f64,
    /// Probability that a noise event is positive; 0.5 is balanced, 1.0 unipolar.
    pub noise_on_fraction: f64,
    /// Contrast threshold in log-intensity units.
    pub contrast_threshold: f64,
    /// Initial reference levels are offset from the first log intensity by a
    /// uniform draw in `(-j C, j C)` for `j = reference_jitter`. Zero starts
    /// every pixel exactly at its first log intensity; 1 gives every pixel an
    /// arbitrary history, so a slow global brightness drift does not fire all
    /// pixels at once.
    pub reference_jitter: f64,
    pub seed: u64,
}

impl SceneSpec {
    pub fn new(texture: Grid) -> Self {
        SceneSpec {
            texture,
            motion_velocity: (0.0, 0.0),
            noise_rate: 0.0,
            noise_on_fraction: 0.5,
            contrast_threshold: crate::measure::DEFAULT_CONTRAST,
            reference_jitter: 0.0,
            seed: 0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.texture.width() == 0 || self.texture.height() == 0 {
            return Err(EvafError::invalid("texture is empty"));
        }
        if self.texture.width() > u16::MAX as usize || self.texture.height() > u16::MAX as usize {
            return Err(EvafError::invalid("texture exceeds the sensor coordinate range"));
        }
        if self.texture.data().iter().any(|&v| !(v > 0.0) || !v.is_finite()) {
            return Err(EvafError::invalid("texture intensity must be strictly positive"));
        }
        if !(self.noise_rate >= 0.0) || !self.noise_rate.is_finite() {
            return Err(EvafError::invalid(format!(
                "noise_rate must be non-negative, got {}",
                self.noise_rate
            )));
        }
        if !(0.0..=1.0).contains(&self.noise_on_fraction) {
            return Err(EvafError::invalid("noise_on_fraction must lie in [0, 1]"));
        }
        if !(0.0..=1.0).contains(&self.reference_jitter) {
            return Err(EvafError::invalid("reference_jitter must lie in [0, 1]"));
        }
        if !(self.contrast_threshold > 0.0) || !self.contrast_threshold.is_finite() {
            return Err(EvafError::invalid("contrast threshold must be positive"));
        }
        if !self.motion_velocity.0.is_finite() || !self.motion_velocity.1.is_finite() {
            return Err(EvafError::invalid("motion velocity must be finite"));
        }
        Ok(())
    }
}

pub const DEFAULT_SIM_RATE: f64 = 1000.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GeneratorConfig {
    /// Simulation steps per second.
    pub sim_rate: f64,
    /// Position of perfect focus as a fraction of the sweep duration.
    pub truth_fraction: f64,
}

impl Default for GeneratorConfig {
    fn default() -> Self {
        GeneratorConfig {
            sim_rate: DEFAULT_SIM_RATE,
            truth_fraction: 0.5,
        }
    }
}

/// Where the sweep is in focus, and the blur radius along the sweep.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroundTruth {
    pub t_star: u64,
    pub p_star: f64,
    /// `(t, radius in pixels)` samples.
    pub blur_radius_curve: Vec<(u64, f64)>,
}

impl GroundTruth {
    pub fn new(sweep: &SweepConfig, lens: &LensModel, truth_fraction: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&truth_fraction) {
            return Err(EvafError::invalid(format!(
                "truth_fraction must lie in [0, 1], got {truth_fraction}"
            )));
        }
        let t_star = sweep.t_start + (truth_fraction * sweep.duration_us() as f64).round() as u64;
        let p_star = sweep.time_to_position(t_star)?;
        let samples = 101;
        let blur_radius_curve = (0..samples)
            .map(|i| {
                let t = sweep.t_start + (i as f64 / (samples - 1) as f64 * sweep.duration_us() as f64).round() as u64;
                let p = sweep.time_to_position(t)?;
                Ok((t, lens.blur_radius(p - p_star)))
            })
            .collect::<Result<_>>()?;
        Ok(GroundTruth {
            t_star,
            p_star,
            blur_radius_curve,
        })
    }

    pub fn blur_radius_at(&self, sweep: &SweepConfig, lens: &LensModel, t: f64) -> Result<f64> {
        Ok(lens.blur_radius(sweep.position_at(t)? - self.p_star))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct SimStats {
    pub signal_events: u64,
    pub noise_events: u64,
    /// Largest per-step log-intensity change seen at any pixel.
    pub max_step_change: f64,
    pub steps: u64,
}

#[derive(Debug, Clone)]
pub struct Simulation {
    pub stream: EventStream,
    pub truth: GroundTruth,
    pub stats: SimStats,
}

/// Log-intensity image seen at time `t` (µs).
pub fn render_defocused(
    scene: &SceneSpec,
    t: f64,
    sweep: &SweepConfig,
    lens: &LensModel,
    truth: &GroundTruth,
) -> Result<Grid> {
    scene.validate()?;
    let radius = truth.blur_radius_at(sweep, lens, t)?;
    let mut renderer = Renderer::new(&scene.texture);
    let mut out = vec![0.0f32; scene.texture.width() * scene.texture.height()];
    renderer.render_log(shift_at(scene, sweep, t), radius, &mut out);
    Ok(Grid::new(
        scene.texture.width(),
        scene.texture.height(),
        out.into_iter().map(f64::from).collect(),
    ))
}

fn shift_at(scene: &SceneSpec, sweep: &SweepConfig, t: f64) -> (f64, f64) {
    let s = (t - sweep.t_start as f64) * 1e-6;
    (scene.motion_velocity.0 * s, scene.motion_velocity.1 * s)
}

const PHASE_STREAM: u64 = 0x005e_ed0f_f5e7;

/// Simulates the sweep. Each pixel keeps a reference log intensity and fires
/// once per threshold `C` crossed, moving its reference by `±C` per event;
/// event times are interpolated linearly within the step. Background noise is
/// a homogeneous Poisson process per pixel.
pub fn generate_sweep_events(
    scene: &SceneSpec,
    sweep: &SweepConfig,
    lens: &LensModel,
    config: &GeneratorConfig,
) -> Result<Simulation> {
    scene.validate()?;
    sweep.validate()?;
    lens.validate()?;
    if !(config.sim_rate > 0.0) || !config.sim_rate.is_finite() {
        return Err(EvafError::invalid(format!(
            "sim_rate must be positive, got {}",
            config.sim_rate
        )));
    }
    let truth = GroundTruth::new(sweep, lens, config.truth_fraction)?;
    let (w, h) = (scene.texture.width(), scene.texture.height());
    let c = scene.contrast_threshold;
    let duration = sweep.duration_us() as f64;
    let steps = ((duration * 1e-6 * config.sim_rate).ceil() as u64).max(1);
    let step_us = duration / steps as f64;

    let mut renderer = Renderer::new(&scene.texture);
    let radius_at = |t: f64| lens.blur_radius(sweep.position_at(t).unwrap_or(sweep.p_max) - truth.p_star);

    let t0 = sweep.t_start as f64;
    let mut prev = vec![0.0f32; w * h];
    renderer.render_log(shift_at(scene, sweep, t0), radius_at(t0), &mut prev);
    let mut phase_rng = ChaCha8Rng::seed_from_u64(scene.seed ^ PHASE_STREAM);
    let jitter = scene.reference_jitter * c;
    let mut reference: Vec<f64> = prev
        .iter()
        .map(|&v| {
            if jitter > 0.0 {
                v as f64 + phase_rng.random_range(-1.0..1.0) * jitter
            } else {
                v as f64
            }
        })
        .collect();
    let mut cur = vec![0.0f32; w * h];

    let mut events = Vec::new();
    let mut max_change = 0.0f64;
    let clamp_t = |t: f64| (t.round() as u64).clamp(sweep.t_start, sweep.t_end);
    for k in 1..=steps {
        let t_prev = t0 + (k - 1) as f64 * step_us;
        let t_cur = if k == steps {
            sweep.t_end as f64
        } else {
            t0 + k as f64 * step_us
        };
        renderer.render_log(shift_at(scene, sweep, t_cur), radius_at(t_cur), &mut cur);
        for (i, (&a, &b)) in prev.iter().zip(&cur).enumerate() {
            let (a, b) = (a as f64, b as f64);
            let change = (b - a).abs();
            if change > max_change {
                max_change = change;
            }
            let r = &mut reference[i];
            loop {
                let diff = b - *r;
                let p = if diff >= c {
                    Polarity::On
                } else if diff <= -c {
                    Polarity::Off
                } else {
                    break;
                };
                let target = *r + p.sign() * c;
                let frac = ((target - a) / (b - a)).clamp(0.0, 1.0);
                let t = clamp_t(t_prev + frac * (t_cur - t_prev));
                events.push(Event::new(t, (i % w) as u16, (i / w) as u16, p));
                *r = target;
            }
        }
        std::mem::swap(&mut prev, &mut cur);
    }
    if max_change >= 4.0 * c {
        log::warn!(
            "per-step log-intensity change {max_change:.3} exceeds 4C = {:.3}; raise sim_rate",
            4.0 * c
        );
    }
    let signal_events = events.len() as u64;

    let noise_events = add_noise(scene, sweep, w, h, &mut events)?;
    events.sort_by_key(|e| (e.t, e.y, e.x));

    let stream = EventStream::new(events, w as u16, h as u16, *sweep)?;
    Ok(Simulation {
        stream,
        truth,
        stats: SimStats {
            signal_events,
            noise_events,
            max_step_change: max_change,
            steps,
        },
    })
}

fn add_noise(scene: &SceneSpec, sweep: &SweepConfig, w: usize, h: usize, events: &mut Vec<Event>) -> Result<u64> {
    let mean = scene.noise_rate * (w * h) as f64 * sweep.duration_s();
    if mean <= 0.0 {
        return Ok(0);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(scene.seed);
    let poisson = Poisson::new(mean).map_err(|e| EvafError::invalid(format!("noise rate: {e}")))?;
    let n = poisson.sample(&mut rng) as u64;
    events.reserve(n as usize);
    for _ in 0..n {
        let t = rng.random_range(sweep.t_start..=sweep.t_end);
        let x = rng.random_range(0..w) as u16;
        let y = rng.random_range(0..h) as u16;
        let p = if rng.random_bool(scene.noise_on_fraction) {
            Polarity::On
        } else {
            Polarity::Off
        };
        events.push(Event::new(t, x, y, p));
    }
    Ok(n)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sim::texture::{checkerboard, log_ramp_texture};

    fn sweep(seconds: u64) -> SweepConfig {
        SweepConfig::new(0, seconds * 1_000_000, 220.0, 3750.0).unwrap()
    }

    #[test]
    fn constant_scene_without_noise_is_silent() {
        let scene = SceneSpec::new(Grid::filled(16, 16, 0.7));
        let sim = generate_sweep_events(&scene, &sweep(2), &LensModel::default(), &GeneratorConfig::default()).unwrap();
        assert!(sim.stream.is_empty());
    }

    #[test]
    fn noise_count_is_poisson() {
        // rate 1e-3 /px/s, 100x100 px, 10 s: mean 100, sigma 10
        let mut scene = SceneSpec::new(Grid::filled(100, 100, 1.0));
        scene.noise_rate = 1e-3;
        let cfg = GeneratorConfig {
            sim_rate: 10.0,
            ..Default::default()
        };
        for seed in 0..5 {
            scene.seed = seed;
            let sim = generate_sweep_events(&scene, &sweep(10), &LensModel::default(), &cfg).unwrap();
            let n = sim.stream.len() as f64;
            assert!((n - 100.0).abs() <= 30.0, "seed {seed}: {n}");
            assert_eq!(sim.stats.noise_events as usize, sim.stream.len());
        }
    }

    #[test]
    fn in_focus_render_is_the_sharp_texture() {
        let tex = checkerboard(16, 16, 4).map(|v| 1.0 + 0.5 * v);
        let scene = SceneSpec::new(tex.clone());
        let sw = sweep(1);
        let lens = LensModel::default();
        let truth = GroundTruth::new(&sw, &lens, 0.5).unwrap();
        let img = render_defocused(&scene, truth.t_star as f64, &sw, &lens, &truth).unwrap();
        for (a, b) in img.data().iter().zip(tex.data()) {
            assert!((a - b.ln()).abs() < 1e-6);
        }
        let far = render_defocused(&scene, 0.0, &sw, &lens, &truth).unwrap();
        assert!(far.data().iter().zip(tex.data()).any(|(a, b)| (a - b.ln()).abs() > 0.1));
    }

    #[test]
    fn ground_truth_radius_profile() {
        let sw = sweep(10);
        let truth = GroundTruth::new(&sw, &LensModel::default(), 0.3).unwrap();
        assert_eq!(truth.t_star, 3_000_000);
        let at_star = truth
            .blur_radius_curve
            .iter()
            .find(|(t, _)| *t == truth.t_star)
            .unwrap();
        assert_eq!(at_star.1, 0.0);
        let (left, right): (Vec<&_>, Vec<&_>) = truth.blur_radius_curve.iter().partition(|(t, _)| *t <= truth.t_star);
        assert!(left.windows(2).all(|w| w[0].1 > w[1].1));
        assert!(right.windows(2).all(|w| w[0].1 < w[1].1));
    }

    #[test]
    fn events_are_sorted_and_deterministic() {
        let mut scene = SceneSpec::new(checkerboard(24, 24, 6).map(|v| 1.0 + 0.6 * v));
        scene.noise_rate = 0.5;
        scene.seed = 9;
        let cfg = GeneratorConfig {
            sim_rate: 100.0,
            ..Default::default()
        };
        let a = generate_sweep_events(&scene, &sweep(2), &LensModel::default(), &cfg).unwrap();
        let b = generate_sweep_events(&scene, &sweep(2), &LensModel::default(), &cfg).unwrap();
        assert_eq!(a.stream, b.stream);
        assert!(a.stats.signal_events > 0 && a.stats.noise_events > 0);
        let ev = a.stream.events();
        assert!(ev
            .windows(2)
            .all(|w| (w[0].t, w[0].y, w[0].x) <= (w[1].t, w[1].y, w[1].x)));
    }

    #[test]
    fn ramp_translation_fires_at_gradient_times_speed_over_c() {
        // log slope 0.2 per px moving at 1 px/s with C = 0.04: 5 events/s per pixel
        let mut scene = SceneSpec::new(log_ramp_texture(32, 4, 0.2));
        scene.motion_velocity = (1.0, 0.0);
        scene.contrast_threshold = 0.04;
        let lens = LensModel {
            k_blur: 0.0,
            ..Default::default()
        };
        let cfg = GeneratorConfig {
            sim_rate: 200.0,
            ..Default::default()
        };
        let sim = generate_sweep_events(&scene, &sweep(4), &lens, &cfg).unwrap();
        let per_pixel = sim.stream.events().iter().filter(|e| e.x == 20 && e.y == 0).count();
        assert!((19..=20).contains(&per_pixel), "{per_pixel}");
        assert!(sim
            .stream
            .events()
            .iter()
            .filter(|e| e.x == 20)
            .all(|e| e.p == Polarity::Off));
    }

    #[test]
    fn rejects_bad_sim_rate() {
        let scene = SceneSpec::new(Grid::filled(4, 4, 1.0));
        let cfg = GeneratorConfig {
            sim_rate: 0.0,
            ..Default::default()
        };
        assert!(generate_sweep_events(&scene, &sweep(1), &LensModel::default(), &cfg).is_err());
    }
}
