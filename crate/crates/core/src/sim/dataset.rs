//! Scene specifications in JSON and on-disk datasets of simulated sweeps.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::generate::{generate_sweep_events, GeneratorConfig, SceneSpec, Simulation};
use super::lens::LensModel;
use super::texture::{BuiltinTexture, TextureSpec};
use crate::error::{EvafError, Result};
use crate::event::SweepConfig;
use crate::io::{write_event_file, Metadata};

pub const MANIFEST_FORMAT: &str = "evaf-dataset v1";
pub const MANIFEST_FILE: &str = "manifest.json";

fn default_size() -> u16 {
    128
}

fn default_sweep() -> SweepConfig {
    SweepConfig {
        t_start: 0,
        t_end: 10_000_000,
        p_min: 220.0,
        p_max: 3750.0,
    }
}

fn default_contrast() -> f64 {
    crate::measure::DEFAULT_CONTRAST
}

fn default_on_fraction() -> f64 {
    0.5
}

fn default_sim_rate() -> f64 {
    super::generate::DEFAULT_SIM_RATE
}

fn default_truth_fraction() -> f64 {
    0.5
}

fn default_condition() -> String {
    "static-light".to_string()
}

/// One simulated sequence as written in scene JSON.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SequenceSpec {
    pub id: String,
    #[serde(default = "default_condition")]
    pub condition: String,
    #[serde(default = "default_size")]
    pub width: u16,
    #[serde(default = "default_size")]
    pub height: u16,
    pub texture: TextureSpec,
    #[serde(default)]
    pub motion_velocity: (f64, f64),
    #[serde(default)]
    pub noise_rate: f64,
    #[serde(default = "default_on_fraction")]
    pub noise_on_fraction: f64,
    #[serde(default = "default_contrast")]
    pub contrast_threshold: f64,
    #[serde(default)]
    pub reference_jitter: f64,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_sweep")]
    pub sweep: SweepConfig,
    #[serde(default)]
    pub lens: LensModel,
    #[serde(default = "default_sim_rate")]
    pub sim_rate: f64,
    #[serde(default = "default_truth_fraction")]
    pub truth_fraction: f64,
}

impl SequenceSpec {
    pub fn scene(&self) -> Result<SceneSpec> {
        let texture = self
            .texture
            .render(self.width as usize, self.height as usize, self.seed)?;
        let scene = SceneSpec {
            texture,
            motion_velocity: self.motion_velocity,
            noise_rate: self.noise_rate,
            noise_on_fraction: self.noise_on_fraction,
            contrast_threshold: self.contrast_threshold,
            reference_jitter: self.reference_jitter,
            seed: self.seed,
        };
        scene.validate()?;
        Ok(scene)
    }

    pub fn generator(&self) -> GeneratorConfig {
        GeneratorConfig {
            sim_rate: self.sim_rate,
            truth_fraction: self.truth_fraction,
        }
    }

    pub fn simulate(&self) -> Result<Simulation> {
        generate_sweep_events(&self.scene()?, &self.sweep, &self.lens, &self.generator())
    }
}

/// Scene JSON: a single sequence or `{"sequences": [...]}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum DatasetSpec {
    Many { sequences: Vec<SequenceSpec> },
    One(Box<SequenceSpec>),
}

impl DatasetSpec {
    pub fn into_sequences(self) -> Vec<SequenceSpec> {
        match self {
            DatasetSpec::Many { sequences } => sequences,
            DatasetSpec::One(s) => vec![*s],
        }
    }

    pub fn read(path: &Path) -> Result<Vec<SequenceSpec>> {
        let text = std::fs::read_to_string(path).map_err(|e| EvafError::io(path, e))?;
        let spec: DatasetSpec = serde_json::from_str(&text).map_err(|source| EvafError::Json {
            path: path.to_path_buf(),
            source,
        })?;
        let mut sequences = spec.into_sequences();
        // texture paths are relative to the spec file
        let base = path.parent().unwrap_or_else(|| Path::new("."));
        for s in &mut sequences {
            if let TextureSpec::Pgm { pgm, .. } = &mut s.texture {
                if pgm.is_relative() {
                    *pgm = base.join(&*pgm);
                }
            }
        }
        Ok(sequences)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ManifestEntry {
    pub id: String,
    pub condition: String,
    pub events: PathBuf,
    pub sidecar: PathBuf,
    pub signal_events: u64,
    pub noise_events: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub format: String,
    pub sequences: Vec<ManifestEntry>,
}

impl Manifest {
    pub fn read(dir: &Path) -> Result<Self> {
        let path = dir.join(MANIFEST_FILE);
        let text = std::fs::read_to_string(&path).map_err(|e| EvafError::io(&path, e))?;
        serde_json::from_str(&text).map_err(|source| EvafError::Json { path, source })
    }
}

/// Simulates every spec and writes `<id>.csv`, `<id>.json` and `manifest.json`
/// into `out_dir`.
pub fn make_dataset(specs: &[SequenceSpec], out_dir: &Path) -> Result<Manifest> {
    let mut seen = std::collections::HashSet::new();
    for s in specs {
        if s.id.is_empty() || s.id.contains(['/', '\\']) || !seen.insert(s.id.as_str()) {
            return Err(EvafError::invalid(format!(
                "sequence id `{}` is empty, duplicated or not a file name",
                s.id
            )));
        }
    }
    std::fs::create_dir_all(out_dir).map_err(|e| EvafError::io(out_dir, e))?;
    let write_one = |spec: &SequenceSpec| -> Result<ManifestEntry> {
        let sim = spec.simulate()?;
        let events = PathBuf::from(format!("{}.csv", spec.id));
        let mut meta = Metadata::for_stream(&sim.stream);
        meta.ground_truth_position = Some(sim.truth.p_star);
        meta.ground_truth_time = Some(sim.truth.t_star);
        write_event_file(&out_dir.join(&events), &sim.stream, &meta)?;
        Ok(ManifestEntry {
            id: spec.id.clone(),
            condition: spec.condition.clone(),
            sidecar: events.with_extension("json"),
            events,
            signal_events: sim.stats.signal_events,
            noise_events: sim.stats.noise_events,
        })
    };
    #[cfg(feature = "parallel")]
    let entries = {
        use rayon::prelude::*;
        specs.par_iter().map(write_one).collect::<Result<Vec<_>>>()?
    };
    #[cfg(not(feature = "parallel"))]
    let entries = specs.iter().map(write_one).collect::<Result<Vec<_>>>()?;
    let manifest = Manifest {
        format: MANIFEST_FORMAT.to_string(),
        sequences: entries,
    };
    let path = out_dir.join(MANIFEST_FILE);
    let mut text = serde_json::to_string_pretty(&manifest)?;
    text.push('\n');
    std::fs::write(&path, text).map_err(|e| EvafError::io(&path, e))?;
    Ok(manifest)
}

/// The four lighting/motion condition classes.
pub const CONDITIONS: [&str; 4] = ["static-light", "static-dark", "dynamic-light", "dynamic-dark"];

/// Standard benchmark scene for a condition class. Dark scenes have low texture
/// contrast and heavy background noise; dynamic scenes translate steadily.
pub fn condition_spec(condition: &str, seed: u64) -> Result<SequenceSpec> {
    let (dark, dynamic) = match condition {
        "static-light" => (false, false),
        "static-dark" => (true, false),
        "dynamic-light" => (false, true),
        "dynamic-dark" => (true, true),
        other => return Err(EvafError::invalid(format!("unknown condition class `{other}`"))),
    };
    // seed-dependent focus placement and texture
    let mix = seed.wrapping_mul(0x9e37_79b9_7f4a_7c15).rotate_left(17);
    let truth_fraction = 0.35 + 0.3 * ((mix % 1000) as f64 / 999.0);
    let builtin = match seed % 3 {
        0 => BuiltinTexture::Natural,
        1 => BuiltinTexture::Checkerboard,
        _ => BuiltinTexture::Natural,
    };
    let angle = (mix >> 20) as f64 / (1u64 << 44) as f64 * std::f64::consts::TAU;
    Ok(SequenceSpec {
        id: format!("{condition}-{seed:02}"),
        condition: condition.to_string(),
        width: default_size(),
        height: default_size(),
        texture: TextureSpec::builtin(builtin, 32, if dark { 0.5 } else { 0.8 }),
        motion_velocity: if dynamic {
            (3.0 * angle.cos(), 3.0 * angle.sin())
        } else {
            (0.0, 0.0)
        },
        noise_rate: if dark { 0.1 } else { 0.02 },
        noise_on_fraction: 0.5,
        contrast_threshold: default_contrast(),
        reference_jitter: 1.0,
        seed,
        sweep: default_sweep(),
        lens: LensModel::default(),
        sim_rate: 100.0,
        truth_fraction,
    })
}

/// Condition classes crossed with `seeds` seeds.
pub fn default_suite(seeds: u64) -> Vec<SequenceSpec> {
    CONDITIONS
        .iter()
        .flat_map(|c| (0..seeds).map(move |s| condition_spec(c, s).expect("known condition")))
        .collect()
}
