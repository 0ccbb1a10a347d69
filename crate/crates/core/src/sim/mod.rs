//! Synthetic focal sweeps with known ground truth.
//!
//! A textured scene is blurred by a disc PSF whose radius grows linearly with
//! the focal-position error, optionally translated, and observed by ideal
//! threshold-crossing pixels plus Poisson background noise.

mod dataset;
mod generate;
mod lens;
mod render;
mod texture;

pub use dataset::{
    condition_spec, default_suite, make_dataset, DatasetSpec, Manifest, ManifestEntry, SequenceSpec, CONDITIONS,
    MANIFEST_FILE, MANIFEST_FORMAT,
};
pub use generate::{
    generate_sweep_events, render_defocused, GeneratorConfig, GroundTruth, SceneSpec, SimStats, Simulation,
    DEFAULT_SIM_RATE,
};
pub use lens::{thin_lens_image_distance, LensModel, DEFAULT_K_BLUR};
pub use render::{DiscKernel, Renderer, IDENTITY_RADIUS};
pub use texture::{checkerboard, log_ramp_texture, natural, stripes, BuiltinTexture, TextureSpec};
