//! Run manifests, latent-stack metadata, and evaluation reports.
//!
//! `run.json` records everything needed to reproduce a run bit-for-bit:
//! input paths, camera intrinsics, the full sampling configuration, the
//! RNG algorithm tag, and the per-view diagnostics. A run that dies partway
//! still writes the manifest with `failed_stage` set so the wreckage can be
//! inspected. Field order is fixed by the struct, so identical runs write
//! identical bytes.

use std::path::Path;

use serde::{Deserialize, Serialize};
use vantage_core::diffusion::{NoiseMode, ScheduleKind};
use vantage_core::geometry::{GeometryError, PinholeCamera};
use vantage_core::pipeline::PipelineConfig;

use crate::error::CodecError;

pub const MANIFEST_SCHEMA_VERSION: u32 = 1;
pub const MANIFEST_FILE: &str = "run.json";
pub const LATENT_METADATA_FILE: &str = "metadata.json";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NoiseModeSpec {
    Independent,
    Shared,
}

impl From<NoiseModeSpec> for NoiseMode {
    fn from(m: NoiseModeSpec) -> NoiseMode {
        match m {
            NoiseModeSpec::Independent => NoiseMode::Independent,
            NoiseModeSpec::Shared => NoiseMode::Shared,
        }
    }
}

impl From<NoiseMode> for NoiseModeSpec {
    fn from(m: NoiseMode) -> NoiseModeSpec {
        match m {
            NoiseMode::Independent => NoiseModeSpec::Independent,
            NoiseMode::Shared => NoiseModeSpec::Shared,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScheduleKindSpec {
    Linear,
    ScaledLinear,
}

impl From<ScheduleKindSpec> for ScheduleKind {
    fn from(k: ScheduleKindSpec) -> ScheduleKind {
        match k {
            ScheduleKindSpec::Linear => ScheduleKind::Linear,
            ScheduleKindSpec::ScaledLinear => ScheduleKind::ScaledLinear,
        }
    }
}

impl From<ScheduleKind> for ScheduleKindSpec {
    fn from(k: ScheduleKind) -> ScheduleKindSpec {
        match k {
            ScheduleKind::Linear => ScheduleKindSpec::Linear,
            ScheduleKind::ScaledLinear => ScheduleKindSpec::ScaledLinear,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CameraParams {
    pub fx: f64,
    pub fy: f64,
    pub cx: f64,
    pub cy: f64,
    pub width: usize,
    pub height: usize,
}

impl From<&PinholeCamera> for CameraParams {
    fn from(c: &PinholeCamera) -> CameraParams {
        CameraParams { fx: c.fx, fy: c.fy, cx: c.cx, cy: c.cy, width: c.width, height: c.height }
    }
}

impl CameraParams {
    pub fn to_camera(&self) -> Result<PinholeCamera, GeometryError> {
        PinholeCamera::new(self.fx, self.fy, self.cx, self.cy, self.width, self.height)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScheduleParams {
    pub kind: ScheduleKindSpec,
    pub total_steps: usize,
    pub beta_start: f64,
    pub beta_end: f64,
}

/// Sampling configuration as recorded on disk; mirrors
/// [`PipelineConfig`] minus the frame count, which sits beside it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SamplingParams {
    pub steps: usize,
    pub t0_index: usize,
    pub eta: f64,
    pub seed: u64,
    pub noise_mode: NoiseModeSpec,
    pub schedule: ScheduleParams,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ManifestInputs {
    pub color: String,
    pub depth: String,
    pub trajectory: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunManifest {
    pub schema_version: u32,
    /// Which subcommand produced this run.
    pub command: String,
    pub rng_algorithm: String,
    pub inputs: ManifestInputs,
    pub camera: CameraParams,
    pub frames: usize,
    /// Orbit focus distance as resolved at run time (spec value, flag, or
    /// depth estimate); recorded so reruns rebuild the same trajectory.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub focus_distance: Option<f64>,
    /// Absent for renders that never touch the resampling stage.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sampling: Option<SamplingParams>,
    pub filler: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub denoiser: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub inversion_seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub generation_seed: Option<u64>,
    pub depth_coefficients: Vec<f64>,
    pub hole_fractions: Vec<f64>,
    pub no_overlap_views: Vec<usize>,
    /// Set when the run aborted; names the stage that failed.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub failed_stage: Option<String>,
}

impl RunManifest {
    /// Reconstructs the sampling configuration this manifest records, or
    /// None for a render-only manifest.
    pub fn to_pipeline_config(&self) -> Option<PipelineConfig> {
        let sampling = self.sampling.as_ref()?;
        Some(PipelineConfig {
            frames: self.frames,
            sampling_step_count: sampling.steps,
            t0_index: sampling.t0_index,
            eta: sampling.eta,
            seed: sampling.seed,
            noise_mode: sampling.noise_mode.into(),
            schedule_kind: sampling.schedule.kind.into(),
            total_steps: sampling.schedule.total_steps,
            beta_start: sampling.schedule.beta_start,
            beta_end: sampling.schedule.beta_end,
        })
    }
}

pub fn sampling_params(config: &PipelineConfig) -> SamplingParams {
    SamplingParams {
        steps: config.sampling_step_count,
        t0_index: config.t0_index,
        eta: config.eta,
        seed: config.seed,
        noise_mode: config.noise_mode.into(),
        schedule: ScheduleParams {
            kind: config.schedule_kind.into(),
            total_steps: config.total_steps,
            beta_start: config.beta_start,
            beta_end: config.beta_end,
        },
    }
}

/// Companion record written next to a latent stack.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LatentMetadata {
    pub seed: u64,
    pub inversion_seed: u64,
    /// Ladder index the stack was inverted to, and its timestep value.
    pub t0_index: usize,
    pub timestep: usize,
    pub eta: f64,
    pub noise_mode: NoiseModeSpec,
    pub schedule: ScheduleParams,
    pub rng_algorithm: String,
    pub frames: usize,
    pub channels: usize,
    pub height: usize,
    pub width: usize,
}

/// Output of the `evaluate` subcommand.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EvaluationReport {
    pub ate: f64,
    pub rpe_t: f64,
    pub rpe_r: f64,
    /// Number of poses compared.
    pub n: usize,
    pub delta: usize,
    pub with_scale: bool,
}

pub fn to_json_pretty<T: Serialize>(value: &T) -> String {
    let mut text = serde_json::to_string_pretty(value).expect("manifest types serialize");
    text.push('\n');
    text
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), CodecError> {
    std::fs::write(path, to_json_pretty(value))?;
    Ok(())
}

pub fn read_manifest(path: &Path) -> Result<RunManifest, CodecError> {
    let text = std::fs::read_to_string(path)?;
    serde_json::from_str(&text).map_err(|e| CodecError::Manifest(e.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> RunManifest {
        RunManifest {
            schema_version: MANIFEST_SCHEMA_VERSION,
            command: "generate".into(),
            rng_algorithm: vantage_core::rng::RNG_ALGORITHM.into(),
            inputs: ManifestInputs {
                color: "in/color.ppm".into(),
                depth: "in/depth.pfm".into(),
                trajectory: "in/traj.json".into(),
            },
            camera: CameraParams { fx: 123.5, fy: 123.5, cx: 64.0, cy: 48.0, width: 128, height: 96 },
            frames: 14,
            focus_distance: None,
            sampling: Some(sampling_params(&PipelineConfig::default())),
            filler: "diffuse".into(),
            denoiser: Some("smoothing".into()),
            inversion_seed: Some(11),
            generation_seed: Some(12),
            depth_coefficients: vec![1.0, 0.98],
            hole_fractions: vec![0.0, 0.25],
            no_overlap_views: vec![],
            failed_stage: None,
        }
    }

    #[test]
    fn manifest_round_trips_through_json() {
        let m = sample();
        let text = to_json_pretty(&m);
        let back: RunManifest = serde_json::from_str(&text).unwrap();
        assert_eq!(back, m);
        // Serialization is deterministic.
        assert_eq!(to_json_pretty(&back), text);
    }

    #[test]
    fn pipeline_config_round_trips() {
        let config = PipelineConfig {
            frames: 7,
            sampling_step_count: 13,
            t0_index: 4,
            eta: 0.5,
            seed: 99,
            noise_mode: NoiseMode::Shared,
            schedule_kind: ScheduleKind::ScaledLinear,
            total_steps: 500,
            beta_start: 2e-4,
            beta_end: 0.015,
        };
        let mut m = sample();
        m.frames = config.frames;
        m.sampling = Some(sampling_params(&config));
        let back = m.to_pipeline_config().unwrap();
        assert_eq!(back.seed, 99);
        assert_eq!(back.total_steps, 500);
        assert!(matches!(back.noise_mode, NoiseMode::Shared));
        assert!(matches!(back.schedule_kind, ScheduleKind::ScaledLinear));
        assert_eq!(back.beta_end, 0.015);
    }

    #[test]
    fn schedule_kind_uses_snake_case() {
        let text = serde_json::to_string(&ScheduleKindSpec::ScaledLinear).unwrap();
        assert_eq!(text, r#""scaled_linear""#);
    }

    #[test]
    fn unknown_fields_are_rejected() {
        let mut value: serde_json::Value = serde_json::from_str(&to_json_pretty(&sample())).unwrap();
        value["surprise"] = serde_json::json!(1);
        let text = value.to_string();
        assert!(serde_json::from_str::<RunManifest>(&text).is_err());
    }
}
