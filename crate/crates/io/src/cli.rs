//! The `vantage` command line: synthetic scenes, trajectory rendering, the
//! full generation pipeline, pose export, and trajectory evaluation.
//!
//! Exit codes: 0 success, 2 invalid configuration or unreadable input,
//! 3 a pipeline stage failed at runtime. A failed `generate` still writes
//! `run.json` with `failed_stage` set.

use std::fmt::Display;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};

use vantage_core::cloud::{
    ConstantFiller, DiffuseFiller, Filler, RenderedDepthProvider, RenderResult, RgbdFrame,
};
use vantage_core::diffusion::LatentSequence;
use vantage_core::geometry::{
    estimate_focus_distance, PinholeCamera, Trajectory, DEFAULT_FOCUS_PATCH_HALF_WIDTH,
};
use vantage_core::metrics::{ate, rpe, PoseTrack};
use vantage_core::pipeline::{self, DenoiserChoice, PipelineConfig, PipelineError};
use vantage_core::raster::{ColorRaster, ScalarRaster};
use vantage_core::rng::RNG_ALGORITHM;
use vantage_core::scene::synth_scene;

use crate::manifest::{
    read_manifest, sampling_params, write_json, CameraParams, EvaluationReport, LatentMetadata,
    ManifestInputs, RunManifest, LATENT_METADATA_FILE, MANIFEST_FILE, MANIFEST_SCHEMA_VERSION,
};
use crate::pfm::{decode_pfm, encode_pfm};
use crate::pnm::{decode_ppm, dequantize_color, encode_pgm, encode_ppm, mask_to_gray, quantize_color};
use crate::posefile::{decode_poses, encode_poses};
use crate::trajspec::{build_trajectory, parse_spec, KindSpec, TrajectorySpec};

#[derive(Parser)]
#[command(
    name = "vantage",
    version,
    about = "Point-cloud view synthesis and latent resampling toolkit"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Render a procedural box scene to color.ppm and depth.pfm.
    SynthScene(SynthSceneArgs),
    /// Run view synthesis only: per-frame renders and coverage masks.
    RenderTrajectory(RenderArgs),
    /// Run the full pipeline: view synthesis, inversion, resampling.
    Generate(GenerateArgs),
    /// Compare an estimated pose track against a reference.
    Evaluate(EvaluateArgs),
    /// Realize a trajectory spec as a plain-text pose track.
    ExportPoses(ExportArgs),
}

#[derive(Args)]
struct SynthSceneArgs {
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 256)]
    width: usize,
    #[arg(long, default_value_t = 256)]
    height: usize,
    /// Output directory.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct CameraArgs {
    /// Focal length x, pixels. Defaults to a 55 degree vertical FOV.
    #[arg(long)]
    fx: Option<f64>,
    #[arg(long)]
    fy: Option<f64>,
    #[arg(long)]
    cx: Option<f64>,
    #[arg(long)]
    cy: Option<f64>,
}

#[derive(Args)]
struct RenderArgs {
    /// Input color frame, binary PPM.
    #[arg(long)]
    input: PathBuf,
    /// Input depth raster, PFM.
    #[arg(long)]
    depth: PathBuf,
    /// Trajectory spec, JSON.
    #[arg(long)]
    trajectory: PathBuf,
    /// Expected frame count; must match the trajectory when given.
    #[arg(long)]
    frames: Option<usize>,
    #[arg(long, value_enum, default_value_t = FillerArg::Diffuse)]
    filler: FillerArg,
    /// Orbit focus distance fallback when the spec names none.
    #[arg(long)]
    focus: Option<f64>,
    #[command(flatten)]
    camera: CameraArgs,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct GenerateArgs {
    #[arg(long, required_unless_present = "from_manifest", conflicts_with = "from_manifest")]
    input: Option<PathBuf>,
    #[arg(long, required_unless_present = "from_manifest", conflicts_with = "from_manifest")]
    depth: Option<PathBuf>,
    #[arg(long, required_unless_present = "from_manifest", conflicts_with = "from_manifest")]
    trajectory: Option<PathBuf>,
    /// Expected frame count; must match the trajectory when given.
    #[arg(long, conflicts_with = "from_manifest")]
    frames: Option<usize>,
    /// Sampling ladder length.
    #[arg(long, default_value_t = 25, conflicts_with = "from_manifest")]
    steps: usize,
    /// Ladder index to invert to; 0 skips resampling entirely.
    #[arg(long, default_value_t = 15, conflicts_with = "from_manifest")]
    t0: usize,
    #[arg(long, default_value_t = 1.0, conflicts_with = "from_manifest")]
    eta: f64,
    #[arg(long, default_value_t = 0, conflicts_with = "from_manifest")]
    seed: u64,
    #[arg(long, value_enum, default_value_t = NoiseModeArg::Independent, conflicts_with = "from_manifest")]
    noise_mode: NoiseModeArg,
    #[arg(long, value_enum, default_value_t = FillerArg::Diffuse, conflicts_with = "from_manifest")]
    filler: FillerArg,
    #[arg(long, value_enum, default_value_t = DenoiserArg::Smoothing, conflicts_with = "from_manifest")]
    denoiser: DenoiserArg,
    /// Orbit focus distance fallback when the spec names none.
    #[arg(long, conflicts_with = "from_manifest")]
    focus: Option<f64>,
    #[command(flatten)]
    camera: CameraArgs,
    /// Rerun a previous generate exactly as its run.json records.
    #[arg(long)]
    from_manifest: Option<PathBuf>,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct EvaluateArgs {
    /// Estimated pose track.
    #[arg(long)]
    estimate: PathBuf,
    /// Reference pose track.
    #[arg(long)]
    reference: PathBuf,
    /// Frame gap for relative pose error.
    #[arg(long, default_value_t = 1)]
    delta: usize,
    /// Align with a similarity (scale + rigid) instead of rigid only.
    #[arg(long, default_value_t = true, action = clap::ArgAction::Set)]
    with_scale: bool,
    /// Report path; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ExportArgs {
    /// Trajectory spec, JSON.
    #[arg(long)]
    trajectory: PathBuf,
    /// Orbit focus distance fallback when the spec names none.
    #[arg(long)]
    focus: Option<f64>,
    /// Pose track path; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum FillerArg {
    Constant,
    Diffuse,
}

impl FillerArg {
    fn name(self) -> &'static str {
        match self {
            FillerArg::Constant => "constant",
            FillerArg::Diffuse => "diffuse",
        }
    }

    fn from_name(name: &str) -> Option<FillerArg> {
        match name {
            "constant" => Some(FillerArg::Constant),
            "diffuse" => Some(FillerArg::Diffuse),
            _ => None,
        }
    }

    fn build(self) -> Box<dyn Filler> {
        match self {
            FillerArg::Constant => Box::new(ConstantFiller::default()),
            FillerArg::Diffuse => Box::new(DiffuseFiller::default()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum DenoiserArg {
    Smoothing,
    Oracle,
}

impl DenoiserArg {
    fn name(self) -> &'static str {
        match self {
            DenoiserArg::Smoothing => "smoothing",
            DenoiserArg::Oracle => "oracle",
        }
    }

    fn from_name(name: &str) -> Option<DenoiserArg> {
        match name {
            "smoothing" => Some(DenoiserArg::Smoothing),
            "oracle" => Some(DenoiserArg::Oracle),
            _ => None,
        }
    }

    fn choice(self) -> DenoiserChoice<'static> {
        match self {
            DenoiserArg::Smoothing => DenoiserChoice::Smoothing,
            DenoiserArg::Oracle => DenoiserChoice::Oracle,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum NoiseModeArg {
    Independent,
    Shared,
}

impl NoiseModeArg {
    fn mode(self) -> vantage_core::diffusion::NoiseMode {
        match self {
            NoiseModeArg::Independent => vantage_core::diffusion::NoiseMode::Independent,
            NoiseModeArg::Shared => vantage_core::diffusion::NoiseMode::Shared,
        }
    }
}

/// A command failure carrying its process exit code.
struct Failure {
    code: i32,
    message: String,
}

/// Invalid configuration or unusable input: exit 2.
fn usage(message: impl Display) -> Failure {
    Failure { code: 2, message: message.to_string() }
}

/// Runtime failure inside a pipeline stage or while writing output: exit 3.
fn stage_failure(message: impl Display) -> Failure {
    Failure { code: 3, message: message.to_string() }
}

impl From<PipelineError> for Failure {
    fn from(e: PipelineError) -> Failure {
        match &e {
            PipelineError::InvalidConfig(_) | PipelineError::InvalidInput(_) => usage(e),
            PipelineError::StageOne(_) | PipelineError::Diffusion(_) => stage_failure(e),
        }
    }
}

pub fn run() -> i32 {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 2,
            };
            let _ = e.print();
            return code;
        }
    };
    let result = match cli.command {
        Command::SynthScene(args) => cmd_synth_scene(args),
        Command::RenderTrajectory(args) => cmd_render_trajectory(args),
        Command::Generate(args) => cmd_generate(args),
        Command::Evaluate(args) => cmd_evaluate(args),
        Command::ExportPoses(args) => cmd_export_poses(args),
    };
    match result {
        Ok(()) => 0,
        Err(f) => {
            eprintln!("error: {}", f.message);
            f.code
        }
    }
}

fn read_input(path: &Path) -> Result<Vec<u8>, Failure> {
    std::fs::read(path).map_err(|e| usage(format!("{}: {e}", path.display())))
}

fn read_input_text(path: &Path) -> Result<String, Failure> {
    std::fs::read_to_string(path).map_err(|e| usage(format!("{}: {e}", path.display())))
}

fn write_output(path: &Path, bytes: &[u8]) -> Result<(), Failure> {
    std::fs::write(path, bytes).map_err(|e| stage_failure(format!("{}: {e}", path.display())))
}

fn create_out_dir(path: &Path) -> Result<(), Failure> {
    std::fs::create_dir_all(path)
        .map_err(|e| stage_failure(format!("{}: {e}", path.display())))
}

fn load_frame(color_path: &Path, depth_path: &Path) -> Result<RgbdFrame, Failure> {
    let color = decode_ppm(&read_input(color_path)?)
        .map_err(|e| usage(format!("{}: {e}", color_path.display())))?;
    let depth = decode_pfm(&read_input(depth_path)?)
        .map_err(|e| usage(format!("{}: {e}", depth_path.display())))?;
    RgbdFrame::new(dequantize_color(&color), depth).map_err(usage)
}

fn camera_for(frame: &RgbdFrame, overrides: &CameraArgs) -> Result<PinholeCamera, Failure> {
    let base = PinholeCamera::default_for(frame.width(), frame.height()).map_err(usage)?;
    PinholeCamera::new(
        overrides.fx.unwrap_or(base.fx),
        overrides.fy.unwrap_or(base.fy),
        overrides.cx.unwrap_or(base.cx),
        overrides.cy.unwrap_or(base.cy),
        base.width,
        base.height,
    )
    .map_err(usage)
}

/// Focus fallback for the orbit kind: an explicit value wins, otherwise the
/// central depth patch. Returns the spec's own value when it has one so the
/// result can be recorded in the manifest as the effective focus.
fn resolve_focus(
    spec: &TrajectorySpec,
    explicit: Option<f64>,
    depth: Option<&ScalarRaster>,
) -> Result<Option<f64>, Failure> {
    if let Some(f) = spec.focus_distance {
        return Ok(Some(f));
    }
    let needs_focus = spec
        .motions
        .as_ref()
        .is_some_and(|ms| ms.iter().any(|m| m.kind == KindSpec::Rotate));
    if !needs_focus {
        return Ok(None);
    }
    if let Some(f) = explicit {
        return Ok(Some(f));
    }
    let Some(depth) = depth else {
        return Err(usage("a rotate motion needs --focus or a focus_distance in the spec"));
    };
    estimate_focus_distance(depth, DEFAULT_FOCUS_PATCH_HALF_WIDTH)
        .map(Some)
        .map_err(|e| usage(format!("cannot estimate focus distance: {e}")))
}

fn load_trajectory(
    path: &Path,
    explicit_focus: Option<f64>,
    depth: Option<&ScalarRaster>,
    expected_frames: Option<usize>,
) -> Result<(Trajectory, Option<f64>), Failure> {
    let spec = parse_spec(&read_input_text(path)?)
        .map_err(|e| usage(format!("{}: {e}", path.display())))?;
    let focus = resolve_focus(&spec, explicit_focus, depth)?;
    let trajectory = build_trajectory(&spec, focus)
        .map_err(|e| usage(format!("{}: {e}", path.display())))?;
    if let Some(expected) = expected_frames {
        if trajectory.len() != expected {
            return Err(usage(format!(
                "trajectory has {} poses but {expected} frames were requested",
                trajectory.len()
            )));
        }
    }
    Ok((trajectory, focus))
}

fn frame_name(i: usize) -> String {
    format!("frame_{i:04}.ppm")
}

fn mask_name(i: usize) -> String {
    format!("mask_{i:04}.pgm")
}

fn write_frames_and_masks(
    out: &Path,
    frames: &[ColorRaster],
    renders: &[RenderResult],
) -> Result<(), Failure> {
    for (i, frame) in frames.iter().enumerate() {
        write_output(&out.join(frame_name(i)), &encode_ppm(&quantize_color(frame)))?;
    }
    for (i, render) in renders.iter().enumerate() {
        write_output(&out.join(mask_name(i)), &encode_pgm(&mask_to_gray(&render.mask)))?;
    }
    Ok(())
}

fn cmd_synth_scene(args: SynthSceneArgs) -> Result<(), Failure> {
    let camera = PinholeCamera::default_for(args.width, args.height).map_err(usage)?;
    let (_, frame) = synth_scene(args.seed, &camera);
    create_out_dir(&args.out)?;
    write_output(&args.out.join("color.ppm"), &encode_ppm(&quantize_color(&frame.color)))?;
    write_output(&args.out.join("depth.pfm"), &encode_pfm(&frame.depth))?;
    println!(
        "wrote {}x{} scene (seed {}) to {}",
        args.width,
        args.height,
        args.seed,
        args.out.display()
    );
    Ok(())
}

fn cmd_render_trajectory(args: RenderArgs) -> Result<(), Failure> {
    let input = load_frame(&args.input, &args.depth)?;
    let camera = camera_for(&input, &args.camera)?;
    let (trajectory, focus) =
        load_trajectory(&args.trajectory, args.focus, Some(&input.depth), args.frames)?;
    let filler = args.filler.build();

    let inputs = ManifestInputs {
        color: args.input.display().to_string(),
        depth: args.depth.display().to_string(),
        trajectory: args.trajectory.display().to_string(),
    };
    let mut manifest = RunManifest {
        schema_version: MANIFEST_SCHEMA_VERSION,
        command: "render-trajectory".into(),
        rng_algorithm: RNG_ALGORITHM.into(),
        inputs,
        camera: CameraParams::from(&camera),
        frames: trajectory.len(),
        focus_distance: focus,
        sampling: None,
        filler: args.filler.name().into(),
        denoiser: None,
        inversion_seed: None,
        generation_seed: None,
        depth_coefficients: vec![],
        hole_fractions: vec![],
        no_overlap_views: vec![],
        failed_stage: None,
    };

    create_out_dir(&args.out)?;
    let stage = match vantage_core::cloud::stage_one(
        &input,
        &trajectory,
        &camera,
        filler.as_ref(),
        &RenderedDepthProvider,
    ) {
        Ok(stage) => stage,
        Err(e) => {
            manifest.failed_stage = Some("view-synthesis".into());
            write_json(&args.out.join(MANIFEST_FILE), &manifest)
                .map_err(|we| stage_failure(format!("{e}; additionally: {we}")))?;
            return Err(stage_failure(e));
        }
    };

    write_frames_and_masks(&args.out, &stage.frames, &stage.renders)?;
    write_output(&args.out.join("poses.txt"), encode_poses(trajectory.poses()).as_bytes())?;
    manifest.depth_coefficients = stage.depth_scales.clone();
    manifest.hole_fractions = stage.renders.iter().map(|r| r.hole_fraction()).collect();
    manifest.no_overlap_views = stage.no_overlap_views.clone();
    write_json(&args.out.join(MANIFEST_FILE), &manifest)
        .map_err(|e| stage_failure(format!("{MANIFEST_FILE}: {e}")))?;
    println!("wrote {} frames to {}", stage.frames.len(), args.out.display());
    Ok(())
}

/// Extracts one channel plane of one frame as a raster.
fn latent_plane(latents: &LatentSequence, n: usize, c: usize) -> ScalarRaster {
    let mut plane = ScalarRaster::new(latents.width(), latents.height());
    for y in 0..latents.height() {
        for x in 0..latents.width() {
            plane.set(x, y, latents.get(n, c, y, x));
        }
    }
    plane
}

fn write_latents(
    out: &Path,
    latents: &LatentSequence,
    metadata: &LatentMetadata,
) -> Result<(), Failure> {
    let dir = out.join("latents").join(format!("t{}", latents.timestep()));
    std::fs::create_dir_all(&dir).map_err(|e| stage_failure(format!("{}: {e}", dir.display())))?;
    for n in 0..latents.frames() {
        for c in 0..latents.channels() {
            let path = dir.join(format!("frame_{n}_c{c}.pfm"));
            write_output(&path, &encode_pfm(&latent_plane(latents, n, c)))?;
        }
    }
    write_json(&out.join("latents").join(LATENT_METADATA_FILE), metadata)
        .map_err(|e| stage_failure(format!("{LATENT_METADATA_FILE}: {e}")))?;
    Ok(())
}

fn cmd_generate(args: GenerateArgs) -> Result<(), Failure> {
    if args.from_manifest.is_some()
        && (args.camera.fx.is_some()
            || args.camera.fy.is_some()
            || args.camera.cx.is_some()
            || args.camera.cy.is_some())
    {
        return Err(usage("camera flags cannot be combined with --from-manifest"));
    }
    // Either replay a recorded run or assemble one from flags.
    let (inputs, config, filler_arg, denoiser_arg, explicit_focus, expected_frames, camera_from_manifest) =
        if let Some(manifest_path) = &args.from_manifest {
            let recorded = read_manifest(manifest_path)
                .map_err(|e| usage(format!("{}: {e}", manifest_path.display())))?;
            let config = recorded.to_pipeline_config().ok_or_else(|| {
                usage(format!(
                    "{}: records a render-only run, nothing to regenerate",
                    manifest_path.display()
                ))
            })?;
            let filler_arg = FillerArg::from_name(&recorded.filler)
                .ok_or_else(|| usage(format!("manifest names unknown filler {:?}", recorded.filler)))?;
            let denoiser_name = recorded.denoiser.clone().unwrap_or_else(|| "smoothing".into());
            let denoiser_arg = DenoiserArg::from_name(&denoiser_name)
                .ok_or_else(|| usage(format!("manifest names unknown denoiser {denoiser_name:?}")))?;
            let camera = recorded.camera.to_camera().map_err(usage)?;
            (
                recorded.inputs.clone(),
                config,
                filler_arg,
                denoiser_arg,
                recorded.focus_distance,
                Some(recorded.frames),
                Some(camera),
            )
        } else {
            let inputs = ManifestInputs {
                color: args.input.as_ref().expect("clap enforces --input").display().to_string(),
                depth: args.depth.as_ref().expect("clap enforces --depth").display().to_string(),
                trajectory: args
                    .trajectory
                    .as_ref()
                    .expect("clap enforces --trajectory")
                    .display()
                    .to_string(),
            };
            let config = PipelineConfig {
                frames: 0, // patched after the trajectory is known
                sampling_step_count: args.steps,
                t0_index: args.t0,
                eta: args.eta,
                seed: args.seed,
                noise_mode: args.noise_mode.mode(),
                ..PipelineConfig::default()
            };
            (inputs, config, args.filler, args.denoiser, args.focus, args.frames, None)
        };

    let input = load_frame(Path::new(&inputs.color), Path::new(&inputs.depth))?;
    let camera = match camera_from_manifest {
        Some(c) => c,
        None => camera_for(&input, &args.camera)?,
    };
    let (trajectory, focus) = load_trajectory(
        Path::new(&inputs.trajectory),
        explicit_focus,
        Some(&input.depth),
        expected_frames,
    )?;
    let config = PipelineConfig { frames: trajectory.len(), ..config };
    let filler = filler_arg.build();

    let mut manifest = RunManifest {
        schema_version: MANIFEST_SCHEMA_VERSION,
        command: "generate".into(),
        rng_algorithm: RNG_ALGORITHM.into(),
        inputs,
        camera: CameraParams::from(&camera),
        frames: config.frames,
        focus_distance: focus,
        sampling: Some(sampling_params(&config)),
        filler: filler_arg.name().into(),
        denoiser: Some(denoiser_arg.name().into()),
        inversion_seed: None,
        generation_seed: None,
        depth_coefficients: vec![],
        hole_fractions: vec![],
        no_overlap_views: vec![],
        failed_stage: None,
    };

    create_out_dir(&args.out)?;
    let output = match pipeline::run(
        &input,
        &trajectory,
        &camera,
        &config,
        filler.as_ref(),
        &RenderedDepthProvider,
        denoiser_arg.choice(),
    ) {
        Ok(output) => output,
        Err(e) => {
            let stage_name = match &e {
                PipelineError::StageOne(_) => Some("view-synthesis"),
                PipelineError::Diffusion(_) => Some("generation"),
                _ => None,
            };
            let failure = Failure::from(e);
            if let Some(name) = stage_name {
                manifest.failed_stage = Some(name.into());
                write_json(&args.out.join(MANIFEST_FILE), &manifest)
                    .map_err(|we| stage_failure(format!("{}; additionally: {we}", failure.message)))?;
            }
            return Err(failure);
        }
    };

    write_frames_and_masks(&args.out, &output.frames, &output.stage.renders)?;
    write_output(&args.out.join("poses.txt"), encode_poses(trajectory.poses()).as_bytes())?;
    if let Some(inverted) = &output.inverted {
        let metadata = LatentMetadata {
            seed: config.seed,
            inversion_seed: output.inversion_seed,
            t0_index: config.t0_index,
            timestep: inverted.latents.timestep(),
            eta: config.eta,
            noise_mode: config.noise_mode.into(),
            schedule: sampling_params(&config).schedule,
            rng_algorithm: RNG_ALGORITHM.into(),
            frames: inverted.latents.frames(),
            channels: inverted.latents.channels(),
            height: inverted.latents.height(),
            width: inverted.latents.width(),
        };
        write_latents(&args.out, &inverted.latents, &metadata)?;
    }
    manifest.inversion_seed = Some(output.inversion_seed);
    manifest.generation_seed = Some(output.generation_seed);
    manifest.depth_coefficients = output.stage.depth_scales.clone();
    manifest.hole_fractions = output.hole_fractions();
    manifest.no_overlap_views = output.stage.no_overlap_views.clone();
    write_json(&args.out.join(MANIFEST_FILE), &manifest)
        .map_err(|e| stage_failure(format!("{MANIFEST_FILE}: {e}")))?;
    println!("wrote {} frames to {}", output.frames.len(), args.out.display());
    Ok(())
}

fn cmd_evaluate(args: EvaluateArgs) -> Result<(), Failure> {
    let estimate = decode_poses(&read_input_text(&args.estimate)?)
        .map_err(|e| usage(format!("{}: {e}", args.estimate.display())))?;
    let reference = decode_poses(&read_input_text(&args.reference)?)
        .map_err(|e| usage(format!("{}: {e}", args.reference.display())))?;
    let estimate = PoseTrack::new(estimate.poses().to_vec());
    let reference = PoseTrack::new(reference.poses().to_vec());
    let ate_value = ate(&estimate, &reference, args.with_scale).map_err(usage)?;
    let rpe_value = rpe(&estimate, &reference, args.delta).map_err(usage)?;
    let report = EvaluationReport {
        ate: ate_value,
        rpe_t: rpe_value.translation_rms,
        rpe_r: rpe_value.rotation_rms,
        n: estimate.len(),
        delta: args.delta,
        with_scale: args.with_scale,
    };
    match &args.out {
        Some(path) => write_json(path, &report)
            .map_err(|e| stage_failure(format!("{}: {e}", path.display())))?,
        None => print!("{}", crate::manifest::to_json_pretty(&report)),
    }
    Ok(())
}

fn cmd_export_poses(args: ExportArgs) -> Result<(), Failure> {
    let (trajectory, _) = load_trajectory(&args.trajectory, args.focus, None, None)?;
    let text = encode_poses(trajectory.poses());
    match &args.out {
        Some(path) => write_output(path, text.as_bytes())?,
        None => print!("{text}"),
    }
    Ok(())
}
