//! Acceptance gate: ten numbered criteria, each a separate test with a
//! pinned tolerance and wall-clock budget. Every test prints one
//! `criterion NN PASS/FAIL` line (visible with `--nocapture`); the test
//! name itself carries the criterion number for the default report.

use std::time::{Duration, Instant};

use vantage_core::cloud::{
    lift, optimize_depth_scale, render, stage_one, ConstantFiller, PointCloud, RenderResult,
    RgbdFrame,
};
use vantage_core::diffusion::{
    generate, invert, noise_scale, NoiseMode, NoiseSchedule, ScheduleKind, SmoothingDenoiser,
};
use vantage_core::geometry::{
    build_primitive, combine, compose, orthonormality_defect, CameraPose, CombineMode, Mat3,
    MotionDirection, MotionKind, MotionPrimitive, PinholeCamera, Trajectory, Vec3,
};
use vantage_core::metrics::{ate, rpe, PoseTrack};
use vantage_core::pipeline::{self, DenoiserChoice, PipelineConfig};
use vantage_core::raster::{ColorRaster, MaskRaster, ScalarRaster};
use vantage_core::rng::NoiseRng;
use vantage_core::scene::{synth_scene, AnalyticDepthProvider, SceneFiller};

fn finish(id: usize, what: &str, start: Instant, budget: Duration) {
    let elapsed = start.elapsed();
    if elapsed <= budget {
        println!("criterion {id:2} PASS ({elapsed:.2?} of {budget:?} budget): {what}");
    } else {
        println!("criterion {id:2} FAIL (over budget: {elapsed:.2?} > {budget:?}): {what}");
        panic!("criterion {id} exceeded its {budget:?} budget: {elapsed:.2?}");
    }
}

fn primitive(
    kind: MotionKind,
    direction: MotionDirection,
    magnitude: f64,
    frames: usize,
    focus: Option<f64>,
) -> Trajectory {
    build_primitive(&MotionPrimitive { kind, direction, magnitude, frames }, focus).unwrap()
}

fn yaw(theta: f64) -> Mat3 {
    let (s, c) = theta.sin_cos();
    Mat3::new(c, 0.0, -s, 0.0, 1.0, 0.0, s, 0.0, c)
}

/// 1. Rendering the lifted input cloud from the input pose reproduces the
///    input exactly on every pixel.
#[test]
fn criterion_01_lift_render_round_trip_bit_exact() {
    let start = Instant::now();
    let camera = PinholeCamera::default_for(256, 256).unwrap();
    let (_, frame) = synth_scene(31, &camera);
    let identity = CameraPose::identity();
    let cloud = lift(&frame, &camera, &identity, 0).unwrap();
    let r = render(&cloud, &camera, &identity);
    assert_eq!(r.mask.count_true(), 256 * 256, "identity view must be fully covered");
    assert_eq!(r.color.data(), frame.color.data(), "color must round trip bit-exactly");
    assert_eq!(r.depth_buffer.data(), frame.depth.data(), "depth must round trip bit-exactly");
    finish(1, "lift/render round trip on 256x256 is bit-exact", start, Duration::from_secs(1));
}

/// Straightforward re-projection of every point followed by a per-pixel
/// minimum-depth scan; ties keep the earliest point.
fn brute_force_render(
    cloud: &PointCloud,
    camera: &PinholeCamera,
    pose: &CameraPose,
) -> RenderResult {
    let (w, h) = (camera.width, camera.height);
    let mut per_pixel: Vec<Vec<(f64, usize)>> = vec![Vec::new(); w * h];
    for (i, p) in cloud.positions().iter().enumerate() {
        let cam = pose.to_camera(p);
        if cam[2] <= 1e-4 {
            continue;
        }
        let u = (camera.fx * cam[0] / cam[2] + camera.cx).round();
        let v = (camera.fy * cam[1] / cam[2] + camera.cy).round();
        if u < 0.0 || v < 0.0 || u > (w - 1) as f64 || v > (h - 1) as f64 {
            continue;
        }
        per_pixel[v as usize * w + u as usize].push((cam[2], i));
    }
    let mut color = ColorRaster::new(w, h);
    let mut mask = MaskRaster::new(w, h);
    let mut depth = ScalarRaster::new(w, h);
    for (pixel, candidates) in per_pixel.iter().enumerate() {
        let mut best: Option<(f64, usize)> = None;
        for &(z, i) in candidates {
            best = match best {
                None => Some((z, i)),
                Some((bz, bi)) => {
                    if z < bz {
                        Some((z, i))
                    } else {
                        Some((bz, bi))
                    }
                }
            };
        }
        if let Some((z, i)) = best {
            let (x, y) = (pixel % w, pixel / w);
            color.set(x, y, cloud.colors()[i]);
            mask.set(x, y, true);
            depth.set(x, y, z);
        }
    }
    RenderResult { color, mask, depth_buffer: depth }
}

/// 2. The z-buffer splatter agrees with a brute-force oracle on random
///    clouds, including culled points and exact depth ties.
#[test]
fn criterion_02_zbuffer_matches_brute_force_oracle() {
    let start = Instant::now();
    let camera = PinholeCamera::default_for(64, 48).unwrap();
    let panned = *primitive(MotionKind::Pan, MotionDirection::Left, 11.0, 2, None).get(1);
    let mut rng = NoiseRng::new(0xACCE);
    for case in 0..100usize {
        let points = 500 + (case * 97) % 9_500;
        let mut cloud = PointCloud::with_capacity(points);
        for i in 0..points {
            let x = rng.next_uniform() * 6.0 - 3.0;
            let y = rng.next_uniform() * 6.0 - 3.0;
            let z = rng.next_uniform() * 6.5 - 0.5;
            let position = Vec3::new(x, y, z);
            let color = [rng.next_uniform(), rng.next_uniform(), rng.next_uniform()];
            cloud.push(position, color, 0);
            if i % 7 == 0 {
                // Exact duplicate position, different color: a depth tie
                // that must resolve to the earlier point.
                cloud.push(position, [color[0] * 0.5, 1.0 - color[1], color[2]], 0);
            }
        }
        let pose = if case % 2 == 0 { CameraPose::identity() } else { panned };
        let got = render(&cloud, &camera, &pose);
        let want = brute_force_render(&cloud, &camera, &pose);
        assert_eq!(got.mask.data(), want.mask.data(), "mask mismatch in case {case}");
        assert_eq!(got.color.data(), want.color.data(), "color mismatch in case {case}");
        assert_eq!(
            got.depth_buffer.data(),
            want.depth_buffer.data(),
            "depth mismatch in case {case}"
        );
    }
    finish(2, "z-buffer equals brute force on 100 random clouds", start, Duration::from_secs(10));
}

/// 3. A candidate view whose depth is off by a constant factor c gets its
///    coefficient recovered as 1/c by the overlap optimizer.
#[test]
fn criterion_03_depth_scale_recovery_inverts_injected_factor() {
    let start = Instant::now();
    let camera = PinholeCamera::default_for(96, 72).unwrap();
    let (scene, frame) = synth_scene(5, &camera);
    let cloud = lift(&frame, &camera, &CameraPose::identity(), 0).unwrap();
    let pose = *primitive(MotionKind::Truck, MotionDirection::Right, 0.35, 2, None).get(1);
    let analytic = scene.render(&camera, &pose);
    for &c in &[0.5, 0.8, 1.25, 2.0] {
        let case_start = Instant::now();
        let mut scaled_depth = analytic.depth.clone();
        for v in scaled_depth.data_mut() {
            *v *= c;
        }
        let candidate = RgbdFrame::new(analytic.color.clone(), scaled_depth).unwrap();
        let holes = render(&cloud, &camera, &pose).mask.invert();
        let d = optimize_depth_scale(&candidate, &holes, &camera, &pose, &cloud).unwrap();
        let expected = 1.0 / c;
        assert!(
            (d - expected).abs() <= 0.01 * expected,
            "scale {c}: recovered {d}, expected {expected} within 1%"
        );
        assert!(case_start.elapsed() <= Duration::from_secs(5), "case {c} over budget");
    }
    finish(3, "depth coefficients recover 1/c within 1%", start, Duration::from_secs(20));
}

fn scene_stage(
    size: (usize, usize),
    seed: u64,
    frames: usize,
) -> (PinholeCamera, RgbdFrame, Trajectory) {
    let camera = PinholeCamera::default_for(size.0, size.1).unwrap();
    let (_, frame) = synth_scene(seed, &camera);
    let trajectory = primitive(MotionKind::Zoom, MotionDirection::Out, 0.4, frames, None);
    (camera, frame, trajectory)
}

/// 4. With the noise-replaying denoiser and eta = 0, generation undoes
///    inversion exactly (up to 64-bit round-off) from every ladder depth.
#[test]
fn criterion_04_oracle_round_trip_reconstructs_clean_frames() {
    let start = Instant::now();
    let (camera, frame, trajectory) = scene_stage((64, 64), 77, 14);
    for &t0 in &[5usize, 10, 15, 20, 25] {
        let config = PipelineConfig {
            frames: 14,
            sampling_step_count: 25,
            t0_index: t0,
            eta: 0.0,
            seed: 900 + t0 as u64,
            ..PipelineConfig::default()
        };
        let output = pipeline::run(
            &frame,
            &trajectory,
            &camera,
            &config,
            &ConstantFiller::default(),
            &vantage_core::cloud::RenderedDepthProvider,
            DenoiserChoice::Oracle,
        )
        .unwrap();
        let mut max_err = 0.0f64;
        for (out, clean) in output.frames.iter().zip(&output.stage.frames) {
            for (a, b) in out.data().iter().zip(clean.data()) {
                max_err = max_err.max((a - b).abs());
            }
        }
        assert!(max_err < 1e-9, "t0 = {t0}: max abs error {max_err:.3e} >= 1e-9");
    }
    finish(
        4,
        "oracle denoiser at eta=0 reconstructs clean frames from t0 in {5,10,15,20,25}",
        start,
        Duration::from_secs(30),
    );
}

/// 5. The stochastic mixing scale matches its defining expression at
///    eta = 1 across the whole sampling ladder.
#[test]
fn criterion_05_noise_scale_matches_closed_form() {
    let start = Instant::now();
    for kind in [ScheduleKind::Linear, ScheduleKind::ScaledLinear] {
        let schedule = NoiseSchedule::new(kind, 1000, 1e-4, 0.02)
            .unwrap()
            .with_sampling_steps(25)
            .unwrap();
        for j in 1..=25usize {
            let t = schedule.step_at(j).unwrap();
            let t_prev = schedule.step_at(j - 1).unwrap();
            let sigma = noise_scale(&schedule, t, t_prev, 1.0).unwrap();
            let (abar_t, abar_prev) = (schedule.alpha_bar(t), schedule.alpha_bar(t_prev));
            let expected_sq = (1.0 - abar_prev) / (1.0 - abar_t) * (1.0 - abar_t / abar_prev);
            assert!(
                (sigma * sigma - expected_sq).abs() < 1e-12,
                "{kind:?} ladder {j}: sigma^2 = {} vs {expected_sq}",
                sigma * sigma
            );
        }
    }
    finish(5, "sigma_t^2 equals its closed form within 1e-12", start, Duration::from_secs(1));
}

/// 6. Deeper inversion points drift further from the warped frames: the
///    seed-averaged l2 distance is non-decreasing in t0.
#[test]
fn criterion_06_deviation_grows_with_inversion_depth() {
    let start = Instant::now();
    let (camera, frame, trajectory) = scene_stage((64, 64), 9, 14);
    let stage = stage_one(
        &frame,
        &trajectory,
        &camera,
        &vantage_core::cloud::DiffuseFiller::default(),
        &vantage_core::cloud::RenderedDepthProvider,
    )
    .unwrap();
    let schedule = NoiseSchedule::new(ScheduleKind::Linear, 1000, 1e-4, 0.02)
        .unwrap()
        .with_sampling_steps(25)
        .unwrap();
    let v0 = pipeline::latents_from_rasters(&stage.frames, 0).unwrap();
    let denoiser = SmoothingDenoiser { schedule: schedule.clone() };

    let mut means = Vec::new();
    for &t0 in &[5usize, 10, 15, 20] {
        let mut total = 0.0;
        for k in 0..20u64 {
            let mut master = NoiseRng::new(4_000 + k);
            let inv_seed = master.next_seed();
            let gen_seed = master.next_seed();
            let inverted =
                invert(&v0, t0, &schedule, inv_seed, NoiseMode::Independent).unwrap();
            let out =
                generate(&inverted.latents, t0, &denoiser, &schedule, 1.0, gen_seed).unwrap();
            let dist: f64 = out
                .data()
                .iter()
                .zip(v0.data())
                .map(|(a, b)| (a - b) * (a - b))
                .sum::<f64>()
                .sqrt();
            total += dist;
        }
        means.push(total / 20.0);
    }
    for pair in means.windows(2) {
        assert!(
            pair[1] >= pair[0],
            "mean l2 distances must be non-decreasing in t0, got {means:?}"
        );
    }
    finish(
        6,
        "smoothing-denoiser deviation is non-decreasing across t0 in {5,10,15,20}",
        start,
        Duration::from_secs(300),
    );
}

/// 7. Closed trajectories end where they started and every pose stays
///    orthonormal.
#[test]
fn criterion_07_trajectory_closure_and_orthonormality() {
    let start = Instant::now();
    let orbit =
        primitive(MotionKind::Rotate, MotionDirection::Clockwise, 360.0, 36, Some(2.0));
    let out_and_back = combine(
        &[
            primitive(MotionKind::Pan, MotionDirection::Right, 20.0, 8, None),
            primitive(MotionKind::Pan, MotionDirection::Left, 20.0, 8, None),
        ],
        CombineMode::Sequential,
    )
    .unwrap();
    for (name, track) in [("orbit", &orbit), ("pan out-and-back", &out_and_back)] {
        let last = track.poses().last().unwrap();
        assert!(last.is_identity(1e-9), "{name} must close to the identity");
        for (i, pose) in track.poses().iter().enumerate() {
            let defect = orthonormality_defect(pose.rotation());
            assert!(defect <= 1e-9, "{name} pose {i}: orthonormality defect {defect:.3e}");
        }
    }
    finish(7, "360-degree orbit and pan out-and-back close within 1e-9", start, Duration::from_secs(1));
}

/// 8. ATE vanishes under any global similarity of the estimate, and a
///    single injected relative rotation scores exactly its closed form.
#[test]
fn criterion_08_metric_identities() {
    let start = Instant::now();

    // Orbit-with-pedestal reference: camera centers spread on a curve, so
    // the alignment is fully determined.
    let reference_track = combine(
        &[
            primitive(MotionKind::Rotate, MotionDirection::Clockwise, 90.0, 12, Some(2.0)),
            primitive(MotionKind::Pedestal, MotionDirection::Down, 0.6, 12, None),
        ],
        CombineMode::Simultaneous,
    )
    .unwrap();

    // Apply a global similarity: centers c -> s R c + t, orientations
    // R_p -> R_p R^T.
    let s = 1.6;
    let r_s = yaw(0.7)
        * Mat3::new(1.0, 0.0, 0.0, 0.0, 0.4f64.cos(), 0.4f64.sin(), 0.0, -(0.4f64.sin()), 0.4f64.cos());
    let t_s = Vec3::new(0.3, -0.2, 0.7);
    let transformed: Vec<CameraPose> = reference_track
        .poses()
        .iter()
        .map(|p| {
            let center = s * (r_s * p.center()) + t_s;
            let rotation = p.rotation() * r_s.transpose();
            let translation = -(rotation * center);
            CameraPose::new(rotation, translation).unwrap()
        })
        .collect();
    let reference = PoseTrack::new(reference_track.poses().to_vec());
    let estimate = PoseTrack::new(transformed);
    let ate_value = ate(&estimate, &reference, true).unwrap();
    assert!(ate_value <= 1e-9, "ATE under a global similarity: {ate_value:.3e}");

    // Inject one 10-degree relative rotation into a 10-pose track; with
    // delta = 1 there are 9 windows, so the RMS is theta / 3.
    let base = primitive(MotionKind::Rotate, MotionDirection::Clockwise, 60.0, 10, Some(2.0));
    let theta = 10.0f64.to_radians();
    let w = CameraPose::new(yaw(theta), Vec3::zeros()).unwrap();
    let mut poses = vec![*base.get(0)];
    for i in 0..9 {
        let rel = compose(base.get(i + 1), &base.get(i).inverse());
        let rel = if i == 4 { compose(&w, &rel) } else { rel };
        poses.push(compose(&rel, poses.last().unwrap()));
    }
    let corrupted = PoseTrack::new(poses);
    let clean = PoseTrack::new(base.poses().to_vec());
    let result = rpe(&corrupted, &clean, 1).unwrap();
    let expected = theta / 3.0;
    assert!(
        (result.rotation_rms - expected).abs() < 1e-9,
        "rpe_r = {}, closed form {expected}",
        result.rotation_rms
    );
    finish(8, "ATE similarity invariance and closed-form RPE", start, Duration::from_secs(1));
}

/// 9. Two identical CLI invocations produce byte-identical frames and
///    manifests.
#[test]
fn criterion_09_cli_generate_is_deterministic() {
    let start = Instant::now();
    let dir = tempfile::tempdir().unwrap();
    let run = |args: &[&str]| {
        let out = std::process::Command::new(env!("CARGO_BIN_EXE_vantage"))
            .args(args)
            .current_dir(dir.path())
            .output()
            .expect("binary runs");
        assert_eq!(
            out.status.code(),
            Some(0),
            "stderr: {}",
            String::from_utf8_lossy(&out.stderr)
        );
    };
    run(&["synth-scene", "--seed", "17", "--width", "128", "--height", "128", "--out", "in"]);
    std::fs::write(
        dir.path().join("traj.json"),
        r#"{"motions": [{"kind": "zoom", "direction": "out", "magnitude": 0.4, "frames": 14}]}"#,
    )
    .unwrap();
    let generate_args = |out: &str| {
        vec![
            "generate".to_string(),
            "--input".into(),
            "in/color.ppm".into(),
            "--depth".into(),
            "in/depth.pfm".into(),
            "--trajectory".into(),
            "traj.json".into(),
            "--steps".into(),
            "25".into(),
            "--t0".into(),
            "15".into(),
            "--seed".into(),
            "99".into(),
            "--out".into(),
            out.into(),
        ]
    };
    for out in ["a", "b"] {
        let args = generate_args(out);
        run(&args.iter().map(String::as_str).collect::<Vec<_>>());
    }
    for i in 0..14 {
        for pattern in ["frame_{:04}.ppm", "mask_{:04}.pgm"] {
            let name = pattern.replace("{:04}", &format!("{i:04}"));
            let a = std::fs::read(dir.path().join("a").join(&name)).unwrap();
            let b = std::fs::read(dir.path().join("b").join(&name)).unwrap();
            assert_eq!(a, b, "{name} differs between identical runs");
        }
    }
    let a = std::fs::read(dir.path().join("a/run.json")).unwrap();
    let b = std::fs::read(dir.path().join("b/run.json")).unwrap();
    assert_eq!(a, b, "manifests differ between identical runs");
    finish(
        9,
        "CLI generate twice with one seed: frames and manifest bit-identical",
        start,
        Duration::from_secs(120),
    );
}

/// 10. With analytic depth and an analytic filler, warped views agree with
///     direct renders of the scene wherever the cloud covered pixels.
#[test]
fn criterion_10_warped_views_match_analytic_renders() {
    let start = Instant::now();
    let camera = PinholeCamera::default_for(96, 72).unwrap();
    let (scene, frame) = synth_scene(2024, &camera);
    let tolerance = 1.0 / 255.0;
    let trajectories = [
        ("zoom out", primitive(MotionKind::Zoom, MotionDirection::Out, 0.5, 8, None)),
        ("truck right", primitive(MotionKind::Truck, MotionDirection::Right, 0.5, 8, None)),
    ];
    for (name, trajectory) in &trajectories {
        let stage = stage_one(
            &frame,
            trajectory,
            &camera,
            &SceneFiller { scene: &scene },
            &AnalyticDepthProvider { scene: &scene },
        )
        .unwrap();
        for (view, pose) in trajectory.poses().iter().enumerate() {
            let analytic = scene.render(&camera, pose);
            let mask = &stage.renders[view].mask;
            let mut worst = 0.0f64;
            for y in 0..72 {
                for x in 0..96 {
                    if !mask.get(x, y) {
                        continue;
                    }
                    let got = stage.frames[view].get(x, y);
                    let want = analytic.color.get(x, y);
                    for c in 0..3 {
                        worst = worst.max((got[c] - want[c]).abs());
                    }
                }
            }
            assert!(
                worst <= tolerance,
                "{name} view {view}: worst channel error {worst:.5} > 1/255"
            );
        }
    }
    finish(
        10,
        "zoom-out and truck-right warps match analytic renders within 1/255",
        start,
        Duration::from_secs(60),
    );
}
