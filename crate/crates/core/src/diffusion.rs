//! Variance schedules, latent inversion, and stepwise generation.
//!
//! A clean latent stack is pushed to a chosen noise level through the
//! forward marginal (sqrt(abar) * V0 + sqrt(1 - abar) * eps) and walked
//! back down a sampling ladder with a pluggable noise predictor. Latents
//! live in normalized pixel space [-1, 1]; there is no learned
//! autoencoder. Every random draw comes from a seeded [`NoiseRng`], so
//! equal seeds give bit-identical stacks.

use alloc::boxed::Box;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use thiserror::Error;

use crate::rng::NoiseRng;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DiffusionError {
    #[error("beta range must satisfy 0 < start <= end < 1, got {start} .. {end}")]
    BadBetaRange { start: f64, end: f64 },
    #[error("total steps must be at least 1")]
    ZeroSteps,
    #[error("sampling step count {count} outside 1..={total}")]
    BadStepCount { count: usize, total: usize },
    #[error("timestep {t} outside 0..={total}")]
    BadTimestep { t: usize, total: usize },
    #[error("ladder index {index} outside 0..={count}")]
    BadLadderIndex { index: usize, count: usize },
    #[error("latent stack is at timestep {got}, expected {expected}")]
    TimestepMismatch { expected: usize, got: usize },
    #[error("step order requires t > t_prev, got t = {t}, t_prev = {t_prev}")]
    StepOrder { t: usize, t_prev: usize },
    #[error("eta must be finite and non-negative, got {0}")]
    BadEta(f64),
    #[error("latent dimensions must all be positive")]
    EmptyLatent,
    #[error("latent data length {got} does not match shape product {expected}")]
    DataLength { expected: usize, got: usize },
    #[error("{what} contains a non-finite value")]
    NonFinite { what: &'static str },
    #[error("latent values must lie in [-1, 1]")]
    OutOfRange,
    #[error("shape mismatch: expected {expected:?}, got {got:?}")]
    ShapeMismatch {
        expected: (usize, usize, usize, usize),
        got: (usize, usize, usize, usize),
    },
    #[error("schedule inconsistency at t = {t}, t_prev = {t_prev}: residual variance {defect}")]
    ScheduleInconsistency { t: usize, t_prev: usize, defect: f64 },
    #[error("denoiser failed at step {step}: {source}")]
    DenoiserFailed {
        step: usize,
        source: Box<DiffusionError>,
    },
    #[error("denoiser error: {0}")]
    Denoiser(String),
}

/// How the per-step noise rates are spaced.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ScheduleKind {
    /// beta linearly spaced on [start, end].
    Linear,
    /// sqrt(beta) linearly spaced; beta is its square.
    ScaledLinear,
}

pub const DEFAULT_TOTAL_STEPS: usize = 1000;
pub const DEFAULT_BETA_START: f64 = 1e-4;
pub const DEFAULT_BETA_END: f64 = 0.02;
pub const DEFAULT_SAMPLING_STEP_COUNT: usize = 25;

fn linspace(start: f64, end: f64, count: usize) -> Vec<f64> {
    if count == 1 {
        return vec![start];
    }
    (0..count)
        .map(|i| start + (end - start) * i as f64 / (count - 1) as f64)
        .collect()
}

/// Cumulative signal-retention table plus the sampling ladder.
///
/// `alpha_bar[t]` is the product of (1 - beta_s) for s <= t, with
/// `alpha_bar[0] = 1`; it is strictly decreasing and stays in (0, 1].
#[derive(Debug, Clone, PartialEq)]
pub struct NoiseSchedule {
    total_steps: usize,
    alpha_bar: Vec<f64>,
    sampling_steps: Vec<usize>,
}

impl NoiseSchedule {
    /// Builds the table. The sampling ladder starts as the full range
    /// `1..=total_steps`; trim it with [`NoiseSchedule::with_sampling_steps`].
    pub fn new(
        kind: ScheduleKind,
        total_steps: usize,
        beta_start: f64,
        beta_end: f64,
    ) -> Result<Self, DiffusionError> {
        if total_steps == 0 {
            return Err(DiffusionError::ZeroSteps);
        }
        let valid = beta_start.is_finite()
            && beta_end.is_finite()
            && beta_start > 0.0
            && beta_start <= beta_end
            && beta_end < 1.0;
        if !valid {
            return Err(DiffusionError::BadBetaRange {
                start: beta_start,
                end: beta_end,
            });
        }
        let betas: Vec<f64> = match kind {
            ScheduleKind::Linear => linspace(beta_start, beta_end, total_steps),
            ScheduleKind::ScaledLinear => {
                linspace(libm::sqrt(beta_start), libm::sqrt(beta_end), total_steps)
                    .into_iter()
                    .map(|s| s * s)
                    .collect()
            }
        };
        let mut alpha_bar = Vec::with_capacity(total_steps + 1);
        alpha_bar.push(1.0);
        let mut running = 1.0;
        for beta in &betas {
            running *= 1.0 - beta;
            alpha_bar.push(running);
        }
        let sampling_steps = (1..=total_steps).collect();
        Ok(Self {
            total_steps,
            alpha_bar,
            sampling_steps,
        })
    }

    /// Defaults: linear, 1000 steps, beta 1e-4 to 0.02, 25-step ladder.
    pub fn default_schedule() -> Self {
        Self::new(
            ScheduleKind::Linear,
            DEFAULT_TOTAL_STEPS,
            DEFAULT_BETA_START,
            DEFAULT_BETA_END,
        )
        .expect("defaults are valid")
        .with_sampling_steps(DEFAULT_SAMPLING_STEP_COUNT)
        .expect("default ladder fits")
    }

    /// Installs an evenly spaced sampling ladder of `count` steps:
    /// linspace over 1..=T, rounded to integers, deduplicated, ascending.
    /// `count == 1` keeps only the top step T.
    pub fn with_sampling_steps(mut self, count: usize) -> Result<Self, DiffusionError> {
        if count == 0 || count > self.total_steps {
            return Err(DiffusionError::BadStepCount {
                count,
                total: self.total_steps,
            });
        }
        let steps: Vec<usize> = if count == 1 {
            vec![self.total_steps]
        } else {
            let mut v: Vec<usize> = linspace(1.0, self.total_steps as f64, count)
                .into_iter()
                .map(|x| libm::round(x) as usize)
                .collect();
            v.dedup();
            v
        };
        self.sampling_steps = steps;
        Ok(self)
    }

    pub fn total_steps(&self) -> usize {
        self.total_steps
    }

    /// Retention product at a timestep; `t` must be in `0..=total_steps`.
    pub fn alpha_bar(&self, t: usize) -> f64 {
        self.alpha_bar[t]
    }

    pub fn sampling_steps(&self) -> &[usize] {
        &self.sampling_steps
    }

    /// Maps a ladder position to a timestep: 0 is the clean signal,
    /// position j >= 1 is `sampling_steps[j - 1]`.
    pub fn step_at(&self, ladder_index: usize) -> Result<usize, DiffusionError> {
        if ladder_index > self.sampling_steps.len() {
            return Err(DiffusionError::BadLadderIndex {
                index: ladder_index,
                count: self.sampling_steps.len(),
            });
        }
        Ok(if ladder_index == 0 {
            0
        } else {
            self.sampling_steps[ladder_index - 1]
        })
    }

    fn check_timestep(&self, t: usize) -> Result<(), DiffusionError> {
        if t > self.total_steps {
            return Err(DiffusionError::BadTimestep {
                t,
                total: self.total_steps,
            });
        }
        Ok(())
    }
}

/// A stack of per-frame latent images at one noise level.
///
/// Data is row-major over (frame, channel, row, column). `timestep`
/// records the noise level the stack lives at (0 = clean).
#[derive(Debug, Clone, PartialEq)]
pub struct LatentSequence {
    frames: usize,
    channels: usize,
    height: usize,
    width: usize,
    timestep: usize,
    data: Vec<f64>,
}

impl LatentSequence {
    pub fn new(
        frames: usize,
        channels: usize,
        height: usize,
        width: usize,
        timestep: usize,
        data: Vec<f64>,
    ) -> Result<Self, DiffusionError> {
        if frames == 0 || channels == 0 || height == 0 || width == 0 {
            return Err(DiffusionError::EmptyLatent);
        }
        let expected = frames * channels * height * width;
        if data.len() != expected {
            return Err(DiffusionError::DataLength {
                expected,
                got: data.len(),
            });
        }
        if !data.iter().all(|v| v.is_finite()) {
            return Err(DiffusionError::NonFinite {
                what: "latent data",
            });
        }
        Ok(Self {
            frames,
            channels,
            height,
            width,
            timestep,
            data,
        })
    }

    pub fn zeros(
        frames: usize,
        channels: usize,
        height: usize,
        width: usize,
        timestep: usize,
    ) -> Result<Self, DiffusionError> {
        let len = frames
            .checked_mul(channels)
            .and_then(|v| v.checked_mul(height))
            .and_then(|v| v.checked_mul(width))
            .ok_or(DiffusionError::EmptyLatent)?;
        Self::new(frames, channels, height, width, timestep, vec![0.0; len])
    }

    pub fn shape(&self) -> (usize, usize, usize, usize) {
        (self.frames, self.channels, self.height, self.width)
    }

    pub fn frames(&self) -> usize {
        self.frames
    }

    pub fn channels(&self) -> usize {
        self.channels
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn timestep(&self) -> usize {
        self.timestep
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    #[inline]
    fn index(&self, n: usize, c: usize, y: usize, x: usize) -> usize {
        debug_assert!(n < self.frames && c < self.channels && y < self.height && x < self.width);
        ((n * self.channels + c) * self.height + y) * self.width + x
    }

    #[inline]
    pub fn get(&self, n: usize, c: usize, y: usize, x: usize) -> f64 {
        self.data[self.index(n, c, y, x)]
    }

    #[inline]
    pub fn set(&mut self, n: usize, c: usize, y: usize, x: usize, value: f64) {
        let i = self.index(n, c, y, x);
        self.data[i] = value;
    }

    fn same_shape(&self, other: &LatentSequence) -> Result<(), DiffusionError> {
        if self.shape() != other.shape() {
            return Err(DiffusionError::ShapeMismatch {
                expected: self.shape(),
                got: other.shape(),
            });
        }
        Ok(())
    }
}

/// Whether inversion draws fresh noise per frame or reuses one frame's
/// worth of noise across the whole stack.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NoiseMode {
    Independent,
    Shared,
}

/// Inversion output: the noised stack plus the exact noise that produced
/// it, expanded to full stack shape so it can drive [`OracleDenoiser`].
#[derive(Debug, Clone, PartialEq)]
pub struct InversionResult {
    pub latents: LatentSequence,
    pub noise: LatentSequence,
}

/// Pushes a clean stack to the ladder position `t0_index` through the
/// forward marginal. The realized noise is returned alongside the result;
/// in shared mode one frame of noise is drawn and tiled.
pub fn invert(
    v0: &LatentSequence,
    t0_index: usize,
    schedule: &NoiseSchedule,
    seed: u64,
    mode: NoiseMode,
) -> Result<InversionResult, DiffusionError> {
    if v0.timestep != 0 {
        return Err(DiffusionError::TimestepMismatch {
            expected: 0,
            got: v0.timestep,
        });
    }
    if !v0.data.iter().all(|v| (-1.0 - 1e-9..=1.0 + 1e-9).contains(v)) {
        return Err(DiffusionError::OutOfRange);
    }
    let t0 = schedule.step_at(t0_index)?;
    let mut rng = NoiseRng::new(seed);
    let per_frame = v0.channels * v0.height * v0.width;
    let mut noise = vec![0.0; v0.data.len()];
    match mode {
        NoiseMode::Independent => rng.fill_standard_normal(&mut noise),
        NoiseMode::Shared => {
            rng.fill_standard_normal(&mut noise[..per_frame]);
            for n in 1..v0.frames {
                let (head, tail) = noise.split_at_mut(n * per_frame);
                tail[..per_frame].copy_from_slice(&head[..per_frame]);
            }
        }
    }
    let abar = schedule.alpha_bar(t0);
    let signal = libm::sqrt(abar);
    let spread = libm::sqrt(1.0 - abar);
    let data: Vec<f64> = v0
        .data
        .iter()
        .zip(&noise)
        .map(|(v, e)| signal * v + spread * e)
        .collect();
    Ok(InversionResult {
        latents: LatentSequence::new(v0.frames, v0.channels, v0.height, v0.width, t0, data)?,
        noise: LatentSequence::new(v0.frames, v0.channels, v0.height, v0.width, t0, noise)?,
    })
}

/// Noise predictor contract: same-shape prediction for a stack at step t.
/// Built-ins are deterministic for fixed inputs.
pub trait Denoiser {
    fn predict_noise(
        &self,
        latents: &LatentSequence,
        t: usize,
    ) -> Result<LatentSequence, DiffusionError>;
}

/// Stochastic mixing scale for one reverse update:
///   sigma = eta * sqrt((1 - abar_prev)/(1 - abar_t)) * sqrt(1 - abar_t/abar_prev)
/// Zero when eta = 0; eta = 1 matches the forward posterior variance.
pub fn noise_scale(
    schedule: &NoiseSchedule,
    t: usize,
    t_prev: usize,
    eta: f64,
) -> Result<f64, DiffusionError> {
    schedule.check_timestep(t)?;
    if t_prev >= t || t == 0 {
        return Err(DiffusionError::StepOrder { t, t_prev });
    }
    if !(eta.is_finite() && eta >= 0.0) {
        return Err(DiffusionError::BadEta(eta));
    }
    let abar_t = schedule.alpha_bar(t);
    let abar_prev = schedule.alpha_bar(t_prev);
    Ok(eta
        * libm::sqrt((1.0 - abar_prev) / (1.0 - abar_t))
        * libm::sqrt(1.0 - abar_t / abar_prev))
}

/// One reverse update from step `t` down to `t_prev`.
///
/// Predicts the clean signal from the noise estimate, then re-noises at
/// the lower level:
///   x0 = (V - sqrt(1 - abar_t) * eps_hat) / sqrt(abar_t)
///   out = sqrt(abar_prev) * x0 + sqrt(1 - abar_prev - sigma^2) * eps_hat + sigma * eps_new
/// with sigma from [`noise_scale`]. eta = 0 is fully deterministic. Fresh
/// noise is drawn from `seed` only when sigma > 0.
pub fn generation_step(
    v_t: &LatentSequence,
    t: usize,
    t_prev: usize,
    eps_hat: &LatentSequence,
    schedule: &NoiseSchedule,
    eta: f64,
    seed: u64,
) -> Result<LatentSequence, DiffusionError> {
    let sigma = noise_scale(schedule, t, t_prev, eta)?;
    if v_t.timestep != t {
        return Err(DiffusionError::TimestepMismatch {
            expected: t,
            got: v_t.timestep,
        });
    }
    v_t.same_shape(eps_hat)?;
    if !eps_hat.data.iter().all(|v| v.is_finite()) {
        return Err(DiffusionError::NonFinite {
            what: "noise prediction",
        });
    }

    let abar_t = schedule.alpha_bar(t);
    let abar_prev = schedule.alpha_bar(t_prev);
    let mut residual_var = 1.0 - abar_prev - sigma * sigma;
    if residual_var < 0.0 {
        // Round-off from the sigma product; anything beyond round-off
        // means the (eta, schedule) pair is inconsistent.
        if residual_var > -1e-12 {
            residual_var = 0.0;
        } else {
            return Err(DiffusionError::ScheduleInconsistency {
                t,
                t_prev,
                defect: residual_var,
            });
        }
    }
    let signal_t = libm::sqrt(abar_t);
    let spread_t = libm::sqrt(1.0 - abar_t);
    let signal_prev = libm::sqrt(abar_prev);
    let direction = libm::sqrt(residual_var);

    let mut rng = NoiseRng::new(seed);
    let data: Vec<f64> = v_t
        .data
        .iter()
        .zip(&eps_hat.data)
        .map(|(v, e)| {
            let x0 = (v - spread_t * e) / signal_t;
            let fresh = if sigma > 0.0 { rng.standard_normal() } else { 0.0 };
            signal_prev * x0 + direction * e + sigma * fresh
        })
        .collect();
    LatentSequence::new(v_t.frames, v_t.channels, v_t.height, v_t.width, t_prev, data)
}

/// Walks the sampling ladder from `t0_index` down to the clean signal,
/// one denoiser call per rung, and clamps the result to [-1, 1].
/// `t0_index = 0` returns the input unchanged.
pub fn generate(
    v_t0: &LatentSequence,
    t0_index: usize,
    denoiser: &dyn Denoiser,
    schedule: &NoiseSchedule,
    eta: f64,
    seed: u64,
) -> Result<LatentSequence, DiffusionError> {
    let t0 = schedule.step_at(t0_index)?;
    if v_t0.timestep != t0 {
        return Err(DiffusionError::TimestepMismatch {
            expected: t0,
            got: v_t0.timestep,
        });
    }
    if t0_index == 0 {
        return Ok(v_t0.clone());
    }
    let mut rng = NoiseRng::new(seed);
    let mut current = v_t0.clone();
    for j in (1..=t0_index).rev() {
        let t = schedule.sampling_steps[j - 1];
        let t_prev = if j >= 2 { schedule.sampling_steps[j - 2] } else { 0 };
        let eps_hat = denoiser
            .predict_noise(&current, t)
            .map_err(|e| DiffusionError::DenoiserFailed {
                step: t,
                source: Box::new(e),
            })?;
        current = generation_step(&current, t, t_prev, &eps_hat, schedule, eta, rng.next_seed())?;
    }
    for v in &mut current.data {
        *v = v.clamp(-1.0, 1.0);
    }
    Ok(current)
}

/// Built-in predictor that nudges the stack toward a smoothed version of
/// itself: the implied clean estimate is blurred with a 3x3 spatial box
/// (edge replication) and a (1/4, 1/2, 1/4) temporal kernel (clamped at
/// the ends), and the prediction is the noise that explains the gap:
///   eps_hat = (V - sqrt(abar_t) * S(V / sqrt(abar_t))) / sqrt(1 - abar_t)
#[derive(Debug, Clone)]
pub struct SmoothingDenoiser {
    pub schedule: NoiseSchedule,
}

fn box_blur_3x3(src: &LatentSequence) -> LatentSequence {
    let (frames, channels, height, width) = src.shape();
    let mut out = src.clone();
    for n in 0..frames {
        for c in 0..channels {
            for y in 0..height {
                for x in 0..width {
                    let mut sum = 0.0;
                    for dy in -1i64..=1 {
                        for dx in -1i64..=1 {
                            let yy = (y as i64 + dy).clamp(0, height as i64 - 1) as usize;
                            let xx = (x as i64 + dx).clamp(0, width as i64 - 1) as usize;
                            sum += src.get(n, c, yy, xx);
                        }
                    }
                    out.set(n, c, y, x, sum / 9.0);
                }
            }
        }
    }
    out
}

fn temporal_blur(src: &LatentSequence) -> LatentSequence {
    let (frames, channels, height, width) = src.shape();
    let mut out = src.clone();
    for n in 0..frames {
        let prev = n.saturating_sub(1);
        let next = (n + 1).min(frames - 1);
        for c in 0..channels {
            for y in 0..height {
                for x in 0..width {
                    let v = 0.25 * src.get(prev, c, y, x)
                        + 0.5 * src.get(n, c, y, x)
                        + 0.25 * src.get(next, c, y, x);
                    out.set(n, c, y, x, v);
                }
            }
        }
    }
    out
}

impl Denoiser for SmoothingDenoiser {
    fn predict_noise(
        &self,
        latents: &LatentSequence,
        t: usize,
    ) -> Result<LatentSequence, DiffusionError> {
        self.schedule.check_timestep(t)?;
        if t == 0 {
            return Err(DiffusionError::StepOrder { t, t_prev: 0 });
        }
        let abar = self.schedule.alpha_bar(t);
        let signal = libm::sqrt(abar);
        let spread = libm::sqrt(1.0 - abar);
        let mut implied = latents.clone();
        for v in &mut implied.data {
            *v /= signal;
        }
        let smoothed = temporal_blur(&box_blur_3x3(&implied));
        let data: Vec<f64> = latents
            .data
            .iter()
            .zip(&smoothed.data)
            .map(|(v, s)| (v - signal * s) / spread)
            .collect();
        LatentSequence::new(
            latents.frames,
            latents.channels,
            latents.height,
            latents.width,
            t,
            data,
        )
    }
}

/// Returns a stored noise stack regardless of the queried step. Feeding
/// it the noise realized during inversion makes eta = 0 generation undo
/// the forward marginal exactly, which is the backbone of the
/// reconstruction tests.
#[derive(Debug, Clone)]
pub struct OracleDenoiser {
    pub noise: LatentSequence,
}

impl Denoiser for OracleDenoiser {
    fn predict_noise(
        &self,
        latents: &LatentSequence,
        t: usize,
    ) -> Result<LatentSequence, DiffusionError> {
        latents.same_shape(&self.noise)?;
        let mut out = self.noise.clone();
        out.timestep = t;
        Ok(out)
    }
}
