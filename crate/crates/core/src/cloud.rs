//! Stage one: RGB-D lifting, z-buffered point splatting, hole filling,
//! and per-view depth-scale optimization.
//!
//! The loop in [`stage_one`] grows a world point cloud one view at a time:
//! render the cloud at the next pose, fill the uncovered pixels, attach
//! candidate depth to the filled image, solve for the scalar depth
//! coefficient that best aligns the candidate with the existing cloud on
//! the overlap, then lift only the hole pixels into the cloud.

use alloc::boxed::Box;
use alloc::collections::VecDeque;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use thiserror::Error;

use crate::geometry::{CameraPose, PinholeCamera, Trajectory, Vec3};
use crate::raster::{ColorRaster, MaskRaster, ScalarRaster};

/// Points at or closer than this camera-frame depth are culled before
/// projection.
pub const DEFAULT_Z_NEAR: f64 = 1e-4;

/// Depth-scale search range (in log space) and stopping width.
const SCALE_MIN: f64 = 0.25;
const SCALE_MAX: f64 = 4.0;
const SCALE_GRID: usize = 64;
const SCALE_LOG_TOL: f64 = 1e-4;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CloudError {
    #[error("{what}: expected {expected_w}x{expected_h}, got {got_w}x{got_h}")]
    DimensionMismatch {
        what: &'static str,
        expected_w: usize,
        expected_h: usize,
        got_w: usize,
        got_h: usize,
    },
    #[error("{what} contains a non-finite value")]
    NonFinite { what: &'static str },
    #[error("depth at ({x}, {y}) is negative: {value}")]
    NegativeDepth { x: usize, y: usize, value: f64 },
    #[error("no pixel had valid depth to lift")]
    EmptyCloud,
    #[error("filler failed: {0}")]
    FillerFailed(String),
    #[error("depth provider failed: {0}")]
    DepthProviderFailed(String),
    #[error("overlap region is empty, no depth scale can be estimated")]
    NoOverlap,
    #[error("render produced no valid depth to extend")]
    EmptyDepthBuffer,
    #[error("trajectory must start at the identity pose")]
    FirstPoseNotIdentity,
    #[error("view {view}: {source}")]
    AtView { view: usize, source: Box<CloudError> },
}

impl CloudError {
    fn at_view(self, view: usize) -> CloudError {
        CloudError::AtView { view, source: Box::new(self) }
    }
}

/// A color image with per-pixel depth. Depth 0 marks an invalid pixel;
/// valid depths are strictly positive.
#[derive(Debug, Clone, PartialEq)]
pub struct RgbdFrame {
    pub color: ColorRaster,
    pub depth: ScalarRaster,
}

impl RgbdFrame {
    pub fn new(color: ColorRaster, depth: ScalarRaster) -> Result<Self, CloudError> {
        if color.width() != depth.width() || color.height() != depth.height() {
            return Err(CloudError::DimensionMismatch {
                what: "depth raster",
                expected_w: color.width(),
                expected_h: color.height(),
                got_w: depth.width(),
                got_h: depth.height(),
            });
        }
        if !color.is_finite() {
            return Err(CloudError::NonFinite { what: "color" });
        }
        for y in 0..depth.height() {
            for x in 0..depth.width() {
                let d = depth.get(x, y);
                if !d.is_finite() {
                    return Err(CloudError::NonFinite { what: "depth" });
                }
                if d < 0.0 {
                    return Err(CloudError::NegativeDepth { x, y, value: d });
                }
            }
        }
        Ok(Self { color, depth })
    }

    pub fn width(&self) -> usize {
        self.color.width()
    }

    pub fn height(&self) -> usize {
        self.color.height()
    }
}

/// World-frame point set with per-point color and originating view index.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct PointCloud {
    positions: Vec<Vec3>,
    colors: Vec<[f64; 3]>,
    source_views: Vec<u32>,
}

impl PointCloud {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with_capacity(n: usize) -> Self {
        Self {
            positions: Vec::with_capacity(n),
            colors: Vec::with_capacity(n),
            source_views: Vec::with_capacity(n),
        }
    }

    pub fn push(&mut self, position: Vec3, color: [f64; 3], source_view: u32) {
        self.positions.push(position);
        self.colors.push(color);
        self.source_views.push(source_view);
    }

    pub fn len(&self) -> usize {
        self.positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }

    pub fn positions(&self) -> &[Vec3] {
        &self.positions
    }

    pub fn colors(&self) -> &[[f64; 3]] {
        &self.colors
    }

    pub fn source_views(&self) -> &[u32] {
        &self.source_views
    }
}

/// Concatenates two clouds; `additions` keeps its point order after the
/// points of `cloud`.
pub fn merge(cloud: &PointCloud, additions: &PointCloud) -> PointCloud {
    let mut out = PointCloud::with_capacity(cloud.len() + additions.len());
    out.positions.extend_from_slice(&cloud.positions);
    out.colors.extend_from_slice(&cloud.colors);
    out.source_views.extend_from_slice(&cloud.source_views);
    out.positions.extend_from_slice(&additions.positions);
    out.colors.extend_from_slice(&additions.colors);
    out.source_views.extend_from_slice(&additions.source_views);
    out
}

fn check_camera_frame(
    camera: &PinholeCamera,
    width: usize,
    height: usize,
) -> Result<(), CloudError> {
    if camera.width != width || camera.height != height {
        return Err(CloudError::DimensionMismatch {
            what: "camera raster size",
            expected_w: width,
            expected_h: height,
            got_w: camera.width,
            got_h: camera.height,
        });
    }
    Ok(())
}

/// Camera-frame position of pixel (u, v) at depth d.
#[inline]
fn backproject(camera: &PinholeCamera, u: usize, v: usize, d: f64) -> Vec3 {
    Vec3::new(
        (u as f64 - camera.cx) * d / camera.fx,
        (v as f64 - camera.cy) * d / camera.fy,
        d,
    )
}

/// Lifts every valid-depth pixel into a world-frame point cloud.
/// `source_view` is stamped on each produced point.
pub fn lift(
    frame: &RgbdFrame,
    camera: &PinholeCamera,
    pose: &CameraPose,
    source_view: u32,
) -> Result<PointCloud, CloudError> {
    check_camera_frame(camera, frame.width(), frame.height())?;
    let cloud = lift_masked(frame, None, 1.0, camera, pose, source_view);
    if cloud.is_empty() {
        return Err(CloudError::EmptyCloud);
    }
    Ok(cloud)
}

/// Lift restricted to mask-true pixels (all pixels when `mask` is `None`),
/// with depth multiplied by `depth_scale`. Pixels with non-positive depth
/// are skipped, so the result may be empty.
pub fn lift_masked(
    frame: &RgbdFrame,
    mask: Option<&MaskRaster>,
    depth_scale: f64,
    camera: &PinholeCamera,
    pose: &CameraPose,
    source_view: u32,
) -> PointCloud {
    let mut cloud = PointCloud::new();
    for v in 0..frame.height() {
        for u in 0..frame.width() {
            if let Some(m) = mask {
                if !m.get(u, v) {
                    continue;
                }
            }
            let d = frame.depth.get(u, v) * depth_scale;
            if d <= 0.0 {
                continue;
            }
            let world = pose.to_world(&backproject(camera, u, v, d));
            cloud.push(world, frame.color.get(u, v), source_view);
        }
    }
    cloud
}

/// One rendered view of a point cloud. `mask` is true exactly where some
/// point landed; `color` and `depth_buffer` are zero elsewhere.
#[derive(Debug, Clone, PartialEq)]
pub struct RenderResult {
    pub color: ColorRaster,
    pub mask: MaskRaster,
    pub depth_buffer: ScalarRaster,
}

impl RenderResult {
    pub fn width(&self) -> usize {
        self.color.width()
    }

    pub fn height(&self) -> usize {
        self.color.height()
    }

    /// Fraction of pixels with no point coverage.
    pub fn hole_fraction(&self) -> f64 {
        let total = self.color.pixel_count();
        (total - self.mask.count_true()) as f64 / total as f64
    }
}

const NO_WINNER: u32 = u32::MAX;

/// Z-buffer splat with per-pixel winning point indices. Ties on exact
/// depth keep the earlier point, so the result is independent of nothing:
/// point order is part of the contract.
fn render_indexed(
    cloud: &PointCloud,
    camera: &PinholeCamera,
    pose: &CameraPose,
    z_near: f64,
) -> (RenderResult, Vec<u32>) {
    let (w, h) = (camera.width, camera.height);
    let mut color = ColorRaster::new(w, h);
    let mut mask = MaskRaster::new(w, h);
    let mut depth = ScalarRaster::filled(w, h, f64::INFINITY);
    let mut winner = vec![NO_WINNER; w * h];
    let max_x = (w - 1) as f64;
    let max_y = (h - 1) as f64;
    for (index, p) in cloud.positions().iter().enumerate() {
        let cam = pose.to_camera(p);
        let z = cam[2];
        if z <= z_near {
            continue;
        }
        let px = libm::round(camera.fx * cam[0] / z + camera.cx);
        let py = libm::round(camera.fy * cam[1] / z + camera.cy);
        if !(px.is_finite() && py.is_finite()) || px < 0.0 || px > max_x || py < 0.0 || py > max_y
        {
            continue;
        }
        let (x, y) = (px as usize, py as usize);
        if z < depth.get(x, y) {
            depth.set(x, y, z);
            color.set(x, y, cloud.colors()[index]);
            mask.set(x, y, true);
            winner[y * w + x] = index as u32;
        }
    }
    for y in 0..h {
        for x in 0..w {
            if !mask.get(x, y) {
                depth.set(x, y, 0.0);
            }
        }
    }
    (RenderResult { color, mask, depth_buffer: depth }, winner)
}

/// Renders the cloud with the default near plane. Every point is splatted
/// to its nearest pixel; the smallest camera-frame depth wins each pixel.
pub fn render(cloud: &PointCloud, camera: &PinholeCamera, pose: &CameraPose) -> RenderResult {
    render_indexed(cloud, camera, pose, DEFAULT_Z_NEAR).0
}

/// [`render`] with an explicit near-plane depth.
pub fn render_with_near(
    cloud: &PointCloud,
    camera: &PinholeCamera,
    pose: &CameraPose,
    z_near: f64,
) -> RenderResult {
    render_indexed(cloud, camera, pose, z_near).0
}

/// View information handed to fillers alongside the raster data.
#[derive(Debug, Clone, Copy)]
pub struct FillContext<'a> {
    pub view: usize,
    pub pose: &'a CameraPose,
    pub camera: &'a PinholeCamera,
}

/// Hole filler. `holes` is true where color must be synthesized; the
/// output must be defined everywhere. Known pixels are re-copied by
/// [`fill_holes`] afterwards, so a filler cannot corrupt them.
pub trait Filler {
    fn fill(
        &self,
        color: &ColorRaster,
        holes: &MaskRaster,
        prompt: Option<&str>,
        ctx: &FillContext<'_>,
    ) -> Result<ColorRaster, CloudError>;
}

/// Fills every hole with one constant color.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConstantFiller {
    pub value: [f64; 3],
}

impl Default for ConstantFiller {
    fn default() -> Self {
        Self { value: [0.5, 0.5, 0.5] }
    }
}

impl Filler for ConstantFiller {
    fn fill(
        &self,
        color: &ColorRaster,
        holes: &MaskRaster,
        _prompt: Option<&str>,
        _ctx: &FillContext<'_>,
    ) -> Result<ColorRaster, CloudError> {
        let mut out = color.clone();
        for y in 0..holes.height() {
            for x in 0..holes.width() {
                if holes.get(x, y) {
                    out.set(x, y, self.value);
                }
            }
        }
        Ok(out)
    }
}

/// Iterative 4-neighbor averaging: each hole pixel repeatedly takes the
/// mean of its already-valued neighbors (Jacobi sweeps) until the update
/// falls below `tolerance` or `max_iterations` is hit. Deterministic and
/// smooth; the harmonic-like fill for hole interiors.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiffuseFiller {
    pub tolerance: f64,
    pub max_iterations: usize,
}

impl Default for DiffuseFiller {
    fn default() -> Self {
        Self { tolerance: 1e-6, max_iterations: 10_000 }
    }
}

impl Filler for DiffuseFiller {
    fn fill(
        &self,
        color: &ColorRaster,
        holes: &MaskRaster,
        _prompt: Option<&str>,
        _ctx: &FillContext<'_>,
    ) -> Result<ColorRaster, CloudError> {
        let (w, h) = (holes.width(), holes.height());
        let hole_list: Vec<(usize, usize)> = (0..h)
            .flat_map(|y| (0..w).map(move |x| (x, y)))
            .filter(|&(x, y)| holes.get(x, y))
            .collect();
        if hole_list.len() == w * h {
            // Nothing known anywhere; fall back to mid-gray.
            return Ok(ColorRaster::filled(w, h, [0.5, 0.5, 0.5]));
        }
        let mut cur = color.clone();
        let mut cur_valued = holes.invert();
        for _ in 0..self.max_iterations {
            let mut next = cur.clone();
            let mut next_valued = cur_valued.clone();
            let mut max_delta: f64 = 0.0;
            let mut pending = 0usize;
            let mut newly = 0usize;
            for &(x, y) in &hole_list {
                let mut sum = [0.0; 3];
                let mut count = 0.0;
                let mut add = |nx: usize, ny: usize| {
                    if cur_valued.get(nx, ny) {
                        let c = cur.get(nx, ny);
                        sum[0] += c[0];
                        sum[1] += c[1];
                        sum[2] += c[2];
                        count += 1.0;
                    }
                };
                if x > 0 {
                    add(x - 1, y);
                }
                if x + 1 < w {
                    add(x + 1, y);
                }
                if y > 0 {
                    add(x, y - 1);
                }
                if y + 1 < h {
                    add(x, y + 1);
                }
                if count == 0.0 {
                    pending += 1;
                    continue;
                }
                let mean = [sum[0] / count, sum[1] / count, sum[2] / count];
                if cur_valued.get(x, y) {
                    let old = cur.get(x, y);
                    for k in 0..3 {
                        max_delta = max_delta.max(libm::fabs(mean[k] - old[k]));
                    }
                } else {
                    newly += 1;
                    next_valued.set(x, y, true);
                }
                next.set(x, y, mean);
            }
            cur = next;
            cur_valued = next_valued;
            if pending == 0 && newly == 0 && max_delta < self.tolerance {
                break;
            }
        }
        Ok(cur)
    }
}

/// Runs the filler on the holes of a render and re-copies known pixels so
/// the filler cannot alter them. An all-covered render is returned as-is
/// without invoking the filler.
pub fn fill_holes(
    r: &RenderResult,
    filler: &dyn Filler,
    prompt: Option<&str>,
    ctx: &FillContext<'_>,
) -> Result<ColorRaster, CloudError> {
    let holes = r.mask.invert();
    if holes.count_true() == 0 {
        return Ok(r.color.clone());
    }
    let mut out = filler.fill(&r.color, &holes, prompt, ctx)?;
    if out.width() != r.width() || out.height() != r.height() {
        return Err(CloudError::DimensionMismatch {
            what: "filler output",
            expected_w: r.width(),
            expected_h: r.height(),
            got_w: out.width(),
            got_h: out.height(),
        });
    }
    if !out.is_finite() {
        return Err(CloudError::NonFinite { what: "filler output" });
    }
    for y in 0..r.height() {
        for x in 0..r.width() {
            if r.mask.get(x, y) {
                out.set(x, y, r.color.get(x, y));
            }
        }
    }
    Ok(out)
}

/// View information handed to depth providers.
#[derive(Debug, Clone, Copy)]
pub struct DepthContext<'a> {
    pub view: usize,
    pub pose: &'a CameraPose,
    pub camera: &'a PinholeCamera,
    /// Pre-fill render of the current cloud at this view.
    pub prefill: &'a RenderResult,
}

/// Supplies a dense depth raster for a filled color image. Stands in for
/// a monocular depth estimator; implementations must be deterministic.
pub trait DepthProvider {
    fn depth(
        &self,
        filled: &ColorRaster,
        ctx: &DepthContext<'_>,
    ) -> Result<ScalarRaster, CloudError>;
}

/// Fallback provider: the rendered depth buffer, extended into holes by
/// breadth-first propagation of the nearest valid value (4-neighborhood,
/// row-major seeding, so the result is deterministic).
#[derive(Debug, Clone, Copy, Default)]
pub struct RenderedDepthProvider;

impl DepthProvider for RenderedDepthProvider {
    fn depth(
        &self,
        _filled: &ColorRaster,
        ctx: &DepthContext<'_>,
    ) -> Result<ScalarRaster, CloudError> {
        let prefill = ctx.prefill;
        let (w, h) = (prefill.width(), prefill.height());
        let mut out = prefill.depth_buffer.clone();
        let mut assigned = MaskRaster::new(w, h);
        let mut queue = VecDeque::new();
        for y in 0..h {
            for x in 0..w {
                if prefill.mask.get(x, y) {
                    assigned.set(x, y, true);
                    queue.push_back((x, y));
                }
            }
        }
        if queue.is_empty() {
            return Err(CloudError::EmptyDepthBuffer);
        }
        while let Some((x, y)) = queue.pop_front() {
            let value = out.get(x, y);
            let neighbors = [
                (x.wrapping_sub(1), y),
                (x + 1, y),
                (x, y.wrapping_sub(1)),
                (x, y + 1),
            ];
            for (nx, ny) in neighbors {
                if nx < w && ny < h && !assigned.get(nx, ny) {
                    assigned.set(nx, ny, true);
                    out.set(nx, ny, value);
                    queue.push_back((nx, ny));
                }
            }
        }
        Ok(out)
    }
}

/// Finds the scalar depth coefficient `d` minimizing the l1 distance
/// between the candidate frame lifted with depth `d * D` and the existing
/// cloud, over the overlap region.
///
/// The overlap is the set of non-hole pixels; each contributes the pair
/// (candidate point along that pixel ray, cloud point that won that
/// pixel's z-buffer). The loss is convex piecewise-linear in `d`, searched
/// on log d over [1/4, 4]: a 64-point coarse grid brackets the minimum and
/// golden-section refinement narrows it to relative tolerance 1e-4.
pub fn optimize_depth_scale(
    candidate: &RgbdFrame,
    hole_mask: &MaskRaster,
    camera: &PinholeCamera,
    pose: &CameraPose,
    reference: &PointCloud,
) -> Result<f64, CloudError> {
    check_camera_frame(camera, candidate.width(), candidate.height())?;
    if hole_mask.width() != candidate.width() || hole_mask.height() != candidate.height() {
        return Err(CloudError::DimensionMismatch {
            what: "hole mask",
            expected_w: candidate.width(),
            expected_h: candidate.height(),
            got_w: hole_mask.width(),
            got_h: hole_mask.height(),
        });
    }
    let (_, winners) = render_indexed(reference, camera, pose, DEFAULT_Z_NEAR);
    let r_t = pose.rotation().transpose();
    let base = -(r_t * pose.translation());
    let mut pairs: Vec<(Vec3, Vec3)> = Vec::new();
    for y in 0..candidate.height() {
        for x in 0..candidate.width() {
            if hole_mask.get(x, y) {
                continue;
            }
            let win = winners[y * candidate.width() + x];
            if win == NO_WINNER {
                continue;
            }
            let d = candidate.depth.get(x, y);
            if d <= 0.0 {
                continue;
            }
            // World position of the candidate pixel is linear in the scale:
            // world(s) = s * a + base.
            let a = r_t * backproject(camera, x, y, d);
            let w = base - reference.positions()[win as usize];
            pairs.push((a, w));
        }
    }
    if pairs.is_empty() {
        return Err(CloudError::NoOverlap);
    }
    let loss = |scale: f64| -> f64 {
        let mut sum = 0.0;
        for (a, w) in &pairs {
            sum += libm::fabs(scale * a[0] + w[0])
                + libm::fabs(scale * a[1] + w[1])
                + libm::fabs(scale * a[2] + w[2]);
        }
        sum
    };
    let log_lo = libm::log(SCALE_MIN);
    let log_hi = libm::log(SCALE_MAX);
    let step = (log_hi - log_lo) / (SCALE_GRID - 1) as f64;
    let mut best_i = 0;
    let mut best_v = f64::INFINITY;
    for i in 0..SCALE_GRID {
        let v = loss(libm::exp(log_lo + i as f64 * step));
        if v < best_v {
            best_v = v;
            best_i = i;
        }
    }
    // The loss is convex, so the minimum lies within one grid step of the
    // best sample; golden-section then converges on the bracket.
    let mut lo = log_lo + best_i.saturating_sub(1) as f64 * step;
    let mut hi = log_lo + (best_i + 1).min(SCALE_GRID - 1) as f64 * step;
    let inv_phi = (libm::sqrt(5.0) - 1.0) / 2.0;
    let mut x1 = hi - inv_phi * (hi - lo);
    let mut x2 = lo + inv_phi * (hi - lo);
    let mut f1 = loss(libm::exp(x1));
    let mut f2 = loss(libm::exp(x2));
    while hi - lo > SCALE_LOG_TOL {
        if f1 <= f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - inv_phi * (hi - lo);
            f1 = loss(libm::exp(x1));
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + inv_phi * (hi - lo);
            f2 = loss(libm::exp(x2));
        }
    }
    Ok(libm::exp((lo + hi) / 2.0))
}

/// Output of the stage-one loop.
#[derive(Debug, Clone)]
pub struct StageOneOutput {
    /// Rendered color frames, one per trajectory pose. Frame 0 is the
    /// input color verbatim.
    pub frames: Vec<ColorRaster>,
    /// Pre-fill renders (mask and depth diagnostics for each view).
    pub renders: Vec<RenderResult>,
    /// Depth coefficient per view; entry 0 is always 1.
    pub depth_scales: Vec<f64>,
    /// Final merged cloud.
    pub cloud: PointCloud,
    /// Views where the overlap was empty and the coefficient fell back
    /// to 1.
    pub no_overlap_views: Vec<usize>,
}

/// Runs the view-by-view cloud-growing loop over the trajectory.
///
/// The first pose must be the identity (the world frame is anchored to
/// the input view). For each later view: render the cloud, fill holes,
/// attach provider depth, optimize the depth coefficient on the overlap
/// (falling back to 1 when there is none), lift only the hole pixels at
/// the scaled depth, merge, and re-render for the output frame.
pub fn stage_one(
    input: &RgbdFrame,
    trajectory: &Trajectory,
    camera: &PinholeCamera,
    filler: &dyn Filler,
    depth_provider: &dyn DepthProvider,
) -> Result<StageOneOutput, CloudError> {
    check_camera_frame(camera, input.width(), input.height())?;
    if !trajectory.get(0).is_identity(1e-9) {
        return Err(CloudError::FirstPoseNotIdentity);
    }
    let n = trajectory.len();
    let mut cloud = lift(input, camera, trajectory.get(0), 0)?;
    let mut frames = Vec::with_capacity(n);
    let mut renders = Vec::with_capacity(n);
    let mut depth_scales = vec![1.0; n];
    let mut no_overlap_views = Vec::new();
    frames.push(input.color.clone());
    renders.push(render(&cloud, camera, trajectory.get(0)));
    for view in 1..n {
        let pose = trajectory.get(view);
        let prefill = render(&cloud, camera, pose);
        let holes = prefill.mask.invert();
        let fill_ctx = FillContext { view, pose, camera };
        let filled =
            fill_holes(&prefill, filler, None, &fill_ctx).map_err(|e| e.at_view(view))?;
        let depth_ctx = DepthContext { view, pose, camera, prefill: &prefill };
        let cand_depth =
            depth_provider.depth(&filled, &depth_ctx).map_err(|e| e.at_view(view))?;
        let candidate =
            RgbdFrame::new(filled, cand_depth).map_err(|e| e.at_view(view))?;
        let scale = match optimize_depth_scale(&candidate, &holes, camera, pose, &cloud) {
            Ok(d) => d,
            Err(CloudError::NoOverlap) => {
                no_overlap_views.push(view);
                1.0
            }
            Err(e) => return Err(e.at_view(view)),
        };
        depth_scales[view] = scale;
        let additions = lift_masked(&candidate, Some(&holes), scale, camera, pose, view as u32);
        cloud = merge(&cloud, &additions);
        let post = render(&cloud, camera, pose);
        frames.push(post.color);
        renders.push(prefill);
    }
    Ok(StageOneOutput { frames, renders, depth_scales, cloud, no_overlap_views })
}
