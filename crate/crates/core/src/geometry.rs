//! Pinhole cameras, world-to-camera poses, and trajectory construction.
//!
//! Coordinate conventions, fixed once for the whole workspace:
//!
//! * Camera frame: +x right, +y down, +z forward.
//! * A pose maps world to camera: `x_cam = R * x_world + t`. The camera
//!   center in world coordinates is `-R^T * t`.
//! * The world frame is anchored to the first view, whose pose is the
//!   identity.
//!
//! Motion-primitive directions follow the conventions below. Translational
//! moves name the axis of the pose translation component (`up` is `-y`
//! because image y grows downward, `right` is `+x`, `in` is `-z`).
//! Rotational moves name the physical camera rotation: pan right turns the
//! camera toward +x, tilt up pitches the lens upward, roll clockwise spins
//! the camera clockwise as seen from behind it. `rotate` is the orbit
//! motion: a yaw by theta paired with the translation
//! `[f*sin(theta), 0, f - f*cos(theta)]`, which keeps a point at distance
//! `f` straight ahead at constant camera-frame depth.

use alloc::vec::Vec;
use nalgebra::{Matrix3, Vector3};
use thiserror::Error;

use crate::raster::ScalarRaster;

pub type Mat3 = Matrix3<f64>;
pub type Vec3 = Vector3<f64>;

/// Poses produced by this crate keep `R^T R = I` and `det R = 1` within
/// this tolerance.
pub const POSE_ORTHONORMAL_TOL: f64 = 1e-9;
/// External extrinsics with a defect above [`POSE_ORTHONORMAL_TOL`] but
/// within this bound are repaired by projection; beyond it they are
/// rejected.
pub const EXTRINSIC_ACCEPT_TOL: f64 = 1e-6;
/// Defect at or below this is treated as exact and kept verbatim, so that
/// exporting and re-importing a trajectory is bit-identical.
const EXTRINSIC_VERBATIM_TOL: f64 = 1e-12;

/// Patch half-width used when estimating an orbit focus distance from
/// depth, giving a (2*10+1)^2 center window.
pub const DEFAULT_FOCUS_PATCH_HALF_WIDTH: usize = 10;

fn radians(degrees: f64) -> f64 {
    degrees * (core::f64::consts::PI / 180.0)
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GeometryError {
    #[error("camera intrinsics invalid: {0}")]
    InvalidCamera(&'static str),
    #[error("rotation at index {index} has orthonormality defect {defect:.3e}")]
    InvalidPose { index: usize, defect: f64 },
    #[error("extrinsic matrix at index {index} must have 12 or 16 entries, got {len}")]
    BadMatrixSize { index: usize, len: usize },
    #[error("extrinsic matrix at index {index}: bottom row is not (0, 0, 0, 1)")]
    BadHomogeneousRow { index: usize },
    #[error("direction {direction:?} is not valid for motion kind {kind:?}")]
    DirectionMismatch { kind: MotionKind, direction: MotionDirection },
    #[error("frame count must be at least 1")]
    ZeroFrames,
    #[error("magnitude must be non-negative and finite, got {0}")]
    BadMagnitude(f64),
    #[error("rotate requires a focus distance")]
    MissingFocusDistance,
    #[error("focus distance must be positive and finite, got {0}")]
    BadFocusDistance(f64),
    #[error("trajectory must contain at least one pose")]
    EmptyTrajectory,
    #[error("combine requires at least one part")]
    NoParts,
    #[error("simultaneous combine requires equal lengths, got {0:?}")]
    LengthMismatch(Vec<usize>),
    #[error("patch half-width {half_width} does not fit a {width}x{height} raster")]
    PatchOutOfBounds { half_width: usize, width: usize, height: usize },
    #[error("depth at ({x}, {y}) must be positive, got {value}")]
    NonPositiveDepth { x: usize, y: usize, value: f64 },
}

/// Pinhole intrinsics over an integer raster. Pixel (u, v) is the center
/// of the cell at column u, row v; projection is
/// `u = fx * x/z + cx`, `v = fy * y/z + cy`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PinholeCamera {
    pub fx: f64,
    pub fy: f64,
    pub cx: f64,
    pub cy: f64,
    pub width: usize,
    pub height: usize,
}

impl PinholeCamera {
    pub fn new(
        fx: f64,
        fy: f64,
        cx: f64,
        cy: f64,
        width: usize,
        height: usize,
    ) -> Result<Self, GeometryError> {
        if width == 0 || height == 0 {
            return Err(GeometryError::InvalidCamera("raster dimensions must be non-zero"));
        }
        if !(fx.is_finite() && fx > 0.0 && fy.is_finite() && fy > 0.0) {
            return Err(GeometryError::InvalidCamera("focal lengths must be positive"));
        }
        if !(cx.is_finite() && cy.is_finite()) {
            return Err(GeometryError::InvalidCamera("principal point must be finite"));
        }
        Ok(Self { fx, fy, cx, cy, width, height })
    }

    /// Default intrinsics for a raster: 55 degree vertical field of view,
    /// square pixels, principal point at the raster center.
    pub fn default_for(width: usize, height: usize) -> Result<Self, GeometryError> {
        let half_fov = radians(55.0) / 2.0;
        let f = (height as f64 / 2.0) / libm::tan(half_fov);
        Self::new(f, f, width as f64 / 2.0, height as f64 / 2.0, width, height)
    }
}

/// World-to-camera rigid pose.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CameraPose {
    rotation: Mat3,
    translation: Vec3,
}

/// Largest-magnitude entry of `R^T R - I`, plus the determinant defect.
/// Zero for an exact rotation.
pub fn orthonormality_defect(rotation: &Mat3) -> f64 {
    let gram = rotation.transpose() * rotation;
    let mut defect: f64 = 0.0;
    for i in 0..3 {
        for j in 0..3 {
            let target = if i == j { 1.0 } else { 0.0 };
            defect = defect.max(libm::fabs(gram[(i, j)] - target));
        }
    }
    defect.max(libm::fabs(rotation.determinant() - 1.0))
}

/// Nearest rotation matrix in the Frobenius sense: `U * diag(1, 1, s) * V^T`
/// from the SVD, with `s` chosen so the determinant is +1.
pub fn nearest_rotation(m: &Mat3) -> Mat3 {
    let svd = m.svd(true, true);
    let u = svd.u.expect("svd requested u");
    let v_t = svd.v_t.expect("svd requested v_t");
    let sign = if (u * v_t).determinant() < 0.0 { -1.0 } else { 1.0 };
    let correction = Matrix3::from_diagonal(&Vector3::new(1.0, 1.0, sign));
    u * correction * v_t
}

impl CameraPose {
    pub fn new(rotation: Mat3, translation: Vec3) -> Result<Self, GeometryError> {
        let defect = orthonormality_defect(&rotation);
        if defect > POSE_ORTHONORMAL_TOL
            || !translation.iter().all(|v| v.is_finite())
            || !rotation.iter().all(|v| v.is_finite())
        {
            return Err(GeometryError::InvalidPose { index: 0, defect });
        }
        Ok(Self { rotation, translation })
    }

    /// For internal construction from analytically orthonormal parts.
    pub(crate) fn from_parts(rotation: Mat3, translation: Vec3) -> Self {
        debug_assert!(orthonormality_defect(&rotation) <= POSE_ORTHONORMAL_TOL);
        Self { rotation, translation }
    }

    pub fn identity() -> Self {
        Self { rotation: Mat3::identity(), translation: Vec3::zeros() }
    }

    pub fn rotation(&self) -> &Mat3 {
        &self.rotation
    }

    pub fn translation(&self) -> &Vec3 {
        &self.translation
    }

    /// Camera center in world coordinates, `-R^T t`.
    pub fn center(&self) -> Vec3 {
        -(self.rotation.transpose() * self.translation)
    }

    /// World point to camera frame.
    pub fn to_camera(&self, world: &Vec3) -> Vec3 {
        self.rotation * world + self.translation
    }

    /// Camera-frame point back to world.
    pub fn to_world(&self, cam: &Vec3) -> Vec3 {
        self.rotation.transpose() * (cam - self.translation)
    }

    pub fn inverse(&self) -> CameraPose {
        let r_t = self.rotation.transpose();
        CameraPose { rotation: r_t, translation: -(r_t * self.translation) }
    }

    pub fn is_identity(&self, tol: f64) -> bool {
        let mut defect: f64 = 0.0;
        for i in 0..3 {
            for j in 0..3 {
                let target = if i == j { 1.0 } else { 0.0 };
                defect = defect.max(libm::fabs(self.rotation[(i, j)] - target));
            }
        }
        for i in 0..3 {
            defect = defect.max(libm::fabs(self.translation[i]));
        }
        defect <= tol
    }

    /// Row-major 3x4 matrix `[R | t]`.
    pub fn to_rows_3x4(&self) -> [f64; 12] {
        let r = &self.rotation;
        let t = &self.translation;
        [
            r[(0, 0)], r[(0, 1)], r[(0, 2)], t[0],
            r[(1, 0)], r[(1, 1)], r[(1, 2)], t[1],
            r[(2, 0)], r[(2, 1)], r[(2, 2)], t[2],
        ]
    }

    /// Row-major 4x4 homogeneous matrix.
    pub fn to_rows_4x4(&self) -> [f64; 16] {
        let m = self.to_rows_3x4();
        [
            m[0], m[1], m[2], m[3],
            m[4], m[5], m[6], m[7],
            m[8], m[9], m[10], m[11],
            0.0, 0.0, 0.0, 1.0,
        ]
    }
}

/// Applies `b` after `a`: `R = R_b R_a`, `t = R_b t_a + t_b`.
pub fn compose(a: &CameraPose, b: &CameraPose) -> CameraPose {
    CameraPose {
        rotation: b.rotation * a.rotation,
        translation: b.rotation * a.translation + b.translation,
    }
}

/// Ordered list of world-to-camera poses, one per frame. Never empty.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    poses: Vec<CameraPose>,
}

impl Trajectory {
    pub fn new(poses: Vec<CameraPose>) -> Result<Self, GeometryError> {
        if poses.is_empty() {
            return Err(GeometryError::EmptyTrajectory);
        }
        Ok(Self { poses })
    }

    pub fn poses(&self) -> &[CameraPose] {
        &self.poses
    }

    pub fn len(&self) -> usize {
        self.poses.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn get(&self, i: usize) -> &CameraPose {
        &self.poses[i]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum MotionKind {
    Zoom,
    Tilt,
    Pan,
    Pedestal,
    Truck,
    Roll,
    Rotate,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum MotionDirection {
    In,
    Out,
    Up,
    Down,
    Left,
    Right,
    Clockwise,
    Anticlockwise,
}

impl MotionKind {
    /// Angular kinds take magnitudes in degrees; the rest in world length.
    pub fn is_angular(&self) -> bool {
        matches!(self, MotionKind::Tilt | MotionKind::Pan | MotionKind::Roll | MotionKind::Rotate)
    }

    pub fn accepts(&self, direction: MotionDirection) -> bool {
        use MotionDirection::*;
        match self {
            MotionKind::Zoom => matches!(direction, In | Out),
            MotionKind::Tilt | MotionKind::Pedestal => matches!(direction, Up | Down),
            MotionKind::Pan | MotionKind::Truck => matches!(direction, Left | Right),
            MotionKind::Roll | MotionKind::Rotate => matches!(direction, Clockwise | Anticlockwise),
        }
    }
}

/// One basic camera move: a kind, a direction, a total magnitude (world
/// units for zoom/pedestal/truck, degrees for the angular kinds), and the
/// number of frames it spans.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MotionPrimitive {
    pub kind: MotionKind,
    pub direction: MotionDirection,
    pub magnitude: f64,
    pub frames: usize,
}

/// Yaw matrix used by pan and the orbit motion:
/// rows `[cos 0 -sin; 0 1 0; sin 0 cos]`. Positive angle turns the camera
/// toward +x.
fn yaw(theta: f64) -> Mat3 {
    let (s, c) = (libm::sin(theta), libm::cos(theta));
    Mat3::new(
        c, 0.0, -s,
        0.0, 1.0, 0.0,
        s, 0.0, c,
    )
}

/// Pitch matrix; positive angle tilts the camera upward.
fn pitch(theta: f64) -> Mat3 {
    let (s, c) = (libm::sin(theta), libm::cos(theta));
    Mat3::new(
        1.0, 0.0, 0.0,
        0.0, c, s,
        0.0, -s, c,
    )
}

/// Roll matrix; positive angle spins the camera clockwise as seen from
/// behind it (+x axis moves toward +y).
fn roll(theta: f64) -> Mat3 {
    let (s, c) = (libm::sin(theta), libm::cos(theta));
    Mat3::new(
        c, s, 0.0,
        -s, c, 0.0,
        0.0, 0.0, 1.0,
    )
}

/// Pose of a primitive at accumulated parameter `lambda` (radians or world
/// units, direction sign already applied).
fn primitive_pose(kind: MotionKind, lambda: f64, focus: f64) -> CameraPose {
    match kind {
        MotionKind::Zoom => CameraPose::from_parts(Mat3::identity(), Vec3::new(0.0, 0.0, lambda)),
        MotionKind::Pedestal => {
            CameraPose::from_parts(Mat3::identity(), Vec3::new(0.0, lambda, 0.0))
        }
        MotionKind::Truck => CameraPose::from_parts(Mat3::identity(), Vec3::new(lambda, 0.0, 0.0)),
        MotionKind::Tilt => CameraPose::from_parts(pitch(lambda), Vec3::zeros()),
        MotionKind::Pan => CameraPose::from_parts(yaw(lambda), Vec3::zeros()),
        MotionKind::Roll => CameraPose::from_parts(roll(lambda), Vec3::zeros()),
        MotionKind::Rotate => CameraPose::from_parts(
            yaw(lambda),
            Vec3::new(
                focus * libm::sin(lambda),
                0.0,
                focus - focus * libm::cos(lambda),
            ),
        ),
    }
}

/// Sign applied to the interpolation parameter for each direction.
fn direction_sign(kind: MotionKind, direction: MotionDirection) -> f64 {
    use MotionDirection::*;
    match (kind, direction) {
        // Translations: "in" moves along -z, "up" along -y, "right" along
        // +x, each naming the pose translation component.
        (MotionKind::Zoom, In) => -1.0,
        (MotionKind::Zoom, Out) => 1.0,
        (MotionKind::Pedestal, Up) => -1.0,
        (MotionKind::Pedestal, Down) => 1.0,
        (MotionKind::Truck, Right) => 1.0,
        (MotionKind::Truck, Left) => -1.0,
        // Rotations: positive parameter is pan-right, tilt-up, and
        // roll/rotate-clockwise.
        (MotionKind::Pan, Right) => 1.0,
        (MotionKind::Pan, Left) => -1.0,
        (MotionKind::Tilt, Up) => 1.0,
        (MotionKind::Tilt, Down) => -1.0,
        (MotionKind::Roll, Clockwise) => 1.0,
        (MotionKind::Roll, Anticlockwise) => -1.0,
        (MotionKind::Rotate, Clockwise) => 1.0,
        (MotionKind::Rotate, Anticlockwise) => -1.0,
        _ => unreachable!("direction validated before use"),
    }
}

/// Builds the pose sequence of one motion primitive. Frame `i` of `N` gets
/// parameter `i/(N-1) * magnitude`; a single frame gives the identity.
/// `focus_distance` is required for (and only used by) the rotate kind.
pub fn build_primitive(
    p: &MotionPrimitive,
    focus_distance: Option<f64>,
) -> Result<Trajectory, GeometryError> {
    if p.frames == 0 {
        return Err(GeometryError::ZeroFrames);
    }
    if !p.magnitude.is_finite() || p.magnitude < 0.0 {
        return Err(GeometryError::BadMagnitude(p.magnitude));
    }
    if !p.kind.accepts(p.direction) {
        return Err(GeometryError::DirectionMismatch { kind: p.kind, direction: p.direction });
    }
    let focus = match (p.kind, focus_distance) {
        (MotionKind::Rotate, Some(f)) if f.is_finite() && f > 0.0 => f,
        (MotionKind::Rotate, Some(f)) => return Err(GeometryError::BadFocusDistance(f)),
        (MotionKind::Rotate, None) => return Err(GeometryError::MissingFocusDistance),
        _ => 0.0,
    };
    let total = if p.kind.is_angular() { radians(p.magnitude) } else { p.magnitude };
    let signed = direction_sign(p.kind, p.direction) * total;
    let n = p.frames;
    let mut poses = Vec::with_capacity(n);
    for i in 0..n {
        let fraction = if n == 1 { 0.0 } else { i as f64 / (n - 1) as f64 };
        poses.push(primitive_pose(p.kind, fraction * signed, focus));
    }
    Trajectory::new(poses)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CombineMode {
    /// Frame-wise composition of all parts, in list order.
    Simultaneous,
    /// Concatenation; each part is re-anchored so its first pose lands on
    /// the previous part's final pose, and the duplicate junction frame is
    /// dropped. Total length is sum(N_k) - (parts - 1).
    Sequential,
}

pub fn combine(parts: &[Trajectory], mode: CombineMode) -> Result<Trajectory, GeometryError> {
    if parts.is_empty() {
        return Err(GeometryError::NoParts);
    }
    match mode {
        CombineMode::Simultaneous => {
            let n = parts[0].len();
            if parts.iter().any(|p| p.len() != n) {
                return Err(GeometryError::LengthMismatch(
                    parts.iter().map(|p| p.len()).collect(),
                ));
            }
            let mut poses = Vec::with_capacity(n);
            for i in 0..n {
                let mut acc = *parts[0].get(i);
                for part in &parts[1..] {
                    acc = compose(&acc, part.get(i));
                }
                poses.push(acc);
            }
            Trajectory::new(poses)
        }
        CombineMode::Sequential => {
            let mut poses: Vec<CameraPose> = parts[0].poses().to_vec();
            for part in &parts[1..] {
                let anchor = *poses.last().expect("trajectories are never empty");
                let undo_start = part.get(0).inverse();
                for pose in &part.poses()[1..] {
                    let relative = compose(&undo_start, pose);
                    poses.push(compose(&anchor, &relative));
                }
            }
            Trajectory::new(poses)
        }
    }
}

/// Builds a trajectory from row-major 3x4 or 4x4 extrinsic matrices.
///
/// Matrices whose rotation block is orthonormal to machine precision are
/// kept verbatim, so exported trajectories re-import bit-identically.
/// Blocks with a defect up to [`EXTRINSIC_ACCEPT_TOL`] are repaired by
/// projection onto the nearest rotation; anything worse is rejected.
pub fn from_extrinsics<M: AsRef<[f64]>>(matrices: &[M]) -> Result<Trajectory, GeometryError> {
    let mut poses = Vec::with_capacity(matrices.len());
    for (index, m) in matrices.iter().enumerate() {
        let m = m.as_ref();
        if m.len() != 12 && m.len() != 16 {
            return Err(GeometryError::BadMatrixSize { index, len: m.len() });
        }
        if m.len() == 16 {
            let bottom_ok = libm::fabs(m[12]) <= EXTRINSIC_ACCEPT_TOL
                && libm::fabs(m[13]) <= EXTRINSIC_ACCEPT_TOL
                && libm::fabs(m[14]) <= EXTRINSIC_ACCEPT_TOL
                && libm::fabs(m[15] - 1.0) <= EXTRINSIC_ACCEPT_TOL;
            if !bottom_ok {
                return Err(GeometryError::BadHomogeneousRow { index });
            }
        }
        if !m.iter().all(|v| v.is_finite()) {
            return Err(GeometryError::InvalidPose { index, defect: f64::INFINITY });
        }
        let rotation = Mat3::new(
            m[0], m[1], m[2],
            m[4], m[5], m[6],
            m[8], m[9], m[10],
        );
        let translation = Vec3::new(m[3], m[7], m[11]);
        let defect = orthonormality_defect(&rotation);
        let rotation = if defect <= EXTRINSIC_VERBATIM_TOL {
            rotation
        } else if defect <= EXTRINSIC_ACCEPT_TOL {
            nearest_rotation(&rotation)
        } else {
            return Err(GeometryError::InvalidPose { index, defect });
        };
        poses.push(CameraPose::from_parts(rotation, translation));
    }
    Trajectory::new(poses)
}

/// Mean depth over the `(2h+1)^2` patch centered at the raster midpoint.
/// Used as the orbit focus distance when none is given.
pub fn estimate_focus_distance(
    depth: &ScalarRaster,
    patch_half_width: usize,
) -> Result<f64, GeometryError> {
    let (w, h) = (depth.width(), depth.height());
    let (x0, y0) = (w / 2, h / 2);
    let r = patch_half_width;
    if x0 < r || y0 < r || x0 + r >= w || y0 + r >= h {
        return Err(GeometryError::PatchOutOfBounds { half_width: r, width: w, height: h });
    }
    let mut sum = 0.0;
    for y in y0 - r..=y0 + r {
        for x in x0 - r..=x0 + r {
            let d = depth.get(x, y);
            if !(d.is_finite() && d > 0.0) {
                return Err(GeometryError::NonPositiveDepth { x, y, value: d });
            }
            sum += d;
        }
    }
    let side = 2 * r + 1;
    Ok(sum / (side * side) as f64)
}
