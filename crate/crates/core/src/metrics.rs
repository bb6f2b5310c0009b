//! Trajectory accuracy metrics: similarity alignment, absolute center
//! error, and relative pose error over pose tracks.
//!
//! Tracks are world-to-camera pose lists; all center math happens on the
//! camera centers `-R^T t`. Alignment is directional (estimate onto
//! reference), so none of these functions are symmetric in their
//! arguments.

use alloc::vec::Vec;
use nalgebra::Vector3;
use thiserror::Error;

use crate::geometry::{compose, CameraPose, Mat3, Vec3};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum MetricsError {
    #[error("track lengths differ: estimate {estimate}, reference {reference}")]
    LengthMismatch { estimate: usize, reference: usize },
    #[error("index list length {indices} does not match pose count {poses}")]
    IndexCount { indices: usize, poses: usize },
    #[error("frame indices must be strictly increasing")]
    IndicesNotIncreasing,
    #[error("degenerate track: {0}")]
    Degenerate(&'static str),
    #[error("delta {delta} outside 1..{len}")]
    BadDelta { delta: usize, len: usize },
}

/// An ordered pose sequence with strictly increasing frame indices.
#[derive(Debug, Clone, PartialEq)]
pub struct PoseTrack {
    poses: Vec<CameraPose>,
    indices: Vec<usize>,
}

impl PoseTrack {
    /// Track with consecutive frame indices 0..n.
    pub fn new(poses: Vec<CameraPose>) -> Self {
        let indices = (0..poses.len()).collect();
        Self { poses, indices }
    }

    pub fn with_indices(
        poses: Vec<CameraPose>,
        indices: Vec<usize>,
    ) -> Result<Self, MetricsError> {
        if poses.len() != indices.len() {
            return Err(MetricsError::IndexCount {
                indices: indices.len(),
                poses: poses.len(),
            });
        }
        if indices.windows(2).any(|w| w[1] <= w[0]) {
            return Err(MetricsError::IndicesNotIncreasing);
        }
        Ok(Self { poses, indices })
    }

    pub fn poses(&self) -> &[CameraPose] {
        &self.poses
    }

    pub fn indices(&self) -> &[usize] {
        &self.indices
    }

    pub fn len(&self) -> usize {
        self.poses.len()
    }

    pub fn is_empty(&self) -> bool {
        self.poses.is_empty()
    }

    fn centers(&self) -> Vec<Vec3> {
        self.poses.iter().map(|p| p.center()).collect()
    }
}

/// p -> scale * rotation * p + translation.
#[derive(Debug, Clone, PartialEq)]
pub struct SimilarityTransform {
    pub scale: f64,
    pub rotation: Mat3,
    pub translation: Vec3,
}

impl SimilarityTransform {
    pub fn apply(&self, p: &Vec3) -> Vec3 {
        self.scale * (self.rotation * p) + self.translation
    }
}

/// Rotation angle in radians from a rotation matrix, arccos of
/// (trace - 1)/2 with the argument clamped to [-1, 1].
pub fn rotation_angle(r: &Mat3) -> f64 {
    libm::acos(((r.trace() - 1.0) / 2.0).clamp(-1.0, 1.0))
}

const DEGENERACY_VARIANCE_FLOOR: f64 = 1e-18;

/// Least-squares similarity aligning estimate centers onto reference
/// centers: minimizes the sum of |s R c_est + t - c_ref|^2. With
/// `with_scale` false the scale is pinned to 1.
///
/// Needs at least three poses and non-coincident centers on both sides.
/// Collinear centers leave the rotation non-unique but the minimum
/// residual is still well defined; no error is raised for that case.
pub fn umeyama_align(
    estimate: &PoseTrack,
    reference: &PoseTrack,
    with_scale: bool,
) -> Result<SimilarityTransform, MetricsError> {
    if estimate.len() != reference.len() {
        return Err(MetricsError::LengthMismatch {
            estimate: estimate.len(),
            reference: reference.len(),
        });
    }
    let n = estimate.len();
    if n < 3 {
        return Err(MetricsError::Degenerate("fewer than three poses"));
    }
    let xs = estimate.centers();
    let ys = reference.centers();
    let inv_n = 1.0 / n as f64;
    let mean_x: Vec3 = xs.iter().sum::<Vec3>() * inv_n;
    let mean_y: Vec3 = ys.iter().sum::<Vec3>() * inv_n;
    let var_x: f64 = xs.iter().map(|x| (x - mean_x).norm_squared()).sum::<f64>() * inv_n;
    let var_y: f64 = ys.iter().map(|y| (y - mean_y).norm_squared()).sum::<f64>() * inv_n;
    if var_x <= DEGENERACY_VARIANCE_FLOOR || var_y <= DEGENERACY_VARIANCE_FLOOR {
        return Err(MetricsError::Degenerate("camera centers coincide"));
    }

    let mut cross = Mat3::zeros();
    for (x, y) in xs.iter().zip(&ys) {
        cross += (y - mean_y) * (x - mean_x).transpose();
    }
    cross *= inv_n;

    let svd = cross.svd(true, true);
    let u = svd.u.expect("3x3 svd yields u");
    let v_t = svd.v_t.expect("3x3 svd yields v_t");
    let sv = svd.singular_values;
    // Proper-rotation correction goes on the smallest singular value;
    // nalgebra does not guarantee a sorted order, so find it.
    let mut min_idx = 0;
    for i in 1..3 {
        if sv[i] < sv[min_idx] {
            min_idx = i;
        }
    }
    let flip = u.determinant() * v_t.determinant() < 0.0;
    let mut d = Vector3::new(1.0, 1.0, 1.0);
    if flip {
        d[min_idx] = -1.0;
    }
    let rotation = u * Mat3::from_diagonal(&d) * v_t;
    let trace_ds = sv.iter().zip(d.iter()).map(|(s, f)| s * f).sum::<f64>();
    let scale = if with_scale { trace_ds / var_x } else { 1.0 };
    let translation = mean_y - scale * (rotation * mean_x);
    Ok(SimilarityTransform {
        scale,
        rotation,
        translation,
    })
}

/// Root-mean-square center residual after similarity alignment.
pub fn ate(
    estimate: &PoseTrack,
    reference: &PoseTrack,
    with_scale: bool,
) -> Result<f64, MetricsError> {
    let transform = umeyama_align(estimate, reference, with_scale)?;
    let n = estimate.len() as f64;
    let sum_sq: f64 = estimate
        .centers()
        .iter()
        .zip(reference.centers().iter())
        .map(|(x, y)| (transform.apply(x) - y).norm_squared())
        .sum();
    Ok(libm::sqrt(sum_sq / n))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RpeResult {
    /// RMS of relative-translation error norms, world units.
    pub translation_rms: f64,
    /// RMS of relative-rotation error angles, radians.
    pub rotation_rms: f64,
}

/// Relative pose error over a frame gap. For each window the estimate's
/// relative motion is compared against the reference's: the error pose is
/// rel_ref^-1 * rel_est, scored by translation norm and rotation angle.
pub fn rpe(
    estimate: &PoseTrack,
    reference: &PoseTrack,
    delta: usize,
) -> Result<RpeResult, MetricsError> {
    if estimate.len() != reference.len() {
        return Err(MetricsError::LengthMismatch {
            estimate: estimate.len(),
            reference: reference.len(),
        });
    }
    let n = estimate.len();
    if delta == 0 || delta >= n {
        return Err(MetricsError::BadDelta { delta, len: n });
    }
    let count = n - delta;
    let mut sum_t = 0.0;
    let mut sum_r = 0.0;
    for i in 0..count {
        let rel_est = relative(&estimate.poses[i], &estimate.poses[i + delta]);
        let rel_ref = relative(&reference.poses[i], &reference.poses[i + delta]);
        let error = compose(&rel_est, &rel_ref.inverse());
        sum_t += error.translation().norm_squared();
        let angle = rotation_angle(error.rotation());
        sum_r += angle * angle;
    }
    Ok(RpeResult {
        translation_rms: libm::sqrt(sum_t / count as f64),
        rotation_rms: libm::sqrt(sum_r / count as f64),
    })
}

/// Relative motion a^-1 * b in homogeneous form.
fn relative(a: &CameraPose, b: &CameraPose) -> CameraPose {
    compose(b, &a.inverse())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{
        build_primitive, nearest_rotation, MotionDirection, MotionKind, MotionPrimitive,
    };
    use nalgebra::Rotation3;

    fn pose_at_center(c: Vec3) -> CameraPose {
        // Identity rotation: center -R^T t = -t.
        CameraPose::new(Mat3::identity(), -c).unwrap()
    }

    fn line_track(n: usize) -> PoseTrack {
        PoseTrack::new(
            (0..n)
                .map(|i| pose_at_center(Vec3::new(i as f64, 0.0, 0.0)))
                .collect(),
        )
    }

    fn arc_track(n: usize) -> PoseTrack {
        let primitive = MotionPrimitive {
            kind: MotionKind::Rotate,
            direction: MotionDirection::Clockwise,
            magnitude: 60.0,
            frames: n,
        };
        PoseTrack::new(build_primitive(&primitive, Some(3.0)).unwrap().poses().to_vec())
    }

    #[test]
    fn identical_tracks_align_to_identity() {
        let track = arc_track(8);
        let t = umeyama_align(&track, &track, true).unwrap();
        assert!((t.scale - 1.0).abs() < 1e-12);
        assert!((t.rotation - Mat3::identity()).abs().max() < 1e-12);
        assert!(t.translation.norm() < 1e-12);
        assert!(ate(&track, &track, true).unwrap() < 1e-12);
    }

    #[test]
    fn construct_and_invert_similarity() {
        let reference = arc_track(9);
        let r0 = Rotation3::from_scaled_axis(Vec3::new(0.3, -0.8, 0.5)).into_inner();
        let t0 = Vec3::new(2.0, -1.0, 4.0);
        // Estimate centers are reference centers scaled by 2, rotated, shifted.
        let estimate = PoseTrack::new(
            reference
                .poses()
                .iter()
                .map(|p| pose_at_center(r0 * (2.0 * p.center()) + t0))
                .collect(),
        );
        let t = umeyama_align(&estimate, &reference, true).unwrap();
        assert!((t.scale - 0.5).abs() < 1e-9);
        assert!((t.rotation - r0.transpose()).abs().max() < 1e-9);
        let expected_t = -0.5 * (r0.transpose() * t0);
        assert!((t.translation - expected_t).norm() < 1e-9);
        assert!(ate(&estimate, &reference, true).unwrap() < 1e-9);
    }

    #[test]
    fn short_or_coincident_tracks_are_degenerate() {
        let two = PoseTrack::new(vec![CameraPose::identity(), CameraPose::identity()]);
        assert!(matches!(
            umeyama_align(&two, &two, true),
            Err(MetricsError::Degenerate(_))
        ));
        let stuck = PoseTrack::new(vec![CameraPose::identity(); 5]);
        assert!(matches!(
            umeyama_align(&stuck, &stuck, true),
            Err(MetricsError::Degenerate(_))
        ));
        let fine = arc_track(5);
        assert!(matches!(
            umeyama_align(&fine, &line_track(4), true),
            Err(MetricsError::LengthMismatch { .. })
        ));
    }

    #[test]
    fn ate_is_invariant_under_global_similarity() {
        let reference = arc_track(10);
        let r0 = Rotation3::from_scaled_axis(Vec3::new(-1.0, 0.4, 0.2)).into_inner();
        let estimate = PoseTrack::new(
            reference
                .poses()
                .iter()
                .map(|p| pose_at_center(r0 * (0.37 * p.center()) + Vec3::new(5.0, 5.0, -2.0)))
                .collect(),
        );
        assert!(ate(&estimate, &reference, true).unwrap() < 1e-9);
    }

    #[test]
    fn displaced_line_matches_brute_force_least_squares() {
        let reference = line_track(5);
        let mut centers: Vec<Vec3> = reference.poses().iter().map(|p| p.center()).collect();
        centers[2] += Vec3::new(0.0, 0.5, 0.0);
        let estimate = PoseTrack::new(centers.iter().map(|c| pose_at_center(*c)).collect());

        let got = ate(&estimate, &reference, true).unwrap();

        // Independent optimizer: coordinate descent on the rotation
        // vector with closed-form scale/translation per candidate.
        let xs: Vec<Vec3> = centers.clone();
        let ys: Vec<Vec3> = reference.poses().iter().map(|p| p.center()).collect();
        let rms = |axis_angle: Vec3| -> f64 {
            let r = Rotation3::from_scaled_axis(axis_angle).into_inner();
            let n = xs.len() as f64;
            let mean_x: Vec3 = xs.iter().sum::<Vec3>() / n;
            let mean_y: Vec3 = ys.iter().sum::<Vec3>() / n;
            let mut num = 0.0;
            let mut den = 0.0;
            for (x, y) in xs.iter().zip(&ys) {
                num += (y - mean_y).dot(&(r * (x - mean_x)));
                den += (x - mean_x).norm_squared();
            }
            let s = num / den;
            let t = mean_y - s * (r * mean_x);
            let sum_sq: f64 = xs
                .iter()
                .zip(&ys)
                .map(|(x, y)| (s * (r * x) + t - y).norm_squared())
                .sum();
            (sum_sq / n).sqrt()
        };
        let mut best = Vec3::zeros();
        let mut best_rms = rms(best);
        let mut step = 0.5;
        while step > 1e-8 {
            let mut improved = false;
            for axis in 0..3 {
                for sign in [-1.0, 1.0] {
                    let mut candidate = best;
                    candidate[axis] += sign * step;
                    let value = rms(candidate);
                    if value < best_rms {
                        best_rms = value;
                        best = candidate;
                        improved = true;
                    }
                }
            }
            if !improved {
                step *= 0.5;
            }
        }
        assert!(
            (got - best_rms).abs() < 1e-6,
            "closed form {got} vs optimizer {best_rms}"
        );
    }

    #[test]
    fn rpe_zero_for_identical_and_offset_tracks() {
        let reference = arc_track(12);
        let zero = rpe(&reference, &reference, 1).unwrap();
        // arccos has unbounded slope at 1, so round-off in a perfectly
        // matching rotation still reads as an angle of order 1e-8.
        assert!(zero.translation_rms < 1e-12 && zero.rotation_rms < 1e-7);

        // A fixed rigid transform applied after every pose leaves the
        // relative motions unchanged.
        let w = CameraPose::new(
            nearest_rotation(&Rotation3::from_scaled_axis(Vec3::new(0.2, 0.3, -0.4)).into_inner()),
            Vec3::new(1.0, -2.0, 0.5),
        )
        .unwrap();
        let estimate = PoseTrack::new(
            reference.poses().iter().map(|p| compose(p, &w)).collect(),
        );
        let offset = rpe(&estimate, &reference, 1).unwrap();
        assert!(offset.translation_rms < 1e-9, "{}", offset.translation_rms);
        assert!(offset.rotation_rms < 1e-7, "{}", offset.rotation_rms);
    }

    #[test]
    fn single_injected_rotation_error_matches_closed_form() {
        let reference = arc_track(10);
        let err_angle = 10.0_f64.to_radians();
        let w = CameraPose::new(
            Rotation3::from_scaled_axis(Vec3::new(0.0, err_angle, 0.0)).into_inner(),
            Vec3::zeros(),
        )
        .unwrap();
        // Rebuild the estimate from relative motions, corrupting step 4.
        let mut poses = vec![*reference.poses().first().unwrap()];
        for i in 0..9 {
            let rel = relative(&reference.poses()[i], &reference.poses()[i + 1]);
            let rel = if i == 4 { compose(&w, &rel) } else { rel };
            let next = compose(&rel, poses.last().unwrap());
            poses.push(next);
        }
        let estimate = PoseTrack::new(poses);
        let result = rpe(&estimate, &reference, 1).unwrap();
        let expected_r = err_angle / 3.0; // sqrt(theta^2 / 9)
        assert!(
            (result.rotation_rms - expected_r).abs() < 1e-9,
            "got {}, expected {expected_r}",
            result.rotation_rms
        );
        assert!(result.translation_rms < 1e-9);
    }

    #[test]
    fn rpe_delta_bounds() {
        let track = arc_track(6);
        assert!(matches!(
            rpe(&track, &track, 0),
            Err(MetricsError::BadDelta { .. })
        ));
        assert!(matches!(
            rpe(&track, &track, 6),
            Err(MetricsError::BadDelta { .. })
        ));
        let wide = rpe(&track, &track, 5).unwrap();
        assert!(wide.translation_rms < 1e-12);
    }

    #[test]
    fn track_index_validation() {
        let poses = vec![CameraPose::identity(); 3];
        assert!(PoseTrack::with_indices(poses.clone(), vec![0, 2, 5]).is_ok());
        assert!(matches!(
            PoseTrack::with_indices(poses.clone(), vec![0, 2, 2]),
            Err(MetricsError::IndicesNotIncreasing)
        ));
        assert!(matches!(
            PoseTrack::with_indices(poses, vec![0, 1]),
            Err(MetricsError::IndexCount { .. })
        ));
    }
}
