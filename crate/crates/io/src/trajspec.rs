//! JSON trajectory specifications.
//!
//! Two mutually exclusive forms:
//!
//! ```json
//! {"motions": [{"kind": "pan", "direction": "left", "magnitude": 20.0, "frames": 14}],
//!  "mode": "simultaneous", "focus_distance": 2.0}
//! ```
//!
//! builds the track from named motion primitives, while
//!
//! ```json
//! {"extrinsics": [[1,0,0,0, 0,1,0,0, 0,0,1,0, 0,0,0,1]]}
//! ```
//!
//! imports explicit row-major matrices (16 or 12 numbers per frame).
//! `mode` defaults to `"simultaneous"`; `focus_distance` feeds the rotate
//! kind and is rejected alongside `extrinsics`, where it has no meaning.

use serde::{Deserialize, Serialize};
use vantage_core::geometry::{
    build_primitive, combine, from_extrinsics, CombineMode, MotionDirection, MotionKind,
    MotionPrimitive, Trajectory,
};

use crate::error::CodecError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum KindSpec {
    Zoom,
    Tilt,
    Pan,
    Pedestal,
    Truck,
    Roll,
    Rotate,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DirectionSpec {
    In,
    Out,
    Up,
    Down,
    Left,
    Right,
    Clockwise,
    Anticlockwise,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModeSpec {
    Simultaneous,
    Sequential,
}

impl From<KindSpec> for MotionKind {
    fn from(k: KindSpec) -> MotionKind {
        match k {
            KindSpec::Zoom => MotionKind::Zoom,
            KindSpec::Tilt => MotionKind::Tilt,
            KindSpec::Pan => MotionKind::Pan,
            KindSpec::Pedestal => MotionKind::Pedestal,
            KindSpec::Truck => MotionKind::Truck,
            KindSpec::Roll => MotionKind::Roll,
            KindSpec::Rotate => MotionKind::Rotate,
        }
    }
}

impl From<DirectionSpec> for MotionDirection {
    fn from(d: DirectionSpec) -> MotionDirection {
        match d {
            DirectionSpec::In => MotionDirection::In,
            DirectionSpec::Out => MotionDirection::Out,
            DirectionSpec::Up => MotionDirection::Up,
            DirectionSpec::Down => MotionDirection::Down,
            DirectionSpec::Left => MotionDirection::Left,
            DirectionSpec::Right => MotionDirection::Right,
            DirectionSpec::Clockwise => MotionDirection::Clockwise,
            DirectionSpec::Anticlockwise => MotionDirection::Anticlockwise,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MotionSpec {
    pub kind: KindSpec,
    pub direction: DirectionSpec,
    pub magnitude: f64,
    pub frames: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrajectorySpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub motions: Option<Vec<MotionSpec>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mode: Option<ModeSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub focus_distance: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub extrinsics: Option<Vec<Vec<f64>>>,
}

pub fn parse_spec(json: &str) -> Result<TrajectorySpec, CodecError> {
    let spec: TrajectorySpec =
        serde_json::from_str(json).map_err(|e| CodecError::Spec(e.to_string()))?;
    match (&spec.motions, &spec.extrinsics) {
        (Some(_), Some(_)) => {
            return Err(CodecError::Spec(
                "\"motions\" and \"extrinsics\" are mutually exclusive".into(),
            ))
        }
        (None, None) => {
            return Err(CodecError::Spec(
                "one of \"motions\" or \"extrinsics\" is required".into(),
            ))
        }
        _ => {}
    }
    if spec.extrinsics.is_some() && (spec.mode.is_some() || spec.focus_distance.is_some()) {
        return Err(CodecError::Spec(
            "\"mode\" and \"focus_distance\" apply only to \"motions\"".into(),
        ));
    }
    if let Some(motions) = &spec.motions {
        if motions.is_empty() {
            return Err(CodecError::Spec("\"motions\" must not be empty".into()));
        }
    }
    Ok(spec)
}

/// Realizes the spec as a pose track. `fallback_focus` is used for the
/// rotate kind when the spec itself names no focus distance.
pub fn build_trajectory(
    spec: &TrajectorySpec,
    fallback_focus: Option<f64>,
) -> Result<Trajectory, CodecError> {
    if let Some(matrices) = &spec.extrinsics {
        return from_extrinsics(matrices).map_err(|e| CodecError::Spec(e.to_string()));
    }
    let motions = spec
        .motions
        .as_ref()
        .ok_or_else(|| CodecError::Spec("one of \"motions\" or \"extrinsics\" is required".into()))?;
    let focus = spec.focus_distance.or(fallback_focus);
    let mut parts = Vec::with_capacity(motions.len());
    for m in motions {
        let primitive = MotionPrimitive {
            kind: m.kind.into(),
            direction: m.direction.into(),
            magnitude: m.magnitude,
            frames: m.frames,
        };
        parts.push(build_primitive(&primitive, focus).map_err(|e| CodecError::Spec(e.to_string()))?);
    }
    let mode = match spec.mode.unwrap_or(ModeSpec::Simultaneous) {
        ModeSpec::Simultaneous => CombineMode::Simultaneous,
        ModeSpec::Sequential => CombineMode::Sequential,
    };
    combine(&parts, mode).map_err(|e| CodecError::Spec(e.to_string()))
}
