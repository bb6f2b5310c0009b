//! Plain-text pose tracks: one line per frame, twelve numbers per line,
//! the row-major 3x4 world-to-camera matrix. Blank lines and `#` comments
//! are skipped; a `#` inside a line starts a trailing comment.
//!
//! Floats are written with Rust's shortest round-trip formatting, so
//! export followed by import reproduces every pose bit-for-bit.

use vantage_core::geometry::{from_extrinsics, CameraPose, Trajectory};

use crate::error::CodecError;

pub fn encode_poses(poses: &[CameraPose]) -> String {
    let mut out = String::from("# row-major 3x4 world-to-camera matrix per line\n");
    for pose in poses {
        let rows = pose.to_rows_3x4();
        let line: Vec<String> = rows.iter().map(|v| format!("{v}")).collect();
        out.push_str(&line.join(" "));
        out.push('\n');
    }
    out
}

pub fn decode_poses(text: &str) -> Result<Trajectory, CodecError> {
    let mut matrices: Vec<[f64; 12]> = Vec::new();
    let mut source_lines: Vec<usize> = Vec::new();
    for (index, raw) in text.lines().enumerate() {
        let line_no = index + 1;
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let mut values = [0.0f64; 12];
        let mut count = 0;
        for field in line.split_ascii_whitespace() {
            if count == 12 {
                return Err(CodecError::Line {
                    line: line_no,
                    message: "expected 12 values, found more".into(),
                });
            }
            values[count] = field.parse::<f64>().map_err(|_| CodecError::Line {
                line: line_no,
                message: format!("cannot parse number from {field:?}"),
            })?;
            count += 1;
        }
        if count != 12 {
            return Err(CodecError::Line {
                line: line_no,
                message: format!("expected 12 values, found {count}"),
            });
        }
        matrices.push(values);
        source_lines.push(line_no);
    }
    if matrices.is_empty() {
        return Err(CodecError::Line { line: 1, message: "no poses found".into() });
    }
    from_extrinsics(&matrices).map_err(|err| {
        // Map matrix indices back to file lines where the error names one.
        let line = match &err {
            vantage_core::geometry::GeometryError::InvalidPose { index, .. } => {
                source_lines.get(*index).copied().unwrap_or(1)
            }
            _ => 1,
        };
        CodecError::Line { line, message: err.to_string() }
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use vantage_core::geometry::{
        build_primitive, MotionDirection, MotionKind, MotionPrimitive,
    };

    fn sample_track() -> Vec<CameraPose> {
        let t = build_primitive(
            &MotionPrimitive {
                kind: MotionKind::Rotate,
                direction: MotionDirection::Clockwise,
                magnitude: 33.0,
                frames: 6,
            },
            Some(2.5),
        )
        .unwrap();
        t.poses().to_vec()
    }

    #[test]
    fn round_trip_is_bitwise() {
        let poses = sample_track();
        let text = encode_poses(&poses);
        let decoded = decode_poses(&text).unwrap();
        assert_eq!(decoded.len(), poses.len());
        for (a, b) in decoded.poses().iter().zip(&poses) {
            assert_eq!(a.to_rows_3x4(), b.to_rows_3x4());
        }
    }

    #[test]
    fn comments_and_blank_lines_are_skipped() {
        let text = "# header\n\n1 0 0 0 0 1 0 0 0 0 1 0 # identity\n";
        let decoded = decode_poses(text).unwrap();
        assert_eq!(decoded.len(), 1);
        assert!(decoded.get(0).is_identity(0.0));
    }

    #[test]
    fn short_line_reports_line_number() {
        let text = "1 0 0 0 0 1 0 0 0 0 1 0\n1 0 0\n";
        match decode_poses(text).unwrap_err() {
            CodecError::Line { line, message } => {
                assert_eq!(line, 2);
                assert!(message.contains("12"), "{message}");
            }
            other => panic!("unexpected error {other:?}"),
        }
    }

    #[test]
    fn non_rotation_block_reports_its_line() {
        let text = "1 0 0 0 0 1 0 0 0 0 1 0\n2 0 0 0 0 2 0 0 0 0 2 0\n";
        match decode_poses(text).unwrap_err() {
            CodecError::Line { line, .. } => assert_eq!(line, 2),
            other => panic!("unexpected error {other:?}"),
        }
    }

    #[test]
    fn empty_input_is_an_error() {
        assert!(decode_poses("# nothing here\n").is_err());
    }
}
