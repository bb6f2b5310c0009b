//! Binary PPM (P6) and PGM (P5) codecs.
//!
//! Color frames quantize to 8 bits per channel; masks map known pixels to
//! 255 and holes to 0. The reader tolerates the usual PNM liberties
//! (arbitrary whitespace between header tokens, `#` comments), the writer
//! always emits the canonical `P6\nW H\n255\n` form so encode(decode(x))
//! is byte-identical for canonical input.

use vantage_core::raster::{ColorRaster, MaskRaster};

use crate::error::CodecError;

/// 8-bit RGB image, row-major, three bytes per pixel.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Rgb8Image {
    pub width: usize,
    pub height: usize,
    pub data: Vec<u8>,
}

/// 8-bit grayscale image, row-major, one byte per pixel.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Gray8Image {
    pub width: usize,
    pub height: usize,
    pub data: Vec<u8>,
}

/// Clamps to [0, 1] and rounds each channel to the nearest of 256 levels.
pub fn quantize_color(raster: &ColorRaster) -> Rgb8Image {
    let data = raster
        .data()
        .iter()
        .map(|&v| (v.clamp(0.0, 1.0) * 255.0).round() as u8)
        .collect();
    Rgb8Image { width: raster.width(), height: raster.height(), data }
}

/// Maps each 8-bit channel back to `value / 255`.
pub fn dequantize_color(image: &Rgb8Image) -> ColorRaster {
    let data = image.data.iter().map(|&b| f64::from(b) / 255.0).collect();
    ColorRaster::from_data(image.width, image.height, data)
        .expect("Rgb8Image carries a consistent shape")
}

/// Known pixels become 255, holes become 0.
pub fn mask_to_gray(mask: &MaskRaster) -> Gray8Image {
    let data = mask.data().iter().map(|&known| if known { 255u8 } else { 0u8 }).collect();
    Gray8Image { width: mask.width(), height: mask.height(), data }
}

/// Any nonzero byte counts as a known pixel.
pub fn gray_to_mask(image: &Gray8Image) -> MaskRaster {
    let data = image.data.iter().map(|&b| b != 0).collect();
    MaskRaster::from_data(image.width, image.height, data)
        .expect("Gray8Image carries a consistent shape")
}

pub fn encode_ppm(image: &Rgb8Image) -> Vec<u8> {
    debug_assert_eq!(image.data.len(), image.width * image.height * 3);
    let mut out = format!("P6\n{} {}\n255\n", image.width, image.height).into_bytes();
    out.extend_from_slice(&image.data);
    out
}

pub fn encode_pgm(image: &Gray8Image) -> Vec<u8> {
    debug_assert_eq!(image.data.len(), image.width * image.height);
    let mut out = format!("P5\n{} {}\n255\n", image.width, image.height).into_bytes();
    out.extend_from_slice(&image.data);
    out
}

pub fn decode_ppm(bytes: &[u8]) -> Result<Rgb8Image, CodecError> {
    let (width, height, payload) = decode_pnm_header(bytes, "P6")?;
    let expected = width * height * 3;
    check_payload(payload, expected, bytes.len())?;
    Ok(Rgb8Image { width, height, data: payload.to_vec() })
}

pub fn decode_pgm(bytes: &[u8]) -> Result<Gray8Image, CodecError> {
    let (width, height, payload) = decode_pnm_header(bytes, "P5")?;
    let expected = width * height;
    check_payload(payload, expected, bytes.len())?;
    Ok(Gray8Image { width, height, data: payload.to_vec() })
}

fn check_payload(payload: &[u8], expected: usize, total: usize) -> Result<(), CodecError> {
    if payload.len() < expected {
        return Err(CodecError::Truncated { expected, actual: payload.len() });
    }
    if payload.len() > expected {
        return Err(CodecError::Trailing { offset: total - (payload.len() - expected) });
    }
    Ok(())
}

/// Parses `magic width height maxval` and returns the raw payload after the
/// single whitespace byte that terminates the header. maxval must be 255.
fn decode_pnm_header<'a>(
    bytes: &'a [u8],
    magic: &str,
) -> Result<(usize, usize, &'a [u8]), CodecError> {
    let mut scanner = Scanner::new(bytes);
    let (tok, offset) = scanner.token()?;
    if tok != magic.as_bytes() {
        return Err(CodecError::Parse {
            offset,
            message: format!("expected magic {magic:?}, found {:?}", String::from_utf8_lossy(tok)),
        });
    }
    let width = scanner.unsigned("width")?;
    let height = scanner.unsigned("height")?;
    let (maxval, offset) = scanner.token_parsed::<u32>("maxval")?;
    if maxval != 255 {
        return Err(CodecError::Parse {
            offset,
            message: format!("maxval must be 255, found {maxval}"),
        });
    }
    if width == 0 || height == 0 {
        return Err(CodecError::Parse { offset, message: "image dimensions must be nonzero".into() });
    }
    let payload = scanner.payload()?;
    Ok((width, height, payload))
}

/// Whitespace- and comment-aware tokenizer over a PNM-style header.
/// Tracks byte offsets so errors point at the exact spot.
pub(crate) struct Scanner<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Scanner<'a> {
    pub(crate) fn new(bytes: &'a [u8]) -> Self {
        Scanner { bytes, pos: 0 }
    }

    fn skip_separators(&mut self) {
        while self.pos < self.bytes.len() {
            match self.bytes[self.pos] {
                b' ' | b'\t' | b'\r' | b'\n' => self.pos += 1,
                b'#' => {
                    while self.pos < self.bytes.len() && self.bytes[self.pos] != b'\n' {
                        self.pos += 1;
                    }
                }
                _ => break,
            }
        }
    }

    /// Next whitespace-delimited token and the offset it starts at.
    pub(crate) fn token(&mut self) -> Result<(&'a [u8], usize), CodecError> {
        self.skip_separators();
        if self.pos >= self.bytes.len() {
            return Err(CodecError::Parse {
                offset: self.bytes.len(),
                message: "unexpected end of header".into(),
            });
        }
        let start = self.pos;
        while self.pos < self.bytes.len() && !self.bytes[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
        Ok((&self.bytes[start..self.pos], start))
    }

    pub(crate) fn token_parsed<T: core::str::FromStr>(
        &mut self,
        what: &str,
    ) -> Result<(T, usize), CodecError> {
        let (tok, offset) = self.token()?;
        let text = core::str::from_utf8(tok).map_err(|_| CodecError::Parse {
            offset,
            message: format!("{what} is not ASCII"),
        })?;
        let value = text.parse::<T>().map_err(|_| CodecError::Parse {
            offset,
            message: format!("cannot parse {what} from {text:?}"),
        })?;
        Ok((value, offset))
    }

    pub(crate) fn unsigned(&mut self, what: &str) -> Result<usize, CodecError> {
        Ok(self.token_parsed::<usize>(what)?.0)
    }

    /// Consumes exactly one whitespace byte after the final header token and
    /// returns the rest of the input as the binary payload.
    pub(crate) fn payload(&mut self) -> Result<&'a [u8], CodecError> {
        if self.pos >= self.bytes.len() || !self.bytes[self.pos].is_ascii_whitespace() {
            return Err(CodecError::Parse {
                offset: self.pos,
                message: "header must end with a single whitespace byte".into(),
            });
        }
        self.pos += 1;
        Ok(&self.bytes[self.pos..])
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample_rgb() -> Rgb8Image {
        Rgb8Image {
            width: 3,
            height: 2,
            data: vec![
                0, 1, 2, 10, 20, 30, 250, 251, 252, 5, 6, 7, 100, 120, 140, 200, 220, 240,
            ],
        }
    }

    #[test]
    fn ppm_round_trips_bytes() {
        let img = sample_rgb();
        let encoded = encode_ppm(&img);
        let decoded = decode_ppm(&encoded).unwrap();
        assert_eq!(decoded, img);
        assert_eq!(encode_ppm(&decoded), encoded);
    }

    #[test]
    fn pgm_round_trips_bytes() {
        let img = Gray8Image { width: 2, height: 2, data: vec![0, 255, 7, 128] };
        let encoded = encode_pgm(&img);
        assert_eq!(decode_pgm(&encoded).unwrap(), img);
    }

    #[test]
    fn reader_accepts_comments_and_padding() {
        let mut bytes = b"P6 # magic\n# a comment line\n  3\t2 # dims\n255\n".to_vec();
        bytes.extend_from_slice(&sample_rgb().data);
        let decoded = decode_ppm(&bytes).unwrap();
        assert_eq!(decoded, sample_rgb());
    }

    #[test]
    fn wrong_magic_reports_offset_zero() {
        let err = decode_ppm(b"P5\n1 1\n255\n\0\0\0").unwrap_err();
        match err {
            CodecError::Parse { offset, .. } => assert_eq!(offset, 0),
            other => panic!("unexpected error {other:?}"),
        }
    }

    #[test]
    fn bad_maxval_reports_its_offset() {
        let err = decode_ppm(b"P6\n1 1\n65535\n\0\0\0").unwrap_err();
        match err {
            CodecError::Parse { offset, message } => {
                assert_eq!(offset, 7);
                assert!(message.contains("255"), "{message}");
            }
            other => panic!("unexpected error {other:?}"),
        }
    }

    #[test]
    fn truncated_payload_names_byte_counts() {
        let mut bytes = encode_ppm(&sample_rgb());
        bytes.truncate(bytes.len() - 4);
        match decode_ppm(&bytes).unwrap_err() {
            CodecError::Truncated { expected, actual } => {
                assert_eq!(expected, 18);
                assert_eq!(actual, 14);
            }
            other => panic!("unexpected error {other:?}"),
        }
    }

    #[test]
    fn trailing_garbage_is_rejected() {
        let mut bytes = encode_ppm(&sample_rgb());
        bytes.push(0xAA);
        assert!(matches!(decode_ppm(&bytes).unwrap_err(), CodecError::Trailing { .. }));
    }

    #[test]
    fn garbage_dimension_is_a_parse_error() {
        let err = decode_ppm(b"P6\nwide 2\n255\n").unwrap_err();
        match err {
            CodecError::Parse { offset, message } => {
                assert_eq!(offset, 3);
                assert!(message.contains("width"), "{message}");
            }
            other => panic!("unexpected error {other:?}"),
        }
    }

    #[test]
    fn quantization_rounds_to_nearest_level() {
        let mut raster = ColorRaster::new(2, 1);
        raster.set(0, 0, [0.0, 1.0, 0.5]);
        raster.set(1, 0, [-0.2, 1.7, 128.4 / 255.0]);
        let img = quantize_color(&raster);
        assert_eq!(img.data, vec![0, 255, 128, 0, 255, 128]);
        let back = dequantize_color(&img);
        assert!((back.get(0, 0)[2] - 128.0 / 255.0).abs() < 1e-15);
    }

    #[test]
    fn mask_round_trip_is_exact() {
        let mask =
            MaskRaster::from_data(2, 2, vec![true, false, false, true]).unwrap();
        let gray = mask_to_gray(&mask);
        assert_eq!(gray.data, vec![255, 0, 0, 255]);
        assert_eq!(gray_to_mask(&gray).data(), mask.data());
    }
}
