//! Single-channel PFM codec for float rasters (depths, latent planes).
//!
//! Writes the little-endian form: `Pf\nW H\n-1.0\n` followed by one f32 per
//! pixel, rows ordered bottom-to-top as the format demands. The reader also
//! accepts a positive scale (big-endian payload) and swaps bytes. Values
//! pass through `f32`, so writing narrows f64 inputs; reading widens
//! losslessly, which makes read-then-write byte-stable.

use vantage_core::raster::ScalarRaster;

use crate::error::CodecError;
use crate::pnm::Scanner;

pub fn encode_pfm(raster: &ScalarRaster) -> Vec<u8> {
    let (w, h) = (raster.width(), raster.height());
    let mut out = format!("Pf\n{w} {h}\n-1.0\n").into_bytes();
    out.reserve(w * h * 4);
    for y in (0..h).rev() {
        for x in 0..w {
            out.extend_from_slice(&(raster.get(x, y) as f32).to_le_bytes());
        }
    }
    out
}

pub fn decode_pfm(bytes: &[u8]) -> Result<ScalarRaster, CodecError> {
    let mut scanner = Scanner::new(bytes);
    let (tok, offset) = scanner.token()?;
    if tok == b"PF" {
        return Err(CodecError::Parse {
            offset,
            message: "three-channel PFM is not supported; expected grayscale magic \"Pf\"".into(),
        });
    }
    if tok != b"Pf" {
        return Err(CodecError::Parse {
            offset,
            message: format!("expected magic \"Pf\", found {:?}", String::from_utf8_lossy(tok)),
        });
    }
    let width = scanner.unsigned("width")?;
    let height = scanner.unsigned("height")?;
    let (scale, offset) = scanner.token_parsed::<f64>("scale")?;
    if scale == 0.0 || !scale.is_finite() {
        return Err(CodecError::Parse { offset, message: format!("invalid scale {scale}") });
    }
    if width == 0 || height == 0 {
        return Err(CodecError::Parse { offset, message: "image dimensions must be nonzero".into() });
    }
    let payload = scanner.payload()?;
    let expected = width * height * 4;
    if payload.len() < expected {
        return Err(CodecError::Truncated { expected, actual: payload.len() });
    }
    if payload.len() > expected {
        return Err(CodecError::Trailing { offset: bytes.len() - (payload.len() - expected) });
    }
    let little_endian = scale < 0.0;
    let mut raster = ScalarRaster::new(width, height);
    for (i, chunk) in payload.chunks_exact(4).enumerate() {
        let raw = [chunk[0], chunk[1], chunk[2], chunk[3]];
        let value = if little_endian {
            f32::from_le_bytes(raw)
        } else {
            f32::from_be_bytes(raw)
        };
        // Payload rows run bottom-to-top.
        let x = i % width;
        let y = height - 1 - i / width;
        raster.set(x, y, f64::from(value));
    }
    Ok(raster)
}
