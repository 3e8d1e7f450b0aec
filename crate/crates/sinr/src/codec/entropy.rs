//! The entropy-coding boundary: everything below this line is a Brotli
//! stream (RFC 7932) at quality 11 with a 22-bit window — pinned so that
//! identical containers produce identical files everywhere.

use crate::error::Error;
use crate::Result;

const QUALITY: i32 = 11;
const LG_WINDOW: i32 = 22;

/// Wraps a serialized container in a Brotli stream.
pub fn entropy_wrap(payload: &[u8]) -> Result<Vec<u8>> {
    let mut params = brotli::enc::BrotliEncoderParams::default();
    params.quality = QUALITY;
    params.lgwin = LG_WINDOW;
    let mut out = Vec::new();
    let mut input = payload;
    brotli::enc::BrotliCompress(&mut input, &mut out, &params)
        .map_err(|e| Error::format(format!("entropy coding failed: {e}")))?;
    Ok(out)
}

/// Inverts [`entropy_wrap`], surfacing malformed streams as format errors.
pub fn entropy_unwrap(bytes: &[u8]) -> Result<Vec<u8>> {
    let mut out = Vec::new();
    let mut input = bytes;
    brotli::BrotliDecompress(&mut input, &mut out)
        .map_err(|e| Error::format(format!("malformed entropy stream: {e}")))?;
    Ok(out)
}
