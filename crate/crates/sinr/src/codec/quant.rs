//! Uniform scalar quantization with per-block min/max ranges.
//!
//! Ranges are stored as f32 (that is what the container serializes), so the
//! block is built against the f32-rounded bounds: codes computed here and
//! values dequantized later from the serialized range agree exactly.

use crate::error::Error;
use crate::Result;

/// Codes for one value block: `codes[i]` in [0, 2^bitwidth) maps affinely
/// onto [vmin, vmax].
#[derive(Debug, Clone, PartialEq)]
pub struct QuantizedBlock {
    pub bitwidth: u8,
    pub vmin: f32,
    pub vmax: f32,
    pub codes: Vec<u16>,
}

fn max_code(bitwidth: u8) -> f64 {
    ((1u32 << bitwidth) - 1) as f64
}

fn check_bitwidth(bitwidth: u8) -> Result<()> {
    if !(1..=16).contains(&bitwidth) {
        return Err(Error::invalid(format!("bitwidth must lie in 1..=16, got {bitwidth}")));
    }
    Ok(())
}

/// Quantizes `values` to `bitwidth` bits: code = round((v - vmin) / (vmax -
/// vmin) * (2^b - 1)), rounding half away from zero. A degenerate range
/// (vmin = vmax, including the empty block) maps everything to code 0.
pub fn quantize(values: &[f64], bitwidth: u8) -> Result<QuantizedBlock> {
    check_bitwidth(bitwidth)?;
    if let Some(bad) = values.iter().find(|v| !v.is_finite()) {
        return Err(Error::NonFinite(format!("quantizer input {bad}")));
    }
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for v in values {
        lo = lo.min(*v);
        hi = hi.max(*v);
    }
    let (vmin, vmax) = if values.is_empty() { (0.0f32, 0.0f32) } else { (lo as f32, hi as f32) };
    let span = vmax as f64 - vmin as f64;
    let levels = max_code(bitwidth);
    let codes = if span <= 0.0 {
        vec![0u16; values.len()]
    } else {
        values
            .iter()
            .map(|v| {
                let code = ((v - vmin as f64) / span * levels).round();
                code.clamp(0.0, levels) as u16
            })
            .collect()
    };
    Ok(QuantizedBlock { bitwidth, vmin, vmax, codes })
}

/// Inverts [`quantize`]: v = vmin + code / (2^b - 1) * (vmax - vmin).
pub fn dequantize(block: &QuantizedBlock) -> Vec<f64> {
    dequantize_parts(block.vmin, block.vmax, block.bitwidth, &block.codes)
}

/// [`dequantize`] on loose parts, for callers holding serialized fields.
pub fn dequantize_parts(vmin: f32, vmax: f32, bitwidth: u8, codes: &[u16]) -> Vec<f64> {
    let span = vmax as f64 - vmin as f64;
    let levels = max_code(bitwidth);
    codes.iter().map(|c| vmin as f64 + *c as f64 / levels * span).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::SplitMix64;

    #[test]
    fn range_endpoints_hit_code_extremes() {
        let block = quantize(&[-3.5, 1.0, 2.25], 16).unwrap();
        assert_eq!(block.codes[0], 0);
        assert_eq!(block.codes[2], 65535);
        let back = dequantize(&block);
        assert_eq!(back[0], -3.5);
        assert_eq!(back[2], 2.25);
    }

    #[test]
    fn symmetric_unit_range_rounds_midpoint_away_from_zero() {
        let block = quantize(&[-1.0, 0.0, 1.0], 16).unwrap();
        assert_eq!(block.codes, vec![0, 32768, 65535]);
        let back = dequantize(&block);
        // the midpoint sits exactly on a half step: error = span/(2*(2^16-1))
        let half_step = 2.0 / (2.0 * 65535.0);
        for (v, w) in [-1.0, 0.0, 1.0].iter().zip(&back) {
            assert!((v - w).abs() <= half_step + 1e-12, "{v} -> {w}");
        }
    }

    #[test]
    fn constant_blocks_round_trip_exactly() {
        let block = quantize(&[0.75; 10], 16).unwrap();
        assert!(block.codes.iter().all(|c| *c == 0));
        assert_eq!(dequantize(&block), vec![0.75; 10]);
    }

    #[test]
    fn empty_block_is_degenerate_but_valid() {
        let block = quantize(&[], 16).unwrap();
        assert_eq!(block.codes.len(), 0);
        assert_eq!(dequantize(&block).len(), 0);
    }

    #[test]
    fn round_trip_error_stays_within_half_step() {
        let mut rng = SplitMix64::new(77);
        for bitwidth in [4u8, 8, 12, 16] {
            let values: Vec<f64> = (0..997).map(|_| rng.next_symmetric(3.0)).collect();
            let block = quantize(&values, bitwidth).unwrap();
            assert!(block.codes.iter().all(|c| (*c as u32) < (1u32 << bitwidth)));
            let span = block.vmax as f64 - block.vmin as f64;
            let half_step = span / (2.0 * (((1u32 << bitwidth) - 1) as f64));
            // f32 range rounding adds a sliver on top of the half step
            let slack = half_step + 1e-6 * span.abs().max(1.0);
            for (v, w) in values.iter().zip(dequantize(&block)) {
                assert!((v - w).abs() <= slack, "bitwidth {bitwidth}: {v} -> {w}");
            }
        }
    }

    #[test]
    fn dequantized_values_never_escape_the_range() {
        let mut rng = SplitMix64::new(5);
        let values: Vec<f64> = (0..500).map(|_| rng.next_symmetric(10.0)).collect();
        let block = quantize(&values, 7).unwrap();
        for w in dequantize(&block) {
            assert!(w >= block.vmin as f64 - 1e-12 && w <= block.vmax as f64 + 1e-12);
        }
    }

    #[test]
    fn invalid_inputs_are_rejected() {
        assert!(quantize(&[1.0], 0).is_err());
        assert!(quantize(&[1.0], 17).is_err());
        assert!(quantize(&[f64::NAN], 16).is_err());
        assert!(quantize(&[f64::INFINITY], 16).is_err());
    }
}
