//! The self-describing container: everything a decoder needs, in one
//! deterministic little-endian layout. No side information exists — seeds,
//! shapes, ranges, and activation parameters all travel in the header.
//!
//! Layout (all integers little-endian):
//!
//! ```text
//! magic "SINR" | version u16 | flags u8 | bitwidth u8
//! input_dim u32 | output_dim u32 | hidden_layers u32 | width u32
//! activation u8 | omega0 f32 | sigma f32 | pe_levels u32
//! master_seed u64 | layer_count u32
//! per layer:
//!   mode u8 | k1 u32 | k2 u32 | s u32
//!   bias block | values block | index_count u32 | indices u16[]
//! value block, flags bit 0 set   (lossless):  count u32 | values f32[]
//! value block, flags bit 0 clear (quantized): vmin f32 | vmax f32 | count u32 | codes u16[]
//! ```
//!
//! Layer modes: 0 codes each length-k1 column separately, 1 codes the whole
//! matrix as one flattened vector, 2 stores dense row-major weights directly
//! (the checkpoint / baseline form; k1, k2 double as rows, cols and s is 0).

use crate::codec::quant::dequantize_parts;
use crate::error::Error;
use crate::inr::{Activation, ActivationKind, Architecture};
use crate::sparse::MAX_ATOMS;
use crate::Result;

pub const CONTAINER_MAGIC: [u8; 4] = *b"SINR";
pub const FORMAT_VERSION: u16 = 1;

const FLAG_LOSSLESS: u8 = 0b0000_0001;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LayerMode {
    PerVector,
    Flattened,
    RawDense,
}

impl LayerMode {
    fn code(self) -> u8 {
        match self {
            LayerMode::PerVector => 0,
            LayerMode::Flattened => 1,
            LayerMode::RawDense => 2,
        }
    }

    fn from_code(code: u8) -> Result<LayerMode> {
        match code {
            0 => Ok(LayerMode::PerVector),
            1 => Ok(LayerMode::Flattened),
            2 => Ok(LayerMode::RawDense),
            other => Err(Error::format(format!("unknown layer mode {other}"))),
        }
    }
}

fn activation_code(kind: ActivationKind) -> u8 {
    match kind {
        ActivationKind::Sine => 0,
        ActivationKind::Gaussian => 1,
        ActivationKind::Relu => 2,
    }
}

fn activation_from_code(code: u8) -> Result<ActivationKind> {
    match code {
        0 => Ok(ActivationKind::Sine),
        1 => Ok(ActivationKind::Gaussian),
        2 => Ok(ActivationKind::Relu),
        other => Err(Error::format(format!("unknown activation code {other}"))),
    }
}

/// One block of scalars, either exact f32s (lossless mode) or uniform
/// quantizer codes against a stored range.
#[derive(Debug, Clone, PartialEq)]
pub enum ValueBlock {
    Lossless(Vec<f32>),
    Quantized { vmin: f32, vmax: f32, codes: Vec<u16> },
}

impl ValueBlock {
    pub fn len(&self) -> usize {
        match self {
            ValueBlock::Lossless(v) => v.len(),
            ValueBlock::Quantized { codes, .. } => codes.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Back to f64 scalars; `bitwidth` is the container-level code width.
    pub fn decode(&self, bitwidth: u8) -> Vec<f64> {
        match self {
            ValueBlock::Lossless(v) => v.iter().map(|x| *x as f64).collect(),
            ValueBlock::Quantized { vmin, vmax, codes } => {
                dequantize_parts(*vmin, *vmax, bitwidth, codes)
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LayerBlock {
    pub mode: LayerMode,
    /// signal length (RawDense: matrix rows)
    pub k1: u32,
    /// dictionary atoms (RawDense: matrix cols)
    pub k2: u32,
    /// nonzeros per code (RawDense: 0)
    pub s: u32,
    pub bias: ValueBlock,
    pub values: ValueBlock,
    pub indices: Vec<u16>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Container {
    pub lossless: bool,
    pub bitwidth: u8,
    pub arch: Architecture,
    pub master_seed: u64,
    pub layers: Vec<LayerBlock>,
}

/// Full structural validation: architecture sanity, layer count, and the
/// shape chain tying every block length to the architecture.
pub fn validate_container(c: &Container) -> Result<()> {
    c.arch.validate()?;
    if !(1..=16).contains(&c.bitwidth) {
        return Err(Error::format(format!("bitwidth {} outside 1..=16", c.bitwidth)));
    }
    let dims = c.arch.layer_dims();
    if c.layers.len() != dims.len() {
        return Err(Error::format(format!(
            "container holds {} layers, architecture needs {}",
            c.layers.len(),
            dims.len()
        )));
    }
    for (i, (layer, &(rows, cols))) in c.layers.iter().zip(&dims).enumerate() {
        let ctx = |msg: String| Error::format(format!("layer {i}: {msg}"));
        for (name, block) in [("bias", &layer.bias), ("value", &layer.values)] {
            let matches = match block {
                ValueBlock::Lossless(_) => c.lossless,
                ValueBlock::Quantized { .. } => !c.lossless,
            };
            if !matches {
                return Err(ctx(format!("{name} block disagrees with the lossless flag")));
            }
        }
        if layer.bias.len() != rows {
            return Err(ctx(format!("bias block holds {} values, layer has {rows} rows", layer.bias.len())));
        }
        let (k1, k2, s) = (layer.k1 as usize, layer.k2 as usize, layer.s as usize);
        match layer.mode {
            LayerMode::RawDense => {
                if k1 != rows || k2 != cols {
                    return Err(ctx(format!("dense shape {k1}x{k2} does not match {rows}x{cols}")));
                }
                if s != 0 || !layer.indices.is_empty() {
                    return Err(ctx("dense layers carry no sparse fields".into()));
                }
                if layer.values.len() != rows * cols {
                    return Err(ctx(format!(
                        "dense block holds {} values, matrix has {}",
                        layer.values.len(),
                        rows * cols
                    )));
                }
            }
            LayerMode::PerVector | LayerMode::Flattened => {
                let (want_k1, vectors) = match layer.mode {
                    LayerMode::PerVector => (rows, cols),
                    _ => (rows * cols, 1),
                };
                if k1 != want_k1 {
                    return Err(ctx(format!("k1 = {k1}, shape chain wants {want_k1}")));
                }
                if k2 <= k1 || k2 > MAX_ATOMS {
                    return Err(ctx(format!("dictionary width {k2} invalid for k1 = {k1}")));
                }
                if s == 0 || 2 * s >= k1 {
                    return Err(ctx(format!("sparsity {s} violates the 2s < k1 budget (k1 = {k1})")));
                }
                if layer.values.len() != vectors * s || layer.indices.len() != vectors * s {
                    return Err(ctx(format!(
                        "{} values and {} indices for {vectors} codes of {s} nonzeros",
                        layer.values.len(),
                        layer.indices.len()
                    )));
                }
                if let Some(bad) = layer.indices.iter().find(|ix| **ix as usize >= k2) {
                    return Err(ctx(format!("atom index {bad} outside dictionary of {k2}")));
                }
            }
        }
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// Writing
// ---------------------------------------------------------------------------

fn put_u16(out: &mut Vec<u8>, v: u16) {
    out.extend_from_slice(&v.to_le_bytes());
}

fn put_u32(out: &mut Vec<u8>, v: u32) {
    out.extend_from_slice(&v.to_le_bytes());
}

fn put_f32(out: &mut Vec<u8>, v: f32) {
    out.extend_from_slice(&v.to_le_bytes());
}

fn put_block(out: &mut Vec<u8>, block: &ValueBlock) {
    match block {
        ValueBlock::Lossless(values) => {
            put_u32(out, values.len() as u32);
            for v in values {
                put_f32(out, *v);
            }
        }
        ValueBlock::Quantized { vmin, vmax, codes } => {
            put_f32(out, *vmin);
            put_f32(out, *vmax);
            put_u32(out, codes.len() as u32);
            for c in codes {
                put_u16(out, *c);
            }
        }
    }
}

/// Serializes a validated container to its canonical byte layout. Identical
/// containers produce identical bytes.
pub fn serialize(c: &Container) -> Result<Vec<u8>> {
    validate_container(c)?;
    let mut out = Vec::new();
    out.extend_from_slice(&CONTAINER_MAGIC);
    out.extend_from_slice(&FORMAT_VERSION.to_le_bytes());
    out.push(if c.lossless { FLAG_LOSSLESS } else { 0 });
    out.push(c.bitwidth);
    put_u32(&mut out, c.arch.input_dim as u32);
    put_u32(&mut out, c.arch.output_dim as u32);
    put_u32(&mut out, c.arch.hidden_layers as u32);
    put_u32(&mut out, c.arch.width as u32);
    out.push(activation_code(c.arch.activation.kind));
    put_f32(&mut out, c.arch.activation.omega0 as f32);
    put_f32(&mut out, c.arch.activation.sigma as f32);
    put_u32(&mut out, c.arch.pe_levels as u32);
    out.extend_from_slice(&c.master_seed.to_le_bytes());
    put_u32(&mut out, c.layers.len() as u32);
    for layer in &c.layers {
        out.push(layer.mode.code());
        put_u32(&mut out, layer.k1);
        put_u32(&mut out, layer.k2);
        put_u32(&mut out, layer.s);
        put_block(&mut out, &layer.bias);
        put_block(&mut out, &layer.values);
        put_u32(&mut out, layer.indices.len() as u32);
        for ix in &layer.indices {
            put_u16(&mut out, *ix);
        }
    }
    Ok(out)
}

// ---------------------------------------------------------------------------
// Reading
// ---------------------------------------------------------------------------

struct Cursor<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        if self.bytes.len() - self.pos < n {
            return Err(Error::format("container truncated"));
        }
        let out = &self.bytes[self.pos..self.pos + n];
        self.pos += n;
        Ok(out)
    }

    fn get_u8(&mut self) -> Result<u8> {
        Ok(self.take(1)?[0])
    }

    fn get_u16(&mut self) -> Result<u16> {
        Ok(u16::from_le_bytes(self.take(2)?.try_into().unwrap()))
    }

    fn get_u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }

    fn get_u64(&mut self) -> Result<u64> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }

    fn get_f32(&mut self) -> Result<f32> {
        Ok(f32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }

    fn get_u16_vec(&mut self, count: usize) -> Result<Vec<u16>> {
        let raw = self.take(count.checked_mul(2).ok_or_else(|| Error::format("count overflow"))?)?;
        Ok(raw.chunks_exact(2).map(|c| u16::from_le_bytes(c.try_into().unwrap())).collect())
    }

    fn get_f32_vec(&mut self, count: usize) -> Result<Vec<f32>> {
        let raw = self.take(count.checked_mul(4).ok_or_else(|| Error::format("count overflow"))?)?;
        Ok(raw.chunks_exact(4).map(|c| f32::from_le_bytes(c.try_into().unwrap())).collect())
    }
}

fn get_block(cur: &mut Cursor, lossless: bool) -> Result<ValueBlock> {
    if lossless {
        let count = cur.get_u32()? as usize;
        Ok(ValueBlock::Lossless(cur.get_f32_vec(count)?))
    } else {
        let vmin = cur.get_f32()?;
        let vmax = cur.get_f32()?;
        let count = cur.get_u32()? as usize;
        Ok(ValueBlock::Quantized { vmin, vmax, codes: cur.get_u16_vec(count)? })
    }
}

/// Parses and fully validates a container; trailing bytes are an error.
pub fn deserialize(bytes: &[u8]) -> Result<Container> {
    let mut cur = Cursor { bytes, pos: 0 };
    if cur.take(4)? != CONTAINER_MAGIC {
        return Err(Error::format("bad magic: not a SINR container"));
    }
    let version = cur.get_u16()?;
    if version != FORMAT_VERSION {
        return Err(Error::format(format!(
            "container format version {version}, this decoder reads {FORMAT_VERSION}"
        )));
    }
    let flags = cur.get_u8()?;
    if flags & !FLAG_LOSSLESS != 0 {
        return Err(Error::format(format!("unknown container flags {flags:#04x}")));
    }
    let lossless = flags & FLAG_LOSSLESS != 0;
    let bitwidth = cur.get_u8()?;
    let input_dim = cur.get_u32()? as usize;
    let output_dim = cur.get_u32()? as usize;
    let hidden_layers = cur.get_u32()? as usize;
    let width = cur.get_u32()? as usize;
    let kind = activation_from_code(cur.get_u8()?)?;
    let omega0 = cur.get_f32()? as f64;
    let sigma = cur.get_f32()? as f64;
    let pe_levels = cur.get_u32()? as usize;
    let master_seed = cur.get_u64()?;
    let layer_count = cur.get_u32()? as usize;

    let arch = Architecture {
        input_dim,
        output_dim,
        hidden_layers,
        width,
        activation: Activation { kind, omega0, sigma },
        pe_levels,
    };

    let mut layers = Vec::with_capacity(layer_count.min(1024));
    for _ in 0..layer_count {
        let mode = LayerMode::from_code(cur.get_u8()?)?;
        let k1 = cur.get_u32()?;
        let k2 = cur.get_u32()?;
        let s = cur.get_u32()?;
        let bias = get_block(&mut cur, lossless)?;
        let values = get_block(&mut cur, lossless)?;
        let index_count = cur.get_u32()? as usize;
        let indices = cur.get_u16_vec(index_count)?;
        layers.push(LayerBlock { mode, k1, k2, s, bias, values, indices });
    }
    if cur.pos != bytes.len() {
        return Err(Error::format(format!(
            "{} trailing bytes after the container",
            bytes.len() - cur.pos
        )));
    }
    let container = Container { lossless, bitwidth, arch, master_seed, layers };
    validate_container(&container)?;
    Ok(container)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::codec::quant::quantize;

    fn quant_block(values: &[f64]) -> ValueBlock {
        let b = quantize(values, 16).unwrap();
        ValueBlock::Quantized { vmin: b.vmin, vmax: b.vmax, codes: b.codes }
    }

    fn sample_arch() -> Architecture {
        Architecture {
            input_dim: 2,
            output_dim: 1,
            hidden_layers: 1,
            width: 64,
            activation: Activation::new(ActivationKind::Sine),
            pe_levels: 0,
        }
    }

    /// layers: (64x2) flattened, (64x64) per-vector, (1x64) flattened
    fn sample_container(lossless: bool) -> Container {
        let arch = sample_arch();
        let block = |n: usize, scale: f64| -> ValueBlock {
            let values: Vec<f64> = (0..n).map(|i| scale * (i as f64 - n as f64 / 2.0)).collect();
            if lossless {
                ValueBlock::Lossless(values.iter().map(|v| *v as f32).collect())
            } else {
                quant_block(&values)
            }
        };
        let layers = vec![
            LayerBlock {
                mode: LayerMode::Flattened,
                k1: 128,
                k2: 256,
                s: 5,
                bias: block(64, 0.01),
                values: block(5, 0.3),
                indices: vec![3, 17, 45, 200, 255],
            },
            LayerBlock {
                mode: LayerMode::PerVector,
                k1: 64,
                k2: 128,
                s: 7,
                bias: block(64, 0.02),
                values: block(64 * 7, 0.05),
                indices: (0..64 * 7).map(|i| (i % 128) as u16).collect(),
            },
            LayerBlock {
                mode: LayerMode::Flattened,
                k1: 64,
                k2: 128,
                s: 3,
                bias: block(1, 1.0),
                values: block(3, 0.7),
                indices: vec![0, 64, 127],
            },
        ];
        Container { lossless, bitwidth: 16, arch, master_seed: 0xDEADBEEF, layers }
    }

    #[test]
    fn round_trip_preserves_structure() {
        for lossless in [false, true] {
            let c = sample_container(lossless);
            let bytes = serialize(&c).unwrap();
            let back = deserialize(&bytes).unwrap();
            assert_eq!(back, c);
        }
    }

    #[test]
    fn magic_is_the_first_four_bytes() {
        let bytes = serialize(&sample_container(false)).unwrap();
        assert_eq!(&bytes[..4], &[0x53, 0x49, 0x4E, 0x52]);
    }

    #[test]
    fn serialization_is_deterministic() {
        let c = sample_container(false);
        assert_eq!(serialize(&c).unwrap(), serialize(&c).unwrap());
    }

    #[test]
    fn every_truncation_is_rejected() {
        let bytes = serialize(&sample_container(false)).unwrap();
        for len in 0..bytes.len() {
            assert!(deserialize(&bytes[..len]).is_err(), "prefix of {len} bytes decoded");
        }
    }

    #[test]
    fn trailing_bytes_are_rejected() {
        let mut bytes = serialize(&sample_container(false)).unwrap();
        bytes.push(0);
        assert!(deserialize(&bytes).is_err());
    }

    #[test]
    fn header_corruption_is_rejected() {
        let good = serialize(&sample_container(false)).unwrap();

        let mut bad_magic = good.clone();
        bad_magic[0] = b'X';
        assert!(deserialize(&bad_magic).is_err());

        let mut bad_version = good.clone();
        bad_version[4] = 99;
        assert!(deserialize(&bad_version).is_err());

        let mut bad_flags = good.clone();
        bad_flags[6] = 0x80;
        assert!(deserialize(&bad_flags).is_err());

        let mut bad_bitwidth = good.clone();
        bad_bitwidth[7] = 61;
        assert!(deserialize(&bad_bitwidth).is_err());

        let mut bad_activation = good;
        bad_activation[24] = 7;
        assert!(deserialize(&bad_activation).is_err());
    }

    #[test]
    fn single_byte_flips_never_panic() {
        let good = serialize(&sample_container(false)).unwrap();
        for i in 0..good.len() {
            let mut bytes = good.clone();
            bytes[i] ^= 0xFF;
            // either a clean parse failure or a structurally valid container;
            // the call must never panic or hang
            let _ = deserialize(&bytes);
        }
    }

    #[test]
    fn shape_chain_violations_fail_validation() {
        let base = sample_container(false);

        let mut wrong_count = base.clone();
        wrong_count.layers.pop();
        assert!(serialize(&wrong_count).is_err());

        let mut bad_bias = base.clone();
        bad_bias.layers[0].bias = quant_block(&[1.0, 2.0]);
        assert!(serialize(&bad_bias).is_err());

        let mut bad_budget = base.clone();
        bad_budget.layers[1].s = 32; // 2s = k1
        assert!(serialize(&bad_budget).is_err());

        let mut bad_k2 = base.clone();
        bad_k2.layers[1].k2 = 64;
        assert!(serialize(&bad_k2).is_err());

        let mut bad_index = base.clone();
        bad_index.layers[1].indices[0] = 128;
        assert!(serialize(&bad_index).is_err());

        let mut bad_value_count = base.clone();
        bad_value_count.layers[2].values = quant_block(&[1.0, 2.0]);
        assert!(serialize(&bad_value_count).is_err());

        let mut mixed_blocks = base.clone();
        mixed_blocks.layers[0].bias = ValueBlock::Lossless(vec![0.0; 64]);
        assert!(serialize(&mixed_blocks).is_err());

        let mut dense_with_sparse_fields = base;
        dense_with_sparse_fields.layers[1] = LayerBlock {
            mode: LayerMode::RawDense,
            k1: 64,
            k2: 64,
            s: 1,
            bias: quant_block(&vec![0.5; 64]),
            values: quant_block(&vec![0.25; 64 * 64]),
            indices: Vec::new(),
        };
        assert!(serialize(&dense_with_sparse_fields).is_err());
    }

    #[test]
    fn dense_layers_round_trip() {
        let arch = Architecture { hidden_layers: 0, width: 4, ..sample_arch() };
        let dense = |rows: usize, cols: usize| LayerBlock {
            mode: LayerMode::RawDense,
            k1: rows as u32,
            k2: cols as u32,
            s: 0,
            bias: ValueBlock::Lossless((0..rows).map(|i| i as f32).collect()),
            values: ValueBlock::Lossless((0..rows * cols).map(|i| i as f32 * 0.5).collect()),
            indices: Vec::new(),
        };
        let c = Container {
            lossless: true,
            bitwidth: 16,
            arch,
            master_seed: 1,
            layers: vec![dense(4, 2), dense(1, 4)],
        };
        let back = deserialize(&serialize(&c).unwrap()).unwrap();
        assert_eq!(back, c);
    }
}
