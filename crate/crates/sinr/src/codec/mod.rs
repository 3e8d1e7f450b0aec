//! The end-to-end codec: weight matrices become sparse codes over
//! seed-regenerated dictionaries, the nonzero values and biases are
//! quantized, everything is packed into the self-describing container, and
//! the container is entropy-wrapped. Decompression inverts each stage using
//! nothing but the byte stream.

mod container;
mod entropy;
mod quant;

pub use container::{
    deserialize, serialize, validate_container, Container, LayerBlock, LayerMode, ValueBlock,
    CONTAINER_MAGIC, FORMAT_VERSION,
};
pub use entropy::{entropy_unwrap, entropy_wrap};
pub use quant::{dequantize, dequantize_parts, quantize, QuantizedBlock};

use crate::error::Error;
use crate::inr::Network;
use crate::mat::Mat;
use crate::sparse::{
    self, coding_shape, encode_layer, parameter_counts, sweep_s, CodingMode, CodingParams,
    LayerCoding, SparseCode, SweepOutcome,
};
use crate::Result;

/// How the per-layer sparsity budget is chosen.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SparsitySelection {
    /// One fixed s for every layer; must satisfy 2s < k1 everywhere.
    Fixed(usize),
    /// Per-layer incremental sweep to the smallest s whose worst per-vector
    /// relative L2 reconstruction error meets `rel_tol`.
    Auto { rel_tol: f64 },
}

pub const DEFAULT_REL_TOL: f64 = 0.02;

#[derive(Debug, Clone, Copy)]
pub struct CompressConfig {
    pub sparsity: SparsitySelection,
    pub coding: CodingParams,
    pub bitwidth: u8,
    pub master_seed: u64,
    /// Store values as raw f32 instead of quantizer codes — isolates the
    /// sparse-coding error from the quantization error.
    pub lossless: bool,
}

impl Default for CompressConfig {
    fn default() -> Self {
        CompressConfig {
            sparsity: SparsitySelection::Auto { rel_tol: DEFAULT_REL_TOL },
            coding: CodingParams::default(),
            bitwidth: 16,
            master_seed: 0,
            lossless: false,
        }
    }
}

#[derive(Debug, Clone)]
pub struct LayerReport {
    pub layer: usize,
    pub mode: CodingMode,
    pub k1: usize,
    pub k2: usize,
    pub s: usize,
    /// worst per-vector relative L2 reconstruction error before quantization
    pub worst_rel_err: f64,
    /// values + indices that reach the container for this layer
    pub stored_scalars: u64,
    /// the sweep curve when sparsity was chosen automatically
    pub sweep: Option<SweepOutcome>,
}

#[derive(Debug, Clone)]
pub struct CompressReport {
    /// final artifact size (after entropy coding)
    pub bytes: u64,
    /// serialized container size (before entropy coding)
    pub container_bytes: u64,
    /// dense parameter count of the architecture
    pub t_s: u64,
    /// sparse-code parameter count at the largest selected s
    pub t_sinr: u64,
    /// scalars actually stored across all layers (codes of varying s)
    pub stored_scalars: u64,
    pub layers: Vec<LayerReport>,
}

fn to_value_block(values: &[f64], lossless: bool, bitwidth: u8) -> Result<ValueBlock> {
    if lossless {
        if let Some(bad) = values.iter().find(|v| !v.is_finite()) {
            return Err(Error::NonFinite(format!("container value {bad}")));
        }
        Ok(ValueBlock::Lossless(values.iter().map(|v| *v as f32).collect()))
    } else {
        let q = quantize(values, bitwidth)?;
        Ok(ValueBlock::Quantized { vmin: q.vmin, vmax: q.vmax, codes: q.codes })
    }
}

fn coding_to_layer_block(
    coding: &LayerCoding,
    bias: &[f64],
    lossless: bool,
    bitwidth: u8,
) -> Result<LayerBlock> {
    let mut values = Vec::with_capacity(coding.codes.len() * coding.s);
    let mut indices = Vec::with_capacity(coding.codes.len() * coding.s);
    for (v, code) in coding.codes.iter().enumerate() {
        if code.nonzeros() != coding.s {
            return Err(Error::invalid(format!(
                "code {v} carries {} nonzeros, layer budget is {}",
                code.nonzeros(),
                coding.s
            )));
        }
        values.extend_from_slice(&code.values);
        indices.extend_from_slice(&code.indices);
    }
    let mode = match coding.mode {
        CodingMode::PerVector => LayerMode::PerVector,
        CodingMode::Flattened => LayerMode::Flattened,
    };
    Ok(LayerBlock {
        mode,
        k1: coding.k1 as u32,
        k2: coding.k2 as u32,
        s: coding.s as u32,
        bias: to_value_block(bias, lossless, bitwidth)?,
        values: to_value_block(&values, lossless, bitwidth)?,
        indices,
    })
}

/// Compresses a trained network into a self-describing `.sinr` byte stream,
/// returning the bytes and a report of what every layer did.
pub fn compress_inr(net: &Network, cfg: &CompressConfig) -> Result<(Vec<u8>, CompressReport)> {
    net.validate()?;
    if !(1..=16).contains(&cfg.bitwidth) {
        return Err(Error::invalid(format!("bitwidth must lie in 1..=16, got {}", cfg.bitwidth)));
    }
    if let SparsitySelection::Auto { rel_tol } = cfg.sparsity {
        if !(rel_tol > 0.0 && rel_tol < 1.0) {
            return Err(Error::invalid(format!("rel_tol must lie in (0, 1), got {rel_tol}")));
        }
    }

    let mut layers = Vec::with_capacity(net.weights.len());
    let mut reports = Vec::with_capacity(net.weights.len());
    for (i, w) in net.weights.iter().enumerate() {
        let seed = cfg.master_seed ^ i as u64;
        let with_ctx = |e: Error| Error::invalid(format!("layer {i}: {e}"));
        let (s, sweep) = match cfg.sparsity {
            SparsitySelection::Fixed(s) => {
                let (_, k1) = coding_shape(w.rows(), w.cols(), cfg.coding.width_threshold);
                sparse::check_budget(s, k1).map_err(with_ctx)?;
                (s, None)
            }
            SparsitySelection::Auto { rel_tol } => {
                let outcome = sweep_s(w, seed, rel_tol, &cfg.coding).map_err(with_ctx)?;
                if !outcome.met {
                    return Err(Error::invalid(format!(
                        "layer {i}: sweep exhausted the 2s < k1 budget at s = {} with worst \
                         relative error {:.4} > rel_tol {rel_tol}; raise rel_tol or k2_factor",
                        outcome.s, outcome.worst_rel_err
                    )));
                }
                (outcome.s, Some(outcome))
            }
        };
        let coding = encode_layer(w, seed, s, &cfg.coding).map_err(with_ctx)?;
        reports.push(LayerReport {
            layer: i,
            mode: coding.mode,
            k1: coding.k1,
            k2: coding.k2,
            s: coding.s,
            worst_rel_err: coding.worst_rel_err,
            stored_scalars: coding.stored_scalars(),
            sweep,
        });
        layers.push(coding_to_layer_block(&coding, &net.biases[i], cfg.lossless, cfg.bitwidth)?);
    }

    let container = Container {
        lossless: cfg.lossless,
        bitwidth: cfg.bitwidth,
        arch: net.arch,
        master_seed: cfg.master_seed,
        layers,
    };
    let raw = serialize(&container)?;
    let wrapped = entropy_wrap(&raw)?;

    let s_ref = reports.iter().map(|r| r.s).max().unwrap_or(0);
    let (t_s, t_sinr) = parameter_counts(
        net.arch.effective_input_dim() as u64,
        net.arch.output_dim as u64,
        net.arch.hidden_layers as u64,
        net.arch.width as u64,
        s_ref as u64,
    );
    let report = CompressReport {
        bytes: wrapped.len() as u64,
        container_bytes: raw.len() as u64,
        t_s,
        t_sinr,
        stored_scalars: reports.iter().map(|r| r.stored_scalars).sum(),
        layers: reports,
    };
    Ok((wrapped, report))
}

/// Rebuilds a forward-ready network from a `.sinr` byte stream: unwrap the
/// entropy stream, parse the container, regenerate each layer's dictionary
/// from (master_seed XOR layer index), and reassemble weights and biases.
pub fn decompress_inr(bytes: &[u8]) -> Result<Network> {
    let raw = entropy_unwrap(bytes)?;
    let container = deserialize(&raw)?;
    let dims = container.arch.layer_dims();
    let mut weights = Vec::with_capacity(dims.len());
    let mut biases = Vec::with_capacity(dims.len());
    for (i, (layer, &(rows, cols))) in container.layers.iter().zip(&dims).enumerate() {
        biases.push(layer.bias.decode(container.bitwidth));
        let values = layer.values.decode(container.bitwidth);
        let w = match layer.mode {
            LayerMode::RawDense => Mat::from_vec(rows, cols, values)?,
            LayerMode::PerVector | LayerMode::Flattened => {
                let mode = match layer.mode {
                    LayerMode::PerVector => CodingMode::PerVector,
                    _ => CodingMode::Flattened,
                };
                let s = layer.s as usize;
                let codes: Vec<SparseCode> = values
                    .chunks_exact(s)
                    .zip(layer.indices.chunks_exact(s))
                    .map(|(vals, idxs)| SparseCode {
                        indices: idxs.to_vec(),
                        values: vals.to_vec(),
                        truncated: false,
                    })
                    .collect();
                let coding = LayerCoding {
                    mode,
                    rows,
                    cols,
                    k1: layer.k1 as usize,
                    k2: layer.k2 as usize,
                    s,
                    seed: container.master_seed ^ i as u64,
                    codes,
                    worst_rel_err: 0.0,
                };
                sparse::reconstruct_layer(&coding)?
            }
        };
        weights.push(w);
    }
    let net = Network { arch: container.arch, weights, biases };
    net.validate()?;
    Ok(net)
}

/// Packs a network's dense weights into the same container (RawDense mode):
/// lossless for checkpoints, quantized for the entropy-coded raw-weight
/// baseline that sparse coding is measured against.
pub fn encode_network_raw(net: &Network, lossless: bool, bitwidth: u8) -> Result<Vec<u8>> {
    net.validate()?;
    let mut layers = Vec::with_capacity(net.weights.len());
    for (w, b) in net.weights.iter().zip(&net.biases) {
        layers.push(LayerBlock {
            mode: LayerMode::RawDense,
            k1: w.rows() as u32,
            k2: w.cols() as u32,
            s: 0,
            bias: to_value_block(b, lossless, bitwidth)?,
            values: to_value_block(w.as_slice(), lossless, bitwidth)?,
            indices: Vec::new(),
        });
    }
    let container = Container {
        lossless,
        bitwidth,
        arch: net.arch,
        master_seed: 0,
        layers,
    };
    entropy_wrap(&serialize(&container)?)
}
