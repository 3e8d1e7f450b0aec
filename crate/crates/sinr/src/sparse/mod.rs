//! Layer-level sparse coding: orientation of weight matrices into vectors,
//! the per-layer encode/decode pair, and the parameter-count bookkeeping
//! that motivates the whole exercise.

mod omp;
mod sweep;

pub use omp::{omp, reconstruct, SparseCode};
pub use sweep::{sweep_s, SweepOutcome, SweepPoint};

use rayon::prelude::*;

use crate::dict::Dictionary;
use crate::error::Error;
use crate::mat::{norm2, Mat};
use crate::Result;

/// Index space of a 16-bit atom id; k2 never exceeds this.
pub const MAX_ATOMS: usize = 1 << 16;

/// Matrices whose smaller dimension is below this are flattened whole; at or
/// above it each width-sized vector is coded independently.
pub const DEFAULT_WIDTH_THRESHOLD: usize = 50;

/// Knobs shared by every layer encode.
#[derive(Debug, Clone, Copy)]
pub struct CodingParams {
    /// k2 = k2_factor * k1, capped at MAX_ATOMS.
    pub k2_factor: usize,
    pub width_threshold: usize,
}

impl Default for CodingParams {
    fn default() -> Self {
        CodingParams { k2_factor: 2, width_threshold: DEFAULT_WIDTH_THRESHOLD }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CodingMode {
    /// One code per length-k1 vector, k1 = matrix rows (the fan-in-side
    /// grouping: a hidden matrix becomes one code per column).
    PerVector,
    /// The whole matrix row-major as a single length rows*cols vector; the
    /// economical path for thin input/output layers and tiny networks.
    Flattened,
}

/// Mode and signal length k1 for a matrix of the given shape.
pub fn coding_shape(rows: usize, cols: usize, width_threshold: usize) -> (CodingMode, usize) {
    if rows.min(cols) >= width_threshold {
        (CodingMode::PerVector, rows)
    } else {
        (CodingMode::Flattened, rows * cols)
    }
}

/// All sparse codes for one weight matrix, plus everything needed to decode
/// them: regenerating the dictionary takes only (seed, k1, k2).
#[derive(Debug, Clone)]
pub struct LayerCoding {
    pub mode: CodingMode,
    pub rows: usize,
    pub cols: usize,
    pub k1: usize,
    pub k2: usize,
    pub s: usize,
    pub seed: u64,
    pub codes: Vec<SparseCode>,
    /// max over codes of ||w - w_hat|| / ||w||, measured during encode
    pub worst_rel_err: f64,
}

impl LayerCoding {
    /// Scalars that actually reach the container: s values + s indices per code.
    pub fn stored_scalars(&self) -> u64 {
        self.codes.iter().map(|c| 2 * c.nonzeros() as u64).sum()
    }
}

fn column(w: &Mat, c: usize) -> Vec<f64> {
    (0..w.rows()).map(|r| w.get(r, c)).collect()
}

pub(crate) fn layer_vectors(w: &Mat, mode: CodingMode) -> Vec<Vec<f64>> {
    match mode {
        CodingMode::PerVector => (0..w.cols()).map(|c| column(w, c)).collect(),
        CodingMode::Flattened => vec![w.as_slice().to_vec()],
    }
}

pub(crate) fn dictionary_width(k1: usize, k2_factor: usize) -> Result<usize> {
    if k2_factor < 2 {
        return Err(Error::invalid(format!("k2 factor must be at least 2, got {k2_factor}")));
    }
    let k2 = (k1 * k2_factor).min(MAX_ATOMS);
    if k2 <= k1 {
        return Err(Error::invalid(format!(
            "vector length {k1} exhausts the 16-bit atom index space"
        )));
    }
    Ok(k2)
}

pub(crate) fn check_budget(s: usize, k1: usize) -> Result<()> {
    if s == 0 || 2 * s >= k1 {
        return Err(Error::invalid(format!(
            "sparsity budget violated: need 1 <= s and 2s < k1, got s = {s}, k1 = {k1}"
        )));
    }
    Ok(())
}

/// Sparse-code one weight matrix at sparsity `s` against the dictionary
/// regenerated from `seed`.
pub fn encode_layer(w: &Mat, seed: u64, s: usize, params: &CodingParams) -> Result<LayerCoding> {
    let (mode, k1) = coding_shape(w.rows(), w.cols(), params.width_threshold);
    check_budget(s, k1)?;
    let k2 = dictionary_width(k1, params.k2_factor)?;
    let dict = Dictionary::generate(seed, k1, k2)?;
    let vectors = layer_vectors(w, mode);

    let coded: Vec<Result<(SparseCode, f64)>> = vectors
        .par_iter()
        .map(|v| {
            let code = omp(&dict, v, s)?;
            let back = reconstruct(&dict, &code)?;
            let err: f64 = v
                .iter()
                .zip(&back)
                .map(|(a, b)| (a - b) * (a - b))
                .sum::<f64>()
                .sqrt()
                / norm2(v);
            Ok((code, err))
        })
        .collect();

    let mut codes = Vec::with_capacity(vectors.len());
    let mut worst = 0.0f64;
    for (i, item) in coded.into_iter().enumerate() {
        let (code, err) = item.map_err(|e| {
            Error::invalid(format!("vector {i} of {}x{} matrix: {e}", w.rows(), w.cols()))
        })?;
        if code.truncated {
            return Err(Error::RankDeficient(format!(
                "vector {i} stopped at {} of {s} atoms",
                code.nonzeros()
            )));
        }
        worst = worst.max(err);
        codes.push(code);
    }
    Ok(LayerCoding { mode, rows: w.rows(), cols: w.cols(), k1, k2, s, seed, codes, worst_rel_err: worst })
}

/// Invert encode_layer: regenerate the dictionary and superpose every code
/// back into a matrix of the original shape.
pub fn reconstruct_layer(coding: &LayerCoding) -> Result<Mat> {
    let dict = Dictionary::generate(coding.seed, coding.k1, coding.k2)?;
    let mut out = Mat::zeros(coding.rows, coding.cols);
    match coding.mode {
        CodingMode::PerVector => {
            if coding.codes.len() != coding.cols {
                return Err(Error::format(format!(
                    "expected {} codes, found {}",
                    coding.cols,
                    coding.codes.len()
                )));
            }
            for (c, code) in coding.codes.iter().enumerate() {
                let v = reconstruct(&dict, code)?;
                for (r, value) in v.iter().enumerate() {
                    out.set(r, c, *value);
                }
            }
        }
        CodingMode::Flattened => {
            if coding.codes.len() != 1 {
                return Err(Error::format(format!(
                    "flattened layer carries {} codes instead of 1",
                    coding.codes.len()
                )));
            }
            let v = reconstruct(&dict, &coding.codes[0])?;
            out.as_mut_slice().copy_from_slice(&v);
        }
    }
    Ok(out)
}

/// Dense and sparse-coded scalar counts for an (a, b, l, k) multilayer
/// perceptron at uniform sparsity s:
/// T_s = a*k + l*k^2 + b*k and T_sinr = a*2s + k*l*2s + b*2s.
pub fn parameter_counts(
    input_dim: u64,
    output_dim: u64,
    hidden_layers: u64,
    width: u64,
    s: u64,
) -> (u64, u64) {
    let t_s = input_dim * width + hidden_layers * width * width + output_dim * width;
    let t_sinr = input_dim * 2 * s + width * hidden_layers * 2 * s + output_dim * 2 * s;
    (t_s, t_sinr)
}
