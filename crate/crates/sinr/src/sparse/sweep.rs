//! Sparsity selection: walk s upward until the worst vector in the layer
//! reconstructs within tolerance.
//!
//! The greedy selection at sparsity s is a prefix of the selection at any
//! larger sparsity, so one pursuit per vector to the budget ceiling yields
//! the whole error-versus-s curve; nothing is re-run per candidate.

use rayon::prelude::*;

use crate::dict::Dictionary;
use crate::error::Error;
use crate::mat::Mat;
use crate::Result;

use super::omp::greedy_path;
use super::{check_budget, coding_shape, dictionary_width, layer_vectors, CodingMode, CodingParams};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepPoint {
    pub s: usize,
    /// max over the layer's vectors of relative L2 reconstruction error
    pub worst_rel_err: f64,
    /// values + indices at 16 bits each, before entropy coding
    pub payload_bytes: u64,
}

#[derive(Debug, Clone)]
pub struct SweepOutcome {
    pub mode: CodingMode,
    pub k1: usize,
    pub k2: usize,
    /// chosen sparsity: smallest grid point meeting rel_tol, else the
    /// largest feasible grid point with `met` = false
    pub s: usize,
    pub worst_rel_err: f64,
    pub met: bool,
    /// every grid point, ascending in s
    pub curve: Vec<SweepPoint>,
}

/// Candidate sparsities for a vector length: start at 2, step k1/64 (at
/// least 1), stay strictly inside the 2s < k1 budget.
pub(crate) fn sweep_grid(k1: usize) -> Vec<usize> {
    let s_max = (k1.saturating_sub(1)) / 2;
    let step = (k1 / 64).max(1);
    (2..=s_max).step_by(step).collect()
}

/// Pick the smallest swept sparsity whose worst-case per-vector relative
/// reconstruction error is at or below `rel_tol`.
pub fn sweep_s(w: &Mat, seed: u64, rel_tol: f64, params: &CodingParams) -> Result<SweepOutcome> {
    if !(rel_tol > 0.0 && rel_tol < 1.0) {
        return Err(Error::invalid(format!(
            "relative tolerance must lie in (0, 1), got {rel_tol}"
        )));
    }
    let (mode, k1) = coding_shape(w.rows(), w.cols(), params.width_threshold);
    let grid = sweep_grid(k1);
    let s_max = match grid.last() {
        Some(&s) => s,
        None => {
            return Err(Error::invalid(format!(
                "matrix of {}x{} is too small to sweep: no sparsity satisfies 2 <= s and 2s < k1 = {k1}",
                w.rows(),
                w.cols()
            )))
        }
    };
    check_budget(s_max, k1)?;
    let k2 = dictionary_width(k1, params.k2_factor)?;
    let dict = Dictionary::generate(seed, k1, k2)?;
    let vectors = layer_vectors(w, mode);

    // one pursuit per vector to s_max; rel_err[t] covers every candidate
    let paths: Vec<Result<Vec<f64>>> = vectors
        .par_iter()
        .map(|v| {
            let path = greedy_path(&dict, v, s_max)?;
            if path.truncated {
                return Err(Error::RankDeficient(format!(
                    "pursuit stopped at {} of {s_max} atoms",
                    path.selection.len()
                )));
            }
            Ok(path.rel_err)
        })
        .collect();

    let mut worst_at = vec![0.0f64; s_max];
    for (i, p) in paths.into_iter().enumerate() {
        let rel_err = p.map_err(|e| Error::invalid(format!("vector {i}: {e}")))?;
        for (t, err) in rel_err.iter().enumerate() {
            worst_at[t] = worst_at[t].max(*err);
        }
    }

    let codes = vectors.len() as u64;
    let curve: Vec<SweepPoint> = grid
        .iter()
        .map(|&s| SweepPoint {
            s,
            worst_rel_err: worst_at[s - 1],
            payload_bytes: codes * s as u64 * 4,
        })
        .collect();

    let chosen = curve.iter().find(|p| p.worst_rel_err <= rel_tol);
    let (s, worst_rel_err, met) = match chosen {
        Some(p) => (p.s, p.worst_rel_err, true),
        None => {
            let last = curve.last().unwrap();
            (last.s, last.worst_rel_err, false)
        }
    };
    Ok(SweepOutcome { mode, k1, k2, s, worst_rel_err, met, curve })
}
