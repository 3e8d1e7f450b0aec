//! Orthogonal matching pursuit against a seeded dictionary.
//!
//! Greedy selection with a full coefficient refit per step. The refit reuses
//! an incrementally extended Cholesky factor of the active Gram matrix, which
//! makes a single run to sparsity s cost O(s * k1 * k2) for the correlation
//! scans plus O(s^3) total for the solves.

use crate::dict::Dictionary;
use crate::error::Error;
use crate::linalg::GramCholesky;
use crate::mat::{axpy, dot, norm2};
use crate::Result;

/// One weight vector re-expressed as s dictionary atoms.
/// Indices are sorted ascending and values are the final refit coefficients
/// in the same order. `truncated` marks a code whose active set went rank
/// deficient before reaching the requested sparsity.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseCode {
    pub indices: Vec<u16>,
    pub values: Vec<f64>,
    pub truncated: bool,
}

impl SparseCode {
    pub fn nonzeros(&self) -> usize {
        self.indices.len()
    }
}

/// Largest |value| wins; exact ties resolve to the lowest index. Masked
/// entries never win.
pub(crate) fn argmax_abs(values: &[f64], masked: &[bool]) -> Option<usize> {
    let mut best: Option<(usize, f64)> = None;
    for (j, v) in values.iter().enumerate() {
        if masked[j] {
            continue;
        }
        let a = v.abs();
        match best {
            Some((_, b)) if a <= b => {}
            _ => best = Some((j, a)),
        }
    }
    best.map(|(j, _)| j)
}

/// Greedy path to sparsity `s_max`: selection order, the relative residual
/// after each step, and the refit state at the final step.
pub(crate) struct GreedyPath {
    pub selection: Vec<usize>,
    /// rel_err[t] = ||w - A_S c||_2 / ||w||_2 with t+1 atoms active
    pub rel_err: Vec<f64>,
    pub coeffs: Vec<f64>,
    pub truncated: bool,
}

pub(crate) fn greedy_path(dict: &Dictionary, w: &[f64], s_max: usize) -> Result<GreedyPath> {
    let k1 = dict.k1();
    if w.len() != k1 {
        return Err(Error::invalid(format!(
            "target length {} does not match dictionary k1 = {k1}",
            w.len()
        )));
    }
    if s_max == 0 {
        return Err(Error::invalid("sparsity must be at least 1"));
    }
    if 2 * s_max >= k1 {
        return Err(Error::invalid(format!(
            "sparsity budget violated: 2s = {} must stay below k1 = {k1}",
            2 * s_max
        )));
    }
    let w_norm = norm2(w);
    if w_norm == 0.0 {
        return Err(Error::invalid("cannot sparse-code a zero vector"));
    }

    let mut residual = w.to_vec();
    let mut selected = Vec::with_capacity(s_max);
    let mut masked = vec![false; dict.k2()];
    let mut chol = GramCholesky::new();
    let mut rhs: Vec<f64> = Vec::with_capacity(s_max);
    let mut rel_err = Vec::with_capacity(s_max);
    let mut coeffs = Vec::new();
    let mut truncated = false;

    for _ in 0..s_max {
        let correlations = dict.correlations(&residual);
        let j = match argmax_abs(&correlations, &masked) {
            Some(j) => j,
            None => {
                truncated = true;
                break;
            }
        };
        let atom = dict.atom(j);
        let cross: Vec<f64> = selected.iter().map(|&i| dot(dict.atom(i), atom)).collect();
        if chol.try_extend(&cross, dot(atom, atom)).is_err() {
            truncated = true;
            break;
        }
        selected.push(j);
        masked[j] = true;
        rhs.push(dot(atom, w));
        coeffs = chol.solve(&rhs);

        residual.copy_from_slice(w);
        for (&i, &c) in selected.iter().zip(&coeffs) {
            axpy(-c, dict.atom(i), &mut residual);
        }
        rel_err.push(norm2(&residual) / w_norm);
    }

    if selected.is_empty() {
        return Err(Error::RankDeficient(
            "no atom could be selected for this vector".into(),
        ));
    }
    Ok(GreedyPath { selection: selected, rel_err, coeffs, truncated })
}

/// Sparse-code `w` with exactly `s` atoms (fewer only when the active set
/// degenerates, in which case the code comes back flagged).
pub fn omp(dict: &Dictionary, w: &[f64], s: usize) -> Result<SparseCode> {
    let path = greedy_path(dict, w, s)?;
    let mut pairs: Vec<(usize, f64)> =
        path.selection.iter().copied().zip(path.coeffs.iter().copied()).collect();
    pairs.sort_by_key(|&(j, _)| j);
    Ok(SparseCode {
        indices: pairs.iter().map(|&(j, _)| j as u16).collect(),
        values: pairs.iter().map(|&(_, v)| v).collect(),
        truncated: path.truncated,
    })
}

/// w_hat = A x: superpose the selected atoms.
pub fn reconstruct(dict: &Dictionary, code: &SparseCode) -> Result<Vec<f64>> {
    if code.indices.len() != code.values.len() {
        return Err(Error::invalid("index/value length mismatch in sparse code"));
    }
    let mut out = vec![0.0f64; dict.k1()];
    for (&j, &v) in code.indices.iter().zip(&code.values) {
        if (j as usize) >= dict.k2() {
            return Err(Error::invalid(format!(
                "atom index {j} out of range for dictionary with k2 = {}",
                dict.k2()
            )));
        }
        axpy(v, dict.atom(j as usize), &mut out);
    }
    Ok(out)
}
