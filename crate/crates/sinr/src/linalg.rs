//! Least squares over explicit column sets, via normal equations and a
//! pivot-checked Cholesky factorization.
//!
//! The greedy encoder grows its active set one column at a time, so the
//! factorization supports incremental extension: appending a column costs
//! O(t^2) instead of refactorizing at O(t^3).

use crate::error::Error;
use crate::mat::dot;
use crate::Result;

/// Relative pivot floor: a diagonal pivot below this times the largest Gram
/// diagonal marks the active set as numerically rank-deficient.
pub const PIVOT_RTOL: f64 = 1e-12;

/// Cholesky factor of a Gram matrix, grown column by column.
/// Lower-triangular rows are stored packed: row i occupies i+1 entries.
#[derive(Debug, Clone)]
pub struct GramCholesky {
    l: Vec<f64>,
    dim: usize,
    max_diag: f64,
}

impl GramCholesky {
    pub fn new() -> GramCholesky {
        GramCholesky { l: Vec::new(), dim: 0, max_diag: 0.0 }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    fn row(&self, i: usize) -> &[f64] {
        let start = i * (i + 1) / 2;
        &self.l[start..start + i + 1]
    }

    /// Extend the factor by one column of the Gram matrix: `cross` holds the
    /// inner products of the new vector with the existing ones, `diag` its
    /// squared norm. Fails without modifying the factor when the pivot
    /// collapses, which is how rank deficiency is detected.
    pub fn try_extend(&mut self, cross: &[f64], diag: f64) -> Result<()> {
        assert_eq!(cross.len(), self.dim);
        let mut w = vec![0.0f64; self.dim];
        for i in 0..self.dim {
            let row = self.row(i);
            let mut s = cross[i];
            for k in 0..i {
                s -= row[k] * w[k];
            }
            w[i] = s / row[i];
        }
        let max_diag = self.max_diag.max(diag);
        let pivot = diag - dot(&w, &w);
        if !(pivot > PIVOT_RTOL * max_diag) {
            return Err(Error::RankDeficient(format!(
                "pivot {pivot:e} below {PIVOT_RTOL:e} x largest diagonal {max_diag:e}"
            )));
        }
        self.l.extend_from_slice(&w);
        self.l.push(pivot.sqrt());
        self.dim += 1;
        self.max_diag = max_diag;
        Ok(())
    }

    /// Solve (L L^T) x = rhs.
    pub fn solve(&self, rhs: &[f64]) -> Vec<f64> {
        assert_eq!(rhs.len(), self.dim);
        let n = self.dim;
        let mut y = vec![0.0f64; n];
        for i in 0..n {
            let row = self.row(i);
            let mut s = rhs[i];
            for k in 0..i {
                s -= row[k] * y[k];
            }
            y[i] = s / row[i];
        }
        let mut x = y;
        for i in (0..n).rev() {
            let mut s = x[i];
            for k in i + 1..n {
                s -= self.row(k)[i] * x[k];
            }
            x[i] = s / self.row(i)[i];
        }
        x
    }
}

impl Default for GramCholesky {
    fn default() -> Self {
        Self::new()
    }
}

/// Minimize ||target - sum_j coeffs[j] * columns[j]||_2 by normal equations.
/// All columns must share the target's length. Numerically dependent columns
/// surface as a rank-deficiency error rather than exploding coefficients.
pub fn least_squares(columns: &[&[f64]], target: &[f64]) -> Result<Vec<f64>> {
    if columns.is_empty() {
        return Err(Error::invalid("least squares needs at least one column"));
    }
    for (j, col) in columns.iter().enumerate() {
        if col.len() != target.len() {
            return Err(Error::invalid(format!(
                "column {j} has length {} but target has {}",
                col.len(),
                target.len()
            )));
        }
    }
    let mut chol = GramCholesky::new();
    let mut rhs = Vec::with_capacity(columns.len());
    for (j, col) in columns.iter().enumerate() {
        let cross: Vec<f64> = columns[..j].iter().map(|prev| dot(prev, col)).collect();
        chol.try_extend(&cross, dot(col, col))?;
        rhs.push(dot(col, target));
    }
    Ok(chol.solve(&rhs))
}
