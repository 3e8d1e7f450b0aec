//! Row-major f64 matrices and the few dense kernels the crate needs.
//!
//! This is deliberately not a linear-algebra library: one storage layout,
//! multiply, transpose, dot. The multiply is k-blocked so the streamed
//! operand stays in cache, and every accumulation uses `mul_add`, which is
//! both faster (hardware FMA) and exactly rounded, so results do not depend
//! on what the autovectorizer felt like doing.

use crate::error::Error;
use crate::Result;

#[derive(Debug, Clone, PartialEq)]
pub struct Mat {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Mat {
    pub fn zeros(rows: usize, cols: usize) -> Mat {
        Mat { rows, cols, data: vec![0.0; rows * cols] }
    }

    pub fn from_vec(rows: usize, cols: usize, data: Vec<f64>) -> Result<Mat> {
        if data.len() != rows * cols {
            return Err(Error::invalid(format!(
                "matrix data length {} does not match {}x{}",
                data.len(),
                rows,
                cols
            )));
        }
        Ok(Mat { rows, cols, data })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn row(&self, r: usize) -> &[f64] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    #[inline]
    pub fn row_mut(&mut self, r: usize) -> &mut [f64] {
        &mut self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn as_mut_slice(&mut self) -> &mut [f64] {
        &mut self.data
    }

    #[inline]
    pub fn get(&self, r: usize, c: usize) -> f64 {
        self.data[r * self.cols + c]
    }

    #[inline]
    pub fn set(&mut self, r: usize, c: usize, v: f64) {
        self.data[r * self.cols + c] = v;
    }

    pub fn fill(&mut self, v: f64) {
        self.data.fill(v);
    }

    pub fn transpose(&self) -> Mat {
        let mut out = Mat::zeros(self.cols, self.rows);
        // 32x32 tiles keep both access patterns within a few cache lines
        const T: usize = 32;
        for r0 in (0..self.rows).step_by(T) {
            for c0 in (0..self.cols).step_by(T) {
                let r1 = (r0 + T).min(self.rows);
                let c1 = (c0 + T).min(self.cols);
                for r in r0..r1 {
                    for c in c0..c1 {
                        out.data[c * self.rows + r] = self.data[r * self.cols + c];
                    }
                }
            }
        }
        out
    }

    /// self * rhs into a fresh matrix.
    pub fn matmul(&self, rhs: &Mat) -> Mat {
        let mut out = Mat::zeros(self.rows, rhs.cols);
        matmul_acc(self, rhs, &mut out);
        out
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0f64, |m, v| m.max(v.abs()))
    }
}

/// Streamed-operand block size for the multiply; 384 rows of a 128-wide f64
/// matrix is 384 KiB, comfortably inside L2.
const K_BLOCK: usize = 384;

/// c += a * b, shapes (m x k)(k x n) -> (m x n). Accumulation order is fixed
/// (k ascending within each row), so outputs are bit-identical run to run.
pub fn matmul_acc(a: &Mat, b: &Mat, c: &mut Mat) {
    assert_eq!(a.cols, b.rows, "inner dimensions differ");
    assert_eq!(c.rows, a.rows, "output rows differ");
    assert_eq!(c.cols, b.cols, "output cols differ");
    matmul_acc_slices(a.rows, a.cols, b.cols, &a.data, &b.data, &mut c.data);
}

/// Slice form of the multiply for callers that reuse oversized buffers: the
/// operands are the leading m*k / k*n / m*n elements, which for row-major
/// storage is exactly "the first m rows".
///
/// The kernel walks k in registers four at a time and rows two at a time, so
/// each output row is loaded and stored once per four k steps instead of
/// once per step. The accumulation order is fixed, so outputs stay
/// bit-identical run to run (though not identical to a plain triple loop).
pub fn matmul_acc_slices(m: usize, k: usize, n: usize, a: &[f64], b: &[f64], c: &mut [f64]) {
    assert!(a.len() >= m * k && b.len() >= k * n && c.len() >= m * n);
    for k0 in (0..k).step_by(K_BLOCK) {
        let k1 = (k0 + K_BLOCK).min(k);
        let mut i = 0;
        while i + 2 <= m {
            let (head, tail) = c.split_at_mut((i + 1) * n);
            let c0 = &mut head[i * n..];
            let c1 = &mut tail[..n];
            let ar0 = &a[i * k..(i + 1) * k];
            let ar1 = &a[(i + 1) * k..(i + 2) * k];
            let mut kk = k0;
            while kk + 4 <= k1 {
                let (p0, p1, p2, p3) = (ar0[kk], ar0[kk + 1], ar0[kk + 2], ar0[kk + 3]);
                let (q0, q1, q2, q3) = (ar1[kk], ar1[kk + 1], ar1[kk + 2], ar1[kk + 3]);
                let b0 = &b[kk * n..kk * n + n];
                let b1 = &b[(kk + 1) * n..(kk + 1) * n + n];
                let b2 = &b[(kk + 2) * n..(kk + 2) * n + n];
                let b3 = &b[(kk + 3) * n..(kk + 3) * n + n];
                for j in 0..n {
                    let bv0 = b0[j];
                    let bv1 = b1[j];
                    let bv2 = b2[j];
                    let bv3 = b3[j];
                    let mut t0 = c0[j];
                    t0 = bv0.mul_add(p0, t0);
                    t0 = bv1.mul_add(p1, t0);
                    t0 = bv2.mul_add(p2, t0);
                    t0 = bv3.mul_add(p3, t0);
                    c0[j] = t0;
                    let mut t1 = c1[j];
                    t1 = bv0.mul_add(q0, t1);
                    t1 = bv1.mul_add(q1, t1);
                    t1 = bv2.mul_add(q2, t1);
                    t1 = bv3.mul_add(q3, t1);
                    c1[j] = t1;
                }
                kk += 4;
            }
            while kk < k1 {
                let p = ar0[kk];
                let q = ar1[kk];
                let br = &b[kk * n..kk * n + n];
                for j in 0..n {
                    c0[j] = br[j].mul_add(p, c0[j]);
                    c1[j] = br[j].mul_add(q, c1[j]);
                }
                kk += 1;
            }
            i += 2;
        }
        if i < m {
            let c_row = &mut c[i * n..i * n + n];
            let a_row = &a[i * k..(i + 1) * k];
            let mut kk = k0;
            while kk + 4 <= k1 {
                let (p0, p1, p2, p3) = (a_row[kk], a_row[kk + 1], a_row[kk + 2], a_row[kk + 3]);
                let b0 = &b[kk * n..kk * n + n];
                let b1 = &b[(kk + 1) * n..(kk + 1) * n + n];
                let b2 = &b[(kk + 2) * n..(kk + 2) * n + n];
                let b3 = &b[(kk + 3) * n..(kk + 3) * n + n];
                for j in 0..n {
                    let mut t = c_row[j];
                    t = b0[j].mul_add(p0, t);
                    t = b1[j].mul_add(p1, t);
                    t = b2[j].mul_add(p2, t);
                    t = b3[j].mul_add(p3, t);
                    c_row[j] = t;
                }
                kk += 4;
            }
            while kk < k1 {
                let p = a_row[kk];
                let br = &b[kk * n..kk * n + n];
                for (cv, bv) in c_row.iter_mut().zip(br) {
                    *cv = bv.mul_add(p, *cv);
                }
                kk += 1;
            }
        }
    }
}

/// Transpose the leading rows*cols of `src` into `dst` (cols*rows).
pub fn transpose_slices(rows: usize, cols: usize, src: &[f64], dst: &mut [f64]) {
    assert!(src.len() >= rows * cols && dst.len() >= rows * cols);
    const T: usize = 32;
    for r0 in (0..rows).step_by(T) {
        for c0 in (0..cols).step_by(T) {
            let r1 = (r0 + T).min(rows);
            let c1 = (c0 + T).min(cols);
            for r in r0..r1 {
                for c in c0..c1 {
                    dst[c * rows + r] = src[r * cols + c];
                }
            }
        }
    }
}

/// Dot product with four independent accumulators. The split is fixed, so the
/// result is deterministic, and the independent chains let the FMA units
/// overlap instead of serializing on one register.
#[inline]
pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    assert_eq!(a.len(), b.len());
    let mut acc = [0.0f64; 4];
    let chunks = a.len() / 4;
    let (a4, a_tail) = a.split_at(chunks * 4);
    let (b4, b_tail) = b.split_at(chunks * 4);
    for (ca, cb) in a4.chunks_exact(4).zip(b4.chunks_exact(4)) {
        acc[0] = ca[0].mul_add(cb[0], acc[0]);
        acc[1] = ca[1].mul_add(cb[1], acc[1]);
        acc[2] = ca[2].mul_add(cb[2], acc[2]);
        acc[3] = ca[3].mul_add(cb[3], acc[3]);
    }
    let mut tail = 0.0;
    for (x, y) in a_tail.iter().zip(b_tail) {
        tail = x.mul_add(*y, tail);
    }
    (acc[0] + acc[1]) + (acc[2] + acc[3]) + tail
}

/// y += alpha * x.
#[inline]
pub fn axpy(alpha: f64, x: &[f64], y: &mut [f64]) {
    assert_eq!(x.len(), y.len());
    for (yv, xv) in y.iter_mut().zip(x) {
        *yv = xv.mul_add(alpha, *yv);
    }
}

/// Euclidean norm.
#[inline]
pub fn norm2(x: &[f64]) -> f64 {
    dot(x, x).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn matmul_small_known_product() {
        let a = Mat::from_vec(2, 3, vec![1.0, 2.0, 3.0, 4.0, 5.0, 6.0]).unwrap();
        let b = Mat::from_vec(3, 2, vec![7.0, 8.0, 9.0, 10.0, 11.0, 12.0]).unwrap();
        let c = a.matmul(&b);
        assert_eq!(c.as_slice(), &[58.0, 64.0, 139.0, 154.0]);
    }

    #[test]
    fn matmul_identity_is_noop() {
        let mut id = Mat::zeros(4, 4);
        for i in 0..4 {
            id.set(i, i, 1.0);
        }
        let a = Mat::from_vec(4, 4, (0..16).map(|v| v as f64).collect()).unwrap();
        assert_eq!(a.matmul(&id).as_slice(), a.as_slice());
    }

    #[test]
    fn matmul_blocked_matches_naive_across_block_boundary() {
        // dimensions straddle K_BLOCK so the blocked path is exercised
        let k = K_BLOCK + 37;
        let mut state = 1u64;
        let mut next = || {
            state = state.wrapping_mul(6364136223846793005).wrapping_add(1);
            ((state >> 11) as f64 / (1u64 << 53) as f64) - 0.5
        };
        let a = Mat::from_vec(5, k, (0..5 * k).map(|_| next()).collect()).unwrap();
        let b = Mat::from_vec(k, 7, (0..k * 7).map(|_| next()).collect()).unwrap();
        let c = a.matmul(&b);
        for i in 0..5 {
            for j in 0..7 {
                let mut want = 0.0;
                for kk in 0..k {
                    want = a.get(i, kk).mul_add(b.get(kk, j), want);
                }
                assert!((c.get(i, j) - want).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn transpose_roundtrip() {
        let a = Mat::from_vec(3, 5, (0..15).map(|v| v as f64).collect()).unwrap();
        let t = a.transpose();
        assert_eq!(t.rows(), 5);
        assert_eq!(t.cols(), 3);
        assert_eq!(t.get(4, 2), a.get(2, 4));
        assert_eq!(t.transpose(), a);
    }

    #[test]
    fn dot_matches_reference_with_remainder_lengths() {
        for len in [1usize, 3, 4, 5, 8, 127] {
            let a: Vec<f64> = (0..len).map(|i| (i as f64) * 0.5 - 1.0).collect();
            let b: Vec<f64> = (0..len).map(|i| 2.0 - (i as f64) * 0.25).collect();
            let want: f64 = a.iter().zip(&b).map(|(x, y)| x * y).sum();
            assert!((dot(&a, &b) - want).abs() < 1e-10);
        }
    }

    #[test]
    fn from_vec_rejects_wrong_length() {
        assert!(Mat::from_vec(2, 2, vec![1.0]).is_err());
    }
}
