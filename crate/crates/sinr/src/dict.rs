//! Random Gaussian dictionaries regenerated from a seed.
//!
//! The decoder never receives atom values; it receives (seed, k1, k2) and
//! replays the exact construction below. Draw order is therefore normative:
//! atoms fill column by column, top to bottom, from consecutive Box-Muller
//! pairs, dropping the second value of a trailing odd pair in each column,
//! and every column is scaled to unit norm afterwards.

use crate::error::Error;
use crate::mat::{dot, norm2};
use crate::rng::SplitMix64;
use crate::Result;

/// Overcomplete sampling matrix with unit-norm columns, stored column-major
/// so an atom is one contiguous slice.
#[derive(Debug, Clone)]
pub struct Dictionary {
    k1: usize,
    k2: usize,
    seed: u64,
    atoms: Vec<f64>,
}

impl Dictionary {
    /// Sample a k1 x k2 dictionary from the given seed. Requires k2 > k1
    /// (the codec exists to exploit overcompleteness) and k1 >= 1.
    pub fn generate(seed: u64, k1: usize, k2: usize) -> Result<Dictionary> {
        if k1 == 0 {
            return Err(Error::invalid("dictionary needs k1 >= 1"));
        }
        if k2 <= k1 {
            return Err(Error::invalid(format!(
                "dictionary must be overcomplete: got k2 = {k2} <= k1 = {k1}"
            )));
        }
        let mut rng = SplitMix64::new(seed);
        let mut atoms = Vec::with_capacity(k1 * k2);
        for _ in 0..k2 {
            let start = atoms.len();
            for _ in 0..k1 / 2 {
                let (z0, z1) = rng.gaussian_pair();
                atoms.push(z0);
                atoms.push(z1);
            }
            if k1 % 2 == 1 {
                let (z0, _) = rng.gaussian_pair();
                atoms.push(z0);
            }
            let col = &mut atoms[start..start + k1];
            let norm = norm2(col);
            if norm < 1e-300 {
                return Err(Error::invalid("dictionary column with zero norm"));
            }
            // true division, not multiplication by a reciprocal: the rounding
            // of each entry is part of the regeneration contract
            for v in col {
                *v /= norm;
            }
        }
        Ok(Dictionary { k1, k2, seed, atoms })
    }

    pub fn k1(&self) -> usize {
        self.k1
    }

    pub fn k2(&self) -> usize {
        self.k2
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Column j as a contiguous slice.
    #[inline]
    pub fn atom(&self, j: usize) -> &[f64] {
        &self.atoms[j * self.k1..(j + 1) * self.k1]
    }

    /// Correlations of every atom against `v`, in atom order.
    pub fn correlations(&self, v: &[f64]) -> Vec<f64> {
        assert_eq!(v.len(), self.k1);
        (0..self.k2).map(|j| dot(self.atom(j), v)).collect()
    }
}
