//! Sparse recovery over a seed-reproducible dictionary.
//!
//! Plants an s-sparse combination of random Gaussian atoms, recovers it with
//! orthogonal matching pursuit, and then rebuilds the vector on the "other
//! side" from nothing but the seed and the (index, value) pairs — the core
//! trick that lets a codec ship coefficients without shipping the matrix.

use sinr::dict::Dictionary;
use sinr::rng::SplitMix64;
use sinr::sparse::omp;

fn main() {
    let seed = 0xD1C7;
    let (k1, k2, s) = (64, 256, 6);

    // Encoder side: a dictionary everyone can regenerate from the seed.
    let dict = Dictionary::generate(seed, k1, k2).unwrap();

    // Plant w = sum of s atoms with random coefficients.
    let mut rng = SplitMix64::new(42);
    let mut support: Vec<u16> = (0..s).map(|i| (i * (k2 / s) + 3) as u16).collect();
    support.sort_unstable();
    let coeffs: Vec<f64> = (0..s).map(|_| rng.next_f64() * 2.0 - 1.0).collect();
    let mut w = vec![0.0; k1];
    for (&j, &c) in support.iter().zip(&coeffs) {
        for (wi, ai) in w.iter_mut().zip(dict.atom(j as usize)) {
            *wi += c * ai;
        }
    }

    // Recover the code with OMP.
    let code = omp(&dict, &w, s).unwrap();
    println!("planted support  {support:?}");
    println!("recovered support {:?}", code.indices);
    assert_eq!(code.indices, support, "exact support recovery");

    // Decoder side: regenerate the dictionary from the seed alone and
    // synthesize. No matrix ever crossed the wire.
    let remote = Dictionary::generate(seed, k1, k2).unwrap();
    let mut rebuilt = vec![0.0; k1];
    for (&j, &c) in code.indices.iter().zip(&code.values) {
        for (ri, ai) in rebuilt.iter_mut().zip(remote.atom(j as usize)) {
            *ri += c * ai;
        }
    }
    let err: f64 = w
        .iter()
        .zip(&rebuilt)
        .map(|(a, b)| (a - b) * (a - b))
        .sum::<f64>()
        .sqrt()
        / w.iter().map(|a| a * a).sum::<f64>().sqrt();
    println!("relative reconstruction error {err:.2e}");
    assert!(err < 1e-10);
    println!("payload: {} scalars instead of {} ({}x smaller)", 2 * s, k1, k1 / (2 * s));
}
