//! SINR: compression of implicit neural representations by sparse coding
//! their weight vectors over random Gaussian dictionaries that both sides
//! regenerate from a seed, so the compressed container carries only sparse
//! codes, quantized scalars, and a handful of header fields.

pub mod cli;
pub mod codec;
pub mod dict;
pub mod error;
pub mod fastmath;
pub mod inr;
pub mod linalg;
pub mod mat;
pub mod rng;
pub mod signals;
pub mod sparse;

pub use error::Error;

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;
