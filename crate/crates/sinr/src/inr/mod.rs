//! Coordinate networks: a plain MLP from coordinates in [-1, 1]^a to signal
//! values, with sine, Gaussian, or ReLU hidden activations and an affine
//! final layer. Everything downstream (the codec, the metrics) treats these
//! networks as the object being compressed.

mod train;

pub use train::{analytic_gradients, mse_loss, train, TrainConfig, TrainResult};

use crate::error::Error;
use crate::fastmath;
use crate::mat::Mat;
use crate::rng::SplitMix64;
use crate::Result;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ActivationKind {
    /// sin(omega0 * z), periodic features
    Sine,
    /// exp(-(sigma * z)^2), localized bumps
    Gaussian,
    /// max(0, z); pair with positional encoding for high-frequency content
    Relu,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Activation {
    pub kind: ActivationKind,
    pub omega0: f64,
    pub sigma: f64,
}

impl Activation {
    pub fn new(kind: ActivationKind) -> Activation {
        Activation { kind, omega0: 30.0, sigma: 10.0 }
    }

    #[inline]
    pub(crate) fn apply(&self, z: f64) -> f64 {
        match self.kind {
            ActivationKind::Sine => fastmath::sin(self.omega0 * z),
            ActivationKind::Gaussian => {
                let t = self.sigma * z;
                fastmath::exp(-(t * t))
            }
            ActivationKind::Relu => z.max(0.0),
        }
    }

    /// Value and derivative together; the training loop wants both.
    #[inline]
    pub(crate) fn apply_with_derivative(&self, z: f64) -> (f64, f64) {
        match self.kind {
            ActivationKind::Sine => {
                let (s, c) = fastmath::sin_cos(self.omega0 * z);
                (s, self.omega0 * c)
            }
            ActivationKind::Gaussian => {
                let t = self.sigma * z;
                let g = fastmath::exp(-(t * t));
                (g, -2.0 * self.sigma * self.sigma * z * g)
            }
            ActivationKind::Relu => {
                if z > 0.0 {
                    (z, 1.0)
                } else {
                    (0.0, 0.0)
                }
            }
        }
    }
}

impl Default for Activation {
    fn default() -> Self {
        Activation::new(ActivationKind::Sine)
    }
}

/// Largest per-axis dimension an [`Architecture`] accepts.
pub const MAX_DIM: usize = 1 << 20;
/// Largest number of hidden width-x-width stages.
pub const MAX_HIDDEN_LAYERS: usize = 1024;
/// Largest positional-encoding level count.
pub const MAX_PE_LEVELS: usize = 64;

/// Shape of a coordinate network: `input_dim` -> `width` x (hidden_layers+1)
/// -> `output_dim`, giving hidden_layers + 2 weight matrices in total.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Architecture {
    pub input_dim: usize,
    pub output_dim: usize,
    pub hidden_layers: usize,
    pub width: usize,
    pub activation: Activation,
    /// 0 disables positional encoding; otherwise coordinates are lifted to
    /// 2 * levels * input_dim features before the first layer.
    pub pe_levels: usize,
}

impl Architecture {
    pub fn validate(&self) -> Result<()> {
        if self.input_dim == 0 || self.output_dim == 0 || self.width == 0 {
            return Err(Error::invalid("architecture dimensions must be positive"));
        }
        // generous engineering caps; they keep hostile container headers from
        // driving allocations before the shape chain is checked
        if self.input_dim > MAX_DIM
            || self.output_dim > MAX_DIM
            || self.width > MAX_DIM
            || self.hidden_layers > MAX_HIDDEN_LAYERS
            || self.pe_levels > MAX_PE_LEVELS
        {
            return Err(Error::invalid(format!(
                "architecture out of supported bounds: dims <= {MAX_DIM}, \
                 hidden layers <= {MAX_HIDDEN_LAYERS}, encoding levels <= {MAX_PE_LEVELS}"
            )));
        }
        if !(self.activation.omega0.is_finite() && self.activation.sigma.is_finite()) {
            return Err(Error::invalid("activation parameters must be finite"));
        }
        Ok(())
    }

    /// Fan-in of the first layer after optional encoding.
    pub fn effective_input_dim(&self) -> usize {
        if self.pe_levels > 0 {
            2 * self.pe_levels * self.input_dim
        } else {
            self.input_dim
        }
    }

    /// (rows, cols) = (fan_out, fan_in) for every weight matrix in order.
    pub fn layer_dims(&self) -> Vec<(usize, usize)> {
        let mut dims = Vec::with_capacity(self.hidden_layers + 2);
        dims.push((self.width, self.effective_input_dim()));
        for _ in 0..self.hidden_layers {
            dims.push((self.width, self.width));
        }
        dims.push((self.output_dim, self.width));
        dims
    }

    /// Total trainable weight scalars (biases not included).
    pub fn weight_count(&self) -> u64 {
        self.layer_dims().iter().map(|&(r, c)| (r * c) as u64).sum()
    }
}

/// Weights and biases matching an `Architecture`. Weight matrix i is
/// (fan_out x fan_in); biases have fan_out entries.
#[derive(Debug, Clone, PartialEq)]
pub struct Network {
    pub arch: Architecture,
    pub weights: Vec<Mat>,
    pub biases: Vec<Vec<f64>>,
}

impl Network {
    pub fn layer_count(&self) -> usize {
        self.weights.len()
    }

    pub fn validate(&self) -> Result<()> {
        self.arch.validate()?;
        let dims = self.arch.layer_dims();
        if self.weights.len() != dims.len() || self.biases.len() != dims.len() {
            return Err(Error::invalid(format!(
                "network has {} weight and {} bias layers, architecture wants {}",
                self.weights.len(),
                self.biases.len(),
                dims.len()
            )));
        }
        for (i, ((w, b), &(rows, cols))) in
            self.weights.iter().zip(&self.biases).zip(&dims).enumerate()
        {
            if w.rows() != rows || w.cols() != cols || b.len() != rows {
                return Err(Error::invalid(format!(
                    "layer {i} has shape {}x{} (+{} biases), architecture wants {rows}x{cols}",
                    w.rows(),
                    w.cols(),
                    b.len()
                )));
            }
        }
        Ok(())
    }
}

/// Deterministic initialization from a seed. Sine networks use the standard
/// scheme for periodic activations: first layer uniform in +-1/fan_in, later
/// layers +-sqrt(6/fan_in)/omega0. Gaussian and ReLU networks use
/// +-sqrt(6/fan_in) everywhere. Biases start at zero. Draw order is row-major
/// per layer, so a seed pins every scalar.
pub fn init_network(arch: &Architecture, seed: u64) -> Result<Network> {
    arch.validate()?;
    let mut rng = SplitMix64::new(seed);
    let mut weights = Vec::new();
    let mut biases = Vec::new();
    for (i, (rows, cols)) in arch.layer_dims().into_iter().enumerate() {
        let fan_in = cols as f64;
        let bound = match arch.activation.kind {
            ActivationKind::Sine => {
                if i == 0 {
                    1.0 / fan_in
                } else {
                    (6.0 / fan_in).sqrt() / arch.activation.omega0
                }
            }
            ActivationKind::Gaussian | ActivationKind::Relu => (6.0 / fan_in).sqrt(),
        };
        let mut w = Mat::zeros(rows, cols);
        for v in w.as_mut_slice() {
            *v = rng.next_symmetric(bound);
        }
        weights.push(w);
        biases.push(vec![0.0; rows]);
    }
    Ok(Network { arch: *arch, weights, biases })
}

/// Regular grid over [-1, 1]^d: dims[i] points along axis i (inclusive
/// endpoints, so each dim needs at least 2), rows in row-major order with
/// the last axis varying fastest.
pub fn coordinate_grid(dims: &[usize]) -> Result<Mat> {
    if dims.is_empty() {
        return Err(Error::invalid("coordinate grid needs at least one axis"));
    }
    for &d in dims {
        if d < 2 {
            return Err(Error::invalid(format!(
                "each grid axis needs at least 2 points, got {d}"
            )));
        }
    }
    let total: usize = dims.iter().product();
    let axes = dims.len();
    let mut data = vec![0.0f64; total * axes];
    // per-axis tick values, exact at the endpoints
    let ticks: Vec<Vec<f64>> = dims
        .iter()
        .map(|&d| {
            (0..d)
                .map(|i| -1.0 + 2.0 * (i as f64 / (d - 1) as f64))
                .collect()
        })
        .collect();
    for row in 0..total {
        let mut rem = row;
        for axis in (0..axes).rev() {
            let idx = rem % dims[axis];
            rem /= dims[axis];
            data[row * axes + axis] = ticks[axis][idx];
        }
    }
    Mat::from_vec(total, axes, data)
}

/// Frequency ladder: each coordinate c becomes
/// [sin(2^0 pi c), cos(2^0 pi c), ..., sin(2^(L-1) pi c), cos(2^(L-1) pi c)],
/// axes concatenated in order. Output width is 2 * levels * input width.
pub fn positional_encoding(coords: &Mat, levels: usize) -> Result<Mat> {
    if levels == 0 {
        return Err(Error::invalid("positional encoding needs at least one level"));
    }
    let a = coords.cols();
    let out_cols = 2 * levels * a;
    let mut out = Mat::zeros(coords.rows(), out_cols);
    for r in 0..coords.rows() {
        let row_in = coords.row(r);
        let row_out = out.row_mut(r);
        let mut j = 0;
        for &c in row_in {
            let mut freq = std::f64::consts::PI;
            for _ in 0..levels {
                let (s, co) = fastmath::sin_cos(freq * c);
                row_out[j] = s;
                row_out[j + 1] = co;
                j += 2;
                freq *= 2.0;
            }
        }
    }
    Ok(out)
}

/// Coordinates to first-layer inputs per the architecture's encoding choice.
pub fn encode_inputs(arch: &Architecture, coords: &Mat) -> Result<Mat> {
    if coords.cols() != arch.input_dim {
        return Err(Error::invalid(format!(
            "coordinates have {} axes, architecture wants {}",
            coords.cols(),
            arch.input_dim
        )));
    }
    if arch.pe_levels > 0 {
        positional_encoding(coords, arch.pe_levels)
    } else {
        Ok(coords.clone())
    }
}

/// Batched evaluation: one row of outputs per row of (already encoded)
/// inputs. Hidden layers activate, the final layer stays affine. Any
/// non-finite value aborts with the offending layer.
pub fn forward(net: &Network, inputs: &Mat) -> Result<Mat> {
    net.validate()?;
    let expected = net.arch.effective_input_dim();
    if inputs.cols() != expected {
        return Err(Error::invalid(format!(
            "inputs have width {}, network wants {expected}",
            inputs.cols()
        )));
    }
    let depth = net.layer_count();
    let mut x = inputs.clone();
    for (i, (w, b)) in net.weights.iter().zip(&net.biases).enumerate() {
        let wt = w.transpose();
        let mut z = Mat::zeros(x.rows(), w.rows());
        crate::mat::matmul_acc(&x, &wt, &mut z);
        let last = i + 1 == depth;
        for r in 0..z.rows() {
            let row = z.row_mut(r);
            for (v, bias) in row.iter_mut().zip(b) {
                *v += bias;
                if !last {
                    *v = net.arch.activation.apply(*v);
                }
            }
        }
        if z.as_slice().iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite(format!("forward pass at layer {i}")));
        }
        x = z;
    }
    Ok(x)
}

/// Sample moments of one layer's flattened weights.
#[derive(Debug, Clone, Copy)]
pub struct LayerMoments {
    pub layer: usize,
    pub count: usize,
    pub mean: f64,
    pub std: f64,
    pub skewness: f64,
    pub excess_kurtosis: f64,
    /// too few weights or zero variance; skewness/kurtosis forced to 0
    pub degenerate: bool,
}

/// Distribution diagnostics per weight matrix (biases excluded): mean, std,
/// skewness, excess kurtosis from standard sample moments.
pub fn weight_gaussianity(net: &Network) -> Vec<LayerMoments> {
    net.weights
        .iter()
        .enumerate()
        .map(|(layer, w)| {
            let xs = w.as_slice();
            let n = xs.len() as f64;
            let mean = xs.iter().sum::<f64>() / n;
            let mut m2 = 0.0;
            let mut m3 = 0.0;
            let mut m4 = 0.0;
            for &x in xs {
                let d = x - mean;
                let d2 = d * d;
                m2 += d2;
                m3 += d2 * d;
                m4 += d2 * d2;
            }
            m2 /= n;
            m3 /= n;
            m4 /= n;
            let degenerate = xs.len() < 16 || m2 <= 0.0;
            let (skewness, excess_kurtosis) = if degenerate {
                (0.0, 0.0)
            } else {
                (m3 / m2.powf(1.5), m4 / (m2 * m2) - 3.0)
            };
            LayerMoments {
                layer,
                count: xs.len(),
                mean,
                std: m2.sqrt(),
                skewness,
                excess_kurtosis,
                degenerate,
            }
        })
        .collect()
}
