//! Minimal dense-network engine.
//!
//! A fixed-topology multilayer perceptron over `f64` with explicit
//! backpropagation, an Adam optimizer and soft parameter blending. Shared by
//! the surrogate regressors and the actor/critic networks of the agent.
//!
//! Layout conventions:
//! - batches are row-major [`Matrix`] values, one sample per row;
//! - layer `k` owns a weight matrix of shape `(sizes[k+1], sizes[k])`
//!   (row-major) and a bias vector of length `sizes[k+1]`.

mod backprop;
mod optim;
mod persist;

pub use backprop::{backward_mse, backward_scalar_head};
pub use optim::{mse_mae, optim_step, soft_update, OptimState};
pub use persist::{load_mlp, mlp_from_str, mlp_to_string, save_mlp};

use rand::distributions::{Distribution, Uniform};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::{Error, Result};

/// Element-wise activation function.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Activation {
    Relu,
    Tanh,
    Identity,
}

impl Activation {
    #[inline]
    pub fn apply(self, x: f64) -> f64 {
        match self {
            Activation::Relu => {
                if x > 0.0 {
                    x
                } else {
                    0.0
                }
            }
            Activation::Tanh => x.tanh(),
            Activation::Identity => x,
        }
    }

    /// Derivative expressed in terms of the activation's own output.
    #[inline]
    pub fn deriv_from_output(self, a: f64) -> f64 {
        match self {
            Activation::Relu => {
                if a > 0.0 {
                    1.0
                } else {
                    0.0
                }
            }
            Activation::Tanh => 1.0 - a * a,
            Activation::Identity => 1.0,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Activation::Relu => "relu",
            Activation::Tanh => "tanh",
            Activation::Identity => "identity",
        }
    }

    pub fn from_name(name: &str) -> Result<Self> {
        match name {
            "relu" => Ok(Activation::Relu),
            "tanh" => Ok(Activation::Tanh),
            "identity" => Ok(Activation::Identity),
            other => Err(Error::Parse(format!("unknown activation `{other}`"))),
        }
    }
}

/// Dense row-major matrix of `f64`.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Matrix {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn from_flat(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::Shape(format!(
                "flat data of length {} cannot form a {rows}x{cols} matrix",
                data.len()
            )));
        }
        Ok(Matrix { rows, cols, data })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let cols = rows.first().map_or(0, Vec::len);
        let mut data = Vec::with_capacity(rows.len() * cols);
        for r in rows {
            if r.len() != cols {
                return Err(Error::Shape("ragged rows".into()));
            }
            data.extend_from_slice(r);
        }
        Ok(Matrix {
            rows: rows.len(),
            cols,
            data,
        })
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
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

    #[inline]
    pub fn get(&self, r: usize, c: usize) -> f64 {
        self.data[r * self.cols + c]
    }

    #[inline]
    pub fn set(&mut self, r: usize, c: usize, v: f64) {
        self.data[r * self.cols + c] = v;
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }
}

/// Per-parameter arrays congruent in shape with an [`Mlp`]'s parameters.
#[derive(Debug, Clone)]
pub struct GradientSet {
    pub weights: Vec<Vec<f64>>,
    pub biases: Vec<Vec<f64>>,
}

impl GradientSet {
    pub fn zeros_like(net: &Mlp) -> Self {
        GradientSet {
            weights: net.weights.iter().map(|w| vec![0.0; w.len()]).collect(),
            biases: net.biases.iter().map(|b| vec![0.0; b.len()]).collect(),
        }
    }

    pub fn is_finite(&self) -> bool {
        self.weights
            .iter()
            .chain(self.biases.iter())
            .all(|arr| arr.iter().all(|v| v.is_finite()))
    }

    pub fn congruent_with(&self, net: &Mlp) -> bool {
        self.weights.len() == net.weights.len()
            && self.biases.len() == net.biases.len()
            && self
                .weights
                .iter()
                .zip(&net.weights)
                .all(|(a, b)| a.len() == b.len())
            && self
                .biases
                .iter()
                .zip(&net.biases)
                .all(|(a, b)| a.len() == b.len())
    }
}

/// Dense feed-forward network with one activation for hidden layers and one
/// for the output layer.
#[derive(Debug, Clone, PartialEq)]
pub struct Mlp {
    layer_sizes: Vec<usize>,
    weights: Vec<Vec<f64>>,
    biases: Vec<Vec<f64>>,
    hidden_activation: Activation,
    output_activation: Activation,
}

fn validate_sizes(layer_sizes: &[usize]) -> Result<()> {
    if layer_sizes.len() < 2 {
        return Err(Error::InvalidArchitecture(format!(
            "need at least input and output dims, got {:?}",
            layer_sizes
        )));
    }
    if layer_sizes.iter().any(|&s| s == 0) {
        return Err(Error::InvalidArchitecture(format!(
            "layer sizes must be positive, got {:?}",
            layer_sizes
        )));
    }
    Ok(())
}

impl Mlp {
    /// Creates a network with weights drawn uniformly from
    /// `±sqrt(6/fan_in)` and zero biases. Identical seeds give identical
    /// parameters.
    pub fn new(
        layer_sizes: &[usize],
        hidden_activation: Activation,
        output_activation: Activation,
        seed: u64,
    ) -> Result<Self> {
        validate_sizes(layer_sizes)?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut weights = Vec::with_capacity(layer_sizes.len() - 1);
        let mut biases = Vec::with_capacity(layer_sizes.len() - 1);
        for k in 0..layer_sizes.len() - 1 {
            let fan_in = layer_sizes[k];
            let fan_out = layer_sizes[k + 1];
            let limit = (6.0 / fan_in as f64).sqrt();
            let dist = Uniform::new_inclusive(-limit, limit);
            let w: Vec<f64> = (0..fan_in * fan_out)
                .map(|_| dist.sample(&mut rng))
                .collect();
            weights.push(w);
            biases.push(vec![0.0; fan_out]);
        }
        Ok(Mlp {
            layer_sizes: layer_sizes.to_vec(),
            weights,
            biases,
            hidden_activation,
            output_activation,
        })
    }

    /// Builds a network from explicit parameters.
    pub fn from_parts(
        layer_sizes: Vec<usize>,
        weights: Vec<Vec<f64>>,
        biases: Vec<Vec<f64>>,
        hidden_activation: Activation,
        output_activation: Activation,
    ) -> Result<Self> {
        validate_sizes(&layer_sizes)?;
        let n = layer_sizes.len() - 1;
        if weights.len() != n || biases.len() != n {
            return Err(Error::Shape(format!(
                "expected {n} weight/bias arrays, got {}/{}",
                weights.len(),
                biases.len()
            )));
        }
        for k in 0..n {
            if weights[k].len() != layer_sizes[k] * layer_sizes[k + 1] {
                return Err(Error::Shape(format!("weight array {k} has wrong length")));
            }
            if biases[k].len() != layer_sizes[k + 1] {
                return Err(Error::Shape(format!("bias array {k} has wrong length")));
            }
        }
        Ok(Mlp {
            layer_sizes,
            weights,
            biases,
            hidden_activation,
            output_activation,
        })
    }

    #[inline]
    pub fn input_dim(&self) -> usize {
        self.layer_sizes[0]
    }

    #[inline]
    pub fn output_dim(&self) -> usize {
        *self.layer_sizes.last().unwrap()
    }

    pub fn layer_sizes(&self) -> &[usize] {
        &self.layer_sizes
    }

    pub fn hidden_activation(&self) -> Activation {
        self.hidden_activation
    }

    pub fn output_activation(&self) -> Activation {
        self.output_activation
    }

    pub fn num_layers(&self) -> usize {
        self.layer_sizes.len() - 1
    }

    pub fn weights(&self) -> &[Vec<f64>] {
        &self.weights
    }

    pub fn biases(&self) -> &[Vec<f64>] {
        &self.biases
    }

    pub fn weights_mut(&mut self) -> &mut [Vec<f64>] {
        &mut self.weights
    }

    pub fn biases_mut(&mut self) -> &mut [Vec<f64>] {
        &mut self.biases
    }

    pub fn same_architecture(&self, other: &Mlp) -> bool {
        self.layer_sizes == other.layer_sizes
            && self.hidden_activation == other.hidden_activation
            && self.output_activation == other.output_activation
    }

    /// Scales the final layer's weights and biases in place. Used to start
    /// policy networks near the zero action.
    pub fn scale_output_layer(&mut self, factor: f64) {
        if let Some(w) = self.weights.last_mut() {
            for v in w.iter_mut() {
                *v *= factor;
            }
        }
        if let Some(b) = self.biases.last_mut() {
            for v in b.iter_mut() {
                *v *= factor;
            }
        }
    }

    #[inline]
    fn activation_of(&self, layer: usize) -> Activation {
        if layer + 1 == self.num_layers() {
            self.output_activation
        } else {
            self.hidden_activation
        }
    }

    /// Forward pass over a batch (one sample per row).
    pub fn forward(&self, batch: &Matrix) -> Result<Matrix> {
        Ok(self.forward_cached(batch)?.activations.pop().unwrap())
    }

    /// Forward pass for a single sample.
    pub fn forward_single(&self, input: &[f64]) -> Result<Vec<f64>> {
        let m = Matrix::from_flat(1, input.len(), input.to_vec())?;
        Ok(self.forward(&m)?.data().to_vec())
    }

    pub(crate) fn forward_cached(&self, batch: &Matrix) -> Result<ForwardCache> {
        if batch.cols() != self.input_dim() {
            return Err(Error::Shape(format!(
                "batch has {} columns, network expects {}",
                batch.cols(),
                self.input_dim()
            )));
        }
        let mut activations = Vec::with_capacity(self.num_layers() + 1);
        activations.push(batch.clone());
        for k in 0..self.num_layers() {
            let act = self.activation_of(k);
            let input = activations.last().unwrap();
            let (in_dim, out_dim) = (self.layer_sizes[k], self.layer_sizes[k + 1]);
            let w = &self.weights[k];
            let b = &self.biases[k];
            let mut out = Matrix::zeros(input.rows(), out_dim);
            for r in 0..input.rows() {
                let x = input.row(r);
                let y = out.row_mut(r);
                for (o, yo) in y.iter_mut().enumerate() {
                    let wrow = &w[o * in_dim..(o + 1) * in_dim];
                    let mut z = b[o];
                    for (wi, xi) in wrow.iter().zip(x.iter()) {
                        z += wi * xi;
                    }
                    *yo = act.apply(z);
                }
            }
            activations.push(out);
        }
        Ok(ForwardCache { activations })
    }
}

/// Post-activation values for every layer, input included.
pub(crate) struct ForwardCache {
    pub(crate) activations: Vec<Matrix>,
}
