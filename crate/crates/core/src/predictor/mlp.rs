use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::{Error, Result};

/// One fully connected layer, `out = W x + b`.
///
/// `weights` is row-major with one row per output neuron. A transposed copy
/// drives the forward pass: iterating inputs in the outer loop keeps each
/// neuron's accumulation order identical to a row-major dot product while
/// letting the compiler vectorize across neurons.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseLayer {
    in_dim: usize,
    out_dim: usize,
    weights: Vec<f32>,
    bias: Vec<f32>,
    transposed: Vec<f32>,
}

impl DenseLayer {
    pub fn new(in_dim: usize, out_dim: usize, weights: Vec<f32>, bias: Vec<f32>) -> Result<Self> {
        if in_dim == 0 || out_dim == 0 {
            return Err(Error::Format(format!("layer dimensions must be positive, got {in_dim}x{out_dim}")));
        }
        if weights.len() != in_dim * out_dim || bias.len() != out_dim {
            return Err(Error::Format(format!(
                "layer {in_dim}->{out_dim} needs {} weights and {out_dim} biases, got {} and {}",
                in_dim * out_dim,
                weights.len(),
                bias.len()
            )));
        }
        if weights.iter().chain(&bias).any(|v| !v.is_finite()) {
            return Err(Error::Format("layer has non-finite parameters".into()));
        }
        let mut transposed = vec![0.0; weights.len()];
        for row in 0..out_dim {
            for col in 0..in_dim {
                transposed[col * out_dim + row] = weights[row * in_dim + col];
            }
        }
        Ok(Self { in_dim, out_dim, weights, bias, transposed })
    }

    pub fn in_dim(&self) -> usize {
        self.in_dim
    }

    pub fn out_dim(&self) -> usize {
        self.out_dim
    }

    /// Row-major `out_dim x in_dim` weights.
    pub fn weights(&self) -> &[f32] {
        &self.weights
    }

    pub fn bias(&self) -> &[f32] {
        &self.bias
    }

    fn forward(&self, input: &[f32], out: &mut Vec<f32>, relu: bool) {
        #[cfg(target_arch = "x86_64")]
        if std::is_x86_feature_detected!("avx2") {
            // SAFETY: the CPU supports AVX2. Multiplies and adds stay separate,
            // so every lane computes the same values as the portable path.
            unsafe { self.forward_avx2(input, out, relu) };
            return;
        }
        self.forward_portable(input, out, relu);
    }

    #[cfg(target_arch = "x86_64")]
    #[target_feature(enable = "avx2")]
    unsafe fn forward_avx2(&self, input: &[f32], out: &mut Vec<f32>, relu: bool) {
        self.forward_portable(input, out, relu);
    }

    #[inline(always)]
    fn forward_portable(&self, input: &[f32], out: &mut Vec<f32>, relu: bool) {
        out.clear();
        out.resize(self.out_dim, 0.0);
        for (col, &x) in input.iter().enumerate() {
            // Weights are finite, so a zero input only ever adds a signed zero.
            if x == 0.0 {
                continue;
            }
            let column = &self.transposed[col * self.out_dim..(col + 1) * self.out_dim];
            for (acc, &w) in out.iter_mut().zip(column) {
                *acc += w * x;
            }
        }
        for (acc, &b) in out.iter_mut().zip(&self.bias) {
            *acc += b;
            if relu && *acc < 0.0 {
                *acc = 0.0;
            }
        }
    }
}

/// Feed-forward network: ReLU after every layer except the last.
#[derive(Debug, Clone, PartialEq)]
pub struct Mlp {
    context_size: usize,
    layers: Vec<DenseLayer>,
}

impl Mlp {
    pub fn new(context_size: usize, layers: Vec<DenseLayer>) -> Result<Self> {
        if context_size == 0 {
            return Err(Error::Format("context size must be at least 1".into()));
        }
        let (first, last) = match (layers.first(), layers.last()) {
            (Some(first), Some(last)) => (first, last),
            _ => return Err(Error::Format("network has no layers".into())),
        };
        if first.in_dim != 3 * context_size {
            return Err(Error::Format(format!(
                "first layer takes {} inputs, context of {context_size} points needs {}",
                first.in_dim,
                3 * context_size
            )));
        }
        if last.out_dim != 3 {
            return Err(Error::Format(format!("last layer emits {} values, expected 3", last.out_dim)));
        }
        if let Some(idx) = layers.windows(2).position(|w| w[0].out_dim != w[1].in_dim) {
            return Err(Error::Format(format!(
                "layer {idx} emits {} values but layer {} takes {}",
                layers[idx].out_dim,
                idx + 1,
                layers[idx + 1].in_dim
            )));
        }
        Ok(Self { context_size, layers })
    }

    /// All-zero network of the given widths, `dims = [3k, h1, ..., 3]`.
    pub fn zeros(dims: &[usize]) -> Result<Self> {
        Self::from_dims(dims, |_, _| 0.0)
    }

    /// Network with small uniform weights drawn from a seeded generator.
    ///
    /// Useful as a stand-in when no trained model is at hand: it exercises the
    /// exact same inference path with realistic layer sizes.
    pub fn seeded(context_size: usize, hidden_dim: usize, hidden_layers: usize, seed: u64) -> Result<Self> {
        let mut dims = vec![3 * context_size];
        dims.extend(std::iter::repeat_n(hidden_dim, hidden_layers));
        dims.push(3);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        Self::from_dims(&dims, |fan_in, _| {
            let bound = 1.0 / (fan_in as f32).sqrt();
            rng.gen_range(-bound..bound) * 0.1
        })
    }

    fn from_dims(dims: &[usize], mut init: impl FnMut(usize, usize) -> f32) -> Result<Self> {
        if dims.len() < 2 || !dims[0].is_multiple_of(3) {
            return Err(Error::Format(format!("invalid topology {dims:?}")));
        }
        let layers = dims
            .windows(2)
            .map(|w| {
                let weights = (0..w[0] * w[1]).map(|_| init(w[0], w[1])).collect();
                let bias = (0..w[1]).map(|_| init(w[0], w[1])).collect();
                DenseLayer::new(w[0], w[1], weights, bias)
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(dims[0] / 3, layers)
    }

    pub fn context_size(&self) -> usize {
        self.context_size
    }

    pub fn layers(&self) -> &[DenseLayer] {
        &self.layers
    }

    pub fn parameter_count(&self) -> usize {
        self.layers.iter().map(|l| l.weights.len() + l.bias.len()).sum()
    }

    /// Widths of every activation, input first.
    pub fn topology(&self) -> Vec<usize> {
        std::iter::once(self.layers[0].in_dim).chain(self.layers.iter().map(|l| l.out_dim)).collect()
    }

    pub fn forward(&self, input: &[f32]) -> [f32; 3] {
        let mut scratch = Scratch::default();
        self.forward_with(input, &mut scratch)
    }

    pub(crate) fn forward_with(&self, input: &[f32], scratch: &mut Scratch) -> [f32; 3] {
        debug_assert_eq!(input.len(), 3 * self.context_size);
        let Scratch { front, back } = scratch;
        front.clear();
        front.extend_from_slice(input);
        let last = self.layers.len() - 1;
        for (idx, layer) in self.layers.iter().enumerate() {
            layer.forward(front, back, idx != last);
            std::mem::swap(front, back);
        }
        [front[0], front[1], front[2]]
    }
}

/// Reusable activation buffers for repeated forward passes.
#[derive(Debug, Default)]
pub(crate) struct Scratch {
    front: Vec<f32>,
    back: Vec<f32>,
}
