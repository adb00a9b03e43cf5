//! Auto-regressive next-point prediction.
//!
//! A predictor sees the `k` most recent grid points and returns an integer
//! grid point. Encoder and decoder must agree bit for bit, so the MLP runs in
//! plain `f32` with a fixed accumulation order and no fused multiply-add, and
//! its metric output is rounded onto the grid before it is used.

mod lizm;
mod mlp;

use std::path::Path;

pub use lizm::{lizm_size, load_lizm, to_lizm_bytes, LIZM_MAGIC, LIZM_VERSION};
pub use mlp::{DenseLayer, Mlp};

use mlp::Scratch;

use crate::{Error, Result};

pub const DEFAULT_CONTEXT_SIZE: usize = 3;
pub const DEFAULT_HIDDEN_DIM: usize = 256;
pub const DEFAULT_HIDDEN_LAYERS: usize = 3;

#[derive(Debug, Clone, PartialEq)]
pub enum PredictorModel {
    /// Constant-velocity extrapolation `2·P[t-1] - P[t-2]` in integers.
    Linear {
        context_size: usize,
    },
    Mlp(Mlp),
}

impl PredictorModel {
    /// Linear fallback with the default context of three points.
    pub fn linear() -> Self {
        PredictorModel::Linear { context_size: DEFAULT_CONTEXT_SIZE }
    }

    pub fn linear_with_context(context_size: usize) -> Result<Self> {
        if context_size < 2 {
            return Err(Error::Validation(format!(
                "linear extrapolation needs at least 2 context points, got {context_size}"
            )));
        }
        Ok(PredictorModel::Linear { context_size })
    }

    pub fn from_lizm(bytes: &[u8]) -> Result<Self> {
        load_lizm(bytes).map(PredictorModel::Mlp)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_lizm(&std::fs::read(path)?)
    }

    pub fn context_size(&self) -> usize {
        match self {
            PredictorModel::Linear { context_size } => *context_size,
            PredictorModel::Mlp(net) => net.context_size(),
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            PredictorModel::Linear { .. } => "linear",
            PredictorModel::Mlp(_) => "mlp",
        }
    }

    pub fn predict(&self, ctx: &PredictionContext) -> Result<[i32; 3]> {
        if ctx.previous.len() != self.context_size() {
            return Err(Error::Validation(format!(
                "model expects {} context points, got {}",
                self.context_size(),
                ctx.previous.len()
            )));
        }
        self.stepper(ctx.scale).next(&ctx.previous)
    }

    /// Allocation-free predictor for running along a block.
    pub(crate) fn stepper(&self, scale: f32) -> Stepper<'_> {
        Stepper { model: self, scale, input: Vec::with_capacity(3 * self.context_size()), scratch: Scratch::default() }
    }
}

/// The `k` most recent grid points, oldest first, and the grid they live on.
#[derive(Debug, Clone, PartialEq)]
pub struct PredictionContext {
    previous: Vec<[i32; 3]>,
    scale: f32,
}

impl PredictionContext {
    pub fn new(previous: Vec<[i32; 3]>, scale: f32) -> Result<Self> {
        crate::geometry::check_scale(scale)?;
        if previous.is_empty() {
            return Err(Error::Validation("empty prediction context".into()));
        }
        Ok(Self { previous, scale })
    }

    pub fn previous(&self) -> &[[i32; 3]] {
        &self.previous
    }

    pub fn scale(&self) -> f32 {
        self.scale
    }
}

/// Network input for a context: every point as a metric offset from the most
/// recent one, oldest first. The most recent point contributes zeros.
pub fn build_context(previous: &[[i32; 3]], scale: f32, k: usize) -> Result<Vec<f32>> {
    if previous.len() != k {
        return Err(Error::Validation(format!("context needs exactly {k} points, got {}", previous.len())));
    }
    let mut out = Vec::with_capacity(3 * k);
    fill_context(previous, scale, &mut out);
    Ok(out)
}

fn fill_context(previous: &[[i32; 3]], scale: f32, out: &mut Vec<f32>) {
    out.clear();
    let anchor = previous[previous.len() - 1];
    for p in previous {
        for axis in 0..3 {
            let delta = p[axis] as i64 - anchor[axis] as i64;
            out.push(delta as f32 / scale);
        }
    }
}

pub(crate) struct Stepper<'a> {
    model: &'a PredictorModel,
    scale: f32,
    input: Vec<f32>,
    scratch: Scratch,
}

impl Stepper<'_> {
    /// Predicts the point after `history`, which holds exactly `k` points.
    ///
    /// Integer steps wrap on overflow; the residual coder wraps the same way,
    /// so extreme predictions stay exactly invertible.
    pub(crate) fn next(&mut self, history: &[[i32; 3]]) -> Result<[i32; 3]> {
        let last = history[history.len() - 1];
        match self.model {
            PredictorModel::Linear { .. } => {
                let before = history[history.len() - 2];
                Ok(std::array::from_fn(|axis| last[axis].wrapping_mul(2).wrapping_sub(before[axis])))
            }
            PredictorModel::Mlp(net) => {
                fill_context(history, self.scale, &mut self.input);
                let offset = net.forward_with(&self.input, &mut self.scratch);
                let mut out = [0i32; 3];
                for axis in 0..3 {
                    let steps = offset[axis] * self.scale;
                    if !steps.is_finite() {
                        return Err(Error::Corruption(format!(
                            "predictor produced a non-finite output ({}) on axis {axis}; the model file is damaged",
                            offset[axis]
                        )));
                    }
                    out[axis] = (steps.round() as i32).wrapping_add(last[axis]);
                }
                Ok(out)
            }
        }
    }
}
