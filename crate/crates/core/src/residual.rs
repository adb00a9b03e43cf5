//! Anchors, integer residuals and byte-plane shuffling.

use crate::predictor::PredictorModel;
use crate::{Error, Result};

/// A block of Morton-ordered grid points as the entropy coder sees it.
///
/// The first `k` points are stored verbatim; every later point is stored as
/// the difference to its prediction. Blocks shorter than `k` are all anchors.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ResidualBlock {
    anchors: Vec<[i32; 3]>,
    residuals: Vec<[i32; 3]>,
    context_size: usize,
}

impl ResidualBlock {
    pub fn new(anchors: Vec<[i32; 3]>, residuals: Vec<[i32; 3]>, context_size: usize) -> Result<Self> {
        let complete = anchors.len() == context_size;
        if context_size == 0 || anchors.len() > context_size || (!residuals.is_empty() && !complete) {
            return Err(Error::Corruption(format!(
                "block with {} anchors and {} residuals is inconsistent with context size {context_size}",
                anchors.len(),
                residuals.len()
            )));
        }
        Ok(Self { anchors, residuals, context_size })
    }

    pub fn anchors(&self) -> &[[i32; 3]] {
        &self.anchors
    }

    pub fn residuals(&self) -> &[[i32; 3]] {
        &self.residuals
    }

    pub fn context_size(&self) -> usize {
        self.context_size
    }

    pub fn point_count(&self) -> usize {
        self.anchors.len() + self.residuals.len()
    }
}

/// `R[t] = P[t] - predict(P[t-k..t])`, using the true points as history.
pub fn encode_block(points: &[[i32; 3]], model: &PredictorModel, scale: f32) -> Result<ResidualBlock> {
    let k = model.context_size();
    let split = k.min(points.len());
    let mut stepper = model.stepper(scale);
    let residuals = (k..points.len())
        .map(|t| {
            let predicted = stepper.next(&points[t - k..t])?;
            Ok(std::array::from_fn(|a| points[t][a].wrapping_sub(predicted[a])))
        })
        .collect::<Result<Vec<_>>>()?;
    ResidualBlock::new(points[..split].to_vec(), residuals, k)
}

pub fn decode_block(block: &ResidualBlock, model: &PredictorModel, scale: f32) -> Result<Vec<[i32; 3]>> {
    let k = model.context_size();
    if block.context_size != k {
        return Err(Error::Corruption(format!(
            "block was encoded with {} context points, model uses {k}",
            block.context_size
        )));
    }
    let mut points = Vec::with_capacity(block.point_count());
    points.extend_from_slice(&block.anchors);
    let mut stepper = model.stepper(scale);
    for residual in &block.residuals {
        let t = points.len();
        let predicted = stepper.next(&points[t - k..t])?;
        points.push(std::array::from_fn(|a| predicted[a].wrapping_add(residual[a])));
    }
    Ok(points)
}

/// Byte-plane transposed integers: plane `j` holds byte `j` (LSB first) of
/// every value, planes back to back.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ShuffledStream {
    bytes: Vec<u8>,
}

impl ShuffledStream {
    pub fn from_bytes(bytes: Vec<u8>) -> Self {
        Self { bytes }
    }

    pub fn as_bytes(&self) -> &[u8] {
        &self.bytes
    }

    pub fn into_bytes(self) -> Vec<u8> {
        self.bytes
    }

    /// Number of 32-bit values, when the length is a whole number of them.
    pub fn value_count(&self) -> Option<usize> {
        self.bytes.len().is_multiple_of(4).then_some(self.bytes.len() / 4)
    }
}

pub fn byte_shuffle(values: &[i32]) -> ShuffledStream {
    let n = values.len();
    let mut bytes = vec![0u8; 4 * n];
    for (i, v) in values.iter().enumerate() {
        for (plane, b) in v.to_le_bytes().into_iter().enumerate() {
            bytes[plane * n + i] = b;
        }
    }
    ShuffledStream { bytes }
}

pub fn byte_unshuffle(stream: &ShuffledStream) -> Result<Vec<i32>> {
    let n = stream.value_count().ok_or_else(|| {
        Error::Corruption(format!(
            "shuffled stream of {} bytes is not a whole number of 32-bit values",
            stream.bytes.len()
        ))
    })?;
    let b = &stream.bytes;
    Ok((0..n).map(|i| i32::from_le_bytes([b[i], b[n + i], b[2 * n + i], b[3 * n + i]])).collect())
}

/// Same transposition for 16-bit values (intensity deltas).
pub(crate) fn shuffle_u16(values: &[u16]) -> Vec<u8> {
    let n = values.len();
    let mut bytes = vec![0u8; 2 * n];
    for (i, v) in values.iter().enumerate() {
        let [lo, hi] = v.to_le_bytes();
        bytes[i] = lo;
        bytes[n + i] = hi;
    }
    bytes
}

pub(crate) fn unshuffle_u16(bytes: &[u8]) -> Result<Vec<u16>> {
    if !bytes.len().is_multiple_of(2) {
        return Err(Error::Corruption(format!(
            "shuffled stream of {} bytes is not a whole number of 16-bit values",
            bytes.len()
        )));
    }
    let n = bytes.len() / 2;
    Ok((0..n).map(|i| u16::from_le_bytes([bytes[i], bytes[n + i]])).collect())
}

/// Anchors interleaved (x, y, z per point), then residuals planar: every x,
/// then every y, then every z.
pub fn serialize_block_plaintext(block: &ResidualBlock) -> Vec<i32> {
    let mut out = Vec::with_capacity(3 * block.point_count());
    out.extend(block.anchors.iter().flatten());
    for axis in 0..3 {
        out.extend(block.residuals.iter().map(|r| r[axis]));
    }
    out
}

pub fn deserialize_block_plaintext(values: &[i32], point_count: usize, context_size: usize) -> Result<ResidualBlock> {
    if values.len() != 3 * point_count {
        return Err(Error::Corruption(format!("{} values cannot hold {point_count} points", values.len())));
    }
    let anchor_count = context_size.min(point_count);
    let (head, tail) = values.split_at(3 * anchor_count);
    let anchors = head.chunks_exact(3).map(|c| [c[0], c[1], c[2]]).collect();
    let m = point_count - anchor_count;
    let residuals = (0..m).map(|i| [tail[i], tail[m + i], tail[2 * m + i]]).collect();
    ResidualBlock::new(anchors, residuals, context_size)
}
