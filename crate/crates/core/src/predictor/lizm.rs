//! LIZM weight files.
//!
//! | offset | size | field                                   |
//! |--------|------|-----------------------------------------|
//! | 0      | 4    | magic `LIZM`                            |
//! | 4      | 4    | format version (u32, currently 1)       |
//! | 8      | 4    | context size `k` (u32)                  |
//! | 12     | 4    | layer count `L` (u32)                   |
//! | 16     | 8·L  | per layer: `in_dim` u32, `out_dim` u32  |
//! | ...    |      | per layer: weights row-major f32, then bias f32 |
//!
//! Everything is little-endian. Layers appear in forward order.

use super::mlp::{DenseLayer, Mlp};
use crate::{Error, Result};

pub const LIZM_MAGIC: [u8; 4] = *b"LIZM";
pub const LIZM_VERSION: u32 = 1;

const MAX_LAYERS: u32 = 1024;

struct Reader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize, what: &str) -> Result<&'a [u8]> {
        let end = self.pos.checked_add(n).filter(|&end| end <= self.bytes.len());
        match end {
            Some(end) => {
                let out = &self.bytes[self.pos..end];
                self.pos = end;
                Ok(out)
            }
            None => Err(Error::Length(format!(
                "LIZM file ends at byte {} while reading {what} ({n} bytes at offset {})",
                self.bytes.len(),
                self.pos
            ))),
        }
    }

    fn u32(&mut self, what: &str) -> Result<u32> {
        let b = self.take(4, what)?;
        Ok(u32::from_le_bytes([b[0], b[1], b[2], b[3]]))
    }

    fn f32s(&mut self, count: usize, what: &str) -> Result<Vec<f32>> {
        let bytes = self.take(count * 4, what)?;
        Ok(bytes.chunks_exact(4).map(|b| f32::from_le_bytes([b[0], b[1], b[2], b[3]])).collect())
    }
}

pub fn load_lizm(bytes: &[u8]) -> Result<Mlp> {
    if bytes.len() < 4 || bytes[..4] != LIZM_MAGIC {
        return Err(Error::Format(format!("not a LIZM file (magic {:02X?})", &bytes[..bytes.len().min(4)])));
    }
    let mut reader = Reader { bytes, pos: 4 };
    let version = reader.u32("version")?;
    if version != LIZM_VERSION {
        return Err(Error::Format(format!("unsupported LIZM version {version}")));
    }
    let context_size = reader.u32("context size")? as usize;
    let layer_count = reader.u32("layer count")?;
    if layer_count == 0 || layer_count > MAX_LAYERS {
        return Err(Error::Format(format!("implausible layer count {layer_count}")));
    }

    let mut dims = Vec::with_capacity(layer_count as usize);
    let mut expected_floats = 0usize;
    for idx in 0..layer_count {
        let in_dim = reader.u32(&format!("layer {idx} input width"))? as usize;
        let out_dim = reader.u32(&format!("layer {idx} output width"))? as usize;
        expected_floats = in_dim
            .checked_mul(out_dim)
            .and_then(|w| w.checked_add(out_dim))
            .and_then(|n| n.checked_add(expected_floats))
            .ok_or_else(|| Error::Format(format!("layer {idx} is too large")))?;
        dims.push((in_dim, out_dim));
    }

    if let Some(idx) = dims.windows(2).position(|w| w[0].1 != w[1].0) {
        return Err(Error::Format(format!(
            "layer {idx} emits {} values but layer {} takes {}",
            dims[idx].1,
            idx + 1,
            dims[idx + 1].0
        )));
    }
    let remaining = bytes.len() - reader.pos;
    if expected_floats.checked_mul(4) != Some(remaining) {
        return Err(Error::Length(format!(
            "topology needs {expected_floats} parameters ({} bytes) but {remaining} bytes follow the header",
            expected_floats.saturating_mul(4)
        )));
    }

    let layers = dims
        .iter()
        .enumerate()
        .map(|(idx, &(in_dim, out_dim))| {
            let weights = reader.f32s(in_dim * out_dim, &format!("layer {idx} weights"))?;
            let bias = reader.f32s(out_dim, &format!("layer {idx} bias"))?;
            DenseLayer::new(in_dim, out_dim, weights, bias)
        })
        .collect::<Result<Vec<_>>>()?;

    Mlp::new(context_size, layers)
}

pub fn to_lizm_bytes(net: &Mlp) -> Vec<u8> {
    let layers = net.layers();
    let mut out = Vec::with_capacity(lizm_size(&net.topology()));
    out.extend_from_slice(&LIZM_MAGIC);
    out.extend_from_slice(&LIZM_VERSION.to_le_bytes());
    out.extend_from_slice(&(net.context_size() as u32).to_le_bytes());
    out.extend_from_slice(&(layers.len() as u32).to_le_bytes());
    for layer in layers {
        out.extend_from_slice(&(layer.in_dim() as u32).to_le_bytes());
        out.extend_from_slice(&(layer.out_dim() as u32).to_le_bytes());
    }
    for layer in layers {
        for v in layer.weights().iter().chain(layer.bias()) {
            out.extend_from_slice(&v.to_le_bytes());
        }
    }
    out
}

/// Size in bytes of a LIZM file for the given activation widths.
pub fn lizm_size(topology: &[usize]) -> usize {
    let layers = topology.len().saturating_sub(1);
    let params: usize = topology.windows(2).map(|w| w[0] * w[1] + w[1]).sum();
    16 + 8 * layers + 4 * params
}
