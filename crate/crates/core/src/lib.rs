//! Near-lossless, zero-drift compression for LiDAR point clouds.
//!
//! The pipeline snaps points to a fixed integer grid, orders them along a
//! Morton (Z-order) curve, predicts every point from the `k` points before it
//! and stores only the integer residuals. Residuals are byte-plane shuffled and
//! handed to a general purpose entropy coder (LZMA or Deflate). Because the
//! prediction runs on grid integers that the decoder reproduces exactly, the
//! only reconstruction error is the one-off grid snapping.
//!
//! ```
//! use lizip::{compress_cloud, decompress_cloud, synth_cloud, CodecConfig, PredictorModel, SynthKind};
//!
//! let cloud = synth_cloud(SynthKind::Plane, 2_000, 0.02, 7);
//! let model = PredictorModel::linear();
//! let config = CodecConfig::default();
//!
//! let packed = compress_cloud(&cloud, &config, &model)?;
//! let restored = decompress_cloud(&packed, &model)?;
//! assert_eq!(restored.len(), cloud.len());
//! # Ok::<(), lizip::Error>(())
//! ```

pub mod cli;
pub mod container;
pub mod entropy;
mod error;
pub mod geometry;
pub mod harness;
pub mod ingest;
pub mod morton;
pub mod predictor;
pub mod residual;

pub use container::{
    compress_cloud, decompress_cloud, decompress_quantized, inspect, CodecConfig, ContainerSummary, LizipHeader,
    TypeFlags,
};
pub use entropy::Backend;
pub use error::{Error, Result};
pub use geometry::{dequantize, max_reconstruction_error, quantize, PointCloud, QuantizedCloud};
pub use harness::{run_ablation, run_bench, AblationReport, BenchConfig, BenchRecord, Method};
pub use ingest::{read_frame, synth_cloud, write_frame, FrameFormat, FrameSpec, SynthKind};
pub use morton::{morton_encode, morton_sort, spread_bits, MortonCode};
pub use predictor::{Mlp, PredictionContext, PredictorModel};
pub use residual::{byte_shuffle, byte_unshuffle, decode_block, encode_block, ResidualBlock};
