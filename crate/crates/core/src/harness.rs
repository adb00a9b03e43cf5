//! Benchmark and ablation engine.
//!
//! Every compression is decoded and checked before its record is emitted.
//! Timings cover codec compute only; frames are read before the clock starts.

use std::fmt;
use std::io::Write;
use std::time::Instant;

use rayon::prelude::*;
use serde::Serialize;

use crate::container::{self, CodecConfig, Stages};
use crate::entropy::{self, Backend};
use crate::geometry::{max_reconstruction_error, PointCloud};
use crate::ingest::{raw_float_bytes, read_frame, FrameSpec};
use crate::morton::morton_sort;
use crate::predictor::PredictorModel;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum Method {
    #[serde(rename = "lizip-lzma")]
    LizipLzma,
    #[serde(rename = "lizip-deflate")]
    LizipDeflate,
    /// Deflate over the raw interleaved float bytes.
    #[serde(rename = "gzip-raw")]
    GzipRaw,
}

impl Method {
    pub const ALL: [Method; 3] = [Method::LizipLzma, Method::LizipDeflate, Method::GzipRaw];

    /// Entropy backend the method depends on.
    pub fn backend(self) -> Backend {
        match self {
            Method::LizipLzma => Backend::Lzma,
            Method::LizipDeflate | Method::GzipRaw => Backend::Deflate,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Method::LizipLzma => "lizip-lzma",
            Method::LizipDeflate => "lizip-deflate",
            Method::GzipRaw => "gzip-raw",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BenchRecord {
    pub frame: String,
    pub method: Method,
    pub encode_ms: f64,
    pub decode_ms: f64,
    pub compressed_bytes: usize,
    pub original_bytes: usize,
    pub ratio: f64,
    pub max_error_mm: f64,
}

#[derive(Debug, Clone)]
pub struct BenchConfig {
    /// Scale, block size and levels; the backend is chosen per method.
    pub codec: CodecConfig,
    pub model: PredictorModel,
    /// Benchmark frames concurrently. Timings then include contention.
    pub parallel: bool,
}

impl Default for BenchConfig {
    fn default() -> Self {
        Self { codec: CodecConfig::default(), model: PredictorModel::linear(), parallel: false }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Stat {
    pub mean: f64,
    pub stddev: f64,
}

impl Stat {
    fn of(values: impl Iterator<Item = f64> + Clone) -> Self {
        let n = values.clone().count();
        if n == 0 {
            return Stat { mean: 0.0, stddev: 0.0 };
        }
        let mean = values.clone().sum::<f64>() / n as f64;
        let var = values.map(|v| (v - mean).powi(2)).sum::<f64>() / n as f64;
        Stat { mean, stddev: var.sqrt() }
    }
}

impl fmt::Display for Stat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:.3} ± {:.3}", self.mean, self.stddev)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MethodSummary {
    pub method: Method,
    pub frames: usize,
    pub encode_ms: Stat,
    pub decode_ms: Stat,
    pub compressed_bytes: Stat,
    pub ratio: Stat,
    pub max_error_mm: f64,
    /// Running total of compressed bytes after each frame, in frame order.
    pub cumulative_bytes: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BenchReport {
    pub records: Vec<BenchRecord>,
    pub summaries: Vec<MethodSummary>,
}

impl BenchReport {
    fn from_records(records: Vec<BenchRecord>) -> Self {
        let summaries = Method::ALL
            .into_iter()
            .filter_map(|method| {
                let rows: Vec<&BenchRecord> = records.iter().filter(|r| r.method == method).collect();
                if rows.is_empty() {
                    return None;
                }
                let cumulative_bytes = rows
                    .iter()
                    .scan(0usize, |acc, r| {
                        *acc += r.compressed_bytes;
                        Some(*acc)
                    })
                    .collect();
                Some(MethodSummary {
                    method,
                    frames: rows.len(),
                    encode_ms: Stat::of(rows.iter().map(|r| r.encode_ms)),
                    decode_ms: Stat::of(rows.iter().map(|r| r.decode_ms)),
                    compressed_bytes: Stat::of(rows.iter().map(|r| r.compressed_bytes as f64)),
                    ratio: Stat::of(rows.iter().map(|r| r.ratio)),
                    max_error_mm: rows.iter().map(|r| r.max_error_mm).fold(0.0, f64::max),
                    cumulative_bytes,
                })
            })
            .collect();
        Self { records, summaries }
    }

    pub fn summary(&self, method: Method) -> Option<&MethodSummary> {
        self.summaries.iter().find(|s| s.method == method)
    }

    /// One JSON object per record, newline separated.
    pub fn write_json_lines(&self, mut out: impl Write) -> Result<()> {
        for record in &self.records {
            serde_json::to_writer(&mut out, record).map_err(std::io::Error::from)?;
            out.write_all(b"\n")?;
        }
        Ok(())
    }
}

impl fmt::Display for BenchReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(
            f,
            "{:<14} {:>6} {:>22} {:>22} {:>24} {:>18} {:>10}",
            "method", "frames", "encode ms", "decode ms", "size bytes", "ratio", "max mm"
        )?;
        for s in &self.summaries {
            writeln!(
                f,
                "{:<14} {:>6} {:>22} {:>22} {:>24} {:>18} {:>10.4}",
                s.method.name(),
                s.frames,
                s.encode_ms.to_string(),
                s.decode_ms.to_string(),
                format!("{:.0} ± {:.0}", s.compressed_bytes.mean, s.compressed_bytes.stddev),
                s.ratio.to_string(),
                s.max_error_mm
            )?;
        }
        Ok(())
    }
}

pub fn run_bench(frames: &[FrameSpec], config: &BenchConfig) -> Result<BenchReport> {
    let clouds = frames
        .iter()
        .map(|spec| Ok((spec.path.display().to_string(), read_frame(spec)?)))
        .collect::<Result<Vec<_>>>()?;
    run_bench_clouds(&clouds, config)
}

/// Same as [`run_bench`] on clouds already in memory.
pub fn run_bench_clouds(frames: &[(String, PointCloud)], config: &BenchConfig) -> Result<BenchReport> {
    let bench_one = |(name, cloud): &(String, PointCloud)| -> Result<Vec<BenchRecord>> {
        Method::ALL
            .into_iter()
            .filter(|m| m.backend().is_available())
            .map(|method| bench_frame(name, cloud, method, config))
            .collect()
    };
    let per_frame = if config.parallel {
        frames.par_iter().map(bench_one).collect::<Result<Vec<_>>>()?
    } else {
        frames.iter().map(bench_one).collect::<Result<Vec<_>>>()?
    };
    Ok(BenchReport::from_records(per_frame.into_iter().flatten().collect()))
}

fn bench_frame(name: &str, cloud: &PointCloud, method: Method, config: &BenchConfig) -> Result<BenchRecord> {
    let raw = raw_float_bytes(cloud);
    let (encode_ms, decode_ms, compressed_bytes, max_error_mm) = match method {
        Method::GzipRaw => {
            let level = Backend::Deflate.default_level();
            let t = Instant::now();
            let packed = entropy::compress(Backend::Deflate, &raw, level)?;
            let encode_ms = ms(t);
            let t = Instant::now();
            let back = entropy::decompress(Backend::Deflate, &packed)?;
            let decode_ms = ms(t);
            if back != raw {
                return Err(Error::Verification(format!("{name}: gzip-raw did not reproduce the frame")));
            }
            (encode_ms, decode_ms, packed.len(), 0.0)
        }
        Method::LizipLzma | Method::LizipDeflate => {
            let backend = method.backend();
            let codec = CodecConfig {
                backend,
                level: if backend == config.codec.backend { config.codec.level } else { backend.default_level() },
                ..config.codec
            };
            let t = Instant::now();
            let packed = container::compress_cloud(cloud, &codec, &config.model)?;
            let encode_ms = ms(t);
            let t = Instant::now();
            let decoded = container::decompress_quantized(&packed, &config.model)?;
            let decode_ms = ms(t);

            // Reference ordering recomputed outside the timed region.
            let (expected, order) = morton_sort(&crate::geometry::quantize(cloud, codec.scale)?)?;
            if decoded != expected {
                return Err(Error::Verification(format!("{name}: {method} did not reproduce the quantized cloud")));
            }
            let restored = crate::geometry::dequantize(&decoded);
            let err = max_reconstruction_error(&cloud.permuted(&order), &restored)?;
            (encode_ms, decode_ms, packed.len(), err)
        }
    };
    Ok(BenchRecord {
        frame: name.to_string(),
        method,
        encode_ms,
        decode_ms,
        compressed_bytes,
        original_bytes: raw.len(),
        ratio: raw.len() as f64 / compressed_bytes.max(1) as f64,
        max_error_mm,
    })
}

fn ms(start: Instant) -> f64 {
    start.elapsed().as_secs_f64() * 1000.0
}

/// Container sizes with one stage added at a time.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct AblationReport {
    /// Entropy coder over the raw interleaved floats.
    pub raw_floats: usize,
    /// Morton-sorted grid integers, entropy coded as they are.
    pub quantized_entropy_only: usize,
    /// Residuals against the predictor instead of coordinates.
    pub plus_prediction: usize,
    /// Residual bytes regrouped into planes before entropy coding.
    pub plus_shuffle: usize,
}

impl AblationReport {
    pub fn stages(&self) -> [(&'static str, usize); 4] {
        [
            ("raw floats", self.raw_floats),
            ("quantized integers", self.quantized_entropy_only),
            ("+ prediction", self.plus_prediction),
            ("+ byte shuffle", self.plus_shuffle),
        ]
    }
}

impl fmt::Display for AblationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let stages = self.stages();
        for (idx, (label, size)) in stages.iter().enumerate() {
            write!(f, "{label:<20} {:>10.1} KB", *size as f64 / 1000.0)?;
            if idx > 0 {
                let prev = stages[idx - 1].1 as f64;
                write!(f, "  ({:+.1}%)", 100.0 * (*size as f64 - prev) / prev)?;
            }
            writeln!(f)?;
        }
        Ok(())
    }
}

pub fn run_ablation(frame: &FrameSpec, config: &BenchConfig) -> Result<AblationReport> {
    run_ablation_cloud(&read_frame(frame)?, config)
}

pub fn run_ablation_cloud(cloud: &PointCloud, config: &BenchConfig) -> Result<AblationReport> {
    let codec = &config.codec;
    let raw_floats = entropy::compress(codec.backend, &raw_float_bytes(cloud), codec.level)?.len();
    let sorted = container::prepare(cloud, codec.scale)?;
    let size = |prediction, shuffle| {
        container::encode_sorted(&sorted, codec, &config.model, Stages { prediction, shuffle }).map(|b| b.len())
    };
    Ok(AblationReport {
        raw_floats,
        quantized_entropy_only: size(false, false)?,
        plus_prediction: size(true, false)?,
        plus_shuffle: size(true, true)?,
    })
}
