//! Frame files and synthetic point clouds.
//!
//! Raw frames are headerless little-endian `f32` records: `x y z intensity`
//! (`raw_f32x4`, 16 bytes) or `x y z intensity ring` (`raw_f32x5`, 20 bytes,
//! the ring channel is ignored on read and written as zero). ASCII frames hold
//! one `x y z [intensity]` line per point; blank lines and `#` comments are
//! skipped.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::geometry::PointCloud;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum FrameFormat {
    RawF32x4,
    RawF32x5,
    AsciiXyz,
}

impl FrameFormat {
    pub fn record_len(self) -> Option<usize> {
        match self {
            FrameFormat::RawF32x4 => Some(16),
            FrameFormat::RawF32x5 => Some(20),
            FrameFormat::AsciiXyz => None,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            FrameFormat::RawF32x4 => "raw_f32x4",
            FrameFormat::RawF32x5 => "raw_f32x5",
            FrameFormat::AsciiXyz => "ascii_xyz",
        }
    }

    /// Guesses from the extension: `.xyz`/`.txt`/`.asc` are ASCII, anything else
    /// is a 4-float raw record.
    pub fn from_path(path: &Path) -> Self {
        match path.extension().and_then(|e| e.to_str()).map(str::to_ascii_lowercase).as_deref() {
            Some("xyz" | "txt" | "asc") => FrameFormat::AsciiXyz,
            _ => FrameFormat::RawF32x4,
        }
    }
}

impl FromStr for FrameFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "raw_f32x4" => Ok(FrameFormat::RawF32x4),
            "raw_f32x5" => Ok(FrameFormat::RawF32x5),
            "ascii_xyz" => Ok(FrameFormat::AsciiXyz),
            other => Err(Error::Validation(format!(
                "unknown frame format `{other}` (expected raw_f32x4, raw_f32x5 or ascii_xyz)"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FrameSpec {
    pub format: FrameFormat,
    pub path: PathBuf,
    pub has_intensity: bool,
}

impl FrameSpec {
    pub fn new(format: FrameFormat, path: impl Into<PathBuf>, has_intensity: bool) -> Self {
        Self { format, path: path.into(), has_intensity }
    }

    /// Format from the file extension; raw frames carry intensity.
    pub fn infer(path: impl Into<PathBuf>) -> Self {
        let path = path.into();
        let format = FrameFormat::from_path(&path);
        Self { has_intensity: format != FrameFormat::AsciiXyz, format, path }
    }
}

pub fn read_frame(spec: &FrameSpec) -> Result<PointCloud> {
    let bytes = std::fs::read(&spec.path)?;
    parse_frame(&bytes, spec.format, spec.has_intensity)
}

pub fn write_frame(cloud: &PointCloud, spec: &FrameSpec) -> Result<()> {
    let bytes = encode_frame(cloud, spec.format, spec.has_intensity)?;
    std::fs::write(&spec.path, bytes)?;
    Ok(())
}

pub fn parse_frame(bytes: &[u8], format: FrameFormat, has_intensity: bool) -> Result<PointCloud> {
    let (points, intensity) = match format.record_len() {
        Some(record) => parse_raw(bytes, record)?,
        None => parse_ascii(bytes, has_intensity)?,
    };
    let intensity = if has_intensity { intensity.map(normalize_intensity) } else { None };
    PointCloud::new(points, intensity)
}

/// Sensors that report 0..255 are mapped onto [0, 1].
fn normalize_intensity(mut values: Vec<f32>) -> Vec<f32> {
    if values.iter().any(|&v| v > 1.0) {
        values.iter_mut().for_each(|v| *v /= 255.0);
    }
    values
}

type Columns = (Vec<[f32; 3]>, Option<Vec<f32>>);

fn parse_raw(bytes: &[u8], record: usize) -> Result<Columns> {
    if !bytes.len().is_multiple_of(record) {
        return Err(Error::Format(format!(
            "frame of {} bytes is not a whole number of {record}-byte records",
            bytes.len()
        )));
    }
    let f = |chunk: &[u8], i: usize| f32::from_le_bytes(chunk[4 * i..4 * i + 4].try_into().unwrap());
    let mut points = Vec::with_capacity(bytes.len() / record);
    let mut intensity = Vec::with_capacity(bytes.len() / record);
    for chunk in bytes.chunks_exact(record) {
        points.push([f(chunk, 0), f(chunk, 1), f(chunk, 2)]);
        intensity.push(f(chunk, 3));
    }
    Ok((points, Some(intensity)))
}

fn parse_ascii(bytes: &[u8], has_intensity: bool) -> Result<Columns> {
    let text = std::str::from_utf8(bytes).map_err(|e| Error::Format(format!("ASCII frame is not UTF-8: {e}")))?;
    let mut points = Vec::new();
    let mut intensity = has_intensity.then(Vec::new);
    for (idx, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let fields = line
            .split(|c: char| c.is_whitespace() || c == ',')
            .filter(|f| !f.is_empty())
            .map(f32::from_str)
            .collect::<std::result::Result<Vec<_>, _>>()
            .map_err(|e| Error::Format(format!("line {}: {e}: `{line}`", idx + 1)))?;
        let wanted = if has_intensity { 4..=4 } else { 3..=4 };
        if !wanted.contains(&fields.len()) {
            return Err(Error::Format(format!(
                "line {}: expected {} fields, found {}",
                idx + 1,
                if has_intensity { "4" } else { "3 or 4" },
                fields.len()
            )));
        }
        points.push([fields[0], fields[1], fields[2]]);
        if let Some(values) = intensity.as_mut() {
            values.push(fields[3]);
        }
    }
    Ok((points, intensity))
}

pub fn encode_frame(cloud: &PointCloud, format: FrameFormat, has_intensity: bool) -> Result<Vec<u8>> {
    if has_intensity && !cloud.has_intensity() {
        return Err(Error::Validation("intensity requested but the cloud has none".into()));
    }
    let intensity = cloud.intensity().filter(|_| has_intensity);
    let level = |i: usize| intensity.map_or(0.0, |v| v[i]);
    match format {
        FrameFormat::RawF32x4 | FrameFormat::RawF32x5 => {
            let record = format.record_len().unwrap();
            let mut out = Vec::with_capacity(cloud.len() * record);
            for (i, p) in cloud.points().iter().enumerate() {
                for v in [p[0], p[1], p[2], level(i)] {
                    out.extend_from_slice(&v.to_le_bytes());
                }
                if format == FrameFormat::RawF32x5 {
                    out.extend_from_slice(&0f32.to_le_bytes());
                }
            }
            Ok(out)
        }
        FrameFormat::AsciiXyz => {
            // `{}` on f32 prints the shortest string that parses back to the same value
            let mut out = String::with_capacity(cloud.len() * 32);
            for (i, p) in cloud.points().iter().enumerate() {
                match intensity {
                    Some(v) => writeln!(out, "{} {} {} {}", p[0], p[1], p[2], v[i]),
                    None => writeln!(out, "{} {} {}", p[0], p[1], p[2]),
                }
                .expect("writing to a String");
            }
            Ok(out.into_bytes())
        }
    }
}

/// Raw interleaved `f32` size of a cloud: 12 bytes per point, 16 with intensity.
pub fn raw_float_bytes(cloud: &PointCloud) -> Vec<u8> {
    let mut out = Vec::with_capacity(cloud.len() * 16);
    for (i, p) in cloud.points().iter().enumerate() {
        for v in p {
            out.extend_from_slice(&v.to_le_bytes());
        }
        if let Some(values) = cloud.intensity() {
            out.extend_from_slice(&values[i].to_le_bytes());
        }
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SynthKind {
    Plane,
    Sphere,
    Corridor,
    UniformRandom,
}

impl SynthKind {
    pub const ALL: [SynthKind; 4] =
        [SynthKind::Plane, SynthKind::Sphere, SynthKind::Corridor, SynthKind::UniformRandom];

    pub fn name(self) -> &'static str {
        match self {
            SynthKind::Plane => "plane",
            SynthKind::Sphere => "sphere",
            SynthKind::Corridor => "corridor",
            SynthKind::UniformRandom => "uniform_random",
        }
    }
}

impl FromStr for SynthKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        SynthKind::ALL
            .into_iter()
            .find(|k| k.name() == s || (s == "uniform" && *k == SynthKind::UniformRandom))
            .ok_or_else(|| Error::Validation(format!("unknown synthetic kind `{s}`")))
    }
}

/// Half the side of the square every generator stays inside (meters). Chosen
/// so the clouds fit the 21-bit Morton window even at 10^5 lines per meter.
pub const SYNTH_HALF_EXTENT: f32 = 8.0;

/// Tilted ground plane `z = PLANE[0]·x + PLANE[1]·y + PLANE[2]`.
pub const PLANE: [f64; 3] = [0.05, -0.03, -1.7];

const CORRIDOR_HALF_WIDTH: f64 = 2.0;
const CORRIDOR_HEIGHT: f64 = 3.0;

/// Deterministic synthetic clouds for tests and benchmarks.
///
/// `plane`, `sphere` and `corridor` sample smooth surfaces and add isotropic
/// Gaussian jitter of `noise_sigma` meters; `uniform_random` fills a cube and
/// serves as the incompressible control. Points come out in generation
/// order, not sorted.
pub fn synth_cloud(kind: SynthKind, n: usize, noise_sigma: f32, seed: u64) -> PointCloud {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let jitter = Normal::new(0.0f64, noise_sigma.max(0.0) as f64).expect("finite sigma");
    let half = SYNTH_HALF_EXTENT as f64;
    let mut points = Vec::with_capacity(n);
    for _ in 0..n {
        let p: [f64; 3] = match kind {
            SynthKind::Plane => {
                let x = rng.gen_range(-half..half) as f32 as f64;
                let y = rng.gen_range(-half..half) as f32 as f64;
                [x, y, PLANE[0] * x + PLANE[1] * y + PLANE[2]]
            }
            SynthKind::Sphere => {
                let radius = half * 0.95;
                let z: f64 = rng.gen_range(-1.0..1.0);
                let phi = rng.gen_range(0.0..std::f64::consts::TAU);
                let r = (1.0 - z * z).sqrt();
                [radius * r * phi.cos(), radius * r * phi.sin(), radius * z]
            }
            SynthKind::Corridor => {
                let x = rng.gen_range(-half..half);
                let floor = 2.0 * CORRIDOR_HALF_WIDTH;
                let pick = rng.gen_range(0.0..floor + 2.0 * CORRIDOR_HEIGHT);
                if pick < floor {
                    [x, pick - CORRIDOR_HALF_WIDTH, 0.0]
                } else {
                    let side = if pick < floor + CORRIDOR_HEIGHT { -1.0 } else { 1.0 };
                    [x, side * CORRIDOR_HALF_WIDTH, rng.gen_range(0.0..CORRIDOR_HEIGHT)]
                }
            }
            SynthKind::UniformRandom => std::array::from_fn(|_| rng.gen_range(-half..half)),
        };
        let noisy = if noise_sigma > 0.0 { p.map(|v| v + jitter.sample(&mut rng)) } else { p };
        points.push(noisy.map(|v| v as f32));
    }
    PointCloud::from_points(points).expect("generators produce finite points")
}

/// Attaches a smooth, deterministic intensity channel in [0, 1].
pub fn with_synthetic_intensity(cloud: PointCloud, seed: u64) -> PointCloud {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x1e7e_a5e5);
    let values = cloud
        .points()
        .iter()
        .map(|p| {
            let base = 0.5 + 0.4 * ((p[0] * 0.7).sin() * (p[1] * 0.3).cos());
            (base + rng.gen_range(-0.05f32..0.05)).clamp(0.0, 1.0)
        })
        .collect();
    let (points, _) = cloud.into_parts();
    PointCloud::new(points, Some(values)).expect("intensity matches point count")
}
