//! The LIZP container and the end-to-end codec.
//!
//! ```text
//! offset  size  field
//! 0       4     magic "LIZP" (4C 49 5A 50)
//! 4       1     compression flag (0x01 deflate/zlib, 0x02 lzma)
//! 5       3     reserved, zero
//! 8       4     total point count (u32)
//! 12      4     block count (u32)
//! 16      4     scale factor (f32, grid lines per meter)
//! 20      4     type flag (u32; bit 0 xyz, bit 1 intensity)
//! 24      ...   blocks
//! ```
//!
//! Each block is `compressed_length: u32, point_count: u32` followed by
//! `compressed_length` bytes of entropy-coded plaintext. All integers and the
//! scale are little-endian.
//!
//! The plaintext of a block holding `n` points is the byte-shuffled
//! serialization of its residual block (`12·n` bytes), followed, when the
//! intensity bit is set, by the byte-shuffled 16-bit intensity deltas along the
//! block (`2·n` bytes). Deltas wrap modulo 2^16 and the first one is relative
//! to zero.

use std::fmt;

use rayon::prelude::*;

use crate::entropy::{self, Backend};
use crate::geometry::{self, dequantize, quantize, PointCloud, QuantizedCloud};
use crate::morton::morton_sort;
use crate::predictor::PredictorModel;
use crate::residual::{
    byte_shuffle, byte_unshuffle, decode_block, deserialize_block_plaintext, encode_block, serialize_block_plaintext,
    shuffle_u16, unshuffle_u16, ResidualBlock, ShuffledStream,
};
use crate::{Error, Result};

pub const LIZP_MAGIC: [u8; 4] = *b"LIZP";
pub const HEADER_LEN: usize = 24;
pub const FRAME_LEN: usize = 8;
pub const DEFAULT_BLOCK_SIZE: usize = 16_384;
pub const DEFAULT_SCALE: f32 = 1e5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct TypeFlags(u32);

impl TypeFlags {
    pub const XYZ: u32 = 0x01;
    pub const INTENSITY: u32 = 0x02;

    pub fn new(intensity: bool) -> Self {
        TypeFlags(Self::XYZ | if intensity { Self::INTENSITY } else { 0 })
    }

    pub fn from_bits(bits: u32) -> Result<Self> {
        if bits & !(Self::XYZ | Self::INTENSITY) != 0 || bits & Self::XYZ == 0 {
            return Err(Error::Format(format!("unsupported type flag 0x{bits:08X}")));
        }
        Ok(TypeFlags(bits))
    }

    pub fn bits(self) -> u32 {
        self.0
    }

    pub fn has_intensity(self) -> bool {
        self.0 & Self::INTENSITY != 0
    }
}

/// The fixed 24-byte LIZP header.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LizipHeader {
    pub backend: Backend,
    pub total_points: u32,
    pub block_count: u32,
    pub scale: f32,
    pub type_flags: TypeFlags,
}

impl LizipHeader {
    pub fn to_bytes(&self) -> [u8; HEADER_LEN] {
        let mut out = [0u8; HEADER_LEN];
        out[0..4].copy_from_slice(&LIZP_MAGIC);
        out[4] = self.backend.flag();
        out[8..12].copy_from_slice(&self.total_points.to_le_bytes());
        out[12..16].copy_from_slice(&self.block_count.to_le_bytes());
        out[16..20].copy_from_slice(&self.scale.to_le_bytes());
        out[20..24].copy_from_slice(&self.type_flags.bits().to_le_bytes());
        out
    }

    pub fn parse(bytes: &[u8]) -> Result<Self> {
        if bytes.len() < 4 || bytes[..4] != LIZP_MAGIC {
            return Err(Error::Format(format!("not a LIZP file (magic {:02X?})", &bytes[..bytes.len().min(4)])));
        }
        if bytes.len() < HEADER_LEN {
            return Err(Error::Format(format!("LIZP header needs {HEADER_LEN} bytes, file has {}", bytes.len())));
        }
        let u32_at = |at: usize| u32::from_le_bytes([bytes[at], bytes[at + 1], bytes[at + 2], bytes[at + 3]]);
        let backend = Backend::from_flag(bytes[4])?;
        let scale = f32::from_le_bytes([bytes[16], bytes[17], bytes[18], bytes[19]]);
        geometry::check_scale(scale).map_err(|_| Error::Format(format!("invalid scale factor {scale}")))?;
        Ok(Self {
            backend,
            total_points: u32_at(8),
            block_count: u32_at(12),
            scale,
            type_flags: TypeFlags::from_bits(u32_at(20))?,
        })
    }
}

/// Codec settings shared by the encoder and the harness.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CodecConfig {
    pub scale: f32,
    pub backend: Backend,
    pub level: u32,
    pub block_size: usize,
}

impl Default for CodecConfig {
    fn default() -> Self {
        Self {
            scale: DEFAULT_SCALE,
            backend: Backend::preferred(),
            level: Backend::preferred().default_level(),
            block_size: DEFAULT_BLOCK_SIZE,
        }
    }
}

impl CodecConfig {
    pub fn with_backend(mut self, backend: Backend) -> Self {
        self.backend = backend;
        self.level = backend.default_level();
        self
    }

    pub fn with_scale(mut self, scale: f32) -> Self {
        self.scale = scale;
        self
    }

    pub fn with_block_size(mut self, block_size: usize) -> Self {
        self.block_size = block_size;
        self
    }
}

/// Which transform stages run; everything off but entropy coding reproduces the
/// "quantized integers only" baseline.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) struct Stages {
    pub prediction: bool,
    pub shuffle: bool,
}

impl Stages {
    pub const FULL: Stages = Stages { prediction: true, shuffle: true };
}

pub fn compress_cloud(cloud: &PointCloud, config: &CodecConfig, model: &PredictorModel) -> Result<Vec<u8>> {
    let sorted = prepare(cloud, config.scale)?;
    encode_sorted(&sorted, config, model, Stages::FULL)
}

/// Quantizes and Morton-sorts, the order the container stores points in.
pub(crate) fn prepare(cloud: &PointCloud, scale: f32) -> Result<QuantizedCloud> {
    let q = quantize(cloud, scale)?;
    Ok(morton_sort(&q)?.0)
}

pub(crate) fn encode_sorted(
    sorted: &QuantizedCloud,
    config: &CodecConfig,
    model: &PredictorModel,
    stages: Stages,
) -> Result<Vec<u8>> {
    config.backend.ensure_available()?;
    let k = model.context_size();
    if config.block_size < k {
        return Err(Error::Validation(format!(
            "block size {} is smaller than the predictor context ({k})",
            config.block_size
        )));
    }
    let total_points = u32::try_from(sorted.len())
        .map_err(|_| Error::Range(format!("{} points exceed the u32 point count", sorted.len())))?;

    let coords = sorted.coords();
    let intensity = sorted.intensity();
    let payloads = coords
        .par_chunks(config.block_size)
        .enumerate()
        .map(|(idx, chunk)| {
            let start = idx * config.block_size;
            let levels = intensity.map(|v| &v[start..start + chunk.len()]);
            encode_block_payload(chunk, levels, sorted.scale(), config, model, stages).map_err(|e| with_block(e, idx))
        })
        .collect::<Result<Vec<_>>>()?;

    let header = LizipHeader {
        backend: config.backend,
        total_points,
        block_count: payloads.len() as u32,
        scale: sorted.scale(),
        type_flags: TypeFlags::new(intensity.is_some()),
    };
    let body: usize = payloads.iter().map(|(_, p)| FRAME_LEN + p.len()).sum();
    let mut out = Vec::with_capacity(HEADER_LEN + body);
    out.extend_from_slice(&header.to_bytes());
    for (count, payload) in payloads {
        let len = u32::try_from(payload.len())
            .map_err(|_| Error::Range(format!("block payload of {} bytes", payload.len())))?;
        out.extend_from_slice(&len.to_le_bytes());
        out.extend_from_slice(&count.to_le_bytes());
        out.extend_from_slice(&payload);
    }
    Ok(out)
}

fn encode_block_payload(
    points: &[[i32; 3]],
    intensity: Option<&[u16]>,
    scale: f32,
    config: &CodecConfig,
    model: &PredictorModel,
    stages: Stages,
) -> Result<(u32, Vec<u8>)> {
    let block = if stages.prediction {
        encode_block(points, model, scale)?
    } else {
        let k = model.context_size().min(points.len());
        ResidualBlock::new(points[..k].to_vec(), points[k..].to_vec(), model.context_size())?
    };
    let values = serialize_block_plaintext(&block);
    let mut plain = if stages.shuffle {
        byte_shuffle(&values).into_bytes()
    } else {
        values.iter().flat_map(|v| v.to_le_bytes()).collect()
    };
    if let Some(levels) = intensity {
        let deltas = intensity_deltas(levels);
        if stages.shuffle {
            plain.extend(shuffle_u16(&deltas));
        } else {
            plain.extend(deltas.iter().flat_map(|v| v.to_le_bytes()));
        }
    }
    let packed = entropy::compress(config.backend, &plain, config.level)?;
    Ok((points.len() as u32, packed))
}

fn intensity_deltas(levels: &[u16]) -> Vec<u16> {
    let mut prev = 0u16;
    levels
        .iter()
        .map(|&v| {
            let d = v.wrapping_sub(prev);
            prev = v;
            d
        })
        .collect()
}

fn undo_intensity_deltas(deltas: &[u16]) -> Vec<u16> {
    let mut acc = 0u16;
    deltas
        .iter()
        .map(|&d| {
            acc = acc.wrapping_add(d);
            acc
        })
        .collect()
}

fn with_block(err: Error, idx: usize) -> Error {
    match err {
        Error::Validation(m) => Error::Validation(format!("block {idx}: {m}")),
        Error::Range(m) => Error::Range(format!("block {idx}: {m}")),
        Error::Corruption(m) => Error::Corruption(format!("block {idx}: {m}")),
        Error::Length(m) => Error::Length(format!("block {idx}: {m}")),
        Error::Format(m) => Error::Format(format!("block {idx}: {m}")),
        other => other,
    }
}

/// One block frame as found in a container.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BlockSummary {
    /// Offset of the block payload from the start of the file.
    pub offset: usize,
    pub compressed_len: u32,
    pub point_count: u32,
}

/// Header plus block table, read without decompressing anything.
#[derive(Debug, Clone, PartialEq)]
pub struct ContainerSummary {
    pub header: LizipHeader,
    pub blocks: Vec<BlockSummary>,
    pub file_len: usize,
}

impl fmt::Display for ContainerSummary {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let h = &self.header;
        writeln!(f, "magic        LIZP")?;
        writeln!(f, "compression  {} (0x{:02X})", h.backend, h.backend.flag())?;
        writeln!(f, "points       {}", h.total_points)?;
        writeln!(f, "blocks       {}", h.block_count)?;
        writeln!(f, "scale        {}", h.scale)?;
        let attrs = if h.type_flags.has_intensity() { "xyz, intensity" } else { "xyz" };
        writeln!(f, "type flag    0x{:02X} ({attrs})", h.type_flags.bits())?;
        writeln!(f, "file size    {} bytes", self.file_len)?;
        for (idx, b) in self.blocks.iter().enumerate() {
            writeln!(
                f,
                "block {idx:>5}  points {:>7}  bytes {:>9}  offset {}",
                b.point_count, b.compressed_len, b.offset
            )?;
        }
        Ok(())
    }
}

/// Parses the header and walks the block frames, checking that they tile the
/// file exactly and add up to the announced point count.
pub fn inspect(bytes: &[u8]) -> Result<ContainerSummary> {
    let header = LizipHeader::parse(bytes)?;
    let mut blocks = Vec::with_capacity(header.block_count.min(1 << 16) as usize);
    let mut pos = HEADER_LEN;
    let mut points = 0u64;
    for idx in 0..header.block_count {
        if bytes.len() - pos < FRAME_LEN {
            return Err(Error::Corruption(format!("block {idx}: frame truncated at byte {}", bytes.len())));
        }
        let compressed_len = u32::from_le_bytes(bytes[pos..pos + 4].try_into().unwrap());
        let point_count = u32::from_le_bytes(bytes[pos + 4..pos + 8].try_into().unwrap());
        let offset = pos + FRAME_LEN;
        if (bytes.len() - offset) < compressed_len as usize {
            return Err(Error::Corruption(format!(
                "block {idx}: payload of {compressed_len} bytes at offset {offset} runs past the end of the file ({} bytes)",
                bytes.len()
            )));
        }
        blocks.push(BlockSummary { offset, compressed_len, point_count });
        points += point_count as u64;
        pos = offset + compressed_len as usize;
    }
    if pos != bytes.len() {
        return Err(Error::Corruption(format!(
            "{} trailing bytes after the last block at offset {pos}",
            bytes.len() - pos
        )));
    }
    if points != header.total_points as u64 {
        return Err(Error::Corruption(format!(
            "blocks hold {points} points, header announces {}",
            header.total_points
        )));
    }
    Ok(ContainerSummary { header, blocks, file_len: bytes.len() })
}

/// Decodes to grid coordinates in Morton order.
pub fn decompress_quantized(bytes: &[u8], model: &PredictorModel) -> Result<QuantizedCloud> {
    let summary = inspect(bytes)?;
    let header = summary.header;
    header.backend.ensure_available()?;
    let with_intensity = header.type_flags.has_intensity();
    let k = model.context_size();

    let decoded = summary
        .blocks
        .par_iter()
        .enumerate()
        .map(|(idx, b)| {
            let payload = &bytes[b.offset..b.offset + b.compressed_len as usize];
            decode_block_payload(
                payload,
                b.point_count as usize,
                k,
                header.scale,
                header.backend,
                with_intensity,
                model,
            )
            .map_err(|e| with_block(e, idx))
        })
        .collect::<Result<Vec<_>>>()?;

    let mut coords = Vec::with_capacity(header.total_points as usize);
    let mut intensity = with_intensity.then(|| Vec::with_capacity(header.total_points as usize));
    for (points, levels) in decoded {
        coords.extend(points);
        if let (Some(all), Some(levels)) = (intensity.as_mut(), levels) {
            all.extend(levels);
        }
    }
    QuantizedCloud::new(coords, header.scale, intensity)
}

type DecodedBlock = (Vec<[i32; 3]>, Option<Vec<u16>>);

fn decode_block_payload(
    payload: &[u8],
    point_count: usize,
    k: usize,
    scale: f32,
    backend: Backend,
    with_intensity: bool,
    model: &PredictorModel,
) -> Result<DecodedBlock> {
    let plain = entropy::decompress(backend, payload)?;
    let xyz_len = 12 * point_count;
    let expected = xyz_len + if with_intensity { 2 * point_count } else { 0 };
    if plain.len() != expected {
        return Err(Error::Corruption(format!(
            "payload decodes to {} bytes, {point_count} points need {expected}",
            plain.len()
        )));
    }
    let (xyz, rest) = plain.split_at(xyz_len);
    let values = byte_unshuffle(&ShuffledStream::from_bytes(xyz.to_vec()))?;
    let block = deserialize_block_plaintext(&values, point_count, k)?;
    let points = decode_block(&block, model, scale)?;
    let levels = with_intensity.then(|| unshuffle_u16(rest).map(|d| undo_intensity_deltas(&d))).transpose()?;
    Ok((points, levels))
}

/// Full decode to metric coordinates, in Morton order.
pub fn decompress_cloud(bytes: &[u8], model: &PredictorModel) -> Result<PointCloud> {
    Ok(dequantize(&decompress_quantized(bytes, model)?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ingest::{synth_cloud, SynthKind};
    use crate::predictor::Mlp;

    fn small_cloud(n: usize) -> PointCloud {
        synth_cloud(SynthKind::Plane, n, 0.02, 5)
    }

    #[test]
    fn header_layout() {
        let header = LizipHeader {
            backend: Backend::Lzma,
            total_points: 0x0102_0304,
            block_count: 7,
            scale: 1e5,
            type_flags: TypeFlags::new(true),
        };
        let bytes = header.to_bytes();
        assert_eq!(&bytes[..8], &[0x4C, 0x49, 0x5A, 0x50, 0x02, 0, 0, 0]);
        assert_eq!(&bytes[8..12], &[4, 3, 2, 1]);
        assert_eq!(&bytes[16..20], &100_000f32.to_le_bytes());
        assert_eq!(&bytes[20..24], &[3, 0, 0, 0]);
        assert_eq!(LizipHeader::parse(&bytes).unwrap(), header);
    }

    #[test]
    fn header_rejects_garbage() {
        let good = LizipHeader {
            backend: Backend::Deflate,
            total_points: 0,
            block_count: 0,
            scale: 1.0,
            type_flags: TypeFlags::new(false),
        }
        .to_bytes();
        let mut bad = good;
        bad[..4].copy_from_slice(b"XXXX");
        assert!(matches!(LizipHeader::parse(&bad), Err(Error::Format(_))));
        let mut bad = good;
        bad[4] = 0x07;
        assert!(matches!(LizipHeader::parse(&bad), Err(Error::Format(_))));
        let mut bad = good;
        bad[20] = 0x04 | 0x01;
        assert!(matches!(LizipHeader::parse(&bad), Err(Error::Format(_))));
        let mut bad = good;
        bad[16..20].copy_from_slice(&(-1.0f32).to_le_bytes());
        assert!(matches!(LizipHeader::parse(&bad), Err(Error::Format(_))));
        assert!(matches!(LizipHeader::parse(&good[..20]), Err(Error::Format(_))));
    }

    #[test]
    fn empty_cloud_is_a_bare_header() {
        let packed =
            compress_cloud(&PointCloud::default(), &CodecConfig::default(), &PredictorModel::linear()).unwrap();
        assert_eq!(packed.len(), HEADER_LEN);
        let h = LizipHeader::parse(&packed).unwrap();
        assert_eq!((h.total_points, h.block_count), (0, 0));
        assert!(decompress_cloud(&packed, &PredictorModel::linear()).unwrap().is_empty());
    }

    #[test]
    fn round_trip_matches_sorted_grid() {
        let cloud = small_cloud(3000);
        let mlp = PredictorModel::Mlp(Mlp::seeded(3, 16, 3, 8).unwrap());
        for model in [PredictorModel::linear(), mlp] {
            for backend in Backend::ALL.into_iter().filter(|b| b.is_available()) {
                let config = CodecConfig::default().with_backend(backend).with_block_size(700);
                let packed = compress_cloud(&cloud, &config, &model).unwrap();
                let expected = prepare(&cloud, config.scale).unwrap();
                assert_eq!(decompress_quantized(&packed, &model).unwrap(), expected);
            }
        }
    }

    #[test]
    fn intensity_survives() {
        let base = small_cloud(1000);
        let levels: Vec<f32> = (0..base.len()).map(|i| (i % 97) as f32 / 96.0).collect();
        let cloud = PointCloud::new(base.points().to_vec(), Some(levels)).unwrap();
        let config = CodecConfig::default().with_block_size(256);
        let packed = compress_cloud(&cloud, &config, &PredictorModel::linear()).unwrap();
        assert!(LizipHeader::parse(&packed).unwrap().type_flags.has_intensity());
        assert_eq!(
            decompress_quantized(&packed, &PredictorModel::linear()).unwrap(),
            prepare(&cloud, config.scale).unwrap()
        );
    }

    #[test]
    fn block_count_is_ceiling_division() {
        let cloud = synth_cloud(SynthKind::UniformRandom, 100_000, 0.0, 1);
        let config = CodecConfig::default().with_scale(1e3);
        let packed = compress_cloud(&cloud, &config, &PredictorModel::linear()).unwrap();
        let summary = inspect(&packed).unwrap();
        assert_eq!(summary.header.block_count, 7);
        assert_eq!(summary.blocks.iter().map(|b| b.point_count).sum::<u32>(), 100_000);
        assert_eq!(summary.blocks.last().unwrap().point_count, 100_000 - 6 * 16_384);
        assert_eq!(summary.header.scale, 1000.0);
    }

    #[test]
    fn damage_is_detected() {
        let cloud = small_cloud(2000);
        let config = CodecConfig::default().with_block_size(500);
        let model = PredictorModel::linear();
        let packed = compress_cloud(&cloud, &config, &model).unwrap();

        let err = decompress_cloud(&packed[..packed.len() - 10], &model).unwrap_err();
        assert!(matches!(err, Error::Corruption(ref m) if m.contains("block 3")), "{err}");

        let mut longer = packed.clone();
        longer.extend_from_slice(b"junk");
        assert!(matches!(decompress_cloud(&longer, &model), Err(Error::Corruption(_))));

        let mut miscounted = packed.clone();
        miscounted[8..12].copy_from_slice(&1999u32.to_le_bytes());
        assert!(matches!(decompress_cloud(&miscounted, &model), Err(Error::Corruption(_))));

        let mut fewer_blocks = packed.clone();
        fewer_blocks[12..16].copy_from_slice(&3u32.to_le_bytes());
        assert!(matches!(decompress_cloud(&fewer_blocks, &model), Err(Error::Corruption(_))));

        // a wrong per-block point count survives framing but not decoding
        let mut frame = packed.clone();
        let first_count = HEADER_LEN + 4;
        frame[first_count..first_count + 4].copy_from_slice(&499u32.to_le_bytes());
        let second = inspect(&packed).unwrap().blocks[1];
        let second_count = second.offset - 4;
        frame[second_count..second_count + 4].copy_from_slice(&501u32.to_le_bytes());
        let err = decompress_cloud(&frame, &model).unwrap_err();
        assert!(matches!(err, Error::Corruption(ref m) if m.contains("block 0") || m.contains("block 1")), "{err}");

        let mut flipped = packed;
        let last = flipped.len() - 20;
        flipped[last] ^= 0x55;
        assert!(decompress_cloud(&flipped, &model).is_err());
    }

    #[test]
    fn block_size_below_context_is_rejected() {
        let config = CodecConfig::default().with_block_size(2);
        let err = compress_cloud(&small_cloud(10), &config, &PredictorModel::linear()).unwrap_err();
        assert!(matches!(err, Error::Validation(_)));
    }

    #[test]
    fn range_errors_name_the_point() {
        let cloud = PointCloud::from_points(vec![[0.0; 3], [0.0, 0.0, 25.0]]).unwrap();
        let err = compress_cloud(&cloud, &CodecConfig::default(), &PredictorModel::linear()).unwrap_err();
        assert!(matches!(err, Error::Range(ref m) if m.contains("point 1")), "{err}");
    }

    #[test]
    fn encoding_is_deterministic() {
        let cloud = small_cloud(5000);
        let config = CodecConfig::default().with_block_size(1000);
        let a = compress_cloud(&cloud, &config, &PredictorModel::linear()).unwrap();
        let b = compress_cloud(&cloud, &config, &PredictorModel::linear()).unwrap();
        assert_eq!(a, b);
    }

    #[cfg(feature = "deflate")]
    #[test]
    fn summary_display_names_backend() {
        let packed = compress_cloud(
            &small_cloud(10),
            &CodecConfig::default().with_backend(Backend::Deflate),
            &PredictorModel::linear(),
        )
        .unwrap();
        let text = inspect(&packed).unwrap().to_string();
        assert!(text.contains("LIZP") && text.contains("deflate (0x01)"), "{text}");
    }
}
