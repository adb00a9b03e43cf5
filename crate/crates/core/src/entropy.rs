//! Lossless byte-stream backends.
//!
//! * `Deflate` writes a zlib stream (2-byte header, deflate data, Adler-32).
//! * `Lzma` writes a classic `.lzma` ("LZMA alone") stream: 13-byte header
//!   (properties, dictionary size, unknown uncompressed size) followed by
//!   LZMA data terminated by an end-of-payload marker. `xz --format=lzma -d`
//!   decodes it.
//!
//! Both are self-delimiting; decoders reject truncation and trailing bytes.

use std::fmt;
use std::str::FromStr;

use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Backend {
    Deflate = 0x01,
    Lzma = 0x02,
}

impl Backend {
    pub const ALL: [Backend; 2] = [Backend::Deflate, Backend::Lzma];

    /// Value of the container's compression flag byte.
    pub fn flag(self) -> u8 {
        self as u8
    }

    pub fn from_flag(flag: u8) -> Result<Self> {
        match flag {
            0x01 => Ok(Backend::Deflate),
            0x02 => Ok(Backend::Lzma),
            other => Err(Error::Format(format!("unknown compression flag 0x{other:02X}"))),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Backend::Deflate => "deflate",
            Backend::Lzma => "lzma",
        }
    }

    pub fn default_level(self) -> u32 {
        6
    }

    pub fn max_level(self) -> u32 {
        9
    }

    /// LZMA when compiled in, otherwise Deflate.
    pub fn preferred() -> Self {
        if Backend::Lzma.is_available() {
            Backend::Lzma
        } else {
            Backend::Deflate
        }
    }

    pub fn is_available(self) -> bool {
        match self {
            Backend::Deflate => cfg!(feature = "deflate"),
            Backend::Lzma => cfg!(feature = "lzma"),
        }
    }

    /// Fails when this build was compiled without the backend.
    pub fn ensure_available(self) -> Result<()> {
        if self.is_available() {
            Ok(())
        } else {
            Err(Error::Capability(self.name()))
        }
    }

    fn check_level(self, level: u32) -> Result<()> {
        if level > self.max_level() {
            return Err(Error::Validation(format!(
                "{} level must be 0..={}, got {level}",
                self.name(),
                self.max_level()
            )));
        }
        Ok(())
    }
}

impl fmt::Display for Backend {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Backend {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "deflate" | "zlib" => Ok(Backend::Deflate),
            "lzma" => Ok(Backend::Lzma),
            other => Err(Error::Validation(format!("unknown backend `{other}`"))),
        }
    }
}

pub fn compress(backend: Backend, plain: &[u8], level: u32) -> Result<Vec<u8>> {
    backend.ensure_available()?;
    backend.check_level(level)?;
    match backend {
        Backend::Deflate => deflate::compress(plain, level),
        Backend::Lzma => lzma::compress(plain, level),
    }
}

pub fn decompress(backend: Backend, packed: &[u8]) -> Result<Vec<u8>> {
    backend.ensure_available()?;
    match backend {
        Backend::Deflate => deflate::decompress(packed),
        Backend::Lzma => lzma::decompress(packed),
    }
}

#[cfg(feature = "deflate")]
mod deflate {
    use flate2::{Compress, Compression, Decompress, FlushCompress, FlushDecompress, Status};

    use crate::{Error, Result};

    pub(super) fn compress(plain: &[u8], level: u32) -> Result<Vec<u8>> {
        let mut engine = Compress::new(Compression::new(level), true);
        let mut out = Vec::with_capacity(plain.len() / 2 + 64);
        loop {
            let consumed = engine.total_in() as usize;
            let status = engine
                .compress_vec(&plain[consumed..], &mut out, FlushCompress::Finish)
                .map_err(|e| Error::Corruption(format!("deflate encoder: {e}")))?;
            match status {
                Status::StreamEnd => return Ok(out),
                _ => out.reserve(out.capacity().max(4096)),
            }
        }
    }

    pub(super) fn decompress(packed: &[u8]) -> Result<Vec<u8>> {
        let mut engine = Decompress::new(true);
        let mut out = Vec::with_capacity(packed.len() * 4 + 64);
        loop {
            let consumed = engine.total_in() as usize;
            let produced = engine.total_out();
            let status = engine
                .decompress_vec(&packed[consumed..], &mut out, FlushDecompress::None)
                .map_err(|e| Error::Corruption(format!("zlib stream invalid at byte {}: {e}", engine.total_in())))?;
            match status {
                Status::StreamEnd => break,
                _ if out.len() == out.capacity() => out.reserve(out.capacity().max(4096)),
                _ if engine.total_in() as usize == consumed && engine.total_out() == produced => {
                    return Err(Error::Corruption(format!("zlib stream truncated at byte {}", packed.len())));
                }
                _ => {}
            }
        }
        let end = engine.total_in() as usize;
        if end != packed.len() {
            return Err(Error::Corruption(format!(
                "{} trailing bytes after zlib stream end at byte {end}",
                packed.len() - end
            )));
        }
        Ok(out)
    }
}

#[cfg(not(feature = "deflate"))]
mod deflate {
    use crate::{Error, Result};

    pub(super) fn compress(_: &[u8], _: u32) -> Result<Vec<u8>> {
        Err(Error::Capability("deflate"))
    }

    pub(super) fn decompress(_: &[u8]) -> Result<Vec<u8>> {
        Err(Error::Capability("deflate"))
    }
}

#[cfg(feature = "lzma")]
mod lzma {
    use xz2::stream::{Action, LzmaOptions, Status, Stream};

    use crate::{Error, Result};

    const MIN_DICT: u32 = 4096;

    pub(super) fn compress(plain: &[u8], level: u32) -> Result<Vec<u8>> {
        let mut options =
            LzmaOptions::new_preset(level).map_err(|e| Error::Validation(format!("lzma preset {level}: {e}")))?;
        // A dictionary larger than the input buys nothing but encoder memory.
        let preset_dict = dict_size_for_preset(level);
        let fitted = (plain.len().max(1) as u64).next_power_of_two().max(MIN_DICT as u64);
        options.dict_size(fitted.min(preset_dict as u64) as u32);
        let mut stream =
            Stream::new_lzma_encoder(&options).map_err(|e| Error::Corruption(format!("lzma encoder: {e}")))?;

        let mut out = Vec::with_capacity(plain.len() / 2 + 64);
        loop {
            let consumed = stream.total_in() as usize;
            let status = stream
                .process_vec(&plain[consumed..], &mut out, Action::Finish)
                .map_err(|e| Error::Corruption(format!("lzma encoder: {e}")))?;
            match status {
                Status::StreamEnd => return Ok(out),
                _ => out.reserve(out.capacity().max(4096)),
            }
        }
    }

    fn dict_size_for_preset(level: u32) -> u32 {
        // liblzma presets 0..=9
        const SIZES: [u32; 10] =
            [1 << 18, 1 << 20, 1 << 21, 1 << 22, 1 << 22, 1 << 23, 1 << 23, 1 << 24, 1 << 25, 1 << 26];
        SIZES[level as usize]
    }

    pub(super) fn decompress(packed: &[u8]) -> Result<Vec<u8>> {
        let mut stream =
            Stream::new_lzma_decoder(u64::MAX).map_err(|e| Error::Corruption(format!("lzma decoder: {e}")))?;
        let mut out = Vec::with_capacity(packed.len() * 4 + 64);
        loop {
            let consumed = stream.total_in() as usize;
            let produced = stream.total_out();
            let status = stream
                .process_vec(&packed[consumed..], &mut out, Action::Finish)
                .map_err(|e| Error::Corruption(format!("lzma stream invalid at byte {}: {e}", stream.total_in())))?;
            match status {
                Status::StreamEnd => break,
                _ if out.len() == out.capacity() => out.reserve(out.capacity().max(4096)),
                _ if stream.total_in() as usize == consumed && stream.total_out() == produced => {
                    return Err(Error::Corruption(format!("lzma stream truncated at byte {}", packed.len())));
                }
                _ => {}
            }
        }
        let end = stream.total_in() as usize;
        if end != packed.len() {
            return Err(Error::Corruption(format!(
                "{} trailing bytes after lzma stream end at byte {end}",
                packed.len() - end
            )));
        }
        Ok(out)
    }
}

#[cfg(not(feature = "lzma"))]
mod lzma {
    use crate::{Error, Result};

    pub(super) fn compress(_: &[u8], _: u32) -> Result<Vec<u8>> {
        Err(Error::Capability("lzma"))
    }

    pub(super) fn decompress(_: &[u8]) -> Result<Vec<u8>> {
        Err(Error::Capability("lzma"))
    }
}
