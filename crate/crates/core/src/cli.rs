//! `lizip` command line.
//!
//! Exit codes: 0 on success, 1 when the codec fails, 2 on usage errors
//! (unknown flags, missing input files).

use std::ffi::OsString;
use std::fs::File;
use std::io::BufWriter;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use crate::container::{self, CodecConfig, DEFAULT_BLOCK_SIZE, DEFAULT_SCALE};
use crate::entropy::Backend;
use crate::harness::{self, BenchConfig};
use crate::ingest::{self, FrameFormat, FrameSpec, SynthKind};
use crate::predictor::PredictorModel;
use crate::Error;

#[derive(Debug, Parser)]
#[command(name = "lizip", version, about = "Near-lossless LiDAR point cloud compression")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Compress a frame into a LIZP container.
    Compress {
        input: PathBuf,
        output: PathBuf,
        #[command(flatten)]
        codec: CodecArgs,
        #[command(flatten)]
        frame: FrameArgs,
    },
    /// Decompress a LIZP container into a frame (points come out in Morton order).
    Decompress {
        input: PathBuf,
        output: PathBuf,
        #[command(flatten)]
        model: ModelArgs,
        #[command(flatten)]
        frame: FrameArgs,
    },
    /// Print header fields and the block table without decompressing.
    Inspect { file: PathBuf },
    /// Benchmark every frame in a directory against the gzip baseline.
    Bench {
        dir: PathBuf,
        /// Write one JSON record per line to this file.
        #[arg(long)]
        report: Option<PathBuf>,
        /// Benchmark frames concurrently (timings include contention).
        #[arg(long)]
        parallel: bool,
        #[command(flatten)]
        codec: CodecArgs,
        #[command(flatten)]
        frame: FrameArgs,
    },
    /// Report the container size after each pipeline stage.
    Ablate {
        file: PathBuf,
        #[command(flatten)]
        codec: CodecArgs,
        #[command(flatten)]
        frame: FrameArgs,
    },
    /// Write a deterministic synthetic frame.
    Synth {
        output: PathBuf,
        #[arg(long, default_value = "plane")]
        kind: String,
        #[arg(long, default_value_t = 34_000)]
        n: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Gaussian jitter in meters.
        #[arg(long, default_value_t = 0.02)]
        noise: f32,
        #[command(flatten)]
        frame: FrameArgs,
    },
}

#[derive(Debug, Args)]
struct ModelArgs {
    /// LIZM weight file; the linear extrapolator is used when absent.
    #[arg(long)]
    model: Option<PathBuf>,
}

impl ModelArgs {
    fn load(&self) -> Result<PredictorModel, Failure> {
        match &self.model {
            Some(path) => {
                require_file(path)?;
                Ok(PredictorModel::load(path)?)
            }
            None => Ok(PredictorModel::linear()),
        }
    }
}

#[derive(Debug, Args)]
struct CodecArgs {
    /// Grid lines per meter.
    #[arg(long, default_value_t = DEFAULT_SCALE)]
    scale: f32,
    /// lzma or deflate; lzma when compiled in.
    #[arg(long)]
    backend: Option<String>,
    /// Entropy coder level (0-9).
    #[arg(long)]
    level: Option<u32>,
    #[arg(long, default_value_t = DEFAULT_BLOCK_SIZE)]
    block_size: usize,
    #[command(flatten)]
    model: ModelArgs,
}

impl CodecArgs {
    fn config(&self) -> Result<CodecConfig, Failure> {
        let backend = match &self.backend {
            Some(name) => name.parse().map_err(|e: Error| Failure::Usage(e.to_string()))?,
            None => Backend::preferred(),
        };
        Ok(CodecConfig {
            scale: self.scale,
            backend,
            level: self.level.unwrap_or(backend.default_level()),
            block_size: self.block_size,
        })
    }
}

#[derive(Debug, Args)]
struct FrameArgs {
    /// raw_f32x4, raw_f32x5 or ascii_xyz; guessed from the extension by default.
    #[arg(long)]
    format: Option<String>,
    /// Drop the intensity channel.
    #[arg(long)]
    no_intensity: bool,
}

impl FrameArgs {
    fn spec(&self, path: &Path) -> Result<FrameSpec, Failure> {
        let mut spec = FrameSpec::infer(path);
        if let Some(name) = &self.format {
            spec.format = name.parse().map_err(|e: Error| Failure::Usage(e.to_string()))?;
            spec.has_intensity = spec.format != FrameFormat::AsciiXyz;
        }
        if self.no_intensity {
            spec.has_intensity = false;
        }
        Ok(spec)
    }
}

enum Failure {
    Usage(String),
    Codec(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Codec(e)
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Codec(e.into())
    }
}

fn require_file(path: &Path) -> Result<(), Failure> {
    if path.is_file() {
        Ok(())
    } else {
        Err(Failure::Usage(format!("no such file: {}", path.display())))
    }
}

/// Parses `args` (program name first) and runs the command. Returns the exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    match execute(cli.command) {
        Ok(()) => 0,
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            2
        }
        Err(Failure::Codec(e)) => {
            eprintln!("error: {e}");
            1
        }
    }
}

fn execute(command: Command) -> Result<(), Failure> {
    match command {
        Command::Compress { input, output, codec, frame } => {
            require_file(&input)?;
            let config = codec.config()?;
            let model = codec.model.load()?;
            let cloud = ingest::read_frame(&frame.spec(&input)?)?;
            let packed = container::compress_cloud(&cloud, &config, &model)?;
            std::fs::write(&output, &packed)?;
            println!(
                "{} points -> {} bytes ({} backend, {} predictor)",
                cloud.len(),
                packed.len(),
                config.backend,
                model.kind()
            );
        }
        Command::Decompress { input, output, model, frame } => {
            require_file(&input)?;
            let model = model.load()?;
            let cloud = container::decompress_cloud(&std::fs::read(&input)?, &model)?;
            let mut spec = frame.spec(&output)?;
            spec.has_intensity &= cloud.has_intensity();
            ingest::write_frame(&cloud, &spec)?;
            println!("{} points -> {}", cloud.len(), output.display());
        }
        Command::Inspect { file } => {
            require_file(&file)?;
            print!("{}", container::inspect(&std::fs::read(&file)?)?);
        }
        Command::Bench { dir, report, parallel, codec, frame } => {
            if !dir.is_dir() {
                return Err(Failure::Usage(format!("no such directory: {}", dir.display())));
            }
            let mut paths: Vec<PathBuf> =
                std::fs::read_dir(&dir)?.map(|entry| entry.map(|e| e.path())).collect::<Result<_, _>>()?;
            paths.retain(|p| p.is_file());
            paths.sort();
            let frames = paths.iter().map(|p| frame.spec(p)).collect::<Result<Vec<_>, _>>()?;
            let config = BenchConfig { codec: codec.config()?, model: codec.model.load()?, parallel };
            if parallel {
                eprintln!("note: frames run concurrently, latencies include contention");
            }
            let result = harness::run_bench(&frames, &config)?;
            print!("{result}");
            if let Some(path) = report {
                let mut out = BufWriter::new(File::create(&path)?);
                result.write_json_lines(&mut out)?;
                println!("{} records -> {}", result.records.len(), path.display());
            }
        }
        Command::Ablate { file, codec, frame } => {
            require_file(&file)?;
            let config = BenchConfig { codec: codec.config()?, model: codec.model.load()?, parallel: false };
            print!("{}", harness::run_ablation(&frame.spec(&file)?, &config)?);
        }
        Command::Synth { output, kind, n, seed, noise, frame } => {
            let kind: SynthKind = kind.parse().map_err(|e: Error| Failure::Usage(e.to_string()))?;
            if n == 0 {
                return Err(Failure::Usage("--n must be positive".into()));
            }
            let spec = frame.spec(&output)?;
            let mut cloud = ingest::synth_cloud(kind, n, noise, seed);
            if spec.has_intensity {
                cloud = ingest::with_synthetic_intensity(cloud, seed);
            }
            ingest::write_frame(&cloud, &spec)?;
            println!("{} {} points -> {}", kind.name(), n, output.display());
        }
    }
    Ok(())
}
