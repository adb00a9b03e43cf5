// Benchmark LIZP against Deflate over raw floats on a handful of synthetic frames.

use lizip::harness::run_bench_clouds;
use lizip::{synth_cloud, BenchConfig, CodecConfig, SynthKind};

fn main() -> lizip::Result<()> {
    let frames: Vec<_> = (0..4)
        .map(|seed| {
            let kind = [SynthKind::Plane, SynthKind::Corridor][seed as usize % 2];
            (format!("{}-{seed}", kind.name()), synth_cloud(kind, 34_000, 0.02, seed))
        })
        .collect();
    let config = BenchConfig { codec: CodecConfig::default().with_scale(1e3), ..BenchConfig::default() };
    let report = run_bench_clouds(&frames, &config)?;
    print!("{report}");
    report.write_json_lines(std::io::stdout().lock())?;
    Ok(())
}
