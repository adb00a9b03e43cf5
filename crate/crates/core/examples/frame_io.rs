// Write and read frames in the raw float and ASCII formats.

use lizip::{read_frame, synth_cloud, write_frame, FrameFormat, FrameSpec, SynthKind};

fn main() -> lizip::Result<()> {
    let dir = std::env::temp_dir().join(format!("lizip-frame-io-{}", std::process::id()));
    std::fs::create_dir_all(&dir)?;
    let cloud = lizip::ingest::with_synthetic_intensity(synth_cloud(SynthKind::UniformRandom, 1_000, 0.0, 4), 4);
    for (format, name) in [
        (FrameFormat::RawF32x4, "frame.bin"),
        (FrameFormat::RawF32x5, "frame.f32x5"),
        (FrameFormat::AsciiXyz, "frame.xyz"),
    ] {
        let spec = FrameSpec::new(format, dir.join(name), format != FrameFormat::AsciiXyz);
        write_frame(&cloud, &spec)?;
        let back = read_frame(&spec)?;
        let bytes = std::fs::metadata(&spec.path)?.len();
        println!("{:<10} {bytes:>7} bytes, {} points, intensity {}", format.name(), back.len(), back.has_intensity());
        assert_eq!(back.points(), cloud.points());
    }
    std::fs::remove_dir_all(&dir)?;
    Ok(())
}
