// Compress a frame into a LIZP container, inspect it and decode it back.

use lizip::{
    compress_cloud, decompress_cloud, decompress_quantized, inspect, morton_sort, quantize, synth_cloud, Backend,
    CodecConfig, PredictorModel, SynthKind,
};

fn main() -> lizip::Result<()> {
    let cloud = lizip::ingest::with_synthetic_intensity(synth_cloud(SynthKind::Plane, 40_000, 0.02, 3), 3);
    let model = PredictorModel::linear();
    for backend in Backend::ALL.into_iter().filter(|b| b.is_available()) {
        let config = CodecConfig::default().with_backend(backend);
        let packed = compress_cloud(&cloud, &config, &model)?;
        print!("{}", inspect(&packed)?);

        let (expected, _) = morton_sort(&quantize(&cloud, config.scale)?)?;
        assert_eq!(decompress_quantized(&packed, &model)?, expected);
        let restored = decompress_cloud(&packed, &model)?;
        println!("{} points restored from {} bytes\n", restored.len(), packed.len());
    }
    Ok(())
}
