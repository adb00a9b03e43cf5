// Snap a cloud to the integer grid and measure the reconstruction error.

use lizip::{dequantize, max_reconstruction_error, quantize, synth_cloud, SynthKind};

fn main() -> lizip::Result<()> {
    let cloud = synth_cloud(SynthKind::Sphere, 10_000, 0.02, 1);
    for scale in [1e2_f32, 1e3, 1e4, 1e5] {
        let grid = quantize(&cloud, scale)?;
        let restored = dequantize(&grid);
        let err = max_reconstruction_error(&cloud, &restored)?;
        println!("scale {scale:>8}: max error {err:.4} mm (bound {:.4} mm)", 500.0 / scale as f64);
    }
    let first = quantize(&cloud, 1e5)?.coords()[0];
    println!("first point {:?} -> {first:?}", cloud.points()[0]);
    Ok(())
}
