// Show how much each pipeline stage contributes to the container size.

use lizip::harness::run_ablation_cloud;
use lizip::{synth_cloud, BenchConfig, CodecConfig, PredictorModel, SynthKind};

fn main() -> lizip::Result<()> {
    let cloud = synth_cloud(SynthKind::Plane, 34_000, 0.02, 5);
    for model in [PredictorModel::linear(), PredictorModel::Mlp(lizip::Mlp::seeded(3, 64, 2, 5)?)] {
        let config = BenchConfig { codec: CodecConfig::default().with_scale(1e3), model, parallel: false };
        println!("{} predictor", config.model.kind());
        println!("{}", run_ablation_cloud(&cloud, &config)?);
    }
    Ok(())
}
