// Build an MLP predictor, round-trip it through the LIZM weight format and predict.

use lizip::predictor::{lizm_size, load_lizm, to_lizm_bytes};
use lizip::{Mlp, PredictionContext, PredictorModel};

fn main() -> lizip::Result<()> {
    let net = Mlp::seeded(3, 256, 3, 42)?;
    let bytes = to_lizm_bytes(&net);
    println!("topology {:?}", net.topology());
    println!("{} parameters, {} bytes on disk", net.parameter_count(), bytes.len());
    assert_eq!(bytes.len(), lizm_size(&net.topology()));

    let model = PredictorModel::Mlp(load_lizm(&bytes)?);
    let history = vec![[1000, 2000, -1700], [1010, 2003, -1701], [1020, 2006, -1702]];
    let ctx = PredictionContext::new(history.clone(), 1e3)?;
    println!("mlp prediction    {:?}", model.predict(&ctx)?);
    println!("linear prediction {:?}", PredictorModel::linear().predict(&ctx)?);
    Ok(())
}
