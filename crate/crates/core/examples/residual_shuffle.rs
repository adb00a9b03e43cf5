// Turn a point run into anchors plus residuals and regroup residual bytes into planes.

use lizip::{byte_shuffle, byte_unshuffle, decode_block, encode_block, PredictorModel};

fn main() -> lizip::Result<()> {
    let points: Vec<[i32; 3]> = (0..8).map(|t| [10 * t, 5 * t * t, -3]).collect();
    let model = PredictorModel::linear();
    let block = encode_block(&points, &model, 1e3)?;
    println!("anchors   {:?}", block.anchors());
    println!("residuals {:?}", block.residuals());
    assert_eq!(decode_block(&block, &model, 1e3)?, points);

    let values = [1, -1, 256, 0x0102_0304];
    let planes = byte_shuffle(&values);
    println!("values {values:?}");
    println!("planes {:02x?}", planes.as_bytes());
    assert_eq!(byte_unshuffle(&planes)?, values);
    Ok(())
}
