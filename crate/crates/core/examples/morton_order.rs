// Interleave grid coordinates into Z-order codes and sort a cloud along the curve.

use lizip::{morton_encode, morton_sort, quantize, synth_cloud, SynthKind};

fn main() -> lizip::Result<()> {
    for u in [[0, 0, 0], [1, 0, 0], [0, 1, 0], [0, 0, 1], [1, 1, 1], [3, 5, 7]] {
        let code = morton_encode(u, [0, 0, 0])?;
        println!("{u:?} -> {:#b}", code.0);
    }

    let cloud = synth_cloud(SynthKind::Corridor, 5_000, 0.02, 2);
    let grid = quantize(&cloud, 1e3)?;
    let (sorted, order) = morton_sort(&grid)?;
    let step = |c: &[[i32; 3]]| {
        let total: f64 =
            c.windows(2).map(|w| (0..3).map(|a| (w[1][a] - w[0][a]) as f64).map(|d| d * d).sum::<f64>().sqrt()).sum();
        total / (c.len() - 1) as f64
    };
    println!("mean step before sort {:.1} mm, after {:.1} mm", step(grid.coords()), step(sorted.coords()));
    println!("first five source indices {:?}", &order[..5]);
    Ok(())
}
