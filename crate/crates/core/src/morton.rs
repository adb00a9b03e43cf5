//! Morton (Z-order) codes over 21-bit integer coordinates.

use rayon::prelude::*;

use crate::geometry::QuantizedCloud;
use crate::{Error, Result};

/// Bits per axis that fit three-way interleaved into a `u64`.
pub const AXIS_BITS: u32 = 21;
pub const AXIS_LIMIT: u32 = 1 << AXIS_BITS;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct MortonCode(pub u64);

/// Moves bit `k` of a 21-bit value to bit `3k`.
pub fn spread_bits(v: u32) -> Result<u64> {
    if v >= AXIS_LIMIT {
        return Err(Error::Range(format!("{v} does not fit in {AXIS_BITS} bits")));
    }
    Ok(spread(v as u64))
}

#[inline]
fn spread(v: u64) -> u64 {
    let mut w = v & 0x1f_ffff;
    w = (w | w << 32) & 0x001f_0000_0000_ffff;
    w = (w | w << 16) & 0x001f_0000_ff00_00ff;
    w = (w | w << 8) & 0x100f_00f0_0f00_f00f;
    w = (w | w << 4) & 0x10c3_0c30_c30c_30c3;
    w = (w | w << 2) & 0x1249_2492_4924_9249;
    w
}

/// Interleaves `u - offset` as x | y << 1 | z << 2.
///
/// Every shifted axis must land in `[0, 2^21)`; the caller re-blocks or picks a
/// coarser scale otherwise.
pub fn morton_encode(u: [i32; 3], offset: [i32; 3]) -> Result<MortonCode> {
    let mut code = 0u64;
    for axis in 0..3 {
        let shifted = u[axis] as i64 - offset[axis] as i64;
        if !(0..AXIS_LIMIT as i64).contains(&shifted) {
            return Err(Error::Range(format!(
                "axis {axis} value {} is {shifted} grid steps from the origin {}; the Morton window is {AXIS_LIMIT} steps",
                u[axis], offset[axis]
            )));
        }
        code |= spread(shifted as u64) << axis;
    }
    Ok(MortonCode(code))
}

/// Per-axis minimum, the origin of the Morton window for this cloud.
pub fn min_corner(coords: &[[i32; 3]]) -> [i32; 3] {
    coords.iter().fold([i32::MAX; 3], |acc, c| [acc[0].min(c[0]), acc[1].min(c[1]), acc[2].min(c[2])])
}

/// Stable sort along the Z-order curve.
///
/// Returns the reordered cloud and the permutation `order` such that output
/// point `i` is input point `order[i]`.
pub fn morton_sort(qcloud: &QuantizedCloud) -> Result<(QuantizedCloud, Vec<usize>)> {
    let coords = qcloud.coords();
    let offset = min_corner(coords);
    let codes = coords
        .par_iter()
        .enumerate()
        .map(|(idx, &c)| {
            morton_encode(c, offset).map_err(|e| match e {
                Error::Range(msg) => Error::Range(format!("point {idx}: {msg}")),
                other => other,
            })
        })
        .collect::<Result<Vec<_>>>()?;

    let mut order: Vec<usize> = (0..coords.len()).collect();
    order.par_sort_by_key(|&i| codes[i]);
    Ok((qcloud.permuted(&order), order))
}
