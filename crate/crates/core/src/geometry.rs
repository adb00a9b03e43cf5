//! Point cloud types and the grid quantization that defines the integer domain.
//!
//! Coordinates are snapped to a uniform grid with `scale` lines per meter. The
//! product of an `f32` coordinate and an `f32` scale is exact in `f64` (two
//! 24-bit mantissas fit in 53 bits), so rounding happens exactly once and the
//! snapping error never exceeds half a grid step.

use crate::{Error, Result};

/// Fixed-point scale for intensity: 8 fractional bits stored in a `u16`.
pub const INTENSITY_SCALE: f32 = 256.0;

/// An ordered set of points in meters with optional per-point intensity.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct PointCloud {
    points: Vec<[f32; 3]>,
    intensity: Option<Vec<f32>>,
}

impl PointCloud {
    pub fn new(points: Vec<[f32; 3]>, intensity: Option<Vec<f32>>) -> Result<Self> {
        if let Some(idx) = points.iter().position(|p| p.iter().any(|v| !v.is_finite())) {
            return Err(Error::Validation(format!("point {idx} has a non-finite coordinate {:?}", points[idx])));
        }
        if let Some(values) = &intensity {
            if values.len() != points.len() {
                return Err(Error::Validation(format!(
                    "{} intensity values for {} points",
                    values.len(),
                    points.len()
                )));
            }
            if let Some(idx) = values.iter().position(|v| !v.is_finite()) {
                return Err(Error::Validation(format!("intensity {idx} is not finite")));
            }
        }
        Ok(Self { points, intensity })
    }

    pub fn from_points(points: Vec<[f32; 3]>) -> Result<Self> {
        Self::new(points, None)
    }

    pub fn points(&self) -> &[[f32; 3]] {
        &self.points
    }

    pub fn intensity(&self) -> Option<&[f32]> {
        self.intensity.as_deref()
    }

    pub fn has_intensity(&self) -> bool {
        self.intensity.is_some()
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Reorders the cloud so that output point `i` is input point `order[i]`.
    pub fn permuted(&self, order: &[usize]) -> Self {
        Self {
            points: order.iter().map(|&i| self.points[i]).collect(),
            intensity: self.intensity.as_ref().map(|values| order.iter().map(|&i| values[i]).collect()),
        }
    }

    pub fn into_parts(self) -> (Vec<[f32; 3]>, Option<Vec<f32>>) {
        (self.points, self.intensity)
    }
}

/// Integer grid coordinates plus the scale that maps them back to meters.
#[derive(Debug, Clone, PartialEq)]
pub struct QuantizedCloud {
    coords: Vec<[i32; 3]>,
    scale: f32,
    intensity: Option<Vec<u16>>,
}

impl QuantizedCloud {
    pub fn new(coords: Vec<[i32; 3]>, scale: f32, intensity: Option<Vec<u16>>) -> Result<Self> {
        check_scale(scale)?;
        if let Some(values) = &intensity {
            if values.len() != coords.len() {
                return Err(Error::Validation(format!(
                    "{} intensity values for {} points",
                    values.len(),
                    coords.len()
                )));
            }
        }
        Ok(Self { coords, scale, intensity })
    }

    pub fn coords(&self) -> &[[i32; 3]] {
        &self.coords
    }

    pub fn scale(&self) -> f32 {
        self.scale
    }

    pub fn intensity(&self) -> Option<&[u16]> {
        self.intensity.as_deref()
    }

    pub fn len(&self) -> usize {
        self.coords.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coords.is_empty()
    }

    pub fn permuted(&self, order: &[usize]) -> Self {
        Self {
            coords: order.iter().map(|&i| self.coords[i]).collect(),
            scale: self.scale,
            intensity: self.intensity.as_ref().map(|values| order.iter().map(|&i| values[i]).collect()),
        }
    }

    pub fn into_parts(self) -> (Vec<[i32; 3]>, f32, Option<Vec<u16>>) {
        (self.coords, self.scale, self.intensity)
    }
}

pub(crate) fn check_scale(scale: f32) -> Result<()> {
    if scale.is_finite() && scale > 0.0 {
        Ok(())
    } else {
        Err(Error::Validation(format!("scale must be a positive finite number, got {scale}")))
    }
}

/// Snaps one metric value onto the grid, rounding halves away from zero.
///
/// Returns `None` when the grid coordinate does not fit a signed 32-bit integer.
pub fn quantize_value(value: f64, scale: f64) -> Option<i32> {
    let snapped = (value * scale).round();
    if snapped.is_finite() && snapped >= i32::MIN as f64 && snapped <= i32::MAX as f64 {
        Some(snapped as i32)
    } else {
        None
    }
}

pub fn dequantize_value(coord: i32, scale: f64) -> f64 {
    coord as f64 / scale
}

pub fn quantize(cloud: &PointCloud, scale: f32) -> Result<QuantizedCloud> {
    check_scale(scale)?;
    let grid = scale as f64;
    let coords = cloud
        .points
        .iter()
        .enumerate()
        .map(|(idx, p)| {
            let mut out = [0i32; 3];
            for axis in 0..3 {
                out[axis] = quantize_value(p[axis] as f64, grid).ok_or_else(|| {
                    Error::Range(format!(
                        "point {idx} axis {axis} value {} m overflows a 32-bit grid coordinate at scale {scale}",
                        p[axis]
                    ))
                })?;
            }
            Ok(out)
        })
        .collect::<Result<Vec<_>>>()?;

    let intensity = cloud
        .intensity
        .as_ref()
        .map(|values| {
            values
                .iter()
                .enumerate()
                .map(|(idx, &v)| {
                    quantize_intensity(v).ok_or_else(|| {
                        Error::Range(format!(
                            "point {idx} intensity {v} does not fit 16 bits at 1/{INTENSITY_SCALE} resolution"
                        ))
                    })
                })
                .collect::<Result<Vec<_>>>()
        })
        .transpose()?;

    Ok(QuantizedCloud { coords, scale, intensity })
}

fn quantize_intensity(value: f32) -> Option<u16> {
    let snapped = (value as f64 * INTENSITY_SCALE as f64).round();
    (0.0..=u16::MAX as f64).contains(&snapped).then_some(snapped as u16)
}

pub fn dequantize(qcloud: &QuantizedCloud) -> PointCloud {
    let grid = qcloud.scale as f64;
    let points = qcloud.coords.iter().map(|c| c.map(|u| dequantize_value(u, grid) as f32)).collect();
    let intensity =
        qcloud.intensity.as_ref().map(|values| values.iter().map(|&v| v as f32 / INTENSITY_SCALE).collect());
    PointCloud { points, intensity }
}

/// Largest per-axis deviation between corresponding points, in millimeters.
pub fn max_reconstruction_error(a: &PointCloud, b: &PointCloud) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::Validation(format!("cannot compare clouds of {} and {} points", a.len(), b.len())));
    }
    let worst = a
        .points
        .iter()
        .zip(&b.points)
        .flat_map(|(p, q)| (0..3).map(move |axis| (p[axis] as f64 - q[axis] as f64).abs()))
        .fold(0.0f64, f64::max);
    Ok(worst * 1000.0)
}
