//! Grasping overlap degree between a predicted grasp circle and an object mask.

use serde::{Deserialize, Serialize};
use vistac_core::raster::Mask;

use crate::error::{HarnessError, Result};

pub const GOD_THRESHOLD: f64 = 0.45;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GodDenominator {
    /// |circle ∩ mask| / |circle ∪ mask|
    #[default]
    Iou,
    /// |circle ∩ mask| / |circle|
    Circle,
}

/// Circle in pixel coordinates; pixel (r, c) sits at (u, v) = (c, r).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Circle {
    pub u: f64,
    pub v: f64,
    pub r: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GodResult {
    pub circle: Option<Circle>,
    pub god: f64,
    pub correct: bool,
    /// Distance from the Q argmax to the annotated centre, px.
    pub argmax_dist: f64,
}

/// Pixels whose centre lies within the circle.
pub fn circle_mask(c: &Circle, rows: usize, cols: usize) -> Mask {
    let mut m = Mask::new(rows, cols);
    let r2 = c.r * c.r;
    for r in 0..rows {
        for col in 0..cols {
            if (col as f64 - c.u).powi(2) + (r as f64 - c.v).powi(2) <= r2 {
                m.set(r, col, true);
            }
        }
    }
    m
}

/// Overlap of two rasterised regions.
pub fn overlap(a: &Mask, b: &Mask, denom: GodDenominator) -> Result<f64> {
    if a.rows != b.rows || a.cols != b.cols {
        return Err(HarnessError::Format(format!(
            "mask sizes differ: {}x{} vs {}x{}",
            a.rows, a.cols, b.rows, b.cols
        )));
    }
    let (mut inter, mut union, mut na) = (0usize, 0usize, 0usize);
    for (&x, &y) in a.data.iter().zip(&b.data) {
        inter += (x && y) as usize;
        union += (x || y) as usize;
        na += x as usize;
    }
    let d = match denom {
        GodDenominator::Iou => union,
        GodDenominator::Circle => na,
    };
    Ok(if d == 0 { 0.0 } else { inter as f64 / d as f64 })
}

pub fn god(circle: &Circle, mask: &Mask, denom: GodDenominator) -> Result<f64> {
    if !(circle.r > 0.0) {
        return Err(HarnessError::Config(format!("circle radius must be positive, got {}", circle.r)));
    }
    overlap(&circle_mask(circle, mask.rows, mask.cols), mask, denom)
}

pub fn is_correct(god: f64) -> bool {
    god > GOD_THRESHOLD
}
