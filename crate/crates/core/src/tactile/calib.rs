use serde::{Deserialize, Serialize};

use crate::error::{CoreError, Result};
use crate::geometry::Vec2;
use crate::grasp::GripperSpec;
use crate::raster::Mask;
use crate::tactile::mec::{min_enclosing_circle, Circle};
use crate::tactile::segment::segment;
use crate::tactile::sensor::{sensor_coords, TactileFrame};

/// Segmented contact pixels and their minimum enclosing circle in the
/// sensor frame (mm).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ContactRegion {
    pub mask: Mask,
    pub pixels: Vec<(usize, usize)>,
    pub mec: Circle,
}

impl ContactRegion {
    pub fn area(&self) -> usize {
        self.pixels.len()
    }
}

/// Builds the region from already segmented pixels.
pub fn region_from_mask(mask: Mask, g: &GripperSpec) -> Result<ContactRegion> {
    let pixels = mask.pixels();
    let pts: Vec<Vec2> = pixels.iter().map(|&(i, j)| sensor_coords(g, i, j)).collect();
    let mec = min_enclosing_circle(&pts).map_err(|_| CoreError::NoContact)?;
    Ok(ContactRegion { mask, pixels, mec })
}

/// Segments the frame; regions smaller than the contact threshold are
/// reported as no contact.
pub fn contact_region(frame: &TactileFrame, g: &GripperSpec) -> Option<ContactRegion> {
    let seg = segment(&frame.mask);
    if seg.count() < g.min_contact_area.max(1) {
        return None;
    }
    region_from_mask(seg, g).ok()
}

/// Gripper move that re-centres the contact: `d = z - t` with the gripper
/// centre `z` at the sensor origin and `t` the enclosing-circle centre.
pub fn calibration_offset(region: &ContactRegion) -> Result<Vec2> {
    if region.pixels.is_empty() {
        return Err(CoreError::NoContact);
    }
    Ok(Vec2::ZERO - region.mec.center)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AhdConfig {
    pub alpha: f64,
    pub r_min: f64,
    pub r_max: f64,
}

impl Default for AhdConfig {
    fn default() -> Self {
        AhdConfig { alpha: 0.35, r_min: 5.0, r_max: 30.0 }
    }
}

/// Adaptive height dropping: press deeper for larger predicted radii.
pub fn adaptive_drop_height(r_hat: f64, contact_h: f64, cfg: &AhdConfig) -> f64 {
    contact_h - cfg.alpha * r_hat.clamp(cfg.r_min, cfg.r_max)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ahd_clamps_and_is_monotone() {
        let c = AhdConfig::default();
        assert_eq!(adaptive_drop_height(0.0, 50.0, &c), 50.0 - 0.35 * 5.0);
        assert_eq!(adaptive_drop_height(30.0, 50.0, &c), 50.0 - 0.35 * 30.0);
        assert_eq!(adaptive_drop_height(300.0, 50.0, &c), adaptive_drop_height(30.0, 50.0, &c));
        let mut prev = f64::INFINITY;
        for i in 0..100 {
            let h = adaptive_drop_height(i as f64 * 0.5, 50.0, &c);
            assert!(h <= prev);
            prev = h;
        }
    }

    #[test]
    fn offset_negates_sensor_frame_centre() {
        let g = GripperSpec::default();
        let mut mask = Mask::new(g.resolution, g.resolution);
        mask.set(0, 0, true);
        let mut region = region_from_mask(mask, &g).unwrap();
        region.mec.center = Vec2::new(5.0, -3.0);
        assert_eq!(calibration_offset(&region).unwrap(), Vec2::new(-5.0, 3.0));
    }
}
