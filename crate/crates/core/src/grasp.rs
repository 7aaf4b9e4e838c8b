//! Grasp representations and the jamming-gripper geometry.

use serde::{Deserialize, Serialize};

use crate::geometry::Vec2;

/// Image-space grasp: centre pixel, radius in pixels and quality.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GraspCandidate {
    pub u: f64,
    pub v: f64,
    pub r_px: f64,
    pub q: f64,
}

/// World-space grasp: position, gripper height and radius, all mm.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WorldGrasp {
    pub p: Vec2,
    pub h: f64,
    pub r: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GripperSpec {
    /// Hemisphere radius rho, mm.
    pub radius: f64,
    pub aperture: f64,
    /// Tactile frame side, pixels.
    pub resolution: usize,
    pub px_per_mm: f64,
    /// Capture ratio kappa.
    pub capture_ratio: f64,
    /// Smallest segmented area, in pixels, reported as contact.
    pub min_contact_area: usize,
}

impl Default for GripperSpec {
    fn default() -> Self {
        GripperSpec {
            radius: 40.0,
            aperture: 70.0,
            resolution: 160,
            px_per_mm: 2.0,
            capture_ratio: 0.6,
            min_contact_area: 20,
        }
    }
}

impl GripperSpec {
    pub fn validate(&self) -> crate::Result<()> {
        if self.resolution < 32 {
            return Err(crate::CoreError::Config(format!("tactile resolution {} < 32", self.resolution)));
        }
        if !(self.capture_ratio > 0.0 && self.capture_ratio <= 1.0) {
            return Err(crate::CoreError::Config(format!("capture ratio {} outside (0, 1]", self.capture_ratio)));
        }
        if self.radius <= 0.0 || self.px_per_mm <= 0.0 || self.aperture <= 0.0 {
            return Err(crate::CoreError::Config("gripper dimensions must be positive".into()));
        }
        Ok(())
    }

    pub fn capture_radius(&self) -> f64 {
        self.capture_ratio * self.radius
    }

    /// Height of the hemisphere surface above its lowest point at lateral distance `l`.
    pub fn sag(&self, l: f64) -> f64 {
        let rho = self.radius;
        rho - (rho * rho - l * l).max(0.0).sqrt()
    }

    /// Lateral radius of the contact disc when pressed `depth` mm into a flat top.
    pub fn contact_radius(&self, depth: f64) -> f64 {
        let d = depth.clamp(0.0, self.radius);
        (2.0 * self.radius * d - d * d).sqrt()
    }
}
