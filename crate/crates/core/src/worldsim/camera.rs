use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{CoreError, Result};
use crate::geometry::Vec2;

pub type Vec3 = [f64; 3];

pub const MAX_TILT: f64 = PI / 24.0;

fn sub(a: Vec3, b: Vec3) -> Vec3 {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

fn dot(a: Vec3, b: Vec3) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

fn cross(a: Vec3, b: Vec3) -> Vec3 {
    [a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]]
}

fn normalize(a: Vec3) -> Vec3 {
    let n = dot(a, a).sqrt();
    [a[0] / n, a[1] / n, a[2] / n]
}

/// Pinhole camera. `rotation` rows are the camera axes expressed in world
/// coordinates, so `x_cam = rotation * (x_world - position)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CameraModel {
    pub fx: f64,
    pub fy: f64,
    pub cx: f64,
    pub cy: f64,
    pub rows: usize,
    pub cols: usize,
    pub rotation: [Vec3; 3],
    pub position: Vec3,
    pub tilt: f64,
}

impl CameraModel {
    /// Camera at `distance` from `target`, its optical axis tilted `tilt` rad
    /// from the vertical towards azimuth `azimuth`, principal point at the
    /// image centre. Pixel (u, v) = (column, row) with integer pixel centres.
    pub fn looking_at(
        target: Vec3,
        distance: f64,
        tilt: f64,
        azimuth: f64,
        focal: f64,
        rows: usize,
        cols: usize,
    ) -> Result<Self> {
        if !(0.0..=MAX_TILT + 1e-12).contains(&tilt) {
            return Err(CoreError::Config(format!("tilt {tilt} outside [0, pi/24]")));
        }
        if distance <= 0.0 || focal <= 0.0 {
            return Err(CoreError::Config("camera distance and focal length must be positive".into()));
        }
        let offset = [tilt.sin() * azimuth.cos(), tilt.sin() * azimuth.sin(), tilt.cos()];
        let position = [target[0] + distance * offset[0], target[1] + distance * offset[1], target[2] + distance * offset[2]];
        let zc = normalize(sub(target, position));
        let wx = [1.0, 0.0, 0.0];
        let xc = normalize(sub(wx, [zc[0] * dot(wx, zc), zc[1] * dot(wx, zc), zc[2] * dot(wx, zc)]));
        let yc = cross(zc, xc);
        Ok(CameraModel {
            fx: focal,
            fy: focal,
            cx: (cols as f64 - 1.0) / 2.0,
            cy: (rows as f64 - 1.0) / 2.0,
            rows,
            cols,
            rotation: [xc, yc, zc],
            position,
            tilt,
        })
    }

    /// Nadir camera whose footprint at `plane_height` is `field_mm` wide.
    pub fn nadir_covering(center: Vec2, plane_height: f64, field_mm: f64, rows: usize, cols: usize) -> Result<Self> {
        let distance = 600.0;
        let focal = distance * cols as f64 / field_mm;
        Self::looking_at([center.x, center.y, plane_height], distance, 0.0, 0.0, focal, rows, cols)
    }

    pub fn to_camera(&self, p: Vec3) -> Vec3 {
        let d = sub(p, self.position);
        [dot(self.rotation[0], d), dot(self.rotation[1], d), dot(self.rotation[2], d)]
    }

    /// Projects a world point to (u, v) pixel coordinates.
    pub fn world_to_image(&self, p: Vec3) -> Result<(f64, f64)> {
        let c = self.to_camera(p);
        if c[2] <= 1e-9 {
            return Err(CoreError::NoIntersection { plane_height: p[2] });
        }
        Ok((self.fx * c[0] / c[2] + self.cx, self.fy * c[1] / c[2] + self.cy))
    }

    /// Back-projects pixel (u, v) onto the plane z = `plane_height`.
    pub fn image_to_world(&self, u: f64, v: f64, plane_height: f64) -> Result<Vec2> {
        let dc = [(u - self.cx) / self.fx, (v - self.cy) / self.fy, 1.0];
        let r = &self.rotation;
        let dw = [
            r[0][0] * dc[0] + r[1][0] * dc[1] + r[2][0] * dc[2],
            r[0][1] * dc[0] + r[1][1] * dc[1] + r[2][1] * dc[2],
            r[0][2] * dc[0] + r[1][2] * dc[1] + r[2][2] * dc[2],
        ];
        if dw[2].abs() < 1e-12 {
            return Err(CoreError::NoIntersection { plane_height });
        }
        let t = (plane_height - self.position[2]) / dw[2];
        if t <= 0.0 {
            return Err(CoreError::NoIntersection { plane_height });
        }
        Ok(Vec2::new(self.position[0] + t * dw[0], self.position[1] + t * dw[1]))
    }

    /// Millimetres per pixel on the plane `plane_height` along the optical axis.
    pub fn mm_per_px(&self, plane_height: f64) -> f64 {
        let depth = (self.position[2] - plane_height) / self.rotation[2][2].abs().max(1e-12);
        depth / self.fx
    }

    pub fn project_xy(&self, p: Vec2, height: f64) -> Result<(f64, f64)> {
        self.world_to_image([p.x, p.y, height])
    }

    pub fn in_image(&self, u: f64, v: f64) -> bool {
        u >= -0.5 && v >= -0.5 && u < self.cols as f64 - 0.5 && v < self.rows as f64 - 0.5
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn principal_point_of_nadir_camera_hits_camera_xy() {
        let cam = CameraModel::looking_at([30.0, -20.0, 0.0], 500.0, 0.0, 0.0, 400.0, 48, 64).unwrap();
        let p = cam.image_to_world(cam.cx, cam.cy, 0.0).unwrap();
        assert!((p.x - 30.0).abs() < 1e-9 && (p.y + 20.0).abs() < 1e-9);
        assert_eq!(cam.rotation[0], [1.0, 0.0, 0.0]);
        assert_eq!(cam.rotation[1], [0.0, -1.0, 0.0]);
    }

    #[test]
    fn rejects_excess_tilt_and_parallel_rays() {
        assert!(CameraModel::looking_at([0.0; 3], 500.0, 0.2, 0.0, 400.0, 48, 64).is_err());
        let cam = CameraModel::looking_at([0.0; 3], 500.0, 0.0, 0.0, 400.0, 48, 64).unwrap();
        // plane above the camera: the ray points away from it
        assert!(matches!(cam.image_to_world(3.0, 3.0, 900.0), Err(CoreError::NoIntersection { .. })));
    }

    #[test]
    fn mm_per_px_matches_pixel_spacing_on_plane() {
        let cam = CameraModel::nadir_covering(Vec2::ZERO, 0.0, 192.0, 96, 96).unwrap();
        let a = cam.image_to_world(cam.cx, cam.cy, 0.0).unwrap();
        let b = cam.image_to_world(cam.cx + 1.0, cam.cy, 0.0).unwrap();
        assert!((a.dist(b) - cam.mm_per_px(0.0)).abs() < 1e-9);
        assert!((cam.mm_per_px(0.0) - 2.0).abs() < 1e-12);
    }
}
