//! Simulated hemispherical tactile sensor.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{CoreError, Result};
use crate::geometry::Vec2;
use crate::grasp::GripperSpec;
use crate::raster::Mask;
use crate::worldsim::Scene;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SensorNoise {
    /// Salt-and-pepper flip probability inside the sensing disc.
    pub rate: f64,
    pub seed: u64,
}

impl SensorNoise {
    pub const NONE: SensorNoise = SensorNoise { rate: 0.0, seed: 0 };

    pub fn new(rate: f64, seed: u64) -> Self {
        SensorNoise { rate, seed }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TactileFrame {
    pub mask: Mask,
    pub p: Vec2,
    pub h: f64,
}

/// World-frame lateral offset of pixel (i, j) from the gripper axis, mm.
/// Columns run along +x and rows along +y.
pub fn pixel_offset(g: &GripperSpec, i: usize, j: usize) -> Vec2 {
    let half = g.resolution as f64 / 2.0;
    Vec2::new((j as f64 + 0.5 - half) / g.px_per_mm, (i as f64 + 0.5 - half) / g.px_per_mm)
}

/// Sensor-frame coordinates of pixel (i, j), mm. The sensor faces down,
/// so its frame is the world offset mirrored through the axis.
pub fn sensor_coords(g: &GripperSpec, i: usize, j: usize) -> Vec2 {
    -pixel_offset(g, i, j)
}

/// Noise-free contact rule: the pixel lies on the hemisphere and an object
/// top reaches the hemisphere surface above it.
pub fn contact_rule(scene: &Scene, g: &GripperSpec, p: Vec2, h: f64, i: usize, j: usize) -> bool {
    let d = pixel_offset(g, i, j);
    let l = d.norm();
    if l > g.radius {
        return false;
    }
    let surface = h + g.sag(l);
    let q = p + d;
    scene.objects.iter().any(|o| o.top_height >= surface && o.footprint.contains(q))
}

fn in_disc(g: &GripperSpec, i: usize, j: usize) -> bool {
    pixel_offset(g, i, j).norm() <= g.radius
}

pub fn sense(scene: &Scene, g: &GripperSpec, p: Vec2, h: f64, noise: SensorNoise) -> Result<TactileFrame> {
    if !scene.workspace.contains(p) {
        return Err(CoreError::OutsideWorkspace { x: p.x, y: p.y });
    }
    let t = g.resolution;
    let mut mask = Mask::new(t, t);
    let near: Vec<_> = scene
        .objects
        .iter()
        .filter(|o| {
            let c = o.centroid();
            c.dist(p) <= g.radius + o.footprint.radius_about(c) && o.top_height >= h
        })
        .collect();
    if !near.is_empty() {
        for i in 0..t {
            for j in 0..t {
                let d = pixel_offset(g, i, j);
                let l = d.norm();
                if l > g.radius {
                    continue;
                }
                let surface = h + g.sag(l);
                let q = p + d;
                if near.iter().any(|o| o.top_height >= surface && o.footprint.contains(q)) {
                    mask.set(i, j, true);
                }
            }
        }
    }
    if noise.rate > 0.0 {
        let mut rng = ChaCha8Rng::seed_from_u64(noise.seed);
        let dilate = rng.random_bool(0.5);
        mask = morph_step(&mask, dilate, g);
        for i in 0..t {
            for j in 0..t {
                if in_disc(g, i, j) && rng.random_bool(noise.rate.min(1.0)) {
                    let v = mask.get(i, j);
                    mask.set(i, j, !v);
                }
            }
        }
    }
    Ok(TactileFrame { mask, p, h })
}

/// One 4-neighbour dilation or erosion, restricted to the sensing disc.
fn morph_step(m: &Mask, dilate: bool, g: &GripperSpec) -> Mask {
    let mut out = m.clone();
    for i in 0..m.rows {
        for j in 0..m.cols {
            if !in_disc(g, i, j) {
                continue;
            }
            let (ii, jj) = (i as isize, j as isize);
            let nb = [m.at(ii - 1, jj), m.at(ii + 1, jj), m.at(ii, jj - 1), m.at(ii, jj + 1)];
            let v = if dilate { m.get(i, j) || nb.iter().any(|&b| b) } else { m.get(i, j) && nb.iter().all(|&b| b) };
            out.set(i, j, v);
        }
    }
    out
}
