//! Grasp extraction from predicted maps and the detector implementations.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use vistac_nnet::{Tensor, TgcnnModel};

use crate::annotate::{make_label_clipped, GraspMap, LabelKind};
use crate::error::{CoreError, Result};
use crate::geometry::Vec2;
use crate::grasp::{GraspCandidate, GripperSpec, WorldGrasp};
use crate::raster::Raster;
use crate::worldsim::{render_rgb, CameraModel, Scene};

/// Pixels with `q > 0` that beat every 8-neighbour, ties going to the
/// smaller row-major index.
pub fn local_maxima(q: &Raster) -> Vec<usize> {
    let (rows, cols) = (q.rows as isize, q.cols as isize);
    let mut out = Vec::new();
    for r in 0..rows {
        for c in 0..cols {
            let i = (r * cols + c) as usize;
            let v = q.data[i];
            if v.is_nan() || v <= 0.0 {
                continue;
            }
            let mut is_max = true;
            'nb: for dr in -1..=1 {
                for dc in -1..=1 {
                    let (rr, cc) = (r + dr, c + dc);
                    if (dr == 0 && dc == 0) || rr < 0 || cc < 0 || rr >= rows || cc >= cols {
                        continue;
                    }
                    let j = (rr * cols + cc) as usize;
                    let n = q.data[j];
                    if (j < i && n >= v) || (j > i && n > v) {
                        is_max = false;
                        break 'nb;
                    }
                }
            }
            if is_max {
                out.push(i);
            }
        }
    }
    out
}

/// Up to `k` grasps at local maxima of `q`, greedily suppressing maxima
/// within the kept grasp's radius, sorted by quality descending.
pub fn extract_grasps(q: &Raster, r: &Raster, k: usize, r_max: f64) -> Vec<GraspCandidate> {
    let mut peaks = local_maxima(q);
    peaks.sort_by(|&a, &b| q.data[b].total_cmp(&q.data[a]).then(a.cmp(&b)));
    let mut kept: Vec<GraspCandidate> = Vec::new();
    for i in peaks {
        if kept.len() >= k {
            break;
        }
        let (u, v) = ((i % q.cols) as f64, (i / q.cols) as f64);
        if kept.iter().any(|g| (g.u - u).hypot(g.v - v) <= g.r_px.max(1.0)) {
            continue;
        }
        let r_px = (r.data[i] as f64 * r_max).max(0.0);
        kept.push(GraspCandidate { u, v, r_px, q: q.data[i] as f64 });
    }
    kept
}

/// Back-projects a candidate onto the plane `plane_height`; the radius is
/// scaled with the ground-plane pixel size and capped at half the aperture.
pub fn to_world(
    g: &GraspCandidate,
    cam: &CameraModel,
    plane_height: f64,
    ground_height: f64,
    gripper: &GripperSpec,
) -> Result<WorldGrasp> {
    let p = cam.image_to_world(g.u, g.v, plane_height)?;
    let r = (g.r_px * cam.mm_per_px(ground_height)).min(gripper.aperture / 2.0);
    Ok(WorldGrasp { p, h: plane_height, r })
}

pub trait Detector {
    /// Predicted grasp map for the current scene.
    fn detect(&self, scene: &Scene, cam: &CameraModel) -> Result<GraspMap>;
    /// Pixel radius corresponding to a normalised radius of 1.
    fn r_max(&self) -> f64;
}

/// Ground-truth labels, optionally corrupted by centre jitter and
/// false-positive blobs.
#[derive(Debug, Clone, PartialEq)]
pub struct OracleDetector {
    pub r_max: f64,
    /// Standard deviation of the per-axis centre jitter, mm.
    pub jitter_mm: f64,
    /// Constant shift added to every object, mm.
    pub offset: Vec2,
    pub false_positives: usize,
    pub false_positive_q: f32,
    pub seed: u64,
    pub label: LabelKind,
}

impl OracleDetector {
    pub fn new(r_max: f64) -> Self {
        OracleDetector {
            r_max,
            jitter_mm: 0.0,
            offset: Vec2::ZERO,
            false_positives: 0,
            false_positive_q: 0.8,
            seed: 0,
            label: LabelKind::Gaussian,
        }
    }

    pub fn with_jitter(mut self, jitter_mm: f64, seed: u64) -> Self {
        self.jitter_mm = jitter_mm;
        self.seed = seed;
        self
    }

    pub fn with_offset(mut self, offset: Vec2) -> Self {
        self.offset = offset;
        self
    }

    pub fn with_false_positives(mut self, count: usize, seed: u64) -> Self {
        self.false_positives = count;
        self.seed = seed;
        self
    }

    /// Shift applied to object `id`; fixed for the detector's lifetime.
    pub fn jitter_of(&self, id: usize) -> Vec2 {
        if self.jitter_mm <= 0.0 {
            return self.offset;
        }
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed ^ (id as u64 + 1).wrapping_mul(0xD6E8_FEB8_6659_FD93));
        let n = Normal::new(0.0, self.jitter_mm).expect("positive sigma");
        self.offset + Vec2::new(n.sample(&mut rng), n.sample(&mut rng))
    }
}

impl Detector for OracleDetector {
    fn detect(&self, scene: &Scene, cam: &CameraModel) -> Result<GraspMap> {
        let mut shifted = scene.clone();
        for o in &mut shifted.objects {
            o.footprint = o.footprint.translate(self.jitter_of(o.id));
        }
        let (mut map, _) = make_label_clipped(&shifted, cam, self.r_max, self.label)?;
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed ^ 0xF00D);
        for _ in 0..self.false_positives {
            let (cu, cv) = (rng.random_range(0.0..cam.cols as f64), rng.random_range(0.0..cam.rows as f64));
            let sigma = 3.0;
            for r in 0..cam.rows {
                for c in 0..cam.cols {
                    let d2 = (c as f64 - cu).powi(2) + (r as f64 - cv).powi(2);
                    if d2 > 9.0 * sigma * sigma {
                        continue;
                    }
                    let q = self.false_positive_q * (-d2 / (2.0 * sigma * sigma)).exp() as f32;
                    let i = r * cam.cols + c;
                    if q > map.q.data[i] {
                        map.q.data[i] = q;
                        map.r.data[i] = 0.5;
                    }
                }
            }
        }
        Ok(map)
    }

    fn r_max(&self) -> f64 {
        self.r_max
    }
}

/// Renders the scene and runs the network on it.
pub struct TrainedDetector {
    pub model: TgcnnModel<f32>,
    pub r_max: f64,
}

impl Detector for TrainedDetector {
    fn detect(&self, scene: &Scene, cam: &CameraModel) -> Result<GraspMap> {
        let img = render_rgb(scene, cam);
        predict_map(&self.model, &img)
    }

    fn r_max(&self) -> f64 {
        self.r_max
    }
}

pub fn predict_map(model: &TgcnnModel<f32>, img: &crate::raster::Image) -> Result<GraspMap> {
    let x = Tensor::from_vec(&[3, img.rows, img.cols], img.to_chw()).map_err(CoreError::Nn)?;
    let (q, r) = model.predict(&x)?;
    Ok(GraspMap { q: Raster::from_vec(img.rows, img.cols, q), r: Raster::from_vec(img.rows, img.cols, r) })
}
