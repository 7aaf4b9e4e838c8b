//! Ground-truth grasp maps: Gaussian-Mask labels and the binary baseline.

use serde::{Deserialize, Serialize};

use crate::error::{CoreError, Result};
use crate::geometry::Polygon;
use crate::raster::{Mask, Raster};
use crate::worldsim::{CameraModel, ObjectInstance, Scene};

/// Per-pixel grasp quality `q` and normalised radius `r`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GraspMap {
    pub q: Raster,
    pub r: Raster,
}

impl GraspMap {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        GraspMap { q: Raster::zeros(rows, cols), r: Raster::zeros(rows, cols) }
    }

    pub fn rows(&self) -> usize {
        self.q.rows
    }

    pub fn cols(&self) -> usize {
        self.q.cols
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ObjectAnnotation {
    pub object_id: usize,
    /// Gaussian centre (u, v), px.
    pub center: (f64, f64),
    /// Half the farthest-pair distance, px.
    pub radius_px: f64,
    pub pair: [(f64, f64); 2],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
pub struct AnnotationMeta {
    pub objects: Vec<ObjectAnnotation>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LabelKind {
    Gaussian,
    Binary,
}

/// Diameter pair of the footprint in world x-y, projected at `height`.
pub fn farthest_pair(footprint: &Polygon, cam: &CameraModel, height: f64) -> Result<((f64, f64), (f64, f64))> {
    if footprint.vertices.len() < 2 || footprint.area() < 1e-9 {
        return Err(CoreError::DegeneratePolygon);
    }
    let (i, j) = footprint.diameter_pair().ok_or(CoreError::DegeneratePolygon)?;
    let a = cam.project_xy(footprint.vertices[i], height)?;
    let b = cam.project_xy(footprint.vertices[j], height)?;
    Ok((a, b))
}

/// Pixels whose ray meets the footprint at the object's top height.
pub fn object_mask(o: &ObjectInstance, cam: &CameraModel) -> Mask {
    let mut mask = Mask::new(cam.rows, cam.cols);
    let (mut u0, mut v0, mut u1, mut v1) = (f64::INFINITY, f64::INFINITY, f64::NEG_INFINITY, f64::NEG_INFINITY);
    for &p in &o.footprint.vertices {
        if let Ok((u, v)) = cam.project_xy(p, o.top_height) {
            u0 = u0.min(u);
            v0 = v0.min(v);
            u1 = u1.max(u);
            v1 = v1.max(v);
        }
    }
    if !u0.is_finite() {
        return mask;
    }
    let clampr = |x: f64, hi: usize| x.max(0.0).min(hi as f64 - 1.0) as usize;
    let (c0, c1) = (clampr(u0.floor() - 1.0, cam.cols), clampr(u1.ceil() + 1.0, cam.cols));
    let (r0, r1) = (clampr(v0.floor() - 1.0, cam.rows), clampr(v1.ceil() + 1.0, cam.rows));
    for r in r0..=r1 {
        for c in c0..=c1 {
            if cam.image_to_world(c as f64, r as f64, o.top_height).is_ok_and(|p| o.footprint.contains(p)) {
                mask.set(r, c, true);
            }
        }
    }
    mask
}

pub fn annotate_object(o: &ObjectInstance, cam: &CameraModel) -> Result<ObjectAnnotation> {
    for &p in &o.footprint.vertices {
        let (u, v) = cam.project_xy(p, o.top_height)?;
        if !cam.in_image(u, v) {
            return Err(CoreError::AnnotationClipped { object_id: o.id });
        }
    }
    let (a, b) = farthest_pair(&o.footprint, cam, o.top_height)?;
    let center = ((a.0 + b.0) / 2.0, (a.1 + b.1) / 2.0);
    let radius_px = (a.0 - b.0).hypot(a.1 - b.1) / 2.0;
    Ok(ObjectAnnotation { object_id: o.id, center, radius_px, pair: [a, b] })
}

fn label(
    scene: &Scene,
    cam: &CameraModel,
    r_max: f64,
    kind: LabelKind,
    strict: bool,
) -> Result<(GraspMap, AnnotationMeta)> {
    let mut map = GraspMap::zeros(cam.rows, cam.cols);
    let mut meta = AnnotationMeta::default();
    for o in &scene.objects {
        let ann = match annotate_object(o, cam) {
            Ok(a) => a,
            Err(CoreError::AnnotationClipped { .. }) if !strict => {
                let (a, b) = farthest_pair(&o.footprint, cam, o.top_height)?;
                let center = ((a.0 + b.0) / 2.0, (a.1 + b.1) / 2.0);
                ObjectAnnotation { object_id: o.id, center, radius_px: (a.0 - b.0).hypot(a.1 - b.1) / 2.0, pair: [a, b] }
            }
            Err(e) => return Err(e),
        };
        let sigma = ann.radius_px / 3.0;
        let r_norm = (ann.radius_px.min(r_max) / r_max) as f32;
        let mask = object_mask(o, cam);
        for (r, c) in mask.pixels() {
            let q = match kind {
                LabelKind::Gaussian => {
                    let d2 = (c as f64 - ann.center.0).powi(2) + (r as f64 - ann.center.1).powi(2);
                    (-d2 / (2.0 * sigma * sigma)).exp() as f32
                }
                LabelKind::Binary => 1.0,
            };
            let i = r * cam.cols + c;
            if q > map.q.data[i] {
                map.q.data[i] = q;
                map.r.data[i] = r_norm;
            }
        }
        meta.objects.push(ann);
    }
    Ok((map, meta))
}

pub fn gaussian_mask_label(scene: &Scene, cam: &CameraModel, r_max: f64) -> Result<(GraspMap, AnnotationMeta)> {
    label(scene, cam, r_max, LabelKind::Gaussian, true)
}

pub fn binary_label(scene: &Scene, cam: &CameraModel, r_max: f64) -> Result<GraspMap> {
    Ok(label(scene, cam, r_max, LabelKind::Binary, true)?.0)
}

pub fn make_label(scene: &Scene, cam: &CameraModel, r_max: f64, kind: LabelKind) -> Result<(GraspMap, AnnotationMeta)> {
    label(scene, cam, r_max, kind, true)
}

/// Like [`make_label`] but labels clipped objects on their visible pixels.
pub fn make_label_clipped(
    scene: &Scene,
    cam: &CameraModel,
    r_max: f64,
    kind: LabelKind,
) -> Result<(GraspMap, AnnotationMeta)> {
    label(scene, cam, r_max, kind, false)
}
