//! Pseudo-transparent rendering: objects show the background behind them
//! through a radial warp, dimmed, with a bright rim at the silhouette.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::geometry::{Rect, Vec2};
use crate::raster::Image;
use crate::worldsim::camera::CameraModel;
use crate::worldsim::scene::{ObjectInstance, Scene};
use crate::worldsim::support::SupportKind;
use crate::worldsim::texture::Rgb;

pub const WARP_STRENGTH_PX: f64 = 6.0;
pub const ATTENUATION: f32 = 0.85;
pub const RIM_WIDTH_PX: f64 = 2.0;
pub const RIM_CONTRAST: f32 = 0.25;
pub const RIPPLE_AMPLITUDE_PX: f64 = 4.0;
pub const RIPPLE_PERIOD_PX: f64 = 11.0;

struct Projected<'a> {
    object: &'a ObjectInstance,
    bounds: Rect,
    center_px: (f64, f64),
    radius_px: f64,
    mm_per_px: f64,
}

fn project<'a>(o: &'a ObjectInstance, cam: &CameraModel) -> Option<Projected<'a>> {
    let z = o.top_height;
    let mut bounds = Rect::new(Vec2::new(f64::INFINITY, f64::INFINITY), Vec2::new(f64::NEG_INFINITY, f64::NEG_INFINITY));
    for &v in &o.footprint.vertices {
        let (u, vv) = cam.project_xy(v, z).ok()?;
        bounds.min = Vec2::new(bounds.min.x.min(u), bounds.min.y.min(vv));
        bounds.max = Vec2::new(bounds.max.x.max(u), bounds.max.y.max(vv));
    }
    let c = o.centroid();
    let center_px = cam.project_xy(c, z).ok()?;
    let mm_per_px = cam.mm_per_px(z);
    Some(Projected {
        object: o,
        bounds: Rect::new(bounds.min - Vec2::new(1.0, 1.0), bounds.max + Vec2::new(1.0, 1.0)),
        center_px,
        radius_px: (o.footprint.radius_about(c) / mm_per_px).max(1.0),
        mm_per_px,
    })
}

fn scale(c: Rgb, s: f32) -> Rgb {
    [c[0] * s, c[1] * s, c[2] * s]
}

fn clamp01(c: Rgb) -> Rgb {
    [c[0].clamp(0.0, 1.0), c[1].clamp(0.0, 1.0), c[2].clamp(0.0, 1.0)]
}

/// Background colour seen along pixel (u, v), before lighting.
fn background_at(scene: &Scene, cam: &CameraModel, u: f64, v: f64) -> Rgb {
    match cam.image_to_world(u, v, scene.support.base_height) {
        Ok(p) => scene.background.sample(p),
        Err(_) => [0.0; 3],
    }
}

pub fn render_rgb(scene: &Scene, cam: &CameraModel) -> Image {
    render_rgb_at(scene, cam, 0)
}

/// Renders frame `time` (only water scenes change with time).
pub fn render_rgb_at(scene: &Scene, cam: &CameraModel, time: u64) -> Image {
    let mut projected: Vec<Projected> = scene.objects.iter().filter_map(|o| project(o, cam)).collect();
    projected.sort_by(|a, b| b.object.top_height.total_cmp(&a.object.top_height).then(a.object.id.cmp(&b.object.id)));
    let water = scene.support.kind == SupportKind::WaterDynamic;
    let phases = {
        let mut rng = ChaCha8Rng::seed_from_u64(scene.ripple_seed ^ time.wrapping_mul(0x9E37_79B9));
        (rng.random_range(0.0..std::f64::consts::TAU), rng.random_range(0.0..std::f64::consts::TAU))
    };
    let gain = scene.lighting_gain as f32;
    let mut img = Image::new(cam.rows, cam.cols);
    for r in 0..cam.rows {
        for c in 0..cam.cols {
            let (mut u, mut v) = (c as f64, r as f64);
            if water {
                let k = std::f64::consts::TAU / RIPPLE_PERIOD_PX;
                let du = RIPPLE_AMPLITUDE_PX * (k * v + phases.0).sin();
                let dv = RIPPLE_AMPLITUDE_PX * (k * u + phases.1).sin();
                u += du;
                v += dv;
            }
            let s = Vec2::new(u, v);
            let hit = projected.iter().find_map(|pr| {
                if !pr.bounds.contains(s) {
                    return None;
                }
                let p = cam.image_to_world(u, v, pr.object.top_height).ok()?;
                pr.object.footprint.contains(p).then_some((pr, p))
            });
            let plain = scale(background_at(scene, cam, u, v), gain);
            let color = match hit {
                None => plain,
                Some((pr, p)) => {
                    let (cu, cv) = pr.center_px;
                    let w = WARP_STRENGTH_PX / pr.radius_px;
                    let (su, sv) = (u + (u - cu) * w, v + (v - cv) * w);
                    let interior = scale(background_at(scene, cam, su, sv), ATTENUATION * gain);
                    let edge_px = pr.object.footprint.boundary_distance(p) / pr.mm_per_px;
                    if !water && edge_px <= RIM_WIDTH_PX {
                        let m = |i: usize| plain[i].max(interior[i]) + RIM_CONTRAST;
                        [m(0), m(1), m(2)]
                    } else {
                        interior
                    }
                }
            };
            img.set(r, c, clamp01(color));
        }
    }
    img
}

/// Pixels whose line of sight hits object `id` first.
pub fn visible_mask(scene: &Scene, cam: &CameraModel, id: usize) -> crate::raster::Mask {
    let mut mask = crate::raster::Mask::new(cam.rows, cam.cols);
    let mut order: Vec<&ObjectInstance> = scene.objects.iter().collect();
    order.sort_by(|a, b| b.top_height.total_cmp(&a.top_height).then(a.id.cmp(&b.id)));
    for r in 0..cam.rows {
        for c in 0..cam.cols {
            let first = order.iter().find(|o| {
                cam.image_to_world(c as f64, r as f64, o.top_height).is_ok_and(|p| o.footprint.contains(p))
            });
            mask.set(r, c, first.is_some_and(|o| o.id == id));
        }
    }
    mask
}
