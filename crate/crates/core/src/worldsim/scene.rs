use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{CoreError, Result};
use crate::geometry::{Polygon, Rect, Vec2};
use crate::worldsim::support::SupportField;
use crate::worldsim::texture::{Background, TextureFamily};

pub const NUM_CLASSES: usize = 6;
pub const PLACEMENT_ATTEMPTS: usize = 1000;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ObjectInstance {
    pub id: usize,
    pub class_id: usize,
    pub footprint: Polygon,
    pub top_height: f64,
    pub base_on_support: bool,
    pub graspable_diameter: f64,
}

impl ObjectInstance {
    pub fn centroid(&self) -> Vec2 {
        self.footprint.centroid()
    }
}

/// Footprint of class `class_id` with circumradius `r`, centred at the origin.
///
/// Classes: 0 disc, 1 square, 2 ellipse, 3 hexagon, 4 five-point star,
/// 5 stadium. All contain their own centre.
pub fn class_shape(class_id: usize, r: f64) -> Polygon {
    match class_id {
        0 => Polygon::regular(64, r, 0.0),
        1 => Polygon::regular(4, r, PI / 4.0),
        2 => Polygon::new(
            (0..64)
                .map(|i| {
                    let t = 2.0 * PI * i as f64 / 64.0;
                    Vec2::new(r * t.cos(), 0.7 * r * t.sin())
                })
                .collect(),
        ),
        3 => Polygon::regular(6, r, 0.0),
        4 => Polygon::new(
            (0..10)
                .map(|i| {
                    let t = PI / 2.0 + PI * i as f64 / 5.0;
                    let rr = if i % 2 == 0 { r } else { 0.7 * r };
                    Vec2::new(rr * t.cos(), rr * t.sin())
                })
                .collect(),
        ),
        5 => {
            let half_w = 0.6 * r;
            let c = r - half_w;
            let mut v = Vec::with_capacity(34);
            for i in 0..=16 {
                let t = -PI / 2.0 + PI * i as f64 / 16.0;
                v.push(Vec2::new(c + half_w * t.cos(), half_w * t.sin()));
            }
            for i in 0..=16 {
                let t = PI / 2.0 + PI * i as f64 / 16.0;
                v.push(Vec2::new(-c + half_w * t.cos(), half_w * t.sin()));
            }
            Polygon::new(v)
        }
        _ => panic!("unknown class {class_id}"),
    }
}

/// Random star-shaped polygon standing in for a glass fragment.
pub fn fragment_shape<R: Rng>(rng: &mut R, r: f64) -> Polygon {
    let n = rng.random_range(7..=12);
    let mut angles: Vec<f64> = (0..n)
        .map(|i| (i as f64 + rng.random_range(0.15..0.85)) * 2.0 * PI / n as f64)
        .collect();
    angles.sort_by(f64::total_cmp);
    Polygon::new(
        angles
            .iter()
            .map(|&a| {
                let rr = r * rng.random_range(0.55..1.0);
                Vec2::new(rr * a.cos(), rr * a.sin())
            })
            .collect(),
    )
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Layout {
    /// Footprints never overlap.
    Separate,
    /// Objects come in pairs, the second resting near the centre of the first.
    Stacked,
    /// Pairs where the upper object rests across the edge of the lower one.
    Overlap,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BackgroundChoice {
    Fixed(Background),
    /// Background number `id`, family cycling with the id.
    Id(u64),
    /// Background number `id` of a fixed family.
    FamilyId(TextureFamily, u64),
    /// Drawn from the scene seed.
    Random,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SceneSpec {
    pub support: SupportField,
    pub object_count: usize,
    pub class_pool: Vec<usize>,
    pub background: BackgroundChoice,
    pub workspace: Rect,
    pub layout: Layout,
    /// Circumradius range, mm.
    pub radius_range: (f64, f64),
    /// Object thickness range, mm.
    pub thickness_range: (f64, f64),
    pub fragments: bool,
    pub lighting_gain: f64,
    /// Minimum clearance between separate footprints, mm.
    pub min_gap: f64,
}

impl Default for SceneSpec {
    fn default() -> Self {
        SceneSpec {
            support: SupportField::flat(0.0),
            object_count: 1,
            class_pool: (0..NUM_CLASSES).collect(),
            background: BackgroundChoice::Random,
            workspace: Rect::centered(Vec2::ZERO, 400.0, 400.0),
            layout: Layout::Separate,
            radius_range: (20.0, 30.0),
            thickness_range: (30.0, 50.0),
            fragments: false,
            lighting_gain: 1.0,
            min_gap: 10.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scene {
    pub support: SupportField,
    pub objects: Vec<ObjectInstance>,
    pub background: Background,
    pub lighting_gain: f64,
    pub workspace: Rect,
    pub allow_overlap: bool,
    /// Phase seed of the water ripple.
    pub ripple_seed: u64,
}

impl Scene {
    pub fn object(&self, id: usize) -> Option<&ObjectInstance> {
        self.objects.iter().find(|o| o.id == id)
    }

    pub fn remove_object(&mut self, id: usize) -> Option<ObjectInstance> {
        let i = self.objects.iter().position(|o| o.id == id)?;
        Some(self.objects.remove(i))
    }

    /// Highest object top covering `p`, if any.
    pub fn top_at(&self, p: Vec2) -> Option<f64> {
        self.objects
            .iter()
            .filter(|o| o.footprint.contains(p))
            .map(|o| o.top_height)
            .fold(None, |acc, h| Some(acc.map_or(h, |a: f64| a.max(h))))
    }
}

fn validate(spec: &SceneSpec) -> Result<()> {
    if spec.object_count > 0 && spec.class_pool.is_empty() {
        return Err(CoreError::Config("empty class pool".into()));
    }
    if let Some(&c) = spec.class_pool.iter().find(|&&c| c >= NUM_CLASSES) {
        return Err(CoreError::Config(format!("class {c} out of range")));
    }
    let (r0, r1) = spec.radius_range;
    let (t0, t1) = spec.thickness_range;
    if !(r0 > 0.0 && r0 <= r1 && t0 > 0.0 && t0 <= t1) {
        return Err(CoreError::Config("bad radius or thickness range".into()));
    }
    if !(0.1..=2.5).contains(&spec.lighting_gain) {
        return Err(CoreError::Config(format!("lighting gain {} outside [0.1, 2.5]", spec.lighting_gain)));
    }
    Ok(())
}

fn range<R: Rng>(rng: &mut R, (lo, hi): (f64, f64)) -> f64 {
    if hi > lo {
        rng.random_range(lo..hi)
    } else {
        lo
    }
}

fn make_shape<R: Rng>(rng: &mut R, spec: &SceneSpec, class_id: usize, r: f64) -> Polygon {
    let shape = if spec.fragments { fragment_shape(rng, r) } else { class_shape(class_id, r) };
    shape.rotate(rng.random_range(0.0..2.0 * PI))
}

/// Procedurally generates a scene; a pure function of `(spec, seed)`.
pub fn generate_scene(spec: &SceneSpec, seed: u64) -> Result<Scene> {
    validate(spec)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let background = match &spec.background {
        BackgroundChoice::Fixed(b) => b.clone(),
        BackgroundChoice::Id(id) => Background::from_id_mixed(*id),
        BackgroundChoice::FamilyId(f, id) => Background::from_id(*id, *f),
        BackgroundChoice::Random => Background::from_id_mixed(rng.random()),
    };
    let ripple_seed = rng.random();
    let piles: Vec<usize> = match spec.layout {
        Layout::Separate => vec![1; spec.object_count],
        Layout::Stacked | Layout::Overlap => {
            let mut p = vec![2; spec.object_count / 2];
            if spec.object_count % 2 == 1 {
                p.push(1);
            }
            p
        }
    };

    let mut objects: Vec<ObjectInstance> = Vec::new();
    let mut circles: Vec<(Vec2, f64)> = Vec::new();
    let mut attempts = 0;
    for pile in piles {
        loop {
            attempts += 1;
            if attempts > PLACEMENT_ATTEMPTS {
                return Err(CoreError::PlacementFailed { count: spec.object_count, attempts: PLACEMENT_ATTEMPTS });
            }
            let class_id = spec.class_pool[rng.random_range(0..spec.class_pool.len())];
            let r = range(&mut rng, spec.radius_range);
            let shape = make_shape(&mut rng, spec, class_id, r);
            let ws = spec.workspace;
            if ws.width() <= 2.0 * r || ws.height() <= 2.0 * r {
                continue;
            }
            let center = Vec2::new(
                rng.random_range(ws.min.x + r..ws.max.x - r),
                rng.random_range(ws.min.y + r..ws.max.y - r),
            );
            let bound_r = shape.radius_about(Vec2::ZERO);
            if circles.iter().any(|&(c, cr)| c.dist(center) < cr + bound_r + spec.min_gap) {
                continue;
            }
            let footprint = shape.translate(center);
            let thickness = range(&mut rng, spec.thickness_range);
            let top = spec.support.max_under(&footprint) + thickness;
            let lower = make_object(objects.len(), class_id, footprint, top, true);
            let mut pile_radius = bound_r;
            let mut placed = vec![lower];
            if pile == 2 {
                let class2 = spec.class_pool[rng.random_range(0..spec.class_pool.len())];
                let r2 = range(&mut rng, (spec.radius_range.0, spec.radius_range.1.min(r))).min(r);
                let shape2 = make_shape(&mut rng, spec, class2, r2);
                let off = match spec.layout {
                    Layout::Overlap => rng.random_range(0.4..0.7) * r,
                    _ => rng.random_range(0.0..0.2) * r,
                };
                let center2 = center + Vec2::new(off, 0.0).rotate(rng.random_range(0.0..2.0 * PI));
                let footprint2 = shape2.translate(center2);
                if !ws.contains(center2) || footprint2.vertices.iter().any(|&v| !ws.contains(v)) {
                    continue;
                }
                let thickness2 = range(&mut rng, spec.thickness_range);
                let top2 = top + thickness2;
                pile_radius = pile_radius.max(off + shape2.radius_about(Vec2::ZERO));
                placed.push(make_object(objects.len() + 1, class2, footprint2, top2, false));
                if circles.iter().any(|&(c, cr)| c.dist(center) < cr + pile_radius + spec.min_gap) {
                    continue;
                }
            }
            circles.push((center, pile_radius));
            objects.extend(placed);
            break;
        }
    }
    Ok(Scene {
        support: spec.support.clone(),
        objects,
        background,
        lighting_gain: spec.lighting_gain,
        workspace: spec.workspace,
        allow_overlap: spec.layout != Layout::Separate,
        ripple_seed,
    })
}

fn make_object(id: usize, class_id: usize, footprint: Polygon, top_height: f64, base: bool) -> ObjectInstance {
    let graspable_diameter = footprint
        .diameter_pair()
        .map(|(a, b)| footprint.vertices[a].dist(footprint.vertices[b]))
        .unwrap_or(0.0);
    ObjectInstance { id, class_id, footprint, top_height, base_on_support: base, graspable_diameter }
}
