//! Visual-tactile classification of a grasped object.
//!
//! A bias-free MLP reads a 32x32 RGB crop around the grasp point together
//! with a radial contour signature of the tactile contact region. Zeroing
//! one modality gives the visual-only and tactile-only baselines.

use std::f64::consts::PI;
use std::path::Path;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};
use vistac_nnet::loss::{cross_entropy_grad, softmax};
use vistac_nnet::{checkpoint, Mlp, Mode, Module, Sgd, SgdConfig, Tensor};

use crate::error::{CoreError, Result};
use crate::geometry::{Rect, Vec2};
use crate::grasp::GripperSpec;
use crate::strategy::GraspClassifier;
use crate::tactile::{adaptive_drop_height, contact_region, sense, AhdConfig, ContactRegion, SensorNoise};
use crate::worldsim::{class_shape, render_rgb, Background, CameraModel, ObjectInstance, Scene, SupportField, TextureFamily, NUM_CLASSES};

pub const CROP_SIDE: usize = 32;
/// World width covered by the visual crop, mm.
pub const CROP_FIELD_MM: f64 = 64.0;
pub const VISUAL_DIM: usize = 3 * CROP_SIDE * CROP_SIDE;
pub const RADIAL_BINS: usize = 64;
pub const TACTILE_DIM: usize = RADIAL_BINS + 2;
pub const INPUT_DIM: usize = VISUAL_DIM + TACTILE_DIM;
pub const HIDDEN: [usize; 2] = [128, 64];
/// Input scale of the tactile block relative to the centred pixels.
pub const TACTILE_GAIN: f32 = 4.0;
const CHECKPOINT_KIND: &str = "fusion-mlp";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Ablation {
    VisualOnly,
    TactileOnly,
    Fusion,
}

impl Ablation {
    pub const ALL: [Ablation; 3] = [Ablation::VisualOnly, Ablation::TactileOnly, Ablation::Fusion];

    pub fn name(self) -> &'static str {
        match self {
            Ablation::VisualOnly => "visual_only",
            Ablation::TactileOnly => "tactile_only",
            Ablation::Fusion => "fusion",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FusionSample {
    /// CHW crop in [0, 1].
    pub visual: Vec<f32>,
    pub tactile: Vec<f32>,
    pub label: usize,
    pub background_id: u64,
}

impl FusionSample {
    /// Network input with the ablated modality zeroed. Pixels enter
    /// centred on mid-grey, the descriptor scaled by [`TACTILE_GAIN`].
    pub fn input(&self, ablation: Ablation) -> Vec<f32> {
        let mut x = Vec::with_capacity(INPUT_DIM);
        match ablation {
            Ablation::TactileOnly => x.extend(std::iter::repeat(0.0).take(VISUAL_DIM)),
            _ => x.extend(self.visual.iter().map(|v| v - 0.5)),
        }
        match ablation {
            Ablation::VisualOnly => x.extend(std::iter::repeat(0.0).take(TACTILE_DIM)),
            _ => x.extend(self.tactile.iter().map(|v| v * TACTILE_GAIN)),
        }
        x
    }
}

/// Radial contour signature of a contact region.
///
/// For each of 64 angular bins about the enclosing-circle centre, the
/// largest pixel distance in that bin; the signature is rotated so its
/// largest bin comes first and scaled to unit max. Two scalars follow:
/// the fill ratio `area / (pi R^2)` and `R / rho`. Coordinates are taken
/// relative to the region's bounding box, so translating the region leaves
/// the descriptor bitwise unchanged.
pub fn tactile_descriptor(region: &ContactRegion, g: &GripperSpec) -> Vec<f32> {
    let mut out = vec![0.0f32; TACTILE_DIM];
    if region.pixels.is_empty() {
        return out;
    }
    let r0 = region.pixels.iter().map(|p| p.0).min().unwrap_or(0);
    let c0 = region.pixels.iter().map(|p| p.1).min().unwrap_or(0);
    let pts: Vec<Vec2> = region
        .pixels
        .iter()
        .map(|&(r, c)| Vec2::new((c - c0) as f64, (r - r0) as f64))
        .collect();
    let mec = crate::tactile::min_enclosing_circle(&pts).expect("non-empty");
    let mut bins = [0.0f64; RADIAL_BINS];
    for p in &pts {
        let d = *p - mec.center;
        let a = d.y.atan2(d.x).rem_euclid(2.0 * PI);
        let k = ((a / (2.0 * PI) * RADIAL_BINS as f64) as usize).min(RADIAL_BINS - 1);
        bins[k] = bins[k].max(d.norm());
    }
    let (arg, max) = bins
        .iter()
        .enumerate()
        .fold((0, 0.0), |(bi, bv), (i, &v)| if v > bv { (i, v) } else { (bi, bv) });
    if max > 0.0 {
        for k in 0..RADIAL_BINS {
            out[k] = (bins[(arg + k) % RADIAL_BINS] / max) as f32;
        }
    }
    let radius_px = mec.radius.max(0.5);
    out[RADIAL_BINS] = (pts.len() as f64 / (PI * radius_px * radius_px)) as f32;
    out[RADIAL_BINS + 1] = (radius_px / g.px_per_mm / g.radius) as f32;
    out
}

/// 32x32 nadir rendering centred on `p`, CHW in [0, 1].
pub fn visual_crop(scene: &Scene, p: Vec2) -> Result<Vec<f32>> {
    let plane = scene.top_at(p).unwrap_or(scene.support.base_height);
    let cam = CameraModel::nadir_covering(p, plane, CROP_FIELD_MM, CROP_SIDE, CROP_SIDE)?;
    Ok(render_rgb(scene, &cam).to_chw())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BackgroundCondition {
    /// Solid and smooth-noise backgrounds under nominal lighting.
    Standard,
    /// Striped, checkered and noisy backgrounds, varied lighting and pixel noise.
    Heavy,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct FusionDataConfig {
    pub train_per_class: usize,
    pub test_per_class: usize,
    /// Distinct backgrounds in each split.
    pub backgrounds: usize,
    pub condition: BackgroundCondition,
    pub classes: Vec<usize>,
    pub radius_range: (f64, f64),
    pub thickness_range: (f64, f64),
    /// Residual gripper offset after calibration, mm.
    pub max_offset: f64,
    pub noise_rate: f64,
    pub ahd: AhdConfig,
}

impl Default for FusionDataConfig {
    fn default() -> Self {
        FusionDataConfig {
            train_per_class: 100,
            test_per_class: 50,
            backgrounds: 40,
            condition: BackgroundCondition::Standard,
            classes: (0..NUM_CLASSES).collect(),
            radius_range: (15.0, 24.0),
            thickness_range: (30.0, 50.0),
            max_offset: 1.5,
            noise_rate: 0.01,
            ahd: AhdConfig::default(),
        }
    }
}

/// Test background ids start here, so the two splits never share one.
pub const TEST_BACKGROUND_BASE: u64 = 1 << 40;

fn background_for(condition: BackgroundCondition, id: u64) -> Background {
    let families: &[TextureFamily] = match condition {
        BackgroundCondition::Standard => &[TextureFamily::Solid, TextureFamily::SmoothNoise],
        BackgroundCondition::Heavy => &[TextureFamily::Stripes, TextureFamily::Checker, TextureFamily::SmoothNoise],
    };
    let family = families[(id % families.len() as u64) as usize];
    match (condition, Background::from_id(id, family)) {
        // heavy textures are fine-grained so edges compete with the rim
        (BackgroundCondition::Heavy, Background::Stripes { period, angle, a, b }) => {
            Background::Stripes { period: period * 0.25, angle, a, b }
        }
        (BackgroundCondition::Heavy, Background::Checker { cell, angle, a, b }) => {
            Background::Checker { cell: cell * 0.25, angle, a, b }
        }
        (BackgroundCondition::Heavy, Background::SmoothNoise { seed, scale, a, b }) => {
            Background::SmoothNoise { seed, scale: scale * 0.15, a, b }
        }
        (_, bg) => bg,
    }
}

fn sample_seed(seed: u64, split: u64, class_id: usize, k: usize) -> u64 {
    let mut z = seed ^ split.wrapping_mul(0x9E37_79B9_7F4A_7C15) ^ ((class_id as u64) << 32) ^ k as u64;
    z = (z ^ (z >> 31)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z ^ (z >> 29)
}

/// One grasped-object observation: a single object on a flat table, sensed
/// at the adaptive press depth from a nearly centred gripper.
pub fn make_sample(cfg: &FusionDataConfig, g: &GripperSpec, class_id: usize, background_id: u64, seed: u64) -> Result<FusionSample> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..100 {
        let r = rng.random_range(cfg.radius_range.0..=cfg.radius_range.1);
        let center = Vec2::new(rng.random_range(-50.0..50.0), rng.random_range(-50.0..50.0));
        let footprint = class_shape(class_id, r).rotate(rng.random_range(0.0..2.0 * PI)).translate(center);
        let top = rng.random_range(cfg.thickness_range.0..=cfg.thickness_range.1);
        let gain = match cfg.condition {
            BackgroundCondition::Standard => 1.0,
            BackgroundCondition::Heavy => rng.random_range(0.5..1.6),
        };
        let scene = Scene {
            support: SupportField::flat(0.0),
            objects: vec![ObjectInstance {
                id: 0,
                class_id,
                footprint,
                top_height: top,
                base_on_support: true,
                graspable_diameter: 2.0 * r,
            }],
            background: background_for(cfg.condition, background_id),
            lighting_gain: gain,
            workspace: Rect::centered(Vec2::ZERO, 400.0, 400.0),
            allow_overlap: false,
            ripple_seed: 0,
        };
        let c = scene.objects[0].centroid();
        let off = Vec2::new(cfg.max_offset * rng.random::<f64>(), 0.0).rotate(rng.random_range(0.0..2.0 * PI));
        let p = c + off;
        let r_hat = r * rng.random_range(0.85..1.15);
        let h = adaptive_drop_height(r_hat, top, &cfg.ahd);
        let frame = sense(&scene, g, p, h, SensorNoise::new(cfg.noise_rate, rng.random()))?;
        let Some(region) = contact_region(&frame, g) else { continue };
        let mut visual = visual_crop(&scene, p)?;
        if cfg.condition == BackgroundCondition::Heavy {
            let n = Normal::new(0.0f32, 0.04).expect("positive sigma");
            visual.iter_mut().for_each(|v| *v = (*v + n.sample(&mut rng)).clamp(0.0, 1.0));
        }
        return Ok(FusionSample { visual, tactile: tactile_descriptor(&region, g), label: class_id, background_id });
    }
    Err(CoreError::NoContact)
}

/// Deterministic train/test split; test backgrounds are disjoint from train.
pub fn make_dataset(cfg: &FusionDataConfig, g: &GripperSpec, seed: u64) -> Result<(Vec<FusionSample>, Vec<FusionSample>)> {
    if cfg.backgrounds == 0 || cfg.classes.is_empty() {
        return Err(CoreError::Config("fusion dataset needs classes and backgrounds".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let bg_offset: u64 = rng.random_range(0..1 << 30);
    let split = |n: usize, base: u64, tag: u64| -> Result<Vec<FusionSample>> {
        let mut out = Vec::with_capacity(n * cfg.classes.len());
        for k in 0..n {
            for &c in &cfg.classes {
                let s = sample_seed(seed, tag, c, k);
                let bg = base + bg_offset + (s % cfg.backgrounds as u64);
                out.push(make_sample(cfg, g, c, bg, s)?);
            }
        }
        Ok(out)
    };
    let train = split(cfg.train_per_class, 0, 1)?;
    let test = split(cfg.test_per_class, TEST_BACKGROUND_BASE, 2)?;
    Ok((train, test))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct FusionTrainConfig {
    pub sgd: SgdConfig,
    pub batch_size: usize,
    pub epochs: usize,
    pub seed: u64,
}

impl Default for FusionTrainConfig {
    fn default() -> Self {
        FusionTrainConfig { sgd: SgdConfig { lr: 1e-3, momentum: 0.9, weight_decay: 1e-4 }, batch_size: 16, epochs: 40, seed: 0 }
    }
}

#[derive(Debug, Clone)]
pub struct FusionClassifier {
    pub mlp: Mlp<f32>,
    pub ablation: Ablation,
    pub gripper: GripperSpec,
}

fn batch(samples: &[&FusionSample], ablation: Ablation) -> Tensor<f32> {
    let mut data = Vec::with_capacity(samples.len() * INPUT_DIM);
    for s in samples {
        data.extend(s.input(ablation));
    }
    Tensor::from_vec(&[samples.len(), INPUT_DIM], data).expect("consistent shape")
}

impl FusionClassifier {
    pub fn new(ablation: Ablation, gripper: GripperSpec, seed: u64) -> Self {
        let sizes = [INPUT_DIM, HIDDEN[0], HIDDEN[1], NUM_CLASSES];
        FusionClassifier { mlp: Mlp::new(&sizes, seed), ablation, gripper }
    }

    /// Class probabilities for a raw input vector of length [`INPUT_DIM`].
    pub fn probabilities(&self, input: &[f32]) -> Result<Vec<f64>> {
        if input.len() != INPUT_DIM {
            return Err(CoreError::Config(format!("input has {} values, expected {INPUT_DIM}", input.len())));
        }
        let x = Tensor::from_vec(&[1, INPUT_DIM], input.to_vec())?;
        let p = softmax(&self.mlp.logits(&x)?)?;
        Ok(p.data.iter().map(|&v| v as f64).collect())
    }

    /// Most probable class and its probability.
    pub fn classify(&self, sample: &FusionSample) -> Result<(usize, f64)> {
        let p = self.probabilities(&sample.input(self.ablation))?;
        Ok(argmax(&p))
    }

    pub fn accuracy(&self, samples: &[FusionSample]) -> Result<f64> {
        if samples.is_empty() {
            return Ok(0.0);
        }
        let mut correct = 0;
        for chunk in samples.chunks(64) {
            let refs: Vec<&FusionSample> = chunk.iter().collect();
            let p = softmax(&self.mlp.logits(&batch(&refs, self.ablation))?)?;
            for (row, s) in p.data.chunks(NUM_CLASSES).zip(chunk) {
                let row: Vec<f64> = row.iter().map(|&v| v as f64).collect();
                if argmax(&row).0 == s.label {
                    correct += 1;
                }
            }
        }
        Ok(correct as f64 / samples.len() as f64)
    }

    pub fn save(&self, stem: &Path) -> Result<()> {
        let config = serde_json::json!({ "ablation": self.ablation, "gripper": self.gripper });
        checkpoint::save(&self.mlp, CHECKPOINT_KIND, config, stem)?;
        Ok(())
    }

    pub fn load(stem: &Path) -> Result<Self> {
        let manifest = checkpoint::read_manifest(stem)?;
        if manifest.kind != CHECKPOINT_KIND {
            return Err(CoreError::Format(format!("checkpoint holds `{}`, not a fusion classifier", manifest.kind)));
        }
        let ablation: Ablation = serde_json::from_value(manifest.config["ablation"].clone())?;
        let gripper: GripperSpec = serde_json::from_value(manifest.config["gripper"].clone())?;
        let mut clf = FusionClassifier::new(ablation, gripper, 0);
        checkpoint::load(&mut clf.mlp, stem)?;
        Ok(clf)
    }
}

fn argmax(p: &[f64]) -> (usize, f64) {
    p.iter()
        .enumerate()
        .fold((0, f64::NEG_INFINITY), |(bi, bv), (i, &v)| if v > bv { (i, v) } else { (bi, bv) })
}

/// Trains with cross-entropy and reports held-out accuracy.
///
/// Every class present in `test` must also occur in `train`.
pub fn train_classifier(
    train: &[FusionSample],
    test: &[FusionSample],
    gripper: &GripperSpec,
    cfg: &FusionTrainConfig,
    ablation: Ablation,
) -> Result<(FusionClassifier, f64)> {
    if train.is_empty() {
        return Err(CoreError::Config("empty training set".into()));
    }
    let mut present = [false; NUM_CLASSES];
    for s in train {
        if s.label >= NUM_CLASSES {
            return Err(CoreError::ClassAbsent(s.label));
        }
        present[s.label] = true;
    }
    if let Some(s) = test.iter().find(|s| s.label >= NUM_CLASSES || !present[s.label]) {
        return Err(CoreError::ClassAbsent(s.label));
    }
    let mut clf = FusionClassifier::new(ablation, gripper.clone(), cfg.seed);
    let mut opt = Sgd::new(cfg.sgd);
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed ^ 0xC1A5);
    let mut order: Vec<usize> = (0..train.len()).collect();
    for _ in 0..cfg.epochs {
        order.shuffle(&mut rng);
        for idx in order.chunks(cfg.batch_size.max(1)) {
            let refs: Vec<&FusionSample> = idx.iter().map(|&i| &train[i]).collect();
            let labels: Vec<usize> = refs.iter().map(|s| s.label).collect();
            clf.mlp.zero_grad();
            let logits = clf.mlp.forward(&batch(&refs, ablation), Mode::Train)?;
            let (_, grad) = cross_entropy_grad(&logits, &labels)?;
            clf.mlp.backward(&grad)?;
            opt.step(&mut clf.mlp);
        }
    }
    let acc = clf.accuracy(test)?;
    Ok((clf, acc))
}

/// Classifies during an episode from the live scene and contact region.
impl GraspClassifier for FusionClassifier {
    fn classify(&self, scene: &Scene, p: Vec2, region: &ContactRegion) -> Result<(usize, f64)> {
        let sample = FusionSample {
            visual: visual_crop(scene, p)?,
            tactile: tactile_descriptor(region, &self.gripper),
            label: 0,
            background_id: 0,
        };
        FusionClassifier::classify(self, &sample)
    }
}
