//! Detection datasets, TGCNN training and GOD evaluation.

use serde::{Deserialize, Serialize};
use vistac_core::annotate::{make_label, object_mask, AnnotationMeta, GraspMap, LabelKind};
use vistac_core::detect::{extract_grasps, predict_map};
use vistac_core::geometry::{Rect, Vec2};
use vistac_core::imageio::{decode_ppm, encode_ppm};
use vistac_core::raster::{Image, Mask};
use vistac_core::worldsim::{generate_scene, render_rgb, BackgroundChoice, CameraModel, Scene, SceneSpec};
use vistac_core::CoreError;
use vistac_nnet::train::train_tgcnn_with;
use vistac_nnet::{recalibrate_batchnorm, AdamConfig, MapSample, OptimizerConfig, Tensor, TgcnnConfig, TgcnnModel, TrainConfig, TrainReport};

use crate::error::{HarnessError, Result};
use crate::god::{god, is_correct, Circle, GodDenominator, GodResult};

/// Background ids of held-out images start here.
pub const UNSEEN_BACKGROUND_BASE: u64 = 1 << 40;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct DetectionConfig {
    pub image_size: usize,
    /// Width of the camera footprint at `camera_plane`, mm.
    pub field_mm: f64,
    pub camera_plane: f64,
    pub train_images: usize,
    pub test_images: usize,
    pub train_classes: Vec<usize>,
    pub unseen_classes: Vec<usize>,
    pub backgrounds: u64,
    pub radius_range: (f64, f64),
    pub thickness_range: (f64, f64),
    pub r_max_px: f64,
    pub label: LabelKind,
    pub denominator: GodDenominator,
    pub model: TgcnnConfig,
    pub train: TrainConfig,
}

impl Default for DetectionConfig {
    fn default() -> Self {
        DetectionConfig {
            image_size: 96,
            field_mm: 200.0,
            camera_plane: 40.0,
            train_images: 500,
            test_images: 200,
            train_classes: vec![0, 1],
            unseen_classes: vec![2, 3, 4, 5],
            backgrounds: 40,
            radius_range: (20.0, 30.0),
            thickness_range: (30.0, 50.0),
            r_max_px: 24.0,
            label: LabelKind::Gaussian,
            denominator: GodDenominator::Iou,
            model: TgcnnConfig::default(),
            train: TrainConfig {
                optimizer: OptimizerConfig::Adam(AdamConfig::default()),
                batch_size: 8,
                epochs: 20,
                seed: 0,
            },
        }
    }
}

impl DetectionConfig {
    pub fn validate(&self) -> Result<()> {
        if self.image_size < 16 {
            return Err(HarnessError::Config("image_size must be at least 16".into()));
        }
        if self.train_classes.is_empty() {
            return Err(HarnessError::Config("train_classes is empty".into()));
        }
        if self.backgrounds == 0 {
            return Err(HarnessError::Config("backgrounds must be positive".into()));
        }
        if !(self.r_max_px > 0.0) {
            return Err(HarnessError::Config("r_max_px must be positive".into()));
        }
        Ok(())
    }

    pub fn camera(&self) -> Result<CameraModel> {
        Ok(CameraModel::nadir_covering(Vec2::ZERO, self.camera_plane, self.field_mm, self.image_size, self.image_size)?)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Split {
    Train,
    UnseenBackgrounds,
    UnseenClasses,
}

impl Split {
    pub fn name(self) -> &'static str {
        match self {
            Split::Train => "train",
            Split::UnseenBackgrounds => "unseen_backgrounds",
            Split::UnseenClasses => "unseen_classes",
        }
    }

    fn tag(self) -> u64 {
        match self {
            Split::Train => 1,
            Split::UnseenBackgrounds => 2,
            Split::UnseenClasses => 3,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DetectionSample {
    pub scene_seed: u64,
    pub background_id: u64,
    pub scene: Scene,
    pub image: Image,
    pub label: GraspMap,
    pub meta: AnnotationMeta,
}

impl DetectionSample {
    pub fn map_sample(&self) -> Result<MapSample<f32>> {
        let (h, w) = (self.image.rows, self.image.cols);
        let image = Tensor::from_vec(&[3, h, w], self.image.to_chw())?;
        let mut t = self.label.q.data.clone();
        t.extend_from_slice(&self.label.r.data);
        Ok(MapSample { image, target: Tensor::from_vec(&[2, h, w], t)? })
    }

    /// Union of the object masks as seen by the camera.
    pub fn object_mask(&self, cam: &CameraModel) -> Mask {
        let mut m = Mask::new(cam.rows, cam.cols);
        for o in &self.scene.objects {
            let om = object_mask(o, cam);
            for (a, &b) in m.data.iter_mut().zip(&om.data) {
                *a |= b;
            }
        }
        m
    }
}

/// SplitMix64 finaliser over a combined key.
pub fn mix_seed(a: u64, b: u64) -> u64 {
    let mut z = a ^ b.wrapping_add(0x9E37_79B9_7F4A_7C15).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// `count` single-object images of the split, a pure function of the arguments.
pub fn make_samples(cfg: &DetectionConfig, split: Split, count: usize, seed: u64, label: LabelKind) -> Result<Vec<DetectionSample>> {
    let classes = match split {
        Split::Train | Split::UnseenBackgrounds => &cfg.train_classes,
        Split::UnseenClasses => &cfg.unseen_classes,
    };
    if classes.is_empty() {
        return Err(HarnessError::Config(format!("no classes for split {}", split.name())));
    }
    let backgrounds = cfg.backgrounds;
    make_samples_with(cfg, classes, count, mix_seed(seed, split.tag()), label, |i| match split {
        Split::UnseenBackgrounds => (BackgroundChoice::Id(UNSEEN_BACKGROUND_BASE + i as u64), 1.0),
        _ => (BackgroundChoice::Id(i as u64 % backgrounds), 1.0),
    })
}

/// Single-object images whose background and lighting gain come from `scene_of(i)`.
pub fn make_samples_with(
    cfg: &DetectionConfig,
    classes: &[usize],
    count: usize,
    seed: u64,
    label: LabelKind,
    scene_of: impl Fn(usize) -> (BackgroundChoice, f64),
) -> Result<Vec<DetectionSample>> {
    cfg.validate()?;
    let cam = cfg.camera()?;
    let half = 0.375 * cfg.field_mm;
    let mut out = Vec::with_capacity(count);
    for i in 0..count {
        let (background, lighting_gain) = scene_of(i);
        let background_id = match background {
            BackgroundChoice::Id(id) | BackgroundChoice::FamilyId(_, id) => id,
            _ => u64::MAX,
        };
        let spec = SceneSpec {
            object_count: 1,
            class_pool: classes.to_vec(),
            background,
            lighting_gain,
            workspace: Rect::centered(Vec2::ZERO, 2.0 * half, 2.0 * half),
            radius_range: cfg.radius_range,
            thickness_range: cfg.thickness_range,
            ..SceneSpec::default()
        };
        let mut attempt = 0u64;
        loop {
            let scene_seed = mix_seed(seed, (i as u64) << 8 | attempt);
            let scene = generate_scene(&spec, scene_seed)?;
            match make_label(&scene, &cam, cfg.r_max_px, label) {
                Ok((map, meta)) => {
                    // 8-bit like a camera frame, so samples survive a disk round trip unchanged
                    let image = decode_ppm(&encode_ppm(&render_rgb(&scene, &cam)))?;
                    out.push(DetectionSample { scene_seed, background_id, scene, image, label: map, meta });
                    break;
                }
                Err(CoreError::AnnotationClipped { .. }) if attempt < 32 => attempt += 1,
                Err(e) => return Err(e.into()),
            }
        }
    }
    Ok(out)
}

pub fn train_detector(
    cfg: &DetectionConfig,
    samples: &[DetectionSample],
    mut on_epoch: impl FnMut(usize, f64),
) -> Result<(TgcnnModel<f32>, TrainReport)> {
    let data = samples.iter().map(DetectionSample::map_sample).collect::<Result<Vec<_>>>()?;
    let mut model = TgcnnModel::new(cfg.model, mix_seed(cfg.train.seed, 0x7C));
    let report = train_tgcnn_with(&mut model, &data, &cfg.train, &mut on_epoch)?;
    recalibrate_batchnorm(&mut model, &data, cfg.train.batch_size)?;
    Ok((model, report))
}

/// GOD of the best candidate of a predicted map against the sample's objects.
pub fn score_map(map: &GraspMap, sample: &DetectionSample, cfg: &DetectionConfig, cam: &CameraModel) -> Result<GodResult> {
    let mask = sample.object_mask(cam);
    let argmax_dist = match map.q.argmax() {
        Some((r, c)) => sample
            .meta
            .objects
            .iter()
            .map(|a| (c as f64 - a.center.0).hypot(r as f64 - a.center.1))
            .fold(f64::INFINITY, f64::min),
        None => f64::INFINITY,
    };
    let circle = extract_grasps(&map.q, &map.r, 1, cfg.r_max_px)
        .first()
        .map(|g| Circle { u: g.u, v: g.v, r: g.r_px });
    let value = match circle {
        Some(c) if c.r > 0.0 => god(&c, &mask, cfg.denominator)?,
        _ => 0.0,
    };
    Ok(GodResult { circle, god: value, correct: is_correct(value), argmax_dist })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DetectionMetrics {
    pub n: usize,
    pub accuracy: f64,
    pub mean_god: f64,
    pub mean_argmax_dist: f64,
}

impl DetectionMetrics {
    pub fn from_results(results: &[GodResult]) -> Self {
        let n = results.len().max(1) as f64;
        DetectionMetrics {
            n: results.len(),
            accuracy: results.iter().filter(|r| r.correct).count() as f64 / n,
            mean_god: results.iter().map(|r| r.god).sum::<f64>() / n,
            mean_argmax_dist: results.iter().map(|r| r.argmax_dist).sum::<f64>() / n,
        }
    }
}

pub fn evaluate(
    model: &TgcnnModel<f32>,
    samples: &[DetectionSample],
    cfg: &DetectionConfig,
) -> Result<(DetectionMetrics, Vec<GraspMap>, Vec<GodResult>)> {
    let cam = cfg.camera()?;
    let mut maps = Vec::with_capacity(samples.len());
    let mut results = Vec::with_capacity(samples.len());
    for s in samples {
        let map = predict_map(model, &s.image)?;
        results.push(score_map(&map, s, cfg, &cam)?);
        maps.push(map);
    }
    Ok((DetectionMetrics::from_results(&results), maps, results))
}
