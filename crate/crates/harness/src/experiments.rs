//! Experiment runners E1–E7.

use std::time::Instant;

use vistac_core::annotate::{GraspMap, LabelKind};
use vistac_core::detect::{Detector, OracleDetector, TrainedDetector};
use vistac_core::fuse::{make_dataset, train_classifier, Ablation, BackgroundCondition, FusionClassifier};
use vistac_core::geometry::{Polygon, Rect, Vec2};
use vistac_core::raster::Raster;
use vistac_core::strategy::{run_episode, AttemptOutcome, EpisodeRecord, GraspClassifier, Setup, StrategyConfig, StrategyMode};
use vistac_core::worldsim::{
    generate_scene, BackgroundChoice, CameraModel, Layout, Scene, SceneSpec, SupportField, TextureFamily,
};
use vistac_nnet::TgcnnModel;

use crate::config::{DetectorChoice, HarnessConfig};
use crate::dataset_io::load_detector;
use crate::detection::{
    evaluate, make_samples, make_samples_with, mix_seed, score_map, train_detector, DetectionConfig, DetectionMetrics,
    Split, UNSEEN_BACKGROUND_BASE,
};
use crate::error::Result;
use crate::report::{Condition, ExperimentId, ExperimentReport};

/// Models and maps produced alongside a report.
#[derive(Default)]
pub struct RunOutput {
    pub detector: Option<TgcnnModel<f32>>,
    /// Predicted Q maps keyed by `<condition>_<index>`.
    pub heatmaps: Vec<(String, Raster)>,
}

/// Inputs that can be supplied instead of trained inside the run.
#[derive(Default)]
pub struct Artifacts {
    pub detector: Option<TgcnnModel<f32>>,
    /// Number of predicted maps per condition to keep for dumping.
    pub keep_heatmaps: usize,
}

/// Evaluates `f(0..n)` on up to `threads` scoped threads; results come back in index order.
pub fn par_map<T: Send, F>(n: usize, threads: usize, f: F) -> Result<Vec<T>>
where
    F: Fn(usize) -> Result<T> + Sync,
{
    let threads = threads.clamp(1, n.max(1));
    if threads == 1 {
        return (0..n).map(&f).collect();
    }
    let chunk = n.div_ceil(threads);
    let parts: Vec<Result<Vec<T>>> = std::thread::scope(|s| {
        let handles: Vec<_> = (0..threads)
            .map(|t| {
                let f = &f;
                s.spawn(move || (t * chunk..((t + 1) * chunk).min(n)).map(f).collect::<Result<Vec<T>>>())
            })
            .collect();
        handles.into_iter().map(|h| h.join().expect("worker panicked")).collect()
    });
    let mut out = Vec::with_capacity(n);
    for p in parts {
        out.extend(p?);
    }
    Ok(out)
}

pub fn run_experiment(id: ExperimentId, cfg: &HarnessConfig) -> Result<ExperimentReport> {
    Ok(run_experiment_with(id, cfg, Artifacts::default())?.0)
}

pub fn run_experiment_with(id: ExperimentId, cfg: &HarnessConfig, artifacts: Artifacts) -> Result<(ExperimentReport, RunOutput)> {
    cfg.validate()?;
    let start = Instant::now();
    let mut out = RunOutput::default();
    let (conditions, seeds) = match id {
        ExperimentId::E1 => detection_experiment(
            cfg,
            &[Split::UnseenBackgrounds, Split::UnseenClasses],
            artifacts,
            &mut out,
        )?,
        ExperimentId::E1b => detection_experiment(cfg, &[Split::UnseenClasses], artifacts, &mut out)?,
        ExperimentId::E1c => label_ablation(cfg)?,
        ExperimentId::E2 => background_sweep(cfg, artifacts, &mut out)?,
        ExperimentId::E3 => lighting_sweep(cfg, artifacts, &mut out)?,
        ExperimentId::E4 => plane_grasping(cfg)?,
        ExperimentId::E5 => fragment_grasping(cfg)?,
        ExperimentId::E6 => irregular_scenes(cfg)?,
        ExperimentId::E7 => tpe_sweep(cfg)?,
    };
    let report = ExperimentReport {
        id,
        config: serde_json::to_value(cfg)?,
        seeds,
        conditions,
        wallclock_s: start.elapsed().as_secs_f64(),
    };
    Ok((report, out))
}

/// Re-runs a report from its embedded configuration and seeds.
pub fn rerun(report: &ExperimentReport) -> Result<ExperimentReport> {
    let cfg: HarnessConfig = serde_json::from_value(report.config.clone())?;
    run_experiment(report.id, &cfg)
}

fn metrics_condition(name: &str, m: &DetectionMetrics) -> Condition {
    Condition::new(name, m.n)
        .with("accuracy", m.accuracy)
        .with("mean_god", m.mean_god)
        .with("mean_argmax_dist_px", m.mean_argmax_dist)
}

fn keep_maps(out: &mut RunOutput, name: &str, maps: &[GraspMap], keep: usize) {
    for (i, m) in maps.iter().take(keep).enumerate() {
        out.heatmaps.push((format!("{name}_{i:03}"), m.q.clone()));
    }
}

fn obtain_detector(cfg: &HarnessConfig, artifacts: Artifacts, conditions: &mut Vec<Condition>) -> Result<TgcnnModel<f32>> {
    if let Some(m) = artifacts.detector {
        return Ok(m);
    }
    let d = &cfg.detection;
    let train = make_samples(d, Split::Train, d.train_images, cfg.seed, d.label)?;
    let (model, rep) = train_detector(d, &train, |_, _| {})?;
    conditions.push(
        Condition::new("training", train.len())
            .with("initial_loss", rep.initial_loss)
            .with("final_loss", rep.final_loss),
    );
    let (m, _, _) = evaluate(&model, &train[..train.len().min(d.test_images)], d)?;
    conditions.push(metrics_condition("train", &m));
    Ok(model)
}

fn detection_experiment(
    cfg: &HarnessConfig,
    splits: &[Split],
    artifacts: Artifacts,
    out: &mut RunOutput,
) -> Result<(Vec<Condition>, Vec<u64>)> {
    let d = &cfg.detection;
    let keep = artifacts.keep_heatmaps;
    let mut conditions = Vec::new();
    let model = obtain_detector(cfg, artifacts, &mut conditions)?;
    for &split in splits {
        let test = make_samples(d, split, d.test_images, cfg.seed, d.label)?;
        let (m, maps, _) = evaluate(&model, &test, d)?;
        keep_maps(out, split.name(), &maps, keep);
        conditions.push(metrics_condition(split.name(), &m));
    }
    out.detector = Some(model);
    Ok((conditions, vec![cfg.seed, d.train.seed]))
}

fn background_sweep(cfg: &HarnessConfig, artifacts: Artifacts, out: &mut RunOutput) -> Result<(Vec<Condition>, Vec<u64>)> {
    let d = &cfg.detection;
    let keep = artifacts.keep_heatmaps;
    let mut conditions = Vec::new();
    let model = obtain_detector(cfg, artifacts, &mut conditions)?;
    for (k, family) in TextureFamily::ALL.into_iter().enumerate() {
        let name = format!("{family:?}").to_lowercase();
        let test = make_samples_with(d, &d.train_classes, cfg.sweep.images_per_condition, mix_seed(cfg.seed, 20 + k as u64), d.label, |i| {
            (BackgroundChoice::FamilyId(family, UNSEEN_BACKGROUND_BASE + i as u64), 1.0)
        })?;
        let (m, maps, _) = evaluate(&model, &test, d)?;
        keep_maps(out, &name, &maps, keep);
        conditions.push(metrics_condition(&name, &m));
    }
    out.detector = Some(model);
    Ok((conditions, vec![cfg.seed, d.train.seed]))
}

fn lighting_sweep(cfg: &HarnessConfig, artifacts: Artifacts, out: &mut RunOutput) -> Result<(Vec<Condition>, Vec<u64>)> {
    let d = &cfg.detection;
    let keep = artifacts.keep_heatmaps;
    let mut conditions = Vec::new();
    let model = obtain_detector(cfg, artifacts, &mut conditions)?;
    for (k, &gain) in cfg.sweep.lighting_gains.iter().enumerate() {
        let name = format!("gain_{gain}");
        let test = make_samples_with(d, &d.train_classes, cfg.sweep.images_per_condition, mix_seed(cfg.seed, 30 + k as u64), d.label, |i| {
            (BackgroundChoice::Id(UNSEEN_BACKGROUND_BASE + i as u64), gain)
        })?;
        let (m, maps, _) = evaluate(&model, &test, d)?;
        keep_maps(out, &name, &maps, keep);
        conditions.push(metrics_condition(&name, &m).with("lighting_gain", gain));
    }
    out.detector = Some(model);
    Ok((conditions, vec![cfg.seed, d.train.seed]))
}

fn mean(v: &[f64]) -> f64 {
    if v.is_empty() {
        0.0
    } else {
        v.iter().sum::<f64>() / v.len() as f64
    }
}

pub fn label_name(kind: LabelKind) -> &'static str {
    match kind {
        LabelKind::Gaussian => "gaussian",
        LabelKind::Binary => "binary",
    }
}

fn label_ablation(cfg: &HarnessConfig) -> Result<(Vec<Condition>, Vec<u64>)> {
    let a = &cfg.ablation;
    let mut conditions = Vec::new();
    for kind in [LabelKind::Gaussian, LabelKind::Binary] {
        let (mut acc, mut dist) = (Vec::new(), Vec::new());
        let mut n = 0;
        for &seed in &a.seeds {
            let mut d: DetectionConfig = a.detection.clone();
            d.label = kind;
            d.train.seed = seed;
            let data_seed = mix_seed(cfg.seed, seed);
            let train = make_samples(&d, Split::Train, d.train_images, data_seed, kind)?;
            let test = make_samples(&d, Split::UnseenBackgrounds, d.test_images, data_seed, kind)?;
            let (model, _) = train_detector(&d, &train, |_, _| {})?;
            let (m, _, _) = evaluate(&model, &test, &d)?;
            conditions.push(metrics_condition(&format!("{}_seed{seed}", label_name(kind)), &m));
            acc.push(m.accuracy);
            dist.push(m.mean_argmax_dist);
            n += m.n;
        }
        conditions.push(
            Condition::new(label_name(kind), n)
                .with("accuracy", mean(&acc))
                .with("mean_argmax_dist_px", mean(&dist)),
        );
    }
    // the same comparison with labels standing in for a network
    let d = &a.detection;
    let cam = d.camera()?;
    for kind in [LabelKind::Gaussian, LabelKind::Binary] {
        let test = make_samples(d, Split::UnseenBackgrounds, a.oracle_images, mix_seed(cfg.seed, 0x0AC1E), kind)?;
        let mut results = Vec::with_capacity(test.len());
        for (i, s) in test.iter().enumerate() {
            let oracle = OracleDetector { label: kind, ..OracleDetector::new(d.r_max_px).with_jitter(a.oracle_jitter_mm, i as u64) };
            let map = oracle.detect(&s.scene, &cam)?;
            results.push(score_map(&map, s, d, &cam)?);
        }
        let m = DetectionMetrics::from_results(&results);
        conditions.push(metrics_condition(&format!("oracle_{}", label_name(kind)), &m));
    }
    Ok((conditions, std::iter::once(cfg.seed).chain(a.seeds.iter().copied()).collect()))
}

/// Detector used by grasping episodes.
pub enum EpisodeDetector {
    Oracle(OracleDetector),
    Trained(TrainedDetector),
}

impl Detector for EpisodeDetector {
    fn detect(&self, scene: &Scene, cam: &CameraModel) -> vistac_core::Result<GraspMap> {
        match self {
            EpisodeDetector::Oracle(d) => d.detect(scene, cam),
            EpisodeDetector::Trained(d) => d.detect(scene, cam),
        }
    }

    fn r_max(&self) -> f64 {
        match self {
            EpisodeDetector::Oracle(d) => d.r_max,
            EpisodeDetector::Trained(d) => d.r_max,
        }
    }
}

fn load_trained(cfg: &HarnessConfig) -> Result<Option<TrainedDetector>> {
    match &cfg.episodes.detector {
        DetectorChoice::Oracle => Ok(None),
        DetectorChoice::Trained { checkpoint } => Ok(Some(load_detector(checkpoint)?)),
    }
}

fn episode_camera(cfg: &HarnessConfig) -> Result<CameraModel> {
    let e = &cfg.episodes;
    Ok(CameraModel::nadir_covering(Vec2::ZERO, e.camera_plane, e.field_mm, e.image_size, e.image_size)?)
}

/// Per-episode summary used for aggregation.
#[derive(Debug, Clone, PartialEq)]
pub struct EpisodeSummary {
    pub objects: usize,
    pub successes: usize,
    pub calib_iters_success: Vec<usize>,
    pub classified: usize,
    pub classified_correct: usize,
    pub probes: usize,
    pub sim_time_ms: u64,
    pub not_found: bool,
    /// (declared contact height, true top) of every contact.
    pub contacts: Vec<(f64, f64)>,
    pub success_order: Vec<usize>,
}

pub fn summarize(rec: &EpisodeRecord, scene: &Scene) -> EpisodeSummary {
    let succ: Vec<_> = rec.attempts.iter().filter(|a| a.outcome == AttemptOutcome::Success).collect();
    let classified: Vec<_> = succ.iter().filter(|a| a.predicted_class.is_some()).collect();
    EpisodeSummary {
        objects: scene.objects.len(),
        successes: succ.len(),
        calib_iters_success: succ.iter().map(|a| a.calib_iters).collect(),
        classified: classified.len(),
        classified_correct: classified.iter().filter(|a| a.predicted_class == a.true_class).count(),
        probes: rec.probe_count,
        sim_time_ms: rec.sim_time_ms,
        not_found: rec.not_found,
        contacts: rec.attempts.iter().filter_map(|a| Some((a.contact_h?, a.true_top?))).collect(),
        success_order: succ.iter().filter_map(|a| a.object_id).collect(),
    }
}

fn grasp_condition(name: &str, eps: &[EpisodeSummary]) -> Condition {
    let objects: usize = eps.iter().map(|e| e.objects).sum();
    let successes: usize = eps.iter().map(|e| e.successes).sum();
    let calib: Vec<f64> = eps.iter().flat_map(|e| e.calib_iters_success.iter().map(|&c| c as f64)).collect();
    let classified: usize = eps.iter().map(|e| e.classified).sum();
    let correct: usize = eps.iter().map(|e| e.classified_correct).sum();
    let mut c = Condition::new(name, eps.len())
        .with("success_rate", if objects == 0 { 0.0 } else { successes as f64 / objects as f64 })
        .with("mean_calib", mean(&calib))
        .with("mean_probes", mean(&eps.iter().map(|e| e.probes as f64).collect::<Vec<_>>()))
        .with("mean_sim_time_s", mean(&eps.iter().map(|e| e.sim_time_ms as f64 / 1000.0).collect::<Vec<_>>()));
    if classified > 0 {
        c = c.with("classification_rate", correct as f64 / classified as f64);
    }
    c
}

struct EpisodeEnv<'a> {
    cam: &'a CameraModel,
    cfg: &'a HarnessConfig,
    trained: Option<&'a TrainedDetector>,
}

impl EpisodeEnv<'_> {
    fn detector(&self, jitter_mm: f64, seed: u64) -> Option<EpisodeDetector> {
        match self.trained {
            Some(t) => Some(EpisodeDetector::Trained(TrainedDetector { model: t.model.clone(), r_max: t.r_max })),
            None => Some(EpisodeDetector::Oracle(OracleDetector::new(self.cfg.episodes.r_max_px).with_jitter(jitter_mm, seed))),
        }
    }

    fn run(
        &self,
        scene: &Scene,
        strategy: &StrategyConfig,
        detector: Option<&EpisodeDetector>,
        classifier: Option<&dyn GraspClassifier>,
        scene_seed: u64,
    ) -> Result<EpisodeSummary> {
        let setup = Setup {
            cam: self.cam,
            gripper: &self.cfg.gripper,
            detector: detector.map(|d| d as &dyn Detector),
            classifier,
            scene_seed,
            policy_seed: mix_seed(scene_seed, 0x9011C7),
        };
        let rec = run_episode(scene, strategy, &setup)?;
        Ok(summarize(&rec, scene))
    }
}

/// Plane scenes place every top at the height vision-first grasping assumes.
fn plane_thickness(cfg: &HarnessConfig) -> (f64, f64) {
    (cfg.strategy.plane_top_height, cfg.strategy.plane_top_height)
}

fn episode_seed(cfg: &HarnessConfig, tag: u64, i: usize) -> u64 {
    mix_seed(mix_seed(cfg.seed, tag), i as u64)
}

fn plane_grasping(cfg: &HarnessConfig) -> Result<(Vec<Condition>, Vec<u64>)> {
    let f = &cfg.fusion;
    let mut conditions = Vec::new();
    // classifier ablation under both background conditions
    let mut episode_classifiers: Vec<(Ablation, FusionClassifier)> = Vec::new();
    for condition in [BackgroundCondition::Standard, BackgroundCondition::Heavy] {
        let cname = match condition {
            BackgroundCondition::Standard => "standard",
            BackgroundCondition::Heavy => "heavy",
        };
        let mut per_ablation: Vec<Vec<f64>> = vec![Vec::new(); Ablation::ALL.len()];
        for &seed in &f.seeds {
            let data = vistac_core::fuse::FusionDataConfig { condition, ..f.data.clone() };
            let (train, test) = make_dataset(&data, &cfg.gripper, mix_seed(cfg.seed, seed))?;
            for (k, ablation) in Ablation::ALL.into_iter().enumerate() {
                let tc = vistac_core::fuse::FusionTrainConfig { seed, ..f.train };
                let (clf, acc) = train_classifier(&train, &test, &cfg.gripper, &tc, ablation)?;
                per_ablation[k].push(acc);
                if condition == f.episode_condition && Some(&seed) == f.seeds.first() && ablation != Ablation::TactileOnly {
                    episode_classifiers.push((ablation, clf));
                }
            }
        }
        for (k, ablation) in Ablation::ALL.into_iter().enumerate() {
            let accs = &per_ablation[k];
            let mut c = Condition::new(format!("classify_{cname}_{}", ablation.name()), accs.len())
                .with("accuracy", mean(accs))
                .with("min_accuracy", accs.iter().copied().fold(f64::INFINITY, f64::min));
            for (s, a) in f.seeds.iter().zip(accs) {
                c = c.with(&format!("accuracy_seed{s}"), *a);
            }
            conditions.push(c);
        }
    }
    // grasping on a plane, with and without classification
    let trained = load_trained(cfg)?;
    let cam = episode_camera(cfg)?;
    let env = EpisodeEnv { cam: &cam, cfg, trained: trained.as_ref() };
    let e = &cfg.episodes;
    let spec = SceneSpec {
        object_count: e.plane_objects,
        workspace: Rect::centered(Vec2::ZERO, e.workspace_mm, e.workspace_mm),
        radius_range: f.data.radius_range,
        thickness_range: plane_thickness(cfg),
        ..SceneSpec::default()
    };
    let strategy = StrategyConfig { mode: StrategyMode::VisionFirst, calibrate: true, ..cfg.strategy.clone() };
    let mut variants: Vec<(String, Option<&FusionClassifier>)> = vec![("grasp_only".into(), None)];
    for (ablation, clf) in &episode_classifiers {
        variants.push((format!("grasp_{}", ablation.name()), Some(clf)));
    }
    for (name, clf) in variants {
        let eps = par_map(e.episodes, cfg.threads, |i| {
            let seed = episode_seed(cfg, 4, i);
            let scene = generate_scene(&spec, seed)?;
            let det = env.detector(e.jitter_mm, seed);
            env.run(&scene, &strategy, det.as_ref(), clf.map(|c| c as &dyn GraspClassifier), seed)
        })?;
        conditions.push(grasp_condition(&name, &eps));
    }
    Ok((conditions, std::iter::once(cfg.seed).chain(f.seeds.iter().copied()).collect()))
}

pub fn e5_condition(calibrated: bool, jitter_mm: f64) -> String {
    format!("{}_sigma{jitter_mm}", if calibrated { "calibrated" } else { "direct" })
}

fn fragment_grasping(cfg: &HarnessConfig) -> Result<(Vec<Condition>, Vec<u64>)> {
    let trained = load_trained(cfg)?;
    let cam = episode_camera(cfg)?;
    let env = EpisodeEnv { cam: &cam, cfg, trained: trained.as_ref() };
    let e = &cfg.episodes;
    let spec = SceneSpec {
        object_count: 1,
        fragments: true,
        workspace: Rect::centered(Vec2::ZERO, e.workspace_mm, e.workspace_mm),
        radius_range: e.radius_range,
        thickness_range: plane_thickness(cfg),
        ..SceneSpec::default()
    };
    let mut conditions = Vec::new();
    for jitter in [0.0, e.jitter_mm] {
        for calibrated in [true, false] {
            let strategy = StrategyConfig { mode: StrategyMode::VisionFirst, calibrate: calibrated, ..cfg.strategy.clone() };
            let eps = par_map(e.episodes, cfg.threads, |i| {
                let seed = episode_seed(cfg, 5, i);
                let scene = generate_scene(&spec, seed)?;
                let det = env.detector(jitter, mix_seed(seed, 0x517));
                env.run(&scene, &strategy, det.as_ref(), None, seed)
            })?;
            conditions.push(grasp_condition(&e5_condition(calibrated, jitter), &eps).with("jitter_mm", jitter));
        }
    }
    Ok((conditions, vec![cfg.seed]))
}

fn ths_condition(name: &str, eps: &[EpisodeSummary], delta: f64, top_down: Option<usize>) -> Condition {
    let contacts: Vec<(f64, f64)> = eps.iter().flat_map(|e| e.contacts.iter().copied()).collect();
    let within = contacts.iter().filter(|(c, t)| (c - t).abs() <= delta).count();
    let max_err = contacts.iter().map(|(c, t)| (c - t).abs()).fold(0.0, f64::max);
    let mut c = grasp_condition(name, eps)
        .with("contacts", contacts.len() as f64)
        .with("ths_within_delta", if contacts.is_empty() { 0.0 } else { within as f64 / contacts.len() as f64 })
        .with("max_height_error", max_err);
    if let Some(k) = top_down {
        c = c.with("top_down_rate", k as f64 / eps.len().max(1) as f64);
    }
    c
}

fn irregular_scenes(cfg: &HarnessConfig) -> Result<(Vec<Condition>, Vec<u64>)> {
    let trained = load_trained(cfg)?;
    let cam = episode_camera(cfg)?;
    let env = EpisodeEnv { cam: &cam, cfg, trained: trained.as_ref() };
    let e = &cfg.episodes;
    let t = &cfg.ths;
    let strategy = StrategyConfig { mode: StrategyMode::VisionTouch, safe_height: t.safe_height, ..cfg.strategy.clone() };
    let delta = strategy.descent_step;
    let workspace = Rect::centered(Vec2::ZERO, e.workspace_mm, e.workspace_mm);
    let base = SceneSpec { workspace, radius_range: e.radius_range, thickness_range: e.thickness_range, ..SceneSpec::default() };
    let a = t.support_amplitude;
    let cases: [(&str, usize, u64); 4] = [
        ("undulating", t.undulating_episodes, 61),
        ("stacked", t.stacked_episodes, 62),
        ("overlap", t.overlap_episodes, 63),
        ("sand", t.sand_episodes, 64),
    ];
    let mut conditions = Vec::new();
    for (name, count, tag) in cases {
        let runs = par_map(count, cfg.threads, |i| {
            let seed = episode_seed(cfg, tag, i);
            let spec = match name {
                "undulating" => SceneSpec {
                    object_count: 2,
                    support: SupportField::undulating(a, a, t.support_wavelength, seed),
                    ..base.clone()
                },
                "sand" => SceneSpec {
                    object_count: 2,
                    support: SupportField::sand(a, a, t.support_wavelength, seed),
                    ..base.clone()
                },
                "stacked" => SceneSpec { object_count: 2, layout: Layout::Stacked, ..base.clone() },
                _ => SceneSpec { object_count: 2, layout: Layout::Overlap, ..base.clone() },
            };
            let scene = generate_scene(&spec, seed)?;
            let det = env.detector(0.0, seed);
            let s = env.run(&scene, &strategy, det.as_ref(), None, seed)?;
            Ok((top_down_order(&scene), s))
        })?;
        let top_down = runs.iter().filter(|(order, s)| s.success_order == *order).count();
        let eps: Vec<EpisodeSummary> = runs.into_iter().map(|(_, s)| s).collect();
        let stacked = matches!(name, "stacked" | "overlap").then_some(top_down);
        conditions.push(ths_condition(name, &eps, delta, stacked));
    }
    Ok((conditions, vec![cfg.seed]))
}

/// Object ids by descending top height.
pub fn top_down_order(scene: &Scene) -> Vec<usize> {
    let mut objs: Vec<_> = scene.objects.iter().collect();
    objs.sort_by(|a, b| b.top_height.total_cmp(&a.top_height).then(a.id.cmp(&b.id)));
    objs.iter().map(|o| o.id).collect()
}

/// Smallest caliper width over the edge normals of a convex polygon.
pub fn min_width(p: &Polygon) -> f64 {
    p.edges()
        .map(|(a, b)| {
            let d = b - a;
            let n = Vec2::new(-d.y, d.x) * (1.0 / d.norm());
            let (lo, hi) = p.vertices.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| {
                let s = v.dot(n);
                (lo.min(s), hi.max(s))
            });
            hi - lo
        })
        .fold(f64::INFINITY, f64::min)
}

pub fn e7_condition(step: f64) -> String {
    format!("step_{step}")
}

fn tpe_sweep(cfg: &HarnessConfig) -> Result<(Vec<Condition>, Vec<u64>)> {
    let t = &cfg.tpe;
    let cam = episode_camera(cfg)?;
    let env = EpisodeEnv { cam: &cam, cfg, trained: None };
    let region = Rect::centered(Vec2::ZERO, t.region_mm, t.region_mm);
    let spec = SceneSpec {
        object_count: 1,
        class_pool: t.classes.clone(),
        support: SupportField::water(0.0),
        workspace: region,
        radius_range: t.radius_range,
        thickness_range: cfg.episodes.thickness_range,
        background: BackgroundChoice::Random,
        ..SceneSpec::default()
    };
    let scenes = par_map(t.placements, cfg.threads, |i| Ok(generate_scene(&spec, episode_seed(cfg, 7, i))?))?;
    let width = scenes
        .iter()
        .flat_map(|s| s.objects.iter().map(|o| min_width(&o.footprint)))
        .fold(f64::INFINITY, f64::min);
    let mut conditions = Vec::new();
    for &step in &t.steps {
        let strategy = StrategyConfig { mode: StrategyMode::TouchFirst, tpe_step: step, tpe_region: region, ..cfg.strategy.clone() };
        let eps = par_map(scenes.len(), cfg.threads, |i| env.run(&scenes[i], &strategy, None, None, episode_seed(cfg, 7, i)))?;
        let found_times: Vec<f64> =
            eps.iter().filter(|e| e.successes > 0).map(|e| e.sim_time_ms as f64 / 1000.0).collect();
        let c = grasp_condition(&e7_condition(step), &eps)
            .with("step_mm", step)
            .with("not_found_rate", eps.iter().filter(|e| e.not_found).count() as f64 / eps.len().max(1) as f64)
            .with("mean_success_time_s", mean(&found_times))
            .with("min_footprint_width", width);
        conditions.push(c);
    }
    Ok((conditions, vec![cfg.seed]))
}
