//! The single JSON configuration document, one section per module.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use vistac_core::fuse::{BackgroundCondition, FusionDataConfig, FusionTrainConfig};
use vistac_core::grasp::GripperSpec;
use vistac_core::strategy::StrategyConfig;

use crate::detection::DetectionConfig;
use crate::error::{HarnessError, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DetectorChoice {
    /// Ground-truth labels with seeded centre jitter.
    Oracle,
    /// A TGCNN checkpoint written by `vistac train`.
    Trained { checkpoint: PathBuf },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct AblationConfig {
    pub seeds: Vec<u64>,
    pub detection: DetectionConfig,
    /// Centre jitter of the oracle comparison, mm.
    pub oracle_jitter_mm: f64,
    pub oracle_images: usize,
}

impl Default for AblationConfig {
    fn default() -> Self {
        let base = DetectionConfig::default();
        AblationConfig {
            seeds: vec![0, 1, 2],
            detection: DetectionConfig {
                train_images: 200,
                test_images: 100,
                train: vistac_nnet::TrainConfig { epochs: 15, ..base.train },
                ..base
            },
            oracle_jitter_mm: 5.0,
            oracle_images: 200,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SweepConfig {
    pub images_per_condition: usize,
    pub lighting_gains: Vec<f64>,
}

impl Default for SweepConfig {
    fn default() -> Self {
        SweepConfig { images_per_condition: 50, lighting_gains: vec![0.5, 0.75, 1.0, 1.25, 1.5] }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct EpisodeConfig {
    pub detector: DetectorChoice,
    /// Episodes per condition.
    pub episodes: usize,
    /// Oracle centre jitter standard deviation, mm.
    pub jitter_mm: f64,
    pub image_size: usize,
    pub field_mm: f64,
    pub camera_plane: f64,
    pub r_max_px: f64,
    /// Side of the square workspace objects are placed in, mm.
    pub workspace_mm: f64,
    pub radius_range: (f64, f64),
    pub thickness_range: (f64, f64),
    /// Objects per plane-grasping scene.
    pub plane_objects: usize,
}

impl Default for EpisodeConfig {
    fn default() -> Self {
        EpisodeConfig {
            detector: DetectorChoice::Oracle,
            episodes: 200,
            jitter_mm: 20.0,
            image_size: 96,
            field_mm: 200.0,
            camera_plane: 40.0,
            r_max_px: 24.0,
            workspace_mm: 180.0,
            radius_range: (20.0, 30.0),
            thickness_range: (30.0, 50.0),
            plane_objects: 3,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct FusionSection {
    pub seeds: Vec<u64>,
    pub data: FusionDataConfig,
    pub train: FusionTrainConfig,
    /// Condition the classifiers used during grasping episodes are trained on.
    pub episode_condition: BackgroundCondition,
}

impl Default for FusionSection {
    fn default() -> Self {
        FusionSection {
            seeds: vec![0, 1, 2],
            data: FusionDataConfig::default(),
            train: FusionTrainConfig::default(),
            episode_condition: BackgroundCondition::Heavy,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ThsConfig {
    pub undulating_episodes: usize,
    pub stacked_episodes: usize,
    pub overlap_episodes: usize,
    pub sand_episodes: usize,
    pub safe_height: f64,
    pub support_amplitude: f64,
    pub support_wavelength: f64,
}

impl Default for ThsConfig {
    fn default() -> Self {
        ThsConfig {
            undulating_episodes: 100,
            stacked_episodes: 50,
            overlap_episodes: 50,
            sand_episodes: 50,
            safe_height: 140.0,
            support_amplitude: 15.0,
            support_wavelength: 120.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TpeConfig {
    pub placements: usize,
    pub steps: Vec<f64>,
    pub region_mm: f64,
    pub classes: Vec<usize>,
    pub radius_range: (f64, f64),
}

impl Default for TpeConfig {
    fn default() -> Self {
        TpeConfig {
            placements: 100,
            steps: vec![50.0, 100.0, 150.0],
            region_mm: 400.0,
            classes: vec![0, 3],
            radius_range: (30.0, 35.0),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct HarnessConfig {
    pub seed: u64,
    pub threads: usize,
    pub detection: DetectionConfig,
    pub ablation: AblationConfig,
    pub sweep: SweepConfig,
    pub gripper: GripperSpec,
    pub strategy: StrategyConfig,
    pub episodes: EpisodeConfig,
    pub fusion: FusionSection,
    pub ths: ThsConfig,
    pub tpe: TpeConfig,
}

impl Default for HarnessConfig {
    fn default() -> Self {
        HarnessConfig {
            seed: 0,
            threads: 1,
            detection: DetectionConfig::default(),
            ablation: AblationConfig::default(),
            sweep: SweepConfig::default(),
            gripper: GripperSpec::default(),
            strategy: StrategyConfig::default(),
            episodes: EpisodeConfig::default(),
            fusion: FusionSection::default(),
            ths: ThsConfig::default(),
            tpe: TpeConfig::default(),
        }
    }
}

impl HarnessConfig {
    pub fn from_json(bytes: &[u8]) -> Result<Self> {
        let cfg: HarnessConfig =
            serde_json::from_slice(bytes).map_err(|e| HarnessError::Config(format!("config JSON: {e}")))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let bytes = std::fs::read(path).map_err(|e| HarnessError::Config(format!("{}: {e}", path.display())))?;
        Self::from_json(&bytes)
    }

    pub fn validate(&self) -> Result<()> {
        self.detection.validate()?;
        self.ablation.detection.validate()?;
        self.strategy.validate().map_err(|e| HarnessError::Config(e.to_string()))?;
        self.gripper.validate().map_err(|e| HarnessError::Config(e.to_string()))?;
        if self.episodes.episodes == 0 {
            return Err(HarnessError::Config("episodes must be positive".into()));
        }
        if self.tpe.steps.iter().any(|&l| !(l > 0.0)) {
            return Err(HarnessError::Config("TPE steps must be positive".into()));
        }
        if self.tpe.classes.is_empty() {
            return Err(HarnessError::Config("tpe.classes is empty".into()));
        }
        Ok(())
    }
}
