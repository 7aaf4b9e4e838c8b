//! On-disk datasets: netpbm images, GMAP labels and versioned scene records,
//! indexed by a manifest carrying a SHA-256 per file.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use vistac_core::annotate::AnnotationMeta;
use vistac_core::detect::TrainedDetector;
use vistac_core::imageio::{decode_gmap, decode_ppm, encode_gmap, encode_ppm};
use vistac_core::worldsim::Scene;
use vistac_nnet::checkpoint;
use vistac_nnet::{TgcnnConfig, TgcnnModel};

use crate::detection::{DetectionSample, Split};
use crate::error::{HarnessError, Result};

pub const DATASET_FORMAT: &str = "vistac-dataset";
pub const DATASET_VERSION: u32 = 1;
pub const SCENE_FORMAT: &str = "vistac-scene";
pub const SCENE_VERSION: u32 = 1;
pub const DETECTOR_KIND: &str = "tgcnn";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FileEntry {
    pub path: String,
    pub sha256: String,
    pub bytes: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetManifest {
    pub format: String,
    pub version: u32,
    pub split: Split,
    pub seed: u64,
    pub count: usize,
    pub config: serde_json::Value,
    pub files: Vec<FileEntry>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SceneRecord {
    pub format: String,
    pub version: u32,
    pub scene_seed: u64,
    pub background_id: u64,
    pub scene: Scene,
    pub meta: AnnotationMeta,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

fn check_header(kind: &str, format: &str, version: u32, want_format: &str, want_version: u32) -> Result<()> {
    if format != want_format {
        return Err(HarnessError::Format(format!("{kind}: unknown format `{format}`")));
    }
    if version != want_version {
        return Err(HarnessError::Format(format!("{kind}: version {version} not supported (expected {want_version})")));
    }
    Ok(())
}

pub fn encode_scene_record(s: &DetectionSample) -> Result<Vec<u8>> {
    let rec = SceneRecord {
        format: SCENE_FORMAT.into(),
        version: SCENE_VERSION,
        scene_seed: s.scene_seed,
        background_id: s.background_id,
        scene: s.scene.clone(),
        meta: s.meta.clone(),
    };
    Ok(serde_json::to_vec(&rec)?)
}

pub fn decode_scene_record(bytes: &[u8]) -> Result<SceneRecord> {
    let rec: SceneRecord = serde_json::from_slice(bytes)?;
    check_header("scene record", &rec.format, rec.version, SCENE_FORMAT, SCENE_VERSION)?;
    Ok(rec)
}

fn stems(i: usize) -> [String; 3] {
    [format!("images/{i:05}.ppm"), format!("labels/{i:05}.gmap"), format!("scenes/{i:05}.json")]
}

/// Writes the samples under `dir` and returns the manifest written alongside.
pub fn write_dataset(
    dir: &Path,
    samples: &[DetectionSample],
    split: Split,
    seed: u64,
    config: serde_json::Value,
) -> Result<DatasetManifest> {
    for sub in ["images", "labels", "scenes"] {
        fs::create_dir_all(dir.join(sub))?;
    }
    let mut files = Vec::with_capacity(3 * samples.len());
    for (i, s) in samples.iter().enumerate() {
        let payloads = [encode_ppm(&s.image), encode_gmap(&s.label), encode_scene_record(s)?];
        for (rel, bytes) in stems(i).into_iter().zip(payloads) {
            fs::write(dir.join(&rel), &bytes)?;
            files.push(FileEntry { path: rel, sha256: sha256_hex(&bytes), bytes: bytes.len() as u64 });
        }
    }
    let manifest = DatasetManifest {
        format: DATASET_FORMAT.into(),
        version: DATASET_VERSION,
        split,
        seed,
        count: samples.len(),
        config,
        files,
    };
    fs::write(dir.join("manifest.json"), serde_json::to_vec_pretty(&manifest)?)?;
    Ok(manifest)
}

pub fn read_manifest(dir: &Path) -> Result<DatasetManifest> {
    let path = dir.join("manifest.json");
    let bytes = fs::read(&path).map_err(|_| HarnessError::MissingArtifact(path.display().to_string()))?;
    let m: DatasetManifest = serde_json::from_slice(&bytes)?;
    check_header("dataset", &m.format, m.version, DATASET_FORMAT, DATASET_VERSION)?;
    if m.files.len() != 3 * m.count {
        return Err(HarnessError::Format(format!("manifest lists {} files for {} samples", m.files.len(), m.count)));
    }
    Ok(m)
}

fn read_checked(dir: &Path, e: &FileEntry) -> Result<Vec<u8>> {
    let path = dir.join(&e.path);
    let bytes = fs::read(&path).map_err(|_| HarnessError::MissingArtifact(path.display().to_string()))?;
    if bytes.len() as u64 != e.bytes || sha256_hex(&bytes) != e.sha256 {
        return Err(HarnessError::Checksum(e.path.clone()));
    }
    Ok(bytes)
}

/// Checks every listed file against its checksum.
pub fn verify_dataset(dir: &Path) -> Result<DatasetManifest> {
    let m = read_manifest(dir)?;
    for e in &m.files {
        read_checked(dir, e)?;
    }
    Ok(m)
}

pub fn read_dataset(dir: &Path) -> Result<(DatasetManifest, Vec<DetectionSample>)> {
    let m = read_manifest(dir)?;
    let mut out = Vec::with_capacity(m.count);
    for chunk in m.files.chunks(3) {
        let image = decode_ppm(&read_checked(dir, &chunk[0])?)?;
        let label = decode_gmap(&read_checked(dir, &chunk[1])?)?;
        let rec = decode_scene_record(&read_checked(dir, &chunk[2])?)?;
        out.push(DetectionSample {
            scene_seed: rec.scene_seed,
            background_id: rec.background_id,
            scene: rec.scene,
            image,
            label,
            meta: rec.meta,
        });
    }
    Ok((m, out))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
struct DetectorConfig {
    model: TgcnnConfig,
    r_max_px: f64,
}

pub fn save_detector(model: &TgcnnModel<f32>, r_max_px: f64, stem: &Path) -> Result<()> {
    if let Some(parent) = stem.parent() {
        fs::create_dir_all(parent)?;
    }
    let config = serde_json::to_value(DetectorConfig { model: model.config, r_max_px })?;
    checkpoint::save(model, DETECTOR_KIND, config, stem)?;
    Ok(())
}

pub fn load_detector(stem: &Path) -> Result<TrainedDetector> {
    let json: PathBuf = stem.with_extension("json");
    if !json.exists() {
        return Err(HarnessError::MissingArtifact(json.display().to_string()));
    }
    let manifest = checkpoint::read_manifest(stem)?;
    if manifest.kind != DETECTOR_KIND {
        return Err(HarnessError::Format(format!("checkpoint kind `{}` is not a detector", manifest.kind)));
    }
    let cfg: DetectorConfig = serde_json::from_value(manifest.config)?;
    let mut model = TgcnnModel::new(cfg.model, 0);
    checkpoint::load(&mut model, stem)?;
    Ok(TrainedDetector { model, r_max: cfg.r_max_px })
}
