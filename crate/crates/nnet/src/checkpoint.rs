//! Checkpoints: a JSON manifest plus a flat little-endian `f32` blob.
//!
//! `<stem>.json` lists every tensor (parameters and buffers) in visit order
//! with its shape, offset into the blob, and L2 norm; `<stem>.bin` holds the
//! values back to back.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{NnError, Result};
use crate::layers::Slot;
use crate::module::Module;
use crate::scalar::Scalar;

pub const FORMAT: &str = "vistac-checkpoint";
pub const VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TensorEntry {
    pub name: String,
    pub buffer: bool,
    pub shape: Vec<usize>,
    pub offset: usize,
    pub l2: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub format: String,
    pub version: u32,
    /// Free-form model kind, e.g. `"tgcnn"` or `"fusion-mlp"`.
    pub kind: String,
    /// Architecture hyperparameters needed to rebuild the model.
    pub config: serde_json::Value,
    pub data_file: String,
    pub total_values: usize,
    pub tensors: Vec<TensorEntry>,
}

fn paths(stem: &Path) -> (PathBuf, PathBuf) {
    (stem.with_extension("json"), stem.with_extension("bin"))
}

pub fn save<T: Scalar, M: Module<T> + ?Sized>(
    model: &M,
    kind: &str,
    config: serde_json::Value,
    stem: &Path,
) -> Result<Manifest> {
    let (json_path, bin_path) = paths(stem);
    let mut blob: Vec<u8> = Vec::new();
    let mut tensors = Vec::new();
    let mut offset = 0;
    model.visit(&mut |name, slot, t| {
        for v in &t.data {
            blob.extend_from_slice(&(v.to_f64_lossy() as f32).to_le_bytes());
        }
        tensors.push(TensorEntry {
            name: name.to_string(),
            buffer: slot == Slot::Buffer,
            shape: t.shape().to_vec(),
            offset,
            l2: t.sum_sq().sqrt(),
        });
        offset += t.len();
    });
    let manifest = Manifest {
        format: FORMAT.into(),
        version: VERSION,
        kind: kind.into(),
        config,
        data_file: bin_path
            .file_name()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_default(),
        total_values: offset,
        tensors,
    };
    std::fs::write(&bin_path, &blob)?;
    std::fs::write(&json_path, serde_json::to_vec_pretty(&manifest)?)?;
    Ok(manifest)
}

pub fn read_manifest(stem: &Path) -> Result<Manifest> {
    let (json_path, _) = paths(stem);
    let manifest: Manifest = serde_json::from_slice(&std::fs::read(json_path)?)?;
    if manifest.format != FORMAT {
        return Err(NnError::Checkpoint(format!("unknown format `{}`", manifest.format)));
    }
    if manifest.version != VERSION {
        return Err(NnError::Checkpoint(format!(
            "version {} not supported (expected {VERSION})",
            manifest.version
        )));
    }
    Ok(manifest)
}

/// Load values into an already constructed model with a matching layout.
pub fn load<T: Scalar, M: Module<T> + ?Sized>(model: &mut M, stem: &Path) -> Result<Manifest> {
    let manifest = read_manifest(stem)?;
    let bin_path = stem.with_file_name(&manifest.data_file);
    let blob = std::fs::read(bin_path)?;
    if blob.len() != manifest.total_values * 4 {
        return Err(NnError::Checkpoint(format!(
            "data file holds {} bytes, manifest expects {}",
            blob.len(),
            manifest.total_values * 4
        )));
    }
    let mut entries = manifest.tensors.iter();
    let mut err = None;
    model.visit_mut(&mut |name, _, t| {
        if err.is_some() {
            return;
        }
        match entries.next() {
            Some(e) if e.name == name && e.shape == t.shape() => {
                for (i, v) in t.data.iter_mut().enumerate() {
                    let o = (e.offset + i) * 4;
                    let raw = f32::from_le_bytes([blob[o], blob[o + 1], blob[o + 2], blob[o + 3]]);
                    *v = T::from_f64_lossy(raw as f64);
                }
            }
            Some(e) => {
                err = Some(NnError::Checkpoint(format!(
                    "tensor `{}` {:?} does not match model tensor `{name}` {:?}",
                    e.name,
                    e.shape,
                    t.shape()
                )))
            }
            None => err = Some(NnError::Checkpoint(format!("missing tensor `{name}`"))),
        }
    });
    if let Some(e) = err {
        return Err(e);
    }
    if entries.next().is_some() {
        return Err(NnError::Checkpoint("checkpoint has extra tensors".into()));
    }
    Ok(manifest)
}
