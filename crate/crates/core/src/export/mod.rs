//! Baked scene export: a versioned `scene.json` document with an OBJ bundle,
//! and binary glTF 2.0.
//!
//! Both formats sample the scene at integer frames spanning its keyed range
//! (frame 1 alone for a scene without keys).

mod document;
mod gltf;

use std::collections::HashMap;
use std::io;
use std::path::PathBuf;

use thiserror::Error;

use crate::color::Rgba;
use crate::math::{Pose, Vec3};
use crate::timeline::{MeshSource, Scene};

pub use self::gltf::{export_gltf, BakeOptions};
pub use document::{
    export_scene_document, read_scene_document, AlphaKey, ColorKey, DocumentMesh, DocumentObject,
    PoseKey, SceneDocument, VisibleKey, DOCUMENT_FILE, DOCUMENT_VERSION,
};

#[derive(Debug, Error)]
pub enum ExportError {
    #[error("{}: {source}", path.display())]
    Io { path: PathBuf, source: io::Error },
    #[error("scene has nothing visible to export")]
    EmptyScene,
    #[error("invalid export options: {0}")]
    InvalidOptions(String),
    #[error("object `{0}` has no mesh")]
    MissingMesh(String),
    #[error("{}: {message}", path.display())]
    Document { path: PathBuf, message: String },
}

pub(crate) fn io_err(path: &std::path::Path) -> impl FnOnce(io::Error) -> ExportError + '_ {
    move |source| ExportError::Io {
        path: path.to_path_buf(),
        source,
    }
}

/// Integer frames from `floor(first)` to `ceil(last)` every `step` frames;
/// the last frame is always included.
pub fn sample_frames(scene: &Scene, step: u32) -> Vec<f64> {
    let (lo, hi) = scene.frame_range().unwrap_or((1.0, 1.0));
    let (lo, hi) = (lo.floor() as i64, hi.ceil() as i64);
    let mut frames: Vec<f64> = (lo..=hi)
        .step_by(step.max(1) as usize)
        .map(|f| f as f64)
        .collect();
    if frames.last() != Some(&(hi as f64)) {
        frames.push(hi as f64);
    }
    frames
}

#[derive(Debug, Clone, PartialEq)]
pub(crate) struct Sample {
    pub(crate) frame: f64,
    pub(crate) pose: Pose,
    pub(crate) scale: Vec3,
    pub(crate) color: Rgba,
    pub(crate) alpha: f64,
    pub(crate) visible: bool,
}

#[derive(Debug, Clone)]
pub(crate) struct BakedObject {
    pub(crate) id: String,
    pub(crate) mesh: MeshSource,
    pub(crate) samples: Vec<Sample>,
}

/// Samples every object at `frames`, keeping those visible at least once.
pub(crate) fn bake(scene: &Scene, frames: &[f64]) -> Vec<BakedObject> {
    let mut objects: Vec<BakedObject> = Vec::new();
    let mut index: HashMap<String, usize> = HashMap::new();
    for &frame in frames {
        for e in scene.evaluate_full(frame) {
            let o = e.object;
            let sample = Sample {
                frame,
                pose: o.pose,
                scale: o.scale,
                color: o.color,
                alpha: o.alpha,
                visible: e.visible,
            };
            let i = *index.entry(o.id.clone()).or_insert_with(|| {
                objects.push(BakedObject {
                    id: o.id,
                    mesh: o.mesh,
                    samples: Vec::new(),
                });
                objects.len() - 1
            });
            objects[i].samples.push(sample);
        }
    }
    objects.retain(|o| o.samples.iter().any(|s| s.visible));
    objects
}
