use std::collections::HashMap;
use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::json;

use super::{bake, io_err, sample_frames, ExportError};
use crate::geometry::to_obj_string;
use crate::math::{quat_to_wxyz, UnitQuat};
use crate::timeline::{MeshSource, Scene};

pub const DOCUMENT_VERSION: u32 = 1;
pub const DOCUMENT_FILE: &str = "scene.json";
const MESH_DIR: &str = "meshes";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SceneDocument {
    pub version: u32,
    pub frame_rate: f64,
    pub frame_range: [f64; 2],
    /// Mesh files of the bundle, relative to the document.
    pub assets: Vec<String>,
    pub objects: Vec<DocumentObject>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DocumentObject {
    pub id: String,
    pub mesh: DocumentMesh,
    pub pose_keys: Vec<PoseKey>,
    pub color_keys: Vec<ColorKey>,
    pub alpha_keys: Vec<AlphaKey>,
    pub visible_keys: Vec<VisibleKey>,
}

/// Either a bundled OBJ file or a unit-size primitive; both are placed by
/// the object's pose keys.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum DocumentMesh {
    File {
        file: String,
    },
    Primitive {
        primitive: String,
        params: serde_json::Value,
    },
}

fn unit_scale() -> [f64; 3] {
    [1.0, 1.0, 1.0]
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PoseKey {
    pub frame: f64,
    pub t: [f64; 3],
    /// `[w, x, y, z]`
    pub q: [f64; 4],
    /// Object-frame scale applied before `q` and `t`.
    #[serde(default = "unit_scale")]
    pub s: [f64; 3],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ColorKey {
    pub frame: f64,
    pub rgba: [f64; 4],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AlphaKey {
    pub frame: f64,
    pub a: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VisibleKey {
    pub frame: f64,
    pub v: bool,
}

/// Rounds to 9 significant digits and folds `-0` into `0`.
fn r9(x: f64) -> f64 {
    if x == 0.0 || !x.is_finite() {
        return 0.0;
    }
    format!("{x:.8e}").parse().expect("formatted float parses")
}

fn r9n<const N: usize>(v: [f64; N]) -> [f64; N] {
    v.map(r9)
}

/// Keeps consecutive quaternions in the same hemisphere, starting at `w >= 0`.
pub(crate) fn continuous_quats(quats: impl Iterator<Item = UnitQuat>) -> Vec<UnitQuat> {
    let mut out: Vec<UnitQuat> = Vec::new();
    for q in quats {
        let flip = match out.last() {
            None => q.w < 0.0,
            Some(p) => p.coords.dot(&q.coords) < 0.0,
        };
        out.push(if flip {
            UnitQuat::new_unchecked(-q.into_inner())
        } else {
            q
        });
    }
    out
}

/// Writes `scene.json` and a `meshes/` bundle into `out_dir`; returns the
/// document path.
pub fn export_scene_document(scene: &Scene, out_dir: &Path) -> Result<PathBuf, ExportError> {
    let frames = sample_frames(scene, 1);
    let baked = bake(scene, &frames);
    if baked.is_empty() {
        return Err(ExportError::EmptyScene);
    }

    let mut files: HashMap<String, String> = HashMap::new();
    let mut bundle: Vec<(String, String)> = Vec::new();
    let mut objects = Vec::with_capacity(baked.len());
    for o in &baked {
        let mesh = match &o.mesh {
            MeshSource::UnitCylinder => DocumentMesh::Primitive {
                primitive: "line".into(),
                params: json!({"start": [0.0, 0.0, 0.0], "end": [0.0, 0.0, 1.0], "radius": 1.0}),
            },
            MeshSource::UnitCube => DocumentMesh::Primitive {
                primitive: "cube".into(),
                params: json!({"center": [0.0, 0.0, 0.0], "rpy": [0.0, 0.0, 0.0], "dims": [1.0, 1.0, 1.0]}),
            },
            source => {
                let mesh = scene
                    .mesh(source)
                    .ok_or_else(|| ExportError::MissingMesh(o.id.clone()))?;
                let text = to_obj_string(&mesh);
                let next = files.len();
                let file = files
                    .entry(text.clone())
                    .or_insert_with(|| {
                        let rel = format!("{MESH_DIR}/{next}.obj");
                        bundle.push((rel.clone(), text));
                        rel
                    })
                    .clone();
                DocumentMesh::File { file }
            }
        };
        let quats = continuous_quats(o.samples.iter().map(|s| s.pose.rotation));
        objects.push(DocumentObject {
            id: o.id.clone(),
            mesh,
            pose_keys: o
                .samples
                .iter()
                .zip(&quats)
                .map(|(s, q)| PoseKey {
                    frame: s.frame,
                    t: r9n(s.pose.translation.vector.into()),
                    q: r9n(quat_to_wxyz(q)),
                    s: r9n(s.scale.into()),
                })
                .collect(),
            color_keys: o
                .samples
                .iter()
                .map(|s| ColorKey {
                    frame: s.frame,
                    rgba: r9n(s.color.to_array()),
                })
                .collect(),
            alpha_keys: o
                .samples
                .iter()
                .map(|s| AlphaKey {
                    frame: s.frame,
                    a: r9(s.alpha),
                })
                .collect(),
            visible_keys: o
                .samples
                .iter()
                .map(|s| VisibleKey {
                    frame: s.frame,
                    v: s.visible,
                })
                .collect(),
        });
    }

    let doc = SceneDocument {
        version: DOCUMENT_VERSION,
        frame_rate: r9(scene.frame_rate()),
        frame_range: [frames[0], frames[frames.len() - 1]],
        assets: bundle.iter().map(|(rel, _)| rel.clone()).collect(),
        objects,
    };

    fs::create_dir_all(out_dir).map_err(io_err(out_dir))?;
    let mesh_dir = out_dir.join(MESH_DIR);
    match fs::remove_dir_all(&mesh_dir) {
        Ok(()) => {}
        Err(e) if e.kind() == io::ErrorKind::NotFound => {}
        Err(e) => return Err(io_err(&mesh_dir)(e)),
    }
    if !bundle.is_empty() {
        fs::create_dir_all(&mesh_dir).map_err(io_err(&mesh_dir))?;
    }
    for (rel, text) in &bundle {
        let path = out_dir.join(rel);
        fs::write(&path, text).map_err(io_err(&path))?;
    }
    let path = out_dir.join(DOCUMENT_FILE);
    let mut json = serde_json::to_string_pretty(&doc).expect("document serializes");
    json.push('\n');
    fs::write(&path, json).map_err(io_err(&path))?;
    Ok(path)
}

/// Reads a document (or the `scene.json` inside a directory) and checks its
/// version and bundled files.
pub fn read_scene_document(path: &Path) -> Result<SceneDocument, ExportError> {
    let file = if path.is_dir() {
        path.join(DOCUMENT_FILE)
    } else {
        path.to_path_buf()
    };
    let text = fs::read_to_string(&file).map_err(io_err(&file))?;
    let doc: SceneDocument = serde_json::from_str(&text).map_err(|e| ExportError::Document {
        path: file.clone(),
        message: e.to_string(),
    })?;
    if doc.version != DOCUMENT_VERSION {
        return Err(ExportError::Document {
            path: file,
            message: format!("unsupported version {}", doc.version),
        });
    }
    let root = file.parent().unwrap_or(Path::new("."));
    for o in &doc.objects {
        if let DocumentMesh::File { file: rel } = &o.mesh {
            if !root.join(rel).is_file() {
                return Err(ExportError::Document {
                    path: root.join(rel),
                    message: format!("mesh of object `{}` is missing", o.id),
                });
            }
        }
    }
    Ok(doc)
}
