use std::collections::HashMap;
use std::fs;
use std::path::{Path, PathBuf};

use serde_json::{json, Value};

use super::document::continuous_quats;
use super::{bake, io_err, sample_frames, BakedObject, ExportError};
use crate::geometry::{to_obj_string, TriMesh};
use crate::timeline::Scene;

const GLB_MAGIC: u32 = 0x4654_6C67;
const CHUNK_JSON: u32 = 0x4E4F_534A;
const CHUNK_BIN: u32 = 0x004E_4942;
const ARRAY_BUFFER: u32 = 34962;
const ELEMENT_ARRAY_BUFFER: u32 = 34963;
const FLOAT: u32 = 5126;
const UNSIGNED_INT: u32 = 5125;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BakeOptions {
    /// Frames between samples; at least 1.
    pub sample_step: u32,
    /// Store the binary buffer inside the `.glb`; otherwise it is written to
    /// a sibling `.bin` file.
    pub embed_buffers: bool,
}

impl Default for BakeOptions {
    fn default() -> Self {
        Self {
            sample_step: 1,
            embed_buffers: true,
        }
    }
}

#[derive(Default)]
struct Buffers {
    bin: Vec<u8>,
    views: Vec<Value>,
    accessors: Vec<Value>,
}

impl Buffers {
    fn view(&mut self, bytes: &[u8], target: Option<u32>) -> usize {
        while !self.bin.len().is_multiple_of(4) {
            self.bin.push(0);
        }
        let mut view = json!({
            "buffer": 0,
            "byteOffset": self.bin.len(),
            "byteLength": bytes.len(),
        });
        if let Some(t) = target {
            view["target"] = json!(t);
        }
        self.bin.extend_from_slice(bytes);
        self.views.push(view);
        self.views.len() - 1
    }

    /// Float accessor of `N`-component elements; `bounds` adds min/max.
    fn floats<const N: usize>(
        &mut self,
        data: &[[f32; N]],
        target: Option<u32>,
        bounds: bool,
    ) -> usize {
        let bytes: Vec<u8> = data
            .iter()
            .flatten()
            .flat_map(|v| v.to_le_bytes())
            .collect();
        let view = self.view(&bytes, target);
        let kind = match N {
            1 => "SCALAR",
            3 => "VEC3",
            4 => "VEC4",
            _ => unreachable!("unused accessor width"),
        };
        let mut accessor = json!({
            "bufferView": view,
            "componentType": FLOAT,
            "count": data.len(),
            "type": kind,
        });
        if bounds {
            let mut lo = [f32::INFINITY; N];
            let mut hi = [f32::NEG_INFINITY; N];
            for v in data {
                for k in 0..N {
                    lo[k] = lo[k].min(v[k]);
                    hi[k] = hi[k].max(v[k]);
                }
            }
            accessor["min"] = json!(lo.to_vec());
            accessor["max"] = json!(hi.to_vec());
        }
        self.accessors.push(accessor);
        self.accessors.len() - 1
    }

    fn indices(&mut self, data: &[u32]) -> usize {
        let bytes: Vec<u8> = data.iter().flat_map(|v| v.to_le_bytes()).collect();
        let view = self.view(&bytes, Some(ELEMENT_ARRAY_BUFFER));
        self.accessors.push(json!({
            "bufferView": view,
            "componentType": UNSIGNED_INT,
            "count": data.len(),
            "type": "SCALAR",
        }));
        self.accessors.len() - 1
    }

    /// Flat-shaded copy of `mesh`: `(positions, normals, indices)` accessors.
    fn geometry(&mut self, mesh: &TriMesh) -> (usize, usize, usize) {
        let v = mesh.vertices();
        let mut positions = Vec::with_capacity(mesh.triangles().len() * 3);
        let mut normals = Vec::with_capacity(positions.capacity());
        for t in mesh.triangles() {
            let (a, b, c) = (v[t[0]], v[t[1]], v[t[2]]);
            let n = (b - a).cross(&(c - a)).normalize();
            for p in [a, b, c] {
                positions.push([p.x as f32, p.y as f32, p.z as f32]);
                normals.push([n.x as f32, n.y as f32, n.z as f32]);
            }
        }
        let indices: Vec<u32> = (0..positions.len() as u32).collect();
        (
            self.floats(&positions, Some(ARRAY_BUFFER), true),
            self.floats(&normals, Some(ARRAY_BUFFER), false),
            self.indices(&indices),
        )
    }
}

struct NodeTracks {
    translation: Vec<[f32; 3]>,
    rotation: Vec<[f32; 4]>,
    scale: Vec<[f32; 3]>,
}

/// Sampled TRS of an object; hidden samples get zero scale.
fn node_tracks(o: &BakedObject) -> NodeTracks {
    let quats = continuous_quats(o.samples.iter().map(|s| s.pose.rotation));
    NodeTracks {
        translation: o
            .samples
            .iter()
            .map(|s| s.pose.translation.vector.map(|x| x as f32).into())
            .collect(),
        rotation: quats
            .iter()
            .map(|q| [q.i as f32, q.j as f32, q.k as f32, q.w as f32])
            .collect(),
        scale: o
            .samples
            .iter()
            .map(|s| {
                if s.visible {
                    s.scale.map(|x| x as f32).into()
                } else {
                    [0.0; 3]
                }
            })
            .collect(),
    }
}

fn varies<T: PartialEq>(values: &[T]) -> bool {
    values.windows(2).any(|w| w[0] != w[1])
}

fn material_key(o: &BakedObject) -> [u32; 4] {
    let s = o
        .samples
        .iter()
        .find(|s| s.visible)
        .unwrap_or(&o.samples[0]);
    let c = s.color;
    [c.r(), c.g(), c.b(), c.a() * s.alpha].map(|x| (x as f32).to_bits())
}

/// Writes the scene as binary glTF with one node per object and a single
/// animation baked at integer frames.
pub fn export_gltf(
    scene: &Scene,
    out_path: &Path,
    opts: &BakeOptions,
) -> Result<PathBuf, ExportError> {
    if opts.sample_step == 0 {
        return Err(ExportError::InvalidOptions(
            "sample_step must be at least 1".into(),
        ));
    }
    let frames = sample_frames(scene, opts.sample_step);
    let baked = bake(scene, &frames);
    if baked.is_empty() {
        return Err(ExportError::EmptyScene);
    }

    let mut buffers = Buffers::default();
    let mut geometries: HashMap<String, (usize, usize, usize)> = HashMap::new();
    let mut materials: Vec<Value> = Vec::new();
    let mut material_index: HashMap<[u32; 4], usize> = HashMap::new();
    let mut meshes: Vec<Value> = Vec::new();
    let mut mesh_index: HashMap<((usize, usize, usize), usize), usize> = HashMap::new();
    let mut nodes: Vec<Value> = Vec::new();
    let mut samplers: Vec<Value> = Vec::new();
    let mut channels: Vec<Value> = Vec::new();
    let mut time_accessor = None;

    for o in &baked {
        let mesh = scene
            .mesh(&o.mesh)
            .ok_or_else(|| ExportError::MissingMesh(o.id.clone()))?;
        let key = to_obj_string(&mesh);
        let geometry = match geometries.get(&key) {
            Some(g) => *g,
            None => {
                let g = buffers.geometry(&mesh);
                geometries.insert(key, g);
                g
            }
        };

        let mkey = material_key(o);
        let material = *material_index.entry(mkey).or_insert_with(|| {
            let rgba = mkey.map(f32::from_bits);
            let mut m = json!({
                "name": format!("material{}", materials.len()),
                "pbrMetallicRoughness": {
                    "baseColorFactor": rgba,
                    "metallicFactor": 0.0,
                    "roughnessFactor": 1.0,
                },
            });
            if rgba[3] < 1.0 {
                m["alphaMode"] = json!("BLEND");
            }
            materials.push(m);
            materials.len() - 1
        });

        let mesh_id = *mesh_index.entry((geometry, material)).or_insert_with(|| {
            let (position, normal, indices) = geometry;
            meshes.push(json!({
                "primitives": [{
                    "attributes": {"POSITION": position, "NORMAL": normal},
                    "indices": indices,
                    "material": material,
                }],
            }));
            meshes.len() - 1
        });

        let tracks = node_tracks(o);
        let node = nodes.len();
        nodes.push(json!({
            "name": o.id,
            "mesh": mesh_id,
            "translation": tracks.translation[0],
            "rotation": tracks.rotation[0],
            "scale": tracks.scale[0],
        }));

        let moves = [
            varies(&tracks.translation),
            varies(&tracks.rotation),
            varies(&tracks.scale),
        ];
        if moves.iter().any(|m| *m) && time_accessor.is_none() {
            let fps = scene.frame_rate();
            let times: Vec<[f32; 1]> = frames.iter().map(|f| [(f / fps) as f32]).collect();
            time_accessor = Some(buffers.floats(&times, None, true));
        }
        let mut animate = |path: &str, output: usize| {
            samplers.push(json!({
                "input": time_accessor.expect("set before use"),
                "output": output,
                "interpolation": "LINEAR",
            }));
            channels.push(json!({
                "sampler": samplers.len() - 1,
                "target": {"node": node, "path": path},
            }));
        };
        if moves[0] {
            let out = buffers.floats(&tracks.translation, None, false);
            animate("translation", out);
        }
        if moves[1] {
            let out = buffers.floats(&tracks.rotation, None, false);
            animate("rotation", out);
        }
        if moves[2] {
            let out = buffers.floats(&tracks.scale, None, false);
            animate("scale", out);
        }
    }

    while !buffers.bin.len().is_multiple_of(4) {
        buffers.bin.push(0);
    }
    let mut buffer = json!({"byteLength": buffers.bin.len()});
    if !opts.embed_buffers {
        let bin_path = out_path.with_extension("bin");
        fs::write(&bin_path, &buffers.bin).map_err(io_err(&bin_path))?;
        let name = bin_path
            .file_name()
            .expect("path has a file name")
            .to_string_lossy()
            .into_owned();
        buffer["uri"] = json!(name);
    }

    let mut root = json!({
        "asset": {"version": "2.0", "generator": concat!("roboscene ", env!("CARGO_PKG_VERSION"))},
        "scene": 0,
        "scenes": [{"nodes": (0..nodes.len()).collect::<Vec<_>>()}],
        "nodes": nodes,
        "meshes": meshes,
        "materials": materials,
        "accessors": buffers.accessors,
        "bufferViews": buffers.views,
        "buffers": [buffer],
    });
    if !channels.is_empty() {
        root["animations"] = json!([{"name": "baked", "samplers": samplers, "channels": channels}]);
    }

    let mut json_bytes = serde_json::to_vec(&root).expect("glTF JSON serializes");
    while !json_bytes.len().is_multiple_of(4) {
        json_bytes.push(b' ');
    }
    let embed = opts.embed_buffers && !buffers.bin.is_empty();
    let mut total = 12 + 8 + json_bytes.len();
    if embed {
        total += 8 + buffers.bin.len();
    }
    let mut glb = Vec::with_capacity(total);
    glb.extend_from_slice(&GLB_MAGIC.to_le_bytes());
    glb.extend_from_slice(&2u32.to_le_bytes());
    glb.extend_from_slice(&(total as u32).to_le_bytes());
    glb.extend_from_slice(&(json_bytes.len() as u32).to_le_bytes());
    glb.extend_from_slice(&CHUNK_JSON.to_le_bytes());
    glb.extend_from_slice(&json_bytes);
    if embed {
        glb.extend_from_slice(&(buffers.bin.len() as u32).to_le_bytes());
        glb.extend_from_slice(&CHUNK_BIN.to_le_bytes());
        glb.extend_from_slice(&buffers.bin);
    }
    if let Some(parent) = out_path.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(parent).map_err(io_err(parent))?;
    }
    fs::write(out_path, glb).map_err(io_err(out_path))?;
    Ok(out_path.to_path_buf())
}
