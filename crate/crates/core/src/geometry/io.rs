use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use super::{GeometryError, TriMesh};
use crate::math::Vec3;

/// Reads an OBJ or STL (ASCII or binary) mesh, chosen by file extension.
pub fn read_mesh(path: &Path) -> Result<TriMesh, GeometryError> {
    let ext = path
        .extension()
        .and_then(|e| e.to_str())
        .map(str::to_ascii_lowercase)
        .unwrap_or_default();
    match ext.as_str() {
        "obj" => {
            let text = fs::read_to_string(path).map_err(|source| GeometryError::Io {
                path: path.to_path_buf(),
                source,
            })?;
            read_obj_str(&text).map_err(|message| GeometryError::Parse {
                path: path.to_path_buf(),
                message,
            })
        }
        "stl" => read_stl(path),
        _ => Err(GeometryError::UnsupportedFormat(path.to_path_buf())),
    }
}

/// Parses the `v` and `f` records of an OBJ document. Polygonal faces are
/// fan-triangulated; texture/normal references and every other record are
/// ignored.
pub fn read_obj_str(text: &str) -> Result<TriMesh, String> {
    let mut vertices = Vec::new();
    let mut triangles = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let mut fields = line.split_whitespace();
        match fields.next() {
            Some("v") => {
                let coords: Vec<f64> = fields
                    .take(3)
                    .map(|f| f.parse::<f64>())
                    .collect::<Result<_, _>>()
                    .map_err(|e| format!("line {}: {e}", lineno + 1))?;
                if coords.len() != 3 {
                    return Err(format!("line {}: vertex needs 3 coordinates", lineno + 1));
                }
                vertices.push(Vec3::new(coords[0], coords[1], coords[2]));
            }
            Some("f") => {
                let mut face = Vec::new();
                for f in fields {
                    let idx = f.split('/').next().unwrap_or("");
                    let i: i64 = idx
                        .parse()
                        .map_err(|_| format!("line {}: bad face index {f:?}", lineno + 1))?;
                    let resolved = match i {
                        0 => return Err(format!("line {}: face index 0", lineno + 1)),
                        i if i > 0 => i - 1,
                        i => vertices.len() as i64 + i,
                    };
                    if resolved < 0 || resolved as usize >= vertices.len() {
                        return Err(format!("line {}: face index {i} out of range", lineno + 1));
                    }
                    face.push(resolved as usize);
                }
                if face.len() < 3 {
                    return Err(format!(
                        "line {}: face needs at least 3 vertices",
                        lineno + 1
                    ));
                }
                for k in 1..face.len() - 1 {
                    triangles.push([face[0], face[k], face[k + 1]]);
                }
            }
            _ => {}
        }
    }
    TriMesh::new(vertices, triangles).map_err(|e| e.to_string())
}

fn read_stl(path: &Path) -> Result<TriMesh, GeometryError> {
    let mut file = fs::File::open(path).map_err(|source| GeometryError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let indexed = stl_io::read_stl(&mut file).map_err(|e| GeometryError::Parse {
        path: path.to_path_buf(),
        message: e.to_string(),
    })?;
    let vertices = indexed
        .vertices
        .iter()
        .map(|v| Vec3::new(v[0] as f64, v[1] as f64, v[2] as f64))
        .collect();
    let triangles = indexed.faces.iter().map(|f| f.vertices).collect();
    TriMesh::new(vertices, triangles)
}

/// OBJ text with one `v` per vertex and one 1-based `f` per triangle.
/// Floats use the shortest representation that round-trips, so the output
/// is deterministic and lossless.
pub fn to_obj_string(mesh: &TriMesh) -> String {
    let mut out = String::new();
    for v in mesh.vertices() {
        let _ = writeln!(out, "v {} {} {}", v.x, v.y, v.z);
    }
    for t in mesh.triangles() {
        let _ = writeln!(out, "f {} {} {}", t[0] + 1, t[1] + 1, t[2] + 1);
    }
    out
}

pub fn write_obj(mesh: &TriMesh, path: &Path) -> Result<(), GeometryError> {
    fs::write(path, to_obj_string(mesh)).map_err(|source| GeometryError::Io {
        path: PathBuf::from(path),
        source,
    })
}
