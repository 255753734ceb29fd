//! Triangle meshes, convex hulls, approximate convex decomposition and the
//! line/cube primitives used for annotations.

mod decomp;
mod hull;
mod io;
mod primitives;

use std::path::PathBuf;

use thiserror::Error;

use crate::math::{Pose, Vec3};

pub use decomp::{convex_decomposition, DecompParams};
pub use hull::{convex_hull, HULL_EPSILON};
pub use io::{read_mesh, read_obj_str, to_obj_string, write_obj};
pub use primitives::{
    cube_mesh, line_mesh, unit_cube, unit_cylinder, CYLINDER_SEGMENTS, DEFAULT_LINE_RADIUS,
};

/// Triangles whose area is at or below this are dropped on construction.
pub const MIN_TRIANGLE_AREA: f64 = 1e-12;

#[derive(Debug, Error)]
pub enum GeometryError {
    #[error("convex hull needs at least 4 points, got {0}")]
    TooFewPoints(usize),
    #[error("degenerate point set: {0}")]
    Degenerate(&'static str),
    #[error("triangle {triangle} references vertex {index} but the mesh has {len} vertices")]
    IndexOutOfRange {
        triangle: usize,
        index: usize,
        len: usize,
    },
    #[error("line has zero length")]
    ZeroLengthLine,
    #[error("line radius must be positive, got {0}")]
    NonPositiveRadius(f64),
    #[error("box dimension {axis} must be positive, got {value}")]
    NonPositiveDimension { axis: char, value: f64 },
    #[error("invalid decomposition parameters: {0}")]
    InvalidParams(String),
    #[error("unsupported mesh format: {}", .0.display())]
    UnsupportedFormat(PathBuf),
    #[error("failed to read or write {}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("malformed mesh file {}: {message}", path.display())]
    Parse { path: PathBuf, message: String },
}

/// Indexed triangle mesh.
///
/// Construction rejects out-of-range indices and silently drops triangles
/// that repeat a vertex or whose area is at most [`MIN_TRIANGLE_AREA`].
#[derive(Debug, Clone, PartialEq, Default)]
pub struct TriMesh {
    vertices: Vec<Vec3>,
    triangles: Vec<[usize; 3]>,
}

impl TriMesh {
    pub fn new(vertices: Vec<Vec3>, triangles: Vec<[usize; 3]>) -> Result<Self, GeometryError> {
        let len = vertices.len();
        let mut kept = Vec::with_capacity(triangles.len());
        for (i, tri) in triangles.into_iter().enumerate() {
            if let Some(&index) = tri.iter().find(|&&v| v >= len) {
                return Err(GeometryError::IndexOutOfRange {
                    triangle: i,
                    index,
                    len,
                });
            }
            if tri[0] == tri[1] || tri[1] == tri[2] || tri[0] == tri[2] {
                continue;
            }
            if triangle_area(&vertices[tri[0]], &vertices[tri[1]], &vertices[tri[2]])
                <= MIN_TRIANGLE_AREA
            {
                continue;
            }
            kept.push(tri);
        }
        Ok(Self {
            vertices,
            triangles: kept,
        })
    }

    pub fn empty() -> Self {
        Self::default()
    }

    pub fn vertices(&self) -> &[Vec3] {
        &self.vertices
    }

    pub fn triangles(&self) -> &[[usize; 3]] {
        &self.triangles
    }

    pub fn is_empty(&self) -> bool {
        self.triangles.is_empty()
    }

    /// Applies a per-axis scale first, then the pose.
    pub fn transformed(&self, pose: &Pose, scale: &Vec3) -> TriMesh {
        let vertices = self
            .vertices
            .iter()
            .map(|v| pose.transform_point(&v.component_mul(scale).into()).coords)
            .collect();
        let mut triangles = self.triangles.clone();
        // a mirroring scale flips the winding
        if scale.x * scale.y * scale.z < 0.0 {
            for t in &mut triangles {
                t.swap(1, 2);
            }
        }
        TriMesh {
            vertices,
            triangles,
        }
    }

    /// Appends `other`, re-indexing its triangles.
    pub fn append(&mut self, other: &TriMesh) {
        let offset = self.vertices.len();
        self.vertices.extend_from_slice(&other.vertices);
        self.triangles.extend(
            other
                .triangles
                .iter()
                .map(|t| [t[0] + offset, t[1] + offset, t[2] + offset]),
        );
    }

    /// Axis-aligned bounds `(min, max)`; `None` for a mesh without vertices.
    pub fn aabb(&self) -> Option<(Vec3, Vec3)> {
        aabb(&self.vertices)
    }

    pub fn volume(&self) -> f64 {
        mesh_volume(self)
    }

    /// Unit outward normal and offset (`n . x = d`) of every triangle.
    pub fn face_planes(&self) -> Vec<(Vec3, f64)> {
        self.triangles
            .iter()
            .map(|t| {
                let (a, b, c) = (
                    self.vertices[t[0]],
                    self.vertices[t[1]],
                    self.vertices[t[2]],
                );
                let n = (b - a).cross(&(c - a)).normalize();
                (n, n.dot(&a))
            })
            .collect()
    }

    /// Largest signed distance of `p` above any face plane. For a closed
    /// convex mesh, `<= tol` means `p` is inside or on the surface.
    pub fn max_plane_distance(&self, p: &Vec3) -> f64 {
        self.face_planes()
            .iter()
            .map(|(n, d)| n.dot(p) - d)
            .fold(f64::NEG_INFINITY, f64::max)
    }
}

pub(crate) fn triangle_area(a: &Vec3, b: &Vec3, c: &Vec3) -> f64 {
    0.5 * (b - a).cross(&(c - a)).norm()
}

pub(crate) fn aabb(points: &[Vec3]) -> Option<(Vec3, Vec3)> {
    let first = *points.first()?;
    Some(
        points
            .iter()
            .fold((first, first), |(lo, hi), p| (lo.inf(p), hi.sup(p))),
    )
}

/// Signed volume by the divergence theorem; positive for a closed mesh with
/// outward-facing (counter-clockwise) triangles.
pub fn mesh_volume(mesh: &TriMesh) -> f64 {
    mesh.triangles
        .iter()
        .map(|t| {
            let (a, b, c) = (
                &mesh.vertices[t[0]],
                &mesh.vertices[t[1]],
                &mesh.vertices[t[2]],
            );
            a.dot(&b.cross(c))
        })
        .sum::<f64>()
        / 6.0
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::math::Rpy;

    #[test]
    fn construction_validates_and_cleans() {
        let v = vec![Vec3::zeros(), Vec3::x(), Vec3::y(), Vec3::x() * 2.0];
        let err = TriMesh::new(v.clone(), vec![[0, 1, 7]]).unwrap_err();
        assert!(matches!(
            err,
            GeometryError::IndexOutOfRange { index: 7, .. }
        ));

        // repeated index and collinear (zero area) triangles are dropped
        let m = TriMesh::new(v, vec![[0, 1, 2], [0, 0, 1], [0, 1, 3]]).unwrap();
        assert_eq!(m.triangles(), &[[0, 1, 2]]);
    }

    #[test]
    fn unit_cube_volume_and_scaling() {
        let cube = unit_cube();
        assert!((mesh_volume(&cube) - 1.0).abs() < 1e-9);
        let scaled = cube.transformed(&Pose::identity(), &Vec3::repeat(2.0));
        assert!((mesh_volume(&scaled) - 8.0).abs() < 1e-9);
    }

    #[test]
    fn mirrored_scale_keeps_volume_positive() {
        let cube = cube_mesh(Vec3::zeros(), Rpy::default(), Vec3::new(1.0, 2.0, 3.0)).unwrap();
        let mirrored = cube.transformed(&Pose::identity(), &Vec3::new(-1.0, 1.0, 1.0));
        assert!((mesh_volume(&mirrored) - 6.0).abs() < 1e-9);
    }
}
