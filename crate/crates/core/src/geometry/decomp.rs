//! Approximate convex decomposition by recursive hull splitting.
//!
//! A node holds a subset of the mesh vertices. Its concavity is the share of
//! its vertex hull that lies outside the mesh, estimated on a fixed lattice
//! with the generalized winding number. Nodes above the tolerance are split
//! at the vertex centroid, across the longest side of their bounding box.

use std::f64::consts::PI;

use super::{aabb, convex_hull, GeometryError, TriMesh};
use crate::math::Vec3;

/// Lattice resolution per axis for the concavity estimate.
const SAMPLES_PER_AXIS: usize = 10;

/// Coverage tolerance used when pruning parts that contain no solid.
const COVER_TOL: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DecompParams {
    /// Largest accepted fraction of a part's hull lying outside the mesh.
    pub concavity_tol: f64,
    /// Maximum split depth; at most `2^max_depth` parts are produced.
    pub max_depth: u32,
}

impl Default for DecompParams {
    fn default() -> Self {
        Self {
            concavity_tol: 0.05,
            max_depth: 6,
        }
    }
}

impl DecompParams {
    pub fn validate(&self) -> Result<(), GeometryError> {
        if !(self.concavity_tol > 0.0 && self.concavity_tol <= 1.0) {
            return Err(GeometryError::InvalidParams(format!(
                "concavity_tol must lie in (0, 1], got {}",
                self.concavity_tol
            )));
        }
        // 2^max_depth must stay representable
        if self.max_depth > 32 {
            return Err(GeometryError::InvalidParams(format!(
                "max_depth must be at most 32, got {}",
                self.max_depth
            )));
        }
        Ok(())
    }
}

struct Part {
    hull: TriMesh,
    concavity: f64,
}

/// Splits `mesh` into convex parts. Every input vertex lies in at least one
/// part; parts are ordered depth-first with the negative half first.
pub fn convex_decomposition(
    mesh: &TriMesh,
    params: &DecompParams,
) -> Result<Vec<TriMesh>, GeometryError> {
    params.validate()?;
    let hull = convex_hull(mesh.vertices())?;
    let subset: Vec<usize> = (0..mesh.vertices().len()).collect();
    let mut parts = Vec::new();
    split(mesh, subset, hull, 0, params, &mut parts);
    Ok(prune_hollow(parts))
}

fn split(
    mesh: &TriMesh,
    subset: Vec<usize>,
    hull: TriMesh,
    depth: u32,
    params: &DecompParams,
    out: &mut Vec<Part>,
) {
    let concavity = concavity(mesh, &hull);
    if depth >= params.max_depth || concavity <= params.concavity_tol {
        out.push(Part { hull, concavity });
        return;
    }

    let points: Vec<Vec3> = subset.iter().map(|&i| mesh.vertices()[i]).collect();
    let (lo, hi) = aabb(&points).expect("non-empty subset");
    let extent = hi - lo;
    let axis = extent.imax();
    let centroid = points.iter().map(|p| p[axis]).sum::<f64>() / points.len() as f64;
    let eps = 1e-12 * extent.max().max(1.0);

    // vertices on the plane go to both halves
    let negative: Vec<usize> = subset
        .iter()
        .copied()
        .filter(|&i| mesh.vertices()[i][axis] <= centroid + eps)
        .collect();
    let positive: Vec<usize> = subset
        .iter()
        .copied()
        .filter(|&i| mesh.vertices()[i][axis] >= centroid - eps)
        .collect();
    if negative.len() == subset.len() || positive.len() == subset.len() {
        out.push(Part { hull, concavity });
        return;
    }
    let hull_of = |s: &[usize]| {
        let pts: Vec<Vec3> = s.iter().map(|&i| mesh.vertices()[i]).collect();
        convex_hull(&pts)
    };
    match (hull_of(&negative), hull_of(&positive)) {
        (Ok(neg_hull), Ok(pos_hull)) => {
            split(mesh, negative, neg_hull, depth + 1, params, out);
            split(mesh, positive, pos_hull, depth + 1, params, out);
        }
        // a flat or tiny side cannot become a part of its own
        _ => out.push(Part { hull, concavity }),
    }
}

/// Drops parts that enclose no lattice sample of the solid when every one of
/// their vertices is already covered by another kept part.
fn prune_hollow(parts: Vec<Part>) -> Vec<TriMesh> {
    let mut keep = vec![true; parts.len()];
    for i in 0..parts.len() {
        if parts[i].concavity < 1.0 - 1e-12 {
            continue;
        }
        let covered = parts[i].hull.vertices().iter().all(|v| {
            parts
                .iter()
                .enumerate()
                .any(|(j, p)| j != i && keep[j] && p.hull.max_plane_distance(v) <= COVER_TOL)
        });
        if covered {
            keep[i] = false;
        }
    }
    parts
        .into_iter()
        .zip(keep)
        .filter_map(|(p, k)| k.then_some(p.hull))
        .collect()
}

/// Fraction of `hull`'s volume outside `mesh`, estimated on a regular
/// lattice of cell centers over the hull's bounding box.
fn concavity(mesh: &TriMesh, hull: &TriMesh) -> f64 {
    let Some((lo, hi)) = hull.aabb() else {
        return 0.0;
    };
    let planes = hull.face_planes();
    let n = SAMPLES_PER_AXIS;
    let step = (hi - lo) / n as f64;
    let mut total = 0usize;
    let mut solid = 0usize;
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                let p = lo
                    + Vec3::new(
                        (i as f64 + 0.5) * step.x,
                        (j as f64 + 0.5) * step.y,
                        (k as f64 + 0.5) * step.z,
                    );
                if planes.iter().any(|(normal, d)| normal.dot(&p) - d > 0.0) {
                    continue;
                }
                total += 1;
                if winding_number(mesh, &p).abs() > 0.5 {
                    solid += 1;
                }
            }
        }
    }
    if total == 0 {
        return 0.0;
    }
    1.0 - solid as f64 / total as f64
}

/// Generalized winding number: summed signed solid angle over `4 pi`.
pub(crate) fn winding_number(mesh: &TriMesh, p: &Vec3) -> f64 {
    let v = mesh.vertices();
    let total: f64 = mesh
        .triangles()
        .iter()
        .map(|t| {
            let a = v[t[0]] - p;
            let b = v[t[1]] - p;
            let c = v[t[2]] - p;
            let (la, lb, lc) = (a.norm(), b.norm(), c.norm());
            let num = a.dot(&b.cross(&c));
            let den = la * lb * lc + a.dot(&b) * lc + a.dot(&c) * lb + b.dot(&c) * la;
            2.0 * num.atan2(den)
        })
        .sum();
    total / (4.0 * PI)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{read_obj_str, unit_cube};

    #[test]
    fn winding_number_inside_and_outside() {
        let cube = unit_cube();
        assert!((winding_number(&cube, &Vec3::zeros()) - 1.0).abs() < 1e-9);
        assert!(winding_number(&cube, &Vec3::repeat(2.0)).abs() < 1e-9);
    }

    #[test]
    fn cube_is_a_single_part() {
        let parts = convex_decomposition(&unit_cube(), &DecompParams::default()).unwrap();
        assert_eq!(parts.len(), 1);
        assert_eq!(parts[0].vertices().len(), 8);
    }

    #[test]
    fn params_are_validated() {
        let bad = DecompParams {
            concavity_tol: 0.0,
            ..Default::default()
        };
        assert!(convex_decomposition(&unit_cube(), &bad).is_err());
        let bad = DecompParams {
            concavity_tol: 1.5,
            ..Default::default()
        };
        assert!(bad.validate().is_err());
    }

    #[test]
    fn depth_zero_returns_the_hull() {
        let l = read_obj_str(include_str!("../../tests/fixtures/meshes/l_prism.obj")).unwrap();
        let params = DecompParams {
            max_depth: 0,
            ..Default::default()
        };
        let parts = convex_decomposition(&l, &params).unwrap();
        assert_eq!(parts.len(), 1);
    }
}
