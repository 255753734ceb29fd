use std::f64::consts::TAU;

use super::{GeometryError, TriMesh};
use crate::math::{pose, Rpy, Vec3};

/// Radial segments of every generated cylinder.
pub const CYLINDER_SEGMENTS: usize = 16;
pub const DEFAULT_LINE_RADIUS: f64 = 0.01;

const MIN_LINE_LENGTH: f64 = 1e-9;

/// Capped cylinder of `radius` whose axis runs from `start` to `end`.
pub fn line_mesh(start: Vec3, end: Vec3, radius: f64) -> Result<TriMesh, GeometryError> {
    let axis = end - start;
    if axis.norm().is_nan() || axis.norm() <= MIN_LINE_LENGTH {
        return Err(GeometryError::ZeroLengthLine);
    }
    if radius.is_nan() || radius <= 0.0 {
        return Err(GeometryError::NonPositiveRadius(radius));
    }
    let d = axis.normalize();
    // seed with the coordinate axis least aligned with d
    let seed = if d.x.abs() <= d.y.abs() && d.x.abs() <= d.z.abs() {
        Vec3::x()
    } else if d.y.abs() <= d.z.abs() {
        Vec3::y()
    } else {
        Vec3::z()
    };
    let u = d.cross(&seed).normalize();
    let v = d.cross(&u);
    Ok(cylinder(start, end, &u, &v, radius))
}

fn cylinder(start: Vec3, end: Vec3, u: &Vec3, v: &Vec3, radius: f64) -> TriMesh {
    let n = CYLINDER_SEGMENTS;
    let mut vertices = Vec::with_capacity(2 * n + 2);
    for base in [start, end] {
        for i in 0..n {
            let theta = TAU * i as f64 / n as f64;
            vertices.push(base + (u * theta.cos() + v * theta.sin()) * radius);
        }
    }
    vertices.push(start);
    vertices.push(end);
    let (cb, ct) = (2 * n, 2 * n + 1);
    let mut triangles = Vec::with_capacity(4 * n);
    for i in 0..n {
        let j = (i + 1) % n;
        triangles.push([i, j, n + j]);
        triangles.push([i, n + j, n + i]);
        triangles.push([cb, j, i]);
        triangles.push([ct, n + i, n + j]);
    }
    TriMesh {
        vertices,
        triangles,
    }
}

const BOX_TRIANGLES: [[usize; 3]; 12] = [
    [0, 2, 1],
    [0, 3, 2],
    [4, 5, 6],
    [4, 6, 7],
    [0, 1, 5],
    [0, 5, 4],
    [1, 2, 6],
    [1, 6, 5],
    [2, 3, 7],
    [2, 7, 6],
    [3, 0, 4],
    [3, 4, 7],
];

fn box_corners(half: &Vec3) -> [Vec3; 8] {
    let (x, y, z) = (half.x, half.y, half.z);
    [
        Vec3::new(-x, -y, -z),
        Vec3::new(x, -y, -z),
        Vec3::new(x, y, -z),
        Vec3::new(-x, y, -z),
        Vec3::new(-x, -y, z),
        Vec3::new(x, -y, z),
        Vec3::new(x, y, z),
        Vec3::new(-x, y, z),
    ]
}

/// Box with extents `dims` (length, width, height along the local x, y, z
/// axes), rotated by `orientation` about its center and moved to `center`.
pub fn cube_mesh(center: Vec3, orientation: Rpy, dims: Vec3) -> Result<TriMesh, GeometryError> {
    for (axis, value) in ['x', 'y', 'z'].into_iter().zip(dims.iter()) {
        if value.is_nan() || *value <= 0.0 {
            return Err(GeometryError::NonPositiveDimension {
                axis,
                value: *value,
            });
        }
    }
    let placement = pose(center, orientation.to_quat());
    let vertices = box_corners(&(dims / 2.0))
        .iter()
        .map(|c| placement.transform_point(&(*c).into()).coords)
        .collect();
    Ok(TriMesh {
        vertices,
        triangles: BOX_TRIANGLES.to_vec(),
    })
}

/// Unit box centered at the origin; scaled by `dims` it equals [`cube_mesh`].
pub fn unit_cube() -> TriMesh {
    TriMesh {
        vertices: box_corners(&Vec3::repeat(0.5)).to_vec(),
        triangles: BOX_TRIANGLES.to_vec(),
    }
}

/// Radius-1 cylinder from the origin to `+z` at length 1. Scaling by
/// `(r, r, len)` and rotating `+z` onto a direction gives a line mesh.
pub fn unit_cylinder() -> TriMesh {
    cylinder(Vec3::zeros(), Vec3::z(), &Vec3::x(), &Vec3::y(), 1.0)
}
