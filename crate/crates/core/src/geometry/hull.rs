//! 3D quickhull.
//!
//! Faces are kept as oriented triangles with an edge -> face map for
//! adjacency. Every unprocessed point sits in the outside set of exactly one
//! face; the farthest point of a face's set is added by flooding the visible
//! region from that face, replacing it with a fan over the horizon.

use std::collections::{HashMap, VecDeque};

use super::{aabb, GeometryError, TriMesh};
use crate::math::Vec3;

/// A point counts as outside a face when it is farther than this above it.
pub const HULL_EPSILON: f64 = 1e-10;

/// Minimum extent (relative to the input diameter, at least 1) the initial
/// simplex must have in each new dimension.
const DEGENERACY_TOL: f64 = 1e-9;

struct Face {
    v: [usize; 3],
    normal: Vec3,
    offset: f64,
    outside: Vec<usize>,
    alive: bool,
}

impl Face {
    fn new(points: &[Vec3], v: [usize; 3]) -> Self {
        let (a, b, c) = (points[v[0]], points[v[1]], points[v[2]]);
        let normal = (b - a).cross(&(c - a)).normalize();
        Face {
            v,
            normal,
            offset: normal.dot(&a),
            outside: Vec::new(),
            alive: true,
        }
    }

    fn distance(&self, p: &Vec3) -> f64 {
        self.normal.dot(p) - self.offset
    }

    fn edges(&self) -> [(usize, usize); 3] {
        let [a, b, c] = self.v;
        [(a, b), (b, c), (c, a)]
    }
}

struct Builder<'a> {
    points: &'a [Vec3],
    faces: Vec<Face>,
    edges: HashMap<(usize, usize), usize>,
}

impl<'a> Builder<'a> {
    fn add_face(&mut self, v: [usize; 3]) -> usize {
        let id = self.faces.len();
        let face = Face::new(self.points, v);
        for e in face.edges() {
            let previous = self.edges.insert(e, id);
            debug_assert!(previous.is_none(), "non-manifold edge {e:?}");
        }
        self.faces.push(face);
        id
    }

    fn kill_face(&mut self, id: usize) -> Vec<usize> {
        let face = &mut self.faces[id];
        face.alive = false;
        let edges = face.edges();
        let outside = std::mem::take(&mut face.outside);
        for e in edges {
            if self.edges.get(&e) == Some(&id) {
                self.edges.remove(&e);
            }
        }
        outside
    }

    /// Puts `p` in the outside set of the first listed face it is above,
    /// then of any other live face. Returns false if `p` is inside.
    fn assign(&mut self, p: usize, preferred: &[usize]) -> bool {
        let point = self.points[p];
        let pick = preferred
            .iter()
            .copied()
            .find(|&f| self.faces[f].distance(&point) > HULL_EPSILON)
            .or_else(|| {
                (0..self.faces.len())
                    .find(|&f| self.faces[f].alive && self.faces[f].distance(&point) > HULL_EPSILON)
            });
        match pick {
            Some(f) => {
                self.faces[f].outside.push(p);
                true
            }
            None => false,
        }
    }

    fn next_eye(&self) -> Option<(usize, usize)> {
        self.faces.iter().enumerate().find_map(|(id, f)| {
            if !f.alive || f.outside.is_empty() {
                return None;
            }
            let mut best = f.outside[0];
            let mut best_d = f.distance(&self.points[best]);
            for &p in &f.outside[1..] {
                let d = f.distance(&self.points[p]);
                if d > best_d {
                    best = p;
                    best_d = d;
                }
            }
            Some((id, best))
        })
    }

    fn add_point(&mut self, start: usize, eye: usize) {
        let eye_pos = self.points[eye];
        let mut visible = vec![start];
        let mut seen = HashMap::from([(start, true)]);
        let mut horizon = Vec::new();
        let mut queue = VecDeque::from([start]);
        while let Some(f) = queue.pop_front() {
            for (a, b) in self.faces[f].edges() {
                let Some(&n) = self.edges.get(&(b, a)) else {
                    continue;
                };
                match seen.get(&n) {
                    Some(true) => continue,
                    Some(false) => horizon.push((a, b)),
                    None => {
                        let is_visible = self.faces[n].distance(&eye_pos) > HULL_EPSILON;
                        seen.insert(n, is_visible);
                        if is_visible {
                            visible.push(n);
                            queue.push_back(n);
                        } else {
                            horizon.push((a, b));
                        }
                    }
                }
            }
        }

        let mut orphans = Vec::new();
        for &f in &visible {
            orphans.extend(self.kill_face(f));
        }
        let new_faces: Vec<usize> = horizon
            .iter()
            .map(|&(a, b)| self.add_face([a, b, eye]))
            .collect();
        for p in orphans {
            if p != eye {
                self.assign(p, &new_faces);
            }
        }
    }
}

fn initial_simplex(points: &[Vec3]) -> Result<[usize; 4], GeometryError> {
    let (lo, hi) = aabb(points).expect("non-empty");
    let tol = DEGENERACY_TOL * (hi - lo).norm().max(1.0);

    let mut extremes = Vec::with_capacity(6);
    for axis in 0..3 {
        let mut min_i = 0;
        let mut max_i = 0;
        for (i, p) in points.iter().enumerate() {
            if p[axis] < points[min_i][axis] {
                min_i = i;
            }
            if p[axis] > points[max_i][axis] {
                max_i = i;
            }
        }
        extremes.push(min_i);
        extremes.push(max_i);
    }
    let mut best = (0, 0, -1.0);
    for (k, &i) in extremes.iter().enumerate() {
        for &j in &extremes[k + 1..] {
            let d = (points[i] - points[j]).norm();
            if d > best.2 {
                best = (i, j, d);
            }
        }
    }
    let (i0, i1, span) = best;
    if span <= tol {
        return Err(GeometryError::Degenerate("all points coincide"));
    }

    let dir = (points[i1] - points[i0]) / span;
    let (i2, dist_line) = argmax(points, |p| (p - points[i0]).cross(&dir).norm());
    if dist_line <= tol {
        return Err(GeometryError::Degenerate("points are collinear"));
    }

    let normal = (points[i1] - points[i0])
        .cross(&(points[i2] - points[i0]))
        .normalize();
    let (i3, dist_plane) = argmax(points, |p| normal.dot(&(p - points[i0])).abs());
    if dist_plane <= tol {
        return Err(GeometryError::Degenerate("points are coplanar"));
    }
    Ok([i0, i1, i2, i3])
}

fn argmax(points: &[Vec3], f: impl Fn(&Vec3) -> f64) -> (usize, f64) {
    points
        .iter()
        .enumerate()
        .fold((0, f64::NEG_INFINITY), |(bi, bv), (i, p)| {
            let v = f(p);
            if v > bv {
                (i, v)
            } else {
                (bi, bv)
            }
        })
}

/// Convex hull of `points` as a closed mesh with outward (counter-clockwise)
/// triangles. Only hull vertices are kept, in ascending input order.
pub fn convex_hull(points: &[Vec3]) -> Result<TriMesh, GeometryError> {
    if points.len() < 4 {
        return Err(GeometryError::TooFewPoints(points.len()));
    }
    if points.iter().any(|p| !p.iter().all(|c| c.is_finite())) {
        return Err(GeometryError::Degenerate("non-finite coordinate"));
    }
    let simplex = initial_simplex(points)?;

    let mut builder = Builder {
        points,
        faces: Vec::new(),
        edges: HashMap::new(),
    };
    let interior = simplex.iter().map(|&i| points[i]).sum::<Vec3>() / 4.0;
    for skip in 0..4 {
        let mut v = [0; 3];
        let mut k = 0;
        for (j, &idx) in simplex.iter().enumerate() {
            if j != skip {
                v[k] = idx;
                k += 1;
            }
        }
        if Face::new(points, v).distance(&interior) > 0.0 {
            v.swap(1, 2);
        }
        builder.add_face(v);
    }

    let all_faces: Vec<usize> = (0..4).collect();
    for p in 0..points.len() {
        if !simplex.contains(&p) {
            builder.assign(p, &all_faces);
        }
    }

    while let Some((face, eye)) = builder.next_eye() {
        builder.add_point(face, eye);
    }

    let live: Vec<[usize; 3]> = builder
        .faces
        .iter()
        .filter(|f| f.alive)
        .map(|f| f.v)
        .collect();
    let mut used: Vec<usize> = live.iter().flatten().copied().collect();
    used.sort_unstable();
    used.dedup();
    let mut remap = vec![usize::MAX; points.len()];
    for (new, &old) in used.iter().enumerate() {
        remap[old] = new;
    }
    let vertices = used.iter().map(|&i| points[i]).collect();
    let triangles = live
        .iter()
        .map(|t| [remap[t[0]], remap[t[1]], remap[t[2]]])
        .collect();
    TriMesh::new(vertices, triangles)
}
