//! Shared fixtures and independent oracles for the integration tests.
#![allow(dead_code)]

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::sync::{Arc, OnceLock};

use rand::Rng;
use roboscene::geometry::{DecompParams, TriMesh};
use roboscene::kinematics::{to_chain, Chain};
use roboscene::math::Vec3;
use roboscene::urdd::{build_urdd, load_urdd, AssetStore, UrddManifest};

pub type Mat4 = [[f64; 4]; 4];

pub fn fixtures() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures")
}

pub fn ur5_urdf() -> PathBuf {
    fixtures().join("ur5/urdf/ur5.urdf")
}

/// `(urdf, mesh_root)` for every bundled robot.
pub fn robot_fixtures() -> Vec<(PathBuf, PathBuf)> {
    let f = fixtures();
    vec![
        (f.join("two_link/two_link.urdf"), f.join("two_link")),
        (f.join("three_fixed/three_fixed.urdf"), f.join("meshes")),
        (ur5_urdf(), f.join("ur5")),
    ]
}

/// Builds the UR5 URDD into a fresh temporary directory.
pub fn ur5_urdd() -> (tempfile::TempDir, UrddManifest) {
    let dir = tempfile::tempdir().unwrap();
    let manifest = build_urdd(
        &ur5_urdf(),
        &fixtures().join("ur5"),
        dir.path(),
        &DecompParams::default(),
    )
    .unwrap();
    (dir, manifest)
}

/// UR5 chain and assets, built and loaded once per test binary.
pub fn ur5() -> (Arc<Chain>, Arc<AssetStore>) {
    static CELL: OnceLock<(Arc<Chain>, Arc<AssetStore>)> = OnceLock::new();
    let (chain, store) = CELL.get_or_init(|| {
        let (dir, _) = ur5_urdd();
        let (desc, store) = load_urdd(dir.path()).unwrap();
        (Arc::new(to_chain(&desc)), Arc::new(store))
    });
    (Arc::clone(chain), Arc::clone(store))
}

// ---- homogeneous-matrix kinematics oracle ----

pub fn identity() -> Mat4 {
    let mut m = [[0.0; 4]; 4];
    for (i, row) in m.iter_mut().enumerate() {
        row[i] = 1.0;
    }
    m
}

pub fn matmul(a: &Mat4, b: &Mat4) -> Mat4 {
    let mut c = [[0.0; 4]; 4];
    for i in 0..4 {
        for j in 0..4 {
            c[i][j] = (0..4).map(|k| a[i][k] * b[k][j]).sum();
        }
    }
    c
}

pub fn translation(t: [f64; 3]) -> Mat4 {
    let mut m = identity();
    for i in 0..3 {
        m[i][3] = t[i];
    }
    m
}

fn rot_x(a: f64) -> Mat4 {
    let (s, c) = a.sin_cos();
    [
        [1.0, 0.0, 0.0, 0.0],
        [0.0, c, -s, 0.0],
        [0.0, s, c, 0.0],
        [0.0, 0.0, 0.0, 1.0],
    ]
}

fn rot_y(a: f64) -> Mat4 {
    let (s, c) = a.sin_cos();
    [
        [c, 0.0, s, 0.0],
        [0.0, 1.0, 0.0, 0.0],
        [-s, 0.0, c, 0.0],
        [0.0, 0.0, 0.0, 1.0],
    ]
}

fn rot_z(a: f64) -> Mat4 {
    let (s, c) = a.sin_cos();
    [
        [c, -s, 0.0, 0.0],
        [s, c, 0.0, 0.0],
        [0.0, 0.0, 1.0, 0.0],
        [0.0, 0.0, 0.0, 1.0],
    ]
}

/// `Rz(yaw) * Ry(pitch) * Rx(roll)`
pub fn rpy_matrix(rpy: [f64; 3]) -> Mat4 {
    matmul(&rot_z(rpy[2]), &matmul(&rot_y(rpy[1]), &rot_x(rpy[0])))
}

/// Rodrigues' formula for a rotation of `angle` about unit `axis`.
pub fn axis_angle_matrix(axis: [f64; 3], angle: f64) -> Mat4 {
    let [x, y, z] = axis;
    let (s, c) = angle.sin_cos();
    let t = 1.0 - c;
    [
        [t * x * x + c, t * x * y - s * z, t * x * z + s * y, 0.0],
        [t * x * y + s * z, t * y * y + c, t * y * z - s * x, 0.0],
        [t * x * z - s * y, t * y * z + s * x, t * z * z + c, 0.0],
        [0.0, 0.0, 0.0, 1.0],
    ]
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Kind {
    Revolute,
    Continuous,
    Prismatic,
    Fixed,
}

impl Kind {
    fn name(self) -> &'static str {
        match self {
            Kind::Revolute => "revolute",
            Kind::Continuous => "continuous",
            Kind::Prismatic => "prismatic",
            Kind::Fixed => "fixed",
        }
    }
}

#[derive(Debug, Clone)]
pub struct RandomJoint {
    pub parent: usize,
    pub kind: Kind,
    pub xyz: [f64; 3],
    pub rpy: [f64; 3],
    /// Unit length.
    pub axis: [f64; 3],
}

/// A random tree: link `i + 1` hangs off joint `i`, whose parent is any
/// earlier link.
#[derive(Debug, Clone)]
pub struct RandomRobot {
    pub joints: Vec<RandomJoint>,
}

impl RandomRobot {
    pub fn generate(rng: &mut impl Rng, max_joints: usize) -> Self {
        let n = rng.gen_range(1..=max_joints);
        let kinds = [
            Kind::Revolute,
            Kind::Continuous,
            Kind::Prismatic,
            Kind::Fixed,
        ];
        let joints = (0..n)
            .map(|i| {
                let mut axis = [0.0f64; 3];
                let mut norm = 0.0f64;
                while norm < 0.1 {
                    axis = [
                        rng.gen_range(-1.0..1.0),
                        rng.gen_range(-1.0..1.0),
                        rng.gen_range(-1.0..1.0),
                    ];
                    norm = (axis[0] * axis[0] + axis[1] * axis[1] + axis[2] * axis[2]).sqrt();
                }
                RandomJoint {
                    parent: rng.gen_range(0..=i),
                    kind: kinds[rng.gen_range(0..kinds.len())],
                    xyz: [
                        rng.gen_range(-1.0..1.0),
                        rng.gen_range(-1.0..1.0),
                        rng.gen_range(-1.0..1.0),
                    ],
                    rpy: [
                        rng.gen_range(-3.0..3.0),
                        rng.gen_range(-1.5..1.5),
                        rng.gen_range(-3.0..3.0),
                    ],
                    axis: axis.map(|a| a / norm),
                }
            })
            .collect();
        Self { joints }
    }

    pub fn dof(&self) -> usize {
        self.joints.iter().filter(|j| j.kind != Kind::Fixed).count()
    }

    /// URDF with shortest round-trip float formatting.
    pub fn to_urdf(&self) -> String {
        let mut s = String::from("<robot name=\"random\">\n");
        for i in 0..=self.joints.len() {
            let _ = writeln!(s, "  <link name=\"l{i}\"/>");
        }
        for (i, j) in self.joints.iter().enumerate() {
            let _ = writeln!(
                s,
                "  <joint name=\"j{i}\" type=\"{}\"><parent link=\"l{}\"/><child link=\"l{}\"/>\
                 <origin xyz=\"{} {} {}\" rpy=\"{} {} {}\"/><axis xyz=\"{} {} {}\"/></joint>",
                j.kind.name(),
                j.parent,
                i + 1,
                j.xyz[0],
                j.xyz[1],
                j.xyz[2],
                j.rpy[0],
                j.rpy[1],
                j.rpy[2],
                j.axis[0],
                j.axis[1],
                j.axis[2],
            );
        }
        s.push_str("</robot>\n");
        s
    }

    /// World matrix of every link `l{i}` given values for the non-fixed
    /// joints in declaration order.
    pub fn oracle_fk(&self, state: &[f64], base: &Mat4) -> Vec<Mat4> {
        let mut world = vec![*base];
        let mut k = 0;
        for j in &self.joints {
            let motion = match j.kind {
                Kind::Fixed => identity(),
                Kind::Revolute | Kind::Continuous => {
                    k += 1;
                    axis_angle_matrix(j.axis, state[k - 1])
                }
                Kind::Prismatic => {
                    k += 1;
                    translation(j.axis.map(|a| a * state[k - 1]))
                }
            };
            let origin = matmul(&translation(j.xyz), &rpy_matrix(j.rpy));
            world.push(matmul(&world[j.parent], &matmul(&origin, &motion)));
        }
        world
    }
}

pub fn max_abs_diff(a: &Mat4, b: &nalgebra::Matrix4<f64>) -> f64 {
    let mut worst: f64 = 0.0;
    for i in 0..4 {
        for j in 0..4 {
            worst = worst.max((a[i][j] - b[(i, j)]).abs());
        }
    }
    worst
}

// ---- brute-force convexity oracle ----

/// Outward unit normal and offset of every face, from the raw triangles.
pub fn face_planes(mesh: &TriMesh) -> Vec<([f64; 3], f64)> {
    let v = mesh.vertices();
    mesh.triangles()
        .iter()
        .map(|t| {
            let (a, b, c) = (v[t[0]], v[t[1]], v[t[2]]);
            let (u, w) = (
                [b.x - a.x, b.y - a.y, b.z - a.z],
                [c.x - a.x, c.y - a.y, c.z - a.z],
            );
            let n = [
                u[1] * w[2] - u[2] * w[1],
                u[2] * w[0] - u[0] * w[2],
                u[0] * w[1] - u[1] * w[0],
            ];
            let len = (n[0] * n[0] + n[1] * n[1] + n[2] * n[2]).sqrt();
            let n = n.map(|x| x / len);
            (n, n[0] * a.x + n[1] * a.y + n[2] * a.z)
        })
        .collect()
}

/// Largest signed distance of `p` above any face plane of `hull`.
pub fn max_signed_distance(hull: &TriMesh, p: &Vec3) -> f64 {
    face_planes(hull)
        .iter()
        .map(|(n, d)| n[0] * p.x + n[1] * p.y + n[2] * p.z - d)
        .fold(f64::NEG_INFINITY, f64::max)
}

/// Every vertex of `part` lies on or below every one of its own faces.
pub fn is_convex(part: &TriMesh, tol: f64) -> bool {
    part.vertices()
        .iter()
        .all(|v| max_signed_distance(part, v) <= tol)
}

/// Every edge is shared by exactly two triangles with opposite direction.
pub fn is_closed(mesh: &TriMesh) -> bool {
    use std::collections::HashMap;
    let mut edges: HashMap<(usize, usize), i32> = HashMap::new();
    for t in mesh.triangles() {
        for k in 0..3 {
            *edges.entry((t[k], t[(k + 1) % 3])).or_default() += 1;
        }
    }
    edges
        .iter()
        .all(|(&(a, b), &n)| n == 1 && edges.get(&(b, a)) == Some(&1))
}

pub fn sorted_points(points: &[Vec3]) -> Vec<[u64; 3]> {
    let mut out: Vec<[u64; 3]> = points
        .iter()
        .map(|p| [p.x.to_bits(), p.y.to_bits(), p.z.to_bits()])
        .collect();
    out.sort_unstable();
    out
}

pub fn random_ball_points(rng: &mut impl Rng, n: usize) -> Vec<Vec3> {
    let mut out = Vec::with_capacity(n);
    while out.len() < n {
        let p = Vec3::new(
            rng.gen_range(-1.0..1.0),
            rng.gen_range(-1.0..1.0),
            rng.gen_range(-1.0..1.0),
        );
        if p.norm() <= 1.0 {
            out.push(p);
        }
    }
    out
}

// ---- independent glTF reader ----

/// `T * R * S` of every node, with animated channels sampled at the input
/// time closest to `time` (which must be a sample time).
pub fn gltf_node_matrices(
    path: &Path,
    time: f32,
) -> std::collections::BTreeMap<String, nalgebra::Matrix4<f64>> {
    use gltf::animation::util::ReadOutputs;
    let (doc, buffers, _) = gltf::import(path).unwrap();
    let mut trs: Vec<([f32; 3], [f32; 4], [f32; 3])> = doc
        .nodes()
        .map(|n| {
            assert_eq!(n.children().count(), 0, "flat node list expected");
            let (t, r, s) = n.transform().decomposed();
            (t, r, s)
        })
        .collect();
    for anim in doc.animations() {
        for ch in anim.channels() {
            let reader = ch.reader(|b| Some(&buffers[b.index()]));
            let inputs: Vec<f32> = reader.read_inputs().unwrap().collect();
            let (k, nearest) = inputs
                .iter()
                .enumerate()
                .min_by(|a, b| (a.1 - time).abs().total_cmp(&(b.1 - time).abs()))
                .unwrap();
            assert!((nearest - time).abs() < 1e-6, "time {time} is not a sample");
            let node = &mut trs[ch.target().node().index()];
            match reader.read_outputs().unwrap() {
                ReadOutputs::Translations(mut it) => node.0 = it.nth(k).unwrap(),
                ReadOutputs::Rotations(r) => node.1 = r.into_f32().nth(k).unwrap(),
                ReadOutputs::Scales(mut it) => node.2 = it.nth(k).unwrap(),
                ReadOutputs::MorphTargetWeights(_) => panic!("unexpected morph weights"),
            }
        }
    }
    doc.nodes()
        .zip(trs)
        .map(|(n, (t, r, s))| {
            let q = nalgebra::UnitQuaternion::from_quaternion(nalgebra::Quaternion::new(
                r[3] as f64,
                r[0] as f64,
                r[1] as f64,
                r[2] as f64,
            ));
            let m = nalgebra::Translation3::new(t[0] as f64, t[1] as f64, t[2] as f64)
                .to_homogeneous()
                * q.to_homogeneous()
                * nalgebra::Matrix4::new_nonuniform_scaling(&nalgebra::Vector3::new(
                    s[0] as f64,
                    s[1] as f64,
                    s[2] as f64,
                ));
            (n.name().unwrap().to_string(), m)
        })
        .collect()
}

/// Structural soundness of a glTF file: accessors fit their views, views
/// fit their buffers, indices address existing vertices and position
/// bounds equal the data. Returns the first problem found.
pub fn validate_gltf(path: &Path) -> Result<(), String> {
    let (doc, buffers, _) = gltf::import(path).map_err(|e| e.to_string())?;
    for view in doc.views() {
        let data = &buffers[view.buffer().index()];
        if view.offset() + view.length() > data.len() {
            return Err(format!("buffer view {} overruns its buffer", view.index()));
        }
        if view.buffer().length() != data.len() {
            return Err(format!("buffer {} length mismatch", view.buffer().index()));
        }
    }
    for acc in doc.accessors() {
        let view = acc.view().ok_or("accessor without a buffer view")?;
        let stride = view.stride().unwrap_or(acc.size());
        let needed = acc.offset() + stride * (acc.count().max(1) - 1) + acc.size();
        if acc.count() > 0 && needed > view.length() {
            return Err(format!("accessor {} overruns its view", acc.index()));
        }
    }
    for mesh in doc.meshes() {
        for prim in mesh.primitives() {
            let reader = prim.reader(|b| Some(&buffers[b.index()]));
            let positions: Vec<[f32; 3]> = reader.read_positions().ok_or("no positions")?.collect();
            let normals = reader.read_normals().ok_or("no normals")?.count();
            if normals != positions.len() {
                return Err("normal count differs from position count".into());
            }
            let indices: Vec<u32> = reader
                .read_indices()
                .ok_or("no indices")?
                .into_u32()
                .collect();
            if !indices.len().is_multiple_of(3)
                || indices.iter().any(|&i| i as usize >= positions.len())
            {
                return Err(format!("bad indices in mesh {}", mesh.index()));
            }
            let acc = prim.get(&gltf::Semantic::Positions).unwrap();
            let (min, max) = (acc.min().ok_or("no min")?, acc.max().ok_or("no max")?);
            for axis in 0..3 {
                let lo = positions
                    .iter()
                    .map(|p| p[axis])
                    .fold(f32::INFINITY, f32::min);
                let hi = positions
                    .iter()
                    .map(|p| p[axis])
                    .fold(f32::NEG_INFINITY, f32::max);
                let as_f32 = |v: &gltf::json::Value| v.as_f64().map(|x| x as f32);
                if as_f32(&min[axis]) != Some(lo) || as_f32(&max[axis]) != Some(hi) {
                    return Err(format!("position bounds wrong on axis {axis}"));
                }
            }
        }
    }
    for anim in doc.animations() {
        for ch in anim.channels() {
            let s = ch.sampler();
            if s.input().count() != s.output().count() {
                return Err("sampler input and output counts differ".into());
            }
        }
    }
    Ok(())
}
