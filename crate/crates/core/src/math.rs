//! Rigid-transform vocabulary shared by every module.
//!
//! Poses are `nalgebra` isometries; orientations in URDF and on primitives
//! are fixed-axis roll/pitch/yaw, i.e. `R = Rz(yaw) * Ry(pitch) * Rx(roll)`.

use nalgebra::{Isometry3, Quaternion, Translation3, Unit, UnitQuaternion, Vector3};

pub type Vec3 = Vector3<f64>;
pub type UnitQuat = UnitQuaternion<f64>;
pub type Pose = Isometry3<f64>;

/// Fixed-axis XYZ Euler angles in radians.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Rpy {
    pub roll: f64,
    pub pitch: f64,
    pub yaw: f64,
}

impl Rpy {
    pub const fn new(roll: f64, pitch: f64, yaw: f64) -> Self {
        Self { roll, pitch, yaw }
    }

    pub fn to_quat(self) -> UnitQuat {
        UnitQuat::from_euler_angles(self.roll, self.pitch, self.yaw)
    }

    /// Pitch lies in `[-pi/2, pi/2]`. Near gimbal lock, roll is solved
    /// from what remains after yaw and pitch, so the rotation is reproduced.
    pub fn from_quat(q: &UnitQuat) -> Self {
        let m = q.to_rotation_matrix();
        let r = m.matrix();
        let pitch = (-r[(2, 0)]).atan2(r[(2, 1)].hypot(r[(2, 2)]));
        let yaw = if r[(0, 0)].abs() + r[(1, 0)].abs() < 1e-12 {
            0.0
        } else {
            r[(1, 0)].atan2(r[(0, 0)])
        };
        let partial = UnitQuat::from_euler_angles(0.0, pitch, yaw);
        let rest = (partial.inverse() * q).to_rotation_matrix();
        let roll = rest[(2, 1)].atan2(rest[(1, 1)]);
        Self { roll, pitch, yaw }
    }

    pub fn to_array(self) -> [f64; 3] {
        [self.roll, self.pitch, self.yaw]
    }
}

impl From<[f64; 3]> for Rpy {
    fn from(v: [f64; 3]) -> Self {
        Self::new(v[0], v[1], v[2])
    }
}

pub fn pose(translation: Vec3, rotation: UnitQuat) -> Pose {
    Isometry3::from_parts(Translation3::from(translation), rotation)
}

pub fn pose_from_xyz_rpy(xyz: Vec3, rpy: Rpy) -> Pose {
    pose(xyz, rpy.to_quat())
}

/// Builds a unit quaternion from `w, x, y, z` components, normalizing them.
/// Returns `None` for a (near) zero quaternion.
pub fn quat_wxyz(w: f64, x: f64, y: f64, z: f64) -> Option<UnitQuat> {
    let q = Quaternion::new(w, x, y, z);
    if q.norm().is_nan() || q.norm() <= 1e-12 {
        return None;
    }
    Some(UnitQuat::from_quaternion(q))
}

/// `[w, x, y, z]` components.
pub fn quat_to_wxyz(q: &UnitQuat) -> [f64; 4] {
    [q.w, q.i, q.j, q.k]
}

/// Rotation vector (axis * angle, angle in `[0, pi]`) of a unit quaternion.
pub fn rotation_vector(q: &UnitQuat) -> Vec3 {
    let (w, v) = if q.w < 0.0 {
        (-q.w, -q.imag())
    } else {
        (q.w, q.imag())
    };
    let s = v.norm();
    if s < 1e-12 {
        // first-order expansion of 2 * atan2(s, w) / s
        return v * 2.0;
    }
    let angle = 2.0 * s.atan2(w);
    v * (angle / s)
}

/// Rotation of `angle` radians about `axis`; `axis` must be nonzero.
pub fn axis_angle(axis: &Vec3, angle: f64) -> UnitQuat {
    UnitQuat::from_axis_angle(&Unit::new_normalize(*axis), angle)
}

/// The rotation taking `+z` onto `dir` (which need not be normalized).
pub fn rotation_from_z(dir: &Vec3) -> UnitQuat {
    let z = Vec3::z();
    UnitQuat::rotation_between(&z, dir)
        .unwrap_or_else(|| UnitQuat::from_axis_angle(&Vec3::x_axis(), std::f64::consts::PI))
}
