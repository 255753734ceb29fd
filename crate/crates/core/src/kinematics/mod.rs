//! Kinematic chains built from robot descriptions, with forward kinematics
//! and damped-least-squares inverse kinematics.

mod ik;

use std::collections::{HashMap, VecDeque};
use std::ops::{Deref, Index};

use thiserror::Error;

use crate::color::Rgba;
use crate::math::{axis_angle, pose, Pose, UnitQuat, Vec3};
use crate::urdf::{JointKind, JointSpec, RobotDescription};

pub use ik::{inverse_kinematics, IkOptions, IkReport};

#[derive(Debug, Error, PartialEq)]
pub enum KinematicsError {
    #[error("joint state has {actual} values but the chain has {expected} degrees of freedom")]
    StateLength { expected: usize, actual: usize },
    #[error("link index {index} is out of range for a chain of {len} links")]
    LinkIndex { index: usize, len: usize },
    #[error("no link named `{0}`")]
    UnknownLink(String),
}

/// Joint values in `dof_layout` order: radians for revolute and continuous
/// joints, meters for prismatic ones.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct JointState(Vec<f64>);

impl JointState {
    pub fn new(values: Vec<f64>) -> Self {
        Self(values)
    }

    pub fn zeros(dof: usize) -> Self {
        Self(vec![0.0; dof])
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }

    /// `self + (other - self) * t` per joint; both states must have equal length.
    pub fn lerp(&self, other: &JointState, t: f64) -> JointState {
        debug_assert_eq!(self.0.len(), other.0.len());
        JointState(
            self.0
                .iter()
                .zip(&other.0)
                .map(|(a, b)| a + (b - a) * t)
                .collect(),
        )
    }
}

impl Deref for JointState {
    type Target = [f64];
    fn deref(&self) -> &[f64] {
        &self.0
    }
}

impl From<Vec<f64>> for JointState {
    fn from(v: Vec<f64>) -> Self {
        Self(v)
    }
}

impl<const N: usize> From<[f64; N]> for JointState {
    fn from(v: [f64; N]) -> Self {
        Self(v.to_vec())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ChainLink {
    pub name: String,
    /// Index of the parent link; `None` only for the root.
    pub parent: Option<usize>,
    /// The joint connecting `parent` to this link.
    pub joint: Option<JointSpec>,
    /// Position of this link's joint in the state vector.
    pub dof_index: Option<usize>,
    pub base_color: Option<Rgba>,
    pub has_visuals: bool,
}

/// Links in breadth-first order from the root (children in joint declaration
/// order), so every parent precedes its children.
#[derive(Debug, Clone, PartialEq)]
pub struct Chain {
    name: String,
    links: Vec<ChainLink>,
    dof_layout: Vec<usize>,
}

impl Chain {
    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn links(&self) -> &[ChainLink] {
        &self.links
    }

    pub fn link(&self, index: usize) -> Result<&ChainLink, KinematicsError> {
        self.links.get(index).ok_or(KinematicsError::LinkIndex {
            index,
            len: self.links.len(),
        })
    }

    pub fn link_index(&self, name: &str) -> Result<usize, KinematicsError> {
        self.links
            .iter()
            .position(|l| l.name == name)
            .ok_or_else(|| KinematicsError::UnknownLink(name.to_string()))
    }

    /// Link indices of the non-fixed joints, in state-vector order.
    pub fn dof_layout(&self) -> &[usize] {
        &self.dof_layout
    }

    pub fn dof(&self) -> usize {
        self.dof_layout.len()
    }

    /// Names of the actuated joints in state-vector order.
    pub fn joint_names(&self) -> Vec<&str> {
        self.dof_layout
            .iter()
            .map(|&i| {
                self.links[i]
                    .joint
                    .as_ref()
                    .expect("actuated link has a joint")
                    .name
                    .as_str()
            })
            .collect()
    }

    pub fn check_state(&self, state: &[f64]) -> Result<(), KinematicsError> {
        if state.len() != self.dof() {
            return Err(KinematicsError::StateLength {
                expected: self.dof(),
                actual: state.len(),
            });
        }
        Ok(())
    }

    /// Names of joints whose value lies outside its limits.
    pub fn limit_violations(&self, state: &[f64]) -> Vec<&str> {
        self.dof_layout
            .iter()
            .zip(state)
            .filter_map(|(&i, &q)| {
                let joint = self.links[i].joint.as_ref()?;
                let l = joint.limits?;
                (joint.kind != JointKind::Continuous && (q < l.lower || q > l.upper))
                    .then_some(joint.name.as_str())
            })
            .collect()
    }
}

/// Orders the description's links breadth-first from the root.
pub fn to_chain(desc: &RobotDescription) -> Chain {
    let mut children: HashMap<&str, Vec<&JointSpec>> = HashMap::new();
    for j in &desc.joints {
        children.entry(j.parent_link.as_str()).or_default().push(j);
    }
    let link_spec = |name: &str| desc.link(name).expect("validated description");

    let mut links = Vec::with_capacity(desc.links.len());
    let mut queue = VecDeque::from([(desc.root_link.as_str(), None::<usize>, None::<&JointSpec>)]);
    while let Some((name, parent, joint)) = queue.pop_front() {
        let index = links.len();
        let spec = link_spec(name);
        links.push(ChainLink {
            name: name.to_string(),
            parent,
            joint: joint.cloned(),
            dof_index: None,
            base_color: spec.base_color,
            has_visuals: !spec.visuals.is_empty(),
        });
        for j in children.get(name).into_iter().flatten() {
            queue.push_back((j.child_link.as_str(), Some(index), Some(*j)));
        }
    }

    let position: HashMap<&str, usize> = links
        .iter()
        .enumerate()
        .map(|(i, l)| (l.name.as_str(), i))
        .collect();
    let dof_layout: Vec<usize> = desc
        .joints
        .iter()
        .filter(|j| !j.kind.is_fixed())
        .map(|j| position[j.child_link.as_str()])
        .collect();
    for (k, &i) in dof_layout.iter().enumerate() {
        links[i].dof_index = Some(k);
    }

    Chain {
        name: desc.name.clone(),
        links,
        dof_layout,
    }
}

/// Motion of a joint at value `q`, relative to its origin frame.
pub fn joint_motion(joint: &JointSpec, q: f64) -> Pose {
    match joint.kind {
        JointKind::Fixed => Pose::identity(),
        JointKind::Revolute | JointKind::Continuous => {
            pose(Vec3::zeros(), axis_angle(&joint.axis, q))
        }
        JointKind::Prismatic => pose(joint.axis * q, UnitQuat::identity()),
    }
}

/// World pose of every link, indexed like [`Chain::links`].
#[derive(Debug, Clone, PartialEq)]
pub struct FkResult {
    poses: Vec<Pose>,
}

impl FkResult {
    pub fn poses(&self) -> &[Pose] {
        &self.poses
    }

    pub fn into_poses(self) -> Vec<Pose> {
        self.poses
    }
}

impl Index<usize> for FkResult {
    type Output = Pose;
    fn index(&self, i: usize) -> &Pose {
        &self.poses[i]
    }
}

/// `world(child) = world(parent) * origin * motion(q)`, starting from `base`.
pub fn forward_kinematics(
    chain: &Chain,
    state: &[f64],
    base: &Pose,
) -> Result<FkResult, KinematicsError> {
    chain.check_state(state)?;
    let mut poses: Vec<Pose> = Vec::with_capacity(chain.links.len());
    for link in &chain.links {
        let world = match (link.parent, &link.joint) {
            (Some(p), Some(joint)) => {
                let q = link.dof_index.map_or(0.0, |k| state[k]);
                let mut w = poses[p] * joint.origin * joint_motion(joint, q);
                w.rotation.renormalize();
                w
            }
            _ => *base,
        };
        poses.push(world);
    }
    Ok(FkResult { poses })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::urdf::parse_urdf;
    use std::f64::consts::{FRAC_PI_2, PI};

    fn joint(kind: JointKind, axis: Vec3) -> JointSpec {
        JointSpec {
            name: "j".into(),
            kind,
            parent_link: "a".into(),
            child_link: "b".into(),
            origin: Pose::identity(),
            axis,
            limits: None,
        }
    }

    #[test]
    fn joint_motion_examples() {
        assert_eq!(
            joint_motion(&joint(JointKind::Fixed, Vec3::z()), 3.7),
            Pose::identity()
        );
        let slide = joint_motion(&joint(JointKind::Prismatic, Vec3::x()), 0.5);
        assert_eq!(slide.translation.vector, Vec3::new(0.5, 0.0, 0.0));
        let half_turn = joint_motion(&joint(JointKind::Revolute, Vec3::z()), PI);
        let q = half_turn.rotation;
        assert!(q.w.abs() < 1e-12 && q.i.abs() < 1e-12 && q.j.abs() < 1e-12);
        assert!((q.k - 1.0).abs() < 1e-12);
    }

    #[test]
    fn chain_order_and_dof() {
        // declaration order of joints differs from breadth-first order
        let xml = r#"<robot name="r">
            <link name="root"/><link name="a"/><link name="b"/><link name="c"/>
            <joint name="bc" type="revolute"><parent link="b"/><child link="c"/></joint>
            <joint name="ra" type="fixed"><parent link="root"/><child link="a"/></joint>
            <joint name="ab" type="continuous"><parent link="a"/><child link="b"/></joint>
          </robot>"#;
        let chain = to_chain(&parse_urdf(xml).unwrap());
        let names: Vec<_> = chain.links().iter().map(|l| l.name.as_str()).collect();
        assert_eq!(names, ["root", "a", "b", "c"]);
        assert_eq!(chain.dof(), 2);
        assert_eq!(chain.joint_names(), ["bc", "ab"]);
        assert_eq!(chain.links()[3].dof_index, Some(0));
        assert_eq!(chain.links()[2].dof_index, Some(1));
        for (i, l) in chain.links().iter().enumerate() {
            if let Some(p) = l.parent {
                assert!(p < i);
            }
        }
    }

    #[test]
    fn single_revolute_quarter_turn() {
        let xml = r#"<robot name="r"><link name="a"/><link name="b"/>
            <joint name="j" type="revolute"><parent link="a"/><child link="b"/>
              <origin xyz="1 0 0"/><axis xyz="0 0 1"/></joint></robot>"#;
        let chain = to_chain(&parse_urdf(xml).unwrap());
        let fk = forward_kinematics(&chain, &[FRAC_PI_2], &Pose::identity()).unwrap();
        assert!((fk[1].translation.vector - Vec3::x()).norm() < 1e-12);
        let expected = UnitQuat::from_axis_angle(&Vec3::z_axis(), FRAC_PI_2);
        assert!(fk[1].rotation.angle_to(&expected) < 1e-12);
    }

    #[test]
    fn fixed_chain_is_identity_and_rejects_state() {
        let xml = r#"<robot name="r"><link name="a"/><link name="b"/><link name="c"/>
            <joint name="ab" type="fixed"><parent link="a"/><child link="b"/></joint>
            <joint name="bc" type="fixed"><parent link="b"/><child link="c"/></joint></robot>"#;
        let chain = to_chain(&parse_urdf(xml).unwrap());
        assert_eq!(chain.dof(), 0);
        let fk = forward_kinematics(&chain, &[], &Pose::identity()).unwrap();
        assert!(fk.poses().iter().all(|p| *p == Pose::identity()));
        assert_eq!(
            forward_kinematics(&chain, &[0.0], &Pose::identity()).unwrap_err(),
            KinematicsError::StateLength {
                expected: 0,
                actual: 1
            }
        );
    }

    #[test]
    fn limit_violations_skip_continuous() {
        let xml = r#"<robot name="r"><link name="a"/><link name="b"/><link name="c"/>
            <joint name="r1" type="revolute"><parent link="a"/><child link="b"/><limit lower="-1" upper="1"/></joint>
            <joint name="c1" type="continuous"><parent link="b"/><child link="c"/><limit lower="-1" upper="1"/></joint></robot>"#;
        let chain = to_chain(&parse_urdf(xml).unwrap());
        assert_eq!(chain.limit_violations(&[2.0, 5.0]), ["r1"]);
        assert!(chain.limit_violations(&[0.5, 5.0]).is_empty());
    }
}
