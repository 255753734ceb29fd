//! URDF robot descriptions.
//!
//! Only the visual subset is kept: links with mesh visuals and material
//! colors, and revolute/continuous/prismatic/fixed joints. Collision,
//! inertial, transmission, sensor and gazebo elements are skipped.

mod parse;
mod write;

use thiserror::Error;

use crate::color::Rgba;
use crate::math::{Pose, Vec3};

pub use parse::parse_urdf;
pub use write::to_urdf_string;

#[derive(Debug, Error, PartialEq)]
pub enum UrdfError {
    #[error("malformed XML: {0}")]
    Xml(String),
    #[error("document has no <robot> root element")]
    NoRobotElement,
    #[error("<{element}> is missing required attribute `{attribute}`")]
    MissingAttribute {
        element: String,
        attribute: &'static str,
    },
    #[error("<{element}> has invalid `{attribute}` value {value:?}")]
    InvalidValue {
        element: String,
        attribute: &'static str,
        value: String,
    },
    #[error("duplicate link name `{0}`")]
    DuplicateLink(String),
    #[error("duplicate joint name `{0}`")]
    DuplicateJoint(String),
    #[error("joint `{joint}` references undeclared link `{link}`")]
    DanglingLink { joint: String, link: String },
    #[error("link `{link}` has more than one parent joint (`{first}` and `{second}`)")]
    MultipleParents {
        link: String,
        first: String,
        second: String,
    },
    #[error("kinematic cycle through link `{0}`")]
    Cycle(String),
    #[error("robot has no root link")]
    NoRoot,
    #[error("robot has several root links: {}", .0.join(", "))]
    MultipleRoots(Vec<String>),
    #[error("joint `{joint}` has unsupported type `{kind}`")]
    UnsupportedJointType { joint: String, kind: String },
    #[error("joint `{0}` uses <mimic>, which is not supported")]
    MimicUnsupported(String),
    #[error("joint `{0}` has a zero-length axis")]
    ZeroAxis(String),
    #[error("joint `{joint}` has lower limit {lower} above upper limit {upper}")]
    InvalidLimits {
        joint: String,
        lower: f64,
        upper: f64,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum JointKind {
    Revolute,
    Continuous,
    Prismatic,
    Fixed,
}

impl JointKind {
    pub fn as_str(self) -> &'static str {
        match self {
            JointKind::Revolute => "revolute",
            JointKind::Continuous => "continuous",
            JointKind::Prismatic => "prismatic",
            JointKind::Fixed => "fixed",
        }
    }

    pub fn is_fixed(self) -> bool {
        self == JointKind::Fixed
    }
}

/// Position limits in radians (revolute) or meters (prismatic).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JointLimits {
    pub lower: f64,
    pub upper: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct JointSpec {
    pub name: String,
    pub kind: JointKind,
    pub parent_link: String,
    pub child_link: String,
    pub origin: Pose,
    /// Unit length for every non-fixed joint.
    pub axis: Vec3,
    pub limits: Option<JointLimits>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Visual {
    /// Mesh filename exactly as written in the URDF.
    pub mesh_ref: String,
    pub origin: Pose,
    pub scale: Vec3,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LinkSpec {
    pub name: String,
    pub visuals: Vec<Visual>,
    pub base_color: Option<Rgba>,
}

/// A validated robot: names are unique, every joint references declared
/// links, and the joints form a tree rooted at `root_link`.
#[derive(Debug, Clone, PartialEq)]
pub struct RobotDescription {
    pub name: String,
    pub links: Vec<LinkSpec>,
    pub joints: Vec<JointSpec>,
    pub root_link: String,
}

impl RobotDescription {
    pub fn link(&self, name: &str) -> Option<&LinkSpec> {
        self.links.iter().find(|l| l.name == name)
    }

    pub fn joint(&self, name: &str) -> Option<&JointSpec> {
        self.joints.iter().find(|j| j.name == name)
    }

    pub fn dof(&self) -> usize {
        self.joints.iter().filter(|j| !j.kind.is_fixed()).count()
    }

    /// Links carrying at least one visual, in declaration order.
    pub fn visual_links(&self) -> impl Iterator<Item = &LinkSpec> {
        self.links.iter().filter(|l| !l.visuals.is_empty())
    }
}
