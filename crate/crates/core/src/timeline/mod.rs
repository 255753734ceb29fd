//! Scenes, keyframe tracks and per-frame evaluation.
//!
//! Joint states, colors, alphas and primitive placements interpolate
//! linearly between keys; visibility steps. Outside the keyed range a track
//! holds its nearest key.

mod primitives;
mod robot;
mod track;

use std::borrow::Cow;
use std::sync::Arc;

use thiserror::Error;

use crate::color::Rgba;
use crate::geometry::{unit_cube, unit_cylinder, GeometryError, TriMesh};
use crate::kinematics::{forward_kinematics, Chain, KinematicsError};
use crate::math::{pose, rotation_from_z, Pose, Vec3};
use crate::urdd::AssetStore;

pub use crate::urdd::AppearanceLayer;
pub use primitives::{
    CubePlacement, CubeSet, LinePlacement, LineSet, PrimitiveSet, DEFAULT_PRIMITIVE_COLOR,
};
pub use robot::{Appearance, AppearanceUpdate, LinkScope, RobotInstance};
pub use track::{InterpMode, Interpolate, Track};

pub const DEFAULT_FRAME_RATE: f64 = 24.0;

#[derive(Debug, Error)]
pub enum TimelineError {
    #[error("frame must be a finite value >= 0, got {0}")]
    InvalidFrame(f64),
    #[error("stride must be positive, got {0}")]
    InvalidStride(f64),
    #[error("alpha must lie in [0, 1], got {0}")]
    InvalidAlpha(f64),
    #[error("link index {index} is out of range for a robot with {len} links")]
    LinkIndex { index: usize, len: usize },
    #[error("element index {index} is out of range for a set of capacity {capacity}")]
    ElementIndex { index: usize, capacity: usize },
    #[error("asset store has no mesh for link `{0}`")]
    MissingAsset(String),
    #[error("frame rate must be positive, got {0}")]
    InvalidFrameRate(f64),
    #[error("frame range [{0}, {1}] is invalid")]
    InvalidFrameRange(f64, f64),
    #[error(transparent)]
    Kinematics(#[from] KinematicsError),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
}

pub(crate) fn span(frames: Vec<f64>) -> Option<(f64, f64)> {
    let lo = frames.iter().copied().reduce(f64::min)?;
    let hi = frames.iter().copied().reduce(f64::max)?;
    Some((lo, hi))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct RobotId(pub usize);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct LineSetId(pub usize);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct CubeSetId(pub usize);

/// Geometry an evaluated object is drawn with, before its pose and scale.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum MeshSource {
    Asset {
        robot: usize,
        link: String,
        layer: AppearanceLayer,
        part: usize,
    },
    /// Radius 1, from `z = 0` to `z = 1`; scaled by `(radius, radius, length)`.
    UnitCylinder,
    /// Side 1, centered; scaled by the cube dimensions.
    UnitCube,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SnapshotObject {
    pub id: String,
    pub pose: Pose,
    /// Applied in the object frame, before `pose`.
    pub scale: Vec3,
    pub mesh: MeshSource,
    pub color: Rgba,
    pub alpha: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SceneSnapshot {
    pub frame: f64,
    pub objects: Vec<SnapshotObject>,
}

impl SceneSnapshot {
    pub fn get(&self, id: &str) -> Option<&SnapshotObject> {
        self.objects.iter().find(|o| o.id == id)
    }
}

#[derive(Debug, Clone)]
pub(crate) struct EvaluatedObject {
    pub(crate) object: SnapshotObject,
    pub(crate) visible: bool,
}

#[derive(Debug, Clone)]
pub struct Scene {
    robots: Vec<RobotInstance>,
    line_sets: Vec<LineSet>,
    cube_sets: Vec<CubeSet>,
    frame_rate: f64,
    frame_range: Option<(f64, f64)>,
}

impl Default for Scene {
    fn default() -> Self {
        Self::new()
    }
}

impl Scene {
    pub fn new() -> Self {
        Self {
            robots: Vec::new(),
            line_sets: Vec::new(),
            cube_sets: Vec::new(),
            frame_rate: DEFAULT_FRAME_RATE,
            frame_range: None,
        }
    }

    pub fn frame_rate(&self) -> f64 {
        self.frame_rate
    }

    pub fn set_frame_rate(&mut self, fps: f64) -> Result<(), TimelineError> {
        if !(fps.is_finite() && fps > 0.0) {
            return Err(TimelineError::InvalidFrameRate(fps));
        }
        self.frame_rate = fps;
        Ok(())
    }

    /// Fixes the exported frame range instead of deriving it from keys.
    pub fn set_frame_range(&mut self, first: f64, last: f64) -> Result<(), TimelineError> {
        track::check_frame(first)?;
        track::check_frame(last)?;
        if first > last {
            return Err(TimelineError::InvalidFrameRange(first, last));
        }
        self.frame_range = Some((first, last));
        Ok(())
    }

    /// The explicit range if set, else the span of all keys.
    pub fn frame_range(&self) -> Option<(f64, f64)> {
        if self.frame_range.is_some() {
            return self.frame_range;
        }
        let mut frames = Vec::new();
        let ranges = self
            .robots
            .iter()
            .map(RobotInstance::key_range)
            .chain(self.line_sets.iter().map(LineSet::key_range))
            .chain(self.cube_sets.iter().map(CubeSet::key_range));
        for (lo, hi) in ranges.flatten() {
            frames.push(lo);
            frames.push(hi);
        }
        span(frames)
    }

    pub fn is_empty(&self) -> bool {
        self.robots.is_empty() && self.line_sets.is_empty() && self.cube_sets.is_empty()
    }

    /// Adds a robot at the all-zero state with its plain meshes showing.
    pub fn spawn(
        &mut self,
        chain: impl Into<Arc<Chain>>,
        assets: impl Into<Arc<AssetStore>>,
    ) -> Result<RobotId, TimelineError> {
        let robot = RobotInstance::new(chain.into(), assets.into())?;
        self.robots.push(robot);
        Ok(RobotId(self.robots.len() - 1))
    }

    pub fn robots(&self) -> &[RobotInstance] {
        &self.robots
    }

    /// # Panics
    /// If `id` was not returned by this scene.
    pub fn robot(&self, id: RobotId) -> &RobotInstance {
        &self.robots[id.0]
    }

    /// # Panics
    /// If `id` was not returned by this scene.
    pub fn robot_mut(&mut self, id: RobotId) -> &mut RobotInstance {
        &mut self.robots[id.0]
    }

    pub fn add_line_set(&mut self, capacity: usize) -> LineSetId {
        self.line_sets.push(LineSet::new(capacity));
        LineSetId(self.line_sets.len() - 1)
    }

    pub fn line_set(&self, id: LineSetId) -> &LineSet {
        &self.line_sets[id.0]
    }

    pub fn line_set_mut(&mut self, id: LineSetId) -> &mut LineSet {
        &mut self.line_sets[id.0]
    }

    pub fn add_cube_set(&mut self, capacity: usize) -> CubeSetId {
        self.cube_sets.push(CubeSet::new(capacity));
        CubeSetId(self.cube_sets.len() - 1)
    }

    pub fn cube_set(&self, id: CubeSetId) -> &CubeSet {
        &self.cube_sets[id.0]
    }

    pub fn cube_set_mut(&mut self, id: CubeSetId) -> &mut CubeSet {
        &mut self.cube_sets[id.0]
    }

    /// The mesh behind a snapshot object.
    pub fn mesh(&self, source: &MeshSource) -> Option<Cow<'_, TriMesh>> {
        match source {
            MeshSource::Asset {
                robot,
                link,
                layer,
                part,
            } => self
                .robots
                .get(*robot)?
                .assets()
                .get(link, *layer)?
                .get(*part)
                .map(Cow::Borrowed),
            MeshSource::UnitCylinder => Some(Cow::Owned(unit_cylinder())),
            MeshSource::UnitCube => Some(Cow::Owned(unit_cube())),
        }
    }

    /// Every object the scene can show, with its visibility at `frame`.
    pub(crate) fn evaluate_full(&self, frame: f64) -> Vec<EvaluatedObject> {
        let mut out = Vec::new();
        for (r, robot) in self.robots.iter().enumerate() {
            let state = robot.state_at(frame);
            let fk = forward_kinematics(robot.chain(), &state, robot.base_pose())
                .expect("state tracks hold chain-sized states");
            for (i, link) in robot.chain().links().iter().enumerate() {
                if !link.has_visuals {
                    continue;
                }
                for layer in AppearanceLayer::ALL {
                    let Some(parts) = robot.assets().get(&link.name, layer) else {
                        continue;
                    };
                    let look = robot.appearance_at(i, layer, frame);
                    for part in 0..parts.len() {
                        let id = match layer {
                            AppearanceLayer::ConvexDecomposition => {
                                format!("robot{r}/{}/{}/{part}", link.name, layer.as_str())
                            }
                            _ => format!("robot{r}/{}/{}", link.name, layer.as_str()),
                        };
                        out.push(EvaluatedObject {
                            object: SnapshotObject {
                                id,
                                pose: fk[i],
                                scale: Vec3::repeat(1.0),
                                mesh: MeshSource::Asset {
                                    robot: r,
                                    link: link.name.clone(),
                                    layer,
                                    part,
                                },
                                color: look.color,
                                alpha: look.alpha,
                            },
                            visible: look.visible,
                        });
                    }
                }
            }
        }
        for (s, set) in self.line_sets.iter().enumerate() {
            for k in 0..set.capacity() {
                let Some((line, visible)) = set.element_at(k, frame) else {
                    continue;
                };
                let axis = line.end - line.start;
                out.push(EvaluatedObject {
                    object: SnapshotObject {
                        id: format!("lines{s}/{k}"),
                        pose: pose(line.start, rotation_from_z(&axis)),
                        scale: Vec3::new(line.radius, line.radius, axis.norm()),
                        mesh: MeshSource::UnitCylinder,
                        color: line.color,
                        alpha: 1.0,
                    },
                    visible,
                });
            }
        }
        for (s, set) in self.cube_sets.iter().enumerate() {
            for k in 0..set.capacity() {
                let Some((cube, visible)) = set.element_at(k, frame) else {
                    continue;
                };
                out.push(EvaluatedObject {
                    object: SnapshotObject {
                        id: format!("cubes{s}/{k}"),
                        pose: pose(cube.center, cube.rpy.to_quat()),
                        scale: cube.dims,
                        mesh: MeshSource::UnitCube,
                        color: cube.color,
                        alpha: cube.alpha,
                    },
                    visible,
                });
            }
        }
        out
    }

    /// World poses and materials of every object visible at `frame`.
    pub fn evaluate(&self, frame: f64) -> SceneSnapshot {
        SceneSnapshot {
            frame,
            objects: self
                .evaluate_full(frame)
                .into_iter()
                .filter(|o| o.visible)
                .map(|o| o.object)
                .collect(),
        }
    }
}
