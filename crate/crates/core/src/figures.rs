//! Figure recipes built on the scene API.

use std::sync::Arc;

use thiserror::Error;

use crate::color::Rgba;
use crate::kinematics::{Chain, JointState};
use crate::math::Pose;
use crate::timeline::{
    AppearanceLayer, AppearanceUpdate, LinkScope, RobotId, Scene, TimelineError,
};
use crate::urdd::AssetStore;

#[derive(Debug, Error)]
pub enum FigureError {
    #[error("a gradient needs at least 2 copies, got {0}")]
    TooFewCopies(usize),
    #[error("alpha profile has {actual} entries but there are {expected} copies")]
    AlphaProfileLength { expected: usize, actual: usize },
    #[error(transparent)]
    Timeline(#[from] TimelineError),
}

/// A row of robot copies sweeping from one state and color to another.
#[derive(Debug, Clone, PartialEq)]
pub struct GradientSpec {
    pub start_state: JointState,
    pub end_state: JointState,
    pub start_color: Rgba,
    pub end_color: Rgba,
    pub num_copies: usize,
    /// One alpha per copy for the plain layer.
    pub alpha_profile: Option<Vec<f64>>,
}

/// Spawns `num_copies` robots; copy `i` sits at `t = i / (num_copies - 1)`
/// of the way from the start state and color to the end ones.
pub fn motion_gradient(
    scene: &mut Scene,
    chain: impl Into<Arc<Chain>>,
    assets: impl Into<Arc<AssetStore>>,
    spec: &GradientSpec,
) -> Result<Vec<RobotId>, FigureError> {
    let n = spec.num_copies;
    if n < 2 {
        return Err(FigureError::TooFewCopies(n));
    }
    if let Some(profile) = &spec.alpha_profile {
        if profile.len() != n {
            return Err(FigureError::AlphaProfileLength {
                expected: n,
                actual: profile.len(),
            });
        }
        if let Some(&a) = profile.iter().find(|a| !(0.0..=1.0).contains(*a)) {
            return Err(TimelineError::InvalidAlpha(a).into());
        }
    }
    let (chain, assets) = (chain.into(), assets.into());
    chain
        .check_state(&spec.start_state)
        .map_err(TimelineError::from)?;
    chain
        .check_state(&spec.end_state)
        .map_err(TimelineError::from)?;

    let mut ids = Vec::with_capacity(n);
    for i in 0..n {
        let t = i as f64 / (n - 1) as f64;
        let id = scene.spawn(Arc::clone(&chain), Arc::clone(&assets))?;
        let robot = scene.robot_mut(id);
        robot.set_state(spec.start_state.lerp(&spec.end_state, t))?;
        let mut look = AppearanceUpdate::new().color(spec.start_color.lerp(&spec.end_color, t));
        if let Some(profile) = &spec.alpha_profile {
            look = look.alpha(profile[i]);
        }
        robot.set_appearance(AppearanceLayer::Plain, LinkScope::All, look)?;
        ids.push(id);
    }
    Ok(ids)
}

/// Moves a robot's base; its link poses are composed with `base` from now on.
pub fn place_robot(scene: &mut Scene, robot: RobotId, base: Pose) {
    scene.robot_mut(robot).set_base_pose(base);
}
