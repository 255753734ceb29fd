use std::sync::Arc;

use log::warn;

use super::track::{check_frame, Track};
use super::TimelineError;
use crate::color::Rgba;
use crate::kinematics::{Chain, JointState};
use crate::math::Pose;
use crate::urdd::{AppearanceLayer, AssetStore};

/// Which links an appearance change applies to. `Link` takes a chain index.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LinkScope {
    All,
    Link(usize),
}

/// The unkeyed appearance of one link on one layer.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Appearance {
    pub color: Rgba,
    pub alpha: f64,
    pub visible: bool,
}

/// Optional changes for [`RobotInstance::set_appearance`]; unset fields are
/// left alone.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct AppearanceUpdate {
    pub color: Option<Rgba>,
    pub alpha: Option<f64>,
    pub visible: Option<bool>,
}

impl AppearanceUpdate {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn color(mut self, color: impl Into<Rgba>) -> Self {
        self.color = Some(color.into());
        self
    }

    pub fn alpha(mut self, alpha: f64) -> Self {
        self.alpha = Some(alpha);
        self
    }

    pub fn visible(mut self, visible: bool) -> Self {
        self.visible = Some(visible);
        self
    }
}

#[derive(Debug, Clone)]
struct LayerTracks {
    current: Appearance,
    color: Track<Rgba>,
    alpha: Track<f64>,
    visible: Track<bool>,
}

impl LayerTracks {
    fn new(current: Appearance) -> Self {
        Self {
            current,
            color: Track::linear(),
            alpha: Track::linear(),
            visible: Track::step(),
        }
    }

    fn at(&self, frame: f64) -> Appearance {
        Appearance {
            color: self.color.value_at(frame).unwrap_or(self.current.color),
            alpha: self.alpha.value_at(frame).unwrap_or(self.current.alpha),
            visible: self.visible.value_at(frame).unwrap_or(self.current.visible),
        }
    }
}

fn layer_slot(layer: AppearanceLayer) -> usize {
    match layer {
        AppearanceLayer::Plain => 0,
        AppearanceLayer::ConvexHull => 1,
        AppearanceLayer::ConvexDecomposition => 2,
    }
}

/// A posed, styled copy of a robot. Chains and asset stores are shared
/// between instances; states and appearances are not.
#[derive(Debug, Clone)]
pub struct RobotInstance {
    chain: Arc<Chain>,
    assets: Arc<AssetStore>,
    base_pose: Pose,
    current_state: JointState,
    state_track: Track<JointState>,
    // indexed by chain link, then layer
    appearance: Vec<[LayerTracks; 3]>,
}

impl RobotInstance {
    pub(crate) fn new(chain: Arc<Chain>, assets: Arc<AssetStore>) -> Result<Self, TimelineError> {
        if let Some(missing) = chain
            .links()
            .iter()
            .find(|l| l.has_visuals && !assets.has_link(&l.name))
        {
            return Err(TimelineError::MissingAsset(missing.name.clone()));
        }
        let appearance = chain
            .links()
            .iter()
            .map(|l| {
                let color = l.base_color.unwrap_or(Rgba::DEFAULT_GRAY);
                let base = |visible| {
                    LayerTracks::new(Appearance {
                        color,
                        alpha: 1.0,
                        visible,
                    })
                };
                [base(true), base(false), base(false)]
            })
            .collect();
        Ok(Self {
            current_state: JointState::zeros(chain.dof()),
            chain,
            assets,
            base_pose: Pose::identity(),
            state_track: Track::linear(),
            appearance,
        })
    }

    pub fn chain(&self) -> &Chain {
        &self.chain
    }

    pub fn assets(&self) -> &AssetStore {
        &self.assets
    }

    pub fn dof(&self) -> usize {
        self.chain.dof()
    }

    pub fn base_pose(&self) -> &Pose {
        &self.base_pose
    }

    pub fn set_base_pose(&mut self, base: Pose) {
        self.base_pose = base;
    }

    pub fn current_state(&self) -> &JointState {
        &self.current_state
    }

    pub fn state_track(&self) -> &Track<JointState> {
        &self.state_track
    }

    /// Replaces the current state without keying it. Values outside joint
    /// limits are kept and logged.
    pub fn set_state(&mut self, state: impl Into<JointState>) -> Result<(), TimelineError> {
        let state = state.into();
        self.chain.check_state(&state)?;
        let outside = self.chain.limit_violations(&state);
        if !outside.is_empty() {
            warn!("joint values outside limits for: {}", outside.join(", "));
        }
        self.current_state = state;
        Ok(())
    }

    /// Keys the current state at `frame`.
    pub fn keyframe_state(&mut self, frame: f64) -> Result<(), TimelineError> {
        self.state_track.insert(frame, self.current_state.clone())
    }

    /// Keys `states[k]` at `start_frame + k * stride`. Nothing is inserted
    /// unless every state is valid.
    pub fn keyframe_discrete_trajectory(
        &mut self,
        states: &[JointState],
        start_frame: f64,
        stride: f64,
    ) -> Result<(), TimelineError> {
        if !(stride.is_finite() && stride > 0.0) {
            return Err(TimelineError::InvalidStride(stride));
        }
        check_frame(start_frame)?;
        for state in states {
            self.chain.check_state(state)?;
        }
        let last = start_frame + stride * states.len().saturating_sub(1) as f64;
        check_frame(last)?;
        for (k, state) in states.iter().enumerate() {
            self.state_track
                .insert(start_frame + k as f64 * stride, state.clone())?;
        }
        Ok(())
    }

    /// Joint values at `frame`: the keyed track if any, else the current state.
    pub fn state_at(&self, frame: f64) -> JointState {
        self.state_track
            .value_at(frame)
            .unwrap_or_else(|| self.current_state.clone())
    }

    fn scoped(&self, scope: LinkScope) -> Result<std::ops::Range<usize>, TimelineError> {
        let len = self.appearance.len();
        match scope {
            LinkScope::All => Ok(0..len),
            LinkScope::Link(i) if i < len => Ok(i..i + 1),
            LinkScope::Link(index) => Err(TimelineError::LinkIndex { index, len }),
        }
    }

    /// Changes the unkeyed appearance of `layer` on the links in `scope`.
    pub fn set_appearance(
        &mut self,
        layer: AppearanceLayer,
        scope: LinkScope,
        update: AppearanceUpdate,
    ) -> Result<(), TimelineError> {
        if let Some(a) = update.alpha {
            if !(0.0..=1.0).contains(&a) {
                return Err(TimelineError::InvalidAlpha(a));
            }
        }
        for i in self.scoped(scope)? {
            let current = &mut self.appearance[i][layer_slot(layer)].current;
            if let Some(c) = update.color {
                current.color = c;
            }
            if let Some(a) = update.alpha {
                current.alpha = a;
            }
            if let Some(v) = update.visible {
                current.visible = v;
            }
        }
        Ok(())
    }

    pub fn current_appearance(
        &self,
        link: usize,
        layer: AppearanceLayer,
    ) -> Result<Appearance, TimelineError> {
        self.scoped(LinkScope::Link(link))?;
        Ok(self.appearance[link][layer_slot(layer)].current)
    }

    /// Keys the current color, alpha and visibility of every link and layer.
    pub fn keyframe_appearance(&mut self, frame: f64) -> Result<(), TimelineError> {
        check_frame(frame)?;
        for layers in &mut self.appearance {
            for tracks in layers.iter_mut() {
                let c = tracks.current;
                tracks.color.insert(frame, c.color)?;
                tracks.alpha.insert(frame, c.alpha)?;
                tracks.visible.insert(frame, c.visible)?;
            }
        }
        Ok(())
    }

    pub fn appearance_at(&self, link: usize, layer: AppearanceLayer, frame: f64) -> Appearance {
        self.appearance[link][layer_slot(layer)].at(frame)
    }

    /// Smallest and largest keyed frame over every track of this robot.
    pub(crate) fn key_range(&self) -> Option<(f64, f64)> {
        let mut frames = Vec::new();
        frames.extend(self.state_track.first_frame());
        frames.extend(self.state_track.last_frame());
        for tracks in self.appearance.iter().flatten() {
            frames.extend(tracks.color.first_frame());
            frames.extend(tracks.color.last_frame());
            frames.extend(tracks.alpha.first_frame());
            frames.extend(tracks.alpha.last_frame());
            frames.extend(tracks.visible.first_frame());
            frames.extend(tracks.visible.last_frame());
        }
        super::span(frames)
    }
}
