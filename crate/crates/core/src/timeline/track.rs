use crate::color::Rgba;
use crate::kinematics::JointState;
use crate::math::{Rpy, Vec3};

use super::TimelineError;

/// Values a linear track can blend. `interpolate(a, b, 0)` must return `a`.
pub trait Interpolate: Clone {
    fn interpolate(&self, other: &Self, t: f64) -> Self;
}

impl Interpolate for f64 {
    fn interpolate(&self, other: &f64, t: f64) -> f64 {
        self + (other - self) * t
    }
}

impl Interpolate for bool {
    fn interpolate(&self, _: &bool, _: f64) -> bool {
        *self
    }
}

impl Interpolate for Vec3 {
    fn interpolate(&self, other: &Vec3, t: f64) -> Vec3 {
        self + (other - self) * t
    }
}

impl Interpolate for Rpy {
    fn interpolate(&self, other: &Rpy, t: f64) -> Rpy {
        Rpy::new(
            self.roll.interpolate(&other.roll, t),
            self.pitch.interpolate(&other.pitch, t),
            self.yaw.interpolate(&other.yaw, t),
        )
    }
}

impl Interpolate for Rgba {
    fn interpolate(&self, other: &Rgba, t: f64) -> Rgba {
        self.lerp(other, t)
    }
}

impl Interpolate for JointState {
    fn interpolate(&self, other: &JointState, t: f64) -> JointState {
        self.lerp(other, t)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InterpMode {
    Linear,
    /// Holds the value of the latest key at or before the query frame.
    Step,
}

pub(crate) fn check_frame(frame: f64) -> Result<(), TimelineError> {
    if frame.is_finite() && frame >= 0.0 {
        Ok(())
    } else {
        Err(TimelineError::InvalidFrame(frame))
    }
}

/// Keyframes sorted by frame. Queries outside the keyed range hold the
/// nearest key.
#[derive(Debug, Clone, PartialEq)]
pub struct Track<V> {
    keys: Vec<(f64, V)>,
    mode: InterpMode,
}

impl<V: Interpolate> Track<V> {
    pub fn new(mode: InterpMode) -> Self {
        Self {
            keys: Vec::new(),
            mode,
        }
    }

    pub fn linear() -> Self {
        Self::new(InterpMode::Linear)
    }

    pub fn step() -> Self {
        Self::new(InterpMode::Step)
    }

    pub fn mode(&self) -> InterpMode {
        self.mode
    }

    pub fn keys(&self) -> &[(f64, V)] {
        &self.keys
    }

    pub fn is_empty(&self) -> bool {
        self.keys.is_empty()
    }

    pub fn first_frame(&self) -> Option<f64> {
        self.keys.first().map(|k| k.0)
    }

    pub fn last_frame(&self) -> Option<f64> {
        self.keys.last().map(|k| k.0)
    }

    /// Adds a key; a key already at `frame` is replaced.
    pub fn insert(&mut self, frame: f64, value: V) -> Result<(), TimelineError> {
        check_frame(frame)?;
        match self.keys.binary_search_by(|k| k.0.total_cmp(&frame)) {
            Ok(i) => self.keys[i].1 = value,
            Err(i) => self.keys.insert(i, (frame, value)),
        }
        Ok(())
    }

    /// `None` only when the track has no keys.
    pub fn value_at(&self, frame: f64) -> Option<V> {
        let (first, last) = (self.keys.first()?, self.keys.last()?);
        if frame <= first.0 {
            return Some(first.1.clone());
        }
        if frame >= last.0 {
            return Some(last.1.clone());
        }
        let i = self.keys.partition_point(|k| k.0 <= frame);
        let (f0, a) = &self.keys[i - 1];
        let (f1, b) = &self.keys[i];
        if *f0 == frame || self.mode == InterpMode::Step {
            return Some(a.clone());
        }
        Some(a.interpolate(b, (frame - f0) / (f1 - f0)))
    }
}
