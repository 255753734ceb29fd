use super::track::{Interpolate, Track};
use super::TimelineError;
use crate::color::Rgba;
use crate::geometry::{GeometryError, DEFAULT_LINE_RADIUS};
use crate::math::{Rpy, Vec3};

/// Default color of new lines and cubes.
pub const DEFAULT_PRIMITIVE_COLOR: Rgba = Rgba::RED;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinePlacement {
    pub start: Vec3,
    pub end: Vec3,
    pub radius: f64,
    pub color: Rgba,
}

impl LinePlacement {
    pub fn new(start: Vec3, end: Vec3) -> Self {
        Self {
            start,
            end,
            radius: DEFAULT_LINE_RADIUS,
            color: DEFAULT_PRIMITIVE_COLOR,
        }
    }

    fn validate(&self) -> Result<(), GeometryError> {
        if (self.end - self.start).norm().is_nan() || (self.end - self.start).norm() <= 1e-9 {
            return Err(GeometryError::ZeroLengthLine);
        }
        if self.radius.is_nan() || self.radius <= 0.0 {
            return Err(GeometryError::NonPositiveRadius(self.radius));
        }
        Ok(())
    }
}

impl Interpolate for LinePlacement {
    fn interpolate(&self, other: &Self, t: f64) -> Self {
        Self {
            start: self.start.interpolate(&other.start, t),
            end: self.end.interpolate(&other.end, t),
            radius: self.radius.interpolate(&other.radius, t),
            color: self.color.interpolate(&other.color, t),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CubePlacement {
    pub center: Vec3,
    pub rpy: Rpy,
    pub dims: Vec3,
    pub color: Rgba,
    pub alpha: f64,
}

impl CubePlacement {
    pub fn new(center: Vec3, rpy: Rpy, dims: Vec3) -> Self {
        Self {
            center,
            rpy,
            dims,
            color: DEFAULT_PRIMITIVE_COLOR,
            alpha: 1.0,
        }
    }

    fn validate(&self) -> Result<(), TimelineError> {
        for (axis, value) in ['x', 'y', 'z'].into_iter().zip(self.dims.iter()) {
            if value.is_nan() || *value <= 0.0 {
                return Err(GeometryError::NonPositiveDimension {
                    axis,
                    value: *value,
                }
                .into());
            }
        }
        if !(0.0..=1.0).contains(&self.alpha) {
            return Err(TimelineError::InvalidAlpha(self.alpha));
        }
        Ok(())
    }
}

impl Interpolate for CubePlacement {
    fn interpolate(&self, other: &Self, t: f64) -> Self {
        Self {
            center: self.center.interpolate(&other.center, t),
            rpy: self.rpy.interpolate(&other.rpy, t),
            dims: self.dims.interpolate(&other.dims, t),
            color: self.color.interpolate(&other.color, t),
            alpha: self.alpha.interpolate(&other.alpha, t),
        }
    }
}

#[derive(Debug, Clone)]
pub(crate) struct Element<P> {
    pub(crate) placement: Track<P>,
    pub(crate) visible: Track<bool>,
}

impl<P: Interpolate> Element<P> {
    /// Hidden before the first visibility key.
    pub(crate) fn at(&self, frame: f64) -> Option<(P, bool)> {
        let first = self.visible.first_frame()?;
        let placement = self.placement.value_at(frame)?;
        let visible = frame >= first && self.visible.value_at(frame).unwrap_or(false);
        Some((placement, visible))
    }
}

/// A fixed number of primitives, each with its own placement and
/// visibility tracks. Elements stay hidden until first placed.
#[derive(Debug, Clone)]
pub struct PrimitiveSet<P> {
    pub(crate) elements: Vec<Element<P>>,
}

pub type LineSet = PrimitiveSet<LinePlacement>;
pub type CubeSet = PrimitiveSet<CubePlacement>;

impl<P: Interpolate> PrimitiveSet<P> {
    pub fn new(capacity: usize) -> Self {
        Self {
            elements: (0..capacity)
                .map(|_| Element {
                    placement: Track::linear(),
                    visible: Track::step(),
                })
                .collect(),
        }
    }

    pub fn capacity(&self) -> usize {
        self.elements.len()
    }

    fn element(&mut self, index: usize) -> Result<&mut Element<P>, TimelineError> {
        let capacity = self.elements.len();
        self.elements
            .get_mut(index)
            .ok_or(TimelineError::ElementIndex { index, capacity })
    }

    fn place(&mut self, index: usize, frame: f64, placement: P) -> Result<(), TimelineError> {
        let element = self.element(index)?;
        super::track::check_frame(frame)?;
        element.placement.insert(frame, placement)?;
        element.visible.insert(frame, true)
    }

    /// Hides element `index` from `frame` until it is placed again.
    pub fn hide_at_frame(&mut self, index: usize, frame: f64) -> Result<(), TimelineError> {
        self.element(index)?.visible.insert(frame, false)
    }

    /// Placement and visibility of element `index` at `frame`; `None` if it
    /// was never placed.
    pub fn element_at(&self, index: usize, frame: f64) -> Option<(P, bool)> {
        self.elements.get(index)?.at(frame)
    }

    pub(crate) fn key_range(&self) -> Option<(f64, f64)> {
        let mut frames = Vec::new();
        for e in &self.elements {
            frames.extend(e.placement.first_frame());
            frames.extend(e.placement.last_frame());
            frames.extend(e.visible.first_frame());
            frames.extend(e.visible.last_frame());
        }
        super::span(frames)
    }
}

impl LineSet {
    /// Places line `index` from `frame` on, with default radius and color.
    pub fn set_line_at_frame(
        &mut self,
        index: usize,
        start: Vec3,
        end: Vec3,
        frame: f64,
    ) -> Result<(), TimelineError> {
        self.set_line_styled(index, LinePlacement::new(start, end), frame)
    }

    pub fn set_line_styled(
        &mut self,
        index: usize,
        line: LinePlacement,
        frame: f64,
    ) -> Result<(), TimelineError> {
        line.validate()?;
        self.place(index, frame, line)
    }
}

impl CubeSet {
    /// Places cube `index` from `frame` on, with default color and alpha.
    pub fn set_cube_at_frame(
        &mut self,
        index: usize,
        center: Vec3,
        rpy: Rpy,
        dims: Vec3,
        frame: f64,
    ) -> Result<(), TimelineError> {
        self.set_cube_styled(index, CubePlacement::new(center, rpy, dims), frame)
    }

    pub fn set_cube_styled(
        &mut self,
        index: usize,
        cube: CubePlacement,
        frame: f64,
    ) -> Result<(), TimelineError> {
        cube.validate()?;
        self.place(index, frame, cube)
    }
}
