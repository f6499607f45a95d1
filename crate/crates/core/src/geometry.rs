//! Axis-aligned rectangle arithmetic for footprints, corridors and sweeps.
//!
//! All lengths are `f64` meters in the table frame. Rectangles are closed
//! sets for containment but only *interior* intersection counts as overlap,
//! so two footprints sharing an edge are not in collision.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};

/// A planar point or displacement, serialized as `[x, y]`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(from = "[f64; 2]", into = "[f64; 2]")]
pub struct Vec2 {
    pub x: f64,
    pub y: f64,
}

impl Vec2 {
    pub const ZERO: Vec2 = Vec2 { x: 0.0, y: 0.0 };

    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn norm(self) -> f64 {
        self.x.hypot(self.y)
    }

    pub fn distance(self, other: Vec2) -> f64 {
        (self - other).norm()
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }

    pub fn dot(self, other: Vec2) -> f64 {
        self.x * other.x + self.y * other.y
    }
}

impl From<[f64; 2]> for Vec2 {
    fn from([x, y]: [f64; 2]) -> Self {
        Self { x, y }
    }
}

impl From<Vec2> for [f64; 2] {
    fn from(v: Vec2) -> Self {
        [v.x, v.y]
    }
}

impl Add for Vec2 {
    type Output = Vec2;
    fn add(self, rhs: Vec2) -> Vec2 {
        Vec2::new(self.x + rhs.x, self.y + rhs.y)
    }
}

impl Sub for Vec2 {
    type Output = Vec2;
    fn sub(self, rhs: Vec2) -> Vec2 {
        Vec2::new(self.x - rhs.x, self.y - rhs.y)
    }
}

impl Neg for Vec2 {
    type Output = Vec2;
    fn neg(self) -> Vec2 {
        Vec2::new(-self.x, -self.y)
    }
}

impl Mul<f64> for Vec2 {
    type Output = Vec2;
    fn mul(self, rhs: f64) -> Vec2 {
        Vec2::new(self.x * rhs, self.y * rhs)
    }
}

impl fmt::Display for Vec2 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.x, self.y)
    }
}

/// Half-extents `(a, b)` of an axis-aligned footprint along x and y.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct HalfDims {
    pub a: f64,
    pub b: f64,
}

impl HalfDims {
    pub const fn new(a: f64, b: f64) -> Self {
        Self { a, b }
    }

    pub fn is_valid(self) -> bool {
        self.a.is_finite() && self.b.is_finite() && self.a > 0.0 && self.b > 0.0
    }

    /// Half-extent along the travel axis of `side`.
    pub fn along(self, side: Side) -> f64 {
        if side.is_horizontal() {
            self.a
        } else {
            self.b
        }
    }

    pub fn area(self) -> f64 {
        4.0 * self.a * self.b
    }
}

/// Axis-aligned rectangle in corner representation.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Rect {
    pub lo: Vec2,
    pub hi: Vec2,
}

impl Rect {
    /// Builds a rect from two corners. Panics in debug builds if `lo > hi`.
    pub fn new(lo: Vec2, hi: Vec2) -> Self {
        debug_assert!(lo.x <= hi.x && lo.y <= hi.y, "inverted rect {lo} {hi}");
        Self { lo, hi }
    }

    pub fn from_bounds(x0: f64, y0: f64, x1: f64, y1: f64) -> Self {
        Self::new(Vec2::new(x0, y0), Vec2::new(x1, y1))
    }

    /// Footprint `[x-a, x+a] x [y-b, y+b]` of an object centered at `center`.
    pub fn from_center(center: Vec2, half: HalfDims) -> Self {
        Self {
            lo: Vec2::new(center.x - half.a, center.y - half.b),
            hi: Vec2::new(center.x + half.a, center.y + half.b),
        }
    }

    pub fn is_valid(&self) -> bool {
        self.lo.is_finite() && self.hi.is_finite() && self.lo.x <= self.hi.x && self.lo.y <= self.hi.y
    }

    pub fn width(&self) -> f64 {
        self.hi.x - self.lo.x
    }

    pub fn height(&self) -> f64 {
        self.hi.y - self.lo.y
    }

    pub fn area(&self) -> f64 {
        self.width() * self.height()
    }

    pub fn center(&self) -> Vec2 {
        Vec2::new(0.5 * (self.lo.x + self.hi.x), 0.5 * (self.lo.y + self.hi.y))
    }

    /// True iff the interiors intersect. Shared edges or corners do not count.
    pub fn overlaps(&self, other: &Rect) -> bool {
        self.lo.x < other.hi.x
            && other.lo.x < self.hi.x
            && self.lo.y < other.hi.y
            && other.lo.y < self.hi.y
    }

    /// True iff `inner` is a subset of `self`; boundary contact allowed.
    pub fn contains(&self, inner: &Rect) -> bool {
        self.lo.x <= inner.lo.x
            && self.lo.y <= inner.lo.y
            && inner.hi.x <= self.hi.x
            && inner.hi.y <= self.hi.y
    }

    pub fn contains_point(&self, p: Vec2) -> bool {
        self.lo.x <= p.x && p.x <= self.hi.x && self.lo.y <= p.y && p.y <= self.hi.y
    }

    pub fn translate(&self, by: Vec2) -> Rect {
        Rect {
            lo: self.lo + by,
            hi: self.hi + by,
        }
    }

    /// Shrinks every side by `margin`; collapses to the center line if the
    /// margin exceeds the half-extent.
    pub fn shrink(&self, margin: f64) -> Rect {
        let c = self.center();
        let lo = Vec2::new((self.lo.x + margin).min(c.x), (self.lo.y + margin).min(c.y));
        let hi = Vec2::new((self.hi.x - margin).max(c.x), (self.hi.y - margin).max(c.y));
        Rect { lo, hi }
    }

    /// Bounding rect of `self` and its translate by `distance` along `side`.
    /// For axis-aligned motion this is exactly the swept region.
    pub fn sweep(&self, side: Side, distance: f64) -> Rect {
        debug_assert!(distance >= 0.0);
        let moved = self.translate(side.direction() * distance);
        Rect {
            lo: Vec2::new(self.lo.x.min(moved.lo.x), self.lo.y.min(moved.lo.y)),
            hi: Vec2::new(self.hi.x.max(moved.hi.x), self.hi.y.max(moved.hi.y)),
        }
    }

    /// Interval of the rect projected on the travel axis of `side`, oriented
    /// so that larger values are deeper along the travel direction.
    pub fn axis_extent(&self, side: Side) -> (f64, f64) {
        match side {
            Side::Right => (self.lo.x, self.hi.x),
            Side::Left => (-self.hi.x, -self.lo.x),
            Side::Up => (self.lo.y, self.hi.y),
            Side::Down => (-self.hi.y, -self.lo.y),
        }
    }

    /// Interval on the axis perpendicular to `side`'s travel (unoriented).
    pub fn cross_extent(&self, side: Side) -> (f64, f64) {
        if side.is_horizontal() {
            (self.lo.y, self.hi.y)
        } else {
            (self.lo.x, self.hi.x)
        }
    }

    pub fn bounds(&self) -> [f64; 4] {
        [self.lo.x, self.lo.y, self.hi.x, self.hi.y]
    }
}

/// Free-function form of [`Rect::from_center`].
pub fn rect_from_center(center: Vec2, half: HalfDims) -> Rect {
    Rect::from_center(center, half)
}

pub fn overlaps(r1: &Rect, r2: &Rect) -> bool {
    r1.overlaps(r2)
}

pub fn contains(outer: &Rect, inner: &Rect) -> bool {
    outer.contains(inner)
}

pub fn sweep(r: &Rect, side: Side, distance: f64) -> Rect {
    r.sweep(side, distance)
}

pub fn axis_extent(r: &Rect, side: Side) -> (f64, f64) {
    r.axis_extent(side)
}

/// Push direction. `Left` means the pusher travels toward -x.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    Left,
    Right,
    Up,
    Down,
}

impl Side {
    pub const ALL: [Side; 4] = [Side::Left, Side::Right, Side::Up, Side::Down];

    pub fn direction(self) -> Vec2 {
        match self {
            Side::Left => Vec2::new(-1.0, 0.0),
            Side::Right => Vec2::new(1.0, 0.0),
            Side::Up => Vec2::new(0.0, 1.0),
            Side::Down => Vec2::new(0.0, -1.0),
        }
    }

    pub fn opposite(self) -> Side {
        match self {
            Side::Left => Side::Right,
            Side::Right => Side::Left,
            Side::Up => Side::Down,
            Side::Down => Side::Up,
        }
    }

    pub fn is_horizontal(self) -> bool {
        matches!(self, Side::Left | Side::Right)
    }

    /// Signed coordinate of `p` along the travel direction.
    pub fn project(self, p: Vec2) -> f64 {
        p.dot(self.direction())
    }

    pub fn name(self) -> &'static str {
        match self {
            Side::Left => "left",
            Side::Right => "right",
            Side::Up => "up",
            Side::Down => "down",
        }
    }
}

impl fmt::Display for Side {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}
