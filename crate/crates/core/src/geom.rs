//! Planar geometry primitives shared by the simulator and the ray caster.

use std::f64::consts::PI;
use std::ops::{Add, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Point2 {
    pub x: f64,
    pub y: f64,
}

impl Point2 {
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn dot(self, other: Self) -> f64 {
        self.x * other.x + self.y * other.y
    }

    /// z-component of the 3D cross product.
    pub fn cross(self, other: Self) -> f64 {
        self.x * other.y - self.y * other.x
    }

    pub fn norm(self) -> f64 {
        self.x.hypot(self.y)
    }

    pub fn distance(self, other: Self) -> f64 {
        (self - other).norm()
    }

    pub fn rotate(self, angle: f64) -> Self {
        let (s, c) = angle.sin_cos();
        Self::new(c * self.x - s * self.y, s * self.x + c * self.y)
    }

    pub fn from_polar(r: f64, angle: f64) -> Self {
        let (s, c) = angle.sin_cos();
        Self::new(r * c, r * s)
    }
}

impl Add for Point2 {
    type Output = Self;
    fn add(self, rhs: Self) -> Self {
        Self::new(self.x + rhs.x, self.y + rhs.y)
    }
}

impl Sub for Point2 {
    type Output = Self;
    fn sub(self, rhs: Self) -> Self {
        Self::new(self.x - rhs.x, self.y - rhs.y)
    }
}

impl Mul<f64> for Point2 {
    type Output = Self;
    fn mul(self, rhs: f64) -> Self {
        Self::new(self.x * rhs, self.y * rhs)
    }
}

impl Neg for Point2 {
    type Output = Self;
    fn neg(self) -> Self {
        Self::new(-self.x, -self.y)
    }
}

/// Axis-aligned rectangle, `min` inclusive corner and `max` opposite corner.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Rect {
    pub min: Point2,
    pub max: Point2,
}

impl Rect {
    pub const fn new(min_x: f64, min_y: f64, max_x: f64, max_y: f64) -> Self {
        Self {
            min: Point2::new(min_x, min_y),
            max: Point2::new(max_x, max_y),
        }
    }

    pub fn centered(half_w: f64, half_h: f64) -> Self {
        Self::new(-half_w, -half_h, half_w, half_h)
    }

    pub fn width(&self) -> f64 {
        self.max.x - self.min.x
    }

    pub fn height(&self) -> f64 {
        self.max.y - self.min.y
    }

    pub fn contains(&self, p: Point2) -> bool {
        p.x >= self.min.x && p.x <= self.max.x && p.y >= self.min.y && p.y <= self.max.y
    }

    /// Shrinks every side by `margin`. May produce an empty rectangle.
    pub fn inset(&self, margin: f64) -> Self {
        Self::new(
            self.min.x + margin,
            self.min.y + margin,
            self.max.x - margin,
            self.max.y - margin,
        )
    }

    pub fn is_empty(&self) -> bool {
        self.max.x <= self.min.x || self.max.y <= self.min.y
    }

    /// Corners in counter-clockwise order starting at `min`.
    pub fn corners(&self) -> [Point2; 4] {
        [
            self.min,
            Point2::new(self.max.x, self.min.y),
            self.max,
            Point2::new(self.min.x, self.max.y),
        ]
    }
}

/// Wraps an angle into (-π, π].
pub fn normalize_angle(angle: f64) -> f64 {
    let mut a = angle.rem_euclid(2.0 * PI);
    if a > PI {
        a -= 2.0 * PI;
    }
    // rem_euclid may round up to exactly 2π
    if a <= -PI {
        a += 2.0 * PI;
    }
    a
}

/// Smallest `t > 0` with `origin + t·dir` on the circle, if any.
///
/// `dir` must be a unit vector. A ray starting inside the disc reports the exit point.
pub fn ray_circle(origin: Point2, dir: Point2, center: Point2, radius: f64) -> Option<f64> {
    let oc = origin - center;
    let b = oc.dot(dir);
    let c = oc.dot(oc) - radius * radius;
    let disc = b * b - c;
    if disc < 0.0 {
        return None;
    }
    let sq = disc.sqrt();
    let t0 = -b - sq;
    if t0 > 0.0 {
        return Some(t0);
    }
    let t1 = -b + sq;
    (t1 > 0.0).then_some(t1)
}

/// Smallest `t > 0` with `origin + t·dir` on the segment `a`–`b`, if any.
pub fn ray_segment(origin: Point2, dir: Point2, a: Point2, b: Point2) -> Option<f64> {
    let edge = b - a;
    let denom = dir.cross(edge);
    if denom.abs() < 1e-12 {
        return None;
    }
    let ao = a - origin;
    let t = ao.cross(edge) / denom;
    let s = ao.cross(dir) / denom;
    (t > 0.0 && (0.0..=1.0).contains(&s)).then_some(t)
}

/// Euclidean distance from `p` to the closed segment `a`–`b`.
pub fn point_segment_distance(p: Point2, a: Point2, b: Point2) -> f64 {
    let ab = b - a;
    let len2 = ab.dot(ab);
    if len2 == 0.0 {
        return p.distance(a);
    }
    let t = ((p - a).dot(ab) / len2).clamp(0.0, 1.0);
    p.distance(a + ab * t)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn normalize_into_half_open_range() {
        assert_eq!(normalize_angle(PI), PI);
        assert_eq!(normalize_angle(-PI), PI);
        assert!((normalize_angle(3.0 * PI) - PI).abs() < 1e-12);
        assert!((normalize_angle(-0.5) + 0.5).abs() < 1e-15);
        assert!((normalize_angle(2.0 * PI + 0.25) - 0.25).abs() < 1e-12);
    }

    #[test]
    fn ray_hits() {
        let o = Point2::new(0.0, 0.0);
        let d = Point2::new(1.0, 0.0);
        let t = ray_circle(o, d, Point2::new(2.0, 0.0), 0.5).unwrap();
        assert!((t - 1.5).abs() < 1e-12);
        assert!(ray_circle(o, -d, Point2::new(2.0, 0.0), 0.5).is_none());
        let t = ray_segment(o, d, Point2::new(3.0, -1.0), Point2::new(3.0, 1.0)).unwrap();
        assert!((t - 3.0).abs() < 1e-12);
        assert!(ray_segment(o, -d, Point2::new(3.0, -1.0), Point2::new(3.0, 1.0)).is_none());
        // from inside: exit point
        let t = ray_circle(o, d, o, 1.0).unwrap();
        assert!((t - 1.0).abs() < 1e-12);
    }

    #[test]
    fn segment_distance() {
        let a = Point2::new(0.0, 0.0);
        let b = Point2::new(2.0, 0.0);
        assert_eq!(point_segment_distance(Point2::new(1.0, 1.0), a, b), 1.0);
        assert_eq!(point_segment_distance(Point2::new(3.0, 0.0), a, b), 1.0);
    }
}
