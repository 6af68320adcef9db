//! Plane geometry used by the world and the sensor.
//!
//! All shapes are closed sets: touching counts as intersecting, up to
//! [`CONTACT_EPS`].

use std::f64::consts::TAU;
use std::ops::{Add, AddAssign, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};

/// Contact tolerance in pixels.
pub const CONTACT_EPS: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Vec2 {
    pub x: f64,
    pub y: f64,
}

impl Vec2 {
    pub const ZERO: Vec2 = Vec2 { x: 0.0, y: 0.0 };

    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn from_angle(theta: f64) -> Self {
        Self::new(theta.cos(), theta.sin())
    }

    pub fn dot(self, o: Vec2) -> f64 {
        self.x * o.x + self.y * o.y
    }

    /// z component of the 3D cross product.
    pub fn cross(self, o: Vec2) -> f64 {
        self.x * o.y - self.y * o.x
    }

    pub fn norm(self) -> f64 {
        self.x.hypot(self.y)
    }

    pub fn norm_sq(self) -> f64 {
        self.dot(self)
    }

    /// Counter-clockwise rotation by `theta` radians.
    pub fn rotate(self, theta: f64) -> Vec2 {
        let (s, c) = theta.sin_cos();
        Vec2::new(c * self.x - s * self.y, s * self.x + c * self.y)
    }

    /// Polar angle in `[0, 2π)`.
    pub fn angle(self) -> f64 {
        normalize_angle(self.y.atan2(self.x))
    }
}

impl Add for Vec2 {
    type Output = Vec2;
    fn add(self, o: Vec2) -> Vec2 {
        Vec2::new(self.x + o.x, self.y + o.y)
    }
}

impl AddAssign for Vec2 {
    fn add_assign(&mut self, o: Vec2) {
        self.x += o.x;
        self.y += o.y;
    }
}

impl Sub for Vec2 {
    type Output = Vec2;
    fn sub(self, o: Vec2) -> Vec2 {
        Vec2::new(self.x - o.x, self.y - o.y)
    }
}

impl Mul<f64> for Vec2 {
    type Output = Vec2;
    fn mul(self, k: f64) -> Vec2 {
        Vec2::new(self.x * k, self.y * k)
    }
}

impl Neg for Vec2 {
    type Output = Vec2;
    fn neg(self) -> Vec2 {
        Vec2::new(-self.x, -self.y)
    }
}

/// Wraps an angle into `[0, 2π)`.
pub fn normalize_angle(theta: f64) -> f64 {
    let r = theta.rem_euclid(TAU);
    // rem_euclid can return TAU itself for tiny negative inputs
    if r >= TAU {
        0.0
    } else {
        r
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Segment {
    pub a: Vec2,
    pub b: Vec2,
}

impl Segment {
    pub const fn new(a: Vec2, b: Vec2) -> Self {
        Self { a, b }
    }

    pub fn distance_to_point(&self, p: Vec2) -> f64 {
        let ab = self.b - self.a;
        let len_sq = ab.norm_sq();
        if len_sq == 0.0 {
            return (p - self.a).norm();
        }
        let t = ((p - self.a).dot(ab) / len_sq).clamp(0.0, 1.0);
        (p - (self.a + ab * t)).norm()
    }

    /// Closed segment-segment intersection test.
    pub fn intersects(&self, other: &Segment) -> bool {
        let d1 = orient(other.a, other.b, self.a);
        let d2 = orient(other.a, other.b, self.b);
        let d3 = orient(self.a, self.b, other.a);
        let d4 = orient(self.a, self.b, other.b);
        if ((d1 > CONTACT_EPS && d2 < -CONTACT_EPS) || (d1 < -CONTACT_EPS && d2 > CONTACT_EPS))
            && ((d3 > CONTACT_EPS && d4 < -CONTACT_EPS) || (d3 < -CONTACT_EPS && d4 > CONTACT_EPS))
        {
            return true;
        }
        // touching or collinear cases
        other.distance_to_point(self.a) <= CONTACT_EPS
            || other.distance_to_point(self.b) <= CONTACT_EPS
            || self.distance_to_point(other.a) <= CONTACT_EPS
            || self.distance_to_point(other.b) <= CONTACT_EPS
    }
}

fn orient(a: Vec2, b: Vec2, c: Vec2) -> f64 {
    (b - a).cross(c - a)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Disc {
    pub center: Vec2,
    pub radius: f64,
}

impl Disc {
    pub const fn new(center: Vec2, radius: f64) -> Self {
        Self { center, radius }
    }
}

/// A square of side `side` centred at `center`, rotated by `heading`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OrientedSquare {
    pub center: Vec2,
    pub heading: f64,
    pub side: f64,
}

impl OrientedSquare {
    fn to_local(self, p: Vec2) -> Vec2 {
        (p - self.center).rotate(-self.heading)
    }

    /// Euclidean distance from `p` to the solid square (0 inside).
    pub fn distance_to_point(&self, p: Vec2) -> f64 {
        let h = self.side / 2.0;
        let q = self.to_local(p);
        let dx = (q.x.abs() - h).max(0.0);
        let dy = (q.y.abs() - h).max(0.0);
        dx.hypot(dy)
    }

    pub fn intersects_disc(&self, disc: &Disc) -> bool {
        self.distance_to_point(disc.center) <= disc.radius + CONTACT_EPS
    }

    /// Closed segment vs solid square test (Liang-Barsky clip in the box frame).
    pub fn intersects_segment(&self, seg: &Segment) -> bool {
        let h = self.side / 2.0 + CONTACT_EPS;
        let p0 = self.to_local(seg.a);
        let d = self.to_local(seg.b) - p0;
        let mut t0 = 0.0_f64;
        let mut t1 = 1.0_f64;
        for (p, q) in [
            (-d.x, p0.x + h),
            (d.x, h - p0.x),
            (-d.y, p0.y + h),
            (d.y, h - p0.y),
        ] {
            if p == 0.0 {
                if q < 0.0 {
                    return false;
                }
            } else {
                let r = q / p;
                if p < 0.0 {
                    t0 = t0.max(r);
                } else {
                    t1 = t1.min(r);
                }
                if t0 > t1 {
                    return false;
                }
            }
        }
        true
    }
}

/// Closed circular sector centred at the origin, spanning `[start, start + width]`
/// counter-clockwise, with radius `radius`. `width` must be below π so the
/// sector stays convex.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Sector {
    pub start: f64,
    pub width: f64,
    pub radius: f64,
}

impl Sector {
    fn contains_angle(&self, theta: f64) -> bool {
        let rel = normalize_angle(theta - self.start);
        rel <= self.width + CONTACT_EPS || rel >= TAU - CONTACT_EPS
    }

    fn edges(&self) -> [Segment; 2] {
        [
            Segment::new(Vec2::ZERO, Vec2::from_angle(self.start) * self.radius),
            Segment::new(
                Vec2::ZERO,
                Vec2::from_angle(self.start + self.width) * self.radius,
            ),
        ]
    }

    pub fn contains(&self, p: Vec2) -> bool {
        let r = p.norm();
        if r <= CONTACT_EPS {
            return true;
        }
        r <= self.radius + CONTACT_EPS && self.contains_angle(p.angle())
    }

    /// Distance from `p` to the closed sector.
    pub fn distance_to_point(&self, p: Vec2) -> f64 {
        if self.contains(p) {
            return 0.0;
        }
        let [e0, e1] = self.edges();
        let mut best = e0.distance_to_point(p).min(e1.distance_to_point(p));
        if self.contains_angle(p.angle()) {
            best = best.min((p.norm() - self.radius).abs());
        }
        best
    }

    pub fn intersects_disc(&self, disc: &Disc) -> bool {
        self.distance_to_point(disc.center) <= disc.radius + CONTACT_EPS
    }

    pub fn intersects_segment(&self, seg: &Segment) -> bool {
        if self.contains(seg.a) || self.contains(seg.b) {
            return true;
        }
        if self.edges().iter().any(|e| e.intersects(seg)) {
            return true;
        }
        // remaining case: the segment cuts through the arc only
        let d = seg.b - seg.a;
        let a = d.norm_sq();
        if a == 0.0 {
            return false;
        }
        let b = 2.0 * seg.a.dot(d);
        let c = seg.a.norm_sq() - self.radius * self.radius;
        let disc = b * b - 4.0 * a * c;
        if disc < 0.0 {
            return false;
        }
        let sq = disc.sqrt();
        [(-b - sq) / (2.0 * a), (-b + sq) / (2.0 * a)]
            .into_iter()
            .filter(|t| (-CONTACT_EPS..=1.0 + CONTACT_EPS).contains(t))
            .any(|t| self.contains_angle((seg.a + d * t).angle()))
    }
}
