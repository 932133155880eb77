use std::f64::consts::TAU;
use std::ops::{Add, Mul, Sub};

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Vec2 {
    pub x: f64,
    pub y: f64,
}

impl Vec2 {
    pub const fn new(x: f64, y: f64) -> Self {
        Vec2 { x, y }
    }

    pub fn norm(self) -> f64 {
        self.x.hypot(self.y)
    }

    pub fn norm2(self) -> f64 {
        self.x * self.x + self.y * self.y
    }

    pub fn dot(self, o: Vec2) -> f64 {
        self.x * o.x + self.y * o.y
    }

    pub fn dist(self, o: Vec2) -> f64 {
        (self - o).norm()
    }
}

impl Add for Vec2 {
    type Output = Vec2;
    fn add(self, o: Vec2) -> Vec2 {
        Vec2::new(self.x + o.x, self.y + o.y)
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

/// Wraps an angle into `[0, 2π)`.
pub fn wrap_angle(theta: f64) -> f64 {
    let t = theta.rem_euclid(TAU);
    // rem_euclid can round up to exactly TAU for tiny negative inputs
    if t >= TAU {
        0.0
    } else {
        t
    }
}

/// Absolute angular difference folded into `[0, π]`.
pub fn circular_diff(a: f64, b: f64) -> f64 {
    let d = wrap_angle(a - b);
    d.min(TAU - d)
}

/// Planar rigid motion with optional reflection:
/// `p ↦ R(theta) · M · p + t`, where `M` negates x when `mirror` is set.
///
/// Angles are measured in image coordinates (y down), so a positive
/// `theta` turns clockwise on screen.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RigidTransform2D {
    pub mirror: bool,
    pub theta: f64,
    pub tx: f64,
    pub ty: f64,
}

impl Default for RigidTransform2D {
    fn default() -> Self {
        Self::identity()
    }
}

impl RigidTransform2D {
    pub fn new(mirror: bool, theta: f64, tx: f64, ty: f64) -> Self {
        RigidTransform2D {
            mirror,
            theta: wrap_angle(theta),
            tx,
            ty,
        }
    }

    pub fn identity() -> Self {
        RigidTransform2D::new(false, 0.0, 0.0, 0.0)
    }

    pub fn translation(&self) -> Vec2 {
        Vec2::new(self.tx, self.ty)
    }

    /// Applies only the linear part (reflection then rotation).
    pub fn apply_linear(&self, p: Vec2) -> Vec2 {
        let x = if self.mirror { -p.x } else { p.x };
        let (s, c) = self.theta.sin_cos();
        Vec2::new(c * x - s * p.y, s * x + c * p.y)
    }

    pub fn apply(&self, p: Vec2) -> Vec2 {
        self.apply_linear(p) + self.translation()
    }

    /// Maps a direction angle through the linear part.
    pub fn apply_angle(&self, phi: f64) -> f64 {
        let phi = if self.mirror { std::f64::consts::PI - phi } else { phi };
        wrap_angle(phi + self.theta)
    }

    pub fn inverse(&self) -> Self {
        // (R M)^-1 = M R(-θ); with a reflection M R(-θ) = R(θ) M.
        let theta = if self.mirror { self.theta } else { -self.theta };
        let lin = RigidTransform2D::new(self.mirror, theta, 0.0, 0.0);
        let t = lin.apply_linear(self.translation()) * -1.0;
        RigidTransform2D::new(self.mirror, theta, t.x, t.y)
    }

    /// `self ∘ other`: apply `other` first.
    pub fn compose(&self, other: &Self) -> Self {
        let theta = if self.mirror {
            self.theta - other.theta
        } else {
            self.theta + other.theta
        };
        let t = self.apply(other.translation());
        RigidTransform2D::new(self.mirror ^ other.mirror, theta, t.x, t.y)
    }

    /// Transform taking `p ↦ R M (p - pivot) + target`.
    pub fn about(mirror: bool, theta: f64, pivot: Vec2, target: Vec2) -> Self {
        let lin = RigidTransform2D::new(mirror, theta, 0.0, 0.0);
        let t = target - lin.apply_linear(pivot);
        RigidTransform2D::new(mirror, theta, t.x, t.y)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn close(a: Vec2, b: Vec2) -> bool {
        a.dist(b) < 1e-9
    }

    proptest! {
        #[test]
        fn inverse_roundtrip(m: bool, th in -10.0..10.0f64, tx in -100.0..100.0f64, ty in -100.0..100.0f64,
                             px in -50.0..50.0f64, py in -50.0..50.0f64) {
            let t = RigidTransform2D::new(m, th, tx, ty);
            let p = Vec2::new(px, py);
            prop_assert!(close(t.inverse().apply(t.apply(p)), p));
            prop_assert!(close(t.apply(t.inverse().apply(p)), p));
        }

        #[test]
        fn composition_matches_sequential_application(
            m1: bool, a1 in 0.0..7.0f64, x1 in -20.0..20.0f64, y1 in -20.0..20.0f64,
            m2: bool, a2 in 0.0..7.0f64, x2 in -20.0..20.0f64, y2 in -20.0..20.0f64,
            m3: bool, a3 in 0.0..7.0f64,
            px in -30.0..30.0f64, py in -30.0..30.0f64)
        {
            let a = RigidTransform2D::new(m1, a1, x1, y1);
            let b = RigidTransform2D::new(m2, a2, x2, y2);
            let c = RigidTransform2D::new(m3, a3, 1.0, -2.0);
            let p = Vec2::new(px, py);
            prop_assert!(close(a.compose(&b).apply(p), a.apply(b.apply(p))));
            prop_assert!(close(a.compose(&b).compose(&c).apply(p), a.compose(&b.compose(&c)).apply(p)));
        }

        #[test]
        fn angle_map_agrees_with_vector_map(m: bool, th in 0.0..7.0f64, phi in 0.0..7.0f64) {
            let t = RigidTransform2D::new(m, th, 3.0, 4.0);
            let v = t.apply_linear(Vec2::new(phi.cos(), phi.sin()));
            prop_assert!(circular_diff(v.y.atan2(v.x), t.apply_angle(phi)) < 1e-9);
        }
    }

    #[test]
    fn circular_diff_wraps_seam() {
        assert!((circular_diff(TAU - 0.1, 0.0) - 0.1).abs() < 1e-12);
        assert!((circular_diff(0.0, std::f64::consts::PI) - std::f64::consts::PI).abs() < 1e-12);
    }
}
