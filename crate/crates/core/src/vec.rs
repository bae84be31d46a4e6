//! Three-component vectors over any [`Real`] scalar.

use std::ops::{Add, AddAssign, Index, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};

use crate::dual::{Dual, Grad, Real, MAX_CHANNELS};

#[derive(Clone, Copy, Debug, PartialEq, Default)]
pub struct V3<T> {
    pub x: T,
    pub y: T,
    pub z: T,
}

pub type Vec3 = V3<f64>;
pub type DVec3 = V3<Dual>;

/// Velocities of a point, one per derivative channel.
pub type Velocity = [Vec3; MAX_CHANNELS];

pub const ZERO_VELOCITY: Velocity = [Vec3 { x: 0.0, y: 0.0, z: 0.0 }; MAX_CHANNELS];

impl From<[f64; 3]> for Vec3 {
    fn from(a: [f64; 3]) -> Self {
        V3::new(a[0], a[1], a[2])
    }
}

impl From<Vec3> for [f64; 3] {
    fn from(v: Vec3) -> Self {
        [v.x, v.y, v.z]
    }
}

impl Serialize for Vec3 {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        [self.x, self.y, self.z].serialize(s)
    }
}

impl<'de> Deserialize<'de> for Vec3 {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        <[f64; 3]>::deserialize(d).map(Vec3::from)
    }
}

impl<T> V3<T> {
    pub const fn new(x: T, y: T, z: T) -> Self {
        V3 { x, y, z }
    }
}

impl<T: Real> V3<T> {
    pub fn splat(v: T) -> Self {
        V3::new(v, v, v)
    }

    pub fn cst(v: Vec3) -> Self {
        V3::new(T::cst(v.x), T::cst(v.y), T::cst(v.z))
    }

    /// Lifts a point with per-channel velocities.
    pub fn lift(p: Vec3, vel: &Velocity) -> Self {
        let mut gx: Grad = [0.0; MAX_CHANNELS];
        let mut gy: Grad = [0.0; MAX_CHANNELS];
        let mut gz: Grad = [0.0; MAX_CHANNELS];
        for (c, v) in vel.iter().enumerate() {
            gx[c] = v.x;
            gy[c] = v.y;
            gz[c] = v.z;
        }
        V3::new(T::lift(p.x, &gx), T::lift(p.y, &gy), T::lift(p.z, &gz))
    }

    pub fn val(&self) -> Vec3 {
        V3::new(self.x.val(), self.y.val(), self.z.val())
    }

    #[inline]
    pub fn dot(self, o: Self) -> T {
        self.x * o.x + self.y * o.y + self.z * o.z
    }

    #[inline]
    pub fn cross(self, o: Self) -> Self {
        V3::new(
            self.y * o.z - self.z * o.y,
            self.z * o.x - self.x * o.z,
            self.x * o.y - self.y * o.x,
        )
    }

    #[inline]
    pub fn length_sq(self) -> T {
        self.dot(self)
    }

    #[inline]
    pub fn length(self) -> T {
        self.length_sq().sqrt()
    }

    #[inline]
    pub fn normalized(self) -> Self {
        let inv = self.length().recip();
        self.scale(inv)
    }

    #[inline]
    pub fn scale(self, s: T) -> Self {
        V3::new(self.x * s, self.y * s, self.z * s)
    }

    #[inline]
    pub fn scale_f(self, s: f64) -> Self {
        V3::new(self.x * s, self.y * s, self.z * s)
    }
}

impl Vec3 {
    pub const ZERO: Vec3 = V3::new(0.0, 0.0, 0.0);

    pub fn max_abs(self) -> f64 {
        self.x.abs().max(self.y.abs()).max(self.z.abs())
    }

    pub fn min_elem(self, o: Vec3) -> Vec3 {
        V3::new(self.x.min(o.x), self.y.min(o.y), self.z.min(o.z))
    }

    pub fn max_elem(self, o: Vec3) -> Vec3 {
        V3::new(self.x.max(o.x), self.y.max(o.y), self.z.max(o.z))
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite() && self.z.is_finite()
    }

    /// Builds an orthonormal tangent frame `(t, b)` around unit `self`.
    pub fn frame(self) -> (Vec3, Vec3) {
        let sign = if self.z >= 0.0 { 1.0 } else { -1.0 };
        let a = -1.0 / (sign + self.z);
        let b = self.x * self.y * a;
        let t = V3::new(1.0 + sign * self.x * self.x * a, sign * b, -sign * self.x);
        let bt = V3::new(b, sign + self.y * self.y * a, -self.y);
        (t, bt)
    }
}

impl DVec3 {
    /// Derivative of every component on `channel`.
    pub fn grad(&self, channel: usize) -> Vec3 {
        V3::new(self.x.g[channel], self.y.g[channel], self.z.g[channel])
    }
}

impl<T: Real> Add for V3<T> {
    type Output = Self;
    #[inline]
    fn add(self, o: Self) -> Self {
        V3::new(self.x + o.x, self.y + o.y, self.z + o.z)
    }
}

impl<T: Real> AddAssign for V3<T> {
    #[inline]
    fn add_assign(&mut self, o: Self) {
        *self = *self + o;
    }
}

impl<T: Real> Sub for V3<T> {
    type Output = Self;
    #[inline]
    fn sub(self, o: Self) -> Self {
        V3::new(self.x - o.x, self.y - o.y, self.z - o.z)
    }
}

impl<T: Real> Neg for V3<T> {
    type Output = Self;
    #[inline]
    fn neg(self) -> Self {
        V3::new(-self.x, -self.y, -self.z)
    }
}

impl<T: Real> Mul<f64> for V3<T> {
    type Output = Self;
    #[inline]
    fn mul(self, s: f64) -> Self {
        self.scale_f(s)
    }
}

impl Index<usize> for Vec3 {
    type Output = f64;
    fn index(&self, i: usize) -> &f64 {
        match i {
            0 => &self.x,
            1 => &self.y,
            _ => &self.z,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn frame_is_orthonormal() {
        for n in [V3::new(0.0, 0.0, 1.0), V3::new(0.0, 0.0, -1.0), V3::new(1.0, 2.0, -0.5).normalized()] {
            let (t, b) = n.frame();
            assert!(t.dot(b).abs() < 1e-12);
            assert!(t.dot(n).abs() < 1e-12);
            assert!((t.length() - 1.0).abs() < 1e-12);
            assert!((b.length() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn lifted_normalization_derivative() {
        let mut vel = ZERO_VELOCITY;
        vel[0] = V3::new(0.0, 0.0, 1.0);
        let p = DVec3::lift(V3::new(3.0, 0.0, 4.0), &vel);
        let len = p.length();
        assert_eq!(len.v, 5.0);
        assert!((len.g[0] - 0.8).abs() < 1e-15);
    }
}
