//! Pinhole sensor with a separable tent pixel filter.
//!
//! Pixel `(row, col)` integrates incident radiance over the film weighted by
//! `h(px - col - 0.5) h(py - row - 0.5)`, `h(t) = max(0, 1 - |t|)`. The
//! filter makes the sensor importance continuous in the first path vertex.

use crate::dual::Real;
use crate::error::{Error, Result};
use crate::scene::SensorDesc;
use crate::vec::{V3, Vec3, Velocity};

#[derive(Clone, Debug)]
pub struct Camera {
    pub position: Vec3,
    pub velocity: Velocity,
    pub forward: Vec3,
    pub right: Vec3,
    pub up: Vec3,
    /// Focal length in pixels.
    pub focal: f64,
    pub width: usize,
    pub height: usize,
}

#[inline]
fn tent<T: Real>(t: T) -> T {
    if t.val().abs() >= 1.0 {
        T::zero()
    } else {
        T::one() - t.abs()
    }
}

/// Inverse CDF of the tent density on `[-1, 1]`.
#[inline]
fn sample_tent(u: f64) -> f64 {
    if u < 0.5 {
        (2.0 * u).sqrt() - 1.0
    } else {
        1.0 - (2.0 - 2.0 * u).sqrt()
    }
}

impl Camera {
    pub fn new(s: &SensorDesc, velocity: Velocity) -> Result<Camera> {
        let f = s.look_at - s.position;
        let r = f.cross(s.up);
        if !(f.length() > 0.0) || !(r.length() > 1e-12 * f.length() * s.up.length()) {
            return Err(Error::InvalidScene("sensor look direction is degenerate or parallel to up".into()));
        }
        let forward = f.normalized();
        let right = r.normalized();
        let up = right.cross(forward);
        let focal = 0.5 * s.height as f64 / (0.5 * s.fov_deg.to_radians()).tan();
        Ok(Camera { position: s.position, velocity, forward, right, up, focal, width: s.width, height: s.height })
    }

    /// Film coordinates `(px, py)` of direction `d`, or `None` behind the camera.
    pub fn film(&self, d: Vec3) -> Option<(f64, f64)> {
        let dz = d.dot(self.forward);
        if !(dz > 0.0) {
            return None;
        }
        let px = 0.5 * self.width as f64 + self.focal * d.dot(self.right) / dz;
        let py = 0.5 * self.height as f64 - self.focal * d.dot(self.up) / dz;
        Some((px, py))
    }

    /// Direction through a tent-distributed film point of pixel `(row, col)`
    /// and its solid-angle density.
    pub fn sample_dir(&self, row: usize, col: usize, u1: f64, u2: f64) -> (Vec3, f64) {
        let px = col as f64 + 0.5 + sample_tent(u1);
        let py = row as f64 + 0.5 + sample_tent(u2);
        let x = (px - 0.5 * self.width as f64) / self.focal;
        let y = -(py - 0.5 * self.height as f64) / self.focal;
        let d = (self.forward + self.right * x + self.up * y).normalized();
        (d, self.pdf_dir(d, row, col))
    }

    /// Solid-angle density of `sample_dir` for pixel `(row, col)`.
    pub fn pdf_dir(&self, d: Vec3, row: usize, col: usize) -> f64 {
        let Some((px, py)) = self.film(d) else { return 0.0 };
        let h = tent(px - col as f64 - 0.5) * tent(py - row as f64 - 0.5);
        let cos = d.dot(self.forward) / d.length();
        h * self.focal * self.focal / (cos * cos * cos)
    }

    /// Sensor importance times the pinhole geometry term toward `x1` with
    /// normal `n1`, for pixel `(row, col)`.
    pub fn sensor_factor<T: Real>(&self, o: V3<T>, x1: V3<T>, n1: V3<T>, row: usize, col: usize) -> T {
        let d = x1 - o;
        let dz = d.dot(V3::cst(self.forward));
        if !(dz.val() > 0.0) {
            return T::zero();
        }
        let inv = dz.recip();
        let px = inv * d.dot(V3::cst(self.right)) * self.focal + 0.5 * self.width as f64;
        let py = -(inv * d.dot(V3::cst(self.up)) * self.focal) + 0.5 * self.height as f64;
        let wx = tent(px - (col as f64 + 0.5));
        if wx.val() == 0.0 {
            return T::zero();
        }
        let wy = tent(py - (row as f64 + 0.5));
        if wy.val() == 0.0 {
            return T::zero();
        }
        wx * wy * n1.dot(d).abs() * inv * inv * inv * (self.focal * self.focal)
    }

    /// Pixels whose filter support contains the projection of `x`.
    pub fn footprint(&self, x: Vec3) -> Vec<(usize, usize)> {
        let mut out = Vec::with_capacity(4);
        let Some((px, py)) = self.film(x - self.position) else { return out };
        let c0 = (px - 1.5).ceil();
        let r0 = (py - 1.5).ceil();
        for r in [r0, r0 + 1.0] {
            for c in [c0, c0 + 1.0] {
                if r < 0.0 || c < 0.0 || r >= self.height as f64 || c >= self.width as f64 {
                    continue;
                }
                if (px - c - 0.5).abs() < 1.0 && (py - r - 0.5).abs() < 1.0 {
                    out.push((r as usize, c as usize));
                }
            }
        }
        out
    }
}
