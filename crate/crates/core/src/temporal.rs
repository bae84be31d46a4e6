//! Temporal emission and sensor profiles and their cross-correlation.
//!
//! A path with time of flight `tof` contributes to frame `l` with weight
//! `S(tof - (t0 + l·Δt))`, where `S(t) = ∫ L(t') W(t' + t) dt'` correlates the
//! emitter profile `L` with the sensor response `W`. All supported profile
//! pairs have closed-form correlations: piecewise polynomials (up to cubic)
//! for box/triangle pairs, a Gaussian for Gaussian pairs, and erf sums for
//! polynomial/Gaussian pairs.

use std::ops::Range;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Speed of light in metres per nanosecond.
pub const SPEED_OF_LIGHT: f64 = 0.299792458;

/// Gaussian tails are cut at this many standard deviations.
const GAUSS_CUTOFF: f64 = 10.0;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum TemporalProfile {
    Delta { t0: f64 },
    Box { t_start: f64, t_end: f64, amplitude: f64 },
    Triangle { center: f64, half_width: f64, peak: f64 },
    /// `amplitude` scales a unit-area normal density.
    Gaussian { mean: f64, sigma: f64, amplitude: f64 },
}

impl TemporalProfile {
    pub fn validate(&self) -> Result<()> {
        let ok = match *self {
            TemporalProfile::Delta { t0 } => t0.is_finite(),
            TemporalProfile::Box { t_start, t_end, amplitude } => {
                t_start < t_end && t_start.is_finite() && t_end.is_finite() && amplitude.is_finite()
            }
            TemporalProfile::Triangle { center, half_width, peak } => {
                half_width > 0.0 && center.is_finite() && half_width.is_finite() && peak.is_finite()
            }
            TemporalProfile::Gaussian { mean, sigma, amplitude } => {
                sigma > 0.0 && mean.is_finite() && sigma.is_finite() && amplitude.is_finite()
            }
        };
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidProfile(format!("{self:?}")))
        }
    }

    /// Pointwise value; a delta has no pointwise value and returns 0.
    pub fn eval(&self, t: f64) -> f64 {
        match *self {
            TemporalProfile::Delta { .. } => 0.0,
            TemporalProfile::Gaussian { mean, sigma, amplitude } => amplitude * normal_pdf(t, mean, sigma),
            _ => eval_segments(&self.segments(), t).0,
        }
    }

    pub fn integral(&self) -> f64 {
        match *self {
            TemporalProfile::Delta { .. } => 1.0,
            TemporalProfile::Box { t_start, t_end, amplitude } => amplitude * (t_end - t_start),
            TemporalProfile::Triangle { half_width, peak, .. } => peak * half_width,
            TemporalProfile::Gaussian { amplitude, .. } => amplitude,
        }
    }

    /// Piecewise-polynomial form of box and triangle profiles.
    fn segments(&self) -> Vec<Segment> {
        match *self {
            TemporalProfile::Box { t_start, t_end, amplitude } => {
                vec![Segment { lo: t_start, hi: t_end, c: [amplitude, 0.0, 0.0, 0.0] }]
            }
            TemporalProfile::Triangle { center, half_width, peak } => {
                let slope = peak / half_width;
                vec![
                    Segment { lo: center - half_width, hi: center, c: [0.0, slope, 0.0, 0.0] },
                    Segment { lo: center, hi: center + half_width, c: [peak, -slope, 0.0, 0.0] },
                ]
            }
            _ => Vec::new(),
        }
    }
}

/// Polynomial piece in local coordinates: `Σ c[k] (t - lo)^k` on `[lo, hi)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Segment {
    pub lo: f64,
    pub hi: f64,
    pub c: [f64; 4],
}

impl Segment {
    #[inline]
    fn eval(&self, t: f64) -> (f64, f64) {
        let u = t - self.lo;
        let c = &self.c;
        let v = c[0] + u * (c[1] + u * (c[2] + u * c[3]));
        let d = c[1] + u * (2.0 * c[2] + u * 3.0 * c[3]);
        (v, d)
    }
}

/// Cross-correlation of an emitter and a sensor profile.
#[derive(Clone, Debug, PartialEq)]
pub enum CorrelatedTimeKernel {
    Piecewise {
        segments: Vec<Segment>,
    },
    /// `weight · N(t; mean, sigma)`.
    Gaussian {
        mean: f64,
        sigma: f64,
        weight: f64,
    },
    /// `weight · ∫ P(x) N(x; mean + dir·t, sigma) dx` for a piecewise-linear `P`.
    PolyGaussian {
        pieces: Vec<Segment>,
        mean: f64,
        sigma: f64,
        weight: f64,
        dir: f64,
    },
}

/// Frame layout of a transient histogram.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FrameSpec {
    pub count: usize,
    /// Frame exposure Δt in nanoseconds.
    pub exposure: f64,
    /// Start time t0 of frame 0 in nanoseconds.
    pub start: f64,
    pub width: usize,
    pub height: usize,
}

impl FrameSpec {
    pub fn validate(&self) -> Result<()> {
        if self.count == 0 || !(self.exposure > 0.0) || self.width == 0 || self.height == 0 || !self.start.is_finite() {
            return Err(Error::InvalidScene(format!("invalid frame spec {self:?}")));
        }
        Ok(())
    }

    /// Sensor window offset of frame `l`.
    #[inline]
    pub fn offset(&self, l: usize) -> f64 {
        self.start + l as f64 * self.exposure
    }
}

pub fn correlate(emitter: &TemporalProfile, sensor: &TemporalProfile) -> Result<CorrelatedTimeKernel> {
    use TemporalProfile as P;
    emitter.validate()?;
    sensor.validate()?;
    Ok(match (*emitter, *sensor) {
        (_, P::Delta { .. }) => return Err(Error::SensorDelta),
        (P::Delta { t0 }, P::Gaussian { mean, sigma, amplitude }) => {
            CorrelatedTimeKernel::Gaussian { mean: mean - t0, sigma, weight: amplitude }
        }
        (P::Delta { t0 }, w) => CorrelatedTimeKernel::Piecewise {
            segments: w.segments().into_iter().map(|s| Segment { lo: s.lo - t0, hi: s.hi - t0, c: s.c }).collect(),
        },
        (P::Gaussian { mean: m1, sigma: s1, amplitude: a1 }, P::Gaussian { mean: m2, sigma: s2, amplitude: a2 }) => {
            CorrelatedTimeKernel::Gaussian { mean: m2 - m1, sigma: s1.hypot(s2), weight: a1 * a2 }
        }
        (P::Gaussian { mean, sigma, amplitude }, w) => CorrelatedTimeKernel::PolyGaussian {
            pieces: w.segments(),
            mean,
            sigma,
            weight: amplitude,
            dir: 1.0,
        },
        (l, P::Gaussian { mean, sigma, amplitude }) => CorrelatedTimeKernel::PolyGaussian {
            pieces: l.segments(),
            mean,
            sigma,
            weight: amplitude,
            dir: -1.0,
        },
        (l, w) => CorrelatedTimeKernel::Piecewise { segments: correlate_piecewise(&l.segments(), &w.segments()) },
    })
}

/// Exact correlation of two piecewise polynomials.
fn correlate_piecewise(l: &[Segment], w: &[Segment]) -> Vec<Segment> {
    let mut breaks: Vec<f64> = Vec::new();
    for p in l {
        for q in w {
            breaks.extend_from_slice(&[q.lo - p.hi, q.lo - p.lo, q.hi - p.hi, q.hi - p.lo]);
        }
    }
    breaks.sort_by(f64::total_cmp);
    breaks.dedup();
    let mut out = Vec::new();
    for win in breaks.windows(2) {
        let (t1, t2) = (win[0], win[1]);
        if !(t2 > t1) {
            continue;
        }
        let mid = 0.5 * (t1 + t2);
        let mut acc = [0.0; 4];
        let mut any = false;
        for p in l {
            for q in w {
                if let Some(poly) = pair_on_interval(p, q, t1, mid) {
                    any = true;
                    for k in 0..4 {
                        acc[k] += poly[k];
                    }
                }
            }
        }
        if any {
            out.push(Segment { lo: t1, hi: t2, c: acc });
        }
    }
    out
}

/// `∫ p(t') q(t' + t) dt'` as a polynomial in `u = t - t1`, valid on the
/// interval of the pair's breakpoints containing `mid`.
fn pair_on_interval(p: &Segment, q: &Segment, t1: f64, mid: f64) -> Option<[f64; 4]> {
    let (a, b, c, d) = (p.lo, p.hi, q.lo, q.hi);
    let lo_mid = a.max(c - mid);
    let hi_mid = b.min(d - mid);
    if !(hi_mid > lo_mid) {
        return None;
    }
    let wl = b - a;
    let wq = d - c;
    // Local coordinates: t' = a + τ, s = t' + t, σ = s - c = τ + u + β.
    let beta = a + t1 - c;
    // Limits in τ as κ + ς·u.
    let lo = if c - mid > a { (-beta, -1.0) } else { (0.0, 0.0) };
    let hi = if d - mid < b { (wq - beta, -1.0) } else { (wl, 0.0) };

    // q(x + β) as a polynomial in x.
    let qb = taylor_shift(&q.c, beta);
    // r(τ, u) = p(τ) · qβ(τ + u), stored as r[i][j] for τ^i u^j.
    let mut r = [[0.0f64; 5]; 5];
    for (k, &qk) in qb.iter().enumerate() {
        if qk == 0.0 {
            continue;
        }
        for m in 0..=k {
            let coeff = qk * binom(k, m);
            // τ^m u^(k-m)
            for (i, &pi) in p.c.iter().enumerate() {
                if pi == 0.0 || i + m > 4 {
                    continue;
                }
                r[i + m][k - m] += pi * coeff;
            }
        }
    }
    // Antiderivative in τ.
    let mut anti = [[0.0f64; 5]; 6];
    for i in 0..5 {
        for j in 0..5 {
            anti[i + 1][j] = r[i][j] / (i + 1) as f64;
        }
    }
    let vhi = eval_anti(&anti, hi);
    let vlo = eval_anti(&anti, lo);
    let mut poly = [0.0; 4];
    for k in 0..8 {
        let v = vhi[k] - vlo[k];
        if k < 4 {
            poly[k] = v;
        } else {
            debug_assert!(v.abs() <= 1e-9 * (1.0 + vhi[k].abs()), "degree overflow");
        }
    }
    Some(poly)
}

/// `Σ anti[i][j] (κ + ς u)^i u^j` as a polynomial in `u`.
fn eval_anti(anti: &[[f64; 5]; 6], (kappa, sigma): (f64, f64)) -> [f64; 8] {
    let mut out = [0.0; 8];
    for (i, row) in anti.iter().enumerate() {
        let pw = linear_power(kappa, sigma, i);
        for (j, &aij) in row.iter().enumerate() {
            if aij == 0.0 {
                continue;
            }
            for (k, &pk) in pw.iter().enumerate() {
                if j + k < 8 {
                    out[j + k] += aij * pk;
                }
            }
        }
    }
    out
}

fn linear_power(kappa: f64, sigma: f64, n: usize) -> Vec<f64> {
    let mut out = vec![0.0; n + 1];
    for k in 0..=n {
        out[k] = binom(n, k) * kappa.powi((n - k) as i32) * sigma.powi(k as i32);
    }
    out
}

fn binom(n: usize, k: usize) -> f64 {
    let mut r = 1.0;
    for i in 0..k {
        r = r * (n - i) as f64 / (i + 1) as f64;
    }
    r
}

/// Coefficients of `p(x + s)` given those of `p(x)`.
fn taylor_shift(c: &[f64; 4], s: f64) -> [f64; 4] {
    let mut out = [0.0; 4];
    for (n, &cn) in c.iter().enumerate() {
        for k in 0..=n {
            out[k] += cn * binom(n, k) * s.powi((n - k) as i32);
        }
    }
    out
}

fn eval_segments(segments: &[Segment], t: f64) -> (f64, f64) {
    // Segments are sorted and contiguous or gapped; evaluation is right-continuous.
    let idx = segments.partition_point(|s| s.hi <= t);
    match segments.get(idx) {
        Some(s) if t >= s.lo => s.eval(t),
        _ => (0.0, 0.0),
    }
}

#[inline]
fn std_normal_pdf(z: f64) -> f64 {
    (-0.5 * z * z).exp() / (2.0 * std::f64::consts::PI).sqrt()
}

#[inline]
fn std_normal_cdf(z: f64) -> f64 {
    0.5 * libm::erfc(-z / std::f64::consts::SQRT_2)
}

#[inline]
fn normal_pdf(t: f64, mean: f64, sigma: f64) -> f64 {
    std_normal_pdf((t - mean) / sigma) / sigma
}

impl CorrelatedTimeKernel {
    /// Closed support interval outside which the kernel is zero.
    pub fn support(&self) -> (f64, f64) {
        match self {
            CorrelatedTimeKernel::Piecewise { segments } => match (segments.first(), segments.last()) {
                (Some(f), Some(l)) => (f.lo, l.hi),
                _ => (0.0, 0.0),
            },
            CorrelatedTimeKernel::Gaussian { mean, sigma, .. } => {
                (mean - GAUSS_CUTOFF * sigma, mean + GAUSS_CUTOFF * sigma)
            }
            CorrelatedTimeKernel::PolyGaussian { pieces, mean, sigma, dir, .. } => {
                let a = pieces.first().map_or(0.0, |p| p.lo) - GAUSS_CUTOFF * sigma;
                let b = pieces.last().map_or(0.0, |p| p.hi) + GAUSS_CUTOFF * sigma;
                // m = mean + dir·t ranges over [a, b].
                if *dir > 0.0 {
                    (a - mean, b - mean)
                } else {
                    (mean - b, mean - a)
                }
            }
        }
    }

    /// Whether the kernel is continuous everywhere.
    pub fn is_continuous(&self) -> bool {
        match self {
            CorrelatedTimeKernel::Piecewise { segments } => {
                let tol = 1e-12;
                let mut prev_hi = f64::NEG_INFINITY;
                let mut prev_val = 0.0;
                for s in segments {
                    let start = s.eval(s.lo).0;
                    let expected = if s.lo == prev_hi { prev_val } else { 0.0 };
                    if (start - expected).abs() > tol * (1.0 + expected.abs()) {
                        return false;
                    }
                    prev_hi = s.hi;
                    prev_val = s.eval(s.hi).0;
                }
                prev_val.abs() <= tol
            }
            _ => true,
        }
    }

    /// Kernel value and `dS/dt`; zero outside the support, one-sided mean at kinks.
    pub fn eval(&self, t: f64) -> (f64, f64) {
        let (lo, hi) = self.support();
        if !(t >= lo && t <= hi) {
            return (0.0, 0.0);
        }
        match self {
            CorrelatedTimeKernel::Piecewise { segments } => {
                let idx = segments.partition_point(|s| s.hi <= t);
                let right = match segments.get(idx) {
                    Some(s) if t >= s.lo => s.eval(t),
                    _ => (0.0, 0.0),
                };
                // Exactly on a join: average the one-sided slopes.
                let on_join = segments.get(idx).is_some_and(|s| s.lo == t) || t == hi;
                if on_join {
                    let left = if idx > 0 && segments[idx - 1].hi == t { segments[idx - 1].eval(t).1 } else { 0.0 };
                    (right.0, 0.5 * (left + right.1))
                } else {
                    right
                }
            }
            CorrelatedTimeKernel::Gaussian { mean, sigma, weight } => {
                let v = weight * normal_pdf(t, *mean, *sigma);
                (v, -v * (t - mean) / (sigma * sigma))
            }
            CorrelatedTimeKernel::PolyGaussian { pieces, mean, sigma, weight, dir } => {
                let m = mean + dir * t;
                let (mut v, mut dv) = (0.0, 0.0);
                for p in pieces {
                    let za = (p.lo - m) / sigma;
                    let zb = (p.hi - m) / sigma;
                    let (pa, pb) = (std_normal_pdf(za), std_normal_pdf(zb));
                    let i0 = std_normal_cdf(zb) - std_normal_cdf(za);
                    let i1 = -sigma * (pb - pa);
                    let i2 = sigma * sigma * i0 - sigma * ((p.hi - m) * pb - (p.lo - m) * pa);
                    // P(x) = e0 + c1 (x - m) on the piece.
                    let c1 = p.c[1];
                    let e0 = p.c[0] + c1 * (m - p.lo);
                    v += e0 * i0 + c1 * i1;
                    dv += (e0 * i1 + c1 * i2) / (sigma * sigma);
                }
                (weight * v, weight * dv * dir)
            }
        }
    }

    /// Frames whose shifted kernel is nonzero at `tof`.
    pub fn bin_range(&self, tof: f64, frames: &FrameSpec) -> Range<usize> {
        kernel_bin_range(self, tof, frames)
    }
}

pub fn eval_kernel(kernel: &CorrelatedTimeKernel, t: f64) -> (f64, f64) {
    kernel.eval(t)
}

/// Contiguous range of frames `l` with `tof - offset(l)` inside the kernel support.
pub fn kernel_bin_range(kernel: &CorrelatedTimeKernel, tof: f64, frames: &FrameSpec) -> Range<usize> {
    let (lo, hi) = kernel.support();
    // u = tof - offset(l) ∈ [lo, hi]  <=>  l ∈ [(tof - hi - t0)/Δt, (tof - lo - t0)/Δt]
    let first = ((tof - hi - frames.start) / frames.exposure).floor() - 1.0;
    let last = ((tof - lo - frames.start) / frames.exposure).ceil() + 1.0;
    if !(last >= 0.0) || !(first < frames.count as f64) {
        return 0..0;
    }
    let first = first.max(0.0) as usize;
    let last = (last as usize).min(frames.count - 1);
    let inside = |l: usize| {
        let u = tof - frames.offset(l);
        u >= lo && u <= hi && kernel.eval(u).0 != 0.0
    };
    let mut a = first;
    while a <= last && !inside(a) {
        a += 1;
    }
    if a > last {
        return 0..0;
    }
    let mut b = a;
    while b < last && inside(b + 1) {
        b += 1;
    }
    a..b + 1
}
