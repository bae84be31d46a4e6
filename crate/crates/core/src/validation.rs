//! Finite-difference gradients and histogram comparison metrics.

use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::estimators::{render_forward, RenderOptions, TransientHistogram};
use crate::scene::{RenderScene, Scene};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FdScheme {
    Forward,
    Central,
}

impl std::str::FromStr for FdScheme {
    type Err = Error;
    fn from_str(s: &str) -> Result<FdScheme> {
        match s {
            "forward" => Ok(FdScheme::Forward),
            "central" => Ok(FdScheme::Central),
            _ => Err(Error::Config(format!("unknown finite-difference scheme '{s}'"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct FdConfig {
    /// Step per parameter; a single value applies to all.
    pub epsilon: Vec<f64>,
    pub scheme: FdScheme,
    pub common_random_numbers: bool,
    pub spp: usize,
}

impl Default for FdConfig {
    fn default() -> Self {
        FdConfig { epsilon: vec![0.01], scheme: FdScheme::Central, common_random_numbers: true, spp: 64 }
    }
}

impl FdConfig {
    pub fn epsilon_for(&self, i: usize) -> f64 {
        match self.epsilon.len() {
            0 => 0.01,
            1 => self.epsilon[0],
            _ => self.epsilon[i],
        }
    }

    pub fn validate(&self, params: usize) -> Result<()> {
        if self.epsilon.len() > 1 && self.epsilon.len() != params {
            return Err(Error::Config(format!("{} epsilons for {params} parameters", self.epsilon.len())));
        }
        if let Some(e) = self.epsilon.iter().find(|e| !(**e > 0.0 && e.is_finite())) {
            return Err(Error::Config(format!("epsilon must be positive, got {e}")));
        }
        Ok(())
    }
}

fn render_at(scene: &Scene, theta: &[f64], name: &str, spp: usize, seed: u64, opts: &RenderOptions) -> Result<TransientHistogram> {
    let named = |e: Error| match e {
        e @ Error::InvalidParameter { .. } => e,
        e => Error::InvalidParameter { name: name.to_string(), reason: e.to_string() },
    };
    let s = scene.with_theta(theta).map_err(named)?;
    let rs = RenderScene::new(&s).map_err(named)?;
    Ok(render_forward(&rs, spp, seed, opts))
}

/// Difference-quotient gradient planes; the intensity plane holds the
/// render at the current parameters.
pub fn fd_gradient(scene: &Scene, cfg: &FdConfig, seed: u64, opts: &RenderOptions) -> Result<TransientHistogram> {
    let d = scene.num_parameters();
    cfg.validate(d)?;
    let theta = scene.theta();
    let names = scene.parameter_names();
    let rs = RenderScene::new(scene)?;
    let center = render_forward(&rs, cfg.spp, seed, opts);
    let mut out = center.clone();
    let step_seed = |k: u64| if cfg.common_random_numbers { seed } else { seed.wrapping_add(k) };
    for i in 0..d {
        let eps = cfg.epsilon_for(i);
        let mut tp = theta.clone();
        tp[i] += eps;
        let plus = render_at(scene, &tp, &names[i], cfg.spp, step_seed(2 * i as u64 + 1), opts)?;
        let (minus, denom) = match cfg.scheme {
            FdScheme::Central => {
                let mut tm = theta.clone();
                tm[i] -= eps;
                (render_at(scene, &tm, &names[i], cfg.spp, step_seed(2 * i as u64 + 2), opts)?, 2.0 * eps)
            }
            FdScheme::Forward if cfg.common_random_numbers => (center.clone(), eps),
            FdScheme::Forward => (render_at(scene, &theta, &names[i], cfg.spp, step_seed(2 * i as u64 + 2), opts)?, eps),
        };
        for ((g, p), m) in out.grads[i].iter_mut().zip(&plus.intensity).zip(&minus.intensity) {
            *g = (p - m) / denom;
        }
        out.nonfinite += plus.nonfinite + minus.nonfinite;
    }
    Ok(out)
}

/// Which plane of a histogram to compare.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Plane {
    Intensity,
    Gradient(usize),
}

fn plane(h: &TransientHistogram, p: Plane) -> Result<&[f64]> {
    match p {
        Plane::Intensity => Ok(&h.intensity),
        Plane::Gradient(i) => h
            .grads
            .get(i)
            .map(|g| g.as_slice())
            .ok_or_else(|| Error::DimensionMismatch(format!("no gradient plane {i}"))),
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FrameMetrics {
    pub frame: usize,
    pub rmse: f64,
    /// `f64::INFINITY` when the frames are identical.
    pub psnr: f64,
    /// Pearson correlation over pixels; NaN when either frame is constant.
    pub correlation: f64,
    pub max_abs_diff: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct DiffHistogram {
    /// `counts.len() + 1` bin edges.
    pub edges: Vec<f64>,
    pub counts: Vec<u64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Metrics {
    pub frames: Vec<FrameMetrics>,
    pub rmse: f64,
    pub psnr: f64,
    pub correlation: f64,
    pub max_abs_diff: f64,
    pub diff_histogram: DiffHistogram,
}

pub fn rmse(a: &[f64], b: &[f64]) -> f64 {
    if a.is_empty() {
        return 0.0;
    }
    (a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>() / a.len() as f64).sqrt()
}

pub fn correlation(a: &[f64], b: &[f64]) -> f64 {
    let n = a.len() as f64;
    let ma = a.iter().sum::<f64>() / n;
    let mb = b.iter().sum::<f64>() / n;
    let (mut sab, mut saa, mut sbb) = (0.0, 0.0, 0.0);
    for (x, y) in a.iter().zip(b) {
        sab += (x - ma) * (y - mb);
        saa += (x - ma) * (x - ma);
        sbb += (y - mb) * (y - mb);
    }
    if saa == 0.0 || sbb == 0.0 {
        return f64::NAN;
    }
    sab / (saa * sbb).sqrt()
}

pub fn psnr(rmse: f64, peak: f64) -> f64 {
    if rmse == 0.0 {
        f64::INFINITY
    } else {
        20.0 * (peak / rmse).log10()
    }
}

fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

const DIFF_BINS: usize = 32;

fn diff_histogram(a: &[f64], b: &[f64]) -> DiffHistogram {
    let m = max_abs_diff(a, b);
    let half = if m > 0.0 { m } else { 1.0 };
    let edges: Vec<f64> = (0..=DIFF_BINS).map(|k| -half + 2.0 * half * k as f64 / DIFF_BINS as f64).collect();
    let mut counts = vec![0u64; DIFF_BINS];
    for (x, y) in a.iter().zip(b) {
        let t = ((x - y + half) / (2.0 * half) * DIFF_BINS as f64).floor();
        counts[(t.max(0.0) as usize).min(DIFF_BINS - 1)] += 1;
    }
    DiffHistogram { edges, counts }
}

/// Compares the intensity planes; `reference` sets the PSNR peak.
pub fn compare(test: &TransientHistogram, reference: &TransientHistogram) -> Result<Metrics> {
    compare_planes(test, reference, Plane::Intensity)
}

pub fn compare_planes(test: &TransientHistogram, reference: &TransientHistogram, which: Plane) -> Result<Metrics> {
    test.check_dims(reference)?;
    let a = plane(test, which)?;
    let b = plane(reference, which)?;
    let peak = b.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let frames = (0..test.frames)
        .map(|l| {
            let fa = test.frame_of(a, l);
            let fb = reference.frame_of(b, l);
            let r = rmse(&fa, &fb);
            FrameMetrics {
                frame: l,
                rmse: r,
                psnr: psnr(r, peak),
                correlation: correlation(&fa, &fb),
                max_abs_diff: max_abs_diff(&fa, &fb),
            }
        })
        .collect();
    let r = rmse(a, b);
    Ok(Metrics {
        frames,
        rmse: r,
        psnr: psnr(r, peak),
        correlation: correlation(a, b),
        max_abs_diff: max_abs_diff(a, b),
        diff_histogram: diff_histogram(a, b),
    })
}

fn num(v: f64) -> String {
    if v.is_nan() {
        "nan".into()
    } else if v.is_infinite() {
        if v > 0.0 { "inf".into() } else { "-inf".into() }
    } else {
        format!("{v:.9e}")
    }
}

impl Metrics {
    /// Per-frame table.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("frame,rmse,psnr,correlation,max_abs_diff\n");
        for f in &self.frames {
            let _ = writeln!(s, "{},{},{},{},{}", f.frame, num(f.rmse), num(f.psnr), num(f.correlation), num(f.max_abs_diff));
        }
        s
    }

    pub fn diff_histogram_csv(&self) -> String {
        let mut s = String::from("lo,hi,count\n");
        let h = &self.diff_histogram;
        for (k, c) in h.counts.iter().enumerate() {
            let _ = writeln!(s, "{},{},{}", num(h.edges[k]), num(h.edges[k + 1]), c);
        }
        s
    }

    pub fn summary(&self) -> String {
        format!(
            "rmse {}\npsnr {}\ncorrelation {}\nmax_abs_diff {}\nframes {}\n",
            num(self.rmse),
            num(self.psnr),
            num(self.correlation),
            num(self.max_abs_diff),
            self.frames.len()
        )
    }
}
