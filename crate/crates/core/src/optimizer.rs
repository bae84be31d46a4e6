//! ADAM over scene parameters with a transient-histogram RMSE loss.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::estimators::{estimate_gradient, RenderOptions, TransientHistogram};
use crate::scene::{RenderScene, Scene};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Loss {
    #[default]
    Rmse,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OptimizeConfig {
    pub learning_rate: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
    pub iterations: usize,
    pub spp_interior: usize,
    pub spp_boundary: usize,
    /// Box constraints per parameter; falls back to the scene's bounds.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub bounds: Option<Vec<[f64; 2]>>,
    /// Target histogram file, relative to the config file.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub target: Option<PathBuf>,
    pub loss: Loss,
    pub seed: u64,
    /// Reuse `seed` every iteration instead of `seed + iteration`.
    pub fixed_seed: bool,
    /// Known parameter values, for residuals.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ground_truth: Option<Vec<f64>>,
}

impl Default for OptimizeConfig {
    fn default() -> Self {
        OptimizeConfig {
            learning_rate: 0.07,
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
            iterations: 60,
            spp_interior: 16,
            spp_boundary: 32,
            bounds: None,
            target: None,
            loss: Loss::Rmse,
            seed: 0,
            fixed_seed: false,
            ground_truth: None,
        }
    }
}

impl OptimizeConfig {
    pub fn validate(&self, params: usize) -> Result<()> {
        let bad = |m: String| Err(Error::Config(m));
        if !(self.learning_rate >= 0.0 && self.learning_rate.is_finite()) {
            return bad(format!("learning_rate must be non-negative, got {}", self.learning_rate));
        }
        if self.iterations == 0 {
            return bad("iterations must be at least 1".into());
        }
        if !(0.0..1.0).contains(&self.beta1) || !(0.0..1.0).contains(&self.beta2) || !(self.epsilon > 0.0) {
            return bad("invalid ADAM constants".into());
        }
        if let Some(b) = &self.bounds {
            if b.len() != params {
                return bad(format!("{} bounds for {params} parameters", b.len()));
            }
            if b.iter().any(|[lo, hi]| !(lo <= hi)) {
                return bad("empty bounds".into());
            }
        }
        if let Some(g) = &self.ground_truth {
            if g.len() != params {
                return bad(format!("{} ground-truth values for {params} parameters", g.len()));
            }
        }
        Ok(())
    }
}

/// RMSE over all bins and its parameter gradient
/// `Σ (I - T) dI/dθ / (N · RMSE)`.
pub fn loss_and_gradient(h: &TransientHistogram, target: &TransientHistogram) -> Result<(f64, Vec<f64>)> {
    h.check_dims(target)?;
    let n = h.len().max(1) as f64;
    let mut sq = 0.0;
    for (a, b) in h.intensity.iter().zip(&target.intensity) {
        sq += (a - b) * (a - b);
    }
    let loss = (sq / n).sqrt();
    if loss == 0.0 {
        return Ok((0.0, vec![0.0; h.num_params()]));
    }
    let grad = h
        .grads
        .iter()
        .map(|g| {
            let mut s = 0.0;
            for ((a, b), d) in h.intensity.iter().zip(&target.intensity).zip(g) {
                s += (a - b) * d;
            }
            s / (n * loss)
        })
        .collect();
    Ok((loss, grad))
}

/// Renders at the scene's parameters and evaluates the loss.
pub fn render_loss_and_gradient(
    scene: &Scene,
    target: &TransientHistogram,
    spp_interior: usize,
    spp_boundary: usize,
    seed: u64,
    opts: &RenderOptions,
) -> Result<(f64, Vec<f64>)> {
    let rs = RenderScene::new(scene)?;
    let h = estimate_gradient(&rs, spp_interior, spp_boundary, seed, opts);
    loss_and_gradient(&h, target)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TraceRecord {
    pub iteration: usize,
    pub theta: Vec<f64>,
    pub loss: f64,
    pub gradient: Vec<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub residual: Option<Vec<f64>>,
    pub seconds: f64,
}

/// Optimizer state after some iterations; enough to resume.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Checkpoint {
    pub theta: Vec<f64>,
    pub m: Vec<f64>,
    pub v: Vec<f64>,
    pub trace: Vec<TraceRecord>,
}

impl Checkpoint {
    pub fn load(path: &Path) -> Result<Checkpoint> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        serde_json::from_str(&text).map_err(|e| Error::Parse { path: path.into(), line: e.line(), message: e.to_string() })
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let text = serde_json::to_string_pretty(self).map_err(|e| Error::Config(e.to_string()))?;
        let tmp = path.with_extension("tmp");
        fs::write(&tmp, text).map_err(|e| Error::io(&tmp, e))?;
        fs::rename(&tmp, path).map_err(|e| Error::io(path, e))
    }

    pub fn next_iteration(&self) -> usize {
        self.trace.last().map_or(0, |r| r.iteration + 1)
    }
}

pub fn trace_csv(names: &[String], trace: &[TraceRecord]) -> String {
    let mut s = String::from("iteration");
    for n in names {
        let _ = write!(s, ",{n}");
    }
    s.push_str(",loss");
    for n in names {
        let _ = write!(s, ",residual_{n}");
    }
    s.push_str(",seconds\n");
    for r in trace {
        let _ = write!(s, "{}", r.iteration);
        for t in &r.theta {
            let _ = write!(s, ",{t:e}");
        }
        let _ = write!(s, ",{:e}", r.loss);
        for i in 0..names.len() {
            match &r.residual {
                Some(res) => {
                    let _ = write!(s, ",{:e}", res[i]);
                }
                None => s.push(','),
            }
        }
        let _ = writeln!(s, ",{:.3}", r.seconds);
    }
    s
}

/// Where to persist progress after every iteration.
#[derive(Clone, Debug, Default)]
pub struct Persist {
    pub trace_csv: Option<PathBuf>,
    pub checkpoint: Option<PathBuf>,
}

/// Runs ADAM until `cfg.iterations` iterations have been recorded,
/// continuing from `resume` if given.
pub fn run_adam(
    scene: &Scene,
    target: &TransientHistogram,
    cfg: &OptimizeConfig,
    opts: &RenderOptions,
    resume: Option<Checkpoint>,
    persist: &Persist,
) -> Result<Checkpoint> {
    let d = scene.num_parameters();
    cfg.validate(d)?;
    let bounds: Vec<[f64; 2]> = match &cfg.bounds {
        Some(b) => b.clone(),
        None => scene
            .desc
            .parameters
            .iter()
            .map(|p| p.bounds.unwrap_or([f64::NEG_INFINITY, f64::INFINITY]))
            .collect(),
    };
    let mut state = match resume {
        Some(c) => {
            if c.theta.len() != d || c.m.len() != d || c.v.len() != d {
                return Err(Error::DimensionMismatch(format!("checkpoint has {} parameters, scene has {d}", c.theta.len())));
            }
            c
        }
        None => Checkpoint { theta: scene.theta(), m: vec![0.0; d], v: vec![0.0; d], trace: Vec::new() },
    };
    let names = scene.parameter_names();
    for it in state.next_iteration()..cfg.iterations {
        let start = Instant::now();
        let seed = if cfg.fixed_seed { cfg.seed } else { cfg.seed.wrapping_add(it as u64) };
        let s = scene.with_theta(&state.theta)?;
        let (loss, grad) = render_loss_and_gradient(&s, target, cfg.spp_interior, cfg.spp_boundary, seed, opts)?;
        if !loss.is_finite() || grad.iter().any(|g| !g.is_finite()) {
            return Err(Error::NonFiniteGradient { iteration: it });
        }
        let residual = cfg
            .ground_truth
            .as_ref()
            .map(|g| state.theta.iter().zip(g).map(|(t, g)| t - g).collect());
        state.trace.push(TraceRecord {
            iteration: it,
            theta: state.theta.clone(),
            loss,
            gradient: grad.clone(),
            residual,
            seconds: start.elapsed().as_secs_f64(),
        });
        let k = (it + 1) as i32;
        for i in 0..d {
            let g = grad[i];
            state.m[i] = cfg.beta1 * state.m[i] + (1.0 - cfg.beta1) * g;
            state.v[i] = cfg.beta2 * state.v[i] + (1.0 - cfg.beta2) * g * g;
            let mh = state.m[i] / (1.0 - cfg.beta1.powi(k));
            let vh = state.v[i] / (1.0 - cfg.beta2.powi(k));
            let step = cfg.learning_rate * mh / (vh.sqrt() + cfg.epsilon);
            state.theta[i] = (state.theta[i] - step).clamp(bounds[i][0], bounds[i][1]);
        }
        log::info!("iteration {it}: loss {loss:.6e} theta {:?}", state.theta);
        if let Some(p) = &persist.trace_csv {
            fs::write(p, trace_csv(&names, &state.trace)).map_err(|e| Error::io(p, e))?;
        }
        if let Some(p) = &persist.checkpoint {
            state.save(p)?;
        }
    }
    Ok(state)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::temporal::FrameSpec;

    fn hist(values: &[f64], grads: Vec<Vec<f64>>) -> TransientHistogram {
        let f = FrameSpec { count: 1, exposure: 1.0, start: 0.0, width: values.len(), height: 1 };
        let mut h = TransientHistogram::zeros(&f, 0.3, grads.len());
        h.intensity = values.to_vec();
        h.grads = grads;
        h
    }

    #[test]
    fn loss_gradient_matches_finite_differences() {
        let target = hist(&[1.0, 2.0, 0.5], vec![]);
        let dir = [0.3, -1.0, 2.0];
        let at = |t: f64| hist(&[1.2 + dir[0] * t, 1.7 + dir[1] * t, 0.9 + dir[2] * t], vec![dir.to_vec()]);
        let (l, g) = loss_and_gradient(&at(0.0), &target).unwrap();
        let h = 1e-6;
        let fd = (loss_and_gradient(&at(h), &target).unwrap().0 - loss_and_gradient(&at(-h), &target).unwrap().0) / (2.0 * h);
        assert!(l > 0.0);
        assert!((g[0] - fd).abs() < 1e-8, "{} vs {fd}", g[0]);
    }

    #[test]
    fn converged_and_empty_cases() {
        let t = hist(&[1.0, 2.0], vec![vec![1.0, 1.0]]);
        assert_eq!(loss_and_gradient(&t, &t).unwrap(), (0.0, vec![0.0]));
        let t0 = hist(&[1.0, 2.0], vec![]);
        let h0 = hist(&[1.0, 3.0], vec![]);
        let (l, g) = loss_and_gradient(&h0, &t0).unwrap();
        assert!(l > 0.0 && g.is_empty());
    }

    #[test]
    fn config_validation() {
        assert!(OptimizeConfig::default().validate(1).is_ok());
        assert!(OptimizeConfig { iterations: 0, ..Default::default() }.validate(1).is_err());
        assert!(OptimizeConfig { learning_rate: -1.0, ..Default::default() }.validate(1).is_err());
        assert!(OptimizeConfig { bounds: Some(vec![[0.0, 1.0]]), ..Default::default() }.validate(2).is_err());
    }

    #[test]
    fn trace_csv_layout() {
        let r = TraceRecord { iteration: 0, theta: vec![0.5], loss: 1.0, gradient: vec![0.1], residual: Some(vec![0.25]), seconds: 0.0 };
        let csv = trace_csv(&["a".to_string()], &[r]);
        let mut lines = csv.lines();
        assert_eq!(lines.next().unwrap(), "iteration,a,loss,residual_a,seconds");
        assert!(lines.next().unwrap().starts_with("0,5e-1,1e0,2.5e-1,"));
    }
}
