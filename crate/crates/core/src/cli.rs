//! Command-line front end.

use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use crate::error::{Error, Result};
use crate::estimators::{
    default_threads, estimate_boundary, estimate_gradient, estimate_interior, render_forward, RenderOptions,
    TransientHistogram,
};
use crate::io::{frame_png, histogram_csv, load_histogram, load_scene, save_histogram, save_scene};
use crate::optimizer::{run_adam, trace_csv, Checkpoint, OptimizeConfig, Persist};
use crate::scene::{RenderScene, Scene};
use crate::transport::DerivativeTerms;
use crate::validation::{compare_planes, FdConfig, FdScheme, Plane};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_PARSE: i32 = 3;
pub const EXIT_RUNTIME: i32 = 4;

#[derive(Debug, Parser)]
#[command(name = "tgrd", version, about = "Differentiable transient Monte Carlo renderer")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct Common {
    /// Worker threads [default: TGRD_THREADS or available parallelism].
    #[arg(long)]
    pub threads: Option<usize>,
    /// Seed [default: the scene's estimator seed].
    #[arg(long)]
    pub seed: Option<u64>,
}

#[derive(Debug, Args)]
pub struct Exports {
    /// Also write a per-bin CSV.
    #[arg(long)]
    pub csv: Option<PathBuf>,
    /// Also write one PNG per frame and plane into this directory.
    #[arg(long)]
    pub png_dir: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Forward transient render.
    Render {
        scene: PathBuf,
        #[arg(long)]
        spp: Option<usize>,
        #[arg(long)]
        out: PathBuf,
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        exports: Exports,
    },
    /// Intensity plus interior and boundary gradients.
    Grad {
        scene: PathBuf,
        #[arg(long)]
        spp_interior: Option<usize>,
        #[arg(long)]
        spp_boundary: Option<usize>,
        /// Skip the boundary term.
        #[arg(long, conflicts_with = "boundary_only")]
        interior_only: bool,
        /// Only the boundary term.
        #[arg(long)]
        boundary_only: bool,
        /// Drop the temporal (tof) derivative term.
        #[arg(long)]
        no_temporal: bool,
        #[arg(long)]
        out: PathBuf,
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        exports: Exports,
    },
    /// Finite-difference gradients.
    Fd {
        scene: PathBuf,
        #[arg(long, default_value_t = 0.01)]
        epsilon: f64,
        #[arg(long, default_value = "central")]
        scheme: FdScheme,
        #[arg(long)]
        spp: Option<usize>,
        /// Independent seeds for the perturbed renders.
        #[arg(long)]
        no_crn: bool,
        #[arg(long)]
        out: PathBuf,
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        exports: Exports,
    },
    /// Metrics between two histogram files; the second is the reference.
    Compare {
        a: PathBuf,
        b: PathBuf,
        /// `intensity` or a gradient plane index.
        #[arg(long, default_value = "intensity")]
        plane: String,
        /// Per-frame metrics CSV.
        #[arg(long)]
        csv: Option<PathBuf>,
        /// Difference histogram CSV.
        #[arg(long)]
        diff_csv: Option<PathBuf>,
    },
    /// ADAM inverse rendering against a target histogram.
    Optimize {
        scene: PathBuf,
        config: PathBuf,
        /// Continue from the checkpoint.
        #[arg(long)]
        resume: bool,
        /// Trace CSV [default: <config>.trace.csv].
        #[arg(long)]
        trace: Option<PathBuf>,
        /// Checkpoint [default: <config>.checkpoint.json].
        #[arg(long)]
        checkpoint: Option<PathBuf>,
        /// Write the scene with the final parameters.
        #[arg(long)]
        out_scene: Option<PathBuf>,
        #[arg(long)]
        threads: Option<usize>,
    },
    /// Write a built-in scene.
    Preset {
        /// two-planes, occluder, light-translation, mini-nlos, egg, tower, teapot or coffee.
        name: String,
        #[arg(long)]
        out: PathBuf,
        /// Override a parameter value, `NAME=VALUE`.
        #[arg(long = "set", value_parser = parse_assignment)]
        set: Vec<(String, f64)>,
        /// Override the film size, `WxH`.
        #[arg(long, value_parser = parse_size)]
        size: Option<(usize, usize)>,
        /// Override the frame count.
        #[arg(long)]
        frames: Option<usize>,
    },
    /// Convert a histogram file to CSV and PNG frames.
    Export {
        histogram: PathBuf,
        #[command(flatten)]
        exports: Exports,
    },
}

fn parse_assignment(s: &str) -> std::result::Result<(String, f64), String> {
    let (k, v) = s.split_once('=').ok_or_else(|| format!("expected NAME=VALUE, got '{s}'"))?;
    let v: f64 = v.trim().parse().map_err(|_| format!("'{v}' is not a number"))?;
    Ok((k.trim().to_string(), v))
}

fn parse_size(s: &str) -> std::result::Result<(usize, usize), String> {
    let (w, h) = s.split_once('x').ok_or_else(|| format!("expected WxH, got '{s}'"))?;
    let p = |x: &str| x.trim().parse::<usize>().map_err(|_| format!("'{x}' is not a size"));
    Ok((p(w)?, p(h)?))
}

/// Exit code for an error.
pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Parse { .. }
        | Error::InvalidMesh(_)
        | Error::InvalidScene(_)
        | Error::InvalidProfile(_)
        | Error::SensorDelta
        | Error::HistogramFormat(_)
        | Error::Config(_) => EXIT_PARSE,
        _ => EXIT_RUNTIME,
    }
}

/// Error with the file it concerns.
#[derive(Debug)]
pub struct CliError {
    pub context: Option<PathBuf>,
    pub error: Error,
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match (&self.context, &self.error) {
            // These already name their file.
            (_, Error::Parse { .. } | Error::Io { .. }) | (None, _) => write!(f, "{}", self.error),
            (Some(p), e) => write!(f, "{}: {e}", p.display()),
        }
    }
}

trait Context<T> {
    fn within(self, p: &Path) -> std::result::Result<T, CliError>;
}

impl<T> Context<T> for Result<T> {
    fn within(self, p: &Path) -> std::result::Result<T, CliError> {
        self.map_err(|error| CliError { context: Some(p.to_path_buf()), error })
    }
}

fn options(threads: Option<usize>) -> RenderOptions {
    RenderOptions { threads: threads.unwrap_or_else(default_threads).max(1), terms: DerivativeTerms::default() }
}

fn prepare(path: &Path) -> std::result::Result<(Scene, RenderScene), CliError> {
    let scene = load_scene(path).within(path)?;
    let rs = RenderScene::new(&scene).within(path)?;
    Ok((scene, rs))
}

fn write_outputs(h: &TransientHistogram, out: &Path, ex: &Exports) -> std::result::Result<(), CliError> {
    save_histogram(h, out).within(out)?;
    export(h, ex)?;
    if h.nonfinite > 0 {
        log::warn!("{} non-finite contributions were dropped", h.nonfinite);
    }
    Ok(())
}

fn export(h: &TransientHistogram, ex: &Exports) -> std::result::Result<(), CliError> {
    if let Some(p) = &ex.csv {
        fs::write(p, histogram_csv(h)).map_err(|e| Error::io(p, e)).within(p)?;
    }
    if let Some(dir) = &ex.png_dir {
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e)).within(dir)?;
        for l in 0..h.frames {
            frame_png(h, None, l, &dir.join(format!("intensity_{l:04}.png"))).within(dir)?;
            for (i, g) in h.grads.iter().enumerate() {
                if g.iter().any(|&v| v != 0.0) {
                    frame_png(h, Some(i), l, &dir.join(format!("grad{i}_{l:04}.png"))).within(dir)?;
                }
            }
        }
    }
    Ok(())
}

pub fn run(cli: Cli) -> std::result::Result<(), CliError> {
    match cli.command {
        Command::Render { scene, spp, out, common, exports } => {
            let (s, rs) = prepare(&scene)?;
            let est = s.desc.estimator;
            let h = render_forward(&rs, spp.unwrap_or(est.spp_interior), common.seed.unwrap_or(est.seed), &options(common.threads));
            write_outputs(&h, &out, &exports)
        }
        Command::Grad { scene, spp_interior, spp_boundary, interior_only, boundary_only, no_temporal, out, common, exports } => {
            let (s, rs) = prepare(&scene)?;
            let est = s.desc.estimator;
            let mut opts = options(common.threads);
            opts.terms.temporal = !no_temporal;
            let seed = common.seed.unwrap_or(est.seed);
            let si = spp_interior.unwrap_or(est.spp_interior);
            let sb = spp_boundary.unwrap_or(est.spp_boundary);
            let h = if interior_only {
                estimate_interior(&rs, si, seed, &opts)
            } else if boundary_only {
                estimate_boundary(&rs, sb, seed, &opts)
            } else {
                estimate_gradient(&rs, si, sb, seed, &opts)
            };
            write_outputs(&h, &out, &exports)
        }
        Command::Fd { scene, epsilon, scheme, spp, no_crn, out, common, exports } => {
            let s = load_scene(&scene).within(&scene)?;
            let est = s.desc.estimator;
            let cfg = FdConfig {
                epsilon: vec![epsilon],
                scheme,
                common_random_numbers: !no_crn,
                spp: spp.unwrap_or(est.spp_interior),
            };
            let h = crate::validation::fd_gradient(&s, &cfg, common.seed.unwrap_or(est.seed), &options(common.threads))
                .within(&scene)?;
            write_outputs(&h, &out, &exports)
        }
        Command::Compare { a, b, plane, csv, diff_csv } => {
            let ha = load_histogram(&a).within(&a)?;
            let hb = load_histogram(&b).within(&b)?;
            let which = match plane.as_str() {
                "intensity" => Plane::Intensity,
                p => Plane::Gradient(p.parse().map_err(|_| CliError {
                    context: None,
                    error: Error::Config(format!("plane must be 'intensity' or an index, got '{p}'")),
                })?),
            };
            let m = compare_planes(&ha, &hb, which).within(&a)?;
            print!("{}", m.summary());
            if let Some(p) = csv {
                fs::write(&p, m.to_csv()).map_err(|e| Error::io(&p, e)).within(&p)?;
            }
            if let Some(p) = diff_csv {
                fs::write(&p, m.diff_histogram_csv()).map_err(|e| Error::io(&p, e)).within(&p)?;
            }
            Ok(())
        }
        Command::Optimize { scene, config, resume, trace, checkpoint, out_scene, threads } => {
            let s = load_scene(&scene).within(&scene)?;
            let text = fs::read_to_string(&config).map_err(|e| Error::io(&config, e)).within(&config)?;
            let cfg: OptimizeConfig = toml::from_str(&text)
                .map_err(|e| Error::Parse {
                    path: config.clone(),
                    line: e.span().map_or(0, |sp| text[..sp.start].matches('\n').count() + 1),
                    message: e.message().trim().to_string(),
                })
                .within(&config)?;
            let dir = config.parent().unwrap_or(Path::new("."));
            let target_path = dir.join(cfg.target.clone().ok_or_else(|| CliError {
                context: Some(config.clone()),
                error: Error::Config("`target` histogram is required".into()),
            })?);
            let target = load_histogram(&target_path).within(&target_path)?;
            let trace = trace.unwrap_or_else(|| config.with_extension("trace.csv"));
            let ckpt = checkpoint.unwrap_or_else(|| config.with_extension("checkpoint.json"));
            let start = if resume { Some(Checkpoint::load(&ckpt).within(&ckpt)?) } else { None };
            let persist = Persist { trace_csv: Some(trace.clone()), checkpoint: Some(ckpt) };
            let state = run_adam(&s, &target, &cfg, &options(threads), start, &persist).within(&scene)?;
            let names = s.parameter_names();
            if state.trace.is_empty() {
                fs::write(&trace, trace_csv(&names, &state.trace)).map_err(|e| Error::io(&trace, e)).within(&trace)?;
            }
            for (n, v) in names.iter().zip(&state.theta) {
                println!("{n} = {v}");
            }
            if let Some(p) = out_scene {
                let fin = s.with_theta(&state.theta).within(&scene)?;
                save_scene(&fin.desc, &p).within(&p)?;
            }
            Ok(())
        }
        Command::Preset { name, out, set, size, frames } => {
            let mut desc = crate::presets::by_name(&name).ok_or_else(|| CliError {
                context: None,
                error: Error::Config(format!("unknown preset '{name}'; known: {}", crate::presets::NAMES.join(", "))),
            })?;
            for (k, v) in set {
                let p = desc.parameters.iter_mut().find(|p| p.name == k).ok_or_else(|| CliError {
                    context: None,
                    error: Error::Config(format!("preset '{name}' has no parameter '{k}'")),
                })?;
                p.value = v;
            }
            if let Some((w, h)) = size {
                desc.sensor.width = w;
                desc.sensor.height = h;
            }
            if let Some(n) = frames {
                desc.sensor.frames.count = n;
            }
            Scene::new(desc.clone(), Path::new(".")).within(&out)?;
            save_scene(&desc, &out).within(&out)
        }
        Command::Export { histogram, exports } => {
            let h = load_histogram(&histogram).within(&histogram)?;
            export(&h, &exports)
        }
    }
}
