//! Forward transient rendering and the interior and boundary gradient
//! estimators.
//!
//! Work is split over image rows; every pixel owns an independent random
//! stream, so results depend only on the seed and (through summation
//! order) on the worker count.

pub(crate) mod bdpt;
pub mod boundary;
pub mod histogram;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::dual::{Dual, MAX_CHANNELS};
use crate::geometry::SurfacePoint;
use crate::scene::RenderScene;
use crate::temporal::CorrelatedTimeKernel;
use crate::transport::{contribution, correlated_importance, eval_path, DerivativeTerms};

pub use boundary::{sample_boundary_segment, sample_sphere, BoundaryMiss, BoundarySegmentSample};
pub use histogram::TransientHistogram;
pub use crate::temporal::FrameSpec;

use histogram::Accumulator;

/// Random stream tags.
const STREAM_PATHS: u64 = 0x5041_5448;
const STREAM_BOUNDARY: u64 = 0x4544_4745;

/// Worker count: `TGRD_THREADS` if set, otherwise the available parallelism.
pub fn default_threads() -> usize {
    if let Ok(v) = std::env::var("TGRD_THREADS") {
        if let Ok(n) = v.trim().parse::<usize>() {
            if n > 0 {
                return n;
            }
        }
        log::warn!("ignoring invalid TGRD_THREADS={v:?}");
    }
    std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct RenderOptions {
    pub threads: usize,
    pub terms: DerivativeTerms,
}

impl Default for RenderOptions {
    fn default() -> Self {
        RenderOptions { threads: default_threads(), terms: DerivativeTerms::default() }
    }
}

impl RenderOptions {
    pub fn single_threaded() -> Self {
        RenderOptions { threads: 1, terms: DerivativeTerms::default() }
    }
}

pub(crate) fn pixel_rng(seed: u64, stream: u64, pixel: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ stream.wrapping_mul(0x9E37_79B9_7F4A_7C15));
    rng.set_stream(pixel as u64);
    rng
}

/// Runs `work(row, acc)` for every image row on `threads` workers and merges
/// the per-worker accumulators in worker order.
fn run_rows<F>(scene: &RenderScene, threads: usize, channels: usize, intensity: bool, work: F) -> Accumulator
where
    F: Fn(usize, &mut Accumulator) + Sync,
{
    let f = &scene.frames;
    let bins = f.width * f.height * f.count;
    let rows = f.height;
    let workers = threads.clamp(1, rows.max(1));
    if workers == 1 {
        let mut acc = Accumulator::new(bins, channels, intensity);
        for r in 0..rows {
            work(r, &mut acc);
        }
        return acc;
    }
    let work = &work;
    let parts: Vec<Accumulator> = std::thread::scope(|s| {
        let handles: Vec<_> = (0..workers)
            .map(|w| {
                s.spawn(move || {
                    let mut acc = Accumulator::new(bins, channels, intensity);
                    let mut r = w;
                    while r < rows {
                        work(r, &mut acc);
                        r += workers;
                    }
                    acc
                })
            })
            .collect();
        handles.into_iter().map(|h| h.join().expect("render worker panicked")).collect()
    });
    let mut it = parts.into_iter();
    let mut acc = it.next().expect("at least one worker");
    for p in it {
        acc.merge(&p);
    }
    acc
}

#[inline]
fn bin_index(f: &FrameSpec, pixel: (usize, usize), frame: usize) -> usize {
    (pixel.0 * f.width + pixel.1) * f.count + frame
}

fn kernel_of<'a>(scene: &'a RenderScene, path: &[SurfacePoint]) -> Option<&'a CorrelatedTimeKernel> {
    scene.kernels[path.last()?.mesh].as_ref()
}

/// Unbiased transient radiance estimate; gradient planes are left at zero.
pub fn render_forward(scene: &RenderScene, spp: usize, seed: u64, opts: &RenderOptions) -> TransientHistogram {
    let f = scene.frames;
    if scene.emitters.is_empty() {
        log::warn!("scene has no emitters; the render is black");
    }
    let acc = run_rows(scene, opts.threads, 0, true, |row, acc| {
        for col in 0..f.width {
            let pixel = (row, col);
            let mut rng = pixel_rng(seed, STREAM_PATHS, row * f.width + col);
            for _ in 0..spp {
                bdpt::sample_paths(scene, pixel, &mut rng, |path, inv_pdf| {
                    let Some(kernel) = kernel_of(scene, path) else { return };
                    let Ok(e) = eval_path::<f64>(scene, pixel, path) else { return };
                    let value = e.spatial() * inv_pdf;
                    if value == 0.0 {
                        return;
                    }
                    for l in kernel.bin_range(e.tof, &f) {
                        let (s, _) = kernel.eval(e.tof - f.offset(l));
                        acc.add_value(bin_index(&f, pixel, l), value * s);
                    }
                });
            }
        }
    });
    let mut h = acc.scaled(spp.max(1) as f64).into_histogram(&f, scene.c, &scene.channel_param, scene.num_params);
    h.samples_interior = (spp * f.width * f.height) as u64;
    h
}

fn interior_acc(scene: &RenderScene, spp: usize, seed: u64, opts: &RenderOptions) -> Accumulator {
    let f = scene.frames;
    let channels = scene.num_channels();
    let terms = opts.terms;
    run_rows(scene, opts.threads, channels, true, |row, acc| {
        for col in 0..f.width {
            let pixel = (row, col);
            let mut rng = pixel_rng(seed, STREAM_PATHS, row * f.width + col);
            for _ in 0..spp {
                bdpt::sample_paths(scene, pixel, &mut rng, |path, inv_pdf| {
                    let Some(kernel) = kernel_of(scene, path) else { return };
                    let Ok(e) = eval_path::<Dual>(scene, pixel, path) else { return };
                    let spatial = e.spatial() * inv_pdf;
                    if spatial.v == 0.0 {
                        return;
                    }
                    for l in kernel.bin_range(e.tof.v, &f) {
                        let s = correlated_importance(kernel, &e.tof, f.offset(l));
                        let c = contribution(&spatial, &s, terms);
                        let idx = bin_index(&f, pixel, l);
                        acc.add_value(idx, c.v);
                        acc.add_grad(idx, &c.g);
                    }
                });
            }
        }
    })
    .scaled(spp.max(1) as f64)
}

/// Interior term of the gradient together with the intensity of the same
/// paths.
pub fn estimate_interior(scene: &RenderScene, spp: usize, seed: u64, opts: &RenderOptions) -> TransientHistogram {
    let f = scene.frames;
    let acc = interior_acc(scene, spp, seed, opts);
    let mut h = acc.into_histogram(&f, scene.c, &scene.channel_param, scene.num_params);
    h.samples_interior = (spp * f.width * f.height) as u64;
    h
}

/// Boundary channel planes, or `None` when the term vanishes identically.
fn boundary_acc(scene: &RenderScene, spp: usize, seed: u64, opts: &RenderOptions) -> Option<Accumulator> {
    let f = scene.frames;
    let channels = scene.num_channels();
    let n_total = (spp * f.width * f.height).max(1) as f64;
    if channels == 0 || scene.edges.is_empty() || spp == 0 || scene.max_depth < 2 {
        return None;
    }
    let side = scene.max_depth - 2;
    let eta = scene.eta.v;
    let acc = run_rows(scene, opts.threads, channels, false, |row, acc| {
        for col in 0..f.width {
            let mut rng = pixel_rng(seed, STREAM_BOUNDARY, row * f.width + col);
            for k in 0..spp {
                // Fixed offset per sample: rejected samples leave later ones unchanged.
                rng.set_word_pos((k as u128) << 40);
                let Ok(b) = sample_boundary_segment(scene, &mut rng) else { continue };
                if !boundary::moves(&b, channels) {
                    continue;
                }
                let prefixes = boundary::light_prefixes(scene, &b.x_l, b.x_s.position, side, &mut rng);
                if prefixes.is_empty() {
                    continue;
                }
                let suffixes = boundary::sensor_suffixes(scene, &b.x_s, b.x_l.position, side, &mut rng);
                if suffixes.is_empty() {
                    continue;
                }
                let seg = (b.x_s.position - b.x_l.position).length();
                let g: f64 = crate::transport::geometry_term(b.x_l.position, b.x_l.normal, b.x_s.position, b.x_s.normal);
                let weight = g * b.jacobian / b.pdf;
                for p in &prefixes {
                    let Some(kernel) = scene.kernels[p.emitter_mesh].as_ref() else { continue };
                    for s in &suffixes {
                        if p.segments + s.segments > side {
                            continue;
                        }
                        let value = p.value * s.value * weight;
                        let tof = eta * (p.length + seg + s.length) / scene.c;
                        for l in kernel.bin_range(tof, &f) {
                            let (k, _) = kernel.eval(tof - f.offset(l));
                            let base = value * k;
                            let mut grad = [0.0; MAX_CHANNELS];
                            for c in 0..channels {
                                grad[c] = base * b.v_normal[c];
                            }
                            acc.add_grad(bin_index(&f, s.pixel, l), &grad);
                        }
                    }
                }
            }
        }
    });
    Some(acc.scaled(n_total))
}

/// Boundary term of the gradient; the intensity plane stays zero.
pub fn estimate_boundary(scene: &RenderScene, spp: usize, seed: u64, opts: &RenderOptions) -> TransientHistogram {
    let f = scene.frames;
    let mut h = match boundary_acc(scene, spp, seed, opts) {
        Some(acc) => acc.into_histogram(&f, scene.c, &scene.channel_param, scene.num_params),
        None => TransientHistogram::zeros(&f, scene.c, scene.num_params),
    };
    h.samples_boundary = (spp * f.width * f.height) as u64;
    h
}

/// Intensity plus interior and boundary gradient terms. The two terms are
/// summed per channel before channels are folded into parameters.
pub fn estimate_gradient(
    scene: &RenderScene,
    spp_interior: usize,
    spp_boundary: usize,
    seed: u64,
    opts: &RenderOptions,
) -> TransientHistogram {
    let f = scene.frames;
    let mut acc = interior_acc(scene, spp_interior, seed, opts);
    if let Some(b) = boundary_acc(scene, spp_boundary, seed, opts) {
        acc.merge(&b);
    }
    let mut h = acc.into_histogram(&f, scene.c, &scene.channel_param, scene.num_params);
    h.samples_interior = (spp_interior * f.width * f.height) as u64;
    h.samples_boundary = (spp_boundary * f.width * f.height) as u64;
    h
}

/// Steady-state image (`H × W`, row-major) of the same measurement: every
/// path is weighted by the time integral of its correlated importance per
/// unit exposure, `(∫L)(∫W)/Δt`.
pub fn render_steady(scene: &RenderScene, spp: usize, seed: u64, opts: &RenderOptions) -> Vec<f64> {
    let f = scene.frames;
    let weights: Vec<f64> = scene
        .kernels
        .iter()
        .map(|k| k.as_ref().map_or(0.0, |k| kernel_integral(k) / f.exposure))
        .collect();
    // One bin per pixel.
    let single = FrameSpec { count: 1, ..f };
    let mut flat = scene.clone();
    flat.frames = single;
    let acc = run_rows(&flat, opts.threads, 0, true, |row, acc| {
        for col in 0..f.width {
            let pixel = (row, col);
            let mut rng = pixel_rng(seed, STREAM_PATHS, row * f.width + col);
            for _ in 0..spp {
                bdpt::sample_paths(&flat, pixel, &mut rng, |path, inv_pdf| {
                    let Some(last) = path.last() else { return };
                    let Ok(e) = eval_path::<f64>(&flat, pixel, path) else { return };
                    acc.add_value(row * f.width + col, e.spatial() * inv_pdf * weights[last.mesh]);
                });
            }
        }
    });
    acc.intensity.iter().map(|v| v / spp.max(1) as f64).collect()
}

/// `∫ S(t) dt` of a correlation kernel.
pub fn kernel_integral(k: &CorrelatedTimeKernel) -> f64 {
    match k {
        CorrelatedTimeKernel::Piecewise { segments } => segments
            .iter()
            .map(|s| {
                let w = s.hi - s.lo;
                s.c[0] * w + s.c[1] * w * w / 2.0 + s.c[2] * w.powi(3) / 3.0 + s.c[3] * w.powi(4) / 4.0
            })
            .sum(),
        CorrelatedTimeKernel::Gaussian { weight, .. } => *weight,
        CorrelatedTimeKernel::PolyGaussian { pieces, weight, .. } => {
            weight * pieces.iter().map(|p| {
                let w = p.hi - p.lo;
                p.c[0] * w + p.c[1] * w * w / 2.0
            }).sum::<f64>()
        }
    }
}
