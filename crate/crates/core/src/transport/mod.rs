//! Spatial transport terms and path time of flight, generic over plain
//! values and duals.

pub mod bsdf;

use crate::dual::{Dual, Real};
use crate::error::{Error, Result};
use crate::geometry::{Ray, SurfacePoint};
use crate::scene::RenderScene;
use crate::temporal::CorrelatedTimeKernel;
use crate::vec::{V3, Vec3};

/// Surface vertex lifted with its derivative channels.
#[derive(Clone, Copy, Debug)]
pub struct LVertex<T> {
    pub p: V3<T>,
    pub n: V3<T>,
    /// `J(θ) / J(θ0)` of the barycentric map.
    pub jac: T,
    pub mesh: usize,
}

/// Lifts a material point; position, normal and Jacobian follow the
/// deformation of its face.
pub fn lift_vertex<T: Real>(scene: &RenderScene, sp: &SurfacePoint) -> LVertex<T> {
    let mesh = &scene.meshes[sp.mesh];
    let vel = &scene.velocities[sp.mesh];
    let [a, b, c] = mesh.triangles[sp.face].map(|i| V3::<T>::lift(mesh.vertices[i as usize], &vel[i as usize]));
    let p = a * sp.bary[0] + b * sp.bary[1] + c * sp.bary[2];
    let cr = (b - a).cross(c - a);
    let len = cr.length();
    let inv = len.recip();
    LVertex { p, n: cr.scale(inv), jac: len * (1.0 / len.val()), mesh: sp.mesh }
}

/// `|n_x·ω| |n_y·ω| / |x - y|²`, zero for coincident points.
pub fn geometry_term<T: Real>(xp: V3<T>, xn: V3<T>, yp: V3<T>, yn: V3<T>) -> T {
    let d = yp - xp;
    let d2 = d.length_sq();
    if d2.val() == 0.0 {
        return T::zero();
    }
    xn.dot(d).abs() * yn.dot(d).abs() / (d2 * d2)
}

/// Whether the open segment between two points is unobstructed.
pub fn visible(scene: &RenderScene, a: Vec3, b: Vec3, skip: &[u32]) -> bool {
    let d = b - a;
    let len = d.length();
    if len <= 2.0 * scene.eps {
        return true;
    }
    let ray = Ray { origin: a, dir: d * (1.0 / len) };
    !scene.bvh.occluded(&ray, scene.eps, len - scene.eps, skip)
}

/// Visibility between two surface points; their own faces never occlude.
pub fn visibility(scene: &RenderScene, x: &SurfacePoint, y: &SurfacePoint) -> bool {
    let skip = [scene.global_prim(x.mesh, x.face), scene.global_prim(y.mesh, y.face)];
    visible(scene, x.position, y.position, &skip)
}

/// Visibility between the pinhole and a surface point.
pub fn camera_visibility(scene: &RenderScene, x: &SurfacePoint) -> bool {
    let skip = [scene.global_prim(x.mesh, x.face)];
    visible(scene, scene.camera.position, x.position, &skip)
}

/// `η/c Σ |x_i - x_{i-1}|`; partials include both moving vertices and a
/// varying index of refraction.
pub fn tof_and_derivative<T: Real>(points: &[V3<T>], eta: T, c: f64) -> Result<T> {
    let mut len = T::zero();
    for (i, w) in points.windows(2).enumerate() {
        let l = (w[1] - w[0]).length();
        if l.val() == 0.0 {
            return Err(Error::DegeneratePath(i));
        }
        len += l;
    }
    Ok(len * eta / c)
}

/// Path `x0 (pinhole) -> x1 -> ... -> xn (emitter)` evaluated at the
/// current parameters.
#[derive(Clone, Copy, Debug)]
pub struct PathEval<T> {
    /// Sensor importance times the pinhole geometry term.
    pub sensor: T,
    /// Emitted radiance toward the previous vertex.
    pub emission: f64,
    /// `Π ρ · Π G` over the surface vertices.
    pub throughput: T,
    /// Product of barycentric Jacobian ratios.
    pub jacobian: T,
    pub tof: T,
}

impl<T: Real> PathEval<T> {
    /// Spatial part of the contribution (everything but the temporal kernel).
    pub fn spatial(&self) -> T {
        self.sensor * self.throughput * self.jacobian * self.emission
    }
}

/// `Π_{i=1}^{n-1} ρ(x_i) G(x_i, x_{i+1})` for a camera position and lifted
/// surface vertices.
pub fn throughput_and_derivative<T: Real>(scene: &RenderScene, cam: V3<T>, verts: &[LVertex<T>]) -> T {
    let mut t = T::one();
    for i in 0..verts.len().saturating_sub(1) {
        let prev = if i == 0 { cam } else { verts[i - 1].p };
        let v = &verts[i];
        let next = &verts[i + 1];
        let wi = (prev - v.p).normalized();
        let wo = (next.p - v.p).normalized();
        let rho = scene.materials[v.mesh].eval(v.n, wi, wo);
        if rho.val() == 0.0 {
            return T::zero();
        }
        t = t * rho * geometry_term(v.p, v.n, next.p, next.n);
    }
    t
}

/// Evaluates a camera path ending on an emitter for pixel `(row, col)`.
pub fn eval_path<T: Real>(scene: &RenderScene, pixel: (usize, usize), sps: &[SurfacePoint]) -> Result<PathEval<T>> {
    let cam = &scene.camera;
    let o = V3::<T>::lift(cam.position, &cam.velocity);
    let verts: Vec<LVertex<T>> = sps.iter().map(|sp| lift_vertex(scene, sp)).collect();
    let last = verts.last().ok_or(Error::DegeneratePath(0))?;
    let prev = if verts.len() >= 2 { verts[verts.len() - 2].p } else { o };
    let emission = match scene.radiance[last.mesh] {
        Some(r) if last.n.val().dot(prev.val() - last.p.val()) > 0.0 => r,
        _ => 0.0,
    };
    let sensor = cam.sensor_factor(o, verts[0].p, verts[0].n, pixel.0, pixel.1);
    let throughput = throughput_and_derivative(scene, o, &verts);
    let mut jacobian = T::one();
    for v in &verts {
        jacobian = jacobian * v.jac;
    }
    let mut pts = Vec::with_capacity(verts.len() + 1);
    pts.push(o);
    pts.extend(verts.iter().map(|v| v.p));
    let eta = T::lift(scene.eta.v, &scene.eta.g);
    let tof = tof_and_derivative(&pts, eta, scene.c)?;
    Ok(PathEval { sensor, emission, throughput, jacobian, tof })
}

/// A sampled path with its optical length. Surface vertices run from the
/// emitter `x_0` toward the sensor; the pinhole itself is `sensor`.
#[derive(Clone, Debug)]
pub struct PathState {
    pub vertices: Vec<SurfacePoint>,
    pub sensor: Vec3,
    pub pixel: (usize, usize),
    /// Optical path length `Σ η |x_i - x_{i-1}|`, that is `c · tof`.
    pub d: f64,
    /// `ḋ` per scene parameter.
    pub d_dot: Vec<f64>,
    /// Spatial contribution with its channel partials.
    pub throughput: Dual,
    pub pdf: f64,
}

impl PathState {
    /// Builds the state of a camera path `x_1 … x_n` (camera side first, as
    /// sampled) with sampling density `pdf`.
    pub fn new(scene: &RenderScene, pixel: (usize, usize), camera_path: &[SurfacePoint], pdf: f64) -> Result<PathState> {
        let e = eval_path::<Dual>(scene, pixel, camera_path)?;
        let mut d_dot = vec![0.0; scene.num_params];
        for (ch, &p) in scene.channel_param.iter().enumerate() {
            d_dot[p] += e.tof.g[ch] * scene.c;
        }
        Ok(PathState {
            vertices: camera_path.iter().rev().copied().collect(),
            sensor: scene.camera.position,
            pixel,
            d: e.tof.v * scene.c,
            d_dot,
            throughput: e.spatial(),
            pdf,
        })
    }

    pub fn tof(&self, c: f64) -> f64 {
        self.d / c
    }

    /// Optical length recomputed from the stored vertices.
    pub fn optical_length(&self, eta: f64) -> f64 {
        let mut len = 0.0;
        let mut prev = None;
        for p in self.vertices.iter().map(|v| v.position).chain(std::iter::once(self.sensor)) {
            if let Some(q) = prev {
                len += (p - q).length();
            }
            prev = Some(p);
        }
        len * eta
    }
}

/// Which derivative terms of the correlated importance to keep.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct DerivativeTerms {
    /// `∂S/∂t · tof□`.
    pub temporal: bool,
    /// Everything that moves with the spatial factors.
    pub spatial: bool,
}

impl Default for DerivativeTerms {
    fn default() -> Self {
        DerivativeTerms { temporal: true, spatial: true }
    }
}

/// Correlated importance of frame offset `offset`: the kernel value at
/// `tof - offset` with partials `∂S/∂t · tof□`.
pub fn correlated_importance(kernel: &CorrelatedTimeKernel, tof: &Dual, offset: f64) -> Dual {
    let (s, ds) = kernel.eval(tof.v - offset);
    let mut out = Dual::constant(s);
    for (g, &t) in out.g.iter_mut().zip(&tof.g) {
        *g = ds * t;
    }
    out
}

/// Contribution `f_T = spatial · S` and its partials, with either group of
/// terms optionally dropped.
#[inline]
pub fn contribution(spatial: &Dual, s: &Dual, terms: DerivativeTerms) -> Dual {
    let mut out = Dual::constant(spatial.v * s.v);
    for c in 0..out.g.len() {
        let mut g = 0.0;
        if terms.spatial {
            g += spatial.g[c] * s.v;
        }
        if terms.temporal {
            g += spatial.v * s.g[c];
        }
        out.g[c] = g;
    }
    out
}
