//! Silhouette-segment sampling and the boundary term of the gradient.

use std::f64::consts::PI;

use rand::Rng;

use crate::dual::{Dual, Grad, MAX_CHANNELS};
use crate::estimators::bdpt::extend;
use crate::geometry::{is_silhouette, EdgeClass, Ray, SurfacePoint};
use crate::scene::RenderScene;
use crate::transport::{camera_visibility, geometry_term, lift_vertex, visibility};
use crate::vec::{DVec3, Vec3};

/// A segment `x_L -> x_S` grazing a silhouette edge.
#[derive(Clone, Copy, Debug)]
pub struct BoundarySegmentSample {
    pub edge: usize,
    pub x_b: Vec3,
    pub omega: Vec3,
    pub x_l: SurfacePoint,
    pub x_s: SurfacePoint,
    /// Density of `(x_B, ω)`: length-uniform edge point, uniform direction.
    pub pdf: f64,
    /// `dA(x_L) dℓ(x_S) / (ds dω)`.
    pub jacobian: f64,
    /// Normal velocity of the visibility boundary at `x_S`, signed so that
    /// a positive value grows the visible region.
    pub v_normal: Grad,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BoundaryMiss {
    NoEdges,
    Escaped,
    NotSilhouette,
    Degenerate,
}

/// Uniform direction on the unit sphere.
pub fn sample_sphere(u1: f64, u2: f64) -> Vec3 {
    let z = 1.0 - 2.0 * u1;
    let r = (1.0 - z * z).max(0.0).sqrt();
    let phi = 2.0 * PI * u2;
    Vec3::new(r * phi.cos(), r * phi.sin(), z)
}

pub fn sample_boundary_segment<R: Rng>(
    scene: &RenderScene,
    rng: &mut R,
) -> Result<BoundarySegmentSample, BoundaryMiss> {
    let table = &scene.edges;
    if table.is_empty() {
        return Err(BoundaryMiss::NoEdges);
    }
    let (ei, t) = table.sample(rng.gen());
    let omega = sample_sphere(rng.gen(), rng.gen());
    let be = table.edges[ei];
    let mesh = &scene.meshes[be.mesh];
    let e = mesh.edges[be.edge];
    let e0 = mesh.vertices[e.v[0] as usize];
    let e1 = mesh.vertices[e.v[1] as usize];
    let x_b = e0 + (e1 - e0) * t;

    let mut skip = [scene.global_prim(be.mesh, e.faces[0] as usize); 2];
    if e.face_count() == 2 {
        skip[1] = scene.global_prim(be.mesh, e.faces[1] as usize);
    }
    let hit_s = scene.bvh.intersect(&Ray { origin: x_b, dir: omega }, scene.eps, f64::INFINITY, &skip);
    let hit_l = scene.bvh.intersect(&Ray { origin: x_b, dir: -omega }, scene.eps, f64::INFINITY, &skip);
    let (Some(hs), Some(hl)) = (hit_s, hit_l) else { return Err(BoundaryMiss::Escaped) };
    let x_s = scene.surface_point(hs.prim, hs.u, hs.v);
    let x_l = scene.surface_point(hl.prim, hl.u, hl.v);
    let class = EdgeClass { kind: be.kind, edge: be.edge, normals: be.normals };
    if !is_silhouette(&class, x_l.position, x_s.position) {
        return Err(BoundaryMiss::NotSilhouette);
    }

    let cos_l = x_l.normal.dot(omega).abs();
    let cos_s = x_s.normal.dot(omega);
    if cos_l < 1e-12 || cos_s.abs() < 1e-12 {
        return Err(BoundaryMiss::Degenerate);
    }
    let t_l = hl.t;
    let edge_dir = (e1 - e0).normalized();
    let lambda = (hl.t + hs.t) / t_l;
    let dxs = (edge_dir - omega * (x_s.normal.dot(edge_dir) / cos_s)) * lambda;
    let jacobian = t_l * t_l / cos_l * dxs.length();

    // Signed distance of x_S to the plane through x_L and the edge.
    let vel = &scene.velocities[be.mesh];
    let le0 = DVec3::lift(e0, &vel[e.v[0] as usize]);
    let le1 = DVec3::lift(e1, &vel[e.v[1] as usize]);
    let xl = lift_vertex::<Dual>(scene, &x_l).p;
    let xs = lift_vertex::<Dual>(scene, &x_s).p;
    let np = (le0 - xl).cross(le1 - xl).normalized();
    let phi = np.dot(xs - xl);
    let npv = np.val();
    let grad_s = npv - x_s.normal * npv.dot(x_s.normal);
    let gs = grad_s.length();
    let opp = mesh.opposite_vertex(e.faces[0] as usize, &e);
    let occluded_side = npv.dot(opp - x_l.position);
    if gs < 1e-12 || occluded_side == 0.0 {
        return Err(BoundaryMiss::Degenerate);
    }
    let s_f = occluded_side.signum();
    let mut v_normal = [0.0; MAX_CHANNELS];
    for (v, g) in v_normal.iter_mut().zip(&phi.g) {
        *v = -s_f * g / gs;
    }
    Ok(BoundarySegmentSample {
        edge: ei,
        x_b,
        omega,
        x_l,
        x_s,
        pdf: 1.0 / (table.total_length * 4.0 * PI),
        jacobian,
        v_normal,
    })
}

/// Light arriving at `x_L` and leaving toward `x_S`.
#[derive(Clone, Copy, Debug)]
pub(crate) struct LightPrefix {
    pub value: f64,
    /// Geometric length from the emitter to `x_L`.
    pub length: f64,
    pub emitter_mesh: usize,
    pub segments: usize,
}

/// Importance of `x_S` for one pixel, with the path length to the pinhole.
#[derive(Clone, Copy, Debug)]
pub(crate) struct SensorSuffix {
    pub pixel: (usize, usize),
    pub value: f64,
    pub length: f64,
    /// Walk segments before the pinhole connection.
    pub segments: usize,
}

/// Next-event-estimated light subpaths ending at `x_l`, up to `max_segments`.
pub(crate) fn light_prefixes<R: Rng>(
    scene: &RenderScene,
    x_l: &SurfacePoint,
    toward: Vec3,
    max_segments: usize,
    rng: &mut R,
) -> Vec<LightPrefix> {
    let mut out = Vec::new();
    if let Some(r) = scene.radiance[x_l.mesh] {
        if x_l.normal.dot(toward - x_l.position) > 0.0 {
            out.push(LightPrefix { value: r, length: 0.0, emitter_mesh: x_l.mesh, segments: 0 });
        }
    }
    if scene.emitters.is_empty() {
        return out;
    }
    let mut beta = 1.0;
    let mut cur = *x_l;
    let mut prev = toward;
    let mut length = 0.0;
    for k in 0.. {
        if k + 1 > max_segments {
            break;
        }
        let (y, pdf) = scene.emitters.sample(&scene.meshes, rng.gen(), rng.gen(), rng.gen());
        let to_y = y.position - cur.position;
        if y.normal.dot(-to_y) > 0.0 && to_y.length_sq() > 0.0 && visibility(scene, &y, &cur) {
            let wo = (prev - cur.position).normalized();
            let rho = scene.materials[cur.mesh].eval::<f64>(cur.normal, to_y.normalized(), wo);
            let g: f64 = geometry_term(y.position, y.normal, cur.position, cur.normal);
            let r = scene.radiance[y.mesh].unwrap_or(0.0);
            let value = beta * rho * g * r / pdf;
            if value > 0.0 {
                out.push(LightPrefix { value, length: length + to_y.length(), emitter_mesh: y.mesh, segments: k + 1 });
            }
        }
        if k + 2 > max_segments {
            break;
        }
        let wi = (prev - cur.position).normalized();
        let Some((next, f)) = extend(scene, &cur, wi, rng) else { break };
        beta *= f;
        length += (next.position - cur.position).length();
        prev = cur.position;
        cur = next;
    }
    out
}

/// Sensor subpaths from `x_s` connected to the pinhole, up to `max_walk`
/// scattering segments before the connection.
pub(crate) fn sensor_suffixes<R: Rng>(
    scene: &RenderScene,
    x_s: &SurfacePoint,
    from: Vec3,
    max_walk: usize,
    rng: &mut R,
) -> Vec<SensorSuffix> {
    let mut out = Vec::new();
    let cam = &scene.camera;
    let o = cam.position;
    let mut beta = 1.0;
    let mut cur = *x_s;
    let mut prev = from;
    let mut length = 0.0;
    for b in 0..=max_walk {
        let wi = (prev - cur.position).normalized();
        if camera_visibility(scene, &cur) {
            let wo = (o - cur.position).normalized();
            let rho = scene.materials[cur.mesh].eval::<f64>(cur.normal, wi, wo);
            if rho > 0.0 {
                let dist = (o - cur.position).length();
                for pixel in cam.footprint(cur.position) {
                    let w: f64 = cam.sensor_factor(o, cur.position, cur.normal, pixel.0, pixel.1);
                    if w > 0.0 {
                        out.push(SensorSuffix { pixel, value: beta * rho * w, length: length + dist, segments: b });
                    }
                }
            }
        }
        if b == max_walk {
            break;
        }
        let Some((next, f)) = extend(scene, &cur, wi, rng) else { break };
        beta *= f;
        length += (next.position - cur.position).length();
        prev = cur.position;
        cur = next;
    }
    out
}

/// Whether any channel moves the sampled boundary.
pub(crate) fn moves(s: &BoundarySegmentSample, channels: usize) -> bool {
    s.v_normal[..channels].iter().any(|&v| v != 0.0)
}
