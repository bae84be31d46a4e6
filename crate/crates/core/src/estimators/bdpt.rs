//! Bidirectional path construction with balance-heuristic weights.
//!
//! Only strategies with at least two camera vertices (the pinhole and the
//! first hit) are used, so every sampled path belongs to the pixel that
//! generated it.

use std::f64::consts::PI;

use rand::Rng;

use crate::geometry::{Ray, SurfacePoint};
use crate::scene::RenderScene;
use crate::transport::bsdf::sample_cosine;
use crate::transport::visibility;
use crate::vec::Vec3;

/// Closest surface hit along a ray, ignoring `skip`.
pub(crate) fn trace(scene: &RenderScene, origin: Vec3, dir: Vec3, skip: &[u32]) -> Option<SurfacePoint> {
    let ray = Ray { origin, dir };
    let hit = scene.bvh.intersect(&ray, scene.eps, f64::INFINITY, skip)?;
    Some(scene.surface_point(hit.prim, hit.u, hit.v))
}

/// Traces the continuation of a walk at `cur`, arriving from direction `wi`
/// (pointing away from `cur`). Returns the next vertex and `ρ |cos| / pdf`.
pub(crate) fn extend<R: Rng>(scene: &RenderScene, cur: &SurfacePoint, wi: Vec3, rng: &mut R) -> Option<(SurfacePoint, f64)> {
    let mat = scene.materials[cur.mesh];
    let wo = mat.sample(cur.normal, wi, rng.gen(), rng.gen())?;
    let pdf = mat.pdf(cur.normal, wi, wo);
    if !(pdf > 0.0) {
        return None;
    }
    let rho = mat.eval::<f64>(cur.normal, wi, wo);
    let skip = [scene.global_prim(cur.mesh, cur.face)];
    let next = trace(scene, cur.position, wo, &skip)?;
    Some((next, rho * cur.normal.dot(wo).abs() / pdf))
}

/// Camera vertices `x_1 … x_k`, `k ≤ max_depth`.
pub(crate) fn camera_subpath<R: Rng>(scene: &RenderScene, pixel: (usize, usize), rng: &mut R) -> Vec<SurfacePoint> {
    let mut out = Vec::with_capacity(scene.max_depth);
    let cam = &scene.camera;
    let (d, _) = cam.sample_dir(pixel.0, pixel.1, rng.gen(), rng.gen());
    let Some(mut cur) = trace(scene, cam.position, d, &[]) else { return out };
    let mut prev = cam.position;
    out.push(cur);
    while out.len() < scene.max_depth {
        let wi = (prev - cur.position).normalized();
        let Some((next, _)) = extend(scene, &cur, wi, rng) else { break };
        prev = cur.position;
        cur = next;
        out.push(cur);
    }
    out
}

/// Light vertices `y_0 … y_k`, `k ≤ max_depth - 2`.
pub(crate) fn light_subpath<R: Rng>(scene: &RenderScene, rng: &mut R) -> Vec<SurfacePoint> {
    let mut out = Vec::with_capacity(scene.max_depth);
    if scene.emitters.is_empty() || scene.max_depth < 2 {
        return out;
    }
    let (y0, _) = scene.emitters.sample(&scene.meshes, rng.gen(), rng.gen(), rng.gen());
    out.push(y0);
    let limit = scene.max_depth - 1;
    if out.len() >= limit {
        return out;
    }
    let d = sample_cosine(y0.normal, rng.gen(), rng.gen());
    let skip = [scene.global_prim(y0.mesh, y0.face)];
    let Some(mut cur) = trace(scene, y0.position, d, &skip) else { return out };
    let mut prev = y0.position;
    out.push(cur);
    while out.len() < limit {
        let wi = (prev - cur.position).normalized();
        let Some((next, _)) = extend(scene, &cur, wi, rng) else { break };
        prev = cur.position;
        cur = next;
        out.push(cur);
    }
    out
}

#[inline]
fn to_area(pdf_w: f64, from: Vec3, to: &SurfacePoint) -> f64 {
    let d = to.position - from;
    let r2 = d.length_sq();
    pdf_w * to.normal.dot(d).abs() / (r2 * r2.sqrt())
}

#[inline]
fn dir(from: Vec3, to: Vec3) -> Vec3 {
    (to - from).normalized()
}

/// `Σ_s p_s` over the usable strategies of a full path `x_1 … x_n`
/// (`x_n` on an emitter), each `p_s` in product area measure.
pub(crate) fn strategy_pdf_sum(scene: &RenderScene, pixel: (usize, usize), path: &[SurfacePoint]) -> f64 {
    let n = path.len();
    let o = scene.camera.position;
    let pos = |i: usize| if i == 0 { o } else { path[i - 1].position };
    let vtx = |i: usize| &path[i - 1];
    // pc[i], pl[i] for i in 1..=n; index 0 unused.
    let mut pc = [0.0f64; 34];
    let mut pl = [0.0f64; 34];
    debug_assert!(n < pc.len());
    pc[1] = to_area(scene.camera.pdf_dir(pos(1) - o, pixel.0, pixel.1), o, vtx(1));
    for i in 2..=n {
        let v = vtx(i - 1);
        let pw = scene.materials[v.mesh].pdf(v.normal, dir(v.position, pos(i - 2)), dir(v.position, pos(i)));
        pc[i] = to_area(pw, v.position, vtx(i));
    }
    pl[n] = if scene.emitters.is_empty() { 0.0 } else { scene.emitters.pdf() };
    if n >= 2 {
        let e = vtx(n);
        let cos = e.normal.dot(dir(e.position, pos(n - 1)));
        pl[n - 1] = if cos > 0.0 { to_area(cos / PI, e.position, vtx(n - 1)) } else { 0.0 };
    }
    for i in (1..n.saturating_sub(1)).rev() {
        let v = vtx(i + 1);
        let pw = scene.materials[v.mesh].pdf(v.normal, dir(v.position, pos(i + 2)), dir(v.position, pos(i)));
        pl[i] = to_area(pw, v.position, vtx(i));
    }
    let mut sum = 0.0;
    for s in 0..n {
        let t = n + 1 - s;
        let mut p = 1.0;
        for &x in &pc[1..t] {
            p *= x;
        }
        for &x in &pl[t..=n] {
            p *= x;
        }
        sum += p;
    }
    sum
}

/// Generates one bidirectional sample for `pixel` and hands every full
/// path `x_1 … x_n` to `sink` together with its balance-heuristic factor
/// `1 / Σ_s p_s`.
pub(crate) fn sample_paths<R: Rng>(
    scene: &RenderScene,
    pixel: (usize, usize),
    rng: &mut R,
    mut sink: impl FnMut(&[SurfacePoint], f64),
) {
    let cam = camera_subpath(scene, pixel, rng);
    if cam.is_empty() {
        return;
    }
    let light = light_subpath(scene, rng);
    let mut path: Vec<SurfacePoint> = Vec::with_capacity(scene.max_depth + 1);
    let emit = |path: &[SurfacePoint], sink: &mut dyn FnMut(&[SurfacePoint], f64)| {
        let sum = strategy_pdf_sum(scene, pixel, path);
        if sum > 0.0 && sum.is_finite() {
            sink(path, 1.0 / sum);
        }
    };
    // Camera paths that reach an emitter.
    for i in 0..cam.len() {
        if scene.radiance[cam[i].mesh].is_some() {
            emit(&cam[..=i], &mut sink);
        }
    }
    // Connections between camera vertex x_{t-1} and light vertex y_{s-1}.
    for t in 2..=cam.len() + 1 {
        let zc = &cam[t - 2];
        for s in 1..=light.len() {
            if s + t - 1 > scene.max_depth {
                break;
            }
            let yl = &light[s - 1];
            if (zc.position - yl.position).length_sq() == 0.0 || !visibility(scene, zc, yl) {
                continue;
            }
            path.clear();
            path.extend_from_slice(&cam[..t - 1]);
            path.extend(light[..s].iter().rev());
            emit(&path, &mut sink);
        }
    }
}
