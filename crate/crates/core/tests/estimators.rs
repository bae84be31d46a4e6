mod common;

use common::{desc, emitter_quad, lambertian_quad};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use tgrd::estimators::*;
use tgrd::geometry::{classify_edges, BindingKind, EdgeKind, Ray};
use tgrd::presets::{box_mesh, by_name, ellipsoid};
use tgrd::scene::{FramesDesc, Material, MeshDesc, RenderScene, SceneDesc};
use tgrd::temporal::TemporalProfile;
use tgrd::validation::{fd_gradient, FdConfig};
use tgrd::vec::Vec3;

fn v(x: f64, y: f64, z: f64) -> Vec3 {
    Vec3::new(x, y, z)
}

fn frames() -> FramesDesc {
    FramesDesc { count: 20, exposure: 0.5, start: 15.0 }
}

fn single() -> RenderOptions {
    RenderOptions::single_threaded()
}

fn small_occluder(size: usize) -> SceneDesc {
    let mut d = by_name("occluder").unwrap();
    d.sensor.width = size;
    d.sensor.height = size;
    d
}

fn all_zero(p: &[f64]) -> bool {
    p.iter().all(|x| *x == 0.0)
}

#[test]
fn emitter_facing_away_gives_black_output() {
    let meshes = vec![
        lambertian_quad("floor", Vec3::ZERO, v(1.0, 0.0, 0.0), v(0.0, 1.0, 0.0)),
        emitter_quad("light", v(0.0, 0.0, 8.0), v(0.5, 0.0, 0.0), v(0.0, 0.5, 0.0)),
    ];
    let d = desc(meshes, vec![("p", "floor", BindingKind::Translation { axis: v(0.0, 0.0, 1.0) })], 4, frames());
    let rs = common::prepared(&common::scene(d));
    let h = render_forward(&rs, 1, 0, &single());
    assert_eq!(h.len(), 4 * 4 * 20);
    assert!(all_zero(&h.intensity));
    let g = estimate_gradient(&rs, 2, 2, 0, &single());
    assert!(all_zero(&g.intensity));
    assert!(g.grads.iter().all(|p| all_zero(p)));
}

#[test]
fn unbound_scene_has_no_gradient_planes() {
    let mut d = small_occluder(4);
    d.parameters.clear();
    d.bindings.clear();
    let rs = common::prepared(&common::scene(d));
    let g = estimate_gradient(&rs, 4, 4, 1, &single());
    assert!(g.grads.is_empty());
    assert!(g.intensity.iter().any(|x| *x > 0.0));
}

#[test]
fn medium_binding_has_no_boundary_term() {
    let mut d = small_occluder(6);
    d.bindings[0].target = "medium".into();
    d.bindings[0].kind = BindingKind::RefractiveIndex;
    let rs = common::prepared(&common::scene(d));
    let b = estimate_boundary(&rs, 16, 3, &single());
    assert!(b.samples_boundary > 0);
    assert!(all_zero(&b.grads[0]));
    let i = estimate_interior(&rs, 4, 3, &single());
    assert!(!all_zero(&i.grads[0]));
}

#[test]
fn closed_smooth_scene_has_no_boundary_term() {
    let sphere = |name: &str, c: Vec3, r: f64| ellipsoid(name, c, v(r, r, r), 12, 16);
    let meshes = vec![
        MeshDesc::inline("ball", &sphere("ball", Vec3::ZERO, 1.0), Material::Lambertian { albedo: 0.7 }),
        MeshDesc::inline("sun", &sphere("sun", v(0.0, 2.0, 2.5), 0.3), Material::Lambertian { albedo: 0.0 })
            .with_emission(5.0, TemporalProfile::Box { t_start: 0.0, t_end: 0.5, amplitude: 1.0 }),
    ];
    let mut d = desc(meshes, vec![("p", "ball", BindingKind::Translation { axis: v(1.0, 0.0, 0.0) })], 4, frames());
    d.dihedral_tolerance = std::f64::consts::PI;
    let rs = common::prepared(&common::scene(d));
    assert!(rs.edges.is_empty());
    let b = estimate_boundary(&rs, 8, 0, &single());
    assert!(all_zero(&b.grads[0]));
    let g = estimate_gradient(&rs, 8, 8, 0, &single());
    let i = estimate_interior(&rs, 8, 0, &single());
    assert_eq!(g.grads, i.grads);
}

fn hit_brute(rs: &RenderScene, ray: &Ray, skip: &[(usize, usize)]) -> Option<(f64, usize, usize)> {
    let mut best: Option<(f64, usize, usize)> = None;
    for (mi, m) in rs.meshes.iter().enumerate() {
        for f in 0..m.triangles.len() {
            if skip.contains(&(mi, f)) {
                continue;
            }
            let [a, b, c] = m.triangle(f);
            let (e1, e2) = (b - a, c - a);
            let p = ray.dir.cross(e2);
            let det = e1.dot(p);
            if det.abs() < 1e-14 {
                continue;
            }
            let s = ray.origin - a;
            let u = s.dot(p) / det;
            let q = s.cross(e1);
            let w = ray.dir.dot(q) / det;
            if u < 0.0 || w < 0.0 || u + w > 1.0 {
                continue;
            }
            let t = e2.dot(q) / det;
            if t > rs.eps && best.map_or(true, |b| t < b.0) {
                best = Some((t, mi, f));
            }
        }
    }
    best
}

/// Closed room with a light on the ceiling and a cube in the middle.
fn room() -> RenderScene {
    let walls = box_mesh("room", v(-2.0, -2.0, 0.0), v(2.0, 2.0, 3.0));
    let cube = box_mesh("cube", v(-0.25, -0.25, 1.0), v(0.25, 0.25, 1.5));
    let meshes = vec![
        MeshDesc::inline("room", &walls, Material::Lambertian { albedo: 0.5 }),
        MeshDesc::inline("cube", &cube, Material::Lambertian { albedo: 0.5 }),
        emitter_quad("light", v(0.0, 0.0, 2.9), v(0.2, 0.0, 0.0), v(0.0, -0.2, 0.0)),
    ];
    let mut d = desc(meshes, vec![("p", "cube", BindingKind::Translation { axis: v(1.0, 0.0, 0.0) })], 4, frames());
    d.sensor.position = v(0.0, 0.0, 2.5);
    common::prepared(&common::scene(d))
}

#[test]
fn boundary_acceptance_matches_brute_force_rejection() {
    let rs = room();
    // Oracle edge list, built from the classification alone.
    let mut edges = Vec::new();
    for (mi, m) in rs.meshes.iter().enumerate() {
        for c in classify_edges(m, 1e-4) {
            if c.kind != EdgeKind::Smooth {
                let e = m.edges[c.edge];
                let (a, b) = (m.vertices[e.v[0] as usize], m.vertices[e.v[1] as usize]);
                let faces: Vec<(usize, usize)> = (0..e.face_count()).map(|k| (mi, e.faces[k] as usize)).collect();
                edges.push((a, b, c.kind, c.normals, faces));
            }
        }
    }
    let lengths: Vec<f64> = edges.iter().map(|e| (e.1 - e.0).length()).collect();
    let total: f64 = lengths.iter().sum();

    let n = 1_000_000;
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    let (mut accepted, mut oracle) = (0usize, 0usize);
    for _ in 0..n {
        let mut same = rng.clone();
        if sample_boundary_segment(&rs, &mut rng).is_ok() {
            accepted += 1;
        }
        let mut u = same.gen::<f64>() * total;
        let mut k = 0;
        while k + 1 < edges.len() && u >= lengths[k] {
            u -= lengths[k];
            k += 1;
        }
        let (a, b, kind, normals, faces) = &edges[k];
        let x = *a + (*b - *a) * (u / lengths[k]).min(1.0);
        let z = 1.0 - 2.0 * same.gen::<f64>();
        let phi = std::f64::consts::TAU * same.gen::<f64>();
        let r = (1.0 - z * z).max(0.0).sqrt();
        let w = v(r * phi.cos(), r * phi.sin(), z);
        if hit_brute(&rs, &Ray { origin: x, dir: w }, faces).is_none()
            || hit_brute(&rs, &Ray { origin: x, dir: -w }, faces).is_none()
        {
            continue;
        }
        if *kind == EdgeKind::Boundary || (normals[0].dot(w) > 0.0) != (normals[1].dot(w) > 0.0) {
            oracle += 1;
        }
    }
    let (fa, fo) = (accepted as f64 / n as f64, oracle as f64 / n as f64);
    assert!(fa > 0.01, "acceptance {fa}");
    assert!((fa - fo).abs() <= 0.01 * fo, "library {fa}, oracle {fo}");
}

#[test]
fn replay_is_bit_identical() {
    let mut d = by_name("two-planes").unwrap();
    d.sensor.width = 6;
    d.sensor.height = 6;
    let rs = common::prepared(&common::scene(d));
    let a = estimate_gradient(&rs, 4, 8, 17, &single());
    assert!(!all_zero(&a.grads[0]));
    let b = estimate_gradient(&rs, 4, 8, 17, &single());
    assert_eq!(a, b);
    let c = estimate_gradient(&rs, 4, 8, 18, &single());
    assert_ne!(a.grads, c.grads);
}

#[test]
fn worker_count_changes_only_summation_order() {
    let rs = common::prepared(&common::scene(small_occluder(6)));
    let a = estimate_gradient(&rs, 4, 8, 5, &single());
    let opts = RenderOptions { threads: 3, ..single() };
    let b = estimate_gradient(&rs, 4, 8, 5, &opts);
    let close = |x: &[f64], y: &[f64]| x.iter().zip(y).all(|(p, q)| (p - q).abs() <= 1e-12 * p.abs().max(q.abs()).max(1e-300));
    assert!(close(&a.intensity, &b.intensity));
    assert!(close(&a.grads[0], &b.grads[0]));
}

#[test]
fn occluder_moving_toward_the_light_axis_darkens_the_image() {
    let mut d = small_occluder(16);
    d.sensor.frames.count = 10;
    d.bindings[0].kind = BindingKind::Translation { axis: v(-1.0, 0.0, 0.0) };
    let s = common::scene(d);
    let rs = common::prepared(&s);
    let g = estimate_gradient(&rs, 64, 256, 3, &single());
    let fd = fd_gradient(&s, &FdConfig { spp: 256, ..FdConfig::default() }, 4, &single()).unwrap();
    let ours: f64 = g.grads[0].iter().sum();
    let reference: f64 = fd.grads[0].iter().sum();
    assert!(reference < 0.0, "fd {reference}");
    assert!(ours < 0.0, "ours {ours}, fd {reference}");
}
