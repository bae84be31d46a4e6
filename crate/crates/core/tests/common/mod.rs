#![allow(dead_code)]

use std::path::Path;

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use tgrd::geometry::{quad, BindingKind, SurfacePoint};
use tgrd::presets::ellipsoid;
use tgrd::scene::*;
use tgrd::temporal::TemporalProfile;
use tgrd::vec::Vec3;

pub fn scene(desc: SceneDesc) -> Scene {
    Scene::new(desc, Path::new(".")).expect("valid scene")
}

pub fn prepared(s: &Scene) -> RenderScene {
    RenderScene::new(s).expect("valid render scene")
}

fn rand_vec(rng: &mut ChaCha8Rng) -> Vec3 {
    Vec3::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
}

/// Four random quads (the last emissive), a rotating ellipsoid, a moving
/// camera and a bound refractive index; one binding per parameter.
pub fn random_scene(rng: &mut ChaCha8Rng) -> Scene {
    let emission = TemporalProfile::Gaussian { mean: 0.0, sigma: 2.0, amplitude: 1.0 };
    let mut meshes = Vec::new();
    let mut parameters = Vec::new();
    let mut bindings = Vec::new();
    for i in 0..4 {
        let c = rand_vec(rng) * 2.0;
        let u = rand_vec(rng);
        let v = rand_vec(rng);
        let name = format!("m{i}");
        let material = if i % 2 == 0 {
            Material::Lambertian { albedo: 0.7 }
        } else {
            Material::RoughConductor { alpha: 0.4, reflectance: 0.6 }
        };
        let mut d = MeshDesc::inline(&name, &quad(&name, c, u, v), material);
        if i == 3 {
            d = d.with_emission(2.0, emission);
        }
        meshes.push(d);
        let p = format!("p{i}");
        parameters.push(ParameterDesc { name: p.clone(), value: 0.0, bounds: None });
        let kind = if i % 2 == 0 {
            BindingKind::Translation { axis: rand_vec(rng).normalized() }
        } else {
            BindingKind::Rotation { point: c + u * 0.3, axis: v.normalized() }
        };
        bindings.push(BindingDesc { parameter: p, target: name, kind });
    }
    let egg = ellipsoid("egg", Vec3::new(0.5, 0.5, 0.5), Vec3::new(0.4, 0.3, 0.5), 6, 8);
    meshes.push(MeshDesc::inline("egg", &egg, Material::Lambertian { albedo: 0.5 }));
    let extra = [
        ("egg", "egg", BindingKind::Rotation { point: Vec3::ZERO, axis: Vec3::new(1.0, 0.0, 0.0) }),
        ("eta", "medium", BindingKind::RefractiveIndex),
        ("cam", "sensor", BindingKind::Translation { axis: Vec3::new(0.0, 1.0, 0.0) }),
    ];
    for (p, target, kind) in extra {
        parameters.push(ParameterDesc { name: p.into(), value: 0.0, bounds: None });
        bindings.push(BindingDesc { parameter: p.into(), target: target.into(), kind });
    }
    scene(SceneDesc {
        c: 0.3,
        dihedral_tolerance: 1e-4,
        ray_epsilon: None,
        medium: MediumDesc { eta: 1.2 },
        meshes,
        sensor: SensorDesc {
            position: Vec3::new(0.0, 0.0, 6.0),
            look_at: Vec3::ZERO,
            up: Vec3::new(0.0, 1.0, 0.0),
            fov_deg: 170.0,
            width: 4,
            height: 4,
            profile: TemporalProfile::Triangle { center: 30.0, half_width: 20.0, peak: 1.0 },
            frames: FramesDesc { count: 1, exposure: 1.0, start: 0.0 },
        },
        parameters,
        bindings,
        estimator: EstimatorDesc::default(),
    })
}

/// Random camera path `x_1 … x_n` ending on the emitter (mesh 3) with all
/// cosines away from grazing and nonzero scattering; visibility is ignored.
pub fn random_path(rs: &RenderScene, rng: &mut ChaCha8Rng, n: usize) -> Option<(SurfacePoint, Vec<SurfacePoint>)> {
    let mut sps = Vec::with_capacity(n);
    for k in 0..n {
        let mi = if k + 1 == n { 3 } else { rng.gen_range(0..5) };
        let f = rng.gen_range(0..rs.meshes[mi].triangles.len());
        let a: f64 = rng.gen_range(0.02..0.96);
        let b: f64 = rng.gen_range(0.02..(0.98 - a));
        sps.push(SurfacePoint::on_face(mi, &rs.meshes[mi], f, [a, b, 1.0 - a - b]));
    }
    let mut prev = rs.camera.position;
    for (k, sp) in sps.iter().enumerate() {
        let d = sp.position - prev;
        if d.length() < 1e-3 || sp.normal.dot(d.normalized()).abs() < 0.05 {
            return None;
        }
        if k > 0 && sps[k - 1].normal.dot(d.normalized()).abs() < 0.05 {
            return None;
        }
        prev = sp.position;
    }
    Some((sps[0], sps))
}

/// Mean and variance of the mean over batches, per element.
pub fn batch_stats(batches: &[Vec<f64>]) -> (Vec<f64>, Vec<f64>) {
    let b = batches.len() as f64;
    let n = batches[0].len();
    let mut mean = vec![0.0; n];
    for x in batches {
        for (m, v) in mean.iter_mut().zip(x) {
            *m += v / b;
        }
    }
    let mut var = vec![0.0; n];
    for x in batches {
        for ((s, v), m) in var.iter_mut().zip(x).zip(&mean) {
            *s += (v - m) * (v - m) / (b - 1.0) / b;
        }
    }
    (mean, var)
}

pub fn norm(a: &[f64]) -> f64 {
    a.iter().map(|v| v * v).sum::<f64>().sqrt()
}

/// Desc with a pinhole at `(0, 0, 6)` looking at the origin and one
/// parameter per `(name, target, kind)` binding.
pub fn desc(meshes: Vec<MeshDesc>, bindings: Vec<(&str, &str, BindingKind)>, size: usize, frames: FramesDesc) -> SceneDesc {
    let mut parameters: Vec<ParameterDesc> = Vec::new();
    for (p, _, _) in &bindings {
        if !parameters.iter().any(|q| q.name == *p) {
            parameters.push(ParameterDesc { name: p.to_string(), value: 0.0, bounds: None });
        }
    }
    SceneDesc {
        c: 0.3,
        dihedral_tolerance: 1e-4,
        ray_epsilon: None,
        medium: MediumDesc { eta: 1.0 },
        meshes,
        sensor: SensorDesc {
            position: Vec3::new(0.0, 0.0, 6.0),
            look_at: Vec3::ZERO,
            up: Vec3::new(0.0, 1.0, 0.0),
            fov_deg: 60.0,
            width: size,
            height: size,
            profile: TemporalProfile::Box { t_start: 0.0, t_end: frames.exposure, amplitude: 1.0 },
            frames,
        },
        parameters,
        bindings: bindings
            .into_iter()
            .map(|(p, t, kind)| BindingDesc { parameter: p.into(), target: t.into(), kind })
            .collect(),
        estimator: EstimatorDesc::default(),
    }
}

pub fn lambertian_quad(name: &str, c: Vec3, u: Vec3, v: Vec3) -> MeshDesc {
    MeshDesc::inline(name, &quad(name, c, u, v), Material::Lambertian { albedo: 0.8 })
}

pub fn emitter_quad(name: &str, c: Vec3, u: Vec3, v: Vec3) -> MeshDesc {
    lambertian_quad(name, c, u, v).with_emission(5.0, TemporalProfile::Box { t_start: 0.0, t_end: 0.5, amplitude: 1.0 })
}
