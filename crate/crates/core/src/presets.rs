//! Built-in scenes at desk scale.
//!
//! All scenes use meters and nanoseconds. The camera looks down at a floor
//! from below the light, so moving geometry above it is never seen directly.

use crate::geometry::{quad, BindingKind, Mesh};
use crate::scene::{
    BindingDesc, EstimatorDesc, FramesDesc, Material, MediumDesc, MeshDesc, ParameterDesc, SceneDesc, SensorDesc,
};
use crate::temporal::{TemporalProfile, SPEED_OF_LIGHT};
use crate::vec::Vec3;

pub const NAMES: [&str; 8] = ["two-planes", "occluder", "light-translation", "mini-nlos", "egg", "tower", "teapot", "coffee"];

/// Resolution and frame layout of a preset.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Layout {
    pub width: usize,
    pub height: usize,
    pub frames: usize,
    pub exposure: f64,
    pub start: f64,
}

impl Layout {
    pub fn new(width: usize, height: usize, frames: usize, exposure: f64, start: f64) -> Layout {
        Layout { width, height, frames, exposure, start }
    }
}

pub fn by_name(name: &str) -> Option<SceneDesc> {
    Some(match name {
        "two-planes" => two_planes(Layout::new(64, 64, 100, 0.25, 9.8)),
        "occluder" => occluder(Layout::new(64, 64, 100, 0.1, 9.8)),
        "light-translation" => light_translation(Layout::new(16, 16, 50, 0.04, 8.5), 0.0),
        "mini-nlos" => mini_nlos(Layout::new(32, 32, 200, 0.02, 9.8), Vec3::ZERO),
        "egg" => egg(),
        "tower" => tower(),
        "teapot" => teapot(),
        "coffee" => coffee(),
        _ => return None,
    })
}

fn lambert(albedo: f64) -> Material {
    Material::Lambertian { albedo }
}

fn sensor(layout: Layout, position: Vec3, look_at: Vec3, up: Vec3, fov_deg: f64) -> SensorDesc {
    SensorDesc {
        position,
        look_at,
        up,
        fov_deg,
        width: layout.width,
        height: layout.height,
        profile: TemporalProfile::Box { t_start: 0.0, t_end: layout.exposure, amplitude: 1.0 },
        frames: FramesDesc { count: layout.frames, exposure: layout.exposure, start: layout.start },
    }
}

fn pulse(layout: Layout) -> TemporalProfile {
    TemporalProfile::Box { t_start: 0.0, t_end: layout.exposure, amplitude: 1.0 }
}

fn floor() -> MeshDesc {
    MeshDesc::inline("floor", &quad("floor", Vec3::ZERO, Vec3::new(1.5, 0.0, 0.0), Vec3::new(0.0, 1.5, 0.0)), lambert(0.8))
}

/// Downward-facing square light of half size `h` centered at `c`.
fn light(c: Vec3, h: f64, layout: Layout, radiance: f64) -> MeshDesc {
    let m = quad("light", c, Vec3::new(0.0, h, 0.0), Vec3::new(h, 0.0, 0.0));
    MeshDesc::inline("light", &m, lambert(0.0)).with_emission(radiance, pulse(layout))
}

fn down_sensor(layout: Layout) -> SensorDesc {
    sensor(layout, Vec3::new(0.0, 0.0, 1.0), Vec3::ZERO, Vec3::new(0.0, 1.0, 0.0), 60.0)
}

fn param(name: &str, value: f64) -> ParameterDesc {
    ParameterDesc { name: name.into(), value, bounds: None }
}

fn translate(parameter: &str, target: &str, axis: Vec3) -> BindingDesc {
    BindingDesc { parameter: parameter.into(), target: target.into(), kind: BindingKind::Translation { axis } }
}

fn base(meshes: Vec<MeshDesc>, sensor: SensorDesc) -> SceneDesc {
    SceneDesc {
        c: SPEED_OF_LIGHT,
        dihedral_tolerance: crate::geometry::DEFAULT_DIHEDRAL_TOL,
        ray_epsilon: None,
        medium: MediumDesc::default(),
        meshes,
        sensor,
        parameters: Vec::new(),
        bindings: Vec::new(),
        estimator: EstimatorDesc::default(),
    }
}

/// Axis-aligned box.
pub fn box_mesh(name: &str, lo: Vec3, hi: Vec3) -> Mesh {
    let mut m = crate::geometry::unit_cube(name);
    let d = hi - lo;
    for v in &mut m.vertices {
        *v = Vec3::new(lo.x + v.x * d.x, lo.y + v.y * d.y, lo.z + v.z * d.z);
    }
    m.update_normals().expect("box is valid");
    m
}

/// Latitude/longitude ellipsoid with outward normals.
pub fn ellipsoid(name: &str, center: Vec3, radii: Vec3, rings: usize, segments: usize) -> Mesh {
    let rings = rings.max(2);
    let segments = segments.max(3);
    let mut vertices = vec![center + Vec3::new(0.0, 0.0, radii.z)];
    for i in 1..rings {
        let th = std::f64::consts::PI * i as f64 / rings as f64;
        for j in 0..segments {
            let ph = 2.0 * std::f64::consts::PI * j as f64 / segments as f64;
            let d = Vec3::new(th.sin() * ph.cos() * radii.x, th.sin() * ph.sin() * radii.y, th.cos() * radii.z);
            vertices.push(center + d);
        }
    }
    vertices.push(center - Vec3::new(0.0, 0.0, radii.z));
    let south = (vertices.len() - 1) as u32;
    let ring = |i: usize, j: usize| (1 + (i - 1) * segments + j % segments) as u32;
    let mut triangles = Vec::new();
    for j in 0..segments {
        triangles.push([0, ring(1, j), ring(1, j + 1)]);
        triangles.push([south, ring(rings - 1, j + 1), ring(rings - 1, j)]);
    }
    for i in 1..rings - 1 {
        for j in 0..segments {
            let (a, b, c, d) = (ring(i, j), ring(i, j + 1), ring(i + 1, j), ring(i + 1, j + 1));
            triangles.push([a, c, d]);
            triangles.push([a, d, b]);
        }
    }
    Mesh::new(name, vertices, triangles).expect("ellipsoid is valid")
}

/// Floor and light only; the light translates along `y`.
pub fn two_planes(layout: Layout) -> SceneDesc {
    let mut s = base(vec![floor(), light(Vec3::new(0.0, 0.0, 2.0), 0.25, layout, 10.0)], down_sensor(layout));
    s.parameters.push(param("light_y", 0.0));
    s.bindings.push(translate("light_y", "light", Vec3::new(0.0, 1.0, 0.0)));
    s
}

/// A box between light and floor casting a shadow into view; the box
/// translates along `x`.
pub fn occluder(layout: Layout) -> SceneDesc {
    let cube = box_mesh("occluder", Vec3::new(0.05, -0.15, 1.35), Vec3::new(0.35, 0.15, 1.45));
    let mut s = base(
        vec![floor(), light(Vec3::new(0.0, 0.0, 2.0), 0.2, layout, 10.0), MeshDesc::inline("occluder", &cube, lambert(0.5))],
        down_sensor(layout),
    );
    s.parameters.push(param("occluder_x", 0.0));
    s.bindings.push(translate("occluder_x", "occluder", Vec3::new(1.0, 0.0, 0.0)));
    s.estimator.max_depth = 3;
    s
}

/// Floor and light, the light offset by `offset` along `y`.
pub fn light_translation(layout: Layout, offset: f64) -> SceneDesc {
    let mut s = base(vec![floor(), light(Vec3::new(0.0, 0.0, 1.6), 0.2, layout, 10.0)], down_sensor(layout));
    s.parameters.push(ParameterDesc { name: "light_y".into(), value: offset, bounds: Some([-0.6, 0.6]) });
    s.bindings.push(translate("light_y", "light", Vec3::new(0.0, 1.0, 0.0)));
    s.estimator = EstimatorDesc { spp_interior: 4, spp_boundary: 0, max_depth: 2, seed: 0 };
    s
}

/// Hidden box lit through a relay floor; its position is three parameters.
pub fn mini_nlos(layout: Layout, position: Vec3) -> SceneDesc {
    let cube = box_mesh("hidden", Vec3::new(-0.2, -0.2, 1.3), Vec3::new(0.2, 0.2, 1.4));
    let mut s = base(
        vec![floor(), light(Vec3::new(0.0, 0.0, 2.0), 0.3, layout, 10.0), MeshDesc::inline("hidden", &cube, lambert(0.5))],
        down_sensor(layout),
    );
    for (name, axis, v) in [
        ("x", Vec3::new(1.0, 0.0, 0.0), position.x),
        ("y", Vec3::new(0.0, 1.0, 0.0), position.y),
        ("z", Vec3::new(0.0, 0.0, 1.0), position.z),
    ] {
        let bounds = if name == "z" { [-0.2, 0.3] } else { [-0.3, 0.3] };
        s.parameters.push(ParameterDesc { name: name.into(), value: v, bounds: Some(bounds) });
        s.bindings.push(translate(name, "hidden", axis));
    }
    s.estimator = EstimatorDesc { spp_interior: 2, spp_boundary: 4, max_depth: 3, seed: 0 };
    s
}

fn side_sensor(layout: Layout) -> SensorDesc {
    sensor(layout, Vec3::new(0.0, -2.5, 1.0), Vec3::new(0.0, 0.0, 0.4), Vec3::new(0.0, 0.0, 1.0), 45.0)
}

/// Egg on a floor; the light translates vertically.
pub fn egg() -> SceneDesc {
    let layout = Layout::new(64, 64, 100, 0.1, 8.0);
    let egg = ellipsoid("egg", Vec3::new(0.0, 0.0, 0.35), Vec3::new(0.25, 0.25, 0.35), 12, 24);
    let mut s = base(
        vec![floor(), light(Vec3::new(0.0, 0.0, 2.0), 0.3, layout, 10.0), MeshDesc::inline("egg", &egg, lambert(0.7))],
        side_sensor(layout),
    );
    s.parameters.push(param("light_z", 0.0));
    s.bindings.push(translate("light_z", "light", Vec3::new(0.0, 0.0, 1.0)));
    s.estimator = EstimatorDesc { spp_interior: 410, spp_boundary: 919, max_depth: 6, seed: 0 };
    s
}

/// Tower rotating about its vertical axis.
pub fn tower() -> SceneDesc {
    let layout = Layout::new(64, 64, 100, 0.1, 8.0);
    let tower = box_mesh("tower", Vec3::new(-0.15, -0.15, 0.0), Vec3::new(0.15, 0.15, 0.9));
    let mut s = base(
        vec![
            floor(),
            light(Vec3::new(0.4, -0.4, 2.0), 0.3, layout, 10.0),
            MeshDesc::inline("tower", &tower, Material::RoughConductor { alpha: 0.3, reflectance: 0.8 }),
        ],
        side_sensor(layout),
    );
    s.parameters.push(param("tower_angle", 0.0));
    s.bindings.push(BindingDesc {
        parameter: "tower_angle".into(),
        target: "tower".into(),
        kind: BindingKind::Rotation { point: Vec3::ZERO, axis: Vec3::new(0.0, 0.0, 1.0) },
    });
    s.estimator = EstimatorDesc { spp_interior: 819, spp_boundary: 1720, max_depth: 6, seed: 0 };
    s
}

/// Object and light translations plus their combined motion.
pub fn teapot() -> SceneDesc {
    let layout = Layout::new(64, 64, 600, 5.0, 0.0);
    let pot = ellipsoid("teapot", Vec3::new(0.0, 0.0, 0.25), Vec3::new(0.3, 0.3, 0.25), 10, 20);
    let mut s = base(
        vec![floor(), light(Vec3::new(0.0, 0.0, 2.0), 0.3, layout, 10.0), MeshDesc::inline("teapot", &pot, lambert(0.7))],
        side_sensor(layout),
    );
    s.parameters.push(param("theta1", 0.0));
    s.parameters.push(param("theta2", 0.0));
    s.parameters.push(param("theta3", 0.0));
    s.bindings.push(translate("theta1", "teapot", Vec3::new(1.0, 0.0, 0.0)));
    s.bindings.push(translate("theta2", "light", Vec3::new(1.0, 0.0, 0.0)));
    s.bindings.push(translate("theta3", "teapot", Vec3::new(1.0, 0.0, 0.0)));
    s.bindings.push(translate("theta3", "light", Vec3::new(1.0, 0.0, 0.0)));
    s.estimator = EstimatorDesc { spp_interior: 64, spp_boundary: 128, max_depth: 6, seed: 0 };
    s
}

/// Index of refraction of the medium; no geometry moves.
pub fn coffee() -> SceneDesc {
    let layout = Layout::new(32, 32, 100, 0.1, 8.0);
    let cup = ellipsoid("cup", Vec3::new(0.0, 0.0, 0.2), Vec3::new(0.2, 0.2, 0.2), 10, 20);
    let mut s = base(
        vec![floor(), light(Vec3::new(0.0, 0.0, 2.0), 0.3, layout, 10.0), MeshDesc::inline("cup", &cup, lambert(0.6))],
        side_sensor(layout),
    );
    s.medium = MediumDesc { eta: 1.33 };
    s.parameters.push(ParameterDesc { name: "eta".into(), value: 0.0, bounds: Some([-0.3, 0.5]) });
    s.bindings.push(BindingDesc { parameter: "eta".into(), target: "medium".into(), kind: BindingKind::RefractiveIndex });
    s.estimator = EstimatorDesc { spp_interior: 64, spp_boundary: 0, max_depth: 6, seed: 0 };
    s
}
