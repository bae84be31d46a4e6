//! Scene description and its prepared, render-ready form.

use std::collections::HashSet;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::camera::Camera;
use crate::dual::{Dual, MAX_CHANNELS};
use crate::error::{Error, Result};
use crate::geometry::{
    classify_edges, deform_points, obj, BindingKind, BindingTarget, Bvh, EdgeKind, Mesh, ParameterBinding,
    SurfacePoint, DEFAULT_DIHEDRAL_TOL,
};
use crate::temporal::{correlate, CorrelatedTimeKernel, FrameSpec, TemporalProfile, SPEED_OF_LIGHT};
use crate::vec::{Vec3, Velocity};

fn default_c() -> f64 {
    SPEED_OF_LIGHT
}

fn default_dihedral() -> f64 {
    DEFAULT_DIHEDRAL_TOL
}

fn default_eta() -> f64 {
    1.0
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SceneDesc {
    /// Speed of light in scene units per nanosecond.
    #[serde(default = "default_c")]
    pub c: f64,
    #[serde(default = "default_dihedral")]
    pub dihedral_tolerance: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ray_epsilon: Option<f64>,
    #[serde(default)]
    pub medium: MediumDesc,
    #[serde(rename = "mesh")]
    pub meshes: Vec<MeshDesc>,
    pub sensor: SensorDesc,
    #[serde(default, rename = "parameter", skip_serializing_if = "Vec::is_empty")]
    pub parameters: Vec<ParameterDesc>,
    #[serde(default, rename = "binding", skip_serializing_if = "Vec::is_empty")]
    pub bindings: Vec<BindingDesc>,
    #[serde(default)]
    pub estimator: EstimatorDesc,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MediumDesc {
    #[serde(default = "default_eta")]
    pub eta: f64,
}

impl Default for MediumDesc {
    fn default() -> Self {
        MediumDesc { eta: 1.0 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MeshDesc {
    pub name: String,
    /// OBJ file, relative to the scene file.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub file: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub vertices: Option<Vec<Vec3>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub triangles: Option<Vec<[u32; 3]>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scale: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub translate: Option<Vec3>,
    pub material: Material,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub emission: Option<Emission>,
}

impl MeshDesc {
    pub fn inline(name: &str, mesh: &Mesh, material: Material) -> MeshDesc {
        MeshDesc {
            name: name.to_string(),
            file: None,
            vertices: Some(mesh.vertices.clone()),
            triangles: Some(mesh.triangles.clone()),
            scale: None,
            translate: None,
            material,
            emission: None,
        }
    }

    pub fn with_emission(mut self, radiance: f64, profile: TemporalProfile) -> MeshDesc {
        self.emission = Some(Emission { radiance, profile });
        self
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum Material {
    Lambertian { albedo: f64 },
    /// GGX microfacets with Schlick Fresnel.
    RoughConductor { alpha: f64, reflectance: f64 },
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Emission {
    /// Spatially uniform radiance leaving the front side.
    pub radiance: f64,
    pub profile: TemporalProfile,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SensorDesc {
    pub position: Vec3,
    pub look_at: Vec3,
    pub up: Vec3,
    /// Vertical field of view.
    pub fov_deg: f64,
    pub width: usize,
    pub height: usize,
    pub profile: TemporalProfile,
    pub frames: FramesDesc,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FramesDesc {
    pub count: usize,
    pub exposure: f64,
    #[serde(default)]
    pub start: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParameterDesc {
    pub name: String,
    #[serde(default)]
    pub value: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bounds: Option<[f64; 2]>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BindingDesc {
    pub parameter: String,
    /// Mesh name, `"sensor"` or `"medium"`.
    pub target: String,
    pub kind: BindingKind,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EstimatorDesc {
    pub spp_interior: usize,
    pub spp_boundary: usize,
    /// Maximum number of segments per path.
    pub max_depth: usize,
    pub seed: u64,
}

impl Default for EstimatorDesc {
    fn default() -> Self {
        EstimatorDesc { spp_interior: 64, spp_boundary: 128, max_depth: 6, seed: 0 }
    }
}

/// A validated scene: its description plus the loaded base geometry.
#[derive(Clone, Debug)]
pub struct Scene {
    pub desc: SceneDesc,
    /// Undeformed meshes, in description order.
    pub base_meshes: Vec<Mesh>,
    pub bindings: Vec<ParameterBinding>,
}

const RESERVED_TARGETS: [&str; 2] = ["sensor", "medium"];

impl Scene {
    /// Validates `desc`; OBJ paths are resolved against `base_dir`.
    pub fn new(desc: SceneDesc, base_dir: &Path) -> Result<Scene> {
        let invalid = |m: String| Err(Error::InvalidScene(m));
        if !(desc.c > 0.0 && desc.c.is_finite()) {
            return invalid(format!("c must be positive, got {}", desc.c));
        }
        if !(desc.dihedral_tolerance >= 0.0) {
            return invalid("dihedral_tolerance must be non-negative".into());
        }
        if let Some(e) = desc.ray_epsilon {
            if !(e > 0.0) {
                return invalid("ray_epsilon must be positive".into());
            }
        }
        if !(desc.medium.eta > 0.0 && desc.medium.eta.is_finite()) {
            return invalid(format!("medium eta must be positive, got {}", desc.medium.eta));
        }
        if !(1..=32).contains(&desc.estimator.max_depth) {
            return invalid("max_depth must be in 1..=32".into());
        }
        let mut names = HashSet::new();
        let mut base_meshes = Vec::with_capacity(desc.meshes.len());
        for m in &desc.meshes {
            if RESERVED_TARGETS.contains(&m.name.as_str()) {
                return invalid(format!("mesh name '{}' is reserved", m.name));
            }
            if !names.insert(m.name.clone()) {
                return invalid(format!("duplicate mesh name '{}'", m.name));
            }
            base_meshes.push(load_mesh(m, base_dir)?);
            validate_material(&m.name, &m.material)?;
            if let Some(e) = &m.emission {
                e.profile.validate()?;
                if !(e.radiance >= 0.0 && e.radiance.is_finite()) {
                    return invalid(format!("mesh '{}': radiance must be non-negative", m.name));
                }
            }
        }
        if !desc.meshes.iter().any(|m| m.emission.is_some()) {
            return invalid("scene needs at least one emitter".into());
        }
        let s = &desc.sensor;
        if let TemporalProfile::Delta { .. } = s.profile {
            return Err(Error::SensorDelta);
        }
        s.profile.validate()?;
        if !(s.fov_deg > 0.0 && s.fov_deg < 180.0) {
            return invalid(format!("sensor fov_deg must be in (0, 180), got {}", s.fov_deg));
        }
        frame_spec(s).validate()?;
        Camera::new(s, crate::vec::ZERO_VELOCITY)?;

        let mut pnames = HashSet::new();
        for p in &desc.parameters {
            if !pnames.insert(p.name.clone()) {
                return invalid(format!("duplicate parameter '{}'", p.name));
            }
            if !p.value.is_finite() {
                return Err(Error::InvalidParameter { name: p.name.clone(), reason: "value is not finite".into() });
            }
            if let Some([lo, hi]) = p.bounds {
                if !(lo <= hi) {
                    return Err(Error::InvalidParameter { name: p.name.clone(), reason: "empty bounds".into() });
                }
            }
        }
        let bindings = resolve_bindings(&desc)?;
        Ok(Scene { desc, base_meshes, bindings })
    }

    pub fn theta(&self) -> Vec<f64> {
        self.desc.parameters.iter().map(|p| p.value).collect()
    }

    pub fn parameter_names(&self) -> Vec<String> {
        self.desc.parameters.iter().map(|p| p.name.clone()).collect()
    }

    pub fn num_parameters(&self) -> usize {
        self.desc.parameters.len()
    }

    /// Copy of the scene with new parameter values.
    pub fn with_theta(&self, theta: &[f64]) -> Result<Scene> {
        if theta.len() != self.desc.parameters.len() {
            return Err(Error::DimensionMismatch(format!(
                "{} parameter values for {} parameters",
                theta.len(),
                self.desc.parameters.len()
            )));
        }
        let mut s = self.clone();
        for (p, &v) in s.desc.parameters.iter_mut().zip(theta) {
            if !v.is_finite() {
                return Err(Error::InvalidParameter { name: p.name.clone(), reason: "value is not finite".into() });
            }
            p.value = v;
        }
        Ok(s)
    }

    pub fn frames(&self) -> FrameSpec {
        frame_spec(&self.desc.sensor)
    }
}

fn frame_spec(s: &SensorDesc) -> FrameSpec {
    FrameSpec {
        count: s.frames.count,
        exposure: s.frames.exposure,
        start: s.frames.start,
        width: s.width,
        height: s.height,
    }
}

fn validate_material(name: &str, m: &Material) -> Result<()> {
    let ok = match *m {
        Material::Lambertian { albedo } => (0.0..=1.0).contains(&albedo),
        Material::RoughConductor { alpha, reflectance } => {
            alpha > 0.0 && alpha <= 1.0 && (0.0..=1.0).contains(&reflectance)
        }
    };
    if ok {
        Ok(())
    } else {
        Err(Error::InvalidScene(format!("mesh '{name}': invalid material {m:?}")))
    }
}

fn load_mesh(m: &MeshDesc, base_dir: &Path) -> Result<Mesh> {
    let (mut vertices, triangles) = match (&m.file, &m.vertices, &m.triangles) {
        (Some(file), None, None) => {
            let path: PathBuf = base_dir.join(file);
            obj::load_obj(&path)?
        }
        (None, Some(v), Some(t)) => (v.clone(), t.clone()),
        _ => {
            return Err(Error::InvalidScene(format!(
                "mesh '{}': give either `file` or both `vertices` and `triangles`",
                m.name
            )))
        }
    };
    let s = m.scale.unwrap_or(1.0);
    let t = m.translate.unwrap_or(Vec3::ZERO);
    if !(s > 0.0 && s.is_finite()) {
        return Err(Error::InvalidScene(format!("mesh '{}': scale must be positive", m.name)));
    }
    for v in &mut vertices {
        *v = *v * s + t;
    }
    Mesh::new(m.name.clone(), vertices, triangles)
}

fn resolve_bindings(desc: &SceneDesc) -> Result<Vec<ParameterBinding>> {
    if desc.bindings.len() > MAX_CHANNELS {
        return Err(Error::InvalidScene(format!(
            "{} bindings exceed the supported maximum of {MAX_CHANNELS}",
            desc.bindings.len()
        )));
    }
    let mut out = Vec::with_capacity(desc.bindings.len());
    for b in &desc.bindings {
        let parameter = desc
            .parameters
            .iter()
            .position(|p| p.name == b.parameter)
            .ok_or_else(|| Error::InvalidScene(format!("binding refers to unknown parameter '{}'", b.parameter)))?;
        let bad = |reason: &str| Error::InvalidParameter { name: b.parameter.clone(), reason: reason.to_string() };
        let target = match b.target.as_str() {
            "sensor" => BindingTarget::Sensor,
            "medium" => BindingTarget::Medium,
            name => BindingTarget::Mesh(
                desc.meshes
                    .iter()
                    .position(|m| m.name == name)
                    .ok_or_else(|| bad(&format!("unknown binding target '{name}'")))?,
            ),
        };
        match (b.kind, target) {
            (BindingKind::RefractiveIndex, BindingTarget::Medium) => {}
            (BindingKind::RefractiveIndex, _) => return Err(bad("refractive_index binds only the medium")),
            (_, BindingTarget::Medium) => return Err(bad("the medium accepts only refractive_index")),
            (BindingKind::Rotation { .. }, BindingTarget::Sensor) => {
                return Err(bad("the sensor accepts only translation"))
            }
            (BindingKind::Translation { axis }, _) => {
                if !axis.is_finite() || axis.length() == 0.0 {
                    return Err(bad("translation axis must be finite and nonzero"));
                }
            }
            (BindingKind::Rotation { point, axis }, _) => {
                if !point.is_finite() || !axis.is_finite() || axis.length() == 0.0 {
                    return Err(bad("rotation axis must be finite and nonzero"));
                }
            }
        }
        out.push(ParameterBinding { parameter, target, kind: b.kind });
    }
    Ok(out)
}

/// Boundary or sharp edge eligible for boundary sampling.
#[derive(Clone, Copy, Debug)]
pub struct BoundaryEdge {
    pub mesh: usize,
    /// Index into the mesh's edge list.
    pub edge: usize,
    pub kind: EdgeKind,
    pub normals: [Vec3; 2],
    pub length: f64,
}

/// Length-weighted table of silhouette candidates.
#[derive(Clone, Debug, Default)]
pub struct EdgeTable {
    pub edges: Vec<BoundaryEdge>,
    cdf: Vec<f64>,
    pub total_length: f64,
}

impl EdgeTable {
    pub fn build(meshes: &[Mesh], dihedral_tol: f64) -> EdgeTable {
        let mut edges = Vec::new();
        for (mi, mesh) in meshes.iter().enumerate() {
            for class in classify_edges(mesh, dihedral_tol) {
                if class.kind == EdgeKind::Smooth {
                    continue;
                }
                let e = mesh.edges[class.edge];
                let length = (mesh.vertices[e.v[1] as usize] - mesh.vertices[e.v[0] as usize]).length();
                edges.push(BoundaryEdge { mesh: mi, edge: class.edge, kind: class.kind, normals: class.normals, length });
            }
        }
        let mut cdf = Vec::with_capacity(edges.len());
        let mut total = 0.0;
        for e in &edges {
            total += e.length;
            cdf.push(total);
        }
        EdgeTable { edges, cdf, total_length: total }
    }

    pub fn is_empty(&self) -> bool {
        self.edges.is_empty() || !(self.total_length > 0.0)
    }

    /// Picks an edge proportionally to length; returns it with the
    /// remapped uniform variate along it.
    pub fn sample(&self, u: f64) -> (usize, f64) {
        let x = u * self.total_length;
        let i = self.cdf.partition_point(|&c| c <= x).min(self.edges.len() - 1);
        let start = if i == 0 { 0.0 } else { self.cdf[i - 1] };
        let t = ((x - start) / self.edges[i].length).clamp(0.0, 1.0);
        (i, t)
    }
}

/// Area-uniform sampling over all emissive triangles.
#[derive(Clone, Debug, Default)]
pub struct EmitterSampler {
    /// (mesh, face) pairs.
    pub tris: Vec<(usize, usize)>,
    cdf: Vec<f64>,
    pub total_area: f64,
}

impl EmitterSampler {
    fn build(meshes: &[Mesh], emissive: &[bool]) -> EmitterSampler {
        let mut s = EmitterSampler::default();
        for (mi, mesh) in meshes.iter().enumerate() {
            if !emissive[mi] {
                continue;
            }
            for f in 0..mesh.triangles.len() {
                s.total_area += mesh.area(f);
                s.tris.push((mi, f));
                s.cdf.push(s.total_area);
            }
        }
        s
    }

    pub fn is_empty(&self) -> bool {
        self.tris.is_empty()
    }

    /// Uniform point on the emitters and its area density.
    pub fn sample(&self, meshes: &[Mesh], u: f64, v: f64, w: f64) -> (SurfacePoint, f64) {
        let x = u * self.total_area;
        let i = self.cdf.partition_point(|&c| c <= x).min(self.tris.len() - 1);
        let (mi, f) = self.tris[i];
        let su = v.sqrt();
        let bary = [1.0 - su, su * (1.0 - w), su * w];
        (SurfacePoint::on_face(mi, &meshes[mi], f, bary), 1.0 / self.total_area)
    }

    pub fn pdf(&self) -> f64 {
        1.0 / self.total_area
    }
}

/// A scene deformed to its current parameter values, with velocities,
/// acceleration structure and sampling tables.
#[derive(Clone, Debug)]
pub struct RenderScene {
    pub meshes: Vec<Mesh>,
    /// Per-mesh, per-vertex velocities, one column per channel.
    pub velocities: Vec<Vec<Velocity>>,
    pub materials: Vec<Material>,
    /// Radiance of emissive meshes.
    pub radiance: Vec<Option<f64>>,
    pub kernels: Vec<Option<CorrelatedTimeKernel>>,
    /// Global primitive index -> (mesh, face).
    pub prims: Vec<(u32, u32)>,
    pub prim_offset: Vec<u32>,
    pub bvh: Bvh,
    pub emitters: EmitterSampler,
    pub edges: EdgeTable,
    pub camera: Camera,
    /// Medium index of refraction with its channel partials.
    pub eta: Dual,
    pub c: f64,
    pub eps: f64,
    pub frames: FrameSpec,
    pub max_depth: usize,
    /// Parameter index of each derivative channel.
    pub channel_param: Vec<usize>,
    pub num_params: usize,
}

impl RenderScene {
    pub fn new(scene: &Scene) -> Result<RenderScene> {
        let desc = &scene.desc;
        let theta = scene.theta();
        let bindings = &scene.bindings;
        let mut meshes = Vec::with_capacity(scene.base_meshes.len());
        let mut velocities = Vec::with_capacity(scene.base_meshes.len());
        for (i, base) in scene.base_meshes.iter().enumerate() {
            let (pos, vel) = deform_points(&base.vertices, BindingTarget::Mesh(i), bindings, &theta);
            let mut mesh = base.clone();
            mesh.vertices = pos;
            if let Err(e) = mesh.update_normals() {
                // Name the parameter that deformed this mesh.
                if let Some(b) = bindings.iter().find(|b| b.target == BindingTarget::Mesh(i)) {
                    return Err(Error::InvalidParameter {
                        name: desc.parameters[b.parameter].name.clone(),
                        reason: e.to_string(),
                    });
                }
                return Err(e);
            }
            meshes.push(mesh);
            velocities.push(vel);
        }

        let (cam_pos, cam_vel) = deform_points(&[desc.sensor.position], BindingTarget::Sensor, bindings, &theta);
        let mut sensor = desc.sensor;
        let shift = cam_pos[0] - sensor.position;
        sensor.position = cam_pos[0];
        sensor.look_at = sensor.look_at + shift;
        let camera = Camera::new(&sensor, cam_vel[0])?;

        let mut eta = Dual::constant(desc.medium.eta);
        for (ch, b) in bindings.iter().enumerate() {
            if b.kind == BindingKind::RefractiveIndex {
                eta.v += theta[b.parameter];
                eta.g[ch] = 1.0;
            }
        }
        if !(eta.v > 0.0) {
            let name = bindings
                .iter()
                .find(|b| b.kind == BindingKind::RefractiveIndex)
                .map(|b| desc.parameters[b.parameter].name.clone())
                .unwrap_or_else(|| "medium".into());
            return Err(Error::InvalidParameter { name, reason: format!("refractive index {} is not positive", eta.v) });
        }

        let mut kernels = Vec::with_capacity(desc.meshes.len());
        let mut radiance = Vec::with_capacity(desc.meshes.len());
        for m in &desc.meshes {
            match &m.emission {
                Some(e) => {
                    kernels.push(Some(correlate(&e.profile, &desc.sensor.profile)?));
                    radiance.push(Some(e.radiance));
                }
                None => {
                    kernels.push(None);
                    radiance.push(None);
                }
            }
        }

        let mut prims = Vec::new();
        let mut prim_offset = Vec::with_capacity(meshes.len());
        let mut tris = Vec::new();
        for (mi, mesh) in meshes.iter().enumerate() {
            prim_offset.push(prims.len() as u32);
            for f in 0..mesh.triangles.len() {
                prims.push((mi as u32, f as u32));
                tris.push(mesh.triangle(f));
            }
        }
        let bvh = Bvh::build(tris);
        let emissive: Vec<bool> = radiance.iter().map(Option::is_some).collect();
        let emitters = EmitterSampler::build(&meshes, &emissive);
        let edges = EdgeTable::build(&meshes, desc.dihedral_tolerance);

        let mut lo = Vec3::splat(f64::INFINITY);
        let mut hi = Vec3::splat(f64::NEG_INFINITY);
        for m in &meshes {
            for &v in &m.vertices {
                lo = lo.min_elem(v);
                hi = hi.max_elem(v);
            }
        }
        let scale = if lo.is_finite() { (hi - lo).length().max(1e-12) } else { 1.0 };
        let eps = desc.ray_epsilon.unwrap_or(1e-4 * scale);

        Ok(RenderScene {
            meshes,
            velocities,
            materials: desc.meshes.iter().map(|m| m.material).collect(),
            radiance,
            kernels,
            prims,
            prim_offset,
            bvh,
            emitters,
            edges,
            camera,
            eta,
            c: desc.c,
            eps,
            frames: scene.frames(),
            max_depth: desc.estimator.max_depth,
            channel_param: bindings.iter().map(|b| b.parameter).collect(),
            num_params: desc.parameters.len(),
        })
    }

    pub fn num_channels(&self) -> usize {
        self.channel_param.len()
    }

    /// Surface point of a BVH hit.
    pub fn surface_point(&self, prim: u32, u: f64, v: f64) -> SurfacePoint {
        let (mi, f) = self.prims[prim as usize];
        let (mi, f) = (mi as usize, f as usize);
        SurfacePoint::on_face(mi, &self.meshes[mi], f, [1.0 - u - v, u, v])
    }

    pub fn global_prim(&self, mesh: usize, face: usize) -> u32 {
        self.prim_offset[mesh] + face as u32
    }
}
