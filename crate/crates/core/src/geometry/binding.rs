//! Scene parameters and the vertex velocity fields they induce.
//!
//! Each binding owns one derivative channel. A parameter may be bound to
//! several targets; its gradient is the sum of its bindings' channels.

use serde::{Deserialize, Serialize};

use crate::dual::{Dual, Real, MAX_CHANNELS};
use crate::geometry::mesh::Mesh;
use crate::vec::{DVec3, Vec3, Velocity, ZERO_VELOCITY};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum BindingKind {
    Translation { axis: Vec3 },
    Rotation { point: Vec3, axis: Vec3 },
    RefractiveIndex,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BindingTarget {
    Mesh(usize),
    Sensor,
    Medium,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ParameterBinding {
    /// Index of the scene parameter driving this binding.
    pub parameter: usize,
    pub target: BindingTarget,
    pub kind: BindingKind,
}

/// Point on a triangle in barycentric form.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SurfacePoint {
    pub position: Vec3,
    pub normal: Vec3,
    pub mesh: usize,
    /// Face index local to `mesh`.
    pub face: usize,
    pub bary: [f64; 3],
}

impl SurfacePoint {
    pub fn on_face(mesh_id: usize, mesh: &Mesh, face: usize, bary: [f64; 3]) -> SurfacePoint {
        let [a, b, c] = mesh.triangle(face);
        SurfacePoint {
            position: a * bary[0] + b * bary[1] + c * bary[2],
            normal: mesh.face_normals[face],
            mesh: mesh_id,
            face,
            bary,
        }
    }
}

/// Rotates `p` about the line through `point` along unit `axis`, expressed as
/// an offset from `p` so that a zero angle leaves `p` bit-identical.
pub fn rotate_about<T: Real>(p: V<T>, point: Vec3, axis: Vec3, angle: T) -> V<T> {
    let k = V::<T>::cst(axis);
    let r = p - V::cst(point);
    let (s, c) = (angle.sin(), angle.cos());
    let one_minus_c = T::one() - c;
    let kr = k.cross(r);
    let kdr = k.dot(r);
    p + r.scale(c - 1.0) + kr.scale(s) + k.scale(kdr * one_minus_c)
}

type V<T> = crate::vec::V3<T>;

/// Applies the geometric bindings targeting one point set, in order.
///
/// Returns deformed positions and per-channel velocities `dx/dθ`.
pub fn deform_points(
    base: &[Vec3],
    target: BindingTarget,
    bindings: &[ParameterBinding],
    theta: &[f64],
) -> (Vec<Vec3>, Vec<Velocity>) {
    let mut pos = Vec::with_capacity(base.len());
    let mut vel = Vec::with_capacity(base.len());
    for &p in base {
        let mut x = DVec3::cst(p);
        for (channel, b) in bindings.iter().enumerate() {
            if b.target != target {
                continue;
            }
            let t = Dual::variable(theta[b.parameter], channel);
            match b.kind {
                BindingKind::Translation { axis } => {
                    x = x + DVec3::cst(axis).scale(t);
                }
                BindingKind::Rotation { point, axis } => {
                    x = rotate_about(x, point, axis.normalized(), t);
                }
                BindingKind::RefractiveIndex => {}
            }
        }
        let mut v = ZERO_VELOCITY;
        for (c, slot) in v.iter_mut().enumerate() {
            *slot = x.grad(c);
        }
        pos.push(x.val());
        vel.push(v);
    }
    (pos, vel)
}

/// Barycentric interpolation of the face's vertex velocities, one column per
/// channel. Under barycentric parametrization this is the material derivative
/// of the point.
pub fn vertex_velocity(p: &SurfacePoint, mesh: &Mesh, velocities: &[Velocity]) -> Velocity {
    let tri = mesh.triangles[p.face];
    let mut out = ZERO_VELOCITY;
    for (k, &vi) in tri.iter().enumerate() {
        for c in 0..MAX_CHANNELS {
            out[c] += velocities[vi as usize][c] * p.bary[k];
        }
    }
    out
}

/// Face vertices lifted with their velocities.
pub fn lifted_triangle<T: Real>(mesh: &Mesh, velocities: &[Velocity], face: usize) -> [V<T>; 3] {
    mesh.triangles[face].map(|i| V::lift(mesh.vertices[i as usize], &velocities[i as usize]))
}

/// Barycentric-map Jacobian (twice the triangle area) with its derivative.
pub fn jacobian_and_derivative(p: &SurfacePoint, mesh: &Mesh, velocities: &[Velocity]) -> Dual {
    let [a, b, c] = lifted_triangle::<Dual>(mesh, velocities, p.face);
    (b - a).cross(c - a).length()
}
