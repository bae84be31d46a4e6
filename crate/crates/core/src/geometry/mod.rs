//! Triangle-mesh scene geometry: adjacency, edge classes, silhouettes,
//! parameter bindings and material-form Jacobians.

pub mod binding;
pub mod bvh;
pub mod edges;
pub mod mesh;
pub mod obj;

pub use binding::{
    deform_points, jacobian_and_derivative, vertex_velocity, BindingKind, BindingTarget, ParameterBinding,
    SurfacePoint,
};
pub use bvh::{Bvh, Hit, Ray};
pub use edges::{classify_edges, dihedral_angle, is_silhouette, EdgeClass, EdgeKind, DEFAULT_DIHEDRAL_TOL};
pub use mesh::{quad, unit_cube, Edge, Mesh, NO_FACE};
