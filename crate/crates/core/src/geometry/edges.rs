use crate::geometry::mesh::{Edge, Mesh};
use crate::vec::Vec3;

/// Default dihedral tolerance separating sharp from smooth edges (radians).
pub const DEFAULT_DIHEDRAL_TOL: f64 = 1e-4;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum EdgeKind {
    Boundary,
    Sharp,
    Smooth,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EdgeClass {
    pub kind: EdgeKind,
    /// Index into `Mesh::edges`.
    pub edge: usize,
    /// Normals of the adjacent faces; the second repeats the first on boundary edges.
    pub normals: [Vec3; 2],
}

/// Angle between the normals of the faces adjacent to `e`.
pub fn dihedral_angle(mesh: &Mesh, e: &Edge) -> f64 {
    if e.face_count() < 2 {
        return 0.0;
    }
    let a = mesh.face_normals[e.faces[0] as usize];
    let b = mesh.face_normals[e.faces[1] as usize];
    // atan2 keeps precision near 0 and pi.
    a.cross(b).length().atan2(a.dot(b))
}

pub fn classify_edges(mesh: &Mesh, dihedral_tol: f64) -> Vec<EdgeClass> {
    mesh.edges
        .iter()
        .enumerate()
        .map(|(i, e)| {
            let n0 = mesh.face_normals[e.faces[0] as usize];
            if e.face_count() == 1 {
                return EdgeClass { kind: EdgeKind::Boundary, edge: i, normals: [n0, n0] };
            }
            let n1 = mesh.face_normals[e.faces[1] as usize];
            let kind = if dihedral_angle(mesh, e) > dihedral_tol { EdgeKind::Sharp } else { EdgeKind::Smooth };
            EdgeClass { kind, edge: i, normals: [n0, n1] }
        })
        .collect()
}

/// Whether the segment `x -> y`, assumed to pass through the edge, grazes it
/// from outside.
///
/// Interior silhouettes of smooth surfaces have zero measure on flat meshes
/// and are never reported.
pub fn is_silhouette(edge: &EdgeClass, x: Vec3, y: Vec3) -> bool {
    match edge.kind {
        EdgeKind::Boundary => true,
        EdgeKind::Smooth => false,
        EdgeKind::Sharp => {
            let d = y - x;
            edge.normals[0].dot(d) * edge.normals[1].dot(d) <= 0.0
        }
    }
}
