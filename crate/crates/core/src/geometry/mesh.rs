use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::vec::Vec3;

/// Marker for a missing second face on a boundary edge.
pub const NO_FACE: u32 = u32::MAX;

/// Undirected edge with its adjacent faces.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Edge {
    pub v: [u32; 2],
    /// `faces[1] == NO_FACE` for boundary edges.
    pub faces: [u32; 2],
}

impl Edge {
    pub fn face_count(&self) -> usize {
        if self.faces[1] == NO_FACE {
            1
        } else {
            2
        }
    }
}

/// Indexed triangle mesh with face normals and edge adjacency.
#[derive(Clone, Debug)]
pub struct Mesh {
    pub name: String,
    pub vertices: Vec<Vec3>,
    pub triangles: Vec<[u32; 3]>,
    pub face_normals: Vec<Vec3>,
    pub edges: Vec<Edge>,
}

impl Mesh {
    /// Validates indices and manifoldness, then builds normals and edges.
    pub fn new(name: impl Into<String>, vertices: Vec<Vec3>, triangles: Vec<[u32; 3]>) -> Result<Mesh> {
        let name = name.into();
        if triangles.is_empty() {
            return Err(Error::InvalidMesh(format!("{name}: no triangles")));
        }
        for (i, v) in vertices.iter().enumerate() {
            if !v.is_finite() {
                return Err(Error::InvalidMesh(format!("{name}: vertex {i} is not finite")));
            }
        }
        for (f, tri) in triangles.iter().enumerate() {
            for &i in tri {
                if i as usize >= vertices.len() {
                    return Err(Error::InvalidMesh(format!(
                        "{name}: triangle {f} references vertex {i} (only {} vertices)",
                        vertices.len()
                    )));
                }
            }
            if tri[0] == tri[1] || tri[1] == tri[2] || tri[0] == tri[2] {
                return Err(Error::InvalidMesh(format!("{name}: triangle {f} repeats a vertex")));
            }
        }
        let edges = build_edges(&name, &triangles)?;
        let mut mesh = Mesh { name, vertices, triangles, face_normals: Vec::new(), edges };
        mesh.update_normals()?;
        Ok(mesh)
    }

    /// Recomputes face normals from the current vertex positions.
    pub fn update_normals(&mut self) -> Result<()> {
        self.face_normals.clear();
        for (f, tri) in self.triangles.iter().enumerate() {
            let [a, b, c] = tri.map(|i| self.vertices[i as usize]);
            let n = (b - a).cross(c - a);
            let len = n.length();
            // Degenerate or inverted-to-zero faces are rejected.
            if !(len > 1e-300) || !len.is_finite() {
                return Err(Error::InvalidMesh(format!("{}: triangle {f} has zero area", self.name)));
            }
            self.face_normals.push(n * (1.0 / len));
        }
        Ok(())
    }

    pub fn triangle(&self, f: usize) -> [Vec3; 3] {
        self.triangles[f].map(|i| self.vertices[i as usize])
    }

    pub fn area(&self, f: usize) -> f64 {
        let [a, b, c] = self.triangle(f);
        0.5 * (b - a).cross(c - a).length()
    }

    pub fn edge_length(&self, e: usize) -> f64 {
        let [a, b] = self.edges[e].v;
        (self.vertices[b as usize] - self.vertices[a as usize]).length()
    }

    /// Vertex of face `f` that is not on edge `e`.
    pub fn opposite_vertex(&self, f: usize, e: &Edge) -> Vec3 {
        let tri = self.triangles[f];
        let i = tri.iter().copied().find(|&i| i != e.v[0] && i != e.v[1]).unwrap_or(tri[0]);
        self.vertices[i as usize]
    }

    pub fn bounds(&self) -> (Vec3, Vec3) {
        let mut lo = Vec3::splat(f64::INFINITY);
        let mut hi = Vec3::splat(f64::NEG_INFINITY);
        for &v in &self.vertices {
            lo = lo.min_elem(v);
            hi = hi.max_elem(v);
        }
        (lo, hi)
    }
}

fn build_edges(name: &str, triangles: &[[u32; 3]]) -> Result<Vec<Edge>> {
    let mut index: HashMap<(u32, u32), usize> = HashMap::new();
    let mut edges: Vec<Edge> = Vec::new();
    for (f, tri) in triangles.iter().enumerate() {
        for k in 0..3 {
            let (a, b) = (tri[k], tri[(k + 1) % 3]);
            let key = (a.min(b), a.max(b));
            match index.get(&key) {
                Some(&e) => {
                    if edges[e].faces[1] != NO_FACE {
                        return Err(Error::InvalidMesh(format!(
                            "{name}: edge ({}, {}) is shared by more than two faces",
                            key.0, key.1
                        )));
                    }
                    edges[e].faces[1] = f as u32;
                }
                None => {
                    index.insert(key, edges.len());
                    edges.push(Edge { v: [key.0, key.1], faces: [f as u32, NO_FACE] });
                }
            }
        }
    }
    Ok(edges)
}

/// Unit cube `[0,1]^3` with outward-facing normals (12 triangles).
pub fn unit_cube(name: &str) -> Mesh {
    let v = |x: f64, y: f64, z: f64| Vec3::new(x, y, z);
    let vertices = vec![
        v(0.0, 0.0, 0.0),
        v(1.0, 0.0, 0.0),
        v(1.0, 1.0, 0.0),
        v(0.0, 1.0, 0.0),
        v(0.0, 0.0, 1.0),
        v(1.0, 0.0, 1.0),
        v(1.0, 1.0, 1.0),
        v(0.0, 1.0, 1.0),
    ];
    let triangles = vec![
        [0, 2, 1],
        [0, 3, 2],
        [4, 5, 6],
        [4, 6, 7],
        [0, 1, 5],
        [0, 5, 4],
        [3, 7, 6],
        [3, 6, 2],
        [0, 4, 7],
        [0, 7, 3],
        [1, 2, 6],
        [1, 6, 5],
    ];
    Mesh::new(name, vertices, triangles).expect("cube is valid")
}

/// Axis-aligned quad `center ± half_u ± half_v`, normal along `half_u × half_v`.
pub fn quad(name: &str, center: Vec3, half_u: Vec3, half_v: Vec3) -> Mesh {
    let vertices = vec![
        center - half_u - half_v,
        center + half_u - half_v,
        center + half_u + half_v,
        center - half_u + half_v,
    ];
    Mesh::new(name, vertices, vec![[0, 1, 2], [0, 2, 3]]).expect("quad is valid")
}
