//! The manifold setting: triangle meshes, their Laplacian eigenbases, and
//! Slepian functions and wavelets built on top of them.

mod io;
mod laplacian;
mod spectral;

pub use io::{load_mesh, parse_obj, parse_off, read_vertex_region, write_off};
pub use laplacian::{graph_laplacian, mesh_laplacian, LaplacianKind, SparseSymmetric};
pub use spectral::{mesh_basis, mesh_slepian, mesh_wavelets, MeshBasis, MeshSlepianBasis};

use std::collections::HashMap;

use crate::{Error, Result};

pub type Point = [f64; 3];

/// Triangle mesh with lumped vertex weights (one third of the incident face area).
#[derive(Debug, Clone, PartialEq)]
pub struct Mesh {
    vertices: Vec<Point>,
    faces: Vec<[usize; 3]>,
    vertex_weights: Vec<f64>,
}

/// Faces at or below this area are rejected as degenerate.
pub const MIN_FACE_AREA: f64 = 1e-12;

pub(crate) fn sub(a: Point, b: Point) -> Point {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

pub(crate) fn dot(a: Point, b: Point) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

pub(crate) fn cross(a: Point, b: Point) -> Point {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

fn norm(a: Point) -> f64 {
    dot(a, a).sqrt()
}

impl Mesh {
    /// Validates faces and computes lumped weights.
    ///
    /// In strict mode every vertex must touch at least one face.
    pub fn new(vertices: Vec<Point>, faces: Vec<[usize; 3]>, strict: bool) -> Result<Self> {
        let n = vertices.len();
        let mut vertex_weights = vec![0.0; n];
        for (f, face) in faces.iter().enumerate() {
            if let Some(&bad) = face.iter().find(|&&v| v >= n) {
                return Err(Error::domain(format!("face {f} references vertex {bad} of {n}")));
            }
            let area = triangle_area(vertices[face[0]], vertices[face[1]], vertices[face[2]]);
            if !(area > MIN_FACE_AREA) {
                return Err(Error::domain(format!("face {f} is degenerate (area {area:e})")));
            }
            for &v in face {
                vertex_weights[v] += area / 3.0;
            }
        }
        if strict {
            if let Some(v) = vertex_weights.iter().position(|&w| w <= 0.0) {
                return Err(Error::domain(format!("vertex {v} has no incident face")));
            }
        }
        Ok(Mesh {
            vertices,
            faces,
            vertex_weights,
        })
    }

    pub fn vertices(&self) -> &[Point] {
        &self.vertices
    }

    pub fn faces(&self) -> &[[usize; 3]] {
        &self.faces
    }

    pub fn vertex_weights(&self) -> &[f64] {
        &self.vertex_weights
    }

    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    pub fn total_area(&self) -> f64 {
        self.faces
            .iter()
            .map(|f| triangle_area(self.vertices[f[0]], self.vertices[f[1]], self.vertices[f[2]]))
            .sum()
    }

    /// Unit icosphere: the icosahedron with each face split into four,
    /// `subdivisions` times, vertices projected to the sphere.
    /// `10·4^s + 2` vertices (12, 42, 162, 642, ...).
    pub fn icosphere(subdivisions: u32) -> Self {
        let t = (1.0 + 5f64.sqrt()) / 2.0;
        let mut vertices: Vec<Point> = [
            [-1.0, t, 0.0],
            [1.0, t, 0.0],
            [-1.0, -t, 0.0],
            [1.0, -t, 0.0],
            [0.0, -1.0, t],
            [0.0, 1.0, t],
            [0.0, -1.0, -t],
            [0.0, 1.0, -t],
            [t, 0.0, -1.0],
            [t, 0.0, 1.0],
            [-t, 0.0, -1.0],
            [-t, 0.0, 1.0],
        ]
        .iter()
        .map(|&p| normalize(p))
        .collect();
        let mut faces: Vec<[usize; 3]> = vec![
            [0, 11, 5],
            [0, 5, 1],
            [0, 1, 7],
            [0, 7, 10],
            [0, 10, 11],
            [1, 5, 9],
            [5, 11, 4],
            [11, 10, 2],
            [10, 7, 6],
            [7, 1, 8],
            [3, 9, 4],
            [3, 4, 2],
            [3, 2, 6],
            [3, 6, 8],
            [3, 8, 9],
            [4, 9, 5],
            [2, 4, 11],
            [6, 2, 10],
            [8, 6, 7],
            [9, 8, 1],
        ];
        for _ in 0..subdivisions {
            let mut midpoints: HashMap<(usize, usize), usize> = HashMap::new();
            let mut midpoint = |a: usize, b: usize, vertices: &mut Vec<Point>| {
                let key = (a.min(b), a.max(b));
                *midpoints.entry(key).or_insert_with(|| {
                    let (p, q) = (vertices[a], vertices[b]);
                    vertices.push(normalize([p[0] + q[0], p[1] + q[1], p[2] + q[2]]));
                    vertices.len() - 1
                })
            };
            let mut next = Vec::with_capacity(faces.len() * 4);
            for [a, b, c] in faces {
                let ab = midpoint(a, b, &mut vertices);
                let bc = midpoint(b, c, &mut vertices);
                let ca = midpoint(c, a, &mut vertices);
                next.extend([[a, ab, ca], [b, bc, ab], [c, ca, bc], [ab, bc, ca]]);
            }
            faces = next;
        }
        Mesh::new(vertices, faces, true).expect("icosphere is well formed")
    }
}

fn normalize(p: Point) -> Point {
    let n = norm(p);
    [p[0] / n, p[1] / n, p[2] / n]
}

pub fn triangle_area(a: Point, b: Point, c: Point) -> f64 {
    0.5 * norm(cross(sub(b, a), sub(c, a)))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unit_triangle_weights() {
        // legs √2 give area exactly 1
        let s = 2f64.sqrt();
        let m = Mesh::new(vec![[0.0, 0.0, 0.0], [s, 0.0, 0.0], [0.0, s, 0.0]], vec![[0, 1, 2]], true).unwrap();
        for w in m.vertex_weights() {
            assert!((w - 1.0 / 3.0).abs() < 1e-15);
        }
    }

    #[test]
    fn tetrahedron_total_weight() {
        let p = |x: f64, y: f64, z: f64| [x / 8f64.sqrt(), y / 8f64.sqrt(), z / 8f64.sqrt()];
        let v = vec![p(1.0, 1.0, 1.0), p(1.0, -1.0, -1.0), p(-1.0, 1.0, -1.0), p(-1.0, -1.0, 1.0)];
        let m = Mesh::new(v, vec![[0, 1, 2], [0, 3, 1], [0, 2, 3], [1, 3, 2]], true).unwrap();
        let total: f64 = m.vertex_weights().iter().sum();
        assert!((total - 3f64.sqrt()).abs() < 1e-12);
        assert!((m.total_area() - 3f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn validation() {
        let v = vec![[0.0, 0.0, 0.0], [1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [5.0, 5.0, 5.0]];
        assert!(Mesh::new(v.clone(), vec![[0, 1, 2]], true).is_err());
        assert!(Mesh::new(v.clone(), vec![[0, 1, 2]], false).is_ok());
        assert!(Mesh::new(v.clone(), vec![], true).is_err());
        assert!(Mesh::new(v.clone(), vec![[0, 1, 7]], false).is_err());
        assert!(Mesh::new(v, vec![[0, 1, 1]], false).is_err());
    }

    #[test]
    fn icosphere_sizes() {
        assert_eq!(Mesh::icosphere(0).len(), 12);
        assert_eq!(Mesh::icosphere(1).len(), 42);
        let m = Mesh::icosphere(2);
        assert_eq!(m.len(), 162);
        assert_eq!(m.faces().len(), 320);
        assert!(m.vertices().iter().all(|p| (norm(*p) - 1.0).abs() < 1e-14));
    }
}
