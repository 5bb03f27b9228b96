use std::collections::BTreeMap;

use nalgebra::DMatrix;
use rayon::prelude::*;

use super::{cross, dot, sub, Mesh};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum LaplacianKind {
    /// `D − A` on the edge graph.
    Combinatorial,
    /// Half-cotangent edge weights.
    #[default]
    Cotangent,
}

/// Symmetric sparse matrix with sorted rows.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseSymmetric {
    rows: Vec<Vec<(usize, f64)>>,
}

impl SparseSymmetric {
    pub fn dim(&self) -> usize {
        self.rows.len()
    }

    pub fn row(&self, i: usize) -> &[(usize, f64)] {
        &self.rows[i]
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.rows[i]
            .binary_search_by_key(&j, |&(c, _)| c)
            .map_or(0.0, |k| self.rows[i][k].1)
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let n = self.dim();
        let mut m = DMatrix::zeros(n, n);
        for (i, row) in self.rows.iter().enumerate() {
            for &(j, v) in row {
                m[(i, j)] = v;
            }
        }
        m
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        self.rows
            .iter()
            .map(|row| row.iter().map(|&(j, v)| v * x[j]).sum())
            .collect()
    }

    /// Largest `|A_ij − A_ji|`.
    pub fn asymmetry(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for (i, row) in self.rows.iter().enumerate() {
            for &(j, v) in row {
                worst = worst.max((v - self.get(j, i)).abs());
            }
        }
        worst
    }

    /// Rows sum to zero with diagonal `−Σ_{j≠i} A_ij`, from accumulated
    /// off-diagonal edge weights, merged in input order.
    fn from_edge_weights(n: usize, weights: impl IntoIterator<Item = (usize, usize, f64)>) -> Self {
        let mut acc: Vec<BTreeMap<usize, f64>> = vec![BTreeMap::new(); n];
        for (i, j, w) in weights {
            *acc[i].entry(j).or_insert(0.0) -= w;
            *acc[j].entry(i).or_insert(0.0) -= w;
        }
        let rows = acc
            .into_iter()
            .enumerate()
            .map(|(i, mut row)| {
                let diag: f64 = -row.values().sum::<f64>();
                row.insert(i, diag);
                row.into_iter().collect()
            })
            .collect();
        SparseSymmetric { rows }
    }
}

/// Combinatorial Laplacian of a graph given by its edges (duplicates ignored).
pub fn graph_laplacian(n: usize, edges: &[(usize, usize)]) -> Result<SparseSymmetric> {
    let mut unique: Vec<(usize, usize)> = Vec::with_capacity(edges.len());
    for &(a, b) in edges {
        if a >= n || b >= n {
            return Err(Error::domain(format!("edge ({a}, {b}) outside {n} vertices")));
        }
        if a == b {
            return Err(Error::domain(format!("self-loop at vertex {a}")));
        }
        unique.push((a.min(b), a.max(b)));
    }
    unique.sort_unstable();
    unique.dedup();
    Ok(SparseSymmetric::from_edge_weights(n, unique.into_iter().map(|(a, b)| (a, b, 1.0))))
}

fn cot(a: [f64; 3], b: [f64; 3]) -> f64 {
    let c = cross(a, b);
    dot(a, b) / dot(c, c).sqrt()
}

/// Per-face element contributions are evaluated in parallel and merged
/// sequentially in face order, so the result is schedule-independent.
pub fn mesh_laplacian(mesh: &Mesh, kind: LaplacianKind) -> Result<SparseSymmetric> {
    let n = mesh.len();
    match kind {
        LaplacianKind::Combinatorial => {
            let edges: Vec<(usize, usize)> = mesh
                .faces()
                .iter()
                .flat_map(|&[a, b, c]| [(a, b), (b, c), (c, a)])
                .collect();
            graph_laplacian(n, &edges)
        }
        LaplacianKind::Cotangent => {
            let v = mesh.vertices();
            let elements: Vec<[(usize, usize, f64); 3]> = mesh
                .faces()
                .par_iter()
                .map(|&[a, b, c]| {
                    let (pa, pb, pc) = (v[a], v[b], v[c]);
                    // the weight of each edge is half the cotangent of the opposite angle
                    [
                        (b, c, 0.5 * cot(sub(pb, pa), sub(pc, pa))),
                        (c, a, 0.5 * cot(sub(pc, pb), sub(pa, pb))),
                        (a, b, 0.5 * cot(sub(pa, pc), sub(pb, pc))),
                    ]
                })
                .collect();
            Ok(SparseSymmetric::from_edge_weights(n, elements.into_iter().flatten()))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn path_graph() {
        let l = graph_laplacian(3, &[(0, 1), (1, 2)]).unwrap();
        let expect = DMatrix::from_row_slice(3, 3, &[1.0, -1.0, 0.0, -1.0, 2.0, -1.0, 0.0, -1.0, 1.0]);
        assert_eq!(l.to_dense(), expect);
        assert!(graph_laplacian(3, &[(0, 3)]).is_err());
        assert!(graph_laplacian(3, &[(1, 1)]).is_err());
        assert_eq!(graph_laplacian(3, &[(0, 1), (1, 0), (1, 2)]).unwrap(), l);
    }

    #[test]
    fn rows_sum_to_zero() {
        let m = Mesh::icosphere(2);
        for kind in [LaplacianKind::Combinatorial, LaplacianKind::Cotangent] {
            let l = mesh_laplacian(&m, kind).unwrap();
            assert!(l.asymmetry() <= 1e-12);
            for r in l.mul_vec(&vec![1.0; m.len()]) {
                assert!(r.abs() <= 1e-12);
            }
        }
    }

    #[test]
    fn cotangent_right_triangle() {
        // right angle at vertex 0, 45° at 1 and 2
        let m = Mesh::new(vec![[0.0, 0.0, 0.0], [1.0, 0.0, 0.0], [0.0, 1.0, 0.0]], vec![[0, 1, 2]], true).unwrap();
        let l = mesh_laplacian(&m, LaplacianKind::Cotangent).unwrap();
        assert!(l.get(1, 2).abs() < 1e-15);
        assert!((l.get(0, 1) + 0.5).abs() < 1e-15);
        assert!((l.get(0, 2) + 0.5).abs() < 1e-15);
        assert!((l.get(0, 0) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn assembly_is_schedule_independent() {
        let m = Mesh::icosphere(2);
        let one = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
        let four = rayon::ThreadPoolBuilder::new().num_threads(4).build().unwrap();
        let a = one.install(|| mesh_laplacian(&m, LaplacianKind::Cotangent).unwrap());
        let b = four.install(|| mesh_laplacian(&m, LaplacianKind::Cotangent).unwrap());
        assert_eq!(a, b);
    }
}
