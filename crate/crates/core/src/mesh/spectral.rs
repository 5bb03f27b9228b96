use nalgebra::DMatrix;

use super::SparseSymmetric;
use crate::eigen::{ascending_real, concentration_spectrum, hermitian_eigen, Eigenpairs, RESIDUAL_TOLERANCE};
use crate::wavelets::{build_tiling, TilingFunctions, TilingParams};
use crate::{Error, Result};

/// First `K` eigenpairs of `L u = μ W u`, `W` the diagonal vertex weights.
#[derive(Debug, Clone)]
pub struct MeshBasis {
    weights: Vec<f64>,
    eigenvalues: Vec<f64>,
    /// `n × K`, columns weighted-orthonormal.
    vectors: DMatrix<f64>,
}

impl MeshBasis {
    pub fn size(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    pub fn vectors(&self) -> &DMatrix<f64> {
        &self.vectors
    }

    pub fn vertex_count(&self) -> usize {
        self.weights.len()
    }

    /// Per-vertex values of basis function `k`.
    pub fn function(&self, k: usize) -> Vec<f64> {
        self.vectors.column(k).iter().copied().collect()
    }

    /// `max |Uᵀ W U − I|`.
    pub fn orthonormality_defect(&self) -> f64 {
        let k = self.size();
        let mut worst: f64 = 0.0;
        for a in 0..k {
            for b in a..k {
                let g: f64 = (0..self.vertex_count())
                    .map(|v| self.weights[v] * self.vectors[(v, a)] * self.vectors[(v, b)])
                    .sum();
                let target = if a == b { 1.0 } else { 0.0 };
                worst = worst.max((g - target).abs());
            }
        }
        worst
    }
}

/// Solves via the symmetric reduction `W^{−1/2} L W^{−1/2}`.
///
/// Vertices with zero weight are allowed only when `strict` is off; they are
/// dropped from the solve and their basis values are zero.
pub fn mesh_basis(laplacian: &SparseSymmetric, weights: &[f64], k: usize, strict: bool) -> Result<MeshBasis> {
    let n = laplacian.dim();
    if weights.len() != n {
        return Err(Error::ShapeMismatch {
            expected: n,
            found: weights.len(),
        });
    }
    if let Some(v) = weights.iter().position(|&w| w < 0.0 || !w.is_finite() || (strict && w == 0.0)) {
        return Err(Error::domain(format!("vertex {v} has non-positive weight {}", weights[v])));
    }
    let active: Vec<usize> = (0..n).filter(|&v| weights[v] > 0.0).collect();
    if k == 0 || k > active.len() {
        return Err(Error::domain(format!("basis size {k} outside [1, {}]", active.len())));
    }
    let scale: Vec<f64> = active.iter().map(|&v| 1.0 / weights[v].sqrt()).collect();
    let m = active.len();
    let mut reduced = DMatrix::zeros(m, m);
    for (a, &va) in active.iter().enumerate() {
        for (b, &vb) in active.iter().enumerate() {
            reduced[(a, b)] = scale[a] * laplacian.get(va, vb) * scale[b];
        }
    }
    let pairs = ascending_real(hermitian_eigen(&reduced)?);
    let mut vectors = DMatrix::zeros(n, k);
    for c in 0..k {
        for (a, &va) in active.iter().enumerate() {
            vectors[(va, c)] = scale[a] * pairs.vectors[(a, c)];
        }
    }
    Ok(MeshBasis {
        weights: weights.to_vec(),
        eigenvalues: pairs.values[..k].to_vec(),
        vectors,
    })
}

/// Slepian functions of a vertex region in the span of a mesh basis.
#[derive(Debug, Clone)]
pub struct MeshSlepianBasis {
    region: Vec<usize>,
    matrix: DMatrix<f64>,
    eigenvalues: Vec<f64>,
    raw_eigenvalues: Vec<f64>,
    /// `K × K`, column `p` holds the basis coefficients of Slepian function `p`.
    vectors: DMatrix<f64>,
    functions: DMatrix<f64>,
    shannon: f64,
}

impl MeshSlepianBasis {
    pub fn region(&self) -> &[usize] {
        &self.region
    }

    /// The concentration matrix `C`.
    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    pub fn raw_eigenvalues(&self) -> &[f64] {
        &self.raw_eigenvalues
    }

    pub fn vectors(&self) -> &DMatrix<f64> {
        &self.vectors
    }

    /// `N = K · Σ_{v∈R} w_v / Σ_v w_v`.
    pub fn shannon(&self) -> f64 {
        self.shannon
    }

    pub fn len(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn is_empty(&self) -> bool {
        self.eigenvalues.is_empty()
    }

    /// Per-vertex values of Slepian function `p`.
    pub fn function(&self, p: usize) -> Vec<f64> {
        self.functions.column(p).iter().copied().collect()
    }

    /// Per-vertex field of Slepian coefficients `f_p`.
    pub fn synthesize(&self, coefficients: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.functions.nrows()];
        for (p, &c) in coefficients.iter().enumerate().take(self.len()) {
            for (o, v) in out.iter_mut().zip(self.functions.column(p).iter()) {
                *o += c * v;
            }
        }
        out
    }
}

/// `C_{kk′} = Σ_{v∈R} w_v u_k(v) u_{k′}(v)`, decomposed with the same
/// ordering, clamping, sign and residual rules as on the sphere.
pub fn mesh_slepian(basis: &MeshBasis, region: &[usize]) -> Result<MeshSlepianBasis> {
    if region.is_empty() {
        return Err(Error::domain("mesh Slepian region is empty"));
    }
    let mut region = region.to_vec();
    region.sort_unstable();
    region.dedup();
    if let Some(&bad) = region.iter().find(|&&v| v >= basis.vertex_count()) {
        return Err(Error::domain(format!(
            "region vertex {bad} outside {} vertices",
            basis.vertex_count()
        )));
    }
    let k = basis.size();
    let u = &basis.vectors;
    let mut c = DMatrix::zeros(k, k);
    for a in 0..k {
        for b in a..k {
            let s: f64 = region.iter().map(|&v| basis.weights[v] * u[(v, a)] * u[(v, b)]).sum();
            c[(a, b)] = s;
            c[(b, a)] = s;
        }
    }
    let spectrum = concentration_spectrum(hermitian_eigen(&c)?)?;
    let Eigenpairs { values, vectors } = spectrum.pairs;
    let region_weight: f64 = region.iter().map(|&v| basis.weights[v]).sum();
    let total_weight: f64 = basis.weights.iter().sum();
    let functions = u * &vectors;
    debug_assert!(RESIDUAL_TOLERANCE > 0.0);
    Ok(MeshSlepianBasis {
        region,
        matrix: c,
        eigenvalues: values,
        raw_eigenvalues: spectrum.raw,
        vectors,
        functions,
        shannon: k as f64 * region_weight / total_weight,
    })
}

/// Tiling of the mesh Slepian rank line, `T = ⌈N⌉` (at most `K`).
pub fn mesh_wavelets(msb: &MeshSlepianBasis, b: f64, j_min: u32) -> Result<TilingFunctions> {
    let t = (msb.shannon.ceil() as usize).min(msb.len());
    build_tiling(TilingParams::new(b, j_min, t)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::functions::SplitMix64;
    use crate::mesh::{graph_laplacian, mesh_laplacian, LaplacianKind, Mesh};
    use crate::wavelets::{analysis, synthesis};
    use num_complex::Complex64;

    fn path_basis() -> MeshBasis {
        let l = graph_laplacian(3, &[(0, 1), (1, 2)]).unwrap();
        mesh_basis(&l, &[1.0; 3], 3, true).unwrap()
    }

    #[test]
    fn path_spectrum() {
        let b = path_basis();
        for (v, e) in b.eigenvalues().iter().zip([0.0, 1.0, 3.0]) {
            assert!((v - e).abs() < 1e-10);
        }
        let u0 = b.function(0);
        assert!(u0.iter().all(|x| (x - u0[0]).abs() < 1e-12 && *x > 0.0));
    }

    #[test]
    fn basis_errors() {
        let l = graph_laplacian(3, &[(0, 1), (1, 2)]).unwrap();
        assert!(mesh_basis(&l, &[1.0; 3], 0, true).is_err());
        assert!(mesh_basis(&l, &[1.0; 3], 4, true).is_err());
        assert!(mesh_basis(&l, &[1.0, 0.0, 1.0], 2, true).is_err());
        assert!(mesh_basis(&l, &[1.0; 2], 2, true).is_err());
    }

    #[test]
    fn isolated_vertex_in_lenient_mode() {
        let m = Mesh::new(
            vec![[0.0, 0.0, 0.0], [1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [3.0, 3.0, 3.0]],
            vec![[0, 1, 2]],
            false,
        )
        .unwrap();
        let l = mesh_laplacian(&m, LaplacianKind::Cotangent).unwrap();
        let b = mesh_basis(&l, m.vertex_weights(), 3, false).unwrap();
        assert!(b.eigenvalues()[0].abs() < 1e-12);
        assert!(b.vectors().row(3).iter().all(|&x| x == 0.0));
        assert!(mesh_basis(&l, m.vertex_weights(), 4, false).is_err());
    }

    #[test]
    fn icosphere_orthonormality() {
        let m = Mesh::icosphere(2);
        let l = mesh_laplacian(&m, LaplacianKind::Cotangent).unwrap();
        let b = mesh_basis(&l, m.vertex_weights(), 50, true).unwrap();
        assert!(b.orthonormality_defect() <= 1e-8);
        assert!(b.eigenvalues()[0].abs() < 1e-9);
        let u0 = b.function(0);
        assert!(u0.iter().all(|x| (x - u0[0]).abs() < 1e-9));
        assert!(b.eigenvalues().windows(2).all(|w| w[0] <= w[1]));
    }

    #[test]
    fn zero_multiplicity_counts_components() {
        let mut a = Mesh::icosphere(1);
        let shifted: Vec<[f64; 3]> = a.vertices().iter().map(|p| [p[0] + 5.0, p[1], p[2]]).collect();
        let n = a.len();
        let mut vertices = a.vertices().to_vec();
        vertices.extend(shifted);
        let mut faces = a.faces().to_vec();
        faces.extend(a.faces().iter().map(|f| [f[0] + n, f[1] + n, f[2] + n]));
        a = Mesh::new(vertices, faces, true).unwrap();
        for kind in [LaplacianKind::Combinatorial, LaplacianKind::Cotangent] {
            let l = mesh_laplacian(&a, kind).unwrap();
            let b = mesh_basis(&l, a.vertex_weights(), 4, true).unwrap();
            let zeros = b.eigenvalues().iter().filter(|v| v.abs() < 1e-9).count();
            assert_eq!(zeros, 2);
        }
    }

    #[test]
    fn slepian_whole_region_is_identity() {
        let m = Mesh::icosphere(2);
        let l = mesh_laplacian(&m, LaplacianKind::Cotangent).unwrap();
        let b = mesh_basis(&l, m.vertex_weights(), 30, true).unwrap();
        let all: Vec<usize> = (0..m.len()).collect();
        let s = mesh_slepian(&b, &all).unwrap();
        let id = DMatrix::<f64>::identity(30, 30);
        assert!((s.matrix() - &id).amax() <= 1e-8);
        assert!(s.eigenvalues().iter().all(|&v| (v - 1.0).abs() <= 1e-8));
    }

    #[test]
    fn slepian_trace_equals_projection() {
        let m = Mesh::icosphere(2);
        let l = mesh_laplacian(&m, LaplacianKind::Cotangent).unwrap();
        let b = mesh_basis(&l, m.vertex_weights(), 40, true).unwrap();
        let region: Vec<usize> = (0..m.len()).filter(|&v| m.vertices()[v][2] > 0.2).collect();
        let s = mesh_slepian(&b, &region).unwrap();
        // trace of the projection, summed vertex by vertex
        let direct: f64 = region
            .iter()
            .map(|&v| (0..40).map(|k| m.vertex_weights()[v] * b.vectors()[(v, k)].powi(2)).sum::<f64>())
            .sum();
        let eig: f64 = s.raw_eigenvalues().iter().sum();
        assert!((eig - direct).abs() <= 1e-8 * direct);
        assert!(s.eigenvalues().iter().all(|&v| (0.0..=1.0).contains(&v)));
        assert!(s.eigenvalues().windows(2).all(|w| w[0] >= w[1]));
    }

    #[test]
    fn slepian_single_vertex_rank_one() {
        let b = path_basis();
        let s = mesh_slepian(&b, &[1]).unwrap();
        let expect: f64 = (0..3).map(|k| b.vectors()[(1, k)].powi(2)).sum();
        assert!((s.eigenvalues()[0] - expect).abs() < 1e-12);
        assert!(s.eigenvalues()[1..].iter().all(|&v| v.abs() < 1e-12));
        assert!(mesh_slepian(&b, &[]).is_err());
        assert!(mesh_slepian(&b, &[3]).is_err());
    }

    #[test]
    fn mesh_wavelet_round_trip() {
        let m = Mesh::icosphere(2);
        let l = mesh_laplacian(&m, LaplacianKind::Cotangent).unwrap();
        let b = mesh_basis(&l, m.vertex_weights(), 60, true).unwrap();
        let region: Vec<usize> = (0..m.len()).filter(|&v| m.vertices()[v][2] >= 0.0).collect();
        let s = mesh_slepian(&b, &region).unwrap();
        let tiling = mesh_wavelets(&s, 2.0, 0).unwrap();
        assert_eq!(tiling.params().length(), s.shannon().ceil() as usize);
        let t = tiling.params().length();
        let mut rng = SplitMix64::new(8);
        for _ in 0..20 {
            let f: Vec<Complex64> = (0..t).map(|_| Complex64::new(rng.next_normal(), 0.0)).collect();
            let back = synthesis(&analysis(&f, &tiling), &tiling).unwrap();
            for (x, y) in back.iter().zip(&f) {
                assert!((x - y).norm() <= 1e-10);
            }
        }
        let zero = vec![Complex64::new(0.0, 0.0); t];
        assert!(synthesis(&analysis(&zero, &tiling), &tiling).unwrap().iter().all(|v| v.norm() == 0.0));
        let mut spike = zero.clone();
        spike[3] = Complex64::new(1.0, 0.0);
        let w = analysis(&spike, &tiling);
        for (wj, k) in w.wavelets.iter().zip(tiling.kappas()) {
            assert_eq!(wj[3].re, k[3]);
        }
    }
}
