//! Concentration matrices and the Slepian eigenbasis on the sphere.
//!
//! `D[idx(l,m), idx(l′,m′)] = ∫_R Y_{l,m} conj(Y_{l′,m′}) dω`. Its eigenvectors
//! `s_p`, ordered by decreasing concentration `λ_p`, are the harmonic
//! coefficients of the Slepian functions of `R`.

use std::f64::consts::PI;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rayon::prelude::*;

use crate::eigen::{concentration_spectrum, hermitian_eigen, Eigenpairs};
use crate::harmonic::{
    harmonics_at, idx, legendre_table, make_grid, Bandlimit, SampledField, SphericalCoefficients,
};
use crate::quadrature::gauss_legendre_interval;
use crate::region::{area_fraction, Region, RegionQuadrature, RegionWeights};
use crate::{Error, Result};

/// Concentration below which region-limited estimation refuses a rank.
pub const DEFAULT_LAMBDA_MIN: f64 = 0.5;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

#[derive(Debug, Clone)]
pub struct ConcentrationMatrix {
    bandlimit: Bandlimit,
    entries: DMatrix<Complex64>,
    /// Per-order blocks `D^{|m|}`, present when the matrix came from the cap builder.
    order_blocks: Option<Vec<DMatrix<f64>>>,
}

impl ConcentrationMatrix {
    pub fn bandlimit(&self) -> Bandlimit {
        self.bandlimit
    }

    pub fn entries(&self) -> &DMatrix<Complex64> {
        &self.entries
    }

    pub fn order_blocks(&self) -> Option<&[DMatrix<f64>]> {
        self.order_blocks.as_deref()
    }

    pub fn trace(&self) -> f64 {
        self.entries.diagonal().iter().map(|z| z.re).sum()
    }

    /// Wraps an arbitrary square matrix, e.g. for solver tests.
    pub fn from_entries(bandlimit: Bandlimit, entries: DMatrix<Complex64>) -> Result<Self> {
        let n = bandlimit.size();
        if entries.nrows() != n || entries.ncols() != n {
            return Err(Error::ShapeMismatch {
                expected: n * n,
                found: entries.len(),
            });
        }
        Ok(ConcentrationMatrix {
            bandlimit,
            entries,
            order_blocks: None,
        })
    }
}

/// Result of a generic fill, with the number of independently computed entries.
#[derive(Debug, Clone)]
pub struct MatrixFill {
    pub matrix: ConcentrationMatrix,
    pub entries_computed: usize,
}

/// Generic builder on the region's quadrature rule.
pub fn build_matrix_general(region: &Region, bandlimit: Bandlimit) -> Result<ConcentrationMatrix> {
    Ok(fill_matrix_general(region, bandlimit, None)?.matrix)
}

/// Generic builder with an explicit worker count (`None`: rayon's default).
///
/// Rows of the upper triangle are distributed over the workers; each entry
/// is one sequential sum over the quadrature nodes, so the output does not
/// depend on the schedule. The lower triangle is the conjugate transpose.
pub fn fill_matrix_general(
    region: &Region,
    bandlimit: Bandlimit,
    workers: Option<usize>,
) -> Result<MatrixFill> {
    let quad = RegionQuadrature::new(region, bandlimit)?;
    let fill = || fill_upper(&quad, bandlimit);
    let rows = match workers {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n.max(1))
            .build()
            .map_err(|e| Error::domain(format!("cannot start {n} workers: {e}")))?
            .install(fill),
        None => fill(),
    };
    let n = bandlimit.size();
    let mut entries = DMatrix::from_element(n, n, ZERO);
    let mut computed = 0;
    for (a, row) in rows.into_iter().enumerate() {
        computed += row.len();
        for (offset, value) in row.into_iter().enumerate() {
            let b = a + offset;
            entries[(a, b)] = value;
            entries[(b, a)] = value.conj();
        }
    }
    Ok(MatrixFill {
        matrix: ConcentrationMatrix {
            bandlimit,
            entries,
            order_blocks: None,
        },
        entries_computed: computed,
    })
}

fn fill_upper(quad: &RegionQuadrature, bandlimit: Bandlimit) -> Vec<Vec<Complex64>> {
    let n = bandlimit.size();
    let per_node: Vec<Vec<Complex64>> = quad
        .points()
        .par_iter()
        .map(|&(t, p)| harmonics_at(bandlimit, t, p))
        .collect();
    // harmonic-major tables: plain[a][k] = Y_a(node k), weighted[a][k] = w_k Y_a(node k)
    let mut plain = vec![Vec::with_capacity(quad.len()); n];
    let mut weighted = vec![Vec::with_capacity(quad.len()); n];
    for (ys, &w) in per_node.iter().zip(quad.weights()) {
        for (a, y) in ys.iter().enumerate() {
            plain[a].push(*y);
            weighted[a].push(y * w);
        }
    }
    (0..n)
        .into_par_iter()
        .map(|a| {
            let wa = &weighted[a];
            (a..n)
                .map(|b| {
                    wa.iter()
                        .zip(&plain[b])
                        .fold(ZERO, |acc, (x, y)| acc + x * y.conj())
                })
                .collect()
        })
        .collect()
}

/// Cap builder using order decoupling.
///
/// Only the blocks `D^m_{l,l′} = 2π ∫_{cos θ_max}^1 P̄_l^m P̄_{l′}^m dx` for
/// `m ≥ 0` are integrated (Gauss–Legendre, `2L` nodes, exact for these
/// polynomial integrands); `D^{−m} = D^m` and off-block entries are zero.
pub fn build_matrix_polar_cap(theta_max: f64, bandlimit: Bandlimit) -> Result<ConcentrationMatrix> {
    Region::polar_cap(theta_max)?;
    let big_l = bandlimit.get();
    let (xs, ws) = gauss_legendre_interval(2 * big_l, theta_max.cos(), 1.0);
    let tables: Vec<Vec<f64>> = xs.iter().map(|&x| legendre_table(big_l, x)).collect();
    let tri = |l: usize, m: usize| l * (l + 1) / 2 + m;
    let blocks: Vec<DMatrix<f64>> = (0..big_l)
        .map(|m| {
            let size = big_l - m;
            let mut block = DMatrix::zeros(size, size);
            for i in 0..size {
                for j in i..size {
                    let s: f64 = tables
                        .iter()
                        .zip(&ws)
                        .map(|(t, w)| w * t[tri(m + i, m)] * t[tri(m + j, m)])
                        .sum();
                    block[(i, j)] = 2.0 * PI * s;
                    block[(j, i)] = 2.0 * PI * s;
                }
            }
            block
        })
        .collect();
    let n = bandlimit.size();
    let mut entries = DMatrix::from_element(n, n, ZERO);
    for (m, block) in blocks.iter().enumerate() {
        for i in 0..block.nrows() {
            for j in 0..block.ncols() {
                let v = Complex64::new(block[(i, j)], 0.0);
                let (l1, l2) = (m + i, m + j);
                entries[(idx(l1, m as i64), idx(l2, m as i64))] = v;
                if m > 0 {
                    entries[(idx(l1, -(m as i64)), idx(l2, -(m as i64)))] = v;
                }
            }
        }
    }
    Ok(ConcentrationMatrix {
        bandlimit,
        entries,
        order_blocks: Some(blocks),
    })
}

/// Slepian functions of a region: eigenpairs of its concentration matrix.
#[derive(Debug, Clone)]
pub struct SlepianBasis {
    bandlimit: Bandlimit,
    region: Region,
    eigenvalues: Vec<f64>,
    raw_eigenvalues: Vec<f64>,
    vectors: DMatrix<Complex64>,
    shannon: f64,
}

impl SlepianBasis {
    /// Builds the matrix (cap fast path where applicable) and decomposes it.
    pub fn compute(region: &Region, bandlimit: Bandlimit) -> Result<Self> {
        let matrix = match region {
            Region::PolarCap { theta_max } => build_matrix_polar_cap(*theta_max, bandlimit)?,
            _ => build_matrix_general(region, bandlimit)?,
        };
        eigendecompose(&matrix, region)
    }

    pub(crate) fn from_raw_parts(
        bandlimit: Bandlimit,
        region: Region,
        raw_eigenvalues: Vec<f64>,
        vectors: DMatrix<Complex64>,
    ) -> Result<Self> {
        let eigenvalues = raw_eigenvalues.iter().map(|v| v.clamp(0.0, 1.0)).collect();
        let shannon = shannon_number(bandlimit, &region)?;
        Ok(SlepianBasis {
            bandlimit,
            region,
            eigenvalues,
            raw_eigenvalues,
            vectors,
            shannon,
        })
    }

    pub fn bandlimit(&self) -> Bandlimit {
        self.bandlimit
    }

    pub fn region(&self) -> &Region {
        &self.region
    }

    /// Concentrations `λ_p`, descending, clamped to `[0, 1]`.
    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    /// Eigenvalues as returned by the solver, before clamping.
    pub fn raw_eigenvalues(&self) -> &[f64] {
        &self.raw_eigenvalues
    }

    /// Eigenvectors as columns.
    pub fn vectors(&self) -> &DMatrix<Complex64> {
        &self.vectors
    }

    /// Harmonic coefficients of the rank-`p` Slepian function.
    pub fn vector(&self, p: usize) -> SphericalCoefficients {
        SphericalCoefficients::from_values(self.bandlimit, self.vectors.column(p).iter().copied().collect())
            .expect("basis columns have L² entries")
    }

    pub fn shannon(&self) -> f64 {
        self.shannon
    }

    pub fn len(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn is_empty(&self) -> bool {
        self.eigenvalues.is_empty()
    }

    /// `⌈N⌉` limited to `[1, L²]`: the default length of the Slepian line.
    pub fn shannon_ceiling(&self) -> usize {
        (self.shannon.ceil() as usize).clamp(1, self.len())
    }
}

/// Eigendecomposition into a [`SlepianBasis`].
///
/// Matrices from the cap builder are solved block by block in `m`
/// (each real block twice, for `±m`) and merged before ordering.
pub fn eigendecompose(matrix: &ConcentrationMatrix, region: &Region) -> Result<SlepianBasis> {
    let bandlimit = matrix.bandlimit;
    let n = bandlimit.size();
    let pairs = match &matrix.order_blocks {
        Some(blocks) => {
            let mut values = Vec::with_capacity(n);
            let mut columns = Vec::with_capacity(n);
            for (m, block) in blocks.iter().enumerate() {
                let eig = hermitian_eigen(block)?;
                let orders: &[i64] = if m == 0 { &[0] } else { &[m as i64, -(m as i64)] };
                for &order in orders {
                    for k in 0..eig.len() {
                        let mut col = nalgebra::DVector::from_element(n, ZERO);
                        for i in 0..block.nrows() {
                            col[idx(m + i, order)] = Complex64::new(eig.vectors[(i, k)], 0.0);
                        }
                        values.push(eig.values[k]);
                        columns.push(col);
                    }
                }
            }
            Eigenpairs {
                values,
                vectors: DMatrix::from_columns(&columns),
            }
        }
        None => hermitian_eigen(&matrix.entries)?,
    };
    let spectrum = concentration_spectrum(pairs)?;
    let shannon = shannon_number(bandlimit, region)?;
    Ok(SlepianBasis {
        bandlimit,
        region: region.clone(),
        eigenvalues: spectrum.pairs.values,
        raw_eigenvalues: spectrum.raw,
        vectors: spectrum.pairs.vectors,
        shannon,
    })
}

/// `N = L² · area fraction` (closed-form area for caps and boxes).
pub fn shannon_number(bandlimit: Bandlimit, region: &Region) -> Result<f64> {
    let fraction = area_fraction(region, &make_grid(bandlimit))?;
    Ok(bandlimit.size() as f64 * fraction)
}

/// Coefficients `f_p` on the first `P` Slepian functions of a basis.
#[derive(Debug, Clone)]
pub struct SlepianCoefficients<'a> {
    basis: &'a SlepianBasis,
    values: Vec<Complex64>,
}

impl<'a> SlepianCoefficients<'a> {
    pub fn new(basis: &'a SlepianBasis, values: Vec<Complex64>) -> Result<Self> {
        check_truncation(basis, values.len())?;
        Ok(SlepianCoefficients { basis, values })
    }

    /// `e_p` truncated at `truncation`.
    pub fn unit(basis: &'a SlepianBasis, p: usize, truncation: usize) -> Result<Self> {
        check_truncation(basis, truncation)?;
        if p >= truncation {
            return Err(Error::domain(format!("rank {p} outside truncation {truncation}")));
        }
        let mut values = vec![ZERO; truncation];
        values[p] = Complex64::new(1.0, 0.0);
        Ok(SlepianCoefficients { basis, values })
    }

    pub fn basis(&self) -> &'a SlepianBasis {
        self.basis
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn truncation(&self) -> usize {
        self.values.len()
    }
}

fn check_truncation(basis: &SlepianBasis, p: usize) -> Result<()> {
    if p == 0 || p > basis.len() {
        return Err(Error::domain(format!(
            "truncation {p} outside [1, {}]",
            basis.len()
        )));
    }
    Ok(())
}

/// `f_p = Σ_{l,m} f_{l,m} conj((s_p)_{l,m})` for `p < P`.
pub fn forward_slepian<'a>(
    f: &SphericalCoefficients,
    basis: &'a SlepianBasis,
    truncation: usize,
) -> Result<SlepianCoefficients<'a>> {
    f.check_bandlimit(basis.bandlimit)?;
    check_truncation(basis, truncation)?;
    let values = (0..truncation)
        .map(|p| {
            basis
                .vectors
                .column(p)
                .iter()
                .zip(f.values())
                .fold(ZERO, |acc, (s, v)| acc + v * s.conj())
        })
        .collect();
    Ok(SlepianCoefficients { basis, values })
}

/// `f_{l,m} = Σ_{p<P} f_p (s_p)_{l,m}`.
pub fn inverse_slepian(fp: &SlepianCoefficients<'_>) -> SphericalCoefficients {
    let basis = fp.basis;
    let mut out = vec![ZERO; basis.bandlimit.size()];
    for (p, c) in fp.values.iter().enumerate() {
        if *c == ZERO {
            continue;
        }
        for (o, s) in out.iter_mut().zip(basis.vectors.column(p).iter()) {
            *o += c * s;
        }
    }
    SphericalCoefficients::from_values(basis.bandlimit, out).expect("L² entries")
}

/// Slepian coefficients from samples inside the region only.
///
/// `f_p = (1/λ_p) Σ_k w_k F(ω_k) conj(S_p(ω_k))` over the nodes of `quad`,
/// where `S_p` is the rank-`p` Slepian function. Refuses truncations that
/// reach a concentration below `lambda_min`.
pub fn region_limited_forward<'a>(
    samples: &[Complex64],
    basis: &'a SlepianBasis,
    quad: &RegionQuadrature,
    truncation: usize,
    lambda_min: f64,
) -> Result<SlepianCoefficients<'a>> {
    check_truncation(basis, truncation)?;
    if samples.len() != quad.len() {
        return Err(Error::ShapeMismatch {
            expected: quad.len(),
            found: samples.len(),
        });
    }
    let lambda = basis.eigenvalues[truncation - 1];
    if lambda < lambda_min {
        return Err(Error::BelowThreshold {
            rank: truncation - 1,
            value: lambda,
            threshold: lambda_min,
        });
    }
    let mut values = vec![ZERO; truncation];
    for ((&(t, ph), &w), &f) in quad.points().iter().zip(quad.weights()).zip(samples) {
        if f == ZERO {
            continue;
        }
        let ys = harmonics_at(basis.bandlimit, t, ph);
        let wf = f * w;
        for (p, v) in values.iter_mut().enumerate() {
            let s: Complex64 = basis
                .vectors
                .column(p)
                .iter()
                .zip(&ys)
                .fold(ZERO, |acc, (c, y)| acc + c * y);
            *v += wf * s.conj();
        }
    }
    for (v, &lambda) in values.iter_mut().zip(&basis.eigenvalues) {
        *v /= lambda;
    }
    Ok(SlepianCoefficients { basis, values })
}

/// [`region_limited_forward`] for a grid field and its raster weights.
pub fn region_limited_forward_field<'a>(
    field: &SampledField,
    weights: &RegionWeights,
    basis: &'a SlepianBasis,
    truncation: usize,
    lambda_min: f64,
) -> Result<SlepianCoefficients<'a>> {
    if field.grid() != weights.grid() {
        return Err(Error::domain("field and region weights use different grids"));
    }
    let quad = RegionQuadrature::from_weights(weights)?;
    let samples: Vec<Complex64> = field
        .values()
        .iter()
        .zip(weights.weights())
        .filter(|(_, &w)| w > 0.0)
        .map(|(v, _)| *v)
        .collect();
    region_limited_forward(&samples, basis, &quad, truncation, lambda_min)
}
