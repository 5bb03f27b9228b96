//! Orthonormal spherical harmonics and exact transforms on a Gauss–Legendre grid.
//!
//! Harmonics carry the Condon–Shortley phase exactly once, inside the
//! normalised associated Legendre functions:
//!
//! ```text
//! Y_{l,m}(θ, φ)  = P̄_l^m(cos θ) e^{imφ}              m ≥ 0
//! Y_{l,-m}(θ, φ) = (-1)^m conj(Y_{l,m}(θ, φ))
//! ```
//!
//! Coefficients are stored flat at `idx(l, m) = l² + l + m`.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::quadrature::gauss_legendre;
use crate::{Error, Result};

/// Harmonic bandlimit: degrees `0 ≤ l < L`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Bandlimit(usize);

impl Bandlimit {
    pub fn new(l: usize) -> Result<Self> {
        if l == 0 {
            return Err(Error::domain("bandlimit must be at least 1"));
        }
        Ok(Bandlimit(l))
    }

    pub fn get(self) -> usize {
        self.0
    }

    /// Number of harmonic coefficients, `L²`.
    pub fn size(self) -> usize {
        self.0 * self.0
    }
}

impl std::fmt::Display for Bandlimit {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Flat index of `(l, m)`.
#[inline]
pub fn idx(l: usize, m: i64) -> usize {
    debug_assert!(m.unsigned_abs() as usize <= l);
    ((l * l + l) as i64 + m) as usize
}

/// Inverse of [`idx`].
#[inline]
pub fn lm(index: usize) -> (usize, i64) {
    let l = (index as f64).sqrt() as usize;
    // guard against sqrt rounding
    let l = if (l + 1) * (l + 1) <= index { l + 1 } else if l * l > index { l - 1 } else { l };
    (l, index as i64 - (l * l + l) as i64)
}

#[inline]
fn tri(l: usize, m: usize) -> usize {
    l * (l + 1) / 2 + m
}

/// Next sectoral value: `P̄_m^m` from `P̄_{m−1}^{m−1}`.
#[inline]
fn sectoral_step(prev: f64, m: usize, sin_theta: f64) -> f64 {
    let mf = m as f64;
    -((2.0 * mf + 1.0) / (2.0 * mf)).sqrt() * sin_theta * prev
}

/// Emits `P̄_l^m(x)` for `l = m..end`, starting from `pmm = P̄_m^m(x)`.
fn degree_column(m: usize, pmm: f64, x: f64, end: usize, mut emit: impl FnMut(usize, f64)) {
    if m >= end {
        return;
    }
    emit(m, pmm);
    if m + 1 >= end {
        return;
    }
    let mut p_prev = pmm;
    let mut p_cur = x * (2.0 * m as f64 + 3.0).sqrt() * pmm;
    emit(m + 1, p_cur);
    let m2 = (m * m) as f64;
    for l in (m + 2)..end {
        let lf = l as f64;
        let a = ((4.0 * lf * lf - 1.0) / (lf * lf - m2)).sqrt();
        let b = (((lf - 1.0) * (lf - 1.0) - m2) / (4.0 * (lf - 1.0) * (lf - 1.0) - 1.0)).sqrt();
        let p_next = a * (x * p_cur - b * p_prev);
        emit(l, p_next);
        p_prev = p_cur;
        p_cur = p_next;
    }
}

/// `P̄_l^m(x)` for all `0 ≤ m ≤ l < L`, packed at `l(l+1)/2 + m`.
///
/// Seeded at the sectoral terms `P̄_m^m` and continued in degree by the
/// normalised three-term recurrence, so no factorials are ever formed.
pub fn legendre_table(bandlimit: usize, x: f64) -> Vec<f64> {
    let mut out = vec![0.0; bandlimit * (bandlimit + 1) / 2];
    let sin_theta = (1.0 - x * x).max(0.0).sqrt();
    let mut pmm = 1.0 / (4.0 * PI).sqrt();
    for m in 0..bandlimit {
        if m > 0 {
            pmm = sectoral_step(pmm, m, sin_theta);
        }
        degree_column(m, pmm, x, bandlimit, |l, v| out[tri(l, m)] = v);
    }
    out
}

/// Orthonormal associated Legendre function `P̄_l^m(x)` with Condon–Shortley phase.
pub fn normalized_assoc_legendre(l: usize, m: usize, x: f64) -> Result<f64> {
    if m > l {
        return Err(Error::domain(format!("order m={m} exceeds degree l={l}")));
    }
    if !(x.abs() <= 1.0) {
        return Err(Error::domain(format!("argument x={x} outside [-1, 1]")));
    }
    let sin_theta = (1.0 - x * x).max(0.0).sqrt();
    let pmm = (1..=m).fold(1.0 / (4.0 * PI).sqrt(), |p, k| sectoral_step(p, k, sin_theta));
    let mut value = 0.0;
    degree_column(m, pmm, x, l + 1, |k, v| {
        if k == l {
            value = v;
        }
    });
    Ok(value)
}

/// `Y_{l,m}(θ, φ)` from an already evaluated `P̄_l^{|m|}(cos θ)`.
#[inline]
pub(crate) fn ylm_from_legendre(p: f64, m: i64, phi: f64) -> Complex64 {
    let sign = if m < 0 && m % 2 != 0 { -1.0 } else { 1.0 };
    Complex64::from_polar(sign * p, m as f64 * phi)
}

pub fn spherical_harmonic(l: usize, m: i64, theta: f64, phi: f64) -> Result<Complex64> {
    if m.unsigned_abs() as usize > l {
        return Err(Error::domain(format!("order m={m} exceeds degree l={l}")));
    }
    let p = normalized_assoc_legendre(l, m.unsigned_abs() as usize, theta.cos())?;
    Ok(ylm_from_legendre(p, m, phi))
}

/// All `Y_{l,m}(θ, φ)` for `l < L`, flat-indexed.
pub fn harmonics_at(bandlimit: Bandlimit, theta: f64, phi: f64) -> Vec<Complex64> {
    let big_l = bandlimit.get();
    let table = legendre_table(big_l, theta.cos());
    let mut out = Vec::with_capacity(bandlimit.size());
    for l in 0..big_l {
        for m in -(l as i64)..=(l as i64) {
            out.push(ylm_from_legendre(table[tri(l, m.unsigned_abs() as usize)], m, phi));
        }
    }
    out
}

/// Harmonic coefficients `f_{l,m}` for `l < L`.
#[derive(Debug, Clone, PartialEq)]
pub struct SphericalCoefficients {
    bandlimit: Bandlimit,
    values: Vec<Complex64>,
}

impl SphericalCoefficients {
    pub fn zeros(bandlimit: Bandlimit) -> Self {
        SphericalCoefficients {
            bandlimit,
            values: vec![Complex64::new(0.0, 0.0); bandlimit.size()],
        }
    }

    pub fn from_values(bandlimit: Bandlimit, values: Vec<Complex64>) -> Result<Self> {
        if values.len() != bandlimit.size() {
            return Err(Error::ShapeMismatch {
                expected: bandlimit.size(),
                found: values.len(),
            });
        }
        Ok(SphericalCoefficients { bandlimit, values })
    }

    /// Unit coefficient vector `e_{l,m}`.
    pub fn unit(bandlimit: Bandlimit, l: usize, m: i64) -> Result<Self> {
        if l >= bandlimit.get() || m.unsigned_abs() as usize > l {
            return Err(Error::domain(format!("(l={l}, m={m}) outside bandlimit {bandlimit}")));
        }
        let mut c = Self::zeros(bandlimit);
        c.values[idx(l, m)] = Complex64::new(1.0, 0.0);
        Ok(c)
    }

    pub fn bandlimit(&self) -> Bandlimit {
        self.bandlimit
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [Complex64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<Complex64> {
        self.values
    }

    pub fn get(&self, l: usize, m: i64) -> Complex64 {
        self.values[idx(l, m)]
    }

    pub fn set(&mut self, l: usize, m: i64, value: Complex64) {
        self.values[idx(l, m)] = value;
    }

    /// Largest deviation from `f_{l,-m} = (-1)^m conj(f_{l,m})`.
    pub fn real_symmetry_defect(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for l in 0..self.bandlimit.get() {
            for m in 0..=(l as i64) {
                let sign = if m % 2 == 0 { 1.0 } else { -1.0 };
                let d = self.get(l, -m) - self.get(l, m).conj() * sign;
                worst = worst.max(d.norm());
            }
        }
        worst
    }

    /// Evaluate the expansion at one point.
    pub fn evaluate(&self, theta: f64, phi: f64) -> Complex64 {
        harmonics_at(self.bandlimit, theta, phi)
            .iter()
            .zip(&self.values)
            .map(|(y, f)| y * f)
            .sum()
    }

    pub(crate) fn check_bandlimit(&self, expected: Bandlimit) -> Result<()> {
        if self.bandlimit != expected {
            return Err(Error::BandlimitMismatch {
                expected: expected.get(),
                found: self.bandlimit.get(),
            });
        }
        Ok(())
    }
}

/// Gauss–Legendre colatitudes times equispaced longitudes.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureGrid {
    bandlimit: Bandlimit,
    thetas: Vec<f64>,
    theta_weights: Vec<f64>,
    phis: Vec<f64>,
}

impl QuadratureGrid {
    pub fn bandlimit(&self) -> Bandlimit {
        self.bandlimit
    }

    pub fn thetas(&self) -> &[f64] {
        &self.thetas
    }

    pub fn theta_weights(&self) -> &[f64] {
        &self.theta_weights
    }

    pub fn phis(&self) -> &[f64] {
        &self.phis
    }

    pub fn n_theta(&self) -> usize {
        self.thetas.len()
    }

    pub fn n_phi(&self) -> usize {
        self.phis.len()
    }

    pub fn len(&self) -> usize {
        self.n_theta() * self.n_phi()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Quadrature weight of sample `(i, j)`: `w_i · 2π / n_φ`.
    pub fn sample_weight(&self, i: usize) -> f64 {
        self.theta_weights[i] * 2.0 * PI / self.n_phi() as f64
    }

    /// `e^{imφ_j}` with the phase reduced modulo `n_φ` before the trig call.
    pub(crate) fn twiddle(&self, m: i64, j: usize) -> Complex64 {
        let n = self.n_phi() as i64;
        let k = (m * j as i64).rem_euclid(n);
        Complex64::from_polar(1.0, 2.0 * PI * k as f64 / n as f64)
    }
}

pub fn make_grid(bandlimit: Bandlimit) -> QuadratureGrid {
    let big_l = bandlimit.get();
    let (x, w) = gauss_legendre(big_l);
    // x ascending, so walking backwards gives ascending θ
    let thetas = x.iter().rev().map(|v| v.acos()).collect();
    let theta_weights = w.into_iter().rev().collect();
    let n_phi = 2 * big_l - 1;
    let phis = (0..n_phi).map(|j| 2.0 * PI * j as f64 / n_phi as f64).collect();
    QuadratureGrid {
        bandlimit,
        thetas,
        theta_weights,
        phis,
    }
}

/// Samples on a [`QuadratureGrid`], row-major with θ outer.
#[derive(Debug, Clone, PartialEq)]
pub struct SampledField {
    grid: QuadratureGrid,
    values: Vec<Complex64>,
}

impl SampledField {
    pub fn new(grid: QuadratureGrid, values: Vec<Complex64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::ShapeMismatch {
                expected: grid.len(),
                found: values.len(),
            });
        }
        Ok(SampledField { grid, values })
    }

    pub fn from_fn(grid: QuadratureGrid, f: impl Fn(f64, f64) -> Complex64) -> Self {
        let values = grid
            .thetas
            .iter()
            .flat_map(|&t| grid.phis.iter().map(move |&p| (t, p)))
            .map(|(t, p)| f(t, p))
            .collect();
        SampledField { grid, values }
    }

    pub fn grid(&self) -> &QuadratureGrid {
        &self.grid
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        self.values[i * self.grid.n_phi() + j]
    }

    pub fn max_imag(&self) -> f64 {
        self.values.iter().fold(0.0, |acc, v| acc.max(v.im.abs()))
    }

    pub fn real_part(&self) -> Vec<f64> {
        self.values.iter().map(|v| v.re).collect()
    }
}

fn legendre_rows(grid: &QuadratureGrid) -> Vec<Vec<f64>> {
    let big_l = grid.bandlimit.get();
    grid.thetas.iter().map(|t| legendre_table(big_l, t.cos())).collect()
}

/// Analysis by direct quadrature: `f_{l,m} = Σ_ij w_i (2π/n_φ) F_ij conj(Y_{l,m}(θ_i, φ_j))`.
///
/// The φ sum is taken first per ring and per order, then the θ sum per degree.
pub fn forward_sht(field: &SampledField) -> Result<SphericalCoefficients> {
    let grid = &field.grid;
    let big_l = grid.bandlimit.get();
    let n_phi = grid.n_phi();
    if field.values.len() != grid.len() {
        return Err(Error::ShapeMismatch {
            expected: grid.len(),
            found: field.values.len(),
        });
    }
    let rows = legendre_rows(grid);
    let mut out = SphericalCoefficients::zeros(grid.bandlimit);
    let max_m = big_l as i64 - 1;
    for (i, table) in rows.iter().enumerate() {
        let ring = &field.values[i * n_phi..(i + 1) * n_phi];
        let wi = grid.sample_weight(i);
        for m in -max_m..=max_m {
            let ring_sum: Complex64 = ring
                .iter()
                .enumerate()
                .map(|(j, v)| v * grid.twiddle(-m, j))
                .sum::<Complex64>()
                * wi;
            let sign = if m < 0 && m % 2 != 0 { -1.0 } else { 1.0 };
            let am = m.unsigned_abs() as usize;
            for l in am..big_l {
                out.values[idx(l, m)] += ring_sum * (sign * table[tri(l, am)]);
            }
        }
    }
    Ok(out)
}

/// Synthesis `F_ij = Σ_{l,m} f_{l,m} Y_{l,m}(θ_i, φ_j)`.
pub fn inverse_sht(coeffs: &SphericalCoefficients, grid: &QuadratureGrid) -> Result<SampledField> {
    coeffs.check_bandlimit(grid.bandlimit)?;
    let big_l = grid.bandlimit.get();
    let n_phi = grid.n_phi();
    let rows = legendre_rows(grid);
    let max_m = big_l as i64 - 1;
    let mut values = vec![Complex64::new(0.0, 0.0); grid.len()];
    for (i, table) in rows.iter().enumerate() {
        let ring = &mut values[i * n_phi..(i + 1) * n_phi];
        for m in -max_m..=max_m {
            let am = m.unsigned_abs() as usize;
            let sign = if m < 0 && m % 2 != 0 { -1.0 } else { 1.0 };
            let order_sum: Complex64 = (am..big_l)
                .map(|l| coeffs.values[idx(l, m)] * (sign * table[tri(l, am)]))
                .sum();
            if order_sum == Complex64::new(0.0, 0.0) {
                continue;
            }
            for (j, v) in ring.iter_mut().enumerate() {
                *v += order_sum * grid.twiddle(m, j);
            }
        }
    }
    Ok(SampledField {
        grid: grid.clone(),
        values,
    })
}
