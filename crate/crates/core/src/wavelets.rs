//! Scale-discretised tiling of a discrete spectral line.
//!
//! The line is any ordered spectral index: harmonic degree, Slepian rank or
//! mesh Slepian rank. With the smooth bump `s(t) = exp(−1/(1 − t²))`:
//!
//! ```text
//! s_B(t) = s(2B(t − 1/B)/(B − 1) − 1)
//! k_B(t) = ∫_t^1 s_B(u)²/u du / ∫_{1/B}^1 s_B(u)²/u du
//! κ_B(t) = √(k_B(t/B) − k_B(t)),   η_B(t) = √k_B(t)
//! κ_j(t) = κ_B(t/B^j),             η(t) = η_B(t/B^{J_min})
//! ```
//!
//! The squares telescope, so `η² + Σ_j κ_j² = 1` on the whole line and
//! synthesis inverts analysis exactly.

use num_complex::Complex64;

use crate::quadrature::adaptive_integrate;
use crate::{Error, Result};

/// Absolute tolerance for the `k_B` integrals.
pub const INTEGRAL_TOLERANCE: f64 = 1e-12;

const ROUNDOFF_FLOOR: f64 = -1e-14;

/// Smallest `j` with `B^j ≥ T − 1`, i.e. `⌈log_B(T − 1)⌉`.
pub fn j_max(b: f64, t: usize) -> Result<u32> {
    if !(b > 1.0) || !b.is_finite() {
        return Err(Error::domain(format!("dilation B={b} must exceed 1")));
    }
    if t < 2 {
        return Err(Error::domain(format!("line length T={t} must be at least 2")));
    }
    let target = (t - 1) as f64;
    // integer powers avoid log rounding at exact powers such as 3³ = 27
    let mut j = 0u32;
    while b.powi(j as i32) < target * (1.0 - 4.0 * f64::EPSILON) {
        j += 1;
    }
    Ok(j)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TilingParams {
    b: f64,
    j_min: u32,
    length: usize,
}

impl TilingParams {
    pub fn new(b: f64, j_min: u32, length: usize) -> Result<Self> {
        let jm = j_max(b, length)?;
        if j_min > jm {
            return Err(Error::domain(format!(
                "J_min={j_min} exceeds J_max={jm} for B={b}, T={length}"
            )));
        }
        Ok(TilingParams { b, j_min, length })
    }

    pub fn b(&self) -> f64 {
        self.b
    }

    pub fn j_min(&self) -> u32 {
        self.j_min
    }

    pub fn j_max(&self) -> u32 {
        j_max(self.b, self.length).expect("validated on construction")
    }

    pub fn length(&self) -> usize {
        self.length
    }
}

/// The bump `s(t)`, zero outside `(−1, 1)`.
pub fn bump(t: f64) -> f64 {
    if t <= -1.0 || t >= 1.0 {
        0.0
    } else {
        (-1.0 / (1.0 - t * t)).exp()
    }
}

/// `k_B` with its normalising integral evaluated once.
#[derive(Debug, Clone, Copy)]
pub struct SmoothStep {
    b: f64,
    norm: f64,
}

impl SmoothStep {
    pub fn new(b: f64) -> Result<Self> {
        if !(b > 1.0) {
            return Err(Error::domain(format!("dilation B={b} must exceed 1")));
        }
        let mut s = SmoothStep { b, norm: 1.0 };
        s.norm = s.integral(1.0 / b)?;
        Ok(s)
    }

    fn integrand(&self, u: f64) -> f64 {
        let b = self.b;
        let v = bump(2.0 * b * (u - 1.0 / b) / (b - 1.0) - 1.0);
        v * v / u
    }

    fn integral(&self, from: f64) -> Result<f64> {
        adaptive_integrate(|u| self.integrand(u), from, 1.0, INTEGRAL_TOLERANCE)
    }

    /// `k_B(t)`: exactly 1 for `t ≤ 1/B`, exactly 0 for `t ≥ 1`.
    pub fn k(&self, t: f64) -> Result<f64> {
        if t * self.b <= 1.0 {
            return Ok(1.0);
        }
        if t >= 1.0 {
            return Ok(0.0);
        }
        Ok((self.integral(t)? / self.norm).clamp(0.0, 1.0))
    }

    /// `κ_B(t) = √(k_B(t/B) − k_B(t))`.
    pub fn kappa(&self, t: f64) -> Result<f64> {
        checked_sqrt(self.k(t / self.b)? - self.k(t)?)
    }

    /// `η_B(t) = √k_B(t)`.
    pub fn eta(&self, t: f64) -> Result<f64> {
        checked_sqrt(self.k(t)?)
    }
}

fn checked_sqrt(v: f64) -> Result<f64> {
    if v < ROUNDOFF_FLOOR {
        return Err(Error::domain(format!("negative radicand {v:e} in tiling construction")));
    }
    Ok(v.max(0.0).sqrt())
}

/// Sampled scaling function `η` and wavelets `κ_j` on `t = 0..T`.
#[derive(Debug, Clone)]
pub struct TilingFunctions {
    params: TilingParams,
    eta: Vec<f64>,
    kappas: Vec<Vec<f64>>,
}

impl TilingFunctions {
    pub fn params(&self) -> &TilingParams {
        &self.params
    }

    pub fn eta(&self) -> &[f64] {
        &self.eta
    }

    /// `κ_j` for `j = J_min..=J_max`, in that order.
    pub fn kappas(&self) -> &[Vec<f64>] {
        &self.kappas
    }

    pub fn kappa(&self, j: u32) -> Option<&[f64]> {
        j.checked_sub(self.params.j_min)
            .and_then(|k| self.kappas.get(k as usize))
            .map(Vec::as_slice)
    }

    pub fn scales(&self) -> std::ops::RangeInclusive<u32> {
        self.params.j_min..=self.params.j_max()
    }

    /// `η(t)² + Σ_j κ_j(t)²` per index.
    pub fn partition(&self) -> Vec<f64> {
        (0..self.params.length)
            .map(|t| self.eta[t].powi(2) + self.kappas.iter().map(|k| k[t].powi(2)).sum::<f64>())
            .collect()
    }
}

pub fn build_tiling(params: TilingParams) -> Result<TilingFunctions> {
    let step = SmoothStep::new(params.b)?;
    let b = params.b;
    let scaling = b.powi(params.j_min as i32);
    let eta = (0..params.length)
        .map(|t| step.eta(t as f64 / scaling))
        .collect::<Result<Vec<_>>>()?;
    let kappas = (params.j_min..=params.j_max())
        .map(|j| {
            let bj = b.powi(j as i32);
            let (lo, hi) = (bj / b, bj * b);
            (0..params.length)
                .map(|t| {
                    let tf = t as f64;
                    // support is (B^{j−1}, B^{j+1}); pin it exactly
                    if tf <= lo || tf >= hi {
                        Ok(0.0)
                    } else {
                        step.kappa(tf / bj)
                    }
                })
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(TilingFunctions { params, eta, kappas })
}

/// Scaling and per-scale wavelet coefficients on a line.
#[derive(Debug, Clone, PartialEq)]
pub struct WaveletCoefficients {
    pub scaling: Vec<Complex64>,
    /// One line per scale `J_min..=J_max`.
    pub wavelets: Vec<Vec<Complex64>>,
    /// Input values beyond the tiling length that were dropped.
    pub ignored: usize,
}

impl WaveletCoefficients {
    pub fn zeros(tiling: &TilingFunctions) -> Self {
        let t = tiling.params.length;
        WaveletCoefficients {
            scaling: vec![Complex64::new(0.0, 0.0); t],
            wavelets: vec![vec![Complex64::new(0.0, 0.0); t]; tiling.kappas.len()],
            ignored: 0,
        }
    }
}

/// `V(t) = η(t) f_t`, `W^j(t) = κ_j(t) f_t`.
///
/// Lines shorter than the tiling are zero-padded; longer ones are cut and the
/// number of dropped values is reported in `ignored`.
pub fn analysis(line: &[Complex64], tiling: &TilingFunctions) -> WaveletCoefficients {
    let t = tiling.params.length;
    let n = line.len().min(t);
    let mut out = WaveletCoefficients::zeros(tiling);
    out.ignored = line.len().saturating_sub(t);
    for i in 0..n {
        out.scaling[i] = line[i] * tiling.eta[i];
        for (w, k) in out.wavelets.iter_mut().zip(&tiling.kappas) {
            w[i] = line[i] * k[i];
        }
    }
    out
}

/// `f_t = η(t) V(t) + Σ_j κ_j(t) W^j(t)`.
pub fn synthesis(coeffs: &WaveletCoefficients, tiling: &TilingFunctions) -> Result<Vec<Complex64>> {
    let t = tiling.params.length;
    if coeffs.scaling.len() != t {
        return Err(Error::ShapeMismatch {
            expected: t,
            found: coeffs.scaling.len(),
        });
    }
    if coeffs.wavelets.len() != tiling.kappas.len() {
        return Err(Error::ShapeMismatch {
            expected: tiling.kappas.len(),
            found: coeffs.wavelets.len(),
        });
    }
    if let Some(bad) = coeffs.wavelets.iter().find(|w| w.len() != t) {
        return Err(Error::ShapeMismatch {
            expected: t,
            found: bad.len(),
        });
    }
    Ok((0..t)
        .map(|i| {
            coeffs.scaling[i] * tiling.eta[i]
                + coeffs
                    .wavelets
                    .iter()
                    .zip(&tiling.kappas)
                    .map(|(w, k)| w[i] * k[i])
                    .sum::<Complex64>()
        })
        .collect())
}
