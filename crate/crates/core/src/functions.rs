//! Synthetic functions on the sphere, given by their harmonic coefficients.
//!
//! Random coefficients come from a SplitMix64 stream, fixed here so results
//! are identical on every platform:
//!
//! ```text
//! state += 0x9E3779B97F4A7C15
//! z = state
//! z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9
//! z = (z ^ (z >> 27)) * 0x94D049BB133111EB
//! out = z ^ (z >> 31)
//! ```
//!
//! Uniforms are `(out >> 11) · 2⁻⁵³`; normals use the Box–Muller cosine branch
//! `√(−2 ln(1 − u₁)) cos(2π u₂)`, two uniforms per normal. Coefficients are
//! drawn in flat index order, real part first.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::harmonic::{forward_sht, make_grid, Bandlimit, SampledField, SphericalCoefficients};
use crate::{Error, Result};

/// SplitMix64 generator with the constants documented at module level.
#[derive(Debug, Clone)]
pub struct SplitMix64 {
    state: u64,
}

impl SplitMix64 {
    pub fn new(seed: u64) -> Self {
        SplitMix64 { state: seed }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(0x9E37_79B9_7F4A_7C15);
        let mut z = self.state;
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^ (z >> 31)
    }

    /// Uniform on `[0, 1)`.
    pub fn next_f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    pub fn next_normal(&mut self) -> f64 {
        let u1 = self.next_f64();
        let u2 = self.next_f64();
        (-2.0 * (1.0 - u1).ln()).sqrt() * (2.0 * PI * u2).cos()
    }
}

/// Axisymmetric bell at the north pole: `f_{l,0} = exp(−l(l+1)σ²)`.
pub fn gaussian(bandlimit: Bandlimit, sigma: f64) -> Result<SphericalCoefficients> {
    if !(sigma > 0.0) {
        return Err(Error::domain(format!("gaussian width must be positive, got {sigma}")));
    }
    let mut c = SphericalCoefficients::zeros(bandlimit);
    for l in 0..bandlimit.get() {
        let lf = l as f64;
        c.set(l, 0, Complex64::new((-lf * (lf + 1.0) * sigma * sigma).exp(), 0.0));
    }
    Ok(c)
}

/// Anisotropic bell on the equator at `φ = 0`, sampled then analysed.
///
/// `exp(−((θ − π/2)²/(2σ_θ²) + φ_w²/(2σ_φ²)))` with `φ_w` wrapped to `(−π, π]`.
pub fn elongated_gaussian(
    bandlimit: Bandlimit,
    sigma_theta: f64,
    sigma_phi: f64,
) -> Result<SphericalCoefficients> {
    if !(sigma_theta > 0.0 && sigma_phi > 0.0) {
        return Err(Error::domain(format!(
            "widths must be positive, got σ_θ={sigma_theta}, σ_φ={sigma_phi}"
        )));
    }
    let field = SampledField::from_fn(make_grid(bandlimit), |theta, phi| {
        let wrapped = if phi > PI { phi - 2.0 * PI } else { phi };
        let d = (theta - PI / 2.0).powi(2) / (2.0 * sigma_theta * sigma_theta)
            + wrapped * wrapped / (2.0 * sigma_phi * sigma_phi);
        Complex64::new((-d).exp(), 0.0)
    });
    forward_sht(&field)
}

/// Seeded unit-normal coefficients.
///
/// With `real` set, only `m ≥ 0` are drawn (`m = 0` real) and the rest follow
/// from `f_{l,−m} = (−1)^m conj(f_{l,m})`.
pub fn random_bandlimited(bandlimit: Bandlimit, seed: u64, real: bool) -> SphericalCoefficients {
    let mut rng = SplitMix64::new(seed);
    let mut c = SphericalCoefficients::zeros(bandlimit);
    for l in 0..bandlimit.get() {
        let li = l as i64;
        if real {
            c.set(l, 0, Complex64::new(rng.next_normal(), 0.0));
            for m in 1..=li {
                let v = Complex64::new(rng.next_normal(), rng.next_normal());
                let sign = if m % 2 == 0 { 1.0 } else { -1.0 };
                c.set(l, m, v);
                c.set(l, -m, v.conj() * sign);
            }
        } else {
            for m in -li..=li {
                c.set(l, m, Complex64::new(rng.next_normal(), rng.next_normal()));
            }
        }
    }
    c
}

/// Names accepted by [`by_name`].
pub const NAMES: &[&str] = &["gaussian", "elongated-gaussian", "random", "harmonic"];

/// Looks up a function by name with `key=value` parameters.
///
/// | name                 | parameters (default)                  |
/// |----------------------|---------------------------------------|
/// | `gaussian`           | `sigma` (0.1)                         |
/// | `elongated-gaussian` | `sigma_theta` (0.1), `sigma_phi` (0.5) |
/// | `random`             | `real` (1); seed from the caller      |
/// | `harmonic`           | `l` (1), `m` (0): unit coefficient    |
pub fn by_name(
    name: &str,
    bandlimit: Bandlimit,
    params: &[(String, f64)],
    seed: u64,
) -> Result<SphericalCoefficients> {
    let allowed: &[&str] = match name {
        "gaussian" => &["sigma"],
        "elongated-gaussian" => &["sigma_theta", "sigma_phi"],
        "random" => &["real"],
        "harmonic" => &["l", "m"],
        other => {
            return Err(Error::Parse {
                token: other.to_string(),
                reason: format!("unknown function (expected one of {})", NAMES.join(", ")),
            })
        }
    };
    for (k, _) in params {
        if !allowed.contains(&k.as_str()) {
            return Err(Error::Parse {
                token: k.clone(),
                reason: format!("`{name}` accepts {}", allowed.join(", ")),
            });
        }
    }
    let get = |key: &str, default: f64| {
        params
            .iter()
            .rev()
            .find(|(k, _)| k == key)
            .map_or(default, |(_, v)| *v)
    };
    match name {
        "gaussian" => gaussian(bandlimit, get("sigma", 0.1)),
        "elongated-gaussian" => elongated_gaussian(bandlimit, get("sigma_theta", 0.1), get("sigma_phi", 0.5)),
        "random" => Ok(random_bandlimited(bandlimit, seed, get("real", 1.0) != 0.0)),
        _ => {
            let l = get("l", 1.0);
            let m = get("m", 0.0);
            if l < 0.0 || l.fract() != 0.0 || m.fract() != 0.0 {
                return Err(Error::domain(format!("harmonic needs integer l ≥ 0 and m, got l={l}, m={m}")));
            }
            SphericalCoefficients::unit(bandlimit, l as usize, m as i64)
        }
    }
}
