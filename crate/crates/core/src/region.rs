//! Concentration regions on the sphere.
//!
//! A [`Region`] is declarative. It is turned into numbers two ways:
//! [`rasterize`] marks grid samples by centre membership (used for masks,
//! plotting and the raster area), while [`RegionQuadrature`] is the
//! integration rule the concentration matrix is filled with. Caps and boxes
//! get a product Gauss rule fitted to their boundaries, masks fall back to
//! the raster.

use std::f64::consts::PI;
use std::fmt;
use std::fs;
use std::path::Path;

use crate::harmonic::{make_grid, Bandlimit, QuadratureGrid};
use crate::quadrature::gauss_legendre_interval;
use crate::{Error, Result};

const TWO_PI: f64 = 2.0 * PI;

#[derive(Debug, Clone, PartialEq)]
pub enum Region {
    /// `θ ≤ theta_max` around the north pole.
    PolarCap { theta_max: f64 },
    /// Colatitude-longitude box, angles in radians.
    LatLonBox {
        theta_min: f64,
        theta_max: f64,
        phi_min: f64,
        phi_max: f64,
    },
    /// Sample mask on the grid of a fixed bandlimit, θ-major.
    MaskRaster { bandlimit: Bandlimit, mask: Vec<bool> },
}

impl Region {
    pub fn polar_cap(theta_max: f64) -> Result<Self> {
        if !(theta_max > 0.0 && theta_max <= PI) {
            return Err(Error::domain(format!("polar cap angle {theta_max} outside (0, π]")));
        }
        Ok(Region::PolarCap { theta_max })
    }

    pub fn lat_lon_box(theta_min: f64, theta_max: f64, phi_min: f64, phi_max: f64) -> Result<Self> {
        if !(0.0 <= theta_min && theta_min < theta_max && theta_max <= PI) {
            return Err(Error::domain(format!(
                "colatitude range [{theta_min}, {theta_max}] must satisfy 0 ≤ min < max ≤ π"
            )));
        }
        if !(0.0 <= phi_min && phi_min < phi_max && phi_max <= TWO_PI) {
            return Err(Error::domain(format!(
                "longitude range [{phi_min}, {phi_max}] must satisfy 0 ≤ min < max ≤ 2π"
            )));
        }
        Ok(Region::LatLonBox {
            theta_min,
            theta_max,
            phi_min,
            phi_max,
        })
    }

    pub fn mask(bandlimit: Bandlimit, mask: Vec<bool>) -> Result<Self> {
        let expected = bandlimit.get() * (2 * bandlimit.get() - 1);
        if mask.len() != expected {
            return Err(Error::ShapeMismatch {
                expected,
                found: mask.len(),
            });
        }
        Ok(Region::MaskRaster { bandlimit, mask })
    }

    /// Whole sphere, as the cap of angle π.
    pub fn whole_sphere() -> Self {
        Region::PolarCap { theta_max: PI }
    }

    /// Stable text key: degrees with 17 significant digits, masks hashed.
    pub fn canonical(&self) -> String {
        match self {
            Region::PolarCap { theta_max } => format!("polar-cap:{:.16e}", theta_max.to_degrees()),
            Region::LatLonBox {
                theta_min,
                theta_max,
                phi_min,
                phi_max,
            } => format!(
                "latlon:{:.16e},{:.16e},{:.16e},{:.16e}",
                theta_min.to_degrees(),
                theta_max.to_degrees(),
                phi_min.to_degrees(),
                phi_max.to_degrees()
            ),
            Region::MaskRaster { bandlimit, mask } => {
                // FNV-1a over the mask bits
                let mut h: u64 = 0xcbf2_9ce4_8422_2325;
                for &b in mask {
                    h ^= b as u64;
                    h = h.wrapping_mul(0x0000_0100_0000_01b3);
                }
                format!("mask:L={bandlimit}:{h:016x}")
            }
        }
    }

    fn check_grid(&self, grid: &QuadratureGrid) -> Result<()> {
        if let Region::MaskRaster { bandlimit, .. } = self {
            if *bandlimit != grid.bandlimit() {
                return Err(Error::BandlimitMismatch {
                    expected: grid.bandlimit().get(),
                    found: bandlimit.get(),
                });
            }
        }
        Ok(())
    }
}

impl fmt::Display for Region {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Region::PolarCap { theta_max } => write!(f, "polar-cap:{}", theta_max.to_degrees()),
            Region::LatLonBox {
                theta_min,
                theta_max,
                phi_min,
                phi_max,
            } => write!(
                f,
                "latlon:{},{},{},{}",
                theta_min.to_degrees(),
                theta_max.to_degrees(),
                phi_min.to_degrees(),
                phi_max.to_degrees()
            ),
            Region::MaskRaster { .. } => f.write_str(&self.canonical()),
        }
    }
}

/// Per-sample integration weights of a region on a grid.
#[derive(Debug, Clone, PartialEq)]
pub struct RegionWeights {
    grid: QuadratureGrid,
    weights: Vec<f64>,
}

impl RegionWeights {
    pub fn grid(&self) -> &QuadratureGrid {
        &self.grid
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn total(&self) -> f64 {
        self.weights.iter().sum()
    }

    pub fn inside_count(&self) -> usize {
        self.weights.iter().filter(|&&w| w > 0.0).count()
    }
}

/// Sample-centre membership; boundary samples count as inside.
pub fn rasterize(region: &Region, grid: &QuadratureGrid) -> Result<RegionWeights> {
    region.check_grid(grid)?;
    let n_phi = grid.n_phi();
    let mut weights = Vec::with_capacity(grid.len());
    for (i, &theta) in grid.thetas().iter().enumerate() {
        let w = grid.sample_weight(i);
        for (j, &phi) in grid.phis().iter().enumerate() {
            let inside = match region {
                Region::PolarCap { theta_max } => theta <= *theta_max,
                Region::LatLonBox {
                    theta_min,
                    theta_max,
                    phi_min,
                    phi_max,
                } => *theta_min <= theta && theta <= *theta_max && *phi_min <= phi && phi <= *phi_max,
                Region::MaskRaster { mask, .. } => mask[i * n_phi + j],
            };
            weights.push(if inside { w } else { 0.0 });
        }
    }
    Ok(RegionWeights {
        grid: grid.clone(),
        weights,
    })
}

/// `(1 − cos θ_max) / 2`.
pub fn cap_area_fraction(theta_max: f64) -> f64 {
    (1.0 - theta_max.cos()) / 2.0
}

/// Closed-form area fraction for caps and boxes; `None` for masks.
pub fn exact_area_fraction(region: &Region) -> Option<f64> {
    match region {
        Region::PolarCap { theta_max } => Some(cap_area_fraction(*theta_max)),
        Region::LatLonBox {
            theta_min,
            theta_max,
            phi_min,
            phi_max,
        } => Some((theta_min.cos() - theta_max.cos()) * (phi_max - phi_min) / (4.0 * PI)),
        Region::MaskRaster { .. } => None,
    }
}

/// Raster area on the grid divided by `4π`.
pub fn raster_area_fraction(region: &Region, grid: &QuadratureGrid) -> Result<f64> {
    Ok(rasterize(region, grid)?.total() / (4.0 * PI))
}

/// Fraction of the sphere covered by the region.
///
/// Caps and boxes use their closed forms; masks use the raster quadrature.
pub fn area_fraction(region: &Region, grid: &QuadratureGrid) -> Result<f64> {
    region.check_grid(grid)?;
    match exact_area_fraction(region) {
        Some(a) => Ok(a),
        None => raster_area_fraction(region, grid),
    }
}

/// Parses `polar-cap:<deg>`, `latlon:<θmin>,<θmax>,<φmin>,<φmax>` (degrees)
/// or `mask:<path>`.
pub fn parse_region(spec: &str) -> Result<Region> {
    let (kind, rest) = spec.split_once(':').ok_or_else(|| Error::Parse {
        token: spec.to_string(),
        reason: "expected `<kind>:<arguments>`".into(),
    })?;
    let degrees = |tok: &str| -> Result<f64> {
        let v: f64 = tok.trim().parse().map_err(|_| Error::Parse {
            token: tok.to_string(),
            reason: "not a number".into(),
        })?;
        if !v.is_finite() {
            return Err(Error::Parse {
                token: tok.to_string(),
                reason: "not finite".into(),
            });
        }
        Ok(v)
    };
    let bounded = |tok: &str, v: f64, hi: f64| -> Result<f64> {
        if v < 0.0 || v > hi {
            return Err(Error::Parse {
                token: tok.to_string(),
                reason: format!("angle must lie in [0, {hi}] degrees"),
            });
        }
        Ok(v.to_radians())
    };
    match kind {
        "polar-cap" => {
            let v = degrees(rest)?;
            if v <= 0.0 || v > 180.0 {
                return Err(Error::Parse {
                    token: rest.to_string(),
                    reason: "cap angle must lie in (0, 180] degrees".into(),
                });
            }
            Region::polar_cap(v.to_radians())
        }
        "latlon" => {
            let toks: Vec<&str> = rest.split(',').collect();
            if toks.len() != 4 {
                return Err(Error::Parse {
                    token: rest.to_string(),
                    reason: format!("expected 4 comma-separated angles, found {}", toks.len()),
                });
            }
            let t0 = bounded(toks[0], degrees(toks[0])?, 180.0)?;
            let t1 = bounded(toks[1], degrees(toks[1])?, 180.0)?;
            let p0 = bounded(toks[2], degrees(toks[2])?, 360.0)?;
            let p1 = bounded(toks[3], degrees(toks[3])?, 360.0)?;
            Region::lat_lon_box(t0, t1, p0, p1)
        }
        "mask" => read_mask(Path::new(rest)),
        other => Err(Error::Parse {
            token: other.to_string(),
            reason: "unknown region kind (expected polar-cap, latlon or mask)".into(),
        }),
    }
}

/// Reads a mask file: `L=<int>` then `n_θ` rows of `n_φ` 0/1 tokens.
pub fn read_mask(path: &Path) -> Result<Region> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_mask(&text, path)
}

fn parse_mask(text: &str, path: &Path) -> Result<Region> {
    let bad = |line: usize, reason: String| Error::Format {
        path: path.to_path_buf(),
        line,
        reason,
    };
    let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
    let (n0, header) = lines.next().ok_or_else(|| bad(1, "empty mask file".into()))?;
    let l_value = header
        .trim()
        .strip_prefix("L=")
        .and_then(|v| v.trim().parse::<usize>().ok())
        .ok_or_else(|| bad(n0 + 1, format!("expected `L=<int>`, found `{}`", header.trim())))?;
    let bandlimit = Bandlimit::new(l_value).map_err(|e| bad(n0 + 1, e.to_string()))?;
    let n_theta = l_value;
    let n_phi = 2 * l_value - 1;
    let mut mask = Vec::with_capacity(n_theta * n_phi);
    let mut rows = 0;
    for (n, line) in lines {
        rows += 1;
        if rows > n_theta {
            return Err(bad(n + 1, format!("more than {n_theta} rows for L={l_value}")));
        }
        let before = mask.len();
        for tok in line.split_whitespace() {
            match tok {
                "0" => mask.push(false),
                "1" => mask.push(true),
                _ => return Err(bad(n + 1, format!("token `{tok}` is not 0 or 1"))),
            }
        }
        if mask.len() - before != n_phi {
            return Err(bad(
                n + 1,
                format!("expected {n_phi} entries, found {}", mask.len() - before),
            ));
        }
    }
    if rows != n_theta {
        return Err(bad(rows + 1, format!("expected {n_theta} rows, found {rows}")));
    }
    Region::mask(bandlimit, mask)
}

/// Writes a mask in the format [`read_mask`] accepts.
pub fn write_mask(path: &Path, bandlimit: Bandlimit, mask: &[bool]) -> Result<()> {
    let n_phi = 2 * bandlimit.get() - 1;
    let mut out = format!("L={bandlimit}\n");
    for row in mask.chunks(n_phi) {
        let tokens: Vec<&str> = row.iter().map(|&b| if b { "1" } else { "0" }).collect();
        out.push_str(&tokens.join(" "));
        out.push('\n');
    }
    fs::write(path, out).map_err(|e| Error::io(path, e))
}

/// A region integration rule: `∫_R f dω ≈ Σ_k weights[k] f(points[k])`.
///
/// Every node lies inside the region.
#[derive(Debug, Clone, PartialEq)]
pub struct RegionQuadrature {
    points: Vec<(f64, f64)>,
    weights: Vec<f64>,
}

impl RegionQuadrature {
    /// Integration rule for integrands bandlimited at degree `< 2L − 1`.
    ///
    /// Caps, and boxes spanning the full longitude circle, integrate such
    /// integrands exactly: Gauss–Legendre in `cos θ` times a uniform φ rule.
    /// Other boxes use Gauss–Legendre in θ and φ with enough nodes that the
    /// trigonometric integrands converge to roundoff. Masks reuse the grid
    /// raster.
    pub fn new(region: &Region, bandlimit: Bandlimit) -> Result<Self> {
        let big_l = bandlimit.get();
        match region {
            Region::PolarCap { theta_max } => Ok(Self::full_circle(0.0, *theta_max, big_l)),
            Region::LatLonBox {
                theta_min,
                theta_max,
                phi_min,
                phi_max,
            } => {
                if *phi_min == 0.0 && *phi_max == TWO_PI {
                    return Ok(Self::full_circle(*theta_min, *theta_max, big_l));
                }
                let n_theta = 4 * big_l + 16;
                let n_phi = 8 * big_l + 16;
                let (ts, tw) = gauss_legendre_interval(n_theta, *theta_min, *theta_max);
                let (ps, pw) = gauss_legendre_interval(n_phi, *phi_min, *phi_max);
                let mut points = Vec::with_capacity(n_theta * n_phi);
                let mut weights = Vec::with_capacity(n_theta * n_phi);
                for (t, wt) in ts.iter().zip(&tw) {
                    for (p, wp) in ps.iter().zip(&pw) {
                        points.push((*t, *p));
                        weights.push(wt * t.sin() * wp);
                    }
                }
                Ok(RegionQuadrature { points, weights })
            }
            Region::MaskRaster { .. } => {
                let grid = make_grid(bandlimit);
                Self::from_weights(&rasterize(region, &grid)?)
            }
        }
    }

    fn full_circle(theta_min: f64, theta_max: f64, big_l: usize) -> Self {
        let n_x = 2 * big_l;
        let n_phi = 2 * big_l - 1;
        let (xs, xw) = gauss_legendre_interval(n_x, theta_max.cos(), theta_min.cos());
        let dphi = TWO_PI / n_phi as f64;
        let mut points = Vec::with_capacity(n_x * n_phi);
        let mut weights = Vec::with_capacity(n_x * n_phi);
        // descending x gives ascending θ
        for (x, w) in xs.iter().zip(&xw).rev() {
            for j in 0..n_phi {
                points.push((x.clamp(-1.0, 1.0).acos(), j as f64 * dphi));
                weights.push(w * dphi);
            }
        }
        RegionQuadrature { points, weights }
    }

    /// The in-region samples of a raster.
    pub fn from_weights(weights: &RegionWeights) -> Result<Self> {
        let grid = weights.grid();
        let mut points = Vec::new();
        let mut out = Vec::new();
        for (k, &w) in weights.weights().iter().enumerate() {
            if w > 0.0 {
                let (i, j) = (k / grid.n_phi(), k % grid.n_phi());
                points.push((grid.thetas()[i], grid.phis()[j]));
                out.push(w);
            }
        }
        Ok(RegionQuadrature { points, weights: out })
    }

    pub fn points(&self) -> &[(f64, f64)] {
        &self.points
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn area(&self) -> f64 {
        self.weights.iter().sum()
    }
}
