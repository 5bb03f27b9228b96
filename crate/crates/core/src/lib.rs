//! Slepian functions and scale-discretised Slepian wavelets on the sphere and
//! on triangle meshes.
//!
//! The crate is organised bottom-up:
//!
//! - [`harmonic`]: orthonormal spherical harmonics, the Gauss–Legendre sampling
//!   grid and exact harmonic transforms.
//! - [`region`]: region descriptions, rasterisation and region quadrature.
//! - [`concentration`]: concentration matrices, the Slepian eigenbasis and
//!   conversions between harmonic and Slepian coefficients.
//! - [`wavelets`]: the scale-discretised tiling of a spectral line.
//! - [`sifting`]: harmonic-space sifting convolution and translation.
//! - [`mesh`]: Laplacian eigenbases, Slepian functions and wavelets on meshes.
//! - [`functions`]: synthetic test functions in harmonic space.

pub mod cache;
pub mod concentration;
pub mod eigen;
mod error;
pub mod functions;
pub mod harmonic;
pub mod mesh;
pub mod quadrature;
pub mod region;
pub mod sifting;
pub mod wavelets;

pub use concentration::{
    build_matrix_general, build_matrix_polar_cap, eigendecompose, forward_slepian, inverse_slepian,
    region_limited_forward, shannon_number, ConcentrationMatrix, SlepianBasis, SlepianCoefficients,
};
pub use error::{Error, Result};
pub use harmonic::{
    forward_sht, inverse_sht, make_grid, normalized_assoc_legendre, spherical_harmonic, Bandlimit,
    QuadratureGrid, SampledField, SphericalCoefficients,
};
pub use region::{area_fraction, parse_region, rasterize, Region, RegionQuadrature, RegionWeights};
pub use wavelets::{TilingFunctions, TilingParams, WaveletCoefficients};
