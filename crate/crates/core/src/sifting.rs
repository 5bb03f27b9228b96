//! Sifting convolution: componentwise products in harmonic space.
//!
//! `h_{l,m} = f_{l,m} g_{l,m}`, with no conjugation. Translation to `ω₀` is
//! the sifting convolution with the kernel whose coefficients are
//! `Y_{l,m}(ω₀)`, which keeps the two operations consistent by construction.
//! [`sift_convolve_conjugate`] places the conjugate on the kernel, for
//! comparison against that convention.

use num_complex::Complex64;

use crate::harmonic::{harmonics_at, Bandlimit, SphericalCoefficients};
use crate::Result;

pub fn sift_convolve(f: &SphericalCoefficients, g: &SphericalCoefficients) -> Result<SphericalCoefficients> {
    combine(f, g, |a, b| a * b)
}

/// `h_{l,m} = f_{l,m} conj(g_{l,m})`.
pub fn sift_convolve_conjugate(
    f: &SphericalCoefficients,
    g: &SphericalCoefficients,
) -> Result<SphericalCoefficients> {
    combine(f, g, |a, b| a * b.conj())
}

fn combine(
    f: &SphericalCoefficients,
    g: &SphericalCoefficients,
    op: impl Fn(Complex64, Complex64) -> Complex64,
) -> Result<SphericalCoefficients> {
    g.check_bandlimit(f.bandlimit())?;
    let values = f.values().iter().zip(g.values()).map(|(&a, &b)| op(a, b)).collect();
    SphericalCoefficients::from_values(f.bandlimit(), values)
}

/// Kernel coefficients `Y_{l,m}(θ₀, φ₀)` of the translation to `(θ₀, φ₀)`.
pub fn translation_kernel(bandlimit: Bandlimit, theta: f64, phi: f64) -> SphericalCoefficients {
    SphericalCoefficients::from_values(bandlimit, harmonics_at(bandlimit, theta, phi)).expect("L² entries")
}

/// `(T f)_{l,m} = f_{l,m} Y_{l,m}(θ₀, φ₀)`.
pub fn translate(f: &SphericalCoefficients, theta: f64, phi: f64) -> SphericalCoefficients {
    sift_convolve(f, &translation_kernel(f.bandlimit(), theta, phi)).expect("same bandlimit")
}

#[cfg(test)]
mod tests {
    use std::f64::consts::PI;

    use super::*;
    use crate::functions::random_bandlimited;
    use crate::harmonic::{legendre_table, make_grid};

    fn bl(l: usize) -> Bandlimit {
        Bandlimit::new(l).unwrap()
    }

    #[test]
    fn convolution_examples() {
        let b = bl(6);
        let f = random_bandlimited(b, 1, false);
        let ones = SphericalCoefficients::from_values(b, vec![Complex64::new(1.0, 0.0); 36]).unwrap();
        assert_eq!(sift_convolve(&f, &ones).unwrap(), f);

        let g = random_bandlimited(b, 2, false);
        assert_eq!(sift_convolve(&f, &g).unwrap(), sift_convolve(&g, &f).unwrap());

        let mut a = SphericalCoefficients::zeros(b);
        a.set(1, 0, Complex64::new(2.0, 0.0));
        let mut c = SphericalCoefficients::zeros(b);
        c.set(1, 0, Complex64::new(0.5, 0.0));
        let h = sift_convolve(&a, &c).unwrap();
        let mut expect = SphericalCoefficients::zeros(b);
        expect.set(1, 0, Complex64::new(1.0, 0.0));
        assert_eq!(h, expect);

        assert!(sift_convolve(&f, &SphericalCoefficients::zeros(bl(5))).is_err());
    }

    #[test]
    fn conjugate_variant() {
        let b = bl(4);
        let f = random_bandlimited(b, 5, false);
        let g = random_bandlimited(b, 6, false);
        let h = sift_convolve_conjugate(&f, &g).unwrap();
        for k in 0..16 {
            assert_eq!(h.values()[k], f.values()[k] * g.values()[k].conj());
        }
    }

    #[test]
    fn translate_to_north_pole() {
        let b = bl(8);
        let f = random_bandlimited(b, 9, false);
        let t = translate(&f, 0.0, 0.0);
        for l in 0..8usize {
            for m in -(l as i64)..=(l as i64) {
                let v = t.get(l, m);
                if m == 0 {
                    let expect = f.get(l, 0) * ((2 * l + 1) as f64 / (4.0 * PI)).sqrt();
                    assert!((v - expect).norm() < 1e-13);
                } else {
                    assert!(v.norm() < 1e-13);
                }
            }
        }
    }

    #[test]
    fn translate_linearity_and_consistency() {
        let b = bl(7);
        let z = translate(&SphericalCoefficients::zeros(b), 1.0, 2.0);
        assert!(z.values().iter().all(|v| *v == Complex64::new(0.0, 0.0)));

        let f = random_bandlimited(b, 3, true);
        let g = random_bandlimited(b, 4, true);
        let sum: Vec<Complex64> = f.values().iter().zip(g.values()).map(|(a, c)| a + c).collect();
        let fg = SphericalCoefficients::from_values(b, sum).unwrap();
        let lhs = translate(&fg, 0.8, 4.0);
        let (tf, tg) = (translate(&f, 0.8, 4.0), translate(&g, 0.8, 4.0));
        for k in 0..49 {
            assert!((lhs.values()[k] - tf.values()[k] - tg.values()[k]).norm() < 1e-14);
        }

        let kernel = translation_kernel(b, 0.8, 4.0);
        assert_eq!(translate(&f, 0.8, 4.0), sift_convolve(&f, &kernel).unwrap());
    }

    #[test]
    fn translate_is_bounded() {
        let b = bl(10);
        let grid = make_grid(b);
        let f = random_bandlimited(b, 12, false);
        let tables: Vec<Vec<f64>> = grid.thetas().iter().map(|t| legendre_table(10, t.cos())).collect();
        for &theta in grid.thetas() {
            let t = translate(&f, theta, 0.3);
            for l in 0..10usize {
                for m in -(l as i64)..=(l as i64) {
                    let am = m.unsigned_abs() as usize;
                    let bound = tables
                        .iter()
                        .map(|tb| tb[l * (l + 1) / 2 + am].abs())
                        .fold(0.0, f64::max);
                    assert!(t.get(l, m).norm() <= f.get(l, m).norm() * bound * (1.0 + 1e-12));
                }
            }
        }
    }

    proptest::proptest! {
        #[test]
        fn bilinear(seed in 0u64..1000, alpha in -3.0f64..3.0) {
            let b = bl(5);
            let f1 = random_bandlimited(b, seed, false);
            let f2 = random_bandlimited(b, seed + 1, false);
            let g = random_bandlimited(b, seed + 2, false);
            let a = Complex64::new(alpha, 0.0);
            let mix: Vec<Complex64> = f1.values().iter().zip(f2.values()).map(|(x, y)| a * x + y).collect();
            let lhs = sift_convolve(&SphericalCoefficients::from_values(b, mix).unwrap(), &g).unwrap();
            let h1 = sift_convolve(&f1, &g).unwrap();
            let h2 = sift_convolve(&f2, &g).unwrap();
            for k in 0..25 {
                let rhs = a * h1.values()[k] + h2.values()[k];
                proptest::prop_assert!((lhs.values()[k] - rhs).norm() <= 1e-12 * (1.0 + rhs.norm()));
            }
            // associativity
            let h = random_bandlimited(b, seed + 3, false);
            let left = sift_convolve(&sift_convolve(&f1, &g).unwrap(), &h).unwrap();
            let right = sift_convolve(&f1, &sift_convolve(&g, &h).unwrap()).unwrap();
            for k in 0..25 {
                proptest::prop_assert!((left.values()[k] - right.values()[k]).norm() <= 1e-12 * (1.0 + left.values()[k].norm()));
            }
        }
    }
}
