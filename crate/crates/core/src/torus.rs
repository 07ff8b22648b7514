//! Points of the torus `[0,1)^d` and exact polynomial phases.
//!
//! Each coordinate is held twice: as an `f64` in `[0,1)` and as a 128-bit
//! fixed-point fraction `X = x * 2^128`. The fixed-point image is exact for
//! every `f64` coordinate not smaller than `2^-75`, and it makes the phase
//! `x_1 n + ... + x_d n^d mod 1` an exact wrapping integer computation: reduction
//! modulo one is reduction modulo `2^128`, and no fractional bits are lost no
//! matter how large `n^d` is.

use crate::error::{LabError, Result};
use num_complex::Complex64;
use std::f64::consts::TAU;

const TWO_POW_128: f64 = 340_282_366_920_938_463_463_374_607_431_768_211_456.0;
const TWO_POW_MINUS_53: f64 = 1.0 / 9_007_199_254_740_992.0;

/// Reduce a real number into `[0, 1)`.
#[inline]
pub fn reduce_unit(x: f64) -> f64 {
    let r = x.rem_euclid(1.0);
    if r >= 1.0 {
        0.0
    } else {
        r
    }
}

#[inline]
fn to_fixed(x: f64) -> u128 {
    // x is in [0,1); the product is exact and the cast truncates below 2^-128.
    (x * TWO_POW_128) as u128
}

/// Fixed-point fraction to `[0,1)`, truncated to 53 bits.
#[inline]
pub fn fixed_to_unit(p: u128) -> f64 {
    (p >> 75) as f64 * TWO_POW_MINUS_53
}

/// `e(theta) = exp(2 pi i theta)`.
#[inline]
pub fn e(theta: f64) -> Complex64 {
    let t = theta - theta.round();
    let (s, c) = (TAU * t).sin_cos();
    Complex64::new(c, s)
}

/// `e(p / 2^128)` for a fixed-point phase.
#[inline]
pub fn e_fixed(p: u128) -> Complex64 {
    // Centre the phase in [-1/2, 1/2) before scaling to radians.
    let signed = p as i128;
    let t = (signed >> 75) as f64 * TWO_POW_MINUS_53;
    let (s, c) = (TAU * t).sin_cos();
    Complex64::new(c, s)
}

#[derive(Debug, Clone, PartialEq)]
pub struct TorusPoint {
    coords: Vec<f64>,
    fixed: Vec<u128>,
}

impl TorusPoint {
    /// Build a point from real coordinates, reducing each modulo one.
    pub fn new(coords: impl Into<Vec<f64>>) -> Result<Self> {
        let mut coords: Vec<f64> = coords.into();
        if coords.len() < 2 {
            return Err(LabError::UnsupportedDimension(format!(
                "torus points need d >= 2, got d = {}",
                coords.len()
            )));
        }
        if let Some(bad) = coords.iter().find(|c| !c.is_finite()) {
            return Err(LabError::invalid(format!("non-finite coordinate {bad}")));
        }
        for c in coords.iter_mut() {
            *c = reduce_unit(*c);
        }
        let fixed = coords.iter().map(|&c| to_fixed(c)).collect();
        Ok(Self { coords, fixed })
    }

    pub fn zero(d: usize) -> Result<Self> {
        Self::new(vec![0.0; d])
    }

    /// Point given directly by its fixed-point image.
    pub fn from_fixed(fixed: Vec<u128>) -> Result<Self> {
        if fixed.len() < 2 {
            return Err(LabError::UnsupportedDimension(format!(
                "torus points need d >= 2, got d = {}",
                fixed.len()
            )));
        }
        let coords = fixed.iter().map(|&p| fixed_to_unit(p)).collect();
        Ok(Self { coords, fixed })
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    pub fn fixed(&self) -> &[u128] {
        &self.fixed
    }

    /// The point `-x mod 1`, computed exactly on the fixed-point image.
    pub fn negated(&self) -> Self {
        let fixed: Vec<u128> = self.fixed.iter().map(|p| p.wrapping_neg()).collect();
        let coords = fixed.iter().map(|&p| fixed_to_unit(p)).collect();
        Self { coords, fixed }
    }

    /// Exact phase `sum_j X_j n^j mod 2^128`.
    #[inline]
    pub fn phase_fixed(&self, n: u64) -> u128 {
        phase_fixed(&self.fixed, n)
    }
}

#[inline]
pub(crate) fn phase_fixed(fixed: &[u128], n: u64) -> u128 {
    let n = n as u128;
    let mut pow = n;
    let mut acc: u128 = 0;
    for &x in fixed {
        acc = acc.wrapping_add(x.wrapping_mul(pow));
        pow = pow.wrapping_mul(n);
    }
    acc
}

/// `x_1 n + ... + x_d n^d mod 1`, in `[0, 1)`.
///
/// Exact modular arithmetic on the fixed-point image; the only rounding is
/// the final truncation to 53 bits (error below `2^-53`).
pub fn phase(x: &TorusPoint, n: u64) -> Result<f64> {
    if n == 0 {
        return Err(LabError::invalid("phase index n must be >= 1"));
    }
    Ok(fixed_to_unit(x.phase_fixed(n)))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn phase_examples() {
        let z = TorusPoint::new(vec![0.0, 0.0]).unwrap();
        assert_eq!(phase(&z, 7).unwrap(), 0.0);
        let h = TorusPoint::new(vec![0.5, 0.5]).unwrap();
        assert_eq!(phase(&h, 2).unwrap(), 0.0);
        let q = TorusPoint::new(vec![0.25, 0.0]).unwrap();
        assert_eq!(phase(&q, 3).unwrap(), 0.75);
    }

    #[test]
    fn phase_rejects_zero_index() {
        let z = TorusPoint::zero(2).unwrap();
        assert!(phase(&z, 0).is_err());
    }

    #[test]
    fn construction_reduces_and_validates() {
        let p = TorusPoint::new(vec![1.25, -0.25, 3.0]).unwrap();
        assert_eq!(p.coords(), &[0.25, 0.75, 0.0]);
        assert!(TorusPoint::new(vec![0.1]).is_err());
        assert!(TorusPoint::new(vec![0.1, f64::NAN]).is_err());
        let tiny = TorusPoint::new(vec![-1e-300, 0.0]).unwrap();
        assert!(tiny.coords()[0] < 1.0);
    }

    #[test]
    fn phase_is_exact_for_dyadic_points() {
        // x = (a/2^20, b/2^20): x_j n^j mod 1 computed with exact integers.
        let a: u128 = 724_511;
        let b: u128 = 91_003;
        let x = TorusPoint::new(vec![a as f64 / 1_048_576.0, b as f64 / 1_048_576.0]).unwrap();
        for n in [1u64, 17, 4096, 1 << 20, 123_456_789] {
            let nn = n as u128;
            let num = (a * nn + b * ((nn * nn) % (1 << 20))) % (1 << 20);
            assert_eq!(phase(&x, n).unwrap(), num as f64 / 1_048_576.0, "n = {n}");
        }
    }

    #[test]
    fn phase_agrees_with_compensated_float_for_moderate_powers() {
        // Two-term evaluation: x * n^j split into hi + lo with an FMA, each
        // reduced mod 1; valid while n^j stays below 2^53.
        let x = TorusPoint::new(vec![std::f64::consts::FRAC_1_PI, std::f64::consts::FRAC_1_SQRT_2, 0.141_592_653_589_793_1]).unwrap();
        for n in [3u64, 999, 65_535] {
            let mut acc = 0.0f64;
            let mut pow = 1.0f64;
            for &c in x.coords() {
                pow *= n as f64;
                let hi = c * pow;
                let lo = c.mul_add(pow, -hi);
                acc += reduce_unit(hi) + lo;
            }
            let expect = reduce_unit(acc);
            let got = phase(&x, n).unwrap();
            let diff = (got - expect).abs();
            let diff = diff.min(1.0 - diff);
            assert!(diff < 1e-12, "n = {n}: {got} vs {expect}");
        }
    }

    #[test]
    fn negation_is_exact() {
        let x = TorusPoint::new(vec![0.3, 0.123_456_789]).unwrap();
        let y = x.negated();
        for n in [1u64, 100, 10_000] {
            assert_eq!(x.phase_fixed(n).wrapping_add(y.phase_fixed(n)), 0);
        }
    }

    #[test]
    fn e_fixed_matches_e() {
        for &t in &[0.0, 0.1, 0.25, 0.5, 0.75, 0.999] {
            let p = to_fixed(t);
            assert!((e_fixed(p) - e(t)).norm() < 1e-15);
        }
    }
}
