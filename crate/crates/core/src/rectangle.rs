//! Axis-parallel boxes `R(x, zeta) = prod_j [x_j - zeta_j, x_j + zeta_j)`,
//! clipped to the unit cube. Boxes never wrap around the torus.

use crate::error::{LabError, Result};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Rectangle {
    center: Vec<f64>,
    half_sides: Vec<f64>,
}

impl Rectangle {
    /// The centre is given in ambient coordinates and is not reduced modulo
    /// one, so boxes around points on the cube boundary are expressible.
    pub fn new(center: Vec<f64>, half_sides: Vec<f64>) -> Result<Self> {
        if center.len() != half_sides.len() || center.is_empty() {
            return Err(LabError::invalid("centre and half-sides must have equal nonzero length"));
        }
        if center.iter().any(|c| !c.is_finite()) {
            return Err(LabError::invalid("non-finite rectangle centre"));
        }
        if let Some(z) = half_sides.iter().find(|z| !(**z > 0.0 && **z < 1.0)) {
            return Err(LabError::invalid(format!("half-side {z} outside (0, 1)")));
        }
        Ok(Self { center, half_sides })
    }

    pub fn dim(&self) -> usize {
        self.center.len()
    }

    pub fn center(&self) -> &[f64] {
        &self.center
    }

    pub fn half_sides(&self) -> &[f64] {
        &self.half_sides
    }

    /// Full side lengths `2 zeta_j` (before clipping).
    pub fn side_lengths(&self) -> Vec<f64> {
        self.half_sides.iter().map(|z| 2.0 * z).collect()
    }

    /// Clipped interval `[lo, hi)` in coordinate `j`; may be empty.
    pub fn interval(&self, j: usize) -> (f64, f64) {
        let lo = (self.center[j] - self.half_sides[j]).max(0.0);
        let hi = (self.center[j] + self.half_sides[j]).min(1.0);
        (lo, hi)
    }

    pub fn contains(&self, p: &[f64]) -> bool {
        p.len() == self.dim()
            && (0..self.dim()).all(|j| {
                let (lo, hi) = self.interval(j);
                p[j] >= lo && p[j] < hi
            })
    }

    /// Half-open boxes sharing only a face are disjoint.
    pub fn is_disjoint(&self, other: &Rectangle) -> bool {
        (0..self.dim()).any(|j| {
            let (a0, a1) = self.interval(j);
            let (b0, b1) = other.interval(j);
            a1 <= b0 || b1 <= a0 || a1 <= a0 || b1 <= b0
        })
    }

    /// Same centre, half-sides multiplied by `factor`. Half-sides of the
    /// result may exceed one; clipping keeps the realised set in the cube.
    pub fn scaled(&self, factor: f64) -> Rectangle {
        Rectangle {
            center: self.center.clone(),
            half_sides: self.half_sides.iter().map(|z| z * factor).collect(),
        }
    }

    /// Lebesgue volume of the clipped box.
    pub fn volume(&self) -> f64 {
        (0..self.dim())
            .map(|j| {
                let (lo, hi) = self.interval(j);
                (hi - lo).max(0.0)
            })
            .product()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn touching_boxes_are_disjoint() {
        let a = Rectangle::new(vec![0.2, 0.5], vec![0.1, 0.1]).unwrap();
        let b = Rectangle::new(vec![0.4, 0.5], vec![0.1, 0.1]).unwrap();
        assert!(a.is_disjoint(&b));
        let c = Rectangle::new(vec![0.39, 0.5], vec![0.1, 0.1]).unwrap();
        assert!(!a.is_disjoint(&c));
    }

    #[test]
    fn clipping_and_containment() {
        let r = Rectangle::new(vec![0.05, 0.5], vec![0.1, 0.2]).unwrap();
        assert_eq!(r.interval(0), (0.0, 0.15000000000000002));
        assert!(r.contains(&[0.0, 0.5]));
        assert!(!r.contains(&[0.15000000000000002, 0.5]));
        assert!((r.volume() - 0.15000000000000002 * 0.4).abs() < 1e-15);
    }

    #[test]
    fn validation() {
        assert!(Rectangle::new(vec![0.5], vec![1.0]).is_err());
        assert!(Rectangle::new(vec![0.5, 0.5], vec![0.1]).is_err());
    }
}
