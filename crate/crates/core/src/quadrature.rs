//! One-dimensional quadrature rules: midpoint, trapezoid on periodic
//! integrands, and composite Gauss–Legendre panels.

use std::collections::HashMap;
use std::f64::consts::PI;
use std::sync::{Arc, Mutex, OnceLock};

/// Nodes and weights of an `n`-point rule on `[-1, 1]`.
#[derive(Debug, Clone)]
pub struct Rule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let (mut p0, mut p1) = (1.0, x);
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, dp)
}

fn compute_gauss_legendre(n: usize) -> Rule {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    if n == 1 {
        nodes[0] = 0.0;
        weights[0] = 2.0;
        return Rule { nodes, weights };
    }
    for i in 0..n.div_ceil(2) {
        let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        for _ in 0..100 {
            let (p, dp) = legendre_with_derivative(n, x);
            let dx = p / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let (_, dp) = legendre_with_derivative(n, x);
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    if n % 2 == 1 {
        nodes[n / 2] = 0.0;
    }
    Rule { nodes, weights }
}

/// Gauss–Legendre rule of order `n` on `[-1, 1]`, cached.
pub fn gauss_legendre(n: usize) -> Arc<Rule> {
    static CACHE: OnceLock<Mutex<HashMap<usize, Arc<Rule>>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    let mut guard = cache.lock().expect("quadrature cache poisoned");
    guard
        .entry(n.max(1))
        .or_insert_with(|| Arc::new(compute_gauss_legendre(n.max(1))))
        .clone()
}

/// Order used inside every composite panel.
pub const PANEL_ORDER: usize = 16;

/// Composite Gauss–Legendre rule on `[a, b]` with `panels` equal panels.
pub fn composite(a: f64, b: f64, panels: usize) -> Rule {
    let gl = gauss_legendre(PANEL_ORDER);
    let panels = panels.max(1);
    let h = (b - a) / panels as f64;
    let mut nodes = Vec::with_capacity(panels * PANEL_ORDER);
    let mut weights = Vec::with_capacity(panels * PANEL_ORDER);
    for p in 0..panels {
        let lo = a + h * p as f64;
        for (x, w) in gl.nodes.iter().zip(&gl.weights) {
            nodes.push(lo + 0.5 * h * (x + 1.0));
            weights.push(0.5 * h * w);
        }
    }
    Rule { nodes, weights }
}

/// Midpoint nodes `a + (b - a)(k + 1/2)/R`.
pub fn midpoint(a: f64, b: f64, resolution: usize) -> Rule {
    let h = (b - a) / resolution as f64;
    Rule {
        nodes: (0..resolution).map(|k| a + h * (k as f64 + 0.5)).collect(),
        weights: vec![h; resolution],
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gauss_legendre_integrates_polynomials_exactly() {
        for n in [1usize, 2, 5, 16, 33] {
            let r = gauss_legendre(n);
            for deg in 0..2 * n {
                let got: f64 = r.nodes.iter().zip(&r.weights).map(|(x, w)| w * x.powi(deg as i32)).sum();
                let expect = if deg % 2 == 1 { 0.0 } else { 2.0 / (deg as f64 + 1.0) };
                assert!((got - expect).abs() < 1e-13, "n={n} deg={deg}: {got}");
            }
        }
    }

    #[test]
    fn known_two_point_rule() {
        let r = gauss_legendre(2);
        assert!((r.nodes[1] - 1.0 / 3f64.sqrt()).abs() < 1e-15);
        assert!((r.weights[0] - 1.0).abs() < 1e-15);
    }

    #[test]
    fn composite_integrates_oscillation() {
        // int_0^1 cos(2 pi 40 t + 1) dt
        let r = composite(0.0, 1.0, 40);
        let got: f64 = r.nodes.iter().zip(&r.weights).map(|(t, w)| w * (2.0 * PI * 40.0 * t + 1.0).cos()).sum();
        let expect = ((2.0 * PI * 40.0 + 1.0).sin() - 1f64.sin()) / (2.0 * PI * 40.0);
        assert!((got - expect).abs() < 1e-14);
    }

    #[test]
    fn midpoint_nodes() {
        let r = midpoint(0.3, 1.0, 7);
        assert!((r.nodes[0] - (0.3 + 0.7 * 0.5 / 7.0)).abs() < 1e-15);
        assert!((r.weights.iter().sum::<f64>() - 0.7).abs() < 1e-15);
    }
}
