//! Closed-form exponents: `s(q)`, the exceptional-set dimension bound
//! `u(d, alpha)`, mean-value exponents for measures with Fourier decay, and
//! dimension bounds from rectangle covers.

use crate::error::{LabError, Result};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExponentReport {
    pub name: String,
    pub params: BTreeMap<String, f64>,
    pub value: f64,
    pub minimizer_k: Option<u32>,
    /// Candidate values for `k = 0, 1, ...` when the value is a minimum.
    pub candidates: Vec<f64>,
    /// Set when the value exceeds the ambient dimension, i.e. the bound says
    /// nothing.
    pub vacuous: bool,
}

impl ExponentReport {
    fn scalar(name: &str, params: &[(&str, f64)], value: f64) -> Self {
        Self {
            name: name.into(),
            params: params.iter().map(|(k, v)| (k.to_string(), *v)).collect(),
            value,
            minimizer_k: None,
            candidates: Vec::new(),
            vacuous: false,
        }
    }

    fn minimum(name: &str, params: &[(&str, f64)], candidates: Vec<f64>) -> Self {
        let (k, value) = candidates
            .iter()
            .copied()
            .enumerate()
            .fold((0, f64::INFINITY), |best, (k, v)| if v < best.1 { (k, v) } else { best });
        Self {
            minimizer_k: Some(k as u32),
            candidates,
            ..Self::scalar(name, params, value)
        }
    }
}

/// `s(q) = q(q+1)/2`.
pub fn s_of(q: f64) -> Result<f64> {
    if !(q.is_finite() && q >= 0.0) {
        return Err(LabError::invalid(format!("s(q) needs q >= 0, got {q}")));
    }
    Ok(q * (q + 1.0) / 2.0)
}

fn s_int(q: i64) -> f64 {
    (q * (q + 1)) as f64 / 2.0
}

/// Nearest integer; when `x - 1/2` is an integer the result is `x + 1/2`.
pub fn nearest_int(x: f64) -> i64 {
    let y = x - 0.5;
    if (y - y.round()).abs() < 1e-12 {
        (x + 0.5).round() as i64
    } else {
        x.round() as i64
    }
}

fn check_alpha(alpha: f64) -> Result<()> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(LabError::invalid(format!("alpha must lie in (0, 1), got {alpha}")));
    }
    Ok(())
}

fn check_degree(d: u32) -> Result<()> {
    if d < 2 {
        return Err(LabError::invalid(format!("degree d must be >= 2, got {d}")));
    }
    Ok(())
}

fn check_sigma(d: u32, sigma: f64) -> Result<()> {
    if !(sigma > 0.0 && sigma <= f64::from(d)) {
        return Err(LabError::invalid(format!("sigma must lie in (0, {d}], got {sigma}")));
    }
    Ok(())
}

/// `u(d, alpha) = min_{k<d} ((2d^2 + 4d)(1 - alpha) + k(k+1)) / (4 - 2 alpha + 2k)`.
pub fn u_general(d: u32, alpha: f64) -> Result<ExponentReport> {
    check_degree(d)?;
    check_alpha(alpha)?;
    let df = f64::from(d);
    let candidates = (0..d)
        .map(|k| {
            let k = f64::from(k);
            ((2.0 * df * df + 4.0 * df) * (1.0 - alpha) + k * (k + 1.0)) / (4.0 - 2.0 * alpha + 2.0 * k)
        })
        .collect();
    let mut r = ExponentReport::minimum("u", &[("d", df), ("alpha", alpha)], candidates);
    r.vacuous = r.value > df;
    Ok(r)
}

/// `l = [d - sigma + 1/2]` with the rounding of [`nearest_int`].
pub fn ell_of(d: u32, sigma: f64) -> Result<i64> {
    check_degree(d)?;
    check_sigma(d, sigma)?;
    Ok(nearest_int(f64::from(d) - sigma + 0.5))
}

/// `s(d) + s(l) + l(d - sigma - l)`: exponent of the `2 s(d)`-th moment for a
/// measure with Fourier decay exponent `sigma`.
pub fn higher_box_exponent(d: u32, sigma: f64) -> Result<f64> {
    let l = ell_of(d, sigma)?;
    let df = f64::from(d);
    Ok(s_int(i64::from(d)) + s_int(l) + l as f64 * (df - sigma - l as f64))
}

/// With `i = [d - sigma - 1/2]` and `j = [d - sigma + 1/2]`: `j = i + 1` and
/// `s(i) + (i+1)(d - sigma - i) = s(j) + j(d - sigma - j)`.
pub fn case_consistency(d: u32, sigma: f64) -> bool {
    let x = f64::from(d) - sigma;
    let i = nearest_int(x - 0.5);
    let j = nearest_int(x + 0.5);
    if j != i + 1 {
        return false;
    }
    let lhs = s_int(i) + (i + 1) as f64 * (x - i as f64);
    let rhs = s_int(j) + j as f64 * (x - j as f64);
    (lhs - rhs).abs() <= 1e-9 * (1.0 + lhs.abs())
}

/// Convergence threshold of the covering series when `f(zeta_i) = N_i^g`:
/// `min_{k<d} (rho theta - rho alpha + s(k) - g) / (k + 2 - alpha)`.
pub fn hd_bound_boxes(d: u32, alpha: f64, rho: f64, theta: f64, g: f64) -> Result<ExponentReport> {
    check_degree(d)?;
    check_alpha(alpha)?;
    if !(rho > 0.0 && rho.is_finite()) {
        return Err(LabError::invalid(format!("rho must be positive, got {rho}")));
    }
    if !(theta > 0.0 && theta < 1.0) {
        return Err(LabError::invalid(format!("theta must lie in (0, 1), got {theta}")));
    }
    if alpha <= theta {
        return Err(LabError::invalid(format!(
            "alpha = {alpha} must exceed the typical exponent theta = {theta}"
        )));
    }
    if !g.is_finite() {
        return Err(LabError::invalid("profile exponent must be finite"));
    }
    let candidates = (0..d)
        .map(|k| (rho * theta - rho * alpha + s_int(i64::from(k)) - g) / (f64::from(k) + 2.0 - alpha))
        .collect();
    let mut r = ExponentReport::minimum(
        "hd_boxes",
        &[("d", f64::from(d)), ("alpha", alpha), ("rho", rho), ("theta", theta), ("g", g)],
        candidates,
    );
    r.vacuous = r.value > f64::from(d);
    Ok(r)
}

/// Profile exponent of Lebesgue measure, `sum_j (alpha - j - 1)`.
pub fn lebesgue_profile_exponent(d: u32, alpha: f64) -> f64 {
    (1..=d).map(|j| alpha - f64::from(j) - 1.0).sum()
}

/// Profile exponent of the sphere, `(d - 1)(alpha - 1) - s(d) + 1`.
pub fn sphere_profile_exponent(d: u32, alpha: f64) -> f64 {
    f64::from(d - 1) * (alpha - 1.0) - s_int(i64::from(d)) + 1.0
}

/// `1 - (2 alpha - 1) / (D + 1 - alpha)`.
pub fn hd_bound_curve(effective_degree: u32, alpha: f64) -> Result<f64> {
    if effective_degree < 1 {
        return Err(LabError::invalid("effective degree must be >= 1"));
    }
    check_alpha(alpha)?;
    Ok(1.0 - (2.0 * alpha - 1.0) / (f64::from(effective_degree) + 1.0 - alpha))
}

/// Horizontal segment bound `3(1 - alpha)/(2 - alpha)` against the planar
/// bound `u(2, alpha)`.
pub fn segment_comparison(alpha: f64) -> Result<(f64, f64)> {
    if !(alpha > 0.5 && alpha < 1.0) {
        return Err(LabError::invalid(format!("alpha must lie in (1/2, 1), got {alpha}")));
    }
    Ok((hd_bound_curve(1, alpha)?, u_general(2, alpha)?.value))
}

/// Every formula evaluated at one parameter set, for the `exponents` command.
pub fn exponent_table(d: u32, alpha: f64, sigma: f64, rho: f64, theta: f64) -> Result<Vec<ExponentReport>> {
    let df = f64::from(d);
    let mut out = vec![
        ExponentReport::scalar("s", &[("q", df)], s_of(df)?),
        u_general(d, alpha)?,
        ExponentReport::scalar("ell", &[("d", df), ("sigma", sigma)], ell_of(d, sigma)? as f64),
        ExponentReport::scalar(
            "higher_box",
            &[("d", df), ("sigma", sigma)],
            higher_box_exponent(d, sigma)?,
        ),
        ExponentReport::scalar("moment_dim", &[("D", df), ("alpha", alpha)], hd_bound_curve(d, alpha)?),
    ];
    if alpha > 0.5 {
        out.push(ExponentReport::scalar(
            "segment_dim",
            &[("D", 1.0), ("alpha", alpha)],
            segment_comparison(alpha)?.0,
        ));
    }
    if alpha > theta {
        let mut leb = hd_bound_boxes(d, alpha, 2.0 * s_int(i64::from(d)), 0.5, lebesgue_profile_exponent(d, alpha))?;
        leb.name = "hd_boxes_lebesgue".into();
        out.push(leb);
        let mut sph = hd_bound_boxes(d, alpha, rho, theta, sphere_profile_exponent(d, alpha))?;
        sph.name = "hd_boxes_sphere".into();
        out.push(sph);
    }
    Ok(out)
}
