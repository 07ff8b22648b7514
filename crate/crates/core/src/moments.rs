//! Restricted mean values `int |S_{a,d}(x; N)|^rho d mu(x)`, growth fits,
//! the theorem exponents they are compared against, and the lattice sums
//! `sum_{xi in D_N} |mu^(xi)|^2` over moment-curve arcs.

use crate::error::{LabError, Result};
use crate::exponents::{higher_box_exponent, s_of};
use crate::fit::least_squares;
use crate::measures::MeasureSpec;
use crate::quadrature::{gauss_legendre, PANEL_ORDER};
use crate::rng::Stream;
use crate::summation::{chunked_sum, Neumaier, REDUCTION_CHUNK};
use crate::torus::{e, TorusPoint};
use crate::weights::WeightSequence;
use crate::weyl::{weyl_sum, Method};
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

/// Node cap for quadrature moments.
pub const MOMENT_NODE_CAP: usize = 100_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EstimateMethod {
    Mc,
    Quadrature,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MomentEstimate {
    pub value: f64,
    pub stderr: f64,
    pub rho: f64,
    pub n: u64,
    pub measure: MeasureSpec,
    pub method: EstimateMethod,
    pub sample_count: u64,
}

/// Running mean and sum of squared deviations, merged chunk by chunk.
#[derive(Debug, Clone, Copy, Default)]
struct Moments {
    count: f64,
    mean: f64,
    m2: f64,
}

impl Moments {
    fn push(&mut self, x: f64) {
        self.count += 1.0;
        let delta = x - self.mean;
        self.mean += delta / self.count;
        self.m2 += delta * (x - self.mean);
    }

    fn merge(self, other: Moments) -> Moments {
        if other.count == 0.0 {
            return self;
        }
        if self.count == 0.0 {
            return other;
        }
        let count = self.count + other.count;
        let delta = other.mean - self.mean;
        Moments {
            count,
            mean: self.mean + delta * other.count / count,
            m2: self.m2 + other.m2 + delta * delta * self.count * other.count / count,
        }
    }

    fn stderr(&self) -> f64 {
        if self.count < 2.0 {
            return 0.0;
        }
        (self.m2.max(0.0) / (self.count - 1.0) / self.count).sqrt()
    }
}

/// Monte Carlo means of several integrands on one shared sample set.
///
/// Samples are drawn in fixed chunks of [`REDUCTION_CHUNK`]; chunk `c` uses
/// the stream `stream.derive_index(c)`, so results do not depend on the
/// number of worker threads.
pub fn integrate_mc_many<F>(m: &MeasureSpec, samples: u64, stream: &Stream, k: usize, f: F) -> Result<Vec<(f64, f64)>>
where
    F: Fn(&TorusPoint) -> Result<Vec<f64>> + Sync,
{
    if samples < 2 {
        return Err(LabError::invalid("Monte Carlo needs at least 2 samples"));
    }
    let chunk = REDUCTION_CHUNK as u64;
    let chunks = samples.div_ceil(chunk);
    let partials: Vec<Vec<Moments>> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut s = stream.derive_index(c);
            let mut acc = vec![Moments::default(); k];
            let hi = ((c + 1) * chunk).min(samples);
            for _ in c * chunk..hi {
                let x = m.sample(&mut s);
                let vals = f(&x)?;
                for (a, v) in acc.iter_mut().zip(vals) {
                    a.push(v);
                }
            }
            Ok(acc)
        })
        .collect::<Result<_>>()?;
    let mut total = vec![Moments::default(); k];
    for p in partials {
        for (t, q) in total.iter_mut().zip(p) {
            *t = t.merge(q);
        }
    }
    Ok(total.into_iter().map(|t| (t.mean, t.stderr())).collect())
}

/// Monte Carlo mean and standard error of `f` under `mu`.
pub fn integrate_mc<F>(m: &MeasureSpec, samples: u64, stream: &Stream, f: F) -> Result<(f64, f64)>
where
    F: Fn(&TorusPoint) -> Result<f64> + Sync,
{
    Ok(integrate_mc_many(m, samples, stream, 1, |x| f(x).map(|v| vec![v]))?[0])
}

fn check_moment_args(rho: f64, n: u64) -> Result<()> {
    if !(rho > 0.0 && rho.is_finite()) {
        return Err(LabError::invalid(format!("rho must be positive, got {rho}")));
    }
    if n == 0 {
        return Err(LabError::invalid("N must be >= 1"));
    }
    Ok(())
}

/// Monte Carlo estimate of `int |S_{a,d}(x; N)|^rho d mu(x)`.
pub fn moment_mc(
    m: &MeasureSpec,
    rho: f64,
    n: u64,
    w: &WeightSequence,
    samples: u64,
    stream: &Stream,
) -> Result<MomentEstimate> {
    Ok(moment_mc_many(m, &[rho], n, w, samples, stream)?.remove(0))
}

/// Several exponents on the same sample set.
pub fn moment_mc_many(
    m: &MeasureSpec,
    rhos: &[f64],
    n: u64,
    w: &WeightSequence,
    samples: u64,
    stream: &Stream,
) -> Result<Vec<MomentEstimate>> {
    for &rho in rhos {
        check_moment_args(rho, n)?;
    }
    if samples < 100 {
        return Err(LabError::invalid("moment_mc needs at least 100 samples"));
    }
    let res = integrate_mc_many(m, samples, stream, rhos.len(), |x| {
        let s = weyl_sum(x, n, w, Method::Incremental)?.value.norm();
        Ok(rhos.iter().map(|r| s.powf(*r)).collect())
    })?;
    Ok(rhos
        .iter()
        .zip(res)
        .map(|(&rho, (value, stderr))| MomentEstimate {
            value,
            stderr,
            rho,
            n,
            measure: m.clone(),
            method: EstimateMethod::Mc,
            sample_count: samples,
        })
        .collect())
}

/// Largest rate (cycles per unit parameter) of any phase `x_j(t) n^j` along
/// a one-parameter measure, for `n <= N`.
fn top_speed(m: &MeasureSpec, n: u64) -> f64 {
    let nf = n as f64;
    match m {
        MeasureSpec::Segment { omega } => omega
            .iter()
            .enumerate()
            .map(|(j, w)| w * nf.powi(j as i32 + 1))
            .sum(),
        MeasureSpec::MomentCurve { d, b, .. } => (1..=*d)
            .map(|j| j as f64 * nf.powi(j as i32) * b.powi(j as i32 - 1))
            .sum(),
        _ => 0.0,
    }
}

fn midpoint_moment(m: &MeasureSpec, rho: f64, n: u64, w: &WeightSequence, r: usize) -> Result<f64> {
    let (a, b) = m.parameter_interval().expect("one-parameter measure");
    let h = (b - a) / r as f64;
    let errors = std::sync::Mutex::new(None);
    let total = chunked_sum(r, |k| {
        let t = a + h * (k as f64 + 0.5);
        match m
            .curve_torus_point(t)
            .and_then(|x| weyl_sum(&x, n, w, Method::Incremental))
        {
            Ok(s) => s.value.norm().powf(rho),
            Err(err) => {
                errors.lock().expect("error slot").get_or_insert(err);
                0.0
            }
        }
    });
    if let Some(err) = errors.into_inner().expect("error slot") {
        return Err(err);
    }
    Ok(total / r as f64)
}

/// Midpoint-rule estimate of the moment over a segment or moment-curve arc.
///
/// The node count is raised to at least eight nodes per cycle of the fastest
/// phase. The estimate at `R` nodes is accepted when it differs from the
/// estimate at `R/2` by less than one percent; otherwise `R` doubles until
/// [`MOMENT_NODE_CAP`].
pub fn moment_quadrature(
    m: &MeasureSpec,
    rho: f64,
    n: u64,
    w: &WeightSequence,
    resolution: usize,
) -> Result<MomentEstimate> {
    moment_quadrature_capped(m, rho, n, w, resolution, MOMENT_NODE_CAP)
}

pub fn moment_quadrature_capped(
    m: &MeasureSpec,
    rho: f64,
    n: u64,
    w: &WeightSequence,
    resolution: usize,
    cap: usize,
) -> Result<MomentEstimate> {
    check_moment_args(rho, n)?;
    let (a, b) = m
        .parameter_interval()
        .ok_or_else(|| LabError::UnsupportedDimension(format!("{m} is not a one-parameter measure")))?;
    let rule = (8.0 * top_speed(m, n) * (b - a)).ceil();
    if rule > cap as f64 {
        return Err(LabError::ResolutionOverflow {
            required: rule as u64,
            cap: cap as u64,
        });
    }
    let mut r = resolution.max(rule as usize).max(16);
    r += r % 2;
    let mut coarse = midpoint_moment(m, rho, n, w, r / 2)?;
    loop {
        let fine = midpoint_moment(m, rho, n, w, r)?;
        let change = (fine - coarse).abs();
        if change < 0.01 * fine.abs().max(f64::MIN_POSITIVE) || (fine == 0.0 && coarse == 0.0) {
            return Ok(MomentEstimate {
                value: fine,
                stderr: 0.0,
                rho,
                n,
                measure: m.clone(),
                method: EstimateMethod::Quadrature,
                sample_count: r as u64,
            });
        }
        if r * 2 > cap {
            return Err(LabError::NotConverged(format!(
                "relative change {:.3e} at {r} nodes",
                change / fine.abs().max(f64::MIN_POSITIVE)
            )));
        }
        coarse = fine;
        r *= 2;
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GrowthFit {
    pub points: Vec<(f64, f64)>,
    pub slope: f64,
    pub intercept: f64,
    /// Largest absolute deviation in `ln value`.
    pub residual: f64,
}

/// Least-squares fit of `ln value` against `ln N`.
pub fn growth_fit(points: &[(f64, f64)]) -> Result<GrowthFit> {
    if points.len() < 3 {
        return Err(LabError::invalid("growth_fit needs at least 3 points"));
    }
    if points.windows(2).any(|p| p[1].0 <= p[0].0) {
        return Err(LabError::invalid("N must be strictly increasing"));
    }
    if points.iter().any(|(x, y)| !(*x > 0.0 && *y > 0.0 && y.is_finite())) {
        return Err(LabError::invalid("growth_fit needs positive N and values"));
    }
    let xs: Vec<f64> = points.iter().map(|p| p.0.ln()).collect();
    let ys: Vec<f64> = points.iter().map(|p| p.1.ln()).collect();
    let f = least_squares(&xs, &ys)?;
    Ok(GrowthFit {
        points: points.to_vec(),
        slope: f.slope,
        intercept: f.intercept,
        residual: f.max_residual,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Theorem {
    /// Second moment under Fourier decay `sigma >= 1/d`.
    Mvt,
    /// `2 s(d)`-th moment under decay `sigma`.
    MvtHigherBox,
    /// `2 s(d)`-th moment under summable Fourier coefficients.
    MvtHigher,
    /// `2s`-th moment over the moment curve restricted to `[delta, 1]`.
    MvtMom,
    /// `2s`-th moment from the second moment and the trivial bound.
    Trivial,
    /// Second moment over a segment.
    MvtL,
}

impl std::str::FromStr for Theorem {
    type Err = LabError;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s.to_ascii_lowercase().as_str() {
            "mvt" => Self::Mvt,
            "mvt-higher-box" => Self::MvtHigherBox,
            "mvt-higher" => Self::MvtHigher,
            "mvt-mom" => Self::MvtMom,
            "trivial" => Self::Trivial,
            "mvt-l" => Self::MvtL,
            other => return Err(LabError::invalid(format!("unknown theorem tag '{other}'"))),
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct BoundParams {
    pub d: u32,
    pub sigma: f64,
    pub s: f64,
    pub delta: f64,
}

/// `(power of N, power of delta)` in the theorem's upper bound, without the
/// `o(1)`.
pub fn bound_exponent(theorem: Theorem, p: BoundParams) -> Result<(f64, f64)> {
    if p.d < 2 {
        return Err(LabError::invalid("d must be >= 2"));
    }
    let d = f64::from(p.d);
    let sd = s_of(d)?;
    let need_s = || {
        if p.s >= 1.0 && p.s.is_finite() {
            Ok(p.s)
        } else {
            Err(LabError::invalid(format!("s must be >= 1, got {}", p.s)))
        }
    };
    match theorem {
        Theorem::Mvt => {
            if p.sigma.is_nan() || p.sigma < 1.0 / d - 1e-12 {
                return Err(LabError::invalid(format!(
                    "the second-moment bound needs sigma >= 1/d = {}, got {}",
                    1.0 / d,
                    p.sigma
                )));
            }
            Ok((1.0, 0.0))
        }
        Theorem::MvtHigherBox => Ok((higher_box_exponent(p.d, p.sigma)?, 0.0)),
        Theorem::MvtHigher => Ok((sd, 0.0)),
        Theorem::MvtMom => {
            let s = need_s()?;
            if !(p.delta > 0.0 && p.delta < 1.0) {
                return Err(LabError::invalid(format!("delta must lie in (0, 1), got {}", p.delta)));
            }
            Ok((s.max(2.0 * s - sd / 2.0) + sd / 2.0 - d / 2.0, (1.0 - d) / 2.0))
        }
        Theorem::Trivial => Ok((2.0 * need_s()? - 1.0, 0.0)),
        Theorem::MvtL => Ok((1.0, 0.0)),
    }
}

/// The diagonal `n = m` of the expanded square: `mass(mu) * sum |a(N,n)|^2`.
pub fn diagonal_term(m: &MeasureSpec, w: &WeightSequence, n: u64) -> f64 {
    m.mass() * w.l2_norm_sq(n)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LatticeL2 {
    pub d: u32,
    pub n: u64,
    pub interval: (f64, f64),
    pub sum: f64,
    /// `sum / reference`.
    pub ratio: f64,
    pub reference: f64,
    pub nodes: usize,
}

/// `sum_{xi in D_N} |int_a^b e(xi_1 t + xi_2 t^2) dt|^2` over the box
/// `|xi_1| <= 3N`, `|xi_2| <= 3N^2`, with the arc measure of total mass
/// `b - a` (not normalised).
///
/// `mu^` is evaluated at every lattice point as a sum over composite
/// Gauss–Legendre nodes; along `xi_2` the terms are advanced by rotators.
pub fn lattice_l2_sum(n: u64, a: f64, b: f64, resolution: usize) -> Result<(f64, usize)> {
    if !(0.0 <= a && a < b && b <= 1.0) {
        return Err(LabError::invalid(format!("need 0 <= a < b <= 1, got [{a}, {b}]")));
    }
    if n == 0 || n > 32 {
        return Err(LabError::CapacityExceeded(format!("lattice L2 sums support 1 <= N <= 32, got {n}")));
    }
    let k1 = 3 * n as i64;
    let k2 = 3 * (n * n) as i64;
    // Cycles of the fastest phase over [a, b], two cycles per 16-node panel.
    let cycles = (k1 as f64 + 2.0 * k2 as f64 * b) * (b - a);
    let panels = ((cycles / 2.0).ceil() as usize + 1).max(resolution.div_ceil(PANEL_ORDER));
    let gl = gauss_legendre(PANEL_ORDER);
    let h = (b - a) / panels as f64;
    let mut ts = Vec::with_capacity(panels * PANEL_ORDER);
    let mut ws = Vec::with_capacity(panels * PANEL_ORDER);
    for p in 0..panels {
        let lo = a + h * p as f64;
        for (x, wt) in gl.nodes.iter().zip(&gl.weights) {
            ts.push(lo + 0.5 * h * (x + 1.0));
            ws.push(0.5 * h * wt);
        }
    }
    let steps: Vec<Complex64> = ts.iter().map(|t| e(t * t)).collect();
    const RESYNC: i64 = 256;
    // |mu^(-xi)| = |mu^(xi)|: rows xi_1 > 0 count twice, row xi_1 = 0 uses
    // xi_2 >= 0 with xi_2 > 0 counted twice.
    let row = |x1: i64| -> f64 {
        let base: Vec<Complex64> = ts.iter().zip(&ws).map(|(t, w)| e(x1 as f64 * t) * *w).collect();
        let start = if x1 == 0 { 0 } else { -k2 };
        let mut cur: Vec<Complex64> = Vec::with_capacity(ts.len());
        let mut acc = Neumaier::new();
        let mut x2 = start;
        while x2 <= k2 {
            let block_end = (x2 + RESYNC - 1).min(k2);
            cur.clear();
            cur.extend(base.iter().zip(&ts).map(|(g, t)| g * e(x2 as f64 * t * t)));
            loop {
                let v: Complex64 = cur.iter().sum();
                let mult = if x1 == 0 && x2 > 0 { 2.0 } else { 1.0 };
                acc.add(mult * v.norm_sqr());
                if x2 == block_end {
                    break;
                }
                for (c, s) in cur.iter_mut().zip(&steps) {
                    *c *= s;
                }
                x2 += 1;
            }
            x2 = block_end + 1;
        }
        let mult = if x1 > 0 { 2.0 } else { 1.0 };
        mult * acc.value()
    };
    let rows: Vec<f64> = (0..=k1).into_par_iter().map(row).collect();
    let total: Neumaier = rows.into_iter().collect();
    Ok((total.value(), ts.len()))
}

/// Lattice `L^2` sum over `[delta, 1/2]`, compared with `delta^{1-d} N^{s(d)-d}`.
pub fn lemma_l2_sum(d: u32, delta: f64, n: u64, resolution: usize) -> Result<LatticeL2> {
    if d != 2 {
        return Err(LabError::UnsupportedDimension(format!(
            "lattice L2 sums are limited to d = 2, got d = {d}"
        )));
    }
    if !(delta > 0.0 && delta < 0.5) {
        return Err(LabError::invalid(format!("delta must lie in (0, 1/2), got {delta}")));
    }
    if n as f64 * delta <= 1.0 {
        return Err(LabError::PreconditionFailed(format!("N delta = {} must exceed 1", n as f64 * delta)));
    }
    let (sum, nodes) = lattice_l2_sum(n, delta, 0.5, resolution)?;
    let df = f64::from(d);
    let reference = delta.powf(1.0 - df) * (n as f64).powf(s_of(df)? - df);
    Ok(LatticeL2 {
        d,
        n,
        interval: (delta, 0.5),
        sum,
        ratio: sum / reference,
        reference,
        nodes,
    })
}

/// Lattice `L^2` sum over `[1/2, 1/2 + 1/(2d)]`, compared with `N^{s(d)-d}`.
pub fn short_interval_l2_sum(d: u32, n: u64, resolution: usize) -> Result<LatticeL2> {
    if d != 2 {
        return Err(LabError::UnsupportedDimension(format!(
            "lattice L2 sums are limited to d = 2, got d = {d}"
        )));
    }
    let df = f64::from(d);
    let (a, b) = (0.5, 0.5 + 1.0 / (2.0 * df));
    let (sum, nodes) = lattice_l2_sum(n, a, b, resolution)?;
    let reference = (n as f64).powf(s_of(df)? - df);
    Ok(LatticeL2 {
        d,
        n,
        interval: (a, b),
        sum,
        ratio: sum / reference,
        reference,
        nodes,
    })
}
