//! Probability measures on the unit cube: Lebesgue measure, the sphere of
//! radius 1/2 centred at `(1/2, ..., 1/2)`, arcs of the moment curve
//! `(t, t^2, ..., t^d)`, and segments `{t w : t in [0, 1]}`.
//!
//! Every measure is normalised to total mass one.

use crate::error::{LabError, Result};
use crate::fit::least_squares;
use crate::quadrature::{composite, gauss_legendre, Rule, PANEL_ORDER};
use crate::rectangle::Rectangle;
use crate::rng::Stream;
use crate::summation::{ComplexNeumaier, Neumaier};
use crate::torus::{e, TorusPoint};
use num_complex::Complex64;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

/// Default cap on quadrature nodes for Fourier transforms and oscillatory
/// integrals.
pub const NODE_CAP: u64 = 100_000_000;

/// Absolute tolerance of the doubling test used to validate transforms.
pub const TRANSFORM_TOLERANCE: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum MeasureSpec {
    Lebesgue { d: usize },
    Sphere { d: usize },
    MomentCurve { d: usize, a: f64, b: f64 },
    Segment { omega: Vec<f64> },
}

impl MeasureSpec {
    pub fn lebesgue(d: usize) -> Result<Self> {
        check_dim(d)?;
        Ok(Self::Lebesgue { d })
    }

    pub fn sphere(d: usize) -> Result<Self> {
        check_dim(d)?;
        Ok(Self::Sphere { d })
    }

    pub fn moment_curve(d: usize, a: f64, b: f64) -> Result<Self> {
        check_dim(d)?;
        if !(a.is_finite() && b.is_finite() && 0.0 <= a && a < b && b <= 1.0) {
            return Err(LabError::invalid(format!("moment-curve interval [{a}, {b}] not inside [0, 1]")));
        }
        Ok(Self::MomentCurve { d, a, b })
    }

    /// Segment `{t w : t in [0,1]}`; `w` must be a unit vector with
    /// nonnegative entries so the segment stays inside the cube.
    pub fn segment(omega: Vec<f64>) -> Result<Self> {
        check_dim(omega.len())?;
        if omega.iter().any(|w| !w.is_finite() || *w < 0.0) {
            return Err(LabError::invalid("segment direction needs finite nonnegative entries"));
        }
        let norm = omega.iter().map(|w| w * w).sum::<f64>().sqrt();
        if (norm - 1.0).abs() > 1e-12 {
            return Err(LabError::invalid(format!("segment direction has norm {norm}, expected 1")));
        }
        Ok(Self::Segment { omega })
    }

    /// Segment along the first coordinate axis of `R^d`.
    pub fn axis_segment(d: usize) -> Result<Self> {
        let mut omega = vec![0.0; d];
        if d > 0 {
            omega[0] = 1.0;
        }
        Self::segment(omega)
    }

    pub fn ambient_dim(&self) -> usize {
        match self {
            Self::Lebesgue { d } | Self::Sphere { d } | Self::MomentCurve { d, .. } => *d,
            Self::Segment { omega } => omega.len(),
        }
    }

    pub fn intrinsic_dim(&self) -> usize {
        match self {
            Self::Lebesgue { d } => *d,
            Self::Sphere { d } => d - 1,
            Self::MomentCurve { .. } | Self::Segment { .. } => 1,
        }
    }

    pub fn mass(&self) -> f64 {
        1.0
    }

    /// Point of a one-parameter measure at parameter `t`.
    fn curve_point(&self, t: f64) -> Vec<f64> {
        match self {
            Self::MomentCurve { d, .. } => {
                let mut out = Vec::with_capacity(*d);
                let mut p = 1.0;
                for _ in 0..*d {
                    p *= t;
                    out.push(p);
                }
                out
            }
            Self::Segment { omega } => omega.iter().map(|w| w * t).collect(),
            _ => unreachable!("curve_point on a non-curve measure"),
        }
    }

    /// Parameter interval of a one-parameter measure.
    pub fn parameter_interval(&self) -> Option<(f64, f64)> {
        match self {
            Self::MomentCurve { a, b, .. } => Some((*a, *b)),
            Self::Segment { .. } => Some((0.0, 1.0)),
            _ => None,
        }
    }

    /// Point of a one-parameter measure at parameter `t` as a torus point.
    pub fn curve_torus_point(&self, t: f64) -> Result<TorusPoint> {
        if self.intrinsic_dim() != 1 || matches!(self, Self::Sphere { .. }) {
            return Err(LabError::invalid("measure is not parametrised by one real variable"));
        }
        TorusPoint::new(self.curve_point(t))
    }

    /// Ambient coordinates of a `mu`-random point (not reduced modulo one).
    pub fn sample_embedded(&self, stream: &mut Stream) -> Vec<f64> {
        match self {
            Self::Lebesgue { d } => (0..*d).map(|_| stream.uniform()).collect(),
            Self::Sphere { d } => loop {
                let g: Vec<f64> = (0..*d).map(|_| StandardNormal.sample(stream)).collect();
                let norm = g.iter().map(|x| x * x).sum::<f64>().sqrt();
                if norm > 1e-300 {
                    break g.iter().map(|x| 0.5 + 0.5 * x / norm).collect();
                }
            },
            Self::MomentCurve { a, b, .. } => {
                let t = a + (b - a) * stream.uniform();
                self.curve_point(t)
            }
            Self::Segment { .. } => {
                let t = stream.uniform();
                self.curve_point(t)
            }
        }
    }

    /// A `mu`-random point.
    pub fn sample(&self, stream: &mut Stream) -> TorusPoint {
        TorusPoint::new(self.sample_embedded(stream)).expect("sampled coordinates are finite")
    }

    /// Deterministic nodes and normalised weights.
    ///
    /// Midpoint rule in the parameter for curves and segments, a uniform
    /// angle grid for the circle, a Fibonacci lattice of `R^2` points for the
    /// two-sphere and an `R x R` midpoint grid for the unit square.
    pub fn quadrature_nodes(&self, resolution: usize) -> Result<Vec<(TorusPoint, f64)>> {
        if resolution < 2 {
            return Err(LabError::invalid("quadrature resolution must be >= 2"));
        }
        let embedded: Vec<Vec<f64>> = match self {
            Self::MomentCurve { a, b, .. } => {
                let h = (b - a) / resolution as f64;
                (0..resolution).map(|k| self.curve_point(a + h * (k as f64 + 0.5))).collect()
            }
            Self::Segment { .. } => (0..resolution)
                .map(|k| self.curve_point((k as f64 + 0.5) / resolution as f64))
                .collect(),
            Self::Sphere { d: 2 } => (0..resolution)
                .map(|k| {
                    let th = 2.0 * PI * (k as f64 + 0.5) / resolution as f64;
                    vec![0.5 + 0.5 * th.cos(), 0.5 + 0.5 * th.sin()]
                })
                .collect(),
            Self::Sphere { d: 3 } => {
                let n = resolution
                    .checked_mul(resolution)
                    .ok_or_else(|| LabError::CapacityExceeded("node count overflows".into()))?;
                let golden = (1.0 + 5f64.sqrt()) / 2.0;
                (0..n)
                    .map(|k| {
                        let z = 1.0 - (2.0 * k as f64 + 1.0) / n as f64;
                        let r = (1.0 - z * z).max(0.0).sqrt();
                        let phi = 2.0 * PI * (k as f64 / golden).fract();
                        vec![0.5 + 0.5 * r * phi.cos(), 0.5 + 0.5 * r * phi.sin(), 0.5 + 0.5 * z]
                    })
                    .collect()
            }
            Self::Lebesgue { d: 2 } => {
                let h = 1.0 / resolution as f64;
                (0..resolution * resolution)
                    .map(|k| vec![h * ((k / resolution) as f64 + 0.5), h * ((k % resolution) as f64 + 0.5)])
                    .collect()
            }
            Self::Sphere { d } => {
                return Err(LabError::UnsupportedDimension(format!(
                    "no deterministic sphere quadrature for d = {d}; use Monte Carlo"
                )))
            }
            Self::Lebesgue { d } => {
                return Err(LabError::UnsupportedDimension(format!(
                    "no grid quadrature for Lebesgue measure in d = {d}; use Monte Carlo"
                )))
            }
        };
        let w = 1.0 / embedded.len() as f64;
        embedded
            .into_iter()
            .map(|p| Ok((TorusPoint::new(p)?, w)))
            .collect()
    }

    /// `mu^(xi) = int e(-x . xi) d mu(x)`.
    ///
    /// Lebesgue measure and segments use closed forms. Moment-curve arcs use
    /// [`oscillatory_integral`]. Spheres are reduced by rotation invariance to
    /// `int_0^pi e(-|xi| cos(theta) / 2) sin^{d-2}(theta) d theta`, evaluated
    /// with composite Gauss–Legendre panels. Numerical results are accepted
    /// once halving the panel count changes them by at most
    /// [`TRANSFORM_TOLERANCE`]; `resolution` is a lower bound on the node
    /// count.
    pub fn fourier_transform(&self, xi: &[f64], resolution: usize) -> Result<Complex64> {
        self.fourier_transform_capped(xi, resolution, NODE_CAP)
    }

    pub fn fourier_transform_capped(&self, xi: &[f64], resolution: usize, cap: u64) -> Result<Complex64> {
        check_frequency(self, xi)?;
        match self {
            Self::Lebesgue { .. } => Ok(xi.iter().map(|&s| unit_interval_transform(s)).product()),
            Self::Segment { omega } => {
                let s: f64 = omega.iter().zip(xi).map(|(w, x)| w * x).sum();
                Ok(unit_interval_transform(s))
            }
            Self::MomentCurve { a, b, .. } => {
                let neg: Vec<f64> = xi.iter().map(|x| -x).collect();
                let (val, wsum) = validated(cap, |cpp| curve_integral(*a, *b, &neg, cpp, resolution, cap))?;
                Ok(val / wsum)
            }
            Self::Sphere { d } => {
                let norm = xi.iter().map(|x| x * x).sum::<f64>().sqrt();
                let shift = 0.5 * xi.iter().sum::<f64>();
                let (val, wsum) = validated(cap, |cpp| sphere_polar_integral(*d, norm, cpp, resolution, cap))?;
                Ok(e(-shift) * val / wsum)
            }
        }
    }

    /// `mu(R)` for a box clipped to the unit cube.
    ///
    /// Exact (up to rounding) for Lebesgue measure, segments, moment-curve
    /// arcs and the circle. The two-sphere integrates exact arc fractions over
    /// `resolution` midpoint heights; higher spheres use `resolution^2`
    /// Monte Carlo samples (at most `10^6`) from a fixed stream.
    pub fn box_mass(&self, r: &Rectangle, resolution: usize) -> Result<f64> {
        if r.dim() != self.ambient_dim() {
            return Err(LabError::invalid("rectangle and measure dimensions differ"));
        }
        let d = r.dim();
        let intervals: Vec<(f64, f64)> = (0..d).map(|j| r.interval(j)).collect();
        if intervals.iter().any(|(lo, hi)| hi <= lo) {
            return Ok(0.0);
        }
        Ok(match self {
            Self::Lebesgue { .. } => r.volume(),
            Self::Segment { omega } => {
                let (mut lo, mut hi) = (0.0f64, 1.0f64);
                for (w, (a, b)) in omega.iter().zip(&intervals) {
                    if *w == 0.0 {
                        if !(*a <= 0.0 && 0.0 < *b) {
                            return Ok(0.0);
                        }
                    } else {
                        lo = lo.max(a / w);
                        hi = hi.min(b / w);
                    }
                }
                (hi - lo).max(0.0)
            }
            Self::MomentCurve { a, b, .. } => {
                let (mut lo, mut hi) = (*a, *b);
                for (j, (p, q)) in intervals.iter().enumerate() {
                    let k = 1.0 / (j + 1) as f64;
                    lo = lo.max(p.powf(k));
                    hi = hi.min(q.powf(k));
                }
                ((hi - lo) / (b - a)).max(0.0)
            }
            Self::Sphere { d: 2 } => {
                let u = ((intervals[0].0 - 0.5) * 2.0, (intervals[0].1 - 0.5) * 2.0);
                let v = ((intervals[1].0 - 0.5) * 2.0, (intervals[1].1 - 0.5) * 2.0);
                arc_fraction(1.0, u, v)
            }
            Self::Sphere { d: 3 } => {
                let zlo = ((intervals[2].0 - 0.5) * 2.0).max(-1.0);
                let zhi = ((intervals[2].1 - 0.5) * 2.0).min(1.0);
                if zhi <= zlo {
                    return Ok(0.0);
                }
                let u = ((intervals[0].0 - 0.5) * 2.0, (intervals[0].1 - 0.5) * 2.0);
                let v = ((intervals[1].0 - 0.5) * 2.0, (intervals[1].1 - 0.5) * 2.0);
                let res = resolution.max(2);
                let h = (zhi - zlo) / res as f64;
                let acc: Neumaier = (0..res)
                    .map(|k| {
                        let z = zlo + h * (k as f64 + 0.5);
                        arc_fraction((1.0 - z * z).max(0.0).sqrt(), u, v)
                    })
                    .collect();
                // z is uniform on [-1, 1] under the normalised surface measure.
                acc.value() * h / 2.0
            }
            Self::Sphere { .. } => {
                let samples = (resolution.max(2) as u64).pow(2).min(1_000_000);
                let mut s = Stream::for_task(0, "box_mass");
                let hits = (0..samples).filter(|_| r.contains(&self.sample_embedded(&mut s))).count();
                hits as f64 / samples as f64
            }
        })
    }

    /// The lower-bound profile `mu(R(x, zeta)) >= constant * f(zeta)`.
    pub fn regularity_profile(&self) -> RegularityProfile {
        match self {
            Self::Lebesgue { d } => RegularityProfile {
                kind: ProfileKind::Product,
                d: *d,
                constant: 1.0,
            },
            Self::Segment { omega } => RegularityProfile {
                kind: ProfileKind::Min,
                d: omega.len(),
                constant: 1.0,
            },
            Self::Sphere { d } => RegularityProfile {
                kind: ProfileKind::SmallestProduct,
                d: *d,
                constant: match d {
                    2 => 2.0 / PI,
                    3 => 1.0 / PI,
                    _ => 1.0 / PI.powi(*d as i32 - 2),
                },
            },
            Self::MomentCurve { d, a, b } => RegularityProfile {
                kind: ProfileKind::Last,
                d: *d,
                constant: 1.0 / (*d as f64 * (b - a)),
            },
        }
    }
}

fn check_dim(d: usize) -> Result<()> {
    if d < 2 {
        return Err(LabError::UnsupportedDimension(format!("ambient dimension {d} < 2")));
    }
    Ok(())
}

fn check_frequency(m: &MeasureSpec, xi: &[f64]) -> Result<()> {
    if xi.len() != m.ambient_dim() {
        return Err(LabError::invalid(format!(
            "frequency has {} components, measure lives in dimension {}",
            xi.len(),
            m.ambient_dim()
        )));
    }
    if xi.iter().any(|x| !x.is_finite()) {
        return Err(LabError::invalid("non-finite frequency"));
    }
    Ok(())
}

impl fmt::Display for MeasureSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Lebesgue { d } => write!(f, "lebesgue:{d}"),
            Self::Sphere { d } => write!(f, "sphere:{d}"),
            Self::MomentCurve { d, a, b } => write!(f, "moment:{d}:{a}:{b}"),
            Self::Segment { omega } => {
                let parts: Vec<String> = omega.iter().map(|w| w.to_string()).collect();
                write!(f, "segment:{}", parts.join(","))
            }
        }
    }
}

impl FromStr for MeasureSpec {
    type Err = LabError;

    /// `lebesgue:D`, `sphere:D`, `moment:D[:A:B]`, `segment:W1,W2,...`.
    fn from_str(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.trim().split(':').collect();
        let bad = || LabError::invalid(format!("cannot parse measure descriptor '{s}'"));
        let num = |p: &str| p.trim().parse::<f64>().map_err(|_| bad());
        let dim = |p: &str| p.trim().parse::<usize>().map_err(|_| bad());
        match parts.as_slice() {
            ["lebesgue", d] => Self::lebesgue(dim(d)?),
            ["sphere", d] => Self::sphere(dim(d)?),
            ["moment", d] => Self::moment_curve(dim(d)?, 0.0, 1.0),
            ["moment", d, a, b] => Self::moment_curve(dim(d)?, num(a)?, num(b)?),
            ["segment", w] => Self::segment(w.split(',').map(num).collect::<Result<Vec<_>>>()?),
            _ => Err(bad()),
        }
    }
}

/// `int_0^1 e(-t s) dt = e(-s/2) sin(pi s) / (pi s)`.
fn unit_interval_transform(s: f64) -> Complex64 {
    if s == 0.0 {
        return Complex64::new(1.0, 0.0);
    }
    e(-s / 2.0) * ((PI * s).sin() / (PI * s))
}

/// Accept the result at `cycles_per_panel = c` once it agrees with the result
/// at `2c`; halve `c` otherwise.
fn validated<F>(cap: u64, f: F) -> Result<(Complex64, f64)>
where
    F: Fn(f64) -> Result<(Complex64, f64, u64)>,
{
    let mut cpp = 2.0;
    loop {
        let (coarse, wc, _) = f(2.0 * cpp)?;
        let (fine, wf, nodes) = f(cpp)?;
        if (fine / wf - coarse / wc).norm() <= TRANSFORM_TOLERANCE {
            return Ok((fine, wf));
        }
        cpp /= 2.0;
        if nodes.saturating_mul(2) > cap || cpp < 1.0 / 64.0 {
            return Err(LabError::ResolutionOverflow {
                required: nodes.saturating_mul(2),
                cap,
            });
        }
    }
}

/// Panels on `[a, b]` (with `a >= 0`) for the phase `sum_j c_j t^j`, sized so
/// that each panel carries about `cpp` cycles. The speed bound on a coarse
/// cell `[s0, s1]` is `sum_j j |c_j| s1^{j-1}`.
fn phase_panels(a: f64, b: f64, coef: &[f64], cpp: f64, min_nodes: usize) -> Vec<(f64, f64)> {
    const CELLS: usize = 64;
    let h = (b - a) / CELLS as f64;
    let min_panels_per_cell = min_nodes.div_ceil(PANEL_ORDER * CELLS).max(1);
    let mut panels = Vec::new();
    for c in 0..CELLS {
        let s0 = a + h * c as f64;
        let s1 = if c + 1 == CELLS { b } else { s0 + h };
        let mut speed = 0.0;
        let mut pow = 1.0;
        for (j, cj) in coef.iter().enumerate() {
            speed += (j + 1) as f64 * cj.abs() * pow;
            pow *= s1.abs();
        }
        let cycles = speed * (s1 - s0);
        let p = ((cycles / cpp).ceil() as usize).max(min_panels_per_cell);
        let w = (s1 - s0) / p as f64;
        for i in 0..p {
            let lo = s0 + w * i as f64;
            let hi = if i + 1 == p { s1 } else { lo + w };
            panels.push((lo, hi));
        }
    }
    panels
}

/// Sum of `w e(sum_j c_j t^j)` over Gauss–Legendre panels, together with the
/// weight sum and node count.
fn curve_integral(a: f64, b: f64, coef: &[f64], cpp: f64, min_nodes: usize, cap: u64) -> Result<(Complex64, f64, u64)> {
    let panels = phase_panels(a, b, coef, cpp, min_nodes);
    let nodes = (panels.len() * PANEL_ORDER) as u64;
    if nodes > cap {
        return Err(LabError::ResolutionOverflow { required: nodes, cap });
    }
    let gl = gauss_legendre(PANEL_ORDER);
    let partial = |chunk: &[(f64, f64)]| {
        let mut acc = ComplexNeumaier::new();
        let mut wsum = Neumaier::new();
        for &(lo, hi) in chunk {
            let half = 0.5 * (hi - lo);
            for (x, w) in gl.nodes.iter().zip(&gl.weights) {
                let t = lo + half * (x + 1.0);
                let mut phase = 0.0;
                for c in coef.iter().rev() {
                    phase = (phase + c) * t;
                }
                acc.add(e(phase) * (half * w));
                wsum.add(half * w);
            }
        }
        (acc.value(), wsum.value())
    };
    let parts: Vec<(Complex64, f64)> = if panels.len() >= 4096 {
        panels.par_chunks(1024).map(partial).collect()
    } else {
        vec![partial(&panels)]
    };
    let mut acc = ComplexNeumaier::new();
    let mut wsum = Neumaier::new();
    for (v, w) in parts {
        acc.add(v);
        wsum.add(w);
    }
    Ok((acc.value(), wsum.value(), nodes))
}

/// `int_0^pi e(-r cos(theta) / 2) sin^{d-2}(theta) d theta` and the matching
/// weight integral.
fn sphere_polar_integral(d: usize, r: f64, cpp: f64, min_nodes: usize, cap: u64) -> Result<(Complex64, f64, u64)> {
    let panels = ((r / cpp).ceil() as usize + 1).max(min_nodes.div_ceil(PANEL_ORDER));
    let nodes = (panels * PANEL_ORDER) as u64;
    if nodes > cap {
        return Err(LabError::ResolutionOverflow { required: nodes, cap });
    }
    let rule: Rule = composite(0.0, PI, panels);
    let mut acc = ComplexNeumaier::new();
    let mut wsum = Neumaier::new();
    for (th, w) in rule.nodes.iter().zip(&rule.weights) {
        let wt = w * th.sin().powi(d as i32 - 2);
        acc.add(e(-0.5 * r * th.cos()) * wt);
        wsum.add(wt);
    }
    Ok((acc.value(), wsum.value(), nodes))
}

/// `int_a^b e(xi_1 t + ... + xi_d t^d) dt` for `0 <= a < b <= 1`.
pub fn oscillatory_integral(a: f64, b: f64, xi: &[f64]) -> Result<Complex64> {
    oscillatory_integral_capped(a, b, xi, NODE_CAP)
}

pub fn oscillatory_integral_capped(a: f64, b: f64, xi: &[f64], cap: u64) -> Result<Complex64> {
    if !(a.is_finite() && b.is_finite() && 0.0 <= a && a < b && b <= 1.0) {
        return Err(LabError::invalid(format!("need 0 <= a < b <= 1, got [{a}, {b}]")));
    }
    if xi.is_empty() || xi.iter().any(|x| !x.is_finite()) {
        return Err(LabError::invalid("frequency must be a nonempty finite vector"));
    }
    Ok(validated(cap, |cpp| curve_integral(a, b, xi, cpp, 0, cap))?.0)
}

/// Fraction of the circle `(rho cos t, rho sin t)` (parameter `t` uniform)
/// lying in `[u0, u1) x [v0, v1)`, found from the breakpoints of the four
/// constraints.
fn arc_fraction(rho: f64, u: (f64, f64), v: (f64, f64)) -> f64 {
    if rho <= 0.0 {
        let inside = u.0 <= 0.0 && 0.0 < u.1 && v.0 <= 0.0 && 0.0 < v.1;
        return if inside { 1.0 } else { 0.0 };
    }
    let mut cuts = vec![0.0, 2.0 * PI];
    for c in [u.0, u.1] {
        let q = c / rho;
        if q.abs() <= 1.0 {
            let a = q.acos();
            cuts.push(a);
            cuts.push(2.0 * PI - a);
        }
    }
    for s in [v.0, v.1] {
        let q = s / rho;
        if q.abs() <= 1.0 {
            let a = q.asin();
            cuts.push(a.rem_euclid(2.0 * PI));
            cuts.push((PI - a).rem_euclid(2.0 * PI));
        }
    }
    cuts.sort_by(|a, b| a.total_cmp(b));
    let mut total = 0.0;
    for w in cuts.windows(2) {
        if w[1] <= w[0] {
            continue;
        }
        let mid = 0.5 * (w[0] + w[1]);
        let (x, y) = (rho * mid.cos(), rho * mid.sin());
        if x >= u.0 && x < u.1 && y >= v.0 && y < v.1 {
            total += w[1] - w[0];
        }
    }
    total / (2.0 * PI)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProfileKind {
    /// `prod_j zeta_j`
    Product,
    /// `min_j zeta_j`
    Min,
    /// Product of the `d - 1` smallest half-sides.
    SmallestProduct,
    /// `zeta_d`, the last half-side (the smallest for decreasing schedules),
    /// clamped to one after scaling.
    Last,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RegularityProfile {
    pub kind: ProfileKind,
    pub d: usize,
    pub constant: f64,
}

impl RegularityProfile {
    /// `f(zeta)` without the constant.
    pub fn f(&self, zeta: &[f64]) -> f64 {
        match self.kind {
            ProfileKind::Product => zeta.iter().product(),
            ProfileKind::Min => zeta.iter().copied().fold(f64::INFINITY, f64::min),
            ProfileKind::SmallestProduct => {
                let mut z = zeta.to_vec();
                z.sort_by(|a, b| a.total_cmp(b));
                z.iter().take(zeta.len().saturating_sub(1)).product()
            }
            ProfileKind::Last => zeta.last().copied().unwrap_or(0.0),
        }
    }

    /// `constant * f(zeta)`, clamped to one.
    pub fn lower_bound(&self, zeta: &[f64]) -> f64 {
        (self.constant * self.f(zeta)).min(1.0)
    }

    /// Exponent `g` with `f(zeta) = N^g` for the schedule
    /// `zeta_j = N^{alpha - j - 1 - eps}`, at `eps = 0`.
    pub fn schedule_exponent(&self, alpha: f64) -> f64 {
        let d = self.d;
        let e = |j: usize| alpha - j as f64 - 1.0;
        match self.kind {
            ProfileKind::Product => (1..=d).map(e).sum(),
            ProfileKind::Min | ProfileKind::Last => e(d),
            ProfileKind::SmallestProduct => (2..=d).map(e).sum(),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ShellStat {
    pub k: u32,
    pub max_abs: f64,
    pub argmax: Vec<f64>,
    pub frequencies: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DecayFit {
    pub sigma: f64,
    pub shells: Vec<ShellStat>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct DecayOptions {
    /// Only frequencies orthogonal to the segment direction (segments only).
    pub perpendicular_only: bool,
}

fn random_direction(d: usize, s: &mut Stream) -> Vec<f64> {
    loop {
        let g: Vec<f64> = (0..d).map(|_| StandardNormal.sample(s)).collect();
        let n = g.iter().map(|x| x * x).sum::<f64>().sqrt();
        if n > 1e-12 {
            return g.into_iter().map(|x| x / n).collect();
        }
    }
}

/// Orthonormal basis of the complement of the unit vector `w`.
fn perpendicular_basis(w: &[f64]) -> Vec<Vec<f64>> {
    let d = w.len();
    let mut basis: Vec<Vec<f64>> = Vec::new();
    for j in 0..d {
        let mut v = vec![0.0; d];
        v[j] = 1.0;
        for b in std::iter::once(w).chain(basis.iter().map(|b| b.as_slice())) {
            let dot: f64 = v.iter().zip(b).map(|(x, y)| x * y).sum();
            for (vi, bi) in v.iter_mut().zip(b) {
                *vi -= dot * bi;
            }
        }
        let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if n > 1e-8 {
            basis.push(v.into_iter().map(|x| x / n).collect());
        }
        if basis.len() == d - 1 {
            break;
        }
    }
    basis
}

fn project_out(v: &[f64], w: &[f64]) -> Vec<f64> {
    let dot: f64 = v.iter().zip(w).map(|(x, y)| x * y).sum();
    let p: Vec<f64> = v.iter().zip(w).map(|(x, y)| x - dot * y).collect();
    let n = p.iter().map(|x| x * x).sum::<f64>().sqrt();
    p.into_iter().map(|x| x / n).collect()
}

/// Dyadic-shell scan of `|mu^|`.
///
/// Shell `k` (for `k = 1..=shell_count`) collects frequencies with norm in
/// `[2^k, 2^{k+1})`: the radii `2^k + j/8` (`j = 0..8`) along the coordinate
/// axes, four random directions and (for segments) a basis of the orthogonal
/// complement of the direction, plus `samples_per_shell` random
/// (direction, radius) pairs. `sigma` is the least-squares slope of
/// `-log2 M_k` against `k`.
pub fn decay_fit(m: &MeasureSpec, shell_count: u32, samples_per_shell: usize, stream: &mut Stream) -> Result<DecayFit> {
    decay_fit_with(m, shell_count, samples_per_shell, DecayOptions::default(), stream)
}

pub fn decay_fit_with(
    m: &MeasureSpec,
    shell_count: u32,
    samples_per_shell: usize,
    opts: DecayOptions,
    stream: &mut Stream,
) -> Result<DecayFit> {
    if shell_count < 4 {
        return Err(LabError::invalid("decay_fit needs at least 4 shells"));
    }
    if shell_count > 24 {
        return Err(LabError::CapacityExceeded(format!("{shell_count} shells")));
    }
    let d = m.ambient_dim();
    let omega = match m {
        MeasureSpec::Segment { omega } => Some(omega.clone()),
        _ => None,
    };
    let perp_only = opts.perpendicular_only;
    if perp_only && omega.is_none() {
        return Err(LabError::invalid("perpendicular-only scans need a segment measure"));
    }
    let mut shells = Vec::new();
    for k in 1..=shell_count {
        let mut s = stream.derive_index(u64::from(k));
        let lo = 2f64.powi(k as i32);
        let mut dirs: Vec<Vec<f64>> = Vec::new();
        if let Some(w) = &omega {
            dirs.extend(perpendicular_basis(w));
        }
        if !perp_only {
            for j in 0..d {
                let mut v = vec![0.0; d];
                v[j] = 1.0;
                dirs.push(v);
            }
        }
        for _ in 0..4 {
            let v = random_direction(d, &mut s);
            dirs.push(match (&omega, perp_only) {
                (Some(w), true) => project_out(&v, w),
                _ => v,
            });
        }
        let mut freqs: Vec<Vec<f64>> = Vec::new();
        for v in &dirs {
            for j in 0..8 {
                let r = lo + j as f64 / 8.0;
                freqs.push(v.iter().map(|x| x * r).collect());
            }
        }
        for _ in 0..samples_per_shell {
            let v = random_direction(d, &mut s);
            let v = match (&omega, perp_only) {
                (Some(w), true) => project_out(&v, w),
                _ => v,
            };
            let r = lo * (1.0 + s.uniform());
            freqs.push(v.iter().map(|x| x * r).collect());
        }
        let values: Vec<f64> = freqs
            .par_iter()
            .map(|xi| m.fourier_transform(xi, 0).map(|z| z.norm()))
            .collect::<Result<_>>()?;
        let (mut best, mut arg) = (-1.0, 0);
        for (i, v) in values.iter().enumerate() {
            if *v > best {
                best = *v;
                arg = i;
            }
        }
        shells.push(ShellStat {
            k,
            max_abs: best,
            argmax: freqs[arg].clone(),
            frequencies: freqs.len(),
        });
    }
    let xs: Vec<f64> = shells.iter().map(|s| f64::from(s.k)).collect();
    let ys: Vec<f64> = shells.iter().map(|s| -s.max_abs.max(1e-300).log2()).collect();
    let sigma = least_squares(&xs, &ys)?.slope;
    Ok(DecayFit { sigma, shells })
}

#[cfg(test)]
mod tests {
    use super::*;

    /// `J_0(x)` from its power series, summed with extra care for moderate x.
    fn bessel_j0_series(x: f64) -> f64 {
        // Terms (-1)^k (x/2)^{2k} / (k!)^2; fine in f64 for x <= ~20 with
        // cancellation below 1e-9 at x = 5 pi.
        let q = x * x / 4.0;
        let mut term = 1.0;
        let mut sum = 1.0;
        for k in 1..200 {
            term *= -q / (k as f64 * k as f64);
            sum += term;
            if term.abs() < 1e-30 {
                break;
            }
        }
        sum
    }

    /// Fresnel integrals `C(z) + i S(z)` with `C(z) = int_0^z cos(pi t^2 / 2) dt`,
    /// from the large-argument asymptotic expansions of the auxiliary
    /// functions `f` and `g` (accurate to rounding for `z >= 10`).
    fn fresnel_asymptotic(z: f64) -> Complex64 {
        let x = PI * z * z;
        let (mut f, mut g) = (0.0, 0.0);
        let (mut num_f, mut num_g) = (1.0, 1.0);
        for k in 0..8 {
            let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
            f += sign * num_f / x.powi(2 * k);
            g += sign * num_g / x.powi(2 * k + 1);
            let k = k as f64;
            num_f *= (4.0 * k + 1.0) * (4.0 * k + 3.0);
            num_g *= (4.0 * k + 3.0) * (4.0 * k + 5.0);
        }
        f /= PI * z;
        g /= PI * z;
        let (sn, cs) = (PI * z * z / 2.0).sin_cos();
        Complex64::new(0.5 + f * sn - g * cs, 0.5 - f * cs - g * sn)
    }

    fn all_measures() -> Vec<MeasureSpec> {
        vec![
            MeasureSpec::lebesgue(2).unwrap(),
            MeasureSpec::lebesgue(3).unwrap(),
            MeasureSpec::sphere(2).unwrap(),
            MeasureSpec::sphere(3).unwrap(),
            MeasureSpec::sphere(5).unwrap(),
            MeasureSpec::moment_curve(2, 0.0, 1.0).unwrap(),
            MeasureSpec::moment_curve(3, 0.3, 1.0).unwrap(),
            MeasureSpec::segment(vec![0.6, 0.8]).unwrap(),
            MeasureSpec::axis_segment(3).unwrap(),
        ]
    }

    #[test]
    fn samples_lie_on_support() {
        let mut s = Stream::new(1);
        for _ in 0..1000 {
            let p = MeasureSpec::sphere(2).unwrap().sample_embedded(&mut s);
            let r: f64 = p.iter().map(|x| (x - 0.5) * (x - 0.5)).sum();
            assert!((r - 0.25).abs() < 1e-12);
            let q = MeasureSpec::moment_curve(3, 0.0, 1.0).unwrap().sample_embedded(&mut s);
            assert!((q[1] - q[0] * q[0]).abs() < 1e-15 && (q[2] - q[0].powi(3)).abs() < 1e-15);
            let g = MeasureSpec::axis_segment(2).unwrap().sample_embedded(&mut s);
            assert!(g[1] == 0.0 && (0.0..=1.0).contains(&g[0]));
        }
    }

    fn ks_uniform(mut v: Vec<f64>) -> f64 {
        v.sort_by(|a, b| a.total_cmp(b));
        let n = v.len() as f64;
        v.iter()
            .enumerate()
            .map(|(i, x)| ((i as f64 + 1.0) / n - x).abs().max((x - i as f64 / n).abs()))
            .fold(0.0, f64::max)
    }

    #[test]
    fn intrinsic_parameters_are_uniform() {
        let mut s = Stream::new(2);
        let n = 100_000;
        let seg = MeasureSpec::segment(vec![0.6, 0.8]).unwrap();
        let t: Vec<f64> = (0..n).map(|_| seg.sample_embedded(&mut s)[0] / 0.6).collect();
        assert!(ks_uniform(t) < 0.02);
        let mc = MeasureSpec::moment_curve(2, 0.3, 1.0).unwrap();
        let t: Vec<f64> = (0..n).map(|_| (mc.sample_embedded(&mut s)[0] - 0.3) / 0.7).collect();
        assert!(ks_uniform(t) < 0.02);
        // Archimedes: the height of a uniform point on the 2-sphere is uniform.
        let sp = MeasureSpec::sphere(3).unwrap();
        let z: Vec<f64> = (0..n).map(|_| sp.sample_embedded(&mut s)[2]).collect();
        assert!(ks_uniform(z) < 0.02);
        let circ = MeasureSpec::sphere(2).unwrap();
        let th: Vec<f64> = (0..n)
            .map(|_| {
                let p = circ.sample_embedded(&mut s);
                ((p[1] - 0.5).atan2(p[0] - 0.5) + PI) / (2.0 * PI)
            })
            .collect();
        assert!(ks_uniform(th) < 0.02);
    }

    #[test]
    fn quadrature_examples() {
        let seg = MeasureSpec::axis_segment(2).unwrap();
        let nodes = seg.quadrature_nodes(10).unwrap();
        assert_eq!(nodes.len(), 10);
        assert!((nodes[3].0.coords()[0] - 0.35).abs() < 1e-15);
        assert!((nodes[3].1 - 0.1).abs() < 1e-15);
        let mc = MeasureSpec::moment_curve(2, 0.3, 1.0).unwrap();
        let nodes = mc.quadrature_nodes(7).unwrap();
        assert!((nodes[0].0.coords()[0] - (0.3 + 0.7 * 0.5 / 7.0)).abs() < 1e-15);
        for m in all_measures() {
            if let Ok(n) = m.quadrature_nodes(12) {
                let s: f64 = n.iter().map(|(_, w)| w).sum();
                assert!((s - 1.0).abs() < 1e-12);
            }
        }
        assert!(matches!(
            MeasureSpec::lebesgue(3).unwrap().quadrature_nodes(4),
            Err(LabError::UnsupportedDimension(_))
        ));
        assert!(matches!(
            MeasureSpec::sphere(4).unwrap().quadrature_nodes(4),
            Err(LabError::UnsupportedDimension(_))
        ));
    }

    #[test]
    fn quadrature_converges_at_second_order() {
        // int over the moment curve of cos(x1 + x2) = average of cos(t + t^2) on [0.3, 1].
        let mc = MeasureSpec::moment_curve(2, 0.3, 1.0).unwrap();
        let f = |r: usize| -> f64 {
            mc.quadrature_nodes(r)
                .unwrap()
                .iter()
                .map(|(p, w)| w * (p.coords()[0] + p.coords()[1]).cos())
                .sum()
        };
        let exact = f(100_000);
        let e1 = (f(50) - exact).abs();
        let e2 = (f(100) - exact).abs();
        assert!(e1 / e2 > 3.5 && e1 / e2 < 4.5, "ratio {}", e1 / e2);
    }

    #[test]
    fn transform_at_zero_is_one() {
        for m in all_measures() {
            let z = m.fourier_transform(&vec![0.0; m.ambient_dim()], 0).unwrap();
            assert!((z - Complex64::new(1.0, 0.0)).norm() < 1e-14, "{m}");
        }
    }

    #[test]
    fn segment_perpendicular_transform_is_one() {
        let m = MeasureSpec::axis_segment(3).unwrap();
        assert_eq!(m.fourier_transform(&[0.0, 5.0, 0.0], 0).unwrap(), Complex64::new(1.0, 0.0));
    }

    #[test]
    fn circle_transform_matches_bessel_series() {
        let m = MeasureSpec::sphere(2).unwrap();
        let got = m.fourier_transform(&[3.0, 4.0], 0).unwrap();
        let expect = e(-3.5) * bessel_j0_series(5.0 * PI);
        assert!((got - expect).norm() < 1e-9, "{got} vs {expect}");
        for r in [0.3, 1.7, 4.2] {
            let got = m.fourier_transform(&[r, 0.0], 0).unwrap();
            let expect = e(-r / 2.0) * bessel_j0_series(PI * r);
            assert!((got - expect).norm() < 1e-9);
        }
    }

    #[test]
    fn two_sphere_transform_is_a_sinc() {
        let m = MeasureSpec::sphere(3).unwrap();
        for xi in [[1.0f64, 2.0, 2.0], [0.0, 0.0, 37.25], [10.0, -4.0, 3.5]] {
            let r = (xi[0] * xi[0] + xi[1] * xi[1] + xi[2] * xi[2]).sqrt();
            let expect = e(-0.5 * (xi[0] + xi[1] + xi[2])) * ((PI * r).sin() / (PI * r));
            let got = m.fourier_transform(&xi, 0).unwrap();
            assert!((got - expect).norm() < 1e-9);
        }
    }

    #[test]
    fn lebesgue_transform_vanishes_on_nonzero_lattice() {
        let m = MeasureSpec::lebesgue(2).unwrap();
        assert!(m.fourier_transform(&[1.0, 0.0], 0).unwrap().norm() < 1e-15);
        assert!(m.fourier_transform(&[3.0, -2.0], 0).unwrap().norm() < 1e-15);
    }

    #[test]
    fn transform_conjugate_symmetry_and_bound() {
        let mut s = Stream::new(4);
        for m in all_measures() {
            let d = m.ambient_dim();
            for _ in 0..10 {
                let xi: Vec<f64> = (0..d).map(|_| 200.0 * (s.uniform() - 0.5)).collect();
                let neg: Vec<f64> = xi.iter().map(|x| -x).collect();
                let a = m.fourier_transform(&xi, 0).unwrap();
                let b = m.fourier_transform(&neg, 0).unwrap();
                assert!((a - b.conj()).norm() < 1e-9, "{m}");
                assert!(a.norm() <= 1.0 + 1e-12);
            }
        }
    }

    #[test]
    fn moment_curve_transform_matches_midpoint_oracle() {
        let m = MeasureSpec::moment_curve(3, 0.3, 1.0).unwrap();
        let xi = [7.0, -3.0, 11.0];
        let n = 200_000;
        let mut acc = Complex64::default();
        for k in 0..n {
            let t = 0.3 + 0.7 * (k as f64 + 0.5) / n as f64;
            acc += e(-(xi[0] * t + xi[1] * t * t + xi[2] * t * t * t));
        }
        let oracle = acc / n as f64;
        assert!((m.fourier_transform(&xi, 0).unwrap() - oracle).norm() < 1e-8);
    }

    #[test]
    fn resolution_overflow_is_reported() {
        let m = MeasureSpec::moment_curve(2, 0.0, 1.0).unwrap();
        assert!(matches!(
            m.fourier_transform_capped(&[0.0, 1e7], 0, 10_000),
            Err(LabError::ResolutionOverflow { .. })
        ));
    }

    #[test]
    fn oscillatory_examples() {
        let z = oscillatory_integral(0.2, 0.9, &[0.0, 0.0, 0.0]).unwrap();
        assert!((z - Complex64::new(0.7, 0.0)).norm() < 1e-14);
        for m in [1.0, -3.0, 250.0] {
            assert!(oscillatory_integral(0.0, 1.0, &[m, 0.0]).unwrap().norm() < 1e-9);
        }
        let got = oscillatory_integral(0.0, 1.0, &[0.0, 100.0]).unwrap();
        // u = v / 2 turns int_0^10 e(u^2) du into (C(20) + i S(20)) / 2.
        let expect = fresnel_asymptotic(20.0) / 20.0;
        assert!((got - expect).norm() < 1e-9, "{got} vs {expect}");
        assert!(oscillatory_integral(0.5, 0.5, &[1.0]).is_err());
    }

    #[test]
    fn box_mass_examples() {
        let leb = MeasureSpec::lebesgue(3).unwrap();
        let r = Rectangle::new(vec![0.5, 0.4, 0.3], vec![0.1, 0.2, 0.05]).unwrap();
        assert!((leb.box_mass(&r, 10).unwrap() - 0.2 * 0.4 * 0.1).abs() < 1e-15);
        let circ = MeasureSpec::sphere(2).unwrap();
        let miss = Rectangle::new(vec![0.05, 0.05], vec![0.05, 0.05]).unwrap();
        assert_eq!(circ.box_mass(&miss, 10).unwrap(), 0.0);
        // The box around (0.1, 0.1) with half-sides 0.05 reaches (0.15, 0.15),
        // which lies inside the disc, so the circle crosses it.
        let cross = Rectangle::new(vec![0.1, 0.1], vec![0.05, 0.05]).unwrap();
        assert!(circ.box_mass(&cross, 10).unwrap() > 0.0);
        let hit = Rectangle::new(vec![1.0, 0.5], vec![0.1, 0.1]).unwrap();
        let mass = circ.box_mass(&hit, 10).unwrap();
        // Arc with |y - 1/2| < 0.1 near angle 0: half-angle asin(0.2).
        assert!((mass - 2.0 * 0.2f64.asin() / (2.0 * PI)).abs() < 1e-12);
        assert!(mass >= circ.regularity_profile().lower_bound(&[0.1, 0.1]));
    }

    #[test]
    fn box_mass_on_curves_is_exact() {
        let seg = MeasureSpec::segment(vec![0.6, 0.8]).unwrap();
        let r = Rectangle::new(vec![0.3, 0.4], vec![0.06, 0.5]).unwrap();
        assert!((seg.box_mass(&r, 2).unwrap() - 0.2).abs() < 1e-12);
        let mc = MeasureSpec::moment_curve(2, 0.0, 1.0).unwrap();
        let r = Rectangle::new(vec![0.5, 0.25], vec![0.1, 0.01]).unwrap();
        let expect = 0.26f64.sqrt() - 0.24f64.sqrt();
        assert!((mc.box_mass(&r, 2).unwrap() - expect).abs() < 1e-12);
    }

    #[test]
    fn two_sphere_box_mass_against_monte_carlo() {
        let sp = MeasureSpec::sphere(3).unwrap();
        let r = Rectangle::new(vec![0.7, 0.6, 0.9], vec![0.2, 0.15, 0.12]).unwrap();
        let quad = sp.box_mass(&r, 4000).unwrap();
        let mut s = Stream::new(8);
        let n = 400_000;
        let hits = (0..n).filter(|_| r.contains(&sp.sample_embedded(&mut s))).count();
        let p = hits as f64 / n as f64;
        assert!((quad - p).abs() < 4.0 * (p * (1.0 - p) / n as f64).sqrt() + 1e-3);
    }

    #[test]
    fn regularity_holds_on_sampled_centres() {
        let mut s = Stream::new(6);
        for m in all_measures() {
            if matches!(m, MeasureSpec::Sphere { d } if d > 3) {
                continue;
            }
            let prof = m.regularity_profile();
            for _ in 0..100 {
                let c = m.sample_embedded(&mut s);
                for z in [0.3, 0.1, 0.03, 0.01] {
                    let zeta: Vec<f64> = (0..m.ambient_dim()).map(|j| z / (1.0 + j as f64)).collect();
                    let r = Rectangle::new(c.clone(), zeta.clone()).unwrap();
                    let mass = m.box_mass(&r, 400).unwrap();
                    assert!(mass >= 0.5 * prof.lower_bound(&zeta), "{m}: {mass} at {c:?}, {zeta:?}");
                }
            }
        }
    }

    #[test]
    fn profiles_match_expected_shapes() {
        let p = MeasureSpec::lebesgue(3).unwrap().regularity_profile();
        assert_eq!(p.f(&[0.5, 0.2, 0.1]), 0.5 * 0.2 * 0.1);
        assert_eq!(p.constant, 1.0);
        let p = MeasureSpec::segment(vec![0.6, 0.8]).unwrap().regularity_profile();
        assert_eq!(p.f(&[0.5, 0.2]), 0.2);
        let p = MeasureSpec::moment_curve(3, 0.3, 1.0).unwrap().regularity_profile();
        assert_eq!(p.f(&[0.5, 0.2, 0.1]), 0.1);
        let p = MeasureSpec::sphere(3).unwrap().regularity_profile();
        assert!((p.f(&[0.5, 0.2, 0.1]) - 0.02).abs() < 1e-15);
        assert!((p.schedule_exponent(0.75) - (-2.25 - 3.25)).abs() < 1e-15);
    }

    #[test]
    fn descriptors_round_trip() {
        for m in all_measures() {
            assert_eq!(m.to_string().parse::<MeasureSpec>().unwrap(), m);
        }
        assert!("sphere:1".parse::<MeasureSpec>().is_err());
        assert!("segment:1,1".parse::<MeasureSpec>().is_err());
        assert!("moment:2:0.5:0.4".parse::<MeasureSpec>().is_err());
    }

    #[test]
    fn decay_fits() {
        let mut s = Stream::new(10);
        let sp3 = decay_fit(&MeasureSpec::sphere(3).unwrap(), 8, 16, &mut s).unwrap();
        assert!((sp3.sigma - 1.0).abs() < 0.1, "sphere(3) sigma {}", sp3.sigma);
        let sp2 = decay_fit(&MeasureSpec::sphere(2).unwrap(), 8, 16, &mut s).unwrap();
        assert!(sp2.sigma >= 0.45, "sphere(2) sigma {}", sp2.sigma);
        let mc = decay_fit(&MeasureSpec::moment_curve(2, 0.0, 1.0).unwrap(), 8, 16, &mut s).unwrap();
        assert!(mc.sigma >= 0.45, "moment sigma {}", mc.sigma);
        let seg = decay_fit_with(
            &MeasureSpec::axis_segment(2).unwrap(),
            6,
            8,
            DecayOptions { perpendicular_only: true },
            &mut s,
        )
        .unwrap();
        assert_eq!(seg.sigma, 0.0);
        assert!(seg.shells.iter().all(|sh| sh.max_abs == 1.0));
        assert!(decay_fit(&MeasureSpec::sphere(2).unwrap(), 3, 4, &mut s).is_err());
    }
}
