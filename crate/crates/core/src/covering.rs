//! Large values of the completion sum on the support of a measure, greedy
//! covers by disjoint boxes, the singular value functional and empirical
//! dimension thresholds.

use crate::error::{LabError, Result};
use crate::fit::least_squares;
use crate::measures::MeasureSpec;
use crate::rectangle::Rectangle;
use crate::rng::Stream;
use crate::torus::TorusPoint;
use crate::weights::WeightSequence;
use crate::weyl::{completion_sum, CompletionEvaluator};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::collections::HashMap;
use std::f64::consts::PI;

/// Largest number of grid points in one scan.
pub const SCAN_CAP: u64 = 1 << 26;
pub const DEFAULT_EPSILON: f64 = 0.05;
/// Blow-up factor of the cover.
pub const BLOW_UP: f64 = 3.0;
/// Smallest `N` accepted by [`continuity_check`].
pub const CONTINUITY_MIN_N: u64 = 256;

fn check_alpha(alpha: f64) -> Result<()> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(LabError::invalid(format!("alpha must lie in (0, 1), got {alpha}")));
    }
    Ok(())
}

/// `zeta_j = N^{alpha - j - 1 - eps}`, `j = 1..=d`.
pub fn zeta_sides(n: u64, alpha: f64, epsilon: f64, d: usize) -> Result<Vec<f64>> {
    check_alpha(alpha)?;
    if n < 2 {
        return Err(LabError::invalid("N must be >= 2"));
    }
    if !(epsilon >= 0.0 && epsilon.is_finite()) {
        return Err(LabError::invalid(format!("epsilon must be >= 0, got {epsilon}")));
    }
    let nf = n as f64;
    Ok((1..=d).map(|j| nf.powf(alpha - j as f64 - 1.0 - epsilon)).collect())
}

/// A grid point of the support with `W >= N^alpha`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LargeValue {
    /// Ambient coordinates (not reduced modulo one).
    pub coords: Vec<f64>,
    pub w: f64,
}

/// Grid over the parameter domain of a measure of intrinsic dimension at
/// most two.
struct Chart<'a> {
    m: &'a MeasureSpec,
    /// Parameter ranges.
    ranges: Vec<(f64, f64)>,
    /// `lipschitz[a][j]`: bound on `|d x_j / d u_a|`.
    lipschitz: Vec<Vec<f64>>,
    /// Whether the upper end of each range is identified with the lower end.
    periodic: Vec<bool>,
}

impl<'a> Chart<'a> {
    fn new(m: &'a MeasureSpec) -> Result<Self> {
        let d = m.ambient_dim();
        Ok(match m {
            MeasureSpec::Segment { omega } => Chart {
                m,
                ranges: vec![(0.0, 1.0)],
                lipschitz: vec![omega.clone()],
                periodic: vec![false],
            },
            MeasureSpec::MomentCurve { a, b, .. } => Chart {
                m,
                ranges: vec![(*a, *b)],
                lipschitz: vec![(1..=d).map(|j| j as f64 * b.powi(j as i32 - 1)).collect()],
                periodic: vec![false],
            },
            MeasureSpec::Sphere { d: 2 } => Chart {
                m,
                ranges: vec![(0.0, 1.0)],
                lipschitz: vec![vec![PI, PI]],
                periodic: vec![true],
            },
            MeasureSpec::Sphere { d: 3 } => Chart {
                m,
                ranges: vec![(0.0, 1.0), (0.0, 1.0)],
                lipschitz: vec![vec![PI / 2.0; 3], vec![PI, PI, 0.0]],
                periodic: vec![false, true],
            },
            MeasureSpec::Lebesgue { d: 2 } => Chart {
                m,
                ranges: vec![(0.0, 1.0), (0.0, 1.0)],
                lipschitz: vec![vec![1.0, 0.0], vec![0.0, 1.0]],
                periodic: vec![true, true],
            },
            other => {
                return Err(LabError::UnsupportedDimension(format!(
                    "large-value scans need intrinsic dimension <= 2, got {other}"
                )))
            }
        })
    }

    fn embed(&self, u: &[f64]) -> Vec<f64> {
        match self.m {
            MeasureSpec::Segment { omega } => omega.iter().map(|w| w * u[0]).collect(),
            MeasureSpec::MomentCurve { d, .. } => (1..=*d as i32).map(|j| u[0].powi(j)).collect(),
            MeasureSpec::Sphere { d: 2 } => {
                let th = 2.0 * PI * u[0];
                vec![0.5 + 0.5 * th.cos(), 0.5 + 0.5 * th.sin()]
            }
            MeasureSpec::Sphere { d: 3 } => {
                let (th, ph) = (PI * u[0], 2.0 * PI * u[1]);
                vec![
                    0.5 + 0.5 * th.sin() * ph.cos(),
                    0.5 + 0.5 * th.sin() * ph.sin(),
                    0.5 + 0.5 * th.cos(),
                ]
            }
            _ => u.to_vec(),
        }
    }

    /// Grid sizes along each parameter axis with pitch
    /// `min_j zeta_j / (2 L_{a,j})`, at least `resolution` per axis.
    fn grid(&self, zeta: &[f64], resolution: usize) -> Result<Vec<usize>> {
        let mut sizes = Vec::with_capacity(self.ranges.len());
        for (a, (lo, hi)) in self.ranges.iter().enumerate() {
            let pitch = self.lipschitz[a]
                .iter()
                .zip(zeta)
                .filter(|(l, _)| **l > 0.0)
                .map(|(l, z)| z / (2.0 * l))
                .fold(f64::INFINITY, f64::min);
            let count = ((hi - lo) / pitch).ceil().max(resolution as f64);
            if count > SCAN_CAP as f64 {
                return Err(LabError::CapacityExceeded(format!("scan grid of {count:.3e} points per axis")));
            }
            let count = count as usize + usize::from(!self.periodic[a]);
            sizes.push(count);
        }
        let total = sizes.iter().fold(1u128, |acc, s| acc * *s as u128);
        if total > SCAN_CAP as u128 {
            return Err(LabError::CapacityExceeded(format!("scan grid of {total} points exceeds 2^26")));
        }
        Ok(sizes)
    }

    fn node(&self, sizes: &[usize], mut index: usize) -> Vec<f64> {
        let mut u = vec![0.0; sizes.len()];
        for a in (0..sizes.len()).rev() {
            let k = index % sizes[a];
            index /= sizes[a];
            let (lo, hi) = self.ranges[a];
            let steps = if self.periodic[a] { sizes[a] } else { sizes[a] - 1 }.max(1);
            u[a] = lo + (hi - lo) * k as f64 / steps as f64;
        }
        u
    }
}

/// Grid points of `spt mu` with `W(x; N) >= N^alpha`, in grid order.
///
/// The grid pitch keeps every coordinate step below `zeta_j(eps) / 2`, so
/// each box of the cover schedule contains grid points. The result is an
/// approximation of the large-value set at that resolution. Nodes on the far
/// faces `x_j = 1` are skipped: boxes are clipped to `[0, 1)^d`.
pub fn find_large_values(
    m: &MeasureSpec,
    n: u64,
    alpha: f64,
    epsilon: f64,
    w: &WeightSequence,
    resolution: usize,
) -> Result<Vec<LargeValue>> {
    let zeta = zeta_sides(n, alpha, epsilon, m.ambient_dim())?;
    let chart = Chart::new(m)?;
    let sizes = chart.grid(&zeta, resolution)?;
    let total: usize = sizes.iter().product();
    let threshold = (n as f64).powf(alpha);
    const CHUNK: usize = 1024;
    let chunks: Vec<Vec<LargeValue>> = (0..total.div_ceil(CHUNK))
        .into_par_iter()
        .map(|c| {
            let mut ev = CompletionEvaluator::new(n)?;
            let mut out = Vec::new();
            for i in c * CHUNK..((c + 1) * CHUNK).min(total) {
                let coords = chart.embed(&chart.node(&sizes, i));
                if coords.iter().any(|c| *c >= 1.0) {
                    continue;
                }
                let x = TorusPoint::new(coords.clone())?;
                let (wv, _) = ev.evaluate(&x, w)?;
                if wv >= threshold {
                    out.push(LargeValue { coords, w: wv });
                }
            }
            Ok(out)
        })
        .collect::<Result<_>>()?;
    Ok(chunks.into_iter().flatten().collect())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoverReport {
    #[serde(rename = "N")]
    pub n: u64,
    pub alpha: f64,
    pub epsilon: f64,
    pub zeta: Vec<f64>,
    /// Kept boxes `R(x_l, zeta)`; the cover itself uses `R(x_l, 3 zeta)`.
    pub rectangles: Vec<Rectangle>,
    /// `W` at each kept centre.
    pub centre_values: Vec<f64>,
    #[serde(rename = "L")]
    pub l: usize,
    /// Number of large-value points that were covered.
    pub points: usize,
    pub measure: Option<MeasureSpec>,
    /// `N^{rho (theta - alpha)} / f(zeta)`, when `rho` and `theta` are set.
    pub bound: Option<f64>,
    /// `L N^{rho (alpha - theta)} f(zeta)`.
    pub normalized: Option<f64>,
}

impl CoverReport {
    pub fn blown_up(&self) -> Vec<Rectangle> {
        self.rectangles.iter().map(|r| r.scaled(BLOW_UP)).collect()
    }
}

fn bucket_of(x: f64, width: f64) -> i64 {
    (x / width).floor() as i64
}

/// Greedy maximal family of pairwise disjoint boxes `R(x, zeta)` centred at
/// the given points, visited by decreasing `W` and then lexicographically.
pub fn greedy_cover(points: &[LargeValue], zeta: &[f64]) -> Result<CoverReport> {
    if zeta.is_empty() || zeta.iter().any(|z| !(*z > 0.0 && *z < 1.0)) {
        return Err(LabError::invalid("half-sides must lie in (0, 1)"));
    }
    if let Some(p) = points.iter().find(|p| p.coords.len() != zeta.len()) {
        return Err(LabError::invalid(format!(
            "point of dimension {} against {} half-sides",
            p.coords.len(),
            zeta.len()
        )));
    }
    let mut order: Vec<usize> = (0..points.len()).collect();
    order.sort_by(|&i, &j| {
        let (a, b) = (&points[i], &points[j]);
        b.w.total_cmp(&a.w).then_with(|| {
            a.coords
                .iter()
                .zip(&b.coords)
                .map(|(x, y)| x.total_cmp(y))
                .find(|o| o.is_ne())
                .unwrap_or(std::cmp::Ordering::Equal)
        })
    });
    // Boxes can only meet when their first coordinates are within 2 zeta_1.
    let width = 2.0 * zeta[0];
    let mut buckets: HashMap<i64, Vec<usize>> = HashMap::new();
    let mut kept: Vec<Rectangle> = Vec::new();
    let mut values = Vec::new();
    for i in order {
        let p = &points[i];
        let r = Rectangle::new(p.coords.clone(), zeta.to_vec())?;
        let b = bucket_of(p.coords[0], width);
        let clash = (b - 1..=b + 1)
            .filter_map(|k| buckets.get(&k))
            .flatten()
            .any(|&k| !kept[k].is_disjoint(&r));
        if !clash {
            buckets.entry(b).or_default().push(kept.len());
            kept.push(r);
            values.push(p.w);
        }
    }
    Ok(CoverReport {
        n: 0,
        alpha: f64::NAN,
        epsilon: f64::NAN,
        zeta: zeta.to_vec(),
        l: kept.len(),
        rectangles: kept,
        centre_values: values,
        points: points.len(),
        measure: None,
        bound: None,
        normalized: None,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CoverCheck {
    pub disjoint: bool,
    pub covered: bool,
}

impl CoverCheck {
    pub fn holds(&self) -> bool {
        self.disjoint && self.covered
    }
}

/// Exhaustive pairwise disjointness of the kept boxes, and membership of
/// every point in some blown-up box.
pub fn check_cover(report: &CoverReport, points: &[LargeValue]) -> CoverCheck {
    let rs = &report.rectangles;
    let disjoint = (0..rs.len())
        .into_par_iter()
        .all(|i| (i + 1..rs.len()).all(|j| rs[i].is_disjoint(&rs[j])));
    let big = report.blown_up();
    let covered = points
        .par_iter()
        .all(|p| big.iter().any(|r| r.contains(&p.coords)));
    CoverCheck { disjoint, covered }
}

/// `phi_{k,t}(R) = r_1 ... r_k r_{k+1}^{t-k}` with full side lengths
/// `r_1 >= ... >= r_d`.
pub fn phi_kt(r: &Rectangle, k: usize, t: f64) -> Result<f64> {
    phi_sides(&r.side_lengths(), k, t)
}

fn phi_sides(sides: &[f64], k: usize, t: f64) -> Result<f64> {
    if k >= sides.len() {
        return Err(LabError::invalid(format!("k = {k} must be below d = {}", sides.len())));
    }
    if !(t > 0.0 && t <= sides.len() as f64) {
        return Err(LabError::invalid(format!("t = {t} outside (0, {}]", sides.len())));
    }
    let mut r = sides.to_vec();
    r.sort_by(|a, b| b.total_cmp(a));
    Ok(r[..k].iter().product::<f64>() * r[k].powf(t - k as f64))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DimensionThreshold {
    /// `(k, t*)` for every requested `k`.
    pub per_k: Vec<(usize, f64)>,
    pub value: f64,
    pub argmin_k: Option<usize>,
    /// Set when no level has a nonempty cover.
    pub degenerate: bool,
}

/// Slope in `i` of `log2 sum_{R in cover_i} phi_{k,t}(R)` over nonempty levels.
fn series_slope(covers: &[CoverReport], k: usize, t: f64) -> Result<f64> {
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for (i, c) in covers.iter().enumerate() {
        if c.rectangles.is_empty() {
            continue;
        }
        let mut total = 0.0;
        for r in &c.rectangles {
            total += phi_kt(r, k, t)?;
        }
        xs.push(i as f64);
        ys.push(total.log2());
    }
    Ok(least_squares(&xs, &ys)?.slope)
}

/// Empirical `t*` at which the covering series over consecutive dyadic
/// levels switches from growing to decaying, by bisection on the fitted
/// growth rate; minimised over the given `k`.
pub fn dimension_threshold(covers: &[CoverReport], ks: &[usize]) -> Result<DimensionThreshold> {
    if covers.len() < 4 {
        return Err(LabError::invalid(format!("need at least 4 dyadic levels, got {}", covers.len())));
    }
    let nonempty = covers.iter().filter(|c| !c.rectangles.is_empty()).count();
    if nonempty == 0 {
        return Ok(DimensionThreshold {
            per_k: ks.iter().map(|&k| (k, 0.0)).collect(),
            value: 0.0,
            argmin_k: None,
            degenerate: true,
        });
    }
    if nonempty < 2 {
        return Err(LabError::Degenerate("fewer than two nonempty cover levels".into()));
    }
    let d = covers
        .iter()
        .find_map(|c| c.rectangles.first().map(|r| r.dim()))
        .expect("nonempty level");
    let mut per_k = Vec::with_capacity(ks.len());
    for &k in ks {
        let top = d as f64;
        let lo_t = 1e-9;
        let t = if series_slope(covers, k, top)? >= 0.0 {
            top
        } else if series_slope(covers, k, lo_t)? <= 0.0 {
            0.0
        } else {
            let (mut lo, mut hi) = (lo_t, top);
            for _ in 0..60 {
                let mid = 0.5 * (lo + hi);
                if series_slope(covers, k, mid)? > 0.0 {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            0.5 * (lo + hi)
        };
        per_k.push((k, t));
    }
    let (argmin_k, value) = per_k
        .iter()
        .copied()
        .fold((None, f64::INFINITY), |(bk, bv), (k, t)| if t < bv { (Some(k), t) } else { (bk, bv) });
    Ok(DimensionThreshold {
        per_k,
        value,
        argmin_k,
        degenerate: false,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CoverParams {
    pub alpha: f64,
    pub epsilon: f64,
    /// Moment exponent and typical-size exponent in the count bound.
    pub rho: f64,
    pub theta: f64,
    pub resolution: usize,
}

impl Default for CoverParams {
    fn default() -> Self {
        Self {
            alpha: 0.7,
            epsilon: DEFAULT_EPSILON,
            rho: 2.0,
            theta: 0.5,
            resolution: 0,
        }
    }
}

/// Scan, cover and normalise at one `N`. Returns the report together with
/// the large-value points it covers.
pub fn cover_level(
    m: &MeasureSpec,
    n: u64,
    p: &CoverParams,
    w: &WeightSequence,
) -> Result<(CoverReport, Vec<LargeValue>)> {
    let zeta = zeta_sides(n, p.alpha, p.epsilon, m.ambient_dim())?;
    let points = find_large_values(m, n, p.alpha, p.epsilon, w, p.resolution)?;
    let mut report = greedy_cover(&points, &zeta)?;
    let f = m.regularity_profile().lower_bound(&zeta);
    let nf = n as f64;
    report.n = n;
    report.alpha = p.alpha;
    report.epsilon = p.epsilon;
    report.measure = Some(m.clone());
    report.bound = Some(nf.powf(p.rho * (p.theta - p.alpha)) / f);
    report.normalized = Some(report.l as f64 * nf.powf(p.rho * (p.alpha - p.theta)) * f);
    Ok((report, points))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ContinuityReport {
    pub passed: bool,
    pub probes: usize,
    pub failures: usize,
    /// Smallest `W(y) / N^alpha` over the probes.
    pub min_ratio: f64,
}

/// Probes `y = x + u zeta(eps) * scale`, `u` uniform in `[-1, 1)^d`, and
/// checks `W(y; N) >= N^alpha / 2`.
pub fn continuity_check(
    x: &TorusPoint,
    n: u64,
    alpha: f64,
    epsilon: f64,
    w: &WeightSequence,
    probes: usize,
    stream: &Stream,
) -> Result<ContinuityReport> {
    continuity_probe(x, n, alpha, epsilon, w, probes, stream, 1.0)
}

#[allow(clippy::too_many_arguments)]
pub fn continuity_probe(
    x: &TorusPoint,
    n: u64,
    alpha: f64,
    epsilon: f64,
    w: &WeightSequence,
    probes: usize,
    stream: &Stream,
    scale: f64,
) -> Result<ContinuityReport> {
    if n < CONTINUITY_MIN_N {
        return Err(LabError::PreconditionFailed(format!(
            "continuity checks need N >= {CONTINUITY_MIN_N}, got {n}"
        )));
    }
    let zeta = zeta_sides(n, alpha, epsilon, x.dim())?;
    let threshold = (n as f64).powf(alpha);
    let wx = completion_sum(x, n, w)?;
    if wx < threshold {
        return Err(LabError::PreconditionFailed(format!(
            "W(x; N) = {wx:.4} is below N^alpha = {threshold:.4}"
        )));
    }
    let ratios: Vec<f64> = (0..probes)
        .into_par_iter()
        .map(|i| {
            let mut s = stream.derive_index(i as u64);
            let y: Vec<f64> = x
                .coords()
                .iter()
                .zip(&zeta)
                .map(|(c, z)| c + scale * z * (2.0 * s.uniform() - 1.0))
                .collect();
            let mut ev = CompletionEvaluator::new(n)?;
            Ok(ev.evaluate(&TorusPoint::new(y)?, w)?.0 / threshold)
        })
        .collect::<Result<_>>()?;
    let failures = ratios.iter().filter(|r| **r < 0.5).count();
    Ok(ContinuityReport {
        passed: failures == 0,
        probes,
        failures,
        min_ratio: ratios.iter().copied().fold(f64::INFINITY, f64::min),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn lv(coords: &[f64], w: f64) -> LargeValue {
        LargeValue { coords: coords.to_vec(), w }
    }

    #[test]
    fn zeta_schedule() {
        let z = zeta_sides(100, 0.7, 0.0, 2).unwrap();
        assert!((z[0] - 100f64.powf(-1.3)).abs() < 1e-15);
        assert!((z[1] - 100f64.powf(-2.3)).abs() < 1e-18);
        let z = zeta_sides(64, 0.6, 0.0, 4).unwrap();
        for p in z.windows(2) {
            assert!((p[1] / p[0] - 1.0 / 64.0).abs() < 1e-12);
        }
        let ze = zeta_sides(64, 0.6, 0.05, 4).unwrap();
        for (a, b) in z.iter().zip(&ze) {
            assert!((b / a - 64f64.powf(-0.05)).abs() < 1e-12);
        }
        assert!(zeta_sides(64, 1.0, 0.0, 2).is_err());
        assert!(zeta_sides(64, 0.0, 0.0, 2).is_err());
    }

    #[test]
    fn greedy_examples() {
        let zeta = [0.1, 0.1];
        let r = greedy_cover(&[lv(&[0.5, 0.5], 3.0), lv(&[0.52, 0.49], 5.0), lv(&[0.45, 0.55], 1.0)], &zeta).unwrap();
        assert_eq!(r.l, 1);
        assert_eq!(r.rectangles[0].center(), &[0.52, 0.49]);
        let pts = [lv(&[0.2, 0.5], 1.0), lv(&[0.6, 0.5], 1.0)];
        let r = greedy_cover(&pts, &zeta).unwrap();
        assert_eq!(r.l, 2);
        assert!(check_cover(&r, &pts).holds());
        // Touching faces count as disjoint.
        let r = greedy_cover(&[lv(&[0.25, 0.5], 1.0), lv(&[0.5, 0.5], 1.0)], &[0.125, 0.1]).unwrap();
        assert_eq!(r.l, 2);
        assert_eq!(greedy_cover(&[], &zeta).unwrap().l, 0);
    }

    #[test]
    fn greedy_contract_on_random_points() {
        let mut s = Stream::for_task(3, "cover");
        let pts: Vec<LargeValue> = (0..2000)
            .map(|_| lv(&[s.uniform(), s.uniform()], s.uniform()))
            .collect();
        let r = greedy_cover(&pts, &[0.02, 0.05]).unwrap();
        assert!(r.l > 10);
        assert!(check_cover(&r, &pts).holds());
    }

    #[test]
    fn phi_examples() {
        let r = Rectangle::new(vec![0.5, 0.5], vec![0.125, 0.25]).unwrap();
        assert!((phi_kt(&r, 0, 1.0).unwrap() - 0.5).abs() < 1e-15);
        assert!((phi_kt(&r, 1, 1.5).unwrap() - 0.25).abs() < 1e-15);
        assert!((phi_kt(&r, 1, 2.0).unwrap() - 0.125).abs() < 1e-15);
        assert!((phi_kt(&r, 1, 1.0).unwrap() - 0.5).abs() < 1e-15);
        assert!(phi_kt(&r, 2, 1.0).is_err());
        assert!(phi_kt(&r, 0, 0.0).is_err());
        assert!(phi_kt(&r, 0, 2.5).is_err());
    }

    /// Covers with `L_i = N_i` boxes of the `zeta(alpha)` schedule.
    fn synthetic(alpha: f64) -> Vec<CoverReport> {
        (4..10u32)
            .map(|i| {
                let n = 1u64 << i;
                let zeta = zeta_sides(n, alpha, 0.0, 2).unwrap();
                let rects: Vec<Rectangle> = (0..n)
                    .map(|k| Rectangle::new(vec![(k as f64 + 0.5) / n as f64, 0.5], zeta.clone()).unwrap())
                    .collect();
                CoverReport {
                    n,
                    alpha,
                    epsilon: 0.0,
                    zeta,
                    l: rects.len(),
                    centre_values: vec![1.0; rects.len()],
                    rectangles: rects,
                    points: n as usize,
                    measure: None,
                    bound: None,
                    normalized: None,
                }
            })
            .collect()
    }

    #[test]
    fn threshold_matches_closed_form() {
        for alpha in [0.6, 0.75, 0.9] {
            let t = dimension_threshold(&synthetic(alpha), &[1]).unwrap();
            // L = N = N^{rho(theta - alpha) - g} with rho(theta - alpha) - g = 1.
            let g = 2.0 * (0.5 - alpha) - 1.0;
            let expect = crate::exponents::hd_bound_boxes(2, alpha, 2.0, 0.5, g).unwrap();
            let k1 = expect.candidates[1];
            assert!((t.value - k1).abs() < 1e-9, "alpha {alpha}: {} vs {k1}", t.value);
        }
    }

    #[test]
    fn empty_covers_are_degenerate() {
        let mut covers = synthetic(0.7);
        for c in &mut covers {
            c.rectangles.clear();
            c.l = 0;
        }
        let t = dimension_threshold(&covers, &[0, 1]).unwrap();
        assert!(t.degenerate);
        assert_eq!(t.value, 0.0);
        assert!(dimension_threshold(&covers[..3], &[0]).is_err());
    }

    #[test]
    fn origin_is_a_large_value() {
        let m = MeasureSpec::axis_segment(2).unwrap();
        let pts = find_large_values(&m, 64, 0.9, 0.05, &WeightSequence::unit(), 0).unwrap();
        let threshold = 64f64.powf(0.9);
        assert!(pts.iter().any(|p| p.coords[0] == 0.0));
        assert!(pts.iter().all(|p| p.w >= threshold));
    }

    #[test]
    fn segment_cover_contract() {
        let m = MeasureSpec::axis_segment(2).unwrap();
        let p = CoverParams::default();
        let (r, pts) = cover_level(&m, 128, &p, &WeightSequence::unit()).unwrap();
        assert!(r.l >= 1 && r.l <= pts.len());
        assert!(check_cover(&r, &pts).holds());
        assert!(r.normalized.unwrap() > 0.0);
    }

    #[test]
    fn circle_cover_contract() {
        let m = MeasureSpec::sphere(2).unwrap();
        let p = CoverParams {
            alpha: 0.8,
            ..CoverParams::default()
        };
        let (r, pts) = cover_level(&m, 32, &p, &WeightSequence::unit()).unwrap();
        assert!(check_cover(&r, &pts).holds());
    }

    #[test]
    fn continuity_at_the_origin() {
        let x = TorusPoint::zero(2).unwrap();
        let s = Stream::for_task(4, "continuity");
        let r = continuity_check(&x, 256, 0.7, 0.05, &WeightSequence::unit(), 64, &s).unwrap();
        assert!(r.passed, "{r:?}");
        assert!(continuity_check(&x, 128, 0.7, 0.05, &WeightSequence::unit(), 4, &s).is_err());
        let y = TorusPoint::new(vec![0.37, 0.61]).unwrap();
        assert!(matches!(
            continuity_check(&y, 256, 0.99, 0.05, &WeightSequence::unit(), 4, &s),
            Err(LabError::PreconditionFailed(_))
        ));
    }
}
