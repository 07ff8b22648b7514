//! The acceptance suite: twelve checks of exact identities, oracle
//! equivalences and fitted growth rates, each reporting what it measured.

use crate::covering::{check_cover, cover_level, CoverParams};
use crate::error::{LabError, Result};
use crate::exponents::{
    case_consistency, hd_bound_boxes, hd_bound_curve, higher_box_exponent, lebesgue_profile_exponent,
    segment_comparison, u_general,
};
use crate::fit::least_squares;
use crate::measures::{decay_fit, decay_fit_with, oscillatory_integral, DecayOptions, MeasureSpec};
use crate::moments::{growth_fit, lemma_l2_sum, moment_mc, moment_quadrature, short_interval_l2_sum};
use crate::rng::Stream;
use crate::torus::TorusPoint;
use crate::vinogradov::{count, count_table, count_table_naive, critical_count};
use crate::weights::WeightSequence;
use crate::weyl::{weyl_prefixes, weyl_sum, Method};
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::fmt;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SuiteKind {
    /// Reduced sizes, same tolerances.
    Fast,
    /// Sizes as stated in each criterion.
    Full,
}

impl std::str::FromStr for SuiteKind {
    type Err = LabError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "fast" => Ok(Self::Fast),
            "full" => Ok(Self::Full),
            other => Err(LabError::invalid(format!("unknown suite '{other}' (expected fast or full)"))),
        }
    }
}

pub const CRITERIA: [(u32, &str); 12] = [
    (1, "kernel agreement"),
    (2, "parseval oracle"),
    (3, "vinogradov exactness"),
    (4, "critical-line slope"),
    (5, "second moment slope"),
    (6, "sixth moment on the moment curve"),
    (7, "fourier decay"),
    (8, "van der corput envelope"),
    (9, "lattice L2 sums"),
    (10, "exponent formulas"),
    (11, "covering counts"),
    (12, "almost-all cancellation"),
];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CriterionOutcome {
    pub id: u32,
    pub name: String,
    pub passed: bool,
    pub measured: String,
    pub expected: String,
    /// Distance to the threshold, positive when passing.
    pub slack: Option<f64>,
    /// The check could not run within resource limits.
    pub capacity: bool,
}

impl fmt::Display for CriterionOutcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "[{}] {:>2} {}: measured {}; expected {}",
            if self.passed { "PASS" } else { "FAIL" },
            self.id,
            self.name,
            self.measured,
            self.expected
        )?;
        if let Some(s) = self.slack {
            write!(f, "; slack {s:.4}")?;
        }
        Ok(())
    }
}

struct Check {
    passed: bool,
    measured: String,
    expected: String,
    slack: Option<f64>,
}

impl Check {
    /// `value <= limit`.
    fn at_most(value: f64, limit: f64, measured: String, expected: String) -> Self {
        Check {
            passed: value <= limit,
            measured,
            expected,
            slack: Some(limit - value),
        }
    }
}

pub fn criterion_name(id: u32) -> Option<&'static str> {
    CRITERIA.iter().find(|(i, _)| *i == id).map(|(_, n)| *n)
}

/// Run one criterion. Errors become failed outcomes; resource-limit errors
/// are flagged with `capacity`.
pub fn run_criterion(id: u32, kind: SuiteKind, seed: u64) -> CriterionOutcome {
    let name = criterion_name(id).unwrap_or("unknown").to_string();
    let stream = Stream::for_task(seed, &format!("criterion-{id}"));
    let full = kind == SuiteKind::Full;
    let res = match id {
        1 => kernel_agreement(full, &stream),
        2 => parseval(full, &stream),
        3 => vinogradov_exactness(full),
        4 => critical_slope(full),
        5 => second_moment_slope(full, &stream),
        6 => sixth_moment(full),
        7 => fourier_decay(&stream),
        8 => van_der_corput(full, &stream),
        9 => lattice_l2(full),
        10 => exponent_formulas(),
        11 => covering_counts(full),
        12 => almost_all(full, &stream),
        _ => Err(LabError::invalid(format!("no criterion {id}"))),
    };
    match res {
        Ok(c) => CriterionOutcome {
            id,
            name,
            passed: c.passed,
            measured: c.measured,
            expected: c.expected,
            slack: c.slack,
            capacity: false,
        },
        Err(e) => CriterionOutcome {
            id,
            name,
            passed: false,
            measured: format!("error: {e}"),
            expected: "a completed run".into(),
            slack: None,
            capacity: e.is_capacity(),
        },
    }
}

/// Run the selected criteria (all when `ids` is `None`) in order.
pub fn run_suite(kind: SuiteKind, ids: Option<&[u32]>, seed: u64) -> Vec<CriterionOutcome> {
    CRITERIA
        .iter()
        .map(|(id, _)| *id)
        .filter(|id| ids.is_none_or(|sel| sel.contains(id)))
        .map(|id| run_criterion(id, kind, seed))
        .collect()
}

fn random_point(d: usize, s: &mut Stream) -> TorusPoint {
    TorusPoint::new((0..d).map(|_| s.uniform()).collect::<Vec<_>>()).expect("finite coordinates")
}

fn kernel_agreement(full: bool, stream: &Stream) -> Result<Check> {
    let points = if full { 1000 } else { 100 };
    let w = WeightSequence::unit();
    let mut worst: f64 = 0.0;
    for d in 2..=5usize {
        for n in [1_000u64, 100_000] {
            let base = stream.derive(&format!("d{d}-n{n}"));
            let errs: Vec<f64> = (0..points as u64)
                .into_par_iter()
                .map(|i| {
                    let x = random_point(d, &mut base.derive_index(i));
                    let a = weyl_sum(&x, n, &w, Method::Direct)?.value;
                    let b = weyl_sum(&x, n, &w, Method::Incremental)?.value;
                    Ok((a - b).norm() / a.norm().max((n as f64).sqrt()))
                })
                .collect::<Result<_>>()?;
            worst = errs.into_iter().fold(worst, f64::max);
        }
    }
    Ok(Check {
        passed: worst <= 1e-9,
        measured: format!("max relative discrepancy {worst:.3e} over d=2..5, N=1e3,1e5, {points} points each"),
        expected: "<= 1e-9".into(),
        slack: Some((1e-9f64).log10() - worst.max(1e-300).log10()),
    })
}

fn parseval(full: bool, stream: &Stream) -> Result<Check> {
    let samples = if full { 100_000 } else { 20_000 };
    let m = MeasureSpec::lebesgue(2)?;
    let r = moment_mc(&m, 2.0, 512, &WeightSequence::unit(), samples, stream)?;
    let dev = (r.value - 512.0).abs();
    Ok(Check::at_most(
        dev,
        3.0 * r.stderr,
        format!("{:.3} +- {:.3} ({samples} samples)", r.value, r.stderr),
        "512 within 3 stderr".into(),
    ))
}

fn vinogradov_exactness(full: bool) -> Result<Check> {
    let unit = WeightSequence::unit();
    let j0 = count(2, 3, 2, &[0, 0], &unit)?.count.exact();
    let j1 = count(2, 3, 2, &[1, 1], &unit)?.count.exact();
    let max_sum_n = if full { 16 } else { 10 };
    let mut sum_ok = 0;
    let mut sum_bad = Vec::new();
    for s in 1..=3u32 {
        for n in 1..=max_sum_n {
            let t = count_table(2, s, n, &unit)?;
            let total: u128 = t.values().filter_map(|r| r.count.exact()).sum();
            if total == u128::from(n).pow(2 * s) {
                sum_ok += 1;
            } else {
                sum_bad.push((s, n));
            }
        }
    }
    let max_naive_n = if full { 8 } else { 5 };
    let mut naive_ok = 0;
    let mut naive_bad = Vec::new();
    for d in 2..=3u32 {
        for s in 1..=3u32 {
            for n in 1..=max_naive_n {
                let fast: BTreeMap<Vec<i64>, u128> = count_table(d, s, n, &unit)?
                    .into_iter()
                    .filter_map(|(k, r)| r.count.exact().map(|c| (k, c)))
                    .collect();
                if fast == count_table_naive(d, s, n)? {
                    naive_ok += 1;
                } else {
                    naive_bad.push((d, s, n));
                }
            }
        }
    }
    let passed = j0 == Some(20) && j1 == Some(0) && sum_bad.is_empty() && naive_bad.is_empty();
    Ok(Check {
        passed,
        measured: format!(
            "J(0)={:?} J(1,1)={:?}; total-count identity {sum_ok} ok {sum_bad:?} bad; naive equivalence {naive_ok} ok {naive_bad:?} bad",
            j0.unwrap_or(0),
            j1.unwrap_or(0)
        ),
        expected: "20, 0, every identity exact".into(),
        slack: None,
    })
}

fn critical_slope(full: bool) -> Result<Check> {
    let ns: &[u64] = if full { &[16, 32, 64, 128, 256] } else { &[16, 32, 64, 128] };
    let mut pts = Vec::new();
    for &n in ns {
        pts.push((n as f64, critical_count(2, n)? as f64));
    }
    let f = growth_fit(&pts)?;
    let dev = (f.slope - 3.0).abs();
    Ok(Check::at_most(
        dev,
        0.35,
        format!("slope {:.4} over N={ns:?}", f.slope),
        "3.0 +- 0.35".into(),
    ))
}

fn second_moment_slope(full: bool, stream: &Stream) -> Result<Check> {
    let top = if full { 12 } else { 10 };
    let samples = if full { 10_000 } else { 2_000 };
    let unit = WeightSequence::unit();
    let sphere = MeasureSpec::sphere(3)?;
    let seg = MeasureSpec::axis_segment(2)?;
    let mut sp = Vec::new();
    let mut sg = Vec::new();
    for i in 6..=top {
        let n = 1u64 << i;
        let r = moment_mc(&sphere, 2.0, n, &unit, samples, &stream.derive_index(n))?;
        sp.push((n as f64, r.value));
        let q = moment_quadrature(&seg, 2.0, n, &unit, 0)?;
        sg.push((n as f64, q.value));
    }
    let a = growth_fit(&sp)?.slope;
    let b = growth_fit(&sg)?.slope;
    Ok(Check::at_most(
        a.max(b),
        1.15,
        format!("Sphere(3) slope {a:.4}, Segment(e1) slope {b:.4} over N=2^6..2^{top}"),
        "<= 1.15".into(),
    ))
}

fn sixth_moment(full: bool) -> Result<Check> {
    let ns: &[u64] = if full { &[16, 32, 64, 128] } else { &[8, 16, 32, 64] };
    let m = MeasureSpec::moment_curve(3, 0.3, 1.0)?;
    let unit = WeightSequence::unit();
    let mut pts = Vec::new();
    for &n in ns {
        pts.push((n as f64, moment_quadrature(&m, 6.0, n, &unit, 0)?.value));
    }
    let slope = growth_fit(&pts)?.slope;
    Ok(Check::at_most(
        slope,
        4.8,
        format!("slope {slope:.4} over N={ns:?}"),
        "<= 4.8 (restricted bound 4.5, trivial 5)".into(),
    ))
}

fn fourier_decay(stream: &Stream) -> Result<Check> {
    let (shells, samples) = (8, 16);
    let mut s = stream.clone();
    let sp3 = decay_fit(&MeasureSpec::sphere(3)?, shells, samples, &mut s)?.sigma;
    let sp2 = decay_fit(&MeasureSpec::sphere(2)?, shells, samples, &mut s)?.sigma;
    let mc = decay_fit(&MeasureSpec::moment_curve(2, 0.0, 1.0)?, shells, samples, &mut s)?.sigma;
    let seg = decay_fit_with(
        &MeasureSpec::axis_segment(2)?,
        shells,
        samples,
        DecayOptions { perpendicular_only: true },
        &mut s,
    )?;
    let seg_unit = seg.shells.iter().all(|sh| sh.max_abs == 1.0);
    let slack = (0.1 - (sp3 - 1.0).abs()).min(sp2 - 0.45).min(mc - 0.45);
    Ok(Check {
        passed: (sp3 - 1.0).abs() <= 0.1 && sp2 >= 0.45 && mc >= 0.45 && seg.sigma == 0.0 && seg_unit,
        measured: format!(
            "Sphere(3) {sp3:.4}, Sphere(2) {sp2:.4}, MomentCurve(2) {mc:.4}, Segment perp {} (|mu^|=1: {seg_unit})",
            seg.sigma
        ),
        expected: "1.0 +- 0.1, >= 0.45, >= 0.45, exactly 0 with |mu^|=1".into(),
        slack: Some(slack),
    })
}

fn van_der_corput(full: bool, stream: &Stream) -> Result<Check> {
    let count = if full { 1000 } else { 200 };
    let cs: Vec<(usize, f64)> = (0..count as u64)
        .into_par_iter()
        .map(|i| {
            let mut s = stream.derive_index(i);
            let d = 2 + (i % 3) as usize;
            let g: Vec<f64> = (0..d).map(|_| StandardNormal.sample(&mut s)).collect();
            let norm = g.iter().map(|x| x * x).sum::<f64>().sqrt().max(1e-300);
            // Radius log-uniform in [1, 1e6].
            let r = 10f64.powf(6.0 * s.uniform());
            let xi: Vec<f64> = g.iter().map(|x| x / norm * r).collect();
            let v = oscillatory_integral(0.0, 1.0, &xi)?.norm();
            Ok((d, v * (1.0 + r).powf(1.0 / d as f64)))
        })
        .collect::<Result<_>>()?;
    let c = cs.iter().map(|(_, c)| *c).fold(0.0, f64::max);
    Ok(Check::at_most(
        c,
        10.0,
        format!("fitted C = {c:.4} over {count} frequencies, d=2..4, |xi| <= 1e6"),
        "C <= 10".into(),
    ))
}

fn lattice_l2(full: bool) -> Result<Check> {
    let ns: &[u64] = if full { &[4, 8, 16, 32] } else { &[4, 8, 16] };
    let mut main = Vec::new();
    let mut short = Vec::new();
    for &n in ns {
        main.push(lemma_l2_sum(2, 0.3, n, 0)?.ratio);
        short.push(short_interval_l2_sum(2, n, 0)?.ratio);
    }
    let a = main.iter().copied().fold(0.0, f64::max);
    let b = short.iter().copied().fold(0.0, f64::max);
    let fmt = |v: &[f64]| v.iter().map(|x| format!("{x:.4}")).collect::<Vec<_>>().join(",");
    Ok(Check::at_most(
        a.max(b),
        20.0,
        format!("ratios [{}] on [0.3,1/2], [{}] on [1/2,3/4] for N={ns:?}", fmt(&main), fmt(&short)),
        "bounded by one constant <= 20".into(),
    ))
}

fn exponent_formulas() -> Result<Check> {
    let mut failures: Vec<String> = Vec::new();
    let mut check = |ok: bool, what: &str| {
        if !ok {
            failures.push(what.to_string());
        }
    };
    check((u_general(2, 0.75)?.value - 4.0 / 3.0).abs() < 1e-12, "u(2, 0.75)");
    check((higher_box_exponent(4, 1.5)? - 14.5).abs() < 1e-12, "higher_box(4, 1.5)");
    check((higher_box_exponent(3, 1.0)? - 9.0).abs() < 1e-12, "higher_box(3, 1)");
    check((hd_bound_curve(2, 0.75)? - 7.0 / 9.0).abs() < 1e-12, "hd_curve(2, 0.75)");
    let mut strict = true;
    for i in 501..1000 {
        let (s, l) = segment_comparison(f64::from(i) / 1000.0)?;
        strict &= s < l;
    }
    check(strict, "segment comparison");
    let mut consistent = true;
    for d in 2..=6u32 {
        for i in 1..=(100 * d) {
            consistent &= case_consistency(d, f64::from(i) / 100.0);
        }
    }
    check(consistent, "case consistency");
    let mut worst: f64 = 0.0;
    for d in 2..=6u32 {
        let rho = f64::from(d) * f64::from(d + 1);
        for i in 1..1000 {
            let a = 0.5 + 0.5 * f64::from(i) / 1000.0;
            let b = hd_bound_boxes(d, a, rho, 0.5, lebesgue_profile_exponent(d, a))?.value;
            worst = worst.max((b - u_general(d, a)?.value).abs());
        }
    }
    check(worst <= 1e-12, "boxes vs u");
    Ok(Check {
        passed: failures.is_empty(),
        measured: if failures.is_empty() {
            format!("all formula checks hold; boxes vs u max deviation {worst:.1e}")
        } else {
            format!("failed: {}", failures.join(", "))
        },
        expected: "exact values and identities".into(),
        slack: None,
    })
}

fn covering_counts(full: bool) -> Result<Check> {
    let top = if full { 10 } else { 9 };
    let m = MeasureSpec::axis_segment(2)?;
    let unit = WeightSequence::unit();
    let mut worst_slope = f64::NEG_INFINITY;
    let mut contract = true;
    let mut rows = Vec::new();
    for alpha in [0.6, 0.7, 0.8] {
        let p = CoverParams {
            alpha,
            ..CoverParams::default()
        };
        let mut xs = Vec::new();
        let mut ys = Vec::new();
        let mut ls = Vec::new();
        for i in 6..=top {
            let n = 1u64 << i;
            let (r, pts) = cover_level(&m, n, &p, &unit)?;
            contract &= check_cover(&r, &pts).holds();
            let c = r.normalized.expect("normalised count");
            xs.push((n as f64).ln());
            ys.push(c.ln());
            ls.push(r.l);
        }
        let slope = least_squares(&xs, &ys)?.slope;
        worst_slope = worst_slope.max(slope);
        rows.push(format!("alpha {alpha}: L={ls:?} slope {slope:.3}"));
    }
    Ok(Check {
        passed: contract && worst_slope <= 0.3,
        measured: format!("{}; cover contract {}", rows.join("; "), if contract { "holds" } else { "VIOLATED" }),
        expected: "log-log slope of L N^{rho(alpha-theta)} f(zeta) <= 0.3; contract exact".into(),
        slack: Some(0.3 - worst_slope),
    })
}

fn almost_all(full: bool, stream: &Stream) -> Result<Check> {
    let top: u64 = if full { 1 << 12 } else { 1 << 10 };
    let unit = WeightSequence::unit();
    let mut rows = Vec::new();
    let mut passed = true;
    let mut slack = f64::INFINITY;
    for m in [MeasureSpec::sphere(2)?, MeasureSpec::moment_curve(2, 0.0, 1.0)?] {
        let base = stream.derive(&m.to_string());
        let mut sups: Vec<f64> = (0..100u64)
            .into_par_iter()
            .map(|i| {
                let x = m.sample(&mut base.derive_index(i));
                let pre = weyl_prefixes(&x, top, &unit)?;
                Ok(pre
                    .iter()
                    .enumerate()
                    .map(|(k, z)| z.norm() / ((k + 1) as f64).powf(0.55))
                    .fold(0.0, f64::max))
            })
            .collect::<Result<_>>()?;
        sups.sort_by(|a, b| a.total_cmp(b));
        let median = 0.5 * (sups[49] + sups[50]);
        let over = sups.iter().filter(|v| **v > 5.0).count();
        passed &= median <= 5.0 && over <= 5;
        slack = slack.min(5.0 - median);
        rows.push(format!("{m}: median {median:.4}, {over}/100 above 5"));
    }
    Ok(Check {
        passed,
        measured: format!("{} (N <= {top})", rows.join("; ")),
        expected: "median <= 5 and at most 5% of points above 5".into(),
        slack: Some(slack),
    })
}
