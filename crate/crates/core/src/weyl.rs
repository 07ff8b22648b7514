//! Weyl sums `S_{a,d}(x; N) = sum_{n<=N} a(N,n) e(x_1 n + ... + x_d n^d)`,
//! their prefix sums, and the completion sum `W_{a,d}(x; N)`.
//!
//! Two kernels are provided. The direct kernel evaluates every phase exactly
//! (see [`crate::torus`]) and calls `sin_cos` once per term. The incremental
//! kernel walks the forward-difference table of the phase polynomial: the
//! table itself is advanced exactly in 128-bit fixed point, while a parallel
//! table of unit complex rotators is advanced with `d` complex products per
//! term and re-synchronised from the exact table at the start of each block.

use crate::error::{LabError, Result};
use crate::summation::ComplexNeumaier;
use crate::torus::{e_fixed, TorusPoint};
use crate::weights::WeightSequence;
use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};
use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::Arc;

/// Largest supported sum length.
pub const MAX_SUM_LENGTH: u64 = 1 << 24;

/// Binomial growth allowed for rotator drift inside one block, `C(B, d)`.
const DRIFT_GROWTH_CAP: f64 = (1u64 << 18) as f64;
const MAX_BLOCK: usize = 4096;

static CORRUPT_INCREMENTAL: AtomicBool = AtomicBool::new(false);

/// Test hook: when enabled, the incremental kernel scales every term by
/// `1 + 1e-6`. Used to check that the acceptance runner notices a broken
/// kernel.
pub fn set_incremental_corruption(enabled: bool) {
    CORRUPT_INCREMENTAL.store(enabled, Ordering::SeqCst);
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Direct,
    #[default]
    Incremental,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SumResult {
    pub value: Complex64,
    pub n: u64,
    pub method: Method,
    /// Bound on the accumulated error caused by phase rounding and rotator
    /// drift.
    pub phase_error_budget: f64,
}

fn binomial(n: usize, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// Re-synchronisation interval of the incremental kernel for degree `d`:
/// the largest power of two `B <= 4096` with `C(B, d) <= 2^18`.
pub fn block_length(d: usize) -> usize {
    let mut b = 8;
    while b * 2 <= MAX_BLOCK && binomial(b * 2, d) <= DRIFT_GROWTH_CAP {
        b *= 2;
    }
    b
}

/// Per-term phase error bound (radians) of the incremental kernel.
fn incremental_term_error(d: usize) -> f64 {
    let eps = f64::EPSILON;
    std::f64::consts::TAU * eps + binomial(block_length(d), d) * 2.0 * eps
}

fn direct_term_error() -> f64 {
    std::f64::consts::TAU * f64::EPSILON
}

/// Streams `e(P(n))` for `n = 1, 2, ...`.
pub struct IncrementalKernel<'a> {
    fixed: &'a [u128],
    diffs: Vec<u128>,
    rot: Vec<Complex64>,
    block: usize,
    step: usize,
    corrupt: bool,
}

impl<'a> IncrementalKernel<'a> {
    pub fn new(x: &'a TorusPoint) -> Self {
        Self::starting_at(x, 1)
    }

    pub fn starting_at(x: &'a TorusPoint, n0: u64) -> Self {
        let fixed = x.fixed();
        let d = fixed.len();
        let mut v: Vec<u128> = (0..=d as u64).map(|i| x.phase_fixed(n0 + i)).collect();
        for level in 1..=d {
            for i in (level..=d).rev() {
                v[i] = v[i].wrapping_sub(v[i - 1]);
            }
        }
        let mut k = Self {
            fixed,
            diffs: v,
            rot: vec![Complex64::default(); d + 1],
            block: block_length(d),
            step: 0,
            corrupt: CORRUPT_INCREMENTAL.load(Ordering::Relaxed),
        };
        k.resync();
        k
    }

    fn resync(&mut self) {
        for (r, &p) in self.rot.iter_mut().zip(&self.diffs) {
            *r = e_fixed(p);
        }
        if self.corrupt {
            self.rot[0] *= 1.0 + 1e-6;
        }
        self.step = 0;
    }

    pub fn degree(&self) -> usize {
        self.fixed.len()
    }

    /// Current term, then advance to the next index.
    #[inline]
    pub fn next_term(&mut self) -> Complex64 {
        let out = self.rot[0];
        let d = self.diffs.len() - 1;
        for k in 0..d {
            self.diffs[k] = self.diffs[k].wrapping_add(self.diffs[k + 1]);
            self.rot[k] = self.rot[k] * self.rot[k + 1];
        }
        self.step += 1;
        if self.step == self.block {
            self.resync();
        }
        out
    }
}

fn check_args(x: &TorusPoint, n: u64) -> Result<()> {
    if n == 0 {
        return Err(LabError::invalid("sum length N must be >= 1"));
    }
    if n > MAX_SUM_LENGTH {
        return Err(LabError::CapacityExceeded(format!(
            "sum length {n} exceeds {MAX_SUM_LENGTH}"
        )));
    }
    if x.dim() < 2 {
        return Err(LabError::UnsupportedDimension(format!("d = {} < 2", x.dim())));
    }
    Ok(())
}

/// `S_{a,d}(x; N)`.
pub fn weyl_sum(x: &TorusPoint, n: u64, w: &WeightSequence, method: Method) -> Result<SumResult> {
    check_args(x, n)?;
    let mut acc = ComplexNeumaier::new();
    let unit = w.is_unit();
    match method {
        Method::Direct => {
            for k in 1..=n {
                let t = e_fixed(x.phase_fixed(k));
                acc.add(if unit { t } else { w.eval(n, k) * t });
            }
        }
        Method::Incremental => {
            let mut ker = IncrementalKernel::new(x);
            for k in 1..=n {
                let t = ker.next_term();
                acc.add(if unit { t } else { w.eval(n, k) * t });
            }
        }
    }
    let per_term = match method {
        Method::Direct => direct_term_error(),
        Method::Incremental => incremental_term_error(x.dim()),
    };
    Ok(SumResult {
        value: acc.value(),
        n,
        method,
        phase_error_budget: per_term * w.l1_norm(n),
    })
}

/// Prefix sums `sum_{n<=M} a(N,n) e(...)` for `M = 1..=N`, in one pass of the
/// incremental kernel. For weights that do not depend on `N` entry `M - 1`
/// equals `weyl_sum(x, M, w, Incremental)` exactly.
pub fn weyl_prefixes(x: &TorusPoint, n: u64, w: &WeightSequence) -> Result<Vec<Complex64>> {
    check_args(x, n)?;
    let unit = w.is_unit();
    let mut ker = IncrementalKernel::new(x);
    let mut acc = ComplexNeumaier::new();
    let mut out = Vec::with_capacity(n as usize);
    for k in 1..=n {
        let t = ker.next_term();
        acc.add(if unit { t } else { w.eval(n, k) * t });
        out.push(acc.value());
    }
    Ok(out)
}

/// `max_{M<=N} |S(x; M)|` via [`weyl_prefixes`].
pub fn max_prefix_modulus(x: &TorusPoint, n: u64, w: &WeightSequence) -> Result<f64> {
    Ok(weyl_prefixes(x, n, w)?
        .into_iter()
        .map(|z| z.norm())
        .fold(0.0, f64::max))
}

/// `|S(x; N)|` for many points, evaluated in parallel.
pub fn weyl_sums_batch(
    points: &[TorusPoint],
    n: u64,
    w: &WeightSequence,
    method: Method,
) -> Result<Vec<Complex64>> {
    points
        .par_iter()
        .map(|x| weyl_sum(x, n, w, method).map(|r| r.value))
        .collect()
}

/// Reusable evaluator of the completion sum
/// `W(x; N) = sum_{|h|<=N} |sum_n a(N,n) e(hn/N + P(n))| / (|h| + 1)`.
///
/// The inner sums depend on `h` only through `h mod N` (up to a unimodular
/// factor), so all of them come from one length-`N` FFT.
pub struct CompletionEvaluator {
    n: u64,
    fft: Arc<dyn Fft<f64>>,
    buf: Vec<Complex64>,
    scratch: Vec<Complex64>,
    harmonic: Vec<f64>,
}

impl CompletionEvaluator {
    pub fn new(n: u64) -> Result<Self> {
        if n == 0 {
            return Err(LabError::invalid("sum length N must be >= 1"));
        }
        if n > MAX_SUM_LENGTH {
            return Err(LabError::CapacityExceeded(format!(
                "sum length {n} exceeds {MAX_SUM_LENGTH}"
            )));
        }
        let len = n as usize;
        let fft = FftPlanner::new().plan_fft_inverse(len);
        let scratch = vec![Complex64::default(); fft.get_inplace_scratch_len()];
        // Weight of residue class r: sum of 1/(|h|+1) over h in [-N, N], h = r mod N.
        let mut harmonic = vec![0.0; len];
        for h in -(n as i64)..=(n as i64) {
            let r = h.rem_euclid(n as i64) as usize;
            harmonic[r] += 1.0 / (h.unsigned_abs() as f64 + 1.0);
        }
        Ok(Self {
            n,
            fft,
            buf: vec![Complex64::default(); len],
            scratch,
            harmonic,
        })
    }

    pub fn len(&self) -> u64 {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    /// `W` together with `max_h |inner sum|`.
    pub fn evaluate(&mut self, x: &TorusPoint, w: &WeightSequence) -> Result<(f64, f64)> {
        check_args(x, self.n)?;
        let unit = w.is_unit();
        let mut ker = IncrementalKernel::new(x);
        for k in 1..=self.n {
            let t = ker.next_term();
            self.buf[(k - 1) as usize] = if unit { t } else { w.eval(self.n, k) * t };
        }
        Ok(self.finish())
    }

    /// `W` for explicitly supplied terms `b_n = a(N,n) e(P(n))`, `n = 1..=N`.
    pub fn evaluate_terms(&mut self, terms: &[Complex64]) -> Result<(f64, f64)> {
        if terms.len() as u64 != self.n {
            return Err(LabError::invalid(format!(
                "expected {} terms, got {}",
                self.n,
                terms.len()
            )));
        }
        self.buf.copy_from_slice(terms);
        Ok(self.finish())
    }

    fn finish(&mut self) -> (f64, f64) {
        self.fft.process_with_scratch(&mut self.buf, &mut self.scratch);
        let mut total = 0.0;
        let mut peak: f64 = 0.0;
        for (z, wt) in self.buf.iter().zip(&self.harmonic) {
            let m = z.norm();
            total += wt * m;
            peak = peak.max(m);
        }
        (total, peak)
    }
}

/// `W_{a,d}(x; N)`.
pub fn completion_sum(x: &TorusPoint, n: u64, w: &WeightSequence) -> Result<f64> {
    let mut ev = CompletionEvaluator::new(n)?;
    Ok(ev.evaluate(x, w)?.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::Stream;

    fn random_point(s: &mut Stream, d: usize) -> TorusPoint {
        TorusPoint::new((0..d).map(|_| s.uniform()).collect::<Vec<_>>()).unwrap()
    }

    /// Completion sum straight from its definition, `O(N^2)` with fresh trig.
    fn completion_oracle(x: &TorusPoint, n: u64, w: &WeightSequence) -> f64 {
        let mut total = 0.0;
        for h in -(n as i64)..=(n as i64) {
            let mut inner = Complex64::default();
            for k in 1..=n {
                let p = crate::torus::phase(x, k).unwrap();
                let theta = (h as f64) * (k as f64) / (n as f64) + p;
                inner += w.eval(n, k) * crate::torus::e(theta);
            }
            total += inner.norm() / (h.unsigned_abs() as f64 + 1.0);
        }
        total
    }

    #[test]
    fn zero_point_sums_to_n() {
        let x = TorusPoint::zero(3).unwrap();
        for n in [1u64, 2, 17, 1000] {
            for m in [Method::Direct, Method::Incremental] {
                let r = weyl_sum(&x, n, &WeightSequence::unit(), m).unwrap();
                assert!((r.value - Complex64::new(n as f64, 0.0)).norm() < 1e-9);
            }
        }
    }

    #[test]
    fn hand_examples() {
        let w = WeightSequence::unit();
        let x = TorusPoint::new(vec![0.5, 0.5]).unwrap();
        let r = weyl_sum(&x, 2, &w, Method::Direct).unwrap();
        assert!((r.value - Complex64::new(2.0, 0.0)).norm() < 1e-14);
        let x = TorusPoint::new(vec![0.5, 0.0]).unwrap();
        for m in [Method::Direct, Method::Incremental] {
            let r = weyl_sum(&x, 3, &w, m).unwrap();
            assert!((r.value - Complex64::new(-1.0, 0.0)).norm() < 1e-14);
        }
    }

    #[test]
    fn rejects_zero_length() {
        let x = TorusPoint::zero(2).unwrap();
        assert!(weyl_sum(&x, 0, &WeightSequence::unit(), Method::Direct).is_err());
        assert!(weyl_prefixes(&x, 0, &WeightSequence::unit()).is_err());
        assert!(completion_sum(&x, 0, &WeightSequence::unit()).is_err());
    }

    #[test]
    fn prefixes_examples() {
        let w = WeightSequence::unit();
        let x = TorusPoint::new(vec![0.5, 0.0]).unwrap();
        let p = weyl_prefixes(&x, 3, &w).unwrap();
        let expect = [-1.0, 0.0, -1.0];
        for (z, e) in p.iter().zip(expect) {
            assert!((z - Complex64::new(e, 0.0)).norm() < 1e-14);
        }
        let p = weyl_prefixes(&TorusPoint::zero(2).unwrap(), 3, &w).unwrap();
        for (i, z) in p.iter().enumerate() {
            assert!((z - Complex64::new((i + 1) as f64, 0.0)).norm() < 1e-14);
        }
    }

    #[test]
    fn prefixes_match_shorter_sums_bitwise() {
        let mut s = Stream::new(11);
        let w = WeightSequence::unit();
        for d in 2..=4 {
            let x = random_point(&mut s, d);
            let p = weyl_prefixes(&x, 700, &w).unwrap();
            for m in [1u64, 63, 64, 65, 311, 700] {
                let r = weyl_sum(&x, m, &w, Method::Incremental).unwrap();
                assert_eq!(p[(m - 1) as usize], r.value);
            }
        }
    }

    #[test]
    fn block_lengths() {
        assert_eq!(block_length(2), 512);
        assert_eq!(block_length(3), 64);
        assert_eq!(block_length(4), 32);
        assert_eq!(block_length(5), 32);
        for d in 2..10 {
            assert!(binomial(block_length(d), d) <= DRIFT_GROWTH_CAP || block_length(d) == 8);
        }
    }

    #[test]
    fn direct_and_incremental_agree_weighted() {
        let mut s = Stream::new(3);
        let w = WeightSequence::log_power(2.0).unwrap();
        for d in 2..=5 {
            for _ in 0..20 {
                let x = random_point(&mut s, d);
                let a = weyl_sum(&x, 5000, &w, Method::Direct).unwrap();
                let b = weyl_sum(&x, 5000, &w, Method::Incremental).unwrap();
                let scale = a.value.norm().max(w.l2_norm_sq(5000).sqrt());
                assert!((a.value - b.value).norm() <= 1e-9 * scale);
                assert!(b.phase_error_budget <= 1e-9 * w.l1_norm(5000));
            }
        }
    }

    #[test]
    fn conjugation_symmetry() {
        let mut s = Stream::new(5);
        for d in 2..=4 {
            let x = random_point(&mut s, d);
            let y = x.negated();
            for m in [Method::Direct, Method::Incremental] {
                let a = weyl_sum(&x, 3000, &WeightSequence::unit(), m).unwrap().value;
                let b = weyl_sum(&y, 3000, &WeightSequence::unit(), m).unwrap().value;
                assert!((a - b.conj()).norm() < 1e-9 * 3000f64.sqrt());
            }
        }
    }

    #[test]
    fn completion_examples() {
        let w = WeightSequence::unit();
        let z = TorusPoint::zero(2).unwrap();
        assert!((completion_sum(&z, 1, &w).unwrap() - 2.0).abs() < 1e-13);
        assert!((completion_sum(&z, 2, &w).unwrap() - 10.0 / 3.0).abs() < 1e-13);
    }

    #[test]
    fn completion_matches_definition() {
        let mut s = Stream::new(9);
        let weights = [WeightSequence::unit(), WeightSequence::alternating(), WeightSequence::log_power(1.0).unwrap()];
        for w in &weights {
            for n in [1u64, 2, 7, 30, 64] {
                let x = random_point(&mut s, 3);
                let fast = completion_sum(&x, n, w).unwrap();
                let slow = completion_oracle(&x, n, w);
                assert!((fast - slow).abs() < 1e-9 * slow.max(1.0), "N={n}: {fast} vs {slow}");
            }
        }
    }

    #[test]
    fn completion_dominates_sum_and_is_bounded() {
        let mut s = Stream::new(21);
        let w = WeightSequence::unit();
        for _ in 0..100 {
            let x = random_point(&mut s, 2);
            let n = 1 + (s.next_u64_raw() % 300);
            let mut ev = CompletionEvaluator::new(n).unwrap();
            let (big_w, peak) = ev.evaluate(&x, &w).unwrap();
            let sum = weyl_sum(&x, n, &w, Method::Direct).unwrap().value.norm();
            assert!(big_w >= sum - 1e-9);
            assert!(big_w <= (2.0 * ((n + 1) as f64).ln() + 1.0) * peak + 1e-9);
        }
    }

    #[test]
    fn corrupted_kernel_breaks_agreement() {
        // The global hook is left alone so concurrently running tests are unaffected.
        let mut s = Stream::new(1);
        let x = random_point(&mut s, 3);
        let a = weyl_sum(&x, 2000, &WeightSequence::unit(), Method::Direct).unwrap().value;
        let mut ker = IncrementalKernel::new(&x);
        ker.corrupt = true;
        ker.resync();
        let mut acc = ComplexNeumaier::new();
        for _ in 0..2000 {
            acc.add(ker.next_term());
        }
        let b = acc.value();
        assert!((a - b).norm() > 1e-9 * a.norm().max(2000f64.sqrt()));
    }
}
