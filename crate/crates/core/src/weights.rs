//! Coefficient sequences `a(N, n)` for weighted Weyl sums.
//!
//! Single sequences `a_n` and double sequences `a(N, n)` share one type. The
//! growth condition "`a_n = n^{o(1)}`" is made checkable as the envelope
//! `|a(N, n)| <= (1 + ln N)^B` with a declared exponent `B` (`bound_log`).

use crate::error::{LabError, Result};
use num_complex::Complex64;
use std::fmt;
use std::sync::Arc;

type WeightFn = dyn Fn(u64, u64) -> Complex64 + Send + Sync;

#[derive(Clone)]
pub enum WeightKind {
    Unit,
    /// `a_n = table[n - 1]`, independent of `N`; zero past the table end.
    Table(Arc<[Complex64]>),
    Generator(Arc<WeightFn>),
}

#[derive(Clone)]
pub struct WeightSequence {
    kind: WeightKind,
    bound_log: f64,
    label: String,
}

impl fmt::Debug for WeightSequence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("WeightSequence")
            .field("label", &self.label)
            .field("bound_log", &self.bound_log)
            .finish()
    }
}

impl Default for WeightSequence {
    fn default() -> Self {
        Self::unit()
    }
}

impl WeightSequence {
    pub fn unit() -> Self {
        Self {
            kind: WeightKind::Unit,
            bound_log: 0.0,
            label: "unit".into(),
        }
    }

    pub fn table(values: Vec<Complex64>, bound_log: f64) -> Result<Self> {
        check_bound_log(bound_log)?;
        Ok(Self {
            kind: WeightKind::Table(values.into()),
            bound_log,
            label: "table".into(),
        })
    }

    /// Double sequence `a(N, n)` given by a closure.
    pub fn generator<F>(label: &str, bound_log: f64, f: F) -> Result<Self>
    where
        F: Fn(u64, u64) -> Complex64 + Send + Sync + 'static,
    {
        check_bound_log(bound_log)?;
        Ok(Self {
            kind: WeightKind::Generator(Arc::new(f)),
            bound_log,
            label: label.into(),
        })
    }

    /// `a_n = (-1)^n`.
    pub fn alternating() -> Self {
        Self {
            kind: WeightKind::Generator(Arc::new(|_, n| {
                Complex64::new(if n % 2 == 0 { 1.0 } else { -1.0 }, 0.0)
            })),
            bound_log: 0.0,
            label: "alternating".into(),
        }
    }

    /// `a_n = (1 + ln n)^p`, inside the envelope with `B = p`.
    pub fn log_power(p: f64) -> Result<Self> {
        check_bound_log(p)?;
        Ok(Self {
            kind: WeightKind::Generator(Arc::new(move |_, n| {
                Complex64::new((1.0 + (n as f64).ln()).powf(p), 0.0)
            })),
            bound_log: p,
            label: format!("log_power({p})"),
        })
    }

    /// The constant sequence `a_n = c`, declared with exponent `bound_log`.
    /// Constants above one break the envelope for small `N`; see
    /// [`WeightSequence::check_envelope`].
    pub fn constant(c: Complex64, bound_log: f64) -> Result<Self> {
        check_bound_log(bound_log)?;
        Ok(Self {
            kind: WeightKind::Generator(Arc::new(move |_, _| c)),
            bound_log,
            label: format!("constant({c})"),
        })
    }

    pub fn kind(&self) -> &WeightKind {
        &self.kind
    }

    pub fn is_unit(&self) -> bool {
        matches!(self.kind, WeightKind::Unit)
    }

    pub fn bound_log(&self) -> f64 {
        self.bound_log
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    /// Whether `a(N, n)` ignores `N`, so that prefix sums of the length-`N`
    /// sum coincide with shorter sums.
    pub fn is_single(&self) -> bool {
        matches!(self.kind, WeightKind::Unit | WeightKind::Table(_))
    }

    #[inline]
    pub fn eval(&self, big_n: u64, n: u64) -> Complex64 {
        match &self.kind {
            WeightKind::Unit => Complex64::new(1.0, 0.0),
            WeightKind::Table(t) => t.get((n - 1) as usize).copied().unwrap_or_default(),
            WeightKind::Generator(f) => f(big_n, n),
        }
    }

    /// `(1 + ln N)^B`.
    pub fn envelope(&self, big_n: u64) -> f64 {
        (1.0 + (big_n.max(1) as f64).ln()).powf(self.bound_log)
    }

    /// `sum_{n <= N} |a(N, n)|`, the trivial bound for the Weyl sum.
    pub fn l1_norm(&self, big_n: u64) -> f64 {
        if self.is_unit() {
            return big_n as f64;
        }
        (1..=big_n).map(|n| self.eval(big_n, n).norm()).sum()
    }

    /// `sum_{n <= N} |a(N, n)|^2`.
    pub fn l2_norm_sq(&self, big_n: u64) -> f64 {
        if self.is_unit() {
            return big_n as f64;
        }
        (1..=big_n).map(|n| self.eval(big_n, n).norm_sqr()).sum()
    }

    /// Check `|a(N, n)| <= (1 + ln N)^B` for every `n <= N`.
    pub fn check_envelope(&self, big_n: u64) -> Result<()> {
        let env = self.envelope(big_n) * (1.0 + 1e-12);
        for n in 1..=big_n {
            let v = self.eval(big_n, n).norm();
            if v > env {
                return Err(LabError::invalid(format!(
                    "weight {} violates |a(N,n)| <= (1+ln N)^{}: |a({big_n},{n})| = {v}",
                    self.label, self.bound_log
                )));
            }
        }
        Ok(())
    }
}

fn check_bound_log(b: f64) -> Result<()> {
    if !(b.is_finite() && b >= 0.0) {
        return Err(LabError::invalid(format!("bound_log must be finite and >= 0, got {b}")));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unit_is_one() {
        let w = WeightSequence::unit();
        for n in 1..50 {
            assert_eq!(w.eval(49, n), Complex64::new(1.0, 0.0));
        }
        w.check_envelope(1000).unwrap();
    }

    #[test]
    fn log_power_respects_envelope() {
        for p in [0.5, 1.0, 3.0] {
            WeightSequence::log_power(p).unwrap().check_envelope(5000).unwrap();
        }
    }

    #[test]
    fn constant_two_breaks_zero_envelope() {
        let w = WeightSequence::constant(Complex64::new(2.0, 0.0), 0.0).unwrap();
        assert!(w.check_envelope(100).is_err());
    }

    #[test]
    fn table_reads_past_end_as_zero() {
        let w = WeightSequence::table(vec![Complex64::new(1.0, 1.0)], 1.0).unwrap();
        assert_eq!(w.eval(5, 1), Complex64::new(1.0, 1.0));
        assert_eq!(w.eval(5, 2), Complex64::default());
    }

    #[test]
    fn negative_bound_rejected() {
        assert!(WeightSequence::log_power(-1.0).is_err());
    }
}
