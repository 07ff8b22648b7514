//! Exact counts of solutions to Vinogradov systems
//! `sum_{j<=s} n_j^i - sum_{j>s} n_j^i = xi_i`, `1 <= i <= d`, with optional
//! weights `prod a_{n_j} prod conj(a_{n_j})`.
//!
//! Counting is meet-in-the-middle: the `s`-fold sums of power vectors are
//! tabulated once and the two halves are correlated at offset `xi`.

use crate::error::{LabError, Result};
use crate::weights::WeightSequence;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use smallvec::SmallVec;
use std::collections::{BTreeMap, HashMap};

pub type Key = SmallVec<[i64; 4]>;

/// Largest number of `s`-tuples per side.
pub const TUPLE_CAP: u64 = 1 << 24;
/// Largest number of key pairs visited by [`count_table`].
pub const PAIR_CAP: u64 = 1 << 32;

/// `(n, n^2, ..., n^d)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PowerVector {
    pub n: u64,
    pub powers: Key,
}

impl PowerVector {
    pub fn new(n: u64, d: u32) -> Result<Self> {
        let base = i64::try_from(n).map_err(|_| LabError::Overflow(format!("n = {n} exceeds 2^63")))?;
        let mut powers = Key::with_capacity(d as usize);
        let mut p: i64 = 1;
        for _ in 0..d {
            p = p
                .checked_mul(base)
                .ok_or_else(|| LabError::Overflow(format!("{n}^{d} exceeds 2^63")))?;
            powers.push(p);
        }
        Ok(Self { n, powers })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum CountValue {
    Exact(u128),
    Weighted(Complex64),
}

impl CountValue {
    pub fn as_complex(&self) -> Complex64 {
        match *self {
            CountValue::Exact(c) => Complex64::new(c as f64, 0.0),
            CountValue::Weighted(z) => z,
        }
    }

    pub fn exact(&self) -> Option<u128> {
        match *self {
            CountValue::Exact(c) => Some(c),
            CountValue::Weighted(_) => None,
        }
    }
}

impl std::fmt::Display for CountValue {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CountValue::Exact(c) => write!(f, "{c}"),
            CountValue::Weighted(z) => write!(f, "{:?}{:+?}i", z.re, z.im),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CountResult {
    pub xi: Vec<i64>,
    pub count: CountValue,
    pub s: u32,
    #[serde(rename = "N")]
    pub n: u64,
    pub d: u32,
}

/// The box `|xi_i| <= s N^i` outside which every count vanishes.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LatticeBox {
    pub d: u32,
    #[serde(rename = "N")]
    pub n: u64,
    pub half_widths: Vec<i64>,
}

impl LatticeBox {
    pub fn new(d: u32, s: u32, n: u64) -> Result<Self> {
        let pv = PowerVector::new(n, d)?;
        let half_widths = pv
            .powers
            .iter()
            .map(|p| {
                p.checked_mul(i64::from(s))
                    .ok_or_else(|| LabError::Overflow(format!("{s} N^{d} exceeds 2^63")))
            })
            .collect::<Result<_>>()?;
        Ok(Self { d, n, half_widths })
    }

    pub fn contains(&self, xi: &[i64]) -> bool {
        xi.len() == self.half_widths.len() && xi.iter().zip(&self.half_widths).all(|(x, h)| x.abs() <= *h)
    }

    /// Number of lattice points, saturating.
    pub fn size(&self) -> u128 {
        self.half_widths
            .iter()
            .fold(1u128, |acc, h| acc.saturating_mul(2 * *h as u128 + 1))
    }
}

/// Sums of `s` power vectors with their multiplicities (or weight products),
/// sorted by key.
enum HalfTable {
    Exact(Vec<(Key, u64)>),
    Weighted(Vec<(Key, Complex64)>),
}

fn check_args(d: u32, s: u32, n: u64) -> Result<()> {
    if d < 2 {
        return Err(LabError::invalid(format!("d must be >= 2, got {d}")));
    }
    if s < 1 {
        return Err(LabError::invalid("s must be >= 1"));
    }
    if n < 1 {
        return Err(LabError::invalid("N must be >= 1"));
    }
    let tuples = (n as f64).powi(s as i32);
    if tuples > TUPLE_CAP as f64 {
        return Err(LabError::CapacityExceeded(format!(
            "N^s = {n}^{s} tuples per side exceeds 2^24"
        )));
    }
    // Every component of an s-fold sum must fit in 64 bits.
    LatticeBox::new(d, s, n)?;
    Ok(())
}

fn add_keys(a: &Key, b: &Key) -> Key {
    a.iter().zip(b).map(|(x, y)| x + y).collect()
}

fn sorted<V>(map: HashMap<Key, V>) -> Vec<(Key, V)> {
    let mut v: Vec<(Key, V)> = map.into_iter().collect();
    v.sort_unstable_by(|a, b| a.0.cmp(&b.0));
    v
}

/// Iterated convolution `A_{k+1} = A_k * A_1`; every intermediate table is
/// walked in key order so floating-point weights are accumulated
/// deterministically.
fn half_table(d: u32, s: u32, n: u64, w: &WeightSequence, force_weighted: bool) -> Result<HalfTable> {
    let singles: Vec<Key> = (1..=n).map(|k| PowerVector::new(k, d).map(|p| p.powers)).collect::<Result<_>>()?;
    if w.is_unit() && !force_weighted {
        let mut table: Vec<(Key, u64)> = singles.iter().map(|k| (k.clone(), 1)).collect();
        for _ in 1..s {
            let mut next: HashMap<Key, u64> = HashMap::with_capacity(table.len() * 4);
            for (k, c) in &table {
                for p in &singles {
                    *next.entry(add_keys(k, p)).or_insert(0) += c;
                }
            }
            table = sorted(next);
        }
        Ok(HalfTable::Exact(table))
    } else {
        let coeffs: Vec<Complex64> = (1..=n).map(|k| w.eval(n, k)).collect();
        let mut table: Vec<(Key, Complex64)> = singles.iter().cloned().zip(coeffs.iter().copied()).collect();
        for _ in 1..s {
            let mut next: HashMap<Key, Complex64> = HashMap::with_capacity(table.len() * 4);
            for (k, c) in &table {
                for (p, a) in singles.iter().zip(&coeffs) {
                    *next.entry(add_keys(k, p)).or_default() += c * a;
                }
            }
            table = sorted(next);
        }
        Ok(HalfTable::Weighted(table))
    }
}

fn count_from_table(table: &HalfTable, xi: &[i64]) -> CountValue {
    // count(xi) = sum_k A(k) conj(A(k - xi)).
    match table {
        HalfTable::Exact(t) => {
            let index: HashMap<&Key, u64> = t.iter().map(|(k, c)| (k, *c)).collect();
            let mut total: u128 = 0;
            for (k, c) in t {
                let shifted: Key = k.iter().zip(xi).map(|(a, b)| a - b).collect();
                if let Some(c2) = index.get(&shifted) {
                    total += u128::from(*c) * u128::from(*c2);
                }
            }
            CountValue::Exact(total)
        }
        HalfTable::Weighted(t) => {
            let index: HashMap<&Key, Complex64> = t.iter().map(|(k, c)| (k, *c)).collect();
            let mut total = Complex64::default();
            for (k, c) in t {
                let shifted: Key = k.iter().zip(xi).map(|(a, b)| a - b).collect();
                if let Some(c2) = index.get(&shifted) {
                    total += c * c2.conj();
                }
            }
            CountValue::Weighted(total)
        }
    }
}

fn check_xi(d: u32, xi: &[i64]) -> Result<()> {
    if xi.len() != d as usize {
        return Err(LabError::invalid(format!("xi has {} components, expected d = {d}", xi.len())));
    }
    Ok(())
}

/// Weighted number of solutions at frequency `xi`. Unit weights give an
/// exact integer.
pub fn count(d: u32, s: u32, n: u64, xi: &[i64], w: &WeightSequence) -> Result<CountResult> {
    count_with(d, s, n, xi, w, false)
}

/// As [`count`], but always accumulates in complex arithmetic.
pub fn count_weighted(d: u32, s: u32, n: u64, xi: &[i64], w: &WeightSequence) -> Result<CountResult> {
    count_with(d, s, n, xi, w, true)
}

fn count_with(d: u32, s: u32, n: u64, xi: &[i64], w: &WeightSequence, force_weighted: bool) -> Result<CountResult> {
    check_args(d, s, n)?;
    check_xi(d, xi)?;
    let table = half_table(d, s, n, w, force_weighted)?;
    Ok(CountResult {
        xi: xi.to_vec(),
        count: count_from_table(&table, xi),
        s,
        n,
        d,
    })
}

/// Every nonzero count, keyed by `xi` in lexicographic order. All keys lie in
/// the lattice box `|xi_i| <= s N^i`.
pub fn count_table(d: u32, s: u32, n: u64, w: &WeightSequence) -> Result<BTreeMap<Vec<i64>, CountResult>> {
    check_args(d, s, n)?;
    let table = half_table(d, s, n, w, false)?;
    let len = match &table {
        HalfTable::Exact(t) => t.len(),
        HalfTable::Weighted(t) => t.len(),
    } as u64;
    if len.saturating_mul(len) > PAIR_CAP {
        return Err(LabError::CapacityExceeded(format!(
            "{len} distinct half sums give more than 2^32 pairs"
        )));
    }
    let mut out: BTreeMap<Vec<i64>, CountValue> = BTreeMap::new();
    match &table {
        HalfTable::Exact(t) => {
            for (k1, c1) in t {
                for (k2, c2) in t {
                    let xi: Vec<i64> = k1.iter().zip(k2).map(|(a, b)| a - b).collect();
                    let e = out.entry(xi).or_insert(CountValue::Exact(0));
                    if let CountValue::Exact(v) = e {
                        *v += u128::from(*c1) * u128::from(*c2);
                    }
                }
            }
        }
        HalfTable::Weighted(t) => {
            for (k1, c1) in t {
                for (k2, c2) in t {
                    let xi: Vec<i64> = k1.iter().zip(k2).map(|(a, b)| a - b).collect();
                    let e = out.entry(xi).or_insert(CountValue::Weighted(Complex64::default()));
                    if let CountValue::Weighted(v) = e {
                        *v += c1 * c2.conj();
                    }
                }
            }
        }
    }
    Ok(out
        .into_iter()
        .map(|(xi, count)| {
            let r = CountResult {
                xi: xi.clone(),
                count,
                s,
                n,
                d,
            };
            (xi, r)
        })
        .collect())
}

/// `J_N(0)` at `s = d(d+1)/2`, for `d = 2` and `N <= 256`.
pub fn critical_count(d: u32, n: u64) -> Result<u128> {
    if d != 2 {
        return Err(LabError::UnsupportedDimension(format!(
            "critical counts are limited to d = 2, got d = {d}"
        )));
    }
    if n > 256 {
        return Err(LabError::CapacityExceeded(format!("critical counts support N <= 256, got {n}")));
    }
    let s = d * (d + 1) / 2;
    let r = count(d, s, n, &vec![0; d as usize], &WeightSequence::unit())?;
    Ok(r.count.exact().expect("unit weights count exactly"))
}

/// Unit-weight table by direct enumeration of all `N^{2s}` tuples.
pub fn count_table_naive(d: u32, s: u32, n: u64) -> Result<BTreeMap<Vec<i64>, u128>> {
    check_args(d, s, n)?;
    if (n as f64).powi(2 * s as i32) > (1u64 << 30) as f64 {
        return Err(LabError::CapacityExceeded(format!("{n}^{} tuples", 2 * s)));
    }
    let singles: Vec<Key> = (1..=n).map(|k| PowerVector::new(k, d).map(|p| p.powers)).collect::<Result<_>>()?;
    let len = 2 * s as usize;
    let mut idx = vec![0usize; len];
    let mut out = BTreeMap::new();
    loop {
        let xi: Vec<i64> = (0..d as usize)
            .map(|i| {
                let lhs: i64 = idx[..s as usize].iter().map(|&j| singles[j][i]).sum();
                let rhs: i64 = idx[s as usize..].iter().map(|&j| singles[j][i]).sum();
                lhs - rhs
            })
            .collect();
        *out.entry(xi).or_insert(0u128) += 1;
        let mut pos = 0;
        loop {
            if pos == len {
                return Ok(out);
            }
            idx[pos] += 1;
            if idx[pos] < n as usize {
                break;
            }
            idx[pos] = 0;
            pos += 1;
        }
    }
}

/// Direct enumeration of all `N^{2s}` tuples.
pub fn count_naive(d: u32, s: u32, n: u64, xi: &[i64], w: &WeightSequence) -> Result<CountValue> {
    check_args(d, s, n)?;
    check_xi(d, xi)?;
    let total = (n as f64).powi(2 * s as i32);
    if total > (1u64 << 30) as f64 {
        return Err(LabError::CapacityExceeded(format!("{n}^{} tuples", 2 * s)));
    }
    let singles: Vec<Key> = (1..=n).map(|k| PowerVector::new(k, d).map(|p| p.powers)).collect::<Result<_>>()?;
    let coeffs: Vec<Complex64> = (1..=n).map(|k| w.eval(n, k)).collect();
    let len = 2 * s as usize;
    let mut idx = vec![0usize; len];
    let mut exact: u128 = 0;
    let mut weighted = Complex64::default();
    loop {
        let hit = (0..d as usize).all(|i| {
            let lhs: i64 = idx[..s as usize].iter().map(|&j| singles[j][i]).sum();
            let rhs: i64 = idx[s as usize..].iter().map(|&j| singles[j][i]).sum();
            lhs - rhs == xi[i]
        });
        if hit {
            exact += 1;
            let mut z = Complex64::new(1.0, 0.0);
            for (pos, &j) in idx.iter().enumerate() {
                z *= if pos < s as usize { coeffs[j] } else { coeffs[j].conj() };
            }
            weighted += z;
        }
        let mut pos = 0;
        loop {
            if pos == len {
                return Ok(if w.is_unit() {
                    CountValue::Exact(exact)
                } else {
                    CountValue::Weighted(weighted)
                });
            }
            idx[pos] += 1;
            if idx[pos] < n as usize {
                break;
            }
            idx[pos] = 0;
            pos += 1;
        }
    }
}
