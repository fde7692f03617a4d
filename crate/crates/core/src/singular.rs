//! Singular series, residue occupancy, Δ products, Mertens products and
//! primorials.
//!
//! The singular series of a finite set `S` with `n = |S|` elements is
//!
//! ```text
//! 𝔖(S) = Π_p (1 - 1/p)^{-n} (1 - v_S(p)/p)
//! ```
//!
//! where `v_S(p)` is the number of residue classes mod `p` that `S` occupies.
//! For every prime not dividing a pairwise difference of `S`, `v_S(p) = n`
//! and the factor takes a generic form `g_n(p)` with
//! `0 <= -log g_n(p) <= n²/p²` once `p >= 2n`. The product is evaluated in
//! the log domain with compensated summation: exact factors up to a
//! truncation point `L`, explicit corrections for primes above `L` that
//! divide a difference, and a certified bound for the generic tail.

use std::collections::BTreeSet;
use std::sync::{Arc, RwLock};

use num_bigint::BigUint;
use num_traits::{FromPrimitive, One};
use serde::{Serialize, Serializer};

use crate::counting::DifferenceSet;
use crate::error::{Error, Result};
use crate::numeric::{distinct_prime_factors, is_prime_trial, CompensatedSum};
use crate::sieve::PrimeTable;

/// Euler–Mascheroni constant.
pub const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

/// Default cap on the truncation point of the singular series.
pub const DEFAULT_FACTOR_BUDGET: u64 = 400_000_000;

static PRIME_CACHE: RwLock<Option<Arc<PrimeTable>>> = RwLock::new(None);

/// A shared table covering at least `[2, bound]`, grown on demand.
pub(crate) fn shared_primes(bound: u64) -> Result<Arc<PrimeTable>> {
    let bound = bound.max(2);
    if let Some(t) = PRIME_CACHE.read().expect("prime cache poisoned").as_ref() {
        if t.bound() >= bound {
            return Ok(Arc::clone(t));
        }
    }
    let mut guard = PRIME_CACHE.write().expect("prime cache poisoned");
    if let Some(t) = guard.as_ref() {
        if t.bound() >= bound {
            return Ok(Arc::clone(t));
        }
    }
    // Grow geometrically so repeated slightly larger requests stay cheap.
    let previous = guard.as_ref().map_or(0, |t| t.bound());
    let target = bound
        .max(previous.saturating_mul(2))
        .min(crate::sieve::MAX_BOUND.max(bound));
    let table = Arc::new(PrimeTable::build(target)?);
    *guard = Some(Arc::clone(&table));
    Ok(table)
}

/// `v_S(p)`: the number of distinct residues of `set` modulo the prime `p`.
pub fn residue_count(set: &[u64], p: u64) -> Result<u64> {
    if !is_prime_trial(p) {
        return Err(Error::Domain(format!("{p} is not prime")));
    }
    if set.is_empty() {
        return Err(Error::Domain("residue count of an empty set".into()));
    }
    Ok(occupied_classes(set, p))
}

fn occupied_classes(set: &[u64], p: u64) -> u64 {
    let mut residues: Vec<u64> = set.iter().map(|&d| d % p).collect();
    residues.sort_unstable();
    residues.dedup();
    residues.len() as u64
}

/// `Δ = Π_{0 <= j < i <= k} (d_i - d_j)` over `{0} ∪ D`, in arbitrary precision.
pub fn delta(d: &DifferenceSet) -> BigUint {
    let s = d.with_zero();
    let mut acc = BigUint::one();
    for i in 1..s.len() {
        for j in 0..i {
            acc *= s[i] - s[j];
        }
    }
    acc
}

/// Distinct primes dividing `Δ`, obtained from the individual differences.
pub fn delta_prime_factors(d: &DifferenceSet) -> Vec<u64> {
    pairwise_difference_primes(&d.with_zero())
}

fn pairwise_difference_primes(set: &[u64]) -> Vec<u64> {
    let mut primes = BTreeSet::new();
    for i in 0..set.len() {
        for j in 0..i {
            primes.extend(distinct_prime_factors(set[i].abs_diff(set[j])));
        }
    }
    primes.into_iter().collect()
}

/// Value of a singular series together with its truncation data.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SingularValue {
    pub value: f64,
    /// Largest prime whose factor was multiplied in exactly.
    pub truncation_prime: u64,
    /// Bound on the relative error from the omitted generic tail.
    pub tail_bound: f64,
    pub is_zero: bool,
}

/// `log g_n(p) = -n·log(1 - 1/p) + log(1 - n/p)`.
fn generic_log(n: u64, p: u64) -> f64 {
    let n_f = n as f64;
    let p_f = p as f64;
    if n_f / p_f < 1e-3 {
        // Σ_{m>=2} (n - n^m) / (m p^m); the first term dominates.
        let r = n_f / p_f;
        let mut sum = 0.0;
        let mut p_pow = 1.0 / (p_f * p_f);
        let mut r_pow = r * r;
        let mut m = 2.0;
        while r_pow > 1e-40 {
            sum += (n_f * p_pow - r_pow) / m;
            p_pow /= p_f;
            r_pow *= r;
            m += 1.0;
        }
        sum
    } else {
        -n_f * (-1.0 / p_f).ln_1p() + (-n_f / p_f).ln_1p()
    }
}

fn exact_log(n: u64, v: u64, p: u64) -> f64 {
    let p_f = p as f64;
    -(n as f64) * (-1.0 / p_f).ln_1p() + (-(v as f64) / p_f).ln_1p()
}

/// Bound on `Σ_{p > limit} |log g_n(p)|`, valid when `limit >= 2n`.
fn tail_log_bound(n: u64, limit: u64) -> f64 {
    if n <= 1 {
        return 0.0;
    }
    // Primes above `limit` are odd and start at m0 >= limit + 1:
    // Σ_{odd m >= m0} 1/m² <= 1/m0² + 1/(2·m0).
    let m0 = (limit + 1) as f64;
    let n2 = (n * n) as f64;
    n2 * (1.0 / (m0 * m0) + 0.5 / m0)
}

fn dedup_set(set: &[u64]) -> Vec<u64> {
    let mut s = set.to_vec();
    s.sort_unstable();
    s.dedup();
    s
}

/// 𝔖(S) to relative `tolerance`, with the default factor budget.
pub fn singular_series(set: &[u64], tolerance: f64) -> Result<SingularValue> {
    singular_series_with_budget(set, tolerance, DEFAULT_FACTOR_BUDGET)
}

/// 𝔖({0} ∪ D).
pub fn singular_series_of(d: &DifferenceSet, tolerance: f64) -> Result<SingularValue> {
    singular_series(&d.with_zero(), tolerance)
}

pub fn singular_series_with_budget(
    set: &[u64],
    tolerance: f64,
    budget: u64,
) -> Result<SingularValue> {
    if !(tolerance > 0.0 && tolerance < 1.0) {
        return Err(Error::Range(format!(
            "tolerance {tolerance} must lie in (0, 1)"
        )));
    }
    let s = dedup_set(set);
    if s.is_empty() {
        return Err(Error::Domain("singular series of an empty set".into()));
    }
    let n = s.len() as u64;
    let floor = 100_000u64.max(100 * n * n);
    let target = tolerance.ln_1p();
    let mut limit = floor;
    while tail_log_bound(n, limit) > target {
        // tail ≈ n²/(2·limit), so this converges in a step or two.
        let estimate = ((n * n) as f64 / (2.0 * target)).ceil() as u64;
        limit = if estimate > limit {
            estimate
        } else {
            limit + limit / 8 + 1
        };
        if limit > budget {
            let achieved = tail_log_bound(n, budget).exp_m1();
            return Err(Error::Resource {
                what: format!("singular series to tolerance {tolerance:e} (achieved {achieved:e} at truncation {budget})"),
                budget: format!("{budget}"),
            });
        }
    }
    singular_series_truncated(&s, limit)
}

/// 𝔖(S) with exact factors for every prime `p <= limit`.
///
/// `limit` must be at least `2·|S|` for the reported tail bound to hold.
pub fn singular_series_truncated(set: &[u64], limit: u64) -> Result<SingularValue> {
    let s = dedup_set(set);
    if s.is_empty() {
        return Err(Error::Domain("singular series of an empty set".into()));
    }
    let n = s.len() as u64;
    if limit < 2 * n {
        return Err(Error::Range(format!(
            "truncation {limit} must be at least 2·|S| = {}",
            2 * n
        )));
    }
    for p in (2..=n).filter(|&p| is_prime_trial(p)) {
        if occupied_classes(&s, p) == p {
            return Ok(SingularValue {
                value: 0.0,
                truncation_prime: p,
                tail_bound: 0.0,
                is_zero: true,
            });
        }
    }
    let spread = s[s.len() - 1] - s[0];
    let table = shared_primes(limit)?;
    let mut log_sum = CompensatedSum::new();
    let mut last = 2;
    for p in table.primes_up_to(limit) {
        last = p;
        if n == 1 {
            continue;
        }
        if p <= spread {
            let v = occupied_classes(&s, p);
            if v < n {
                log_sum.add(exact_log(n, v, p));
                continue;
            }
        }
        log_sum.add(generic_log(n, p));
    }
    if spread > limit {
        for p in pairwise_difference_primes(&s)
            .into_iter()
            .filter(|&p| p > limit)
        {
            let v = occupied_classes(&s, p);
            let p_f = p as f64;
            log_sum.add((-(v as f64) / p_f).ln_1p() - (-(n as f64) / p_f).ln_1p());
        }
    }
    Ok(SingularValue {
        value: log_sum.value().exp(),
        truncation_prime: last,
        tail_bound: tail_log_bound(n, limit).exp_m1(),
        is_zero: false,
    })
}

/// `Π_{p <= y} (1 - 1/p)^{-1}`.
pub fn mertens_product(y: f64) -> Result<f64> {
    if y.is_nan() || y < 2.0 {
        return Err(Error::Domain(format!(
            "Mertens product needs y >= 2, got {y}"
        )));
    }
    let limit = y.floor() as u64;
    let table = shared_primes(limit)?;
    mertens_product_in(&table, limit)
}

pub fn mertens_product_in(table: &PrimeTable, y: u64) -> Result<f64> {
    table.check_within(y)?;
    let sum: CompensatedSum = table
        .primes_up_to(y)
        .map(|p| -(-1.0 / p as f64).ln_1p())
        .collect();
    Ok(sum.value().exp())
}

/// The primorial `p_1·p_2·…·p_index`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Primorial {
    pub index: usize,
    pub value: BigUint,
}

impl Serialize for Primorial {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        use serde::ser::SerializeStruct;
        let mut st = s.serialize_struct("Primorial", 2)?;
        st.serialize_field("index", &self.index)?;
        st.serialize_field("value", &self.value.to_string())?;
        st.end()
    }
}

impl Primorial {
    pub fn to_u64(&self) -> Option<u64> {
        u64::try_from(&self.value).ok()
    }
}

fn next_prime_after(p: u64) -> u64 {
    let mut c = p + 1;
    while !is_prime_trial(c) {
        c += 1;
    }
    c
}

/// `p_n♯` for the given index (`p_0♯ = 1`).
pub fn primorial(index: usize) -> Primorial {
    let mut value = BigUint::one();
    let mut p = 1;
    for _ in 0..index {
        p = next_prime_after(p);
        value *= p;
    }
    Primorial { index, value }
}

/// `⌊x⌋♯`: the largest primorial not exceeding `x`.
pub fn primorial_floor(x: f64) -> Result<Primorial> {
    if !x.is_finite() || x < 2.0 {
        return Err(Error::Domain(format!(
            "primorial floor needs finite x >= 2, got {x}"
        )));
    }
    let cap = BigUint::from_f64(x.floor()).expect("finite nonnegative");
    let mut value = BigUint::one();
    let mut index = 0;
    let mut p = 1;
    loop {
        p = next_prime_after(p);
        let next = &value * p;
        if next > cap {
            return Ok(Primorial { index, value });
        }
        value = next;
        index += 1;
    }
}

/// Every primorial `p_n♯ <= x` with `n >= 1`, ascending.
pub fn primorials_up_to(x: u64) -> Vec<u64> {
    let mut out = Vec::new();
    let mut value = 1u64;
    let mut p = 1;
    loop {
        p = next_prime_after(p);
        match value.checked_mul(p) {
            Some(v) if v <= x => {
                value = v;
                out.push(v);
            }
            _ => return out,
        }
    }
}
