//! Exact prime-difference counts: consecutive gaps `N(x, d)` and k-tuple
//! difference counts `G_k(x, D)`.
//!
//! Everything here is integer arithmetic. `G_k(x, D)` counts primes
//! `p <= x - d_k` such that `p + d_i` is prime for every `d_i` in `D`; sets
//! with `d_k >= x` count zero.

use std::collections::BTreeMap;
use std::fmt;
use std::io::Write;
use std::str::FromStr;

use num_bigint::BigUint;
use num_integer::Integer;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{range, Error, Result};
use crate::ntt;
use crate::sieve::PrimeTable;

/// A set `D = {d_1 < d_2 < ... < d_k}` of positive differences.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "Vec<u64>", into = "Vec<u64>")]
pub struct DifferenceSet {
    elements: Vec<u64>,
}

impl DifferenceSet {
    /// Sorts the input; rejects empty input, zero and repeated elements.
    pub fn new(elements: impl Into<Vec<u64>>) -> Result<Self> {
        let mut elements = elements.into();
        if elements.is_empty() {
            return Err(range("difference set must be nonempty"));
        }
        elements.sort_unstable();
        if elements[0] == 0 {
            return Err(range("differences must be positive"));
        }
        if elements.windows(2).any(|w| w[0] == w[1]) {
            return Err(range(format!("repeated difference in {elements:?}")));
        }
        Ok(Self { elements })
    }

    pub fn elements(&self) -> &[u64] {
        &self.elements
    }

    pub fn k(&self) -> usize {
        self.elements.len()
    }

    /// The largest element `d_k`.
    pub fn largest(&self) -> u64 {
        *self.elements.last().expect("nonempty")
    }

    pub fn gcd(&self) -> u64 {
        self.elements.iter().fold(0, |g, &d| g.gcd(&d))
    }

    /// `D'` with `D = gcd · D'`.
    pub fn reduced(&self) -> Vec<u64> {
        let g = self.gcd();
        self.elements.iter().map(|d| d / g).collect()
    }

    /// `{0} ∪ D`.
    pub fn with_zero(&self) -> Vec<u64> {
        let mut v = Vec::with_capacity(self.k() + 1);
        v.push(0);
        v.extend_from_slice(&self.elements);
        v
    }

    /// Product of all pairwise differences of `{0} ∪ D`.
    pub fn delta(&self) -> BigUint {
        crate::singular::delta(self)
    }

    pub fn scaled(&self, factor: u64) -> Result<Self> {
        let elements = self
            .elements
            .iter()
            .map(|d| {
                d.checked_mul(factor)
                    .ok_or_else(|| Error::Overflow(format!("{d}·{factor}")))
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(elements)
    }
}

impl TryFrom<Vec<u64>> for DifferenceSet {
    type Error = Error;

    fn try_from(v: Vec<u64>) -> Result<Self> {
        Self::new(v)
    }
}

impl From<DifferenceSet> for Vec<u64> {
    fn from(d: DifferenceSet) -> Self {
        d.elements
    }
}

impl fmt::Display for DifferenceSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (i, d) in self.elements.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{d}")?;
        }
        write!(f, "}}")
    }
}

impl FromStr for DifferenceSet {
    type Err = Error;

    /// Parses `"2,6"`, `"{2,6}"` or `"2;6"`.
    fn from_str(s: &str) -> Result<Self> {
        let inner = s.trim().trim_start_matches('{').trim_end_matches('}');
        let elements = inner
            .split([',', ';'])
            .map(str::trim)
            .filter(|t| !t.is_empty())
            .map(|t| {
                t.parse::<u64>()
                    .map_err(|e| range(format!("bad difference {t:?}: {e}")))
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(elements)
    }
}

/// `N(x, d)` for every gap `d` occurring among consecutive primes up to `x`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct GapHistogram {
    pub bound: u64,
    pub counts: BTreeMap<u64, u64>,
    pub max_count: u64,
    pub argmax: Vec<u64>,
}

impl GapHistogram {
    pub fn get(&self, d: u64) -> u64 {
        self.counts.get(&d).copied().unwrap_or(0)
    }

    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        write_histogram_csv(w, self.counts.iter().map(|(&d, &c)| (d, c)))
    }
}

/// Writes `d,count` rows; the iterator must already be sorted by `d`.
pub fn write_histogram_csv<W: Write>(
    mut w: W,
    rows: impl IntoIterator<Item = (u64, u64)>,
) -> Result<()> {
    writeln!(w, "d,count")?;
    for (d, c) in rows {
        writeln!(w, "{d},{c}")?;
    }
    Ok(())
}

pub fn gap_histogram(table: &PrimeTable, x: u64) -> Result<GapHistogram> {
    table.check_within(x)?;
    if x < 3 {
        return Err(Error::InsufficientPrimes(format!(
            "empty gap histogram: fewer than two primes up to {x}"
        )));
    }
    let mut counts = BTreeMap::new();
    let mut primes = table.primes_up_to(x);
    let mut prev = primes.next().expect("2 <= x");
    for p in primes {
        *counts.entry(p - prev).or_insert(0u64) += 1;
        prev = p;
    }
    let max_count = counts.values().copied().max().unwrap_or(0);
    let argmax = counts
        .iter()
        .filter(|(_, &c)| c == max_count)
        .map(|(&d, _)| d)
        .collect();
    Ok(GapHistogram {
        bound: x,
        counts,
        max_count,
        argmax,
    })
}

/// How [`pair_difference_histogram`] should evaluate the counts.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PairStrategy {
    /// Pick the cheaper of the two below.
    Auto,
    /// NTT autocorrelation of the odd-prime indicator.
    Correlation,
    /// For every prime, walk the primes in the following window of width `d_max`.
    Window,
}

/// `G_1(x, {d})` for every `1 <= d <= d_max`; index 0 is always zero.
pub fn pair_difference_histogram(table: &PrimeTable, x: u64, d_max: u64) -> Result<Vec<u64>> {
    pair_difference_histogram_with(table, x, d_max, PairStrategy::Auto)
}

pub fn pair_difference_histogram_with(
    table: &PrimeTable,
    x: u64,
    d_max: u64,
    strategy: PairStrategy,
) -> Result<Vec<u64>> {
    table.check_within(x)?;
    if d_max == 0 || d_max > x {
        return Err(range(format!("d_max = {d_max} must lie in [1, x = {x}]")));
    }
    let len = usize::try_from(d_max + 1).map_err(|_| range("d_max too large"))?;
    let mut hist = vec![0u64; len];

    // Odd d: the only candidate pair is (2, 2 + d).
    for d in (1..=d_max).step_by(2) {
        if d + 2 <= x && table.is_prime(d + 2) {
            hist[d as usize] = 1;
        }
    }

    let odd_slots = x.div_ceil(2) as usize;
    let correlation_len = (2 * odd_slots).next_power_of_two();
    let strategy = match strategy {
        PairStrategy::Auto => {
            // Rough operation counts; ln x is approximated by (2/3)·log2 x.
            let log_x = (2 * (64 - x.leading_zeros() as u128) / 3).max(1);
            let window_cost = (x as u128 / log_x) * (d_max as u128 / (2 * log_x));
            let corr_len = correlation_len as u128;
            let corr_cost = 3 * corr_len * corr_len.trailing_zeros() as u128;
            if correlation_len <= ntt::MAX_LEN && corr_cost < window_cost {
                PairStrategy::Correlation
            } else {
                PairStrategy::Window
            }
        }
        s => s,
    };

    match strategy {
        PairStrategy::Correlation => {
            if correlation_len > ntt::MAX_LEN {
                return Err(Error::Resource {
                    what: format!("correlation of length {correlation_len}"),
                    budget: format!("{}", ntt::MAX_LEN),
                });
            }
            let words = table.odd_words();
            let bits: Vec<bool> = (0..odd_slots)
                .map(|i| words[i / 64] >> (i % 64) & 1 == 1)
                .collect();
            let corr = ntt::autocorrelate(&bits);
            for d in (2..=d_max).step_by(2) {
                hist[d as usize] = corr.get((d / 2) as usize).copied().unwrap_or(0);
            }
        }
        _ => {
            let odd_primes: Vec<u64> = table.primes_up_to(x).skip(1).collect();
            let even = odd_primes
                .par_iter()
                .enumerate()
                .fold(
                    || vec![0u64; len],
                    |mut acc, (i, &p)| {
                        for &r in &odd_primes[i + 1..] {
                            let d = r - p;
                            if d > d_max {
                                break;
                            }
                            acc[d as usize] += 1;
                        }
                        acc
                    },
                )
                .reduce(
                    || vec![0u64; len],
                    |mut a, b| {
                        a.iter_mut().zip(&b).for_each(|(x, y)| *x += y);
                        a
                    },
                );
            for d in (2..=d_max as usize).step_by(2) {
                hist[d] = even[d];
            }
        }
    }
    Ok(hist)
}

/// Result of [`count_tuple`]: the count and whether `d_k >= x` made it vacuous.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct TupleCount {
    pub count: u64,
    pub degenerate: bool,
}

const SMALL_PRIMES: [u64; 15] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47];

/// A prime `ℓ <= k + 1` for which `{0} ∪ D` covers every class mod `ℓ`.
pub(crate) fn covering_prime(d: &DifferenceSet) -> Option<u64> {
    let n = d.k() as u64 + 1;
    let mut seen = Vec::new();
    for &l in SMALL_PRIMES.iter().take_while(|&&l| l <= n) {
        seen.clear();
        seen.resize(l as usize, false);
        seen[0] = true;
        for &e in d.elements() {
            seen[(e % l) as usize] = true;
        }
        if seen.iter().all(|&s| s) {
            return Some(l);
        }
    }
    None
}

/// Bits `i + shift .. i + shift + 64` of the odd-only table, as one word.
#[inline]
fn shifted_word(words: &[u64], w: usize, shift: usize) -> u64 {
    let q = w + shift / 64;
    let r = shift % 64;
    let lo = words.get(q).copied().unwrap_or(0);
    if r == 0 {
        lo
    } else {
        let hi = words.get(q + 1).copied().unwrap_or(0);
        (lo >> r) | (hi << (64 - r))
    }
}

/// Counts odd `p <= limit` with `p` and every `p + 2·s` prime, `s` in `half_shifts`.
pub(crate) fn count_odd_shifted(words: &[u64], half_shifts: &[usize], limit: u64) -> u64 {
    if limit < 3 {
        return 0;
    }
    let max_idx = ((limit - 1) / 2) as usize;
    let last_word = max_idx / 64;
    let mut total = 0u64;
    for w in 0..=last_word {
        let mut acc = words[w];
        for &s in half_shifts {
            if acc == 0 {
                break;
            }
            acc &= shifted_word(words, w, s);
        }
        if w == last_word {
            let keep = max_idx % 64 + 1;
            if keep < 64 {
                acc &= (1u64 << keep) - 1;
            }
        }
        total += acc.count_ones() as u64;
    }
    total
}

/// `G_k(x, D)`.
pub fn count_tuple(table: &PrimeTable, x: u64, d: &DifferenceSet) -> Result<TupleCount> {
    table.check_within(x)?;
    if d.largest() >= x {
        return Ok(TupleCount {
            count: 0,
            degenerate: true,
        });
    }
    let limit = x - d.largest();
    let all_prime =
        |p: u64| table.is_prime(p) && d.elements().iter().all(|&e| table.is_prime(p + e));

    // If {0} ∪ D covers every class mod a small prime ℓ, one of p + d_i equals ℓ.
    if let Some(l) = covering_prime(d) {
        let mut candidates: Vec<u64> = std::iter::once(l)
            .chain(d.elements().iter().filter(|&&e| e < l).map(|&e| l - e))
            .filter(|&p| p >= 2 && p <= limit)
            .collect();
        candidates.sort_unstable();
        candidates.dedup();
        let count = candidates.into_iter().filter(|&p| all_prime(p)).count() as u64;
        return Ok(TupleCount {
            count,
            degenerate: false,
        });
    }

    // Not covering mod 2: every d_i is even and p = 2 cannot contribute.
    let shifts: Vec<usize> = d.elements().iter().map(|&e| (e / 2) as usize).collect();
    let count = count_odd_shifted(table.odd_words(), &shifts, limit);
    Ok(TupleCount {
        count,
        degenerate: false,
    })
}

/// Literal loop over primes; the reference implementation for tests.
pub fn count_tuple_oracle(table: &PrimeTable, x: u64, d: &DifferenceSet) -> Result<TupleCount> {
    table.check_within(x)?;
    if d.largest() >= x {
        return Ok(TupleCount {
            count: 0,
            degenerate: true,
        });
    }
    let mut count = 0;
    for p in table.primes_up_to(x - d.largest()) {
        let mut ok = true;
        for &e in d.elements() {
            if !table.is_prime(p + e) {
                ok = false;
            }
        }
        if ok {
            count += 1;
        }
    }
    Ok(TupleCount {
        count,
        degenerate: false,
    })
}

/// `π(y, H)`: integers `n <= y` with `n + h` prime for every `h` in `H`.
pub fn pi_of_pattern(table: &PrimeTable, y: u64, pattern: &[u64]) -> Result<u64> {
    let top = pattern.iter().copied().max().unwrap_or(0);
    table.check_within(y.saturating_add(top))?;
    Ok((1..=y)
        .filter(|&n| pattern.iter().all(|&h| table.is_prime(n + h)))
        .count() as u64)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn set(v: &[u64]) -> DifferenceSet {
        DifferenceSet::new(v.to_vec()).unwrap()
    }

    #[test]
    fn difference_set_invariants() {
        let d = set(&[12, 6, 18]);
        assert_eq!(d.elements(), &[6, 12, 18]);
        assert_eq!(d.gcd(), 6);
        assert_eq!(d.reduced(), vec![1, 2, 3]);
        assert_eq!(d.with_zero(), vec![0, 6, 12, 18]);
        assert!(DifferenceSet::new(vec![]).is_err());
        assert!(DifferenceSet::new(vec![0, 2]).is_err());
        assert!(DifferenceSet::new(vec![2, 2]).is_err());
        assert_eq!("{2, 6}".parse::<DifferenceSet>().unwrap(), set(&[2, 6]));
        assert_eq!("2;6".parse::<DifferenceSet>().unwrap().to_string(), "{2,6}");
    }

    #[test]
    fn gap_histogram_examples() {
        let t = PrimeTable::build(100).unwrap();
        let h = gap_histogram(&t, 20).unwrap();
        assert_eq!(h.counts, BTreeMap::from([(1, 1), (2, 4), (4, 2)]));
        assert_eq!((h.max_count, h.argmax.clone()), (4, vec![2]));
        assert_eq!(
            gap_histogram(&t, 3).unwrap().counts,
            BTreeMap::from([(1, 1)])
        );
        let h = gap_histogram(&t, 7).unwrap();
        assert_eq!(h.counts, BTreeMap::from([(1, 1), (2, 2)]));
        assert_eq!(h.argmax, vec![2]);
        assert!(matches!(
            gap_histogram(&t, 2),
            Err(Error::InsufficientPrimes(_))
        ));
        assert!(gap_histogram(&t, 101).is_err());
        let mut csv = Vec::new();
        h.write_csv(&mut csv).unwrap();
        assert_eq!(String::from_utf8(csv).unwrap(), "d,count\n1,1\n2,2\n");
    }

    #[test]
    fn gap_counts_sum_to_pi_minus_one() {
        let t = PrimeTable::build(50_000).unwrap();
        for x in [3, 10, 97, 1000, 49_999] {
            let h = gap_histogram(&t, x).unwrap();
            assert_eq!(h.counts.values().sum::<u64>(), t.pi(x).unwrap() - 1);
        }
    }

    #[test]
    fn pair_histogram_examples() {
        let t = PrimeTable::build(100).unwrap();
        let h = pair_difference_histogram(&t, 20, 19).unwrap();
        assert_eq!(h[2], 4);
        assert_eq!(h[19], 0);
        assert_eq!(pair_difference_histogram(&t, 10, 5).unwrap()[5], 1);
        assert!(pair_difference_histogram(&t, 20, 0).is_err());
        assert!(pair_difference_histogram(&t, 20, 21).is_err());
    }

    #[test]
    fn pair_strategies_agree_with_double_loop() {
        let t = PrimeTable::build(5000).unwrap();
        for x in [2, 3, 4, 5, 30, 64, 129, 1000, 4999] {
            let d_max = x.max(1);
            let primes: Vec<u64> = t.primes_up_to(x).collect();
            let mut naive = vec![0u64; d_max as usize + 1];
            for (i, &p) in primes.iter().enumerate() {
                for &r in &primes[i + 1..] {
                    naive[(r - p) as usize] += 1;
                }
            }
            for s in [
                PairStrategy::Auto,
                PairStrategy::Correlation,
                PairStrategy::Window,
            ] {
                assert_eq!(
                    pair_difference_histogram_with(&t, x, d_max, s).unwrap(),
                    naive,
                    "x={x} {s:?}"
                );
            }
        }
    }

    #[test]
    fn count_tuple_examples() {
        let t = PrimeTable::build(100).unwrap();
        assert_eq!(count_tuple(&t, 20, &set(&[2, 6])).unwrap().count, 2);
        assert_eq!(count_tuple(&t, 20, &set(&[2])).unwrap().count, 4);
        assert_eq!(count_tuple(&t, 20, &set(&[1, 2])).unwrap().count, 0);
        assert_eq!(count_tuple(&t, 50, &set(&[6])).unwrap().count, 9);
        assert_eq!(count_tuple(&t, 10, &set(&[1])).unwrap().count, 1);
        // (3, 5, 7) is the only prime triple with differences {2, 4}.
        assert_eq!(count_tuple(&t, 100, &set(&[2, 4])).unwrap().count, 1);
        let degenerate = count_tuple(&t, 20, &set(&[2, 20])).unwrap();
        assert_eq!(
            degenerate,
            TupleCount {
                count: 0,
                degenerate: true
            }
        );
        assert!(count_tuple(&t, 101, &set(&[2])).is_err());
    }

    #[test]
    fn oracle_examples() {
        let t = PrimeTable::build(100).unwrap();
        assert_eq!(count_tuple_oracle(&t, 20, &set(&[2, 6])).unwrap().count, 2);
        assert_eq!(count_tuple_oracle(&t, 50, &set(&[6])).unwrap().count, 9);
        assert!(count_tuple_oracle(&t, 20, &set(&[25])).unwrap().degenerate);
    }

    #[test]
    fn tuple_count_equals_shifted_pattern_count() {
        let t = PrimeTable::build(3000).unwrap();
        for d in [set(&[2]), set(&[2, 6]), set(&[4, 6, 10]), set(&[1, 3])] {
            for x in [50, 500, 2000] {
                let via_pattern = pi_of_pattern(&t, x - d.largest(), &d.with_zero()).unwrap();
                assert_eq!(count_tuple(&t, x, &d).unwrap().count, via_pattern);
            }
        }
    }

    #[test]
    fn exhaustive_oracle_equivalence_small() {
        let t = PrimeTable::build(400).unwrap();
        for x in [3, 10, 64, 65, 128, 200, 399] {
            for a in 1..40u64 {
                let d = set(&[a]);
                assert_eq!(
                    count_tuple(&t, x, &d).unwrap(),
                    count_tuple_oracle(&t, x, &d).unwrap()
                );
                for b in a + 1..40 {
                    let d = set(&[a, b]);
                    assert_eq!(
                        count_tuple(&t, x, &d).unwrap(),
                        count_tuple_oracle(&t, x, &d).unwrap(),
                        "x={x} D={d}"
                    );
                }
            }
        }
    }
}
