//! Jumping champions and k-tuple prime difference champions.
//!
//! A champion for `(x, k)` is a difference set `D` with `|D| = k`
//! maximizing `G_k(x, D)`. Every maximizer is reported, sorted
//! lexicographically, together with the best few runners-up.
//!
//! Exhaustive search for `k = 1` reads the full pair-difference histogram.
//! For `k >= 2` it walks `d_1 < d_2 < …` depth first, carrying the sorted
//! list of primes `p` that still satisfy every chosen difference. A subtree is
//! abandoned only when an upper bound on every count inside it falls strictly
//! below the local leaderboard threshold, so pruning never changes the
//! reported winners, only the work done.

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::fmt;
use std::io::Write;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::counting::{
    count_tuple, covering_prime, gap_histogram, pair_difference_histogram, DifferenceSet,
};
use crate::error::{range, Error, Result};
use crate::numeric::is_prime_trial;
use crate::sieve::PrimeTable;
use crate::singular::primorials_up_to;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SearchMode {
    Exhaustive,
    Pruned,
}

impl fmt::Display for SearchMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SearchMode::Exhaustive => "exhaustive",
            SearchMode::Pruned => "pruned",
        })
    }
}

impl FromStr for SearchMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "exhaustive" => Ok(SearchMode::Exhaustive),
            "pruned" => Ok(SearchMode::Pruned),
            other => Err(range(format!("unknown search mode {other:?}"))),
        }
    }
}

/// Knobs for [`find_pdc`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SearchConfig {
    /// How many non-winning sets to report.
    pub runners_up: usize,
    /// Largest `x` allowed in exhaustive mode, indexed by `k - 2`; `k = 1`
    /// is unlimited and `k` beyond the list uses the last entry.
    pub exhaustive_limits: Vec<u64>,
    /// Pruned mode: `d` ranges over `m·p_n♯` with `1 <= m <= multiplier_max`.
    pub multiplier_max: u64,
    /// Pruned mode: reduced patterns live in `{1, …, B}`; `None` means `12·k`.
    pub pattern_bound: Option<u64>,
}

impl Default for SearchConfig {
    fn default() -> Self {
        Self {
            runners_up: 5,
            exhaustive_limits: vec![100_000, 5_000, 500],
            multiplier_max: 30,
            pattern_bound: None,
        }
    }
}

impl SearchConfig {
    pub fn exhaustive_limit(&self, k: usize) -> Option<u64> {
        if k <= 1 {
            return None;
        }
        self.exhaustive_limits
            .get(k - 2)
            .or(self.exhaustive_limits.last())
            .copied()
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Candidate {
    pub set: DifferenceSet,
    pub count: u64,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChampionRecord {
    pub x: u64,
    pub k: usize,
    /// All maximizers, lexicographically sorted.
    pub winners: Vec<DifferenceSet>,
    pub max_count: u64,
    pub runners_up: Vec<Candidate>,
    pub mode: SearchMode,
    pub search_space: String,
}

impl ChampionRecord {
    /// `d*` of the first winner.
    pub fn gcd(&self) -> Option<u64> {
        self.winners.first().map(DifferenceSet::gcd)
    }

    /// Whether every winner satisfies `d_k < x/2`.
    pub fn winners_below_half_x(&self) -> bool {
        self.winners.iter().all(|w| 2 * w.largest() < self.x)
    }
}

/// Ranks worst first: lower count, then lexicographically larger set.
#[derive(Clone, Debug, PartialEq, Eq)]
struct Ranked(Candidate);

impl Ord for Ranked {
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .0
            .count
            .cmp(&self.0.count)
            .then_with(|| self.0.set.cmp(&other.0.set))
    }
}

impl PartialOrd for Ranked {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Keeps every set tied at the maximum plus the best `capacity` others,
/// under the total order (count descending, set ascending).
#[derive(Clone, Debug, Default)]
struct Leaderboard {
    capacity: usize,
    max: u64,
    ties: Vec<DifferenceSet>,
    /// Max-heap on [`Ranked`], so the top is the weakest runner-up.
    others: BinaryHeap<Ranked>,
}

impl Leaderboard {
    fn new(capacity: usize) -> Self {
        Self {
            capacity,
            ..Default::default()
        }
    }

    /// Counts strictly below this cannot enter the board.
    fn threshold(&self) -> u64 {
        if self.ties.is_empty() {
            0
        } else if self.capacity == 0 {
            self.max
        } else if self.others.len() >= self.capacity {
            self.others.peek().map_or(0, |r| r.0.count)
        } else {
            0
        }
    }

    fn offer(&mut self, set: DifferenceSet, count: u64) {
        if self.ties.is_empty() || count > self.max {
            let demoted = std::mem::take(&mut self.ties);
            let old_max = self.max;
            self.max = count;
            self.ties.push(set);
            for d in demoted {
                self.push_other(Candidate {
                    set: d,
                    count: old_max,
                });
            }
        } else if count == self.max {
            self.ties.push(set);
        } else {
            self.push_other(Candidate { set, count });
        }
    }

    fn push_other(&mut self, candidate: Candidate) {
        if self.capacity == 0 {
            return;
        }
        let ranked = Ranked(candidate);
        if self.others.len() < self.capacity {
            self.others.push(ranked);
        } else if self.others.peek().is_some_and(|worst| ranked < *worst) {
            self.others.pop();
            self.others.push(ranked);
        }
    }

    fn merge(mut self, other: Self) -> Self {
        let max = other.max;
        for set in other.ties {
            self.offer(set, max);
        }
        for r in other.others {
            self.offer(r.0.set, r.0.count);
        }
        self
    }

    fn into_record(
        mut self,
        x: u64,
        k: usize,
        mode: SearchMode,
        search_space: String,
    ) -> ChampionRecord {
        self.ties.sort();
        ChampionRecord {
            x,
            k,
            winners: self.ties,
            max_count: self.max,
            runners_up: self
                .others
                .into_sorted_vec()
                .into_iter()
                .map(|r| r.0)
                .collect(),
            mode,
            search_space,
        }
    }
}

fn singleton(d: u64) -> DifferenceSet {
    DifferenceSet::new(vec![d]).expect("positive difference")
}

/// Most common gap between consecutive primes up to `x`, all ties reported.
pub fn jumping_champion(table: &PrimeTable, x: u64) -> Result<ChampionRecord> {
    jumping_champion_with(table, x, &SearchConfig::default())
}

pub fn jumping_champion_with(
    table: &PrimeTable,
    x: u64,
    config: &SearchConfig,
) -> Result<ChampionRecord> {
    if x < 3 {
        return Err(Error::InsufficientPrimes(format!(
            "jumping champion needs x >= 3, got {x}"
        )));
    }
    let hist = gap_histogram(table, x)?;
    let mut board = Leaderboard::new(config.runners_up);
    for (&d, &c) in &hist.counts {
        board.offer(singleton(d), c);
    }
    Ok(board.into_record(
        x,
        1,
        SearchMode::Exhaustive,
        "gaps between consecutive primes".into(),
    ))
}

/// k-tuple prime difference champion for primes up to `x`.
pub fn find_pdc(table: &PrimeTable, x: u64, k: usize, mode: SearchMode) -> Result<ChampionRecord> {
    find_pdc_with(table, x, k, mode, &SearchConfig::default())
}

pub fn find_pdc_with(
    table: &PrimeTable,
    x: u64,
    k: usize,
    mode: SearchMode,
    config: &SearchConfig,
) -> Result<ChampionRecord> {
    table.check_within(x)?;
    if k == 0 {
        return Err(range("k must be at least 1"));
    }
    let pi = table.pi(x)?;
    if (k as u64) + 1 > pi {
        return Err(Error::InsufficientPrimes(format!(
            "k + 1 = {} exceeds π({x}) = {pi}",
            k + 1
        )));
    }
    match mode {
        SearchMode::Exhaustive => {
            if let Some(limit) = config.exhaustive_limit(k) {
                if x > limit {
                    return Err(range(format!(
                        "exhaustive search for k = {k} is limited to x <= {limit}; use pruned mode or raise the limit"
                    )));
                }
            }
            if k == 1 {
                exhaustive_pairs(table, x, config)
            } else {
                exhaustive_tuples(table, x, k, config)
            }
        }
        SearchMode::Pruned => pruned_search(table, x, k, config),
    }
}

fn exhaustive_pairs(table: &PrimeTable, x: u64, config: &SearchConfig) -> Result<ChampionRecord> {
    let hist = pair_difference_histogram(table, x, x - 1)?;
    let mut board = Leaderboard::new(config.runners_up);
    for (d, &c) in hist.iter().enumerate().skip(1) {
        board.offer(singleton(d as u64), c);
    }
    Ok(board.into_record(
        x,
        1,
        SearchMode::Exhaustive,
        format!("all d in [1, {}]", x - 1),
    ))
}

struct TupleSearch<'a> {
    table: &'a PrimeTable,
    x: u64,
    k: usize,
    /// `G_1(x, {d})`, an upper bound for any set containing `d` or any two
    /// elements `d` apart.
    pair_counts: Vec<u64>,
}

impl TupleSearch<'_> {
    fn pair_bound(&self, chosen: &[u64], e: u64) -> u64 {
        chosen
            .iter()
            .map(|&c| self.pair_counts[(e - c) as usize])
            .fold(self.pair_counts[e as usize], u64::min)
    }

    /// `chosen` is nonempty; `survivors` are the primes `p` for which every
    /// `p + c` is prime, ascending.
    fn descend(&self, chosen: &mut Vec<u64>, survivors: &[u32], board: &mut Leaderboard) {
        let last = *chosen.last().expect("nonempty");
        let remaining = self.k - chosen.len();
        // Leave room for the remaining elements below x.
        let top = self.x - remaining as u64;
        for e in last + 1..=top {
            let threshold = board.threshold();
            let cutoff = survivors.partition_point(|&p| p as u64 + e <= self.x);
            if (cutoff as u64) < threshold || self.pair_bound(chosen, e) < threshold {
                continue;
            }
            let candidates = &survivors[..cutoff];
            if remaining == 1 {
                let mut hits = 0u64;
                let mut abandoned = false;
                for (i, &p) in candidates.iter().enumerate() {
                    if self.table.is_prime(p as u64 + e) {
                        hits += 1;
                    } else if hits + ((cutoff - i - 1) as u64) < threshold {
                        abandoned = true;
                        break;
                    }
                }
                if !abandoned {
                    chosen.push(e);
                    board.offer(
                        DifferenceSet::new(chosen.clone()).expect("increasing"),
                        hits,
                    );
                    chosen.pop();
                }
            } else {
                let next: Vec<u32> = candidates
                    .iter()
                    .copied()
                    .filter(|&p| self.table.is_prime(p as u64 + e))
                    .collect();
                if (next.len() as u64) < threshold {
                    continue;
                }
                chosen.push(e);
                self.descend(chosen, &next, board);
                chosen.pop();
            }
        }
    }
}

fn exhaustive_tuples(
    table: &PrimeTable,
    x: u64,
    k: usize,
    config: &SearchConfig,
) -> Result<ChampionRecord> {
    if x > u32::MAX as u64 {
        return Err(range("exhaustive tuple search supports x < 2^32"));
    }
    let search = TupleSearch {
        table,
        x,
        k,
        pair_counts: pair_difference_histogram(table, x, x - 1)?,
    };
    let first_max = x - k as u64;
    let board = (1..=first_max)
        .into_par_iter()
        .fold(
            || Leaderboard::new(config.runners_up),
            |mut board, a| {
                let threshold = board.threshold();
                if search.pair_counts[a as usize] < threshold {
                    return board;
                }
                let survivors: Vec<u32> = table
                    .primes_up_to(x - a)
                    .filter(|&p| table.is_prime(p + a))
                    .map(|p| p as u32)
                    .collect();
                let mut chosen = vec![a];
                search.descend(&mut chosen, &survivors, &mut board);
                board
            },
        )
        .reduce(|| Leaderboard::new(config.runners_up), Leaderboard::merge);
    Ok(board.into_record(
        x,
        k,
        SearchMode::Exhaustive,
        format!("all 1 <= d_1 < ... < d_{k} < {x}"),
    ))
}

fn gcd_of(values: &[u64]) -> u64 {
    values.iter().fold(0, |g, &v| num_integer::gcd(g, v))
}

fn reduced_patterns(k: usize, bound: u64) -> Vec<Vec<u64>> {
    fn walk(start: u64, bound: u64, k: usize, current: &mut Vec<u64>, out: &mut Vec<Vec<u64>>) {
        if current.len() == k {
            if gcd_of(current) == 1 {
                out.push(current.clone());
            }
            return;
        }
        for v in start..=bound {
            current.push(v);
            walk(v + 1, bound, k, current, out);
            current.pop();
        }
    }
    let mut out = Vec::new();
    walk(1, bound, k, &mut Vec::new(), &mut out);
    out
}

/// Gcd candidates `m·p_n♯ < x` for the pruned family, ascending and distinct.
pub fn pruned_multipliers(x: u64, multiplier_max: u64) -> Vec<u64> {
    let mut out: Vec<u64> = primorials_up_to(x)
        .into_iter()
        .flat_map(|p| (1..=multiplier_max).filter_map(move |m| p.checked_mul(m)))
        .filter(|&d| d < x)
        .collect();
    out.sort_unstable();
    out.dedup();
    out
}

fn pruned_search(
    table: &PrimeTable,
    x: u64,
    k: usize,
    config: &SearchConfig,
) -> Result<ChampionRecord> {
    let bound = config.pattern_bound.unwrap_or(12 * k as u64);
    if bound < k as u64 {
        return Err(range(format!(
            "pattern bound {bound} is smaller than k = {k}"
        )));
    }
    let multipliers = pruned_multipliers(x, config.multiplier_max);
    let patterns = reduced_patterns(k, bound);
    let candidates: Vec<DifferenceSet> = multipliers
        .iter()
        .flat_map(|&d| {
            patterns.iter().filter_map(move |pat| {
                let top = d.checked_mul(*pat.last().expect("k >= 1"))?;
                (top < x).then(|| {
                    DifferenceSet::new(pat.iter().map(|v| v * d).collect::<Vec<_>>()).ok()
                })?
            })
        })
        .filter(|set| covering_prime(set).is_none())
        .collect();
    let board = candidates
        .par_iter()
        .try_fold(
            || Leaderboard::new(config.runners_up),
            |mut board, set| -> Result<Leaderboard> {
                let count = count_tuple(table, x, set)?.count;
                board.offer(set.clone(), count);
                Ok(board)
            },
        )
        .try_reduce(
            || Leaderboard::new(config.runners_up),
            |a, b| Ok(a.merge(b)),
        )?;
    let space = format!(
        "D = d·D' with d = m·p_n# < {x}, 1 <= m <= {}; D' in {{1..{bound}}}, |D'| = {k}, gcd(D') = 1; zero singular series screened out ({} candidates)",
        config.multiplier_max,
        candidates.len()
    );
    Ok(board.into_record(x, k, SearchMode::Pruned, space))
}

/// One champion record per `x` in an ascending grid.
pub fn champion_scan(
    table: &PrimeTable,
    grid: &[u64],
    k: usize,
    mode: SearchMode,
    config: &SearchConfig,
) -> Result<Vec<ChampionRecord>> {
    if grid.windows(2).any(|w| w[0] >= w[1]) {
        return Err(range("x grid must be strictly ascending"));
    }
    grid.iter()
        .map(|&x| find_pdc_with(table, x, k, mode, config))
        .collect()
}

fn join_set(set: &DifferenceSet) -> String {
    set.elements()
        .iter()
        .map(u64::to_string)
        .collect::<Vec<_>>()
        .join(";")
}

/// CSV with header `x,k,mode,max_count,winners,gcd,runner_ups`.
///
/// Set elements are joined with `;`, multiple sets with `|`, and each
/// runner-up is written as `set:count`.
pub fn write_records_csv<W: Write>(mut w: W, records: &[ChampionRecord]) -> Result<()> {
    writeln!(w, "x,k,mode,max_count,winners,gcd,runner_ups")?;
    for r in records {
        let winners = r.winners.iter().map(join_set).collect::<Vec<_>>().join("|");
        let gcds = r
            .winners
            .iter()
            .map(|s| s.gcd().to_string())
            .collect::<Vec<_>>()
            .join("|");
        let runners = r
            .runners_up
            .iter()
            .map(|c| format!("{}:{}", join_set(&c.set), c.count))
            .collect::<Vec<_>>()
            .join("|");
        writeln!(
            w,
            "{},{},{},{},{},{},{}",
            r.x, r.k, r.mode, r.max_count, winners, gcds, runners
        )?;
    }
    Ok(())
}

/// Smallest prime not dividing `n`.
pub fn least_non_divisor_prime(n: u64) -> u64 {
    (2..)
        .find(|&p| is_prime_trial(p) && !n.is_multiple_of(p))
        .expect("infinitely many primes")
}
