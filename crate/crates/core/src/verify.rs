//! Theorem-level quantities of champion records and pass/report verdicts.
//!
//! Assert-class verdicts are expected to hold at desk scale and make the
//! harness fail. Report-class verdicts describe asymptotic claims that are
//! only observed, never enforced.

use std::fmt::Write as _;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};
use serde::Serialize;

use crate::champions::{ChampionRecord, SearchMode};
use crate::counting::DifferenceSet;
use crate::error::{Error, Result};
use crate::numeric::{is_prime_trial, ln_factorial, CompensatedSum};
use crate::sieve::PrimeTable;
use crate::singular::delta_prime_factors;

pub const DEFAULT_SLACK: f64 = 1.0;

/// Every quantity the structure theorems speak about, for one winner.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TheoremProfile {
    pub x: u64,
    pub k: usize,
    pub mode: SearchMode,
    pub winner: DifferenceSet,
    pub d_star: u64,
    pub factorization: Vec<(u64, u32)>,
    pub omega: usize,
    /// `Σ_{p | d*} 1/p`.
    pub reciprocal_sum: f64,
    /// `Σ_{p <= d*} 1/p`, an upper bound for `reciprocal_sum`.
    pub reciprocal_sum_cap: f64,
    /// `log log log x`, defined once `x > e^e`.
    pub logloglog_x: Option<f64>,
    /// `Σ_{p ∤ d*, p <= 2 log x} 1/p`.
    pub thm12_lhs: f64,
    /// `log k! + k log 2 + log(2(k+1)²)`.
    pub thm12_rhs: f64,
    /// `Σ_{p ∤ Δ, p <= 2 log x} 1/p` for `Δ` of `{0} ∪ D*`.
    pub thm12_delta_lhs: f64,
    /// `(1/k) log k! + log 2 + (1/k) log(2(k+1)²)`.
    pub thm12_delta_rhs: f64,
    pub squarefree: bool,
    /// Largest primorial dividing `d*`.
    pub primorial_divisor: u64,
    /// Largest prime factor of `d*` over `log log x`.
    pub largest_prime_ratio: Option<f64>,
    /// Whether `d_k < x/2`.
    pub below_half_x: bool,
}

fn exact_reciprocal_sum(primes: impl IntoIterator<Item = u64>) -> f64 {
    let sum = primes.into_iter().fold(BigRational::zero(), |acc, p| {
        acc + BigRational::new(BigInt::from(1), BigInt::from(p))
    });
    sum.to_f64().expect("finite rational")
}

fn small_primes_up_to(limit: f64) -> Vec<u64> {
    (2..=limit.floor() as u64)
        .filter(|&p| is_prime_trial(p))
        .collect()
}

/// Factorization by trial division over the table's primes.
fn factorize_with(table: &PrimeTable, mut n: u64) -> Result<Vec<(u64, u32)>> {
    let bound = table.bound();
    if bound.saturating_mul(bound) < n {
        return Err(Error::Resource {
            what: format!("factorizing {n} needs primes up to its square root"),
            budget: format!("primes up to {bound}"),
        });
    }
    let mut out = Vec::new();
    for p in table.primes() {
        if p * p > n {
            break;
        }
        let mut e = 0;
        while n.is_multiple_of(p) {
            n /= p;
            e += 1;
        }
        if e > 0 {
            out.push((p, e));
        }
    }
    if n > 1 {
        out.push((n, 1));
    }
    Ok(out)
}

/// Profile of one winner of `record`.
pub fn profile_winner(
    record: &ChampionRecord,
    winner: &DifferenceSet,
    table: &PrimeTable,
) -> Result<TheoremProfile> {
    let x = record.x;
    let k = winner.k();
    let d_star = winner.gcd();
    let factorization = factorize_with(table, d_star)?;
    let divisors: Vec<u64> = factorization.iter().map(|&(p, _)| p).collect();

    let reciprocal_sum = exact_reciprocal_sum(divisors.iter().copied());
    let reciprocal_sum_cap: f64 = table
        .primes_up_to(d_star.min(table.bound()))
        .map(|p| 1.0 / p as f64)
        .collect::<CompensatedSum>()
        .value();

    let lx = (x as f64).ln();
    let window = small_primes_up_to(2.0 * lx);
    let thm12_lhs = exact_reciprocal_sum(
        window
            .iter()
            .copied()
            .filter(|p| !d_star.is_multiple_of(*p)),
    );
    let delta_primes = delta_prime_factors(winner);
    let thm12_delta_lhs = exact_reciprocal_sum(
        window
            .iter()
            .copied()
            .filter(|p| delta_primes.binary_search(p).is_err()),
    );

    let kf = k as f64;
    let log_term = (2.0 * (kf + 1.0) * (kf + 1.0)).ln();
    let ln_k_fact = ln_factorial(k as u64);
    let thm12_rhs = ln_k_fact + kf * 2f64.ln() + log_term;
    let thm12_delta_rhs = ln_k_fact / kf + 2f64.ln() + log_term / kf;

    let mut primorial_divisor = 1u64;
    for p in (2..).filter(|&p| is_prime_trial(p)) {
        match primorial_divisor.checked_mul(p) {
            Some(next) if d_star.is_multiple_of(next) => primorial_divisor = next,
            _ => break,
        }
    }

    let loglog = lx.ln();
    let logloglog_x = (loglog > 1.0).then(|| loglog.ln());
    let largest_prime_ratio = match divisors.last() {
        Some(&p) if loglog > 0.0 => Some(p as f64 / loglog),
        _ => None,
    };

    Ok(TheoremProfile {
        x,
        k,
        mode: record.mode,
        winner: winner.clone(),
        d_star,
        omega: divisors.len(),
        squarefree: factorization.iter().all(|&(_, e)| e == 1),
        factorization,
        reciprocal_sum,
        reciprocal_sum_cap,
        logloglog_x,
        thm12_lhs,
        thm12_rhs,
        thm12_delta_lhs,
        thm12_delta_rhs,
        primorial_divisor,
        largest_prime_ratio,
        below_half_x: 2 * winner.largest() < x,
    })
}

/// One profile per winner, in winner order.
pub fn profile(record: &ChampionRecord, table: &PrimeTable) -> Result<Vec<TheoremProfile>> {
    if record.winners.is_empty() {
        return Err(Error::Domain(format!(
            "record for x = {} has no winners",
            record.x
        )));
    }
    record
        .winners
        .iter()
        .map(|w| profile_winner(record, w, table))
        .collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum VerdictClass {
    Assert,
    Report,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Verdict {
    pub claim: &'static str,
    pub class: VerdictClass,
    pub passed: bool,
    pub detail: String,
}

impl Verdict {
    fn new(claim: &'static str, class: VerdictClass, passed: bool, detail: String) -> Self {
        Self {
            claim,
            class,
            passed,
            detail,
        }
    }

    pub fn failed_assert(&self) -> bool {
        self.class == VerdictClass::Assert && !self.passed
    }
}

/// Verdicts for one profile; `slack` absorbs the unquantified `o(1)`.
pub fn verdicts(p: &TheoremProfile, slack: f64) -> Vec<Verdict> {
    use VerdictClass::{Assert, Report};
    let exhaustive = p.mode == SearchMode::Exhaustive;
    let pair_run = exhaustive && p.k == 1 && p.x >= 10_000;
    let mut out = vec![
        Verdict::new(
            "few_primes_not_dividing_gcd",
            Assert,
            p.thm12_lhs <= p.thm12_rhs + slack,
            format!("{:.10} <= {:.10} + {slack}", p.thm12_lhs, p.thm12_rhs),
        ),
        Verdict::new(
            "few_primes_not_dividing_delta",
            Report,
            p.thm12_delta_lhs <= p.thm12_delta_rhs + slack,
            format!(
                "{:.10} <= {:.10} + {slack}",
                p.thm12_delta_lhs, p.thm12_delta_rhs
            ),
        ),
        Verdict::new(
            "gcd_squarefree",
            if exhaustive { Assert } else { Report },
            p.squarefree,
            format!(
                "d* = {} = {}",
                p.d_star,
                render_factorization(&p.factorization)
            ),
        ),
        Verdict::new(
            "gcd_divisible_by_6",
            if pair_run { Assert } else { Report },
            p.d_star.is_multiple_of(6),
            format!("d* = {}", p.d_star),
        ),
        Verdict::new(
            "reciprocal_sum_vs_logloglog",
            Report,
            true,
            match p.logloglog_x {
                Some(l) => format!(
                    "Σ 1/p = {:.10}, log log log x = {:.10}, difference {:.10}",
                    p.reciprocal_sum,
                    l,
                    p.reciprocal_sum - l
                ),
                None => format!("Σ 1/p = {:.10}, log log log x undefined", p.reciprocal_sum),
            },
        ),
        Verdict::new(
            "primorial_divisor",
            Report,
            p.primorial_divisor > 1,
            format!("largest primorial dividing d* is {}", p.primorial_divisor),
        ),
        Verdict::new(
            "largest_prime_over_loglog",
            Report,
            true,
            match p.largest_prime_ratio {
                Some(r) => format!("{r:.10}"),
                None => "undefined".into(),
            },
        ),
    ];
    if pair_run {
        out.push(Verdict::new(
            "largest_difference_below_half_x",
            Report,
            p.below_half_x,
            format!("d_k = {}, x/2 = {}", p.winner.largest(), p.x as f64 / 2.0),
        ));
    }
    out
}

fn render_factorization(f: &[(u64, u32)]) -> String {
    if f.is_empty() {
        return "1".into();
    }
    f.iter()
        .map(|&(p, e)| {
            if e == 1 {
                p.to_string()
            } else {
                format!("{p}^{e}")
            }
        })
        .collect::<Vec<_>>()
        .join("·")
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ProfileReport {
    pub profile: TheoremProfile,
    pub verdicts: Vec<Verdict>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct VerificationReport {
    pub slack: f64,
    pub entries: Vec<ProfileReport>,
    /// Grid points where the reciprocal sum of the first winner decreased.
    pub reciprocal_sum_decreases: Vec<u64>,
    pub passed: bool,
}

/// Profiles and verdicts for a grid of records, ascending in `x`.
pub fn verify_records(
    records: &[ChampionRecord],
    table: &PrimeTable,
    slack: f64,
) -> Result<VerificationReport> {
    if slack.is_nan() || slack < 0.0 {
        return Err(Error::Range(format!(
            "slack must be nonnegative, got {slack}"
        )));
    }
    let mut entries = Vec::new();
    let mut firsts = Vec::new();
    for record in records {
        let profiles = profile(record, table)?;
        firsts.push((record.x, profiles[0].reciprocal_sum));
        for p in profiles {
            let verdicts = verdicts(&p, slack);
            entries.push(ProfileReport {
                profile: p,
                verdicts,
            });
        }
    }
    let reciprocal_sum_decreases = firsts
        .windows(2)
        .filter(|w| w[1].1 < w[0].1)
        .map(|w| w[1].0)
        .collect();
    let passed = entries
        .iter()
        .all(|e| e.verdicts.iter().all(|v| !v.failed_assert()));
    Ok(VerificationReport {
        slack,
        entries,
        reciprocal_sum_decreases,
        passed,
    })
}

impl VerificationReport {
    /// Fixed-width table, one row per verdict.
    pub fn render_table(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(
            s,
            "{:>12} {:>3} {:<16} {:<36} {:<6} {:<4} detail",
            "x", "k", "winner", "claim", "class", "ok"
        );
        for e in &self.entries {
            for v in &e.verdicts {
                let class = match v.class {
                    VerdictClass::Assert => "assert",
                    VerdictClass::Report => "report",
                };
                let ok = if v.passed { "yes" } else { "no" };
                let _ = writeln!(
                    s,
                    "{:>12} {:>3} {:<16} {:<36} {:<6} {:<4} {}",
                    e.profile.x,
                    e.profile.k,
                    e.profile.winner.to_string(),
                    v.claim,
                    class,
                    ok,
                    v.detail
                );
            }
        }
        if !self.reciprocal_sum_decreases.is_empty() {
            let _ = writeln!(
                s,
                "reciprocal sum decreased at x = {:?}",
                self.reciprocal_sum_decreases
            );
        }
        let _ = writeln!(s, "overall: {}", if self.passed { "pass" } else { "FAIL" });
        s
    }
}
