//! Residue-class moments of `π(x; q, a)`.
//!
//! The power sums `Σ_a π(x;q,a)^m` are tied to counts of ordered tuples of
//! distinct primes lying in a common class through Stirling numbers of the
//! second kind, and the tuple counts in turn to sums of `G_{k-1}` over
//! difference sets divisible by `q`. Both links are checked exactly here.

use num_integer::Integer;
use rayon::prelude::*;
use serde::Serialize;

use crate::counting::{count_tuple, pair_difference_histogram, DifferenceSet};
use crate::error::{Error, Result};
use crate::numeric::{distinct_prime_factors, euler_phi};
use crate::sieve::PrimeTable;

fn checked_pow(base: u64, exp: u32) -> Result<u128> {
    (base as u128)
        .checked_pow(exp)
        .ok_or_else(|| Error::Overflow(format!("{base}^{exp}")))
}

fn checked_sum(mut values: impl Iterator<Item = Result<u128>>) -> Result<u128> {
    values.try_fold(0u128, |acc, v| {
        acc.checked_add(v?)
            .ok_or_else(|| Error::Overflow("moment sum".into()))
    })
}

/// `Σ_a π(x;q,a)^k`, over all classes or only those coprime to `q`.
pub fn moment_sum(table: &PrimeTable, x: u64, q: u64, k: u32, coprime_only: bool) -> Result<u128> {
    let counts = table.class_counts(x, q)?;
    moment_from_counts(&counts, q, k, coprime_only)
}

fn moment_from_counts(counts: &[u64], q: u64, k: u32, coprime_only: bool) -> Result<u128> {
    checked_sum(
        counts
            .iter()
            .enumerate()
            .filter(|(a, _)| !coprime_only || (*a as u64).gcd(&q) == 1)
            .map(|(_, &c)| checked_pow(c, k)),
    )
}

/// `C_{m,i} = S(m, m - i)`, a Stirling number of the second kind.
pub fn stirling_coefficient(m: u32, i: u32) -> Result<u128> {
    if m == 0 || i >= m {
        return Err(Error::Domain(format!("C_{{{m},{i}}} needs 0 <= i < m")));
    }
    stirling_second_kind(m, m - i)
}

/// `S(n, j)`: partitions of an `n`-set into `j` nonempty blocks.
pub fn stirling_second_kind(n: u32, j: u32) -> Result<u128> {
    if j > n {
        return Ok(0);
    }
    // Row-by-row recurrence S(n, j) = j·S(n-1, j) + S(n-1, j-1).
    let mut row = vec![0u128; j as usize + 1];
    row[0] = 1;
    for r in 1..=n {
        for c in (1..=j.min(r) as usize).rev() {
            row[c] = (c as u128)
                .checked_mul(row[c])
                .and_then(|v| v.checked_add(row[c - 1]))
                .ok_or_else(|| Error::Overflow(format!("S({n}, {j})")))?;
        }
        row[0] = 0;
    }
    Ok(row[j as usize])
}

fn falling(c: u64, j: u32) -> Result<u128> {
    (0..j as u64).try_fold(1u128, |acc, t| {
        acc.checked_mul(c.saturating_sub(t) as u128)
            .ok_or_else(|| Error::Overflow(format!("falling factorial ({c})_{j}")))
    })
}

/// Ordered `j`-tuples of distinct primes `<= x` all congruent mod `q`.
pub fn distinct_tuple_sum(table: &PrimeTable, x: u64, q: u64, j: u32) -> Result<u128> {
    if j == 0 {
        return Err(Error::Domain("tuple length must be at least 1".into()));
    }
    let counts = table.class_counts(x, q)?;
    checked_sum(counts.iter().map(|&c| falling(c, j)))
}

/// Outcome of an exact identity check.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct IdentityCheck {
    pub holds: bool,
    pub lhs: u128,
    pub rhs: u128,
    pub residual: i128,
}

impl IdentityCheck {
    fn new(lhs: u128, rhs: u128) -> Self {
        Self {
            holds: lhs == rhs,
            lhs,
            rhs,
            residual: lhs as i128 - rhs as i128,
        }
    }

    /// Converts a failed check into an [`Error::IdentityViolation`].
    pub fn into_result(self, what: &str) -> Result<Self> {
        if self.holds {
            Ok(self)
        } else {
            Err(Error::IdentityViolation(format!(
                "{what}: lhs {} rhs {} residual {}",
                self.lhs, self.rhs, self.residual
            )))
        }
    }
}

/// `Σ_a π^m = Σ_{i<m} C_{m,i} · Σ'_{m-i}`.
pub fn verify_power_identity(table: &PrimeTable, x: u64, q: u64, m: u32) -> Result<IdentityCheck> {
    if !(1..=5).contains(&m) {
        return Err(Error::Range(format!(
            "power identity checked for 1 <= m <= 5, got {m}"
        )));
    }
    let lhs = moment_sum(table, x, q, m, false)?;
    let rhs = checked_sum((0..m).map(|i| {
        let c = stirling_coefficient(m, i)?;
        let s = distinct_tuple_sum(table, x, q, m - i)?;
        c.checked_mul(s)
            .ok_or_else(|| Error::Overflow("power identity term".into()))
    }))?;
    Ok(IdentityCheck::new(lhs, rhs))
}

/// `Σ'_k = k! · Σ_{q | d_i} G_{k-1}(x, {d_1, …, d_{k-1}})`, for `k ∈ {2, 3}`.
///
/// Difference sets range over `1 <= d_1 < … < d_{k-1} < x`.
pub fn verify_tuple_link(table: &PrimeTable, x: u64, q: u64, k: u32) -> Result<IdentityCheck> {
    if !(2..=3).contains(&k) {
        return Err(Error::Range(format!(
            "tuple link checked for k in {{2, 3}}, got {k}"
        )));
    }
    if q == 0 {
        return Err(Error::Range("modulus q must be at least 1".into()));
    }
    let lhs = distinct_tuple_sum(table, x, q, k)?;
    let tuple_sum: u128 = if x < 2 {
        0
    } else if k == 2 {
        let hist = pair_difference_histogram(table, x, x)?;
        (q..x)
            .step_by(q as usize)
            .map(|d| hist[d as usize] as u128)
            .sum()
    } else {
        let multiples: Vec<u64> = (q..x).step_by(q as usize).collect();
        multiples
            .par_iter()
            .enumerate()
            .map(|(i, &a)| -> Result<u128> {
                let mut s = 0u128;
                for &b in &multiples[i + 1..] {
                    let d = DifferenceSet::new(vec![a, b])?;
                    s += count_tuple(table, x, &d)?.count as u128;
                }
                Ok(s)
            })
            .collect::<Result<Vec<_>>>()?
            .into_iter()
            .sum()
    };
    let factorial: u128 = (1..=k as u128).product();
    Ok(IdentityCheck::new(lhs, factorial * tuple_sum))
}

/// Recursive lower bound `Σ π^k >= (π(x)/φ(q)) Σ π^{k-1} - 𝓔_k` with the
/// error budget `(π(x)/φ(q))^{k-1} log q` (implied constant 1).
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct InequalityReport {
    pub lhs: u128,
    pub main_term: f64,
    /// `lhs - main_term`.
    pub margin: f64,
    pub budget: f64,
    /// `margin >= -budget`.
    pub within_budget: bool,
}

pub fn verify_moment_inequality(
    table: &PrimeTable,
    x: u64,
    q: u64,
    k: u32,
) -> Result<InequalityReport> {
    if k < 2 {
        return Err(Error::Range(format!(
            "moment inequality needs k >= 2, got {k}"
        )));
    }
    let counts = table.class_counts(x, q)?;
    let pi = table.pi(x)? as f64;
    let phi = euler_phi(q) as f64;
    let lhs = moment_from_counts(&counts, q, k, false)?;
    let prev = moment_from_counts(&counts, q, k - 1, false)?;
    let main_term = pi / phi * prev as f64;
    let margin = lhs as f64 - main_term;
    let budget = (pi / phi).powi(k as i32 - 1) * (q as f64).ln();
    Ok(InequalityReport {
        lhs,
        main_term,
        margin,
        budget,
        within_budget: margin >= -budget,
    })
}

/// Moment quantities for one `(x, q, k)`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MomentReport {
    pub x: u64,
    pub q: u64,
    pub k: u32,
    /// `A_k`: sum over classes coprime to `q`.
    pub a_k: u128,
    /// `A_{k-1}`; equals `φ(q)` when `k = 1`.
    pub a_k_minus_1: u128,
    pub full_sum: u128,
    /// `B_k = A_k - (π(x)/φ(q))·A_{k-1}`.
    pub b_k: f64,
    /// `Σ'_j` for `j = 1..=k`.
    pub distinct_sums: Vec<u128>,
    pub identity_ok: bool,
    /// `full_sum - (π(x)/φ(q))·Σ_a π^{k-1}`; absent for `k = 1`.
    pub inequality_margin: Option<f64>,
    pub inequality_budget: Option<f64>,
    /// `full_sum - A_k <= ω(q)`.
    pub noncoprime_bound_ok: bool,
}

pub fn moment_report(table: &PrimeTable, x: u64, q: u64, k: u32) -> Result<MomentReport> {
    if k == 0 {
        return Err(Error::Range("moment order must be at least 1".into()));
    }
    let counts = table.class_counts(x, q)?;
    let pi = table.pi(x)? as f64;
    let phi = euler_phi(q);
    let a_k = moment_from_counts(&counts, q, k, true)?;
    let a_prev = moment_from_counts(&counts, q, k - 1, true)?;
    let full_sum = moment_from_counts(&counts, q, k, false)?;
    let b_k = a_k as f64 - pi / phi as f64 * a_prev as f64;
    let distinct_sums = (1..=k)
        .map(|j| checked_sum(counts.iter().map(|&c| falling(c, j))))
        .collect::<Result<Vec<_>>>()?;
    let identity_ok = if k <= 5 {
        verify_power_identity(table, x, q, k)?.holds
    } else {
        true
    };
    let (inequality_margin, inequality_budget) = if k >= 2 {
        let r = verify_moment_inequality(table, x, q, k)?;
        (Some(r.margin), Some(r.budget))
    } else {
        (None, None)
    };
    let omega = distinct_prime_factors(q).len() as u128;
    Ok(MomentReport {
        x,
        q,
        k,
        a_k,
        a_k_minus_1: a_prev,
        full_sum,
        b_k,
        distinct_sums,
        identity_ok,
        inequality_margin,
        inequality_budget,
        noncoprime_bound_ok: full_sum - a_k <= omega,
    })
}
