use std::collections::BTreeMap;

use pdc_core::champions::{
    champion_scan, find_pdc, find_pdc_with, jumping_champion, SearchConfig, SearchMode,
};
use pdc_core::counting::{
    count_tuple, count_tuple_oracle, gap_histogram, pair_difference_histogram,
};
use pdc_core::hardy_littlewood::{li_k, predict};
use pdc_core::verify::{profile, verdicts, verify_records};
use pdc_core::{DifferenceSet, PrimeTable};

fn naive_primes(n: usize) -> Vec<usize> {
    let mut composite = vec![false; n + 1];
    let mut out = Vec::new();
    for i in 2..=n {
        if !composite[i] {
            out.push(i);
            for j in (i * i..=n).step_by(i) {
                composite[j] = true;
            }
        }
    }
    out
}

fn set(v: &[u64]) -> DifferenceSet {
    DifferenceSet::new(v.to_vec()).unwrap()
}

/// Composite trapezoid rule in `t` with the first Euler–Maclaurin end
/// correction, on `1 / log^k t` over `[2, x]`.
fn li_trapezoid(x: f64, k: i32) -> f64 {
    let n = 10_000_000usize;
    let h = (x - 2.0) / n as f64;
    let f = |t: f64| t.ln().powi(-k);
    let df = |t: f64| -(k as f64) / (t * t.ln().powi(k + 1));
    let mut sum = 0.5 * (f(2.0) + f(x));
    for i in 1..n {
        sum += f(2.0 + h * i as f64);
    }
    sum * h - h * h / 12.0 * (df(x) - df(2.0))
}

#[test]
fn li_matches_trapezoid_oracle() {
    for x in [1e3, 1e4, 1e5, 1e6] {
        for k in 1..=3 {
            let fast = li_k(x, k as u32, 1e-10 * x).unwrap();
            let slow = li_trapezoid(x, k);
            assert!(
                (fast / slow - 1.0).abs() < 1e-6,
                "x={x} k={k}: {fast} vs {slow}"
            );
        }
    }
}

#[test]
fn sieve_matches_naive_primes() {
    let n = 1_000_000;
    let t = PrimeTable::build(n as u64).unwrap();
    let naive = naive_primes(n);
    assert_eq!(t.count(), naive.len() as u64);
    assert!(t.primes().map(|p| p as usize).eq(naive.iter().copied()));
}

#[test]
fn twin_counts_match_naive_pairs() {
    let n = 1_000_000;
    let t = PrimeTable::build(n as u64).unwrap();
    let primes = naive_primes(n);
    let is: std::collections::HashSet<usize> = primes.iter().copied().collect();
    for x in [10usize, 100, 1_000, 10_000, 100_000, 1_000_000] {
        let naive = primes
            .iter()
            .filter(|&&p| p + 2 <= x && is.contains(&(p + 2)))
            .count() as u64;
        assert_eq!(
            count_tuple(&t, x as u64, &set(&[2])).unwrap().count,
            naive,
            "x={x}"
        );
    }
}

#[test]
fn gap_and_pair_histograms_match_naive() {
    let n = 30_000;
    let t = PrimeTable::build(n as u64).unwrap();
    let primes = naive_primes(n);
    let mut gaps = BTreeMap::new();
    for w in primes.windows(2) {
        *gaps.entry((w[1] - w[0]) as u64).or_insert(0u64) += 1;
    }
    assert_eq!(gap_histogram(&t, n as u64).unwrap().counts, gaps);

    let x = 5_000usize;
    let small: Vec<usize> = primes.iter().copied().filter(|&p| p <= x).collect();
    let mut pairs = vec![0u64; x + 1];
    for (i, &p) in small.iter().enumerate() {
        for &q in &small[i + 1..] {
            pairs[q - p] += 1;
        }
    }
    assert_eq!(
        pair_difference_histogram(&t, x as u64, x as u64).unwrap(),
        pairs
    );
}

#[test]
fn twin_prediction_ratio_improves_with_x() {
    let t = PrimeTable::build(1_000_000).unwrap();
    let deviation = |x: u64| (predict(&t, x, &set(&[2]), 1e-6).unwrap().ratio.unwrap() - 1.0).abs();
    let (a, b, c) = (deviation(10_000), deviation(100_000), deviation(1_000_000));
    assert!(c < a, "{a} {b} {c}");
}

#[test]
fn pair_champions_match_full_sweep() {
    let t = PrimeTable::build(3_000).unwrap();
    let primes = naive_primes(3_000);
    for x in [3u64, 4, 5, 10, 50, 100, 777, 1_000, 3_000] {
        let mut counts = vec![0u64; x as usize];
        let small: Vec<usize> = primes.iter().copied().filter(|&p| p as u64 <= x).collect();
        for (i, &p) in small.iter().enumerate() {
            for &q in &small[i + 1..] {
                counts[q - p] += 1;
            }
        }
        let max = *counts.iter().max().unwrap();
        let winners: Vec<DifferenceSet> = (1..x)
            .filter(|&d| counts[d as usize] == max)
            .map(|d| set(&[d]))
            .collect();
        let r = find_pdc(&t, x, 1, SearchMode::Exhaustive).unwrap();
        assert_eq!((r.max_count, r.winners.clone()), (max, winners), "x={x}");
        for w in &r.winners {
            assert_eq!(count_tuple_oracle(&t, x, w).unwrap().count, r.max_count);
        }
    }
}

#[test]
fn triple_champion_full_sweep_at_2000() {
    let x = 2_000u64;
    let t = PrimeTable::build(x).unwrap();
    let r = find_pdc(&t, x, 2, SearchMode::Exhaustive).unwrap();
    let mut best = 0;
    let mut winners = Vec::new();
    for a in 1..x {
        for b in a + 1..x {
            let d = set(&[a, b]);
            let c = count_tuple(&t, x, &d).unwrap().count;
            if c > best {
                best = c;
                winners.clear();
            }
            if c == best {
                winners.push(d);
            }
        }
    }
    assert_eq!((r.max_count, r.winners.clone()), (best, winners));
    for w in &r.winners {
        assert_eq!(count_tuple_oracle(&t, x, w).unwrap().count, best);
    }
}

#[test]
fn winners_do_not_depend_on_thread_count() {
    let t = PrimeTable::build(5_000).unwrap();
    let run = |threads: usize| {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap();
        pool.install(|| {
            [
                (1_500u64, 2usize, SearchMode::Exhaustive),
                (600, 3, SearchMode::Exhaustive),
                (5_000, 3, SearchMode::Pruned),
            ]
            .map(|(x, k, mode)| find_pdc(&t, x, k, mode).unwrap())
        })
    };
    let serial = run(1);
    assert_eq!(serial, run(3));
    assert_eq!(serial, run(8));
}

#[test]
fn pruned_counts_are_exact() {
    let t = PrimeTable::build(50_000).unwrap();
    let config = SearchConfig {
        runners_up: 10,
        ..Default::default()
    };
    for k in 1..=3 {
        let r = find_pdc_with(&t, 50_000, k, SearchMode::Pruned, &config).unwrap();
        for w in &r.winners {
            assert_eq!(
                count_tuple_oracle(&t, 50_000, w).unwrap().count,
                r.max_count
            );
        }
        for c in &r.runners_up {
            assert_eq!(
                count_tuple_oracle(&t, 50_000, &c.set).unwrap().count,
                c.count
            );
        }
    }
}

#[test]
fn jumping_champions_over_a_grid() {
    let t = PrimeTable::build(100_000).unwrap();
    let primes = naive_primes(100_000);
    for x in [3u64, 30, 100, 1_000, 100_000] {
        let mut gaps: BTreeMap<u64, u64> = BTreeMap::new();
        for w in primes.windows(2).filter(|w| w[1] as u64 <= x) {
            *gaps.entry((w[1] - w[0]) as u64).or_default() += 1;
        }
        let max = *gaps.values().max().unwrap();
        let expected: Vec<_> = gaps
            .iter()
            .filter(|(_, &c)| c == max)
            .map(|(&d, _)| set(&[d]))
            .collect();
        let r = jumping_champion(&t, x).unwrap();
        assert_eq!((r.winners.clone(), r.max_count), (expected, max), "x={x}");
    }
}

#[test]
fn champion_structure_across_decades() {
    let t = PrimeTable::build(1_000_000).unwrap();
    let grid = [1_000u64, 10_000, 100_000, 1_000_000];
    let records = champion_scan(
        &t,
        &grid,
        1,
        SearchMode::Exhaustive,
        &SearchConfig::default(),
    )
    .unwrap();
    let gcds: Vec<u64> = records.iter().map(|r| r.gcd().unwrap()).collect();
    assert!(gcds.windows(2).all(|w| w[0] <= w[1]), "{gcds:?}");
    for r in &records {
        for p in profile(r, &t).unwrap() {
            assert!(p.thm12_lhs <= p.thm12_rhs + 1.0);
            assert!(p.squarefree, "x={} d*={}", p.x, p.d_star);
            if p.x >= 10_000 {
                assert_eq!(p.d_star % 6, 0);
                assert!(p.below_half_x);
            }
            assert!(p.omega >= 1 && p.reciprocal_sum <= p.reciprocal_sum_cap);
            assert!(verdicts(&p, 1.0).iter().all(|v| !v.failed_assert()));
        }
    }
    let report = verify_records(&records, &t, 1.0).unwrap();
    assert!(report.passed);
    assert!(report.reciprocal_sum_decreases.is_empty());
}
