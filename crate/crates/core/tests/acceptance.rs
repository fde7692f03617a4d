//! End-to-end acceptance checks. Prints one line per criterion and exits
//! nonzero if any fails.

use std::process::ExitCode;
use std::time::{Duration, Instant};

use pdc_core::champions::{find_pdc, jumping_champion, SearchMode};
use pdc_core::counting::{count_tuple, count_tuple_oracle};
use pdc_core::hardy_littlewood::{li_k, predict};
use pdc_core::moments::{verify_power_identity, verify_tuple_link};
use pdc_core::singular::{
    mertens_product, singular_series, singular_series_truncated, EULER_GAMMA,
};
use pdc_core::verify::{profile, verdicts, DEFAULT_SLACK};
use pdc_core::{DifferenceSet, PrimeTable, Result};
use rand::rngs::StdRng;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};

struct Outcome {
    passed: bool,
    detail: String,
    /// Everything the criterion computed, for the determinism comparison.
    fingerprint: String,
}

struct Criterion {
    name: &'static str,
    limit: Duration,
    run: fn() -> Result<Outcome>,
}

fn set(v: &[u64]) -> DifferenceSet {
    DifferenceSet::new(v.to_vec()).unwrap()
}

fn naive_sieve(n: usize) -> Vec<bool> {
    let mut is = vec![true; n + 1];
    is[0] = false;
    if n >= 1 {
        is[1] = false;
    }
    let mut i = 2;
    while i * i <= n {
        if is[i] {
            for j in (i * i..=n).step_by(i) {
                is[j] = false;
            }
        }
        i += 1;
    }
    is
}

fn oracle_equivalence() -> Result<Outcome> {
    let table = PrimeTable::build(10_000)?;
    let mut rng = StdRng::seed_from_u64(0x5eed_0001);
    let pool: Vec<u64> = (1..=60).collect();
    let mut mismatches = Vec::new();
    let mut fingerprint = String::new();
    for _ in 0..200 {
        let x = rng.gen_range(1..=10_000u64);
        let k = rng.gen_range(1..=3usize);
        let d = DifferenceSet::new(
            pool.choose_multiple(&mut rng, k)
                .copied()
                .collect::<Vec<_>>(),
        )?;
        let fast = count_tuple(&table, x, &d)?;
        let slow = count_tuple_oracle(&table, x, &d)?;
        fingerprint.push_str(&format!("{x}:{d}:{};", fast.count));
        if fast != slow {
            mismatches.push(format!("x={x} D={d}: {} vs {}", fast.count, slow.count));
        }
    }
    Ok(Outcome {
        passed: mismatches.is_empty(),
        detail: if mismatches.is_empty() {
            "200/200 random cases agree".into()
        } else {
            mismatches.join(", ")
        },
        fingerprint,
    })
}

fn champion_ground_truth() -> Result<Outcome> {
    let table = PrimeTable::build(100)?;
    let pdc = find_pdc(&table, 50, 1, SearchMode::Exhaustive)?;
    let jc = jumping_champion(&table, 20)?;
    let passed = pdc.winners == vec![set(&[6])]
        && pdc.max_count == 9
        && jc.winners == vec![set(&[2])]
        && jc.max_count == 4;
    Ok(Outcome {
        passed,
        detail: format!(
            "find_pdc(50,1) = {:?} x{}; jumping_champion(20) = {:?} x{}",
            pdc.winners
                .iter()
                .map(ToString::to_string)
                .collect::<Vec<_>>(),
            pdc.max_count,
            jc.winners
                .iter()
                .map(ToString::to_string)
                .collect::<Vec<_>>(),
            jc.max_count
        ),
        fingerprint: serde_json::to_string(&(pdc, jc))?,
    })
}

fn twin_primes() -> Result<Outcome> {
    const X: u64 = 1_000_000;
    let table = PrimeTable::build(X)?;
    let naive = naive_sieve(X as usize);
    let oracle = (2..=X as usize - 2)
        .filter(|&p| naive[p] && naive[p + 2])
        .count() as u64;
    let prediction = predict(&table, X, &set(&[2]), 1e-6)?;
    let exact = prediction.exact.unwrap_or(0);
    let ratio = exact as f64 / prediction.predicted;
    let passed = exact == oracle && (ratio - 1.0).abs() < 0.03;
    Ok(Outcome {
        passed,
        detail: format!(
            "exact {exact}, oracle {oracle}, predicted {:.10}, ratio {ratio:.6}",
            prediction.predicted
        ),
        fingerprint: serde_json::to_string(&prediction)?,
    })
}

fn singular_series_checks() -> Result<Outcome> {
    let adjacent = singular_series(&[0, 1], 1e-6)?;
    let single = singular_series(&[0], 1e-6)?;
    let base = singular_series_truncated(&[0, 2], 2_000_000)?;
    let doubled = singular_series_truncated(&[0, 2], 4_000_000)?;
    let drift = (doubled.value / base.value - 1.0).abs();
    let passed = adjacent.is_zero && adjacent.value == 0.0 && single.value == 1.0 && drift < 1e-6;
    Ok(Outcome {
        passed,
        detail: format!(
            "S(0,1) = {}, S(0) = {}, S(0,2) = {:.12} drift {drift:.3e} under doubling",
            adjacent.value, single.value, doubled.value
        ),
        fingerprint: serde_json::to_string(&(adjacent, single, base, doubled))?,
    })
}

fn moment_identities() -> Result<Outcome> {
    let table = PrimeTable::build(10_000)?;
    let mut failures = Vec::new();
    let mut checks = 0;
    let mut fingerprint = String::new();
    for x in [100u64, 1_000, 10_000] {
        for q in [1u64, 2, 3, 5, 30] {
            for m in [2u32, 3, 4] {
                let c = verify_power_identity(&table, x, q, m)?;
                checks += 1;
                fingerprint.push_str(&format!("{}={};", c.lhs, c.rhs));
                if c.residual != 0 {
                    failures.push(format!("power x={x} q={q} m={m} residual {}", c.residual));
                }
            }
        }
    }
    for x in [10u64, 50, 100, 250, 500, 1_000] {
        for q in [1u64, 2, 3, 5] {
            for k in [2u32, 3] {
                let c = verify_tuple_link(&table, x, q, k)?;
                checks += 1;
                fingerprint.push_str(&format!("{}={};", c.lhs, c.rhs));
                if !c.holds {
                    failures.push(format!("link x={x} q={q} k={k}: {} vs {}", c.lhs, c.rhs));
                }
            }
        }
    }
    Ok(Outcome {
        passed: failures.is_empty(),
        detail: if failures.is_empty() {
            format!("{checks} identities exact")
        } else {
            failures.join(", ")
        },
        fingerprint,
    })
}

fn mertens() -> Result<Outcome> {
    let mut worst: f64 = 0.0;
    let mut parts = Vec::new();
    for y in [1e4, 1e5, 1e6] {
        let ratio = mertens_product(y)? / (EULER_GAMMA.exp() * y.ln());
        worst = worst.max((ratio - 1.0).abs());
        parts.push(format!("y={y:e}: {ratio:.6}"));
    }
    Ok(Outcome {
        passed: worst < 0.05,
        detail: parts.join(", "),
        fingerprint: parts.join(";"),
    })
}

fn quadrature() -> Result<Outcome> {
    let mut worst: f64 = 0.0;
    let mut fingerprint = String::new();
    for x in [1e3, 1e4, 1e5] {
        for k in [1u32, 2, 3] {
            let tol = 1e-12 * x;
            let lhs = li_k(x, k, tol)?;
            let by_parts = x / x.ln().powi(k as i32) - 2.0 / 2f64.ln().powi(k as i32)
                + k as f64 * li_k(x, k + 1, tol)?;
            worst = worst.max((lhs - by_parts).abs() / lhs.abs());
            fingerprint.push_str(&format!("{lhs:e};"));
        }
    }
    Ok(Outcome {
        passed: worst < 1e-6,
        detail: format!("worst relative defect {worst:.3e} over k = 1..3"),
        fingerprint,
    })
}

struct ChampionFacts {
    thm12: Vec<String>,
    thm12_ok: bool,
    structure: Vec<String>,
    structure_ok: bool,
    fingerprint: String,
}

fn champion_facts() -> Result<ChampionFacts> {
    let table = PrimeTable::build(1_000_000)?;
    let mut facts = ChampionFacts {
        thm12: vec![],
        thm12_ok: true,
        structure: vec![],
        structure_ok: true,
        fingerprint: String::new(),
    };
    for x in [1_000u64, 10_000, 100_000, 1_000_000] {
        let record = find_pdc(&table, x, 1, SearchMode::Exhaustive)?;
        facts.fingerprint.push_str(&serde_json::to_string(&record)?);
        for p in profile(&record, &table)? {
            let holds = p.thm12_lhs <= p.thm12_rhs + DEFAULT_SLACK;
            facts.thm12_ok &= holds;
            facts.thm12.push(format!(
                "x={x} d*={} {:.4}<={:.4}",
                p.d_star,
                p.thm12_lhs,
                p.thm12_rhs + DEFAULT_SLACK
            ));
            if x >= 10_000 {
                facts.structure_ok &= p.squarefree && p.d_star % 6 == 0;
            }
            facts.structure.push(format!(
                "x={x} d*={} squarefree={} 1/p-sum={:.4} logloglog={:.4}",
                p.d_star,
                p.squarefree,
                p.reciprocal_sum,
                p.logloglog_x.unwrap_or(f64::NAN)
            ));
            facts
                .fingerprint
                .push_str(&serde_json::to_string(&verdicts(&p, DEFAULT_SLACK))?);
        }
    }
    Ok(facts)
}

fn few_primes_not_dividing() -> Result<Outcome> {
    let f = champion_facts()?;
    Ok(Outcome {
        passed: f.thm12_ok,
        detail: f.thm12.join("; "),
        fingerprint: f.fingerprint,
    })
}

fn champion_structure() -> Result<Outcome> {
    let f = champion_facts()?;
    Ok(Outcome {
        passed: f.structure_ok,
        detail: f.structure.join("; "),
        fingerprint: f.fingerprint,
    })
}

const CRITERIA: [Criterion; 9] = [
    Criterion {
        name: "oracle equivalence",
        limit: Duration::from_secs(10),
        run: oracle_equivalence,
    },
    Criterion {
        name: "champion ground truth",
        limit: Duration::from_secs(1),
        run: champion_ground_truth,
    },
    Criterion {
        name: "twin primes vs prediction",
        limit: Duration::from_secs(30),
        run: twin_primes,
    },
    Criterion {
        name: "singular series",
        limit: Duration::from_secs(5),
        run: singular_series_checks,
    },
    Criterion {
        name: "moment identities",
        limit: Duration::from_secs(60),
        run: moment_identities,
    },
    Criterion {
        name: "mertens product",
        limit: Duration::from_secs(10),
        run: mertens,
    },
    Criterion {
        name: "li integration by parts",
        limit: Duration::from_secs(1),
        run: quadrature,
    },
    Criterion {
        name: "few primes not dividing d*",
        limit: Duration::from_secs(60),
        run: few_primes_not_dividing,
    },
    Criterion {
        name: "d* squarefree, divisible by 6",
        limit: Duration::from_secs(60),
        run: champion_structure,
    },
];

fn run_all(threads: usize, report: bool) -> (bool, Vec<String>) {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .expect("thread pool");
    pool.install(|| {
        let mut all_ok = true;
        let mut prints = Vec::new();
        for (i, c) in CRITERIA.iter().enumerate() {
            let start = Instant::now();
            let result = (c.run)();
            let elapsed = start.elapsed();
            let (ok, detail, print) = match result {
                Ok(o) => (o.passed && elapsed <= c.limit, o.detail, o.fingerprint),
                Err(e) => (false, format!("error: {e}"), String::new()),
            };
            if report {
                println!(
                    "criterion {:>2} {} {}: {detail} [{:.2?} of {:?}]",
                    i + 1,
                    if ok { "PASS" } else { "FAIL" },
                    c.name,
                    elapsed,
                    c.limit
                );
            }
            all_ok &= ok;
            prints.push(print);
        }
        (all_ok, prints)
    })
}

fn main() -> ExitCode {
    let (ok, serial) = run_all(1, true);
    let wide = std::thread::available_parallelism()
        .map_or(1, |n| n.get())
        .max(4);
    let (_, parallel) = run_all(wide, false);
    let same = serial == parallel;
    println!(
        "criterion 10 {} determinism: outputs of criteria 1-9 {} with 1 and {wide} threads",
        if same { "PASS" } else { "FAIL" },
        if same { "identical" } else { "differ" }
    );
    if ok && same {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
