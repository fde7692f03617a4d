use pdc_core::champions::{
    champion_scan, jumping_champion_with, write_records_csv, ChampionRecord,
};
use pdc_core::counting::{count_tuple, pair_difference_histogram, write_histogram_csv};
use pdc_core::hardy_littlewood::predict;
use pdc_core::moments::moment_report;
use pdc_core::singular::singular_series;
use pdc_core::verify::verify_records;
use pdc_core::{counting::gap_histogram, PrimeTable, Result};
use serde::Serialize;
use serde_json::{json, Value};

use crate::args::{ChampionArgs, Command, Format};
use crate::cache::load_table;
use crate::config::RunConfig;
use crate::output::{key_value_lines, round_reals};

/// Rendered output of a run and whether an assert-class check failed.
pub struct Outcome {
    pub body: String,
    pub assert_failed: bool,
}

impl Outcome {
    fn ok(body: String) -> Self {
        Self {
            body,
            assert_failed: false,
        }
    }
}

fn table(config: &RunConfig, bound: u64) -> Result<PrimeTable> {
    load_table(bound.max(2), config.cache_dir.as_deref())
}

fn envelope<T: Serialize>(config: &RunConfig, result: &T) -> Result<String> {
    let value = json!({ "config": config, "result": serde_json::to_value(result)? });
    Ok(serde_json::to_string_pretty(&round_reals(value))? + "\n")
}

fn render<T: Serialize>(config: &RunConfig, result: &T) -> Result<String> {
    match config.format {
        Format::Json => envelope(config, result),
        _ => Ok(key_value_lines(&round_reals(serde_json::to_value(result)?))),
    }
}

fn csv_string(write: impl FnOnce(&mut Vec<u8>) -> Result<()>) -> Result<String> {
    let mut buf = Vec::new();
    write(&mut buf)?;
    Ok(String::from_utf8(buf).expect("CSV output is UTF-8"))
}

fn search(
    config: &RunConfig,
    args: &ChampionArgs,
) -> Result<(Vec<ChampionRecord>, Option<PrimeTable>)> {
    let bounds = args.bounds();
    let Some(&largest) = bounds.last() else {
        return Ok((Vec::new(), None));
    };
    let table = table(config, largest)?;
    let search = args.search_config();
    let records = if args.jumping {
        bounds
            .iter()
            .map(|&x| jumping_champion_with(&table, x, &search))
            .collect::<Result<Vec<_>>>()?
    } else {
        champion_scan(&table, &bounds, args.k, args.mode, &search)?
    };
    Ok((records, Some(table)))
}

pub fn run(config: &RunConfig) -> Result<Outcome> {
    let body = match &config.command {
        Command::Sieve { x } => {
            let t = table(config, *x)?;
            let result = json!({
                "x": x,
                "pi": t.pi(*x)?,
                "largest_prime": t.primes().last(),
            });
            render(config, &result)?
        }
        Command::Gaps { x } => {
            let t = table(config, *x)?;
            let hist = gap_histogram(&t, *x)?;
            match config.format {
                Format::Json => envelope(config, &hist)?,
                _ => csv_string(|w| hist.write_csv(w))?,
            }
        }
        Command::Histogram { x, d_max } => {
            let t = table(config, *x)?;
            let d_max = d_max.unwrap_or(*x);
            let counts = pair_difference_histogram(&t, *x, d_max)?;
            match config.format {
                Format::Json => {
                    let rows: Vec<Value> = (1..counts.len())
                        .map(|d| json!({"d": d, "count": counts[d]}))
                        .collect();
                    envelope(config, &json!({"x": x, "d_max": d_max, "counts": rows}))?
                }
                _ => csv_string(|w| {
                    write_histogram_csv(w, (1..counts.len()).map(|d| (d as u64, counts[d])))
                })?,
            }
        }
        Command::Count { x, set } => {
            let t = table(config, *x)?;
            let c = count_tuple(&t, *x, set)?;
            match config.format {
                Format::Json => envelope(
                    config,
                    &json!({"x": x, "set": set, "count": c.count, "degenerate": c.degenerate}),
                )?,
                _ => format!("{}\n", c.count),
            }
        }
        Command::Champions(args) => {
            let (records, _) = search(config, args)?;
            match config.format {
                Format::Json => envelope(config, &records)?,
                _ => csv_string(|w| write_records_csv(w, &records))?,
            }
        }
        Command::Singular { set, tol } => {
            let s = singular_series(&set.0, *tol)?;
            render(
                config,
                &json!({"set": set, "value": s.value, "tail_bound": s.tail_bound, "truncation_prime": s.truncation_prime, "is_zero": s.is_zero}),
            )?
        }
        Command::Predict { x, set, tol } => {
            let t = table(config, *x)?;
            render(config, &predict(&t, *x, set, *tol)?)?
        }
        Command::Moments { x, q, k } => {
            let t = table(config, *x)?;
            render(config, &moment_report(&t, *x, *q, *k)?)?
        }
        Command::Verify {
            search: args,
            slack,
        } => {
            let (records, table) = search(config, args)?;
            let Some(table) = table else {
                return Ok(Outcome::ok(render(
                    config,
                    &json!({"records": [], "passed": true}),
                )?));
            };
            let report = verify_records(&records, &table, *slack)?;
            let body = match config.format {
                Format::Json => envelope(config, &json!({"records": records, "report": report}))?,
                _ => report.render_table(),
            };
            return Ok(Outcome {
                body,
                assert_failed: !report.passed,
            });
        }
    };
    Ok(Outcome::ok(body))
}
