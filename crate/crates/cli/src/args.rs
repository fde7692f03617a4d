use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use pdc_core::champions::SearchMode;
use pdc_core::DifferenceSet;
use serde::{Deserialize, Serialize};

#[derive(Debug, Parser)]
#[command(name = "pdc", version, about = "Prime difference champion experiments")]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalArgs,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Args)]
pub struct GlobalArgs {
    /// Worker threads; defaults to the available parallelism.
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// Sieve cache directory; overrides PDC_CACHE_DIR.
    #[arg(long, global = true)]
    pub cache_dir: Option<PathBuf>,
    /// Always sieve from scratch and leave the cache untouched.
    #[arg(long, global = true)]
    pub no_cache: bool,
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
    /// Write the result here instead of stdout.
    #[arg(long, short, global = true)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Text,
    Csv,
    Json,
}

/// Accepts plain integers as well as `1e6` and `10^6`.
pub fn parse_count(s: &str) -> Result<u64, String> {
    let s = s.trim().replace('_', "");
    if let Ok(v) = s.parse::<u64>() {
        return Ok(v);
    }
    let (mantissa, exponent) = s
        .split_once(['e', 'E'])
        .map(|(m, e)| (m.to_string(), e.to_string()))
        .or_else(|| {
            s.split_once("10^").map(|(m, e)| {
                (
                    if m.is_empty() {
                        "1".into()
                    } else {
                        m.trim_end_matches('*').to_string()
                    },
                    e.to_string(),
                )
            })
        })
        .ok_or_else(|| format!("not a nonnegative integer: {s:?}"))?;
    let m: u64 = mantissa
        .parse()
        .map_err(|_| format!("bad mantissa in {s:?}"))?;
    let e: u32 = exponent
        .parse()
        .map_err(|_| format!("bad exponent in {s:?}"))?;
    10u64
        .checked_pow(e)
        .and_then(|p| p.checked_mul(m))
        .ok_or_else(|| format!("{s:?} does not fit in 64 bits"))
}

fn parse_set(s: &str) -> Result<DifferenceSet, String> {
    s.parse::<DifferenceSet>().map_err(|e| e.to_string())
}

/// A finite set of integers that may contain 0.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct RawSet(pub Vec<u64>);

fn parse_raw_set(s: &str) -> Result<RawSet, String> {
    let inner = s.trim().trim_start_matches('{').trim_end_matches('}');
    let values = inner
        .split([',', ';'])
        .filter(|t| !t.trim().is_empty())
        .map(|t| {
            t.trim()
                .parse::<u64>()
                .map_err(|_| format!("bad element {t:?} in {s:?}"))
        })
        .collect::<Result<Vec<_>, _>>()?;
    if values.is_empty() {
        return Err("set must not be empty".into());
    }
    Ok(RawSet(values))
}

fn parse_mode(s: &str) -> Result<SearchMode, String> {
    s.parse().map_err(|e: pdc_core::Error| e.to_string())
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
pub struct ChampionArgs {
    /// Single bound x.
    #[arg(long, value_parser = parse_count, conflicts_with = "grid")]
    pub x: Option<u64>,
    /// Ascending comma-separated list of bounds.
    #[arg(long, value_parser = parse_count, value_delimiter = ',', num_args = 0..)]
    pub grid: Option<Vec<u64>>,
    #[arg(long, default_value_t = 1)]
    pub k: usize,
    #[arg(long, value_parser = parse_mode, default_value = "exhaustive")]
    pub mode: SearchMode,
    /// Champions of consecutive-prime gaps instead of all pairs.
    #[arg(long)]
    pub jumping: bool,
    #[arg(long, default_value_t = 5)]
    pub runners_up: usize,
    /// Largest exhaustive x for k = 2, 3, 4, … (comma-separated).
    #[arg(long, value_parser = parse_count, value_delimiter = ',')]
    pub exhaustive_limits: Option<Vec<u64>>,
    /// Pruned mode: largest m in the gcd candidates m·p_n#.
    #[arg(long, default_value_t = 30)]
    pub multiplier_max: u64,
    /// Pruned mode: reduced patterns lie in {1..B}; defaults to 12·k.
    #[arg(long)]
    pub pattern_bound: Option<u64>,
}

#[derive(Debug, Clone, PartialEq, Subcommand, Serialize, Deserialize)]
#[serde(tag = "command", rename_all = "lowercase")]
pub enum Command {
    /// Sieve up to x (using the cache) and report π(x).
    Sieve {
        #[arg(long, value_parser = parse_count)]
        x: u64,
    },
    /// Histogram of gaps between consecutive primes up to x.
    Gaps {
        #[arg(long, value_parser = parse_count)]
        x: u64,
    },
    /// Counts of prime pairs p < p' <= x by difference d <= d_max.
    Histogram {
        #[arg(long, value_parser = parse_count)]
        x: u64,
        /// Defaults to x.
        #[arg(long, value_parser = parse_count)]
        d_max: Option<u64>,
    },
    /// Number of primes p <= x - d_k with every p + d_i prime.
    Count {
        #[arg(long, value_parser = parse_count)]
        x: u64,
        #[arg(long, value_parser = parse_set)]
        set: DifferenceSet,
    },
    /// Champion search over one x or a grid.
    Champions(ChampionArgs),
    /// Singular series of a finite set of integers (include 0 yourself).
    Singular {
        #[arg(long, value_parser = parse_raw_set)]
        set: RawSet,
        #[arg(long, default_value_t = 1e-6)]
        tol: f64,
    },
    /// Hardy–Littlewood main term next to the exact count.
    Predict {
        #[arg(long, value_parser = parse_count)]
        x: u64,
        #[arg(long, value_parser = parse_set)]
        set: DifferenceSet,
        #[arg(long, default_value_t = 1e-6)]
        tol: f64,
    },
    /// Residue-class moments of π(x; q, a) and their identities.
    Moments {
        #[arg(long, value_parser = parse_count)]
        x: u64,
        #[arg(long, value_parser = parse_count)]
        q: u64,
        #[arg(long, default_value_t = 2)]
        k: u32,
    },
    /// Champion search followed by the structure verdicts.
    Verify {
        #[command(flatten)]
        #[serde(flatten)]
        search: ChampionArgs,
        #[arg(long, default_value_t = pdc_core::verify::DEFAULT_SLACK)]
        slack: f64,
    },
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Sieve { .. } => "sieve",
            Command::Gaps { .. } => "gaps",
            Command::Histogram { .. } => "histogram",
            Command::Count { .. } => "count",
            Command::Champions(_) => "champions",
            Command::Singular { .. } => "singular",
            Command::Predict { .. } => "predict",
            Command::Moments { .. } => "moments",
            Command::Verify { .. } => "verify",
        }
    }
}
