use std::path::PathBuf;

use pdc_core::champions::{SearchConfig, SearchMode};
use pdc_core::sieve::MAX_BOUND;
use serde::{Deserialize, Serialize};

use crate::args::{ChampionArgs, Cli, Command, Format};

/// Everything that determines a run's output, embedded in JSON results.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    #[serde(flatten)]
    pub command: Command,
    pub format: Format,
    pub output: Option<PathBuf>,
    /// `None` when caching is disabled.
    pub cache_dir: Option<PathBuf>,
    pub threads: usize,
}

pub const CACHE_ENV: &str = "PDC_CACHE_DIR";

fn default_format(command: &Command) -> Format {
    match command {
        Command::Gaps { .. } | Command::Histogram { .. } | Command::Champions(_) => Format::Csv,
        _ => Format::Text,
    }
}

fn resolve_cache_dir(cli: &Cli) -> Option<PathBuf> {
    if cli.global.no_cache {
        return None;
    }
    cli.global
        .cache_dir
        .clone()
        .or_else(|| {
            std::env::var_os(CACHE_ENV)
                .filter(|v| !v.is_empty())
                .map(PathBuf::from)
        })
        .or_else(|| Some(std::env::temp_dir().join("pdc-cache")))
}

impl RunConfig {
    pub fn from_cli(cli: Cli) -> Result<Self, String> {
        let threads = match cli.global.threads {
            Some(0) => return Err("--threads must be at least 1".into()),
            Some(n) => n,
            None => std::thread::available_parallelism().map_or(1, |n| n.get()),
        };
        let cache_dir = resolve_cache_dir(&cli);
        let format = cli
            .global
            .format
            .unwrap_or_else(|| default_format(&cli.command));
        let config = RunConfig {
            command: cli.command,
            format,
            output: cli.global.output,
            cache_dir,
            threads,
        };
        config.validate()?;
        Ok(config)
    }

    /// Rejects invalid combinations before any computation starts.
    pub fn validate(&self) -> Result<(), String> {
        let csv_ok = matches!(
            self.command,
            Command::Gaps { .. } | Command::Histogram { .. } | Command::Champions(_)
        );
        if self.format == Format::Csv && !csv_ok {
            return Err(format!(
                "{} has no CSV output; use text or json",
                self.command.name()
            ));
        }
        match &self.command {
            Command::Sieve { x } | Command::Gaps { x } | Command::Count { x, .. } => {
                check_bound(*x)
            }
            Command::Histogram { x, d_max } => {
                check_bound(*x)?;
                match d_max {
                    Some(d) if d > x => Err(format!("--d-max {d} exceeds --x {x}")),
                    _ => Ok(()),
                }
            }
            Command::Singular { tol, .. } => check_tolerance(*tol),
            Command::Predict { x, tol, .. } => {
                check_bound(*x)?;
                check_tolerance(*tol)
            }
            Command::Moments { x, q, k } => {
                check_bound(*x)?;
                if *q == 0 {
                    return Err("--q must be at least 1".into());
                }
                if *k == 0 {
                    return Err("--k must be at least 1".into());
                }
                Ok(())
            }
            Command::Champions(search) => check_search(search),
            Command::Verify { search, slack } => {
                if !(*slack >= 0.0 && slack.is_finite()) {
                    return Err(format!(
                        "--slack must be a finite nonnegative number, got {slack}"
                    ));
                }
                check_search(search)
            }
        }
    }
}

fn check_bound(x: u64) -> Result<(), String> {
    if x > MAX_BOUND {
        return Err(format!("x = {x} exceeds the supported bound {MAX_BOUND}"));
    }
    Ok(())
}

fn check_tolerance(tol: f64) -> Result<(), String> {
    if !(tol > 0.0 && tol < 1.0) {
        return Err(format!("--tol must lie in (0, 1), got {tol}"));
    }
    Ok(())
}

impl ChampionArgs {
    /// The requested bounds, one per record.
    pub fn bounds(&self) -> Vec<u64> {
        match (&self.x, &self.grid) {
            (Some(x), _) => vec![*x],
            (None, Some(grid)) => grid.clone(),
            (None, None) => Vec::new(),
        }
    }

    pub fn search_config(&self) -> SearchConfig {
        let mut config = SearchConfig {
            runners_up: self.runners_up,
            multiplier_max: self.multiplier_max,
            pattern_bound: self.pattern_bound,
            ..SearchConfig::default()
        };
        if let Some(limits) = &self.exhaustive_limits {
            config.exhaustive_limits = limits.clone();
        }
        config
    }
}

fn check_search(search: &ChampionArgs) -> Result<(), String> {
    if search.x.is_none() && search.grid.is_none() {
        return Err("give --x or --grid".into());
    }
    let bounds = search.bounds();
    if bounds.windows(2).any(|w| w[0] >= w[1]) {
        return Err("--grid must be strictly ascending".into());
    }
    for &x in &bounds {
        check_bound(x)?;
    }
    if search.k == 0 {
        return Err("--k must be at least 1".into());
    }
    if search.jumping && (search.k != 1 || search.mode != SearchMode::Exhaustive) {
        return Err("--jumping needs --k 1 and exhaustive mode".into());
    }
    if search.mode == SearchMode::Pruned
        && search.pattern_bound.is_some_and(|b| b < search.k as u64)
    {
        return Err("--pattern-bound must be at least k".into());
    }
    if search.mode == SearchMode::Exhaustive {
        if let (Some(limit), Some(&largest)) = (
            search.search_config().exhaustive_limit(search.k),
            bounds.last(),
        ) {
            if largest > limit {
                return Err(format!(
                    "exhaustive search for k = {} is limited to x <= {limit}; use --mode pruned or --exhaustive-limits",
                    search.k
                ));
            }
        }
    }
    Ok(())
}
