mod args;
mod cache;
mod commands;
mod config;
mod output;

use std::io::Write;
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::Parser;
use pdc_core::Error;
use serde_json::json;

use crate::args::Cli;
use crate::config::RunConfig;

const EXIT_FAILURE: u8 = 1;
const EXIT_USAGE: u8 = 2;
const EXIT_ASSERT: u8 = 3;

fn error_kind(e: &Error) -> &'static str {
    match e {
        Error::Range(_) => "range",
        Error::Domain(_) => "domain",
        Error::Resource { .. } => "resource",
        Error::InsufficientPrimes(_) => "insufficient_primes",
        Error::Overflow(_) => "overflow",
        Error::IdentityViolation(_) => "identity_violation",
        Error::Format(_) => "format",
        Error::Io(_) => "io",
        Error::Json(_) => "json",
    }
}

fn report_error(kind: &str, message: &str) {
    eprintln!(
        "{}",
        json!({ "error": { "kind": kind, "message": message } })
    );
}

fn emit(config: &RunConfig, body: &str) -> std::io::Result<()> {
    match &config.output {
        Some(path) => std::fs::write(path, body),
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(body.as_bytes())?;
            out.flush()
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => ExitCode::SUCCESS,
                _ => ExitCode::from(EXIT_USAGE),
            };
        }
    };
    let config = match RunConfig::from_cli(cli) {
        Ok(c) => c,
        Err(message) => {
            report_error("usage", &message);
            return ExitCode::from(EXIT_USAGE);
        }
    };
    if let Err(e) = rayon::ThreadPoolBuilder::new()
        .num_threads(config.threads)
        .build_global()
    {
        report_error("threads", &e.to_string());
        return ExitCode::from(EXIT_FAILURE);
    }
    let outcome = match commands::run(&config) {
        Ok(o) => o,
        Err(e) => {
            report_error(error_kind(&e), &e.to_string());
            return ExitCode::from(EXIT_FAILURE);
        }
    };
    if let Err(e) = emit(&config, &outcome.body) {
        report_error("io", &e.to_string());
        return ExitCode::from(EXIT_FAILURE);
    }
    if outcome.assert_failed {
        ExitCode::from(EXIT_ASSERT)
    } else {
        ExitCode::SUCCESS
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn config(argv: &[&str]) -> Result<RunConfig, String> {
        let cli = Cli::try_parse_from(std::iter::once("pdc").chain(argv.iter().copied()))
            .map_err(|e| e.to_string())?;
        RunConfig::from_cli(cli)
    }

    #[test]
    fn config_round_trips_through_json() {
        for argv in [
            &["champions", "--x", "50", "--k", "1", "--mode", "exhaustive"][..],
            &[
                "verify",
                "--grid",
                "1e3,1e4",
                "--slack",
                "0.5",
                "--threads",
                "2",
            ],
            &[
                "singular", "--set", "0,2", "--tol", "1e-6", "--format", "json",
            ],
            &["count", "--x", "20", "--set", "2,6", "--no-cache"],
            &["histogram", "--x", "100", "--d-max", "10"],
            &["moments", "--x", "1000", "--q", "30", "--k", "3"],
        ] {
            let c = config(argv).unwrap();
            let text = serde_json::to_string(&c).unwrap();
            let back: RunConfig = serde_json::from_str(&text).unwrap();
            assert_eq!(back, c, "{text}");
        }
    }

    #[test]
    fn invalid_combinations_are_rejected() {
        assert!(config(&["champions", "--k", "1"]).is_err());
        assert!(config(&["champions", "--x", "1e6", "--k", "3"]).is_err());
        assert!(config(&["champions", "--grid", "100,50"]).is_err());
        assert!(config(&["champions", "--x", "100", "--k", "2", "--jumping"]).is_err());
        assert!(config(&["singular", "--set", "0,2", "--tol", "2"]).is_err());
        assert!(config(&["singular", "--set", "0,2", "--format", "csv"]).is_err());
        assert!(config(&["verify", "--x", "100", "--slack", "-1"]).is_err());
        assert!(config(&["histogram", "--x", "10", "--d-max", "11"]).is_err());
        assert!(config(&["count", "--x", "10", "--threads", "0", "--set", "2"]).is_err());
        assert!(config(&["champions", "--x", "1e6", "--k", "3", "--mode", "pruned"]).is_ok());
    }
}
