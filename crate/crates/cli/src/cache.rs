use std::fs::{self, File};
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use pdc_core::sieve::SieveOptions;
use pdc_core::{PrimeTable, Result};

pub fn cache_path(dir: &Path, bound: u64) -> PathBuf {
    dir.join(format!("sieve-{bound}.pdcs"))
}

/// Loads the sieve for `bound` from `dir`, or builds and stores it.
///
/// A damaged cache file is reported on stderr and replaced; failing to
/// write the cache never fails the run.
pub fn load_table(bound: u64, dir: Option<&Path>) -> Result<PrimeTable> {
    let Some(dir) = dir.filter(|_| bound >= 2) else {
        return PrimeTable::build(bound);
    };
    let path = cache_path(dir, bound);
    if path.exists() {
        let loaded = File::open(&path).map_err(Into::into).and_then(|f| {
            PrimeTable::read_cache(BufReader::new(f), SieveOptions::default().memory_budget)
        });
        match loaded {
            Ok(table) if table.bound() == bound => return Ok(table),
            Ok(table) => eprintln!(
                "warning: {} holds bound {}, rebuilding",
                path.display(),
                table.bound()
            ),
            Err(e) => eprintln!("warning: ignoring damaged cache {}: {e}", path.display()),
        }
    }
    let table = PrimeTable::build(bound)?;
    if let Err(e) = store(&table, dir, &path) {
        eprintln!("warning: could not write cache {}: {e}", path.display());
    }
    Ok(table)
}

fn store(table: &PrimeTable, dir: &Path, path: &Path) -> Result<()> {
    fs::create_dir_all(dir)?;
    let tmp = path.with_extension(format!("tmp{}", std::process::id()));
    {
        let mut w = BufWriter::new(File::create(&tmp)?);
        table.write_cache(&mut w)?;
        w.flush()?;
    }
    fs::rename(&tmp, path)?;
    Ok(())
}
