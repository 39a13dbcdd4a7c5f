//! Versioned reference outputs under `testdata/`.

use std::path::{Path, PathBuf};

use fzip_core::field::Field;
use fzip_core::freelie::jacobson_report;
use fzip_core::fzip::orbit_decomposition;
use fzip_core::groupdata::{grading, Cochar};
use serde_json::{json, Value};

use crate::io::{parse_json, to_pretty, CliError, CliResult};

pub const ORBIT_INSTANCES: [(usize, usize, u32); 5] = [(2, 1, 2), (2, 1, 3), (2, 1, 4), (3, 1, 2), (3, 2, 2)];
pub const JACOBSON_PRIMES: [u32; 3] = [2, 3, 5];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Family {
    Orbits,
    Jacobson,
}

pub struct Entry {
    pub path: PathBuf,
    pub value: Value,
}

pub fn entries(dir: &Path, family: Family, limit: u128) -> CliResult<Vec<Entry>> {
    let mut out = Vec::new();
    match family {
        Family::Orbits => {
            for (d, dp, q) in ORBIT_INSTANCES {
                let ggd = grading(&Cochar::normal_form(d, dp)?)?;
                let report = orbit_decomposition(&ggd, &Field::of_order(q)?, limit)?;
                out.push(Entry { path: dir.join("orbits").join(format!("d{d}_dprime{dp}_q{q}.json")), value: report.to_json() });
            }
        }
        Family::Jacobson => {
            for p in JACOBSON_PRIMES {
                let report = jacobson_report(p)?;
                out.push(Entry { path: dir.join("jacobson").join(format!("p{p}.json")), value: report.to_json() });
            }
        }
    }
    Ok(out)
}

fn io_err(path: &Path, e: std::io::Error) -> CliError {
    CliError::Input(format!("{}: {e}", path.display()))
}

pub fn bless(entries: &[Entry]) -> CliResult<()> {
    for e in entries {
        if let Some(parent) = e.path.parent() {
            std::fs::create_dir_all(parent).map_err(|err| io_err(parent, err))?;
        }
        std::fs::write(&e.path, to_pretty(&e.value) + "\n").map_err(|err| io_err(&e.path, err))?;
    }
    Ok(())
}

/// One `{file, matches}` record per entry; a missing file counts as a mismatch.
pub fn compare(entries: &[Entry]) -> CliResult<Vec<Value>> {
    let mut out = Vec::new();
    for e in entries {
        let name = e.path.display().to_string();
        let matches = match std::fs::read_to_string(&e.path) {
            Ok(text) => parse_json(&text, &name)? == e.value,
            Err(_) => false,
        };
        let file: String = e
            .path
            .iter()
            .rev()
            .take(2)
            .collect::<Vec<_>>()
            .into_iter()
            .rev()
            .map(|s| s.to_string_lossy().into_owned())
            .collect::<Vec<_>>()
            .join("/");
        out.push(json!({ "file": file, "matches": matches }));
    }
    Ok(out)
}
