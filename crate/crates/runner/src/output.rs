//! Run directories: `<out>/<scenario>-<hash8>[-runN]/`.

use std::fs;
use std::path::{Path, PathBuf};

use fractal_lab::table;

use crate::error::{Result, RunnerError};
use crate::record::ExperimentRecord;
use crate::report::Report;
use crate::scenarios::Artifacts;

/// Aggregates of a rerun must match the stored record this closely.
pub const REPRODUCIBILITY_TOLERANCE: f64 = 1e-12;

pub const RECORD_FILE: &str = "record.json";

pub fn read_record(path: &Path) -> Result<ExperimentRecord> {
    Ok(serde_json::from_str(&fs::read_to_string(path)?)?)
}

fn run_dirs(out: &Path, stem: &str) -> Vec<PathBuf> {
    let mut dirs = vec![out.join(stem)];
    let mut k = 2;
    loop {
        let d = out.join(format!("{stem}-run{k}"));
        if !d.exists() {
            break;
        }
        dirs.push(d);
        k += 1;
    }
    dirs
}

/// Pick a fresh directory for `record`. Earlier runs of the same config are
/// never touched; the new record must reproduce each stored one, otherwise
/// nothing is written.
pub fn new_run_dir(out: &Path, record: &ExperimentRecord) -> Result<PathBuf> {
    let stem = format!("{}-{}", record.scenario, &record.config_hash[..8]);
    let existing: Vec<PathBuf> = run_dirs(out, &stem).into_iter().filter(|d| d.exists()).collect();
    for dir in &existing {
        let path = dir.join(RECORD_FILE);
        if !path.exists() {
            continue;
        }
        let old = read_record(&path)?;
        if let Some(detail) = record.compare(&old, REPRODUCIBILITY_TOLERANCE) {
            return Err(RunnerError::NonReproducible { dir: dir.clone(), detail });
        }
    }
    Ok(match existing.len() {
        0 => out.join(stem),
        k => out.join(format!("{stem}-run{}", k + 1)),
    })
}

/// Write record, tables, measures and summary; returns the run directory.
pub fn write_run(out: &Path, record: &ExperimentRecord, art: &Artifacts) -> Result<PathBuf> {
    let dir = new_run_dir(out, record)?;
    fs::create_dir_all(&dir)?;
    fs::write(dir.join(RECORD_FILE), serde_json::to_string_pretty(record)?)?;
    for (name, csv) in &art.tables {
        fs::write(dir.join(name), csv)?;
    }
    if !art.measures.is_empty() {
        let mdir = dir.join("measures");
        fs::create_dir_all(&mdir)?;
        for (name, mu, meta) in &art.measures {
            let path = mdir.join(format!("{name}.tbl"));
            match mu {
                Some(mu) => table::write_measure(&path, mu, meta)?,
                None => fs::write(table::sidecar_path(&path), serde_json::to_string_pretty(meta)?)?,
            }
        }
    }
    let summary = Report::new(std::slice::from_ref(record)).to_text();
    fs::write(dir.join("summary.txt"), summary)?;
    Ok(dir)
}

/// Every `record.json` under the given files and directories, sorted by path.
pub fn find_records(paths: &[PathBuf]) -> Result<Vec<PathBuf>> {
    let mut found = Vec::new();
    for p in paths {
        collect(p, &mut found)?;
    }
    found.sort();
    found.dedup();
    Ok(found)
}

fn collect(p: &Path, found: &mut Vec<PathBuf>) -> Result<()> {
    if p.is_file() {
        found.push(p.to_path_buf());
    } else if p.is_dir() {
        for entry in fs::read_dir(p)? {
            let path = entry?.path();
            if path.is_dir() {
                collect(&path, found)?;
            } else if path.file_name().is_some_and(|n| n == RECORD_FILE) {
                found.push(path);
            }
        }
    }
    Ok(())
}
