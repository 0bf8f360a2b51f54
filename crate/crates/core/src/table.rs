//! Text table format for measures.
//!
//! ```text
//! # ambient_dim atom_count resolution
//! 2 4 0.25
//! # x_1 x_2 w
//! 0.125 0.125 0.25
//! ...
//! ```
//!
//! Numbers are written with the shortest representation that round-trips,
//! so reading a table back yields a bit-identical measure. Metadata lives in
//! a JSON sidecar next to the table (`<file>.json`).

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::measure::DiscreteMeasure;

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct MeasureMetadata {
    pub provenance: serde_json::Value,
    pub seed: Option<u64>,
    pub nominal_dimension: Option<f64>,
}

pub fn to_table_string(mu: &DiscreteMeasure) -> String {
    let d = mu.ambient_dim();
    let mut s = String::with_capacity(mu.len() * (d + 1) * 20 + 64);
    s.push_str("# ambient_dim atom_count resolution\n");
    let _ = writeln!(s, "{} {} {}", d, mu.len(), mu.resolution());
    s.push('#');
    for k in 1..=d {
        let _ = write!(s, " x_{k}");
    }
    s.push_str(" w\n");
    for (p, w) in mu.points().zip(mu.weights()) {
        for x in p {
            let _ = write!(s, "{x} ");
        }
        let _ = writeln!(s, "{w}");
    }
    s
}

pub fn from_table_str(text: &str) -> Result<DiscreteMeasure> {
    let mut lines = text
        .lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'));
    let header = lines.next().ok_or_else(|| Error::Parse("missing header".into()))?;
    let h: Vec<&str> = header.split_whitespace().collect();
    if h.len() != 3 {
        return Err(Error::Parse(format!("header needs 3 fields, got {}", h.len())));
    }
    let d: usize = h[0].parse().map_err(|_| Error::Parse(format!("bad ambient_dim {:?}", h[0])))?;
    let n: usize = h[1].parse().map_err(|_| Error::Parse(format!("bad atom_count {:?}", h[1])))?;
    let resolution: f64 = h[2].parse().map_err(|_| Error::Parse(format!("bad resolution {:?}", h[2])))?;
    let mut coords = Vec::with_capacity(n * d);
    let mut weights = Vec::with_capacity(n);
    for (row, line) in lines.enumerate() {
        let vals: Vec<f64> = line
            .split_whitespace()
            .map(|t| t.parse::<f64>().map_err(|_| Error::Parse(format!("row {row}: bad number {t:?}"))))
            .collect::<Result<_>>()?;
        if vals.len() != d + 1 {
            return Err(Error::Parse(format!("row {row}: expected {} columns, got {}", d + 1, vals.len())));
        }
        coords.extend_from_slice(&vals[..d]);
        weights.push(vals[d]);
    }
    if weights.len() != n {
        return Err(Error::Parse(format!("header says {n} atoms, found {}", weights.len())));
    }
    DiscreteMeasure::new(d, coords, weights, resolution)
}

pub fn sidecar_path(path: &Path) -> PathBuf {
    let mut s = path.as_os_str().to_owned();
    s.push(".json");
    PathBuf::from(s)
}

pub fn write_measure(path: &Path, mu: &DiscreteMeasure, meta: &MeasureMetadata) -> Result<()> {
    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent)?;
    }
    fs::write(path, to_table_string(mu))?;
    fs::write(sidecar_path(path), serde_json::to_string_pretty(meta)?)?;
    Ok(())
}

pub fn read_measure(path: &Path) -> Result<(DiscreteMeasure, Option<MeasureMetadata>)> {
    let mu = from_table_str(&fs::read_to_string(path)?)?;
    let side = sidecar_path(path);
    let meta = if side.exists() {
        Some(serde_json::from_str(&fs::read_to_string(side)?)?)
    } else {
        None
    };
    Ok((mu, meta))
}
