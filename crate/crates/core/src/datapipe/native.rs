//! Native bearing format.
//!
//! `name.csv` holds a `h,v` header followed by `S` rows per acquisition,
//! acquisitions concatenated in order. `name.meta` is a `key = value` sidecar:
//!
//! ```text
//! id = bearing_000
//! points_per_acquisition = 256
//! sample_period_s = 10
//! fpt_index = 143        # optional; labels are rebuilt from it
//! ```
//!
//! Values are written with Rust's shortest round-trip formatting, so a
//! write/read cycle is bit-exact.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use super::record::DEFAULT_SAMPLE_PERIOD_S;
use super::BearingRecord;
use crate::error::{Error, Result};

pub fn sidecar_path(csv: &Path) -> PathBuf {
    csv.with_extension("meta")
}

pub fn write_native_bearing(record: &BearingRecord, csv: &Path) -> Result<()> {
    let s = record.points;
    let mut out = String::with_capacity(record.len() * s * 40 + 8);
    out.push_str("h,v\n");
    for a in &record.acquisitions {
        for i in 0..s {
            let _ = writeln!(out, "{},{}", a[i], a[s + i]);
        }
    }
    fs::write(csv, out).map_err(|e| Error::io(csv, e))?;

    let mut meta = String::new();
    let _ = writeln!(meta, "id = {}", record.id);
    let _ = writeln!(meta, "points_per_acquisition = {s}");
    let _ = writeln!(meta, "sample_period_s = {}", record.sample_period_s);
    if let Some(fpt) = record.fpt_index {
        let _ = writeln!(meta, "fpt_index = {fpt}");
    }
    let meta_path = sidecar_path(csv);
    fs::write(&meta_path, meta).map_err(|e| Error::io(meta_path, e))
}

fn read_sidecar(path: &Path) -> Result<BTreeMap<String, String>> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut map = BTreeMap::new();
    for (row, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line.split_once('=').ok_or_else(|| Error::Parse {
            path: path.into(),
            row: row + 1,
            column: 1,
            message: "expected `key = value`".into(),
        })?;
        map.insert(k.trim().to_string(), v.trim().to_string());
    }
    Ok(map)
}

fn meta_number<T: std::str::FromStr>(
    meta: &BTreeMap<String, String>,
    key: &str,
    path: &Path,
) -> Result<Option<T>> {
    meta.get(key)
        .map(|v| {
            v.parse::<T>()
                .map_err(|_| Error::Format(format!("{}: `{key}` has invalid value `{v}`", path.display())))
        })
        .transpose()
}

pub fn load_native_bearing(csv: &Path) -> Result<BearingRecord> {
    let meta_path = sidecar_path(csv);
    let meta = read_sidecar(&meta_path)?;
    let points: usize = meta_number(&meta, "points_per_acquisition", &meta_path)?
        .ok_or_else(|| Error::Format(format!("{}: missing points_per_acquisition", meta_path.display())))?;
    if points == 0 {
        return Err(Error::Format(format!("{}: points_per_acquisition is 0", meta_path.display())));
    }
    let period = meta_number(&meta, "sample_period_s", &meta_path)?.unwrap_or(DEFAULT_SAMPLE_PERIOD_S);
    let fpt: Option<usize> = meta_number(&meta, "fpt_index", &meta_path)?;
    let id = meta.get("id").cloned().unwrap_or_else(|| {
        csv.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default()
    });

    let text = fs::read_to_string(csv).map_err(|e| Error::io(csv, e))?;
    let mut lines = text.lines();
    if lines.next().map(str::trim) != Some("h,v") {
        return Err(Error::Format(format!("{}: missing `h,v` header", csv.display())));
    }
    let mut h = Vec::new();
    let mut v = Vec::new();
    for (i, line) in lines.enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let row = i + 2;
        let mut cells = line.split(',');
        for (col, dst) in [(1usize, &mut h), (2, &mut v)] {
            let cell = cells.next().ok_or_else(|| Error::Parse {
                path: csv.into(),
                row,
                column: col,
                message: "missing value".into(),
            })?;
            let x: f64 = cell.trim().parse().map_err(|_| Error::Parse {
                path: csv.into(),
                row,
                column: col,
                message: format!("`{cell}` is not a number"),
            })?;
            dst.push(x);
        }
    }
    if h.len() % points != 0 {
        return Err(Error::Format(format!(
            "{}: {} rows is not a multiple of {points} points per acquisition",
            csv.display(),
            h.len()
        )));
    }
    let acquisitions = h
        .chunks(points)
        .zip(v.chunks(points))
        .map(|(a, b)| [a, b].concat())
        .collect();
    let mut record = BearingRecord::new(id, points, acquisitions)?;
    record.sample_period_s = period;
    match fpt {
        Some(f) => record.with_labels(f),
        None => Ok(record),
    }
}
