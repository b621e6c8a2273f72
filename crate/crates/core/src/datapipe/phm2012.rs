//! Reader for the PHM2012 (PRONOSTIA) run-to-failure directories.
//!
//! Each bearing directory holds `acc_00001.csv`, `acc_00002.csv`, ... with
//! six columns per row: hour, minute, second, microsecond, horizontal and
//! vertical acceleration. Some bearings use `;` as the separator.

use std::fs;
use std::path::Path;

use super::record::DEFAULT_SAMPLE_PERIOD_S;
use super::BearingRecord;
use crate::error::{Error, Result};

pub const PHM2012_POINTS: usize = 2560;

fn acc_index(name: &str) -> Option<u32> {
    name.strip_prefix("acc_")?.strip_suffix(".csv")?.parse().ok()
}

/// Loads every `acc_NNNNN.csv` in `dir`, ordered by file index, keeping the
/// first `points` rows of each.
pub fn load_phm2012_bearing(dir: &Path, points: usize) -> Result<BearingRecord> {
    let entries = fs::read_dir(dir).map_err(|e| Error::io(dir, e))?;
    let mut files = Vec::new();
    for entry in entries {
        let entry = entry.map_err(|e| Error::io(dir, e))?;
        let name = entry.file_name().to_string_lossy().into_owned();
        if let Some(idx) = acc_index(&name) {
            files.push((idx, entry.path()));
        }
    }
    if files.is_empty() {
        return Err(Error::Ingest {
            path: dir.into(),
            message: "no acc_NNNNN.csv files".into(),
        });
    }
    files.sort();

    let mut acquisitions = Vec::with_capacity(files.len());
    for (_, path) in &files {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut h = Vec::with_capacity(points);
        let mut v = Vec::with_capacity(points);
        for (row, line) in text.lines().filter(|l| !l.trim().is_empty()).take(points).enumerate() {
            let cells: Vec<&str> = line.split([',', ';']).collect();
            if cells.len() < 6 {
                return Err(Error::Parse {
                    path: path.clone(),
                    row: row + 1,
                    column: cells.len() + 1,
                    message: format!("expected 6 columns, found {}", cells.len()),
                });
            }
            for (col, dst) in [(4usize, &mut h), (5, &mut v)] {
                let x: f64 = cells[col].trim().parse().map_err(|_| Error::Parse {
                    path: path.clone(),
                    row: row + 1,
                    column: col + 1,
                    message: format!("`{}` is not a number", cells[col]),
                })?;
                dst.push(x);
            }
        }
        if h.len() < points {
            return Err(Error::Ingest {
                path: path.clone(),
                message: format!("only {} rows, need {points}", h.len()),
            });
        }
        h.extend_from_slice(&v);
        acquisitions.push(h);
    }

    let id = dir
        .file_name()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "bearing".into());
    let mut record = BearingRecord::new(id, points, acquisitions)?;
    record.sample_period_s = DEFAULT_SAMPLE_PERIOD_S;
    Ok(record)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn write_acc(dir: &Path, idx: u32, rows: usize, sep: char) {
        let body: String = (0..rows)
            .map(|r| format!("9{sep}39{sep}39{sep}6.5e+05{sep}{}{sep}{}\n", r as f64 * 0.5, -(r as f64)))
            .collect();
        fs::write(dir.join(format!("acc_{idx:05}.csv")), body).unwrap();
    }

    #[test]
    fn orders_by_file_index() {
        let dir = tempfile::tempdir().unwrap();
        for idx in [3, 1, 2] {
            write_acc(dir.path(), idx, 4, if idx == 2 { ';' } else { ',' });
        }
        fs::write(dir.path().join("temp_00001.csv"), "junk").unwrap();
        let r = load_phm2012_bearing(dir.path(), 4).unwrap();
        assert_eq!(r.len(), 3);
        assert_eq!(r.channel(0, 0), &[0.0, 0.5, 1.0, 1.5]);
        assert_eq!(r.channel(2, 1), &[0.0, -1.0, -2.0, -3.0]);
    }

    #[test]
    fn empty_directory_is_ingestion_error() {
        let dir = tempfile::tempdir().unwrap();
        assert!(matches!(load_phm2012_bearing(dir.path(), 4), Err(Error::Ingest { .. })));
    }

    #[test]
    fn short_file_is_named() {
        let dir = tempfile::tempdir().unwrap();
        write_acc(dir.path(), 1, 2560, ',');
        write_acc(dir.path(), 2, 2559, ',');
        match load_phm2012_bearing(dir.path(), PHM2012_POINTS) {
            Err(Error::Ingest { path, .. }) => assert!(path.ends_with("acc_00002.csv")),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn non_numeric_cell_reports_row_and_column() {
        let dir = tempfile::tempdir().unwrap();
        fs::write(dir.path().join("acc_00001.csv"), "1,2,3,4,0.1,0.2\n1,2,3,4,abc,0.2\n").unwrap();
        match load_phm2012_bearing(dir.path(), 2) {
            Err(Error::Parse { row, column, .. }) => assert_eq!((row, column), (2, 5)),
            other => panic!("{other:?}"),
        }
    }
}
