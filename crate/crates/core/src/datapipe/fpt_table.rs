use std::collections::BTreeMap;
use std::path::Path;

use crate::error::{Error, Result};

const BUILTIN: &str = include_str!("../../data/fpt_table.csv");

/// Published first-prediction times (seconds) for the PHM2012 bearings.
#[derive(Debug, Clone, PartialEq)]
pub struct FptTable {
    entries: BTreeMap<String, f64>,
}

impl FptTable {
    pub fn builtin() -> Self {
        Self::parse(BUILTIN, Path::new("<builtin fpt table>")).expect("builtin table parses")
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text, path)
    }

    fn parse(text: &str, path: &Path) -> Result<Self> {
        let mut lines = text.lines().enumerate();
        match lines.next() {
            Some((_, h)) if h.trim() == "bearing_id,fpt_seconds" => {}
            _ => {
                return Err(Error::Format(format!(
                    "{}: expected header `bearing_id,fpt_seconds`",
                    path.display()
                )))
            }
        }
        let mut entries = BTreeMap::new();
        for (row, line) in lines {
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            let (id, secs) = line.split_once(',').ok_or_else(|| Error::Parse {
                path: path.into(),
                row: row + 1,
                column: 1,
                message: "expected two columns".into(),
            })?;
            let secs: f64 = secs.trim().parse().map_err(|_| Error::Parse {
                path: path.into(),
                row: row + 1,
                column: 2,
                message: format!("`{secs}` is not a number"),
            })?;
            entries.insert(canonical_bearing_id(id.trim()), secs);
        }
        Ok(Self { entries })
    }

    pub fn seconds(&self, id: &str) -> Option<f64> {
        self.entries.get(&canonical_bearing_id(id)).copied()
    }

    /// FPT as an acquisition index for the given sampling period.
    pub fn index(&self, id: &str, sample_period_s: f64) -> Option<usize> {
        self.seconds(id).map(|s| (s / sample_period_s).round() as usize)
    }

    pub fn ids(&self) -> impl Iterator<Item = &str> {
        self.entries.keys().map(String::as_str)
    }
}

/// Maps `Bearing1_3`, `bearing1-3`, `B1_3` and `B1-3` to `B1-3`.
/// Unrecognised ids are returned unchanged.
pub fn canonical_bearing_id(id: &str) -> String {
    let lower = id.to_ascii_lowercase();
    let rest = lower
        .strip_prefix("bearing")
        .or_else(|| lower.strip_prefix('b'))
        .map(|r| r.trim_start_matches(['_', '-', ' ']));
    if let Some(rest) = rest {
        if let Some((a, b)) = rest.split_once(['_', '-']) {
            if !a.is_empty()
                && !b.is_empty()
                && a.chars().all(|c| c.is_ascii_digit())
                && b.chars().all(|c| c.is_ascii_digit())
            {
                return format!("B{a}-{b}");
            }
        }
    }
    id.to_string()
}
