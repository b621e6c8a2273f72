use std::path::{Path, PathBuf};

use crate::datapipe::{
    canonical_bearing_id, detect_fpt, load_native_bearing, load_phm2012_bearing, normalize, sidecar_path,
    BearingRecord, Fpt3SigmaConfig, FptTable, PHM2012_POINTS,
};
use crate::error::{Error, Result};

/// A bearing as loaded for a command, before windowing.
#[derive(Debug, Clone)]
pub struct LoadedBearing {
    /// File stem used to name per-bearing outputs.
    pub stem: String,
    pub source: PathBuf,
    pub record: BearingRecord,
}

/// Native CSVs in `dir` that have a sidecar, sorted by name.
pub fn native_files_in(dir: &Path) -> Result<Vec<PathBuf>> {
    let mut files = Vec::new();
    for entry in std::fs::read_dir(dir).map_err(|e| Error::io(dir, e))? {
        let path = entry.map_err(|e| Error::io(dir, e))?.path();
        if path.extension().is_some_and(|e| e == "csv") && sidecar_path(&path).exists() {
            files.push(path);
        }
    }
    files.sort();
    if files.is_empty() {
        return Err(Error::Ingest {
            path: dir.into(),
            message: "no bearing CSV with a .meta sidecar found".into(),
        });
    }
    Ok(files)
}

fn stem(path: &Path) -> String {
    path.file_stem()
        .or_else(|| path.file_name())
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "bearing".into())
}

/// How PHM2012 directories get their labels.
#[derive(Debug, Clone, Copy)]
pub enum PhmLabels {
    /// Published FPT where the id is known, detection otherwise.
    TableThenDetect,
    Detect,
}

/// Loads native files, directories of native files and PHM2012 bearing
/// directories, normalizing every record.
pub fn load_bearings(
    data_dirs: &[PathBuf],
    files: &[PathBuf],
    phm_dirs: &[PathBuf],
    phm_labels: PhmLabels,
) -> Result<Vec<LoadedBearing>> {
    let mut native = Vec::new();
    for d in data_dirs {
        native.extend(native_files_in(d)?);
    }
    native.extend(files.iter().cloned());
    let mut out = Vec::new();
    for path in native {
        let record = normalize(load_native_bearing(&path)?);
        out.push(LoadedBearing { stem: stem(&path), source: path, record });
    }
    let table = FptTable::builtin();
    for dir in phm_dirs {
        let mut record = load_phm2012_bearing(dir, PHM2012_POINTS)?;
        record.id = canonical_bearing_id(&stem(dir));
        let fpt = match (phm_labels, table.index(&record.id, record.sample_period_s)) {
            (PhmLabels::TableThenDetect, Some(i)) if i < record.len() => i,
            _ => detect_fpt(&record, &Fpt3SigmaConfig::default())?,
        };
        let record = normalize(record.with_labels(fpt)?);
        out.push(LoadedBearing { stem: stem(dir), source: dir.clone(), record });
    }
    if out.is_empty() {
        return Err(Error::config("data", "no bearings given; use --data, --bearing or --phm2012"));
    }
    Ok(out)
}
