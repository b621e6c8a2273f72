use super::BearingRecord;
use crate::error::{Error, Result};

/// Piecewise HI: 1 up to and including `fpt_index`, then a straight line to
/// 0 at the final acquisition. The final label is always 0.
pub fn make_labels(len: usize, fpt_index: usize) -> Result<Vec<f64>> {
    if fpt_index >= len {
        return Err(Error::contract(format!(
            "fpt index {fpt_index} outside a record of {len} acquisitions"
        )));
    }
    let last = len - 1;
    let span = (last - fpt_index) as f64;
    let mut labels: Vec<f64> = (0..len)
        .map(|i| {
            if i <= fpt_index {
                1.0
            } else {
                1.0 - (i - fpt_index) as f64 / span
            }
        })
        .collect();
    labels[last] = 0.0;
    Ok(labels)
}

/// Attaches piecewise labels to a record.
pub fn piecewise_labels(record: BearingRecord, fpt_index: usize) -> Result<BearingRecord> {
    record.with_labels(fpt_index)
}
