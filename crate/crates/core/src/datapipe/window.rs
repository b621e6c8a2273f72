//! Padding and segmentation into lockstep autoregressive samples.
//!
//! A bearing with `l` acquisitions yields `len = l − k` real windows (window
//! `w` covers acquisitions `w..w+k` and targets the HI of acquisition
//! `w + k`). The window count is padded up to
//! `l_f = ceil(len / LCM(100, n)) · LCM(100, n)` with synthetic windows whose
//! vibration is all ones and whose labels are all zero, then split into `n`
//! contiguous segments of `m = l_f / n` windows.
//!
//! Input blocks are materialized on demand: a dataset only holds the record.

use std::ops::Range;
use std::sync::Arc;

use serde::Serialize;

use super::BearingRecord;
use crate::error::{Error, Result};
use crate::tensor::Tensor;

const PAD_VIBRATION: f64 = 1.0;
const PAD_LABEL: f64 = 0.0;

pub fn gcd(mut a: usize, mut b: usize) -> usize {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

pub fn lcm(a: usize, b: usize) -> usize {
    a / gcd(a, b) * b
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Geometry {
    /// Window size in acquisitions.
    pub k: usize,
    /// Segments per bearing.
    pub n: usize,
    /// Real (unpadded) windows, `l − k`.
    pub real_windows: usize,
    /// `l_f`, windows after padding.
    pub total_windows: usize,
    /// `l_pad`.
    pub padding: usize,
    /// `m`, windows per segment.
    pub windows_per_segment: usize,
}

impl Geometry {
    pub fn new(len: usize, k: usize, n: usize) -> Result<Self> {
        Self::padded_to(len, k, n, len)
    }

    /// Geometry for a record of `len` acquisitions padded as if it had
    /// `reference_len` (the longest record in a training set).
    pub fn padded_to(len: usize, k: usize, n: usize, reference_len: usize) -> Result<Self> {
        if k == 0 {
            return Err(Error::contract("window size k must be >= 1"));
        }
        if n == 0 {
            return Err(Error::contract("segment count n must be >= 1"));
        }
        if len <= k {
            return Err(Error::contract(format!(
                "record of {len} acquisitions is not longer than the window size {k}"
            )));
        }
        let reference_len = reference_len.max(len);
        let unit = lcm(100, n);
        let total = (reference_len - k).div_ceil(unit) * unit;
        let real = len - k;
        Ok(Self {
            k,
            n,
            real_windows: real,
            total_windows: total,
            padding: total - real,
            windows_per_segment: total / n,
        })
    }

    pub fn segment(&self, index: usize) -> Range<usize> {
        let m = self.windows_per_segment;
        index * m..(index + 1) * m
    }

    pub fn window_index(&self, segment: usize, step: usize) -> usize {
        segment * self.windows_per_segment + step
    }
}

/// One bearing, windowed and padded.
#[derive(Debug, Clone)]
pub struct WindowedDataset {
    record: Arc<BearingRecord>,
    geometry: Geometry,
}

pub fn pad_and_window(record: BearingRecord, k: usize, n: usize) -> Result<WindowedDataset> {
    let len = record.len();
    pad_and_window_to(record, k, n, len)
}

pub fn pad_and_window_to(
    record: BearingRecord,
    k: usize,
    n: usize,
    reference_len: usize,
) -> Result<WindowedDataset> {
    record.validate()?;
    let geometry = Geometry::padded_to(record.len(), k, n, reference_len)?;
    Ok(WindowedDataset {
        record: Arc::new(record),
        geometry,
    })
}

/// Windows every record to the common geometry set by the longest one.
pub fn window_all(records: Vec<BearingRecord>, k: usize, n: usize) -> Result<Vec<WindowedDataset>> {
    let longest = records.iter().map(BearingRecord::len).max().unwrap_or(0);
    records
        .into_iter()
        .map(|r| pad_and_window_to(r, k, n, longest))
        .collect()
}

impl WindowedDataset {
    pub fn id(&self) -> &str {
        &self.record.id
    }

    pub fn record(&self) -> &BearingRecord {
        &self.record
    }

    pub fn geometry(&self) -> &Geometry {
        &self.geometry
    }

    pub fn points(&self) -> usize {
        self.record.points
    }

    pub fn has_labels(&self) -> bool {
        self.record.labels.is_some()
    }

    pub fn is_padding(&self, window: usize) -> bool {
        window >= self.geometry.real_windows
    }

    /// HI of the acquisition following the window; 0 for padding, `None`
    /// for unlabelled records.
    pub fn target(&self, window: usize) -> Option<f64> {
        if self.is_padding(window) {
            return Some(PAD_LABEL);
        }
        self.record.labels.as_ref().map(|l| l[window + self.geometry.k])
    }

    /// HI of the acquisitions inside the window.
    pub fn label_window(&self, window: usize) -> Option<Vec<f64>> {
        let k = self.geometry.k;
        if self.is_padding(window) {
            return Some(vec![PAD_LABEL; k]);
        }
        self.record.labels.as_ref().map(|l| l[window..window + k].to_vec())
    }

    /// Writes the `[2k, S]` input block of `window` into `out`: channel `2j`
    /// is the horizontal signal of the window's `j`-th acquisition, `2j + 1`
    /// the vertical one.
    pub fn write_block(&self, window: usize, out: &mut [f64]) {
        let s = self.record.points;
        let k = self.geometry.k;
        debug_assert_eq!(out.len(), 2 * k * s);
        if self.is_padding(window) {
            out.fill(PAD_VIBRATION);
            return;
        }
        for j in 0..k {
            // channel-major storage already matches [h; v]
            out[2 * j * s..(2 * j + 2) * s].copy_from_slice(&self.record.acquisitions[window + j]);
        }
    }

    pub fn block(&self, window: usize) -> Tensor {
        let (k, s) = (self.geometry.k, self.record.points);
        let mut data = vec![0.0; 2 * k * s];
        self.write_block(window, &mut data);
        Tensor::new(vec![2 * k, s], data).expect("block shape")
    }
}

/// One lockstep step across every segment of every bearing.
#[derive(Debug, Clone)]
pub struct Batch {
    /// `[B, 2k, S]`
    pub x: Tensor,
    /// `[B]`
    pub y: Tensor,
    /// `[B, k]`
    pub label_windows: Tensor,
    /// Rows whose target is padding.
    pub padding: Vec<bool>,
}

fn check_geometry(datasets: &[&WindowedDataset], step: usize) -> Result<(Geometry, usize)> {
    let first = datasets
        .first()
        .ok_or_else(|| Error::contract("cannot assemble a batch from zero bearings"))?;
    let g = first.geometry;
    let s = first.points();
    for d in datasets {
        let h = d.geometry;
        if (h.k, h.n, h.windows_per_segment) != (g.k, g.n, g.windows_per_segment) || d.points() != s {
            return Err(Error::contract(format!(
                "geometry of {} (k={}, n={}, m={}, S={}) differs from {} (k={}, n={}, m={}, S={s})",
                d.id(),
                h.k,
                h.n,
                h.windows_per_segment,
                d.points(),
                first.id(),
                g.k,
                g.n,
                g.windows_per_segment
            )));
        }
    }
    if step >= g.windows_per_segment {
        return Err(Error::contract(format!(
            "segment step {step} outside 0..{}",
            g.windows_per_segment
        )));
    }
    Ok((g, s))
}

/// Vibration inputs and padding flags for `step` of every segment.
/// Row order: bearing, then segment.
pub fn assemble_inputs(datasets: &[&WindowedDataset], step: usize) -> Result<(Tensor, Vec<bool>)> {
    let (g, s) = check_geometry(datasets, step)?;
    let rows = datasets.len() * g.n;
    let block = 2 * g.k * s;
    let mut x = vec![0.0; rows * block];
    let mut padding = Vec::with_capacity(rows);
    let mut row = 0;
    for d in datasets {
        for seg in 0..g.n {
            let w = g.window_index(seg, step);
            d.write_block(w, &mut x[row * block..(row + 1) * block]);
            padding.push(d.is_padding(w));
            row += 1;
        }
    }
    Ok((Tensor::new(vec![rows, 2 * g.k, s], x)?, padding))
}

pub fn assemble_batch(datasets: &[&WindowedDataset], step: usize) -> Result<Batch> {
    let (x, padding) = assemble_inputs(datasets, step)?;
    let g = datasets[0].geometry;
    let rows = padding.len();
    let mut y = Vec::with_capacity(rows);
    let mut windows = Vec::with_capacity(rows * g.k);
    for d in datasets {
        for seg in 0..g.n {
            let w = g.window_index(seg, step);
            let missing = || Error::contract(format!("{} has no labels", d.id()));
            y.push(d.target(w).ok_or_else(missing)?);
            windows.extend(d.label_window(w).ok_or_else(missing)?);
        }
    }
    Ok(Batch {
        x,
        y: Tensor::new(vec![rows], y)?,
        label_windows: Tensor::new(vec![rows, g.k], windows)?,
        padding,
    })
}
