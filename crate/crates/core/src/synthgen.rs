//! Seeded synthetic run-to-failure records with known degradation onset.
//!
//! Both channels carry zero-mean Gaussian noise. The standard deviation is
//! `a0` up to the onset and grows as `a0 · exp(r · (i − onset))` after it.
//! An optional transient spike scales the amplitude for a few acquisitions
//! and then reverts, giving a record that looks briefly degraded but is not.

use std::path::{Path, PathBuf};

use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::datapipe::{write_native_bearing, BearingRecord, DEFAULT_SAMPLE_PERIOD_S};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Spike {
    /// Start as a fraction of the record length.
    pub position: f64,
    pub multiplier: f64,
    /// Length in acquisitions.
    pub duration: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SynthSpec {
    pub seed: u64,
    pub acquisitions: usize,
    pub points: usize,
    /// Healthy noise amplitude (standard deviation).
    pub a0: f64,
    /// Degradation onset as a fraction of the record length.
    pub onset_fraction: f64,
    /// Exponential growth rate of the amplitude per acquisition.
    pub rate: f64,
    pub spike: Option<Spike>,
}

impl Default for SynthSpec {
    fn default() -> Self {
        Self {
            seed: 0,
            acquisitions: 300,
            points: 256,
            a0: 1.0,
            onset_fraction: 0.5,
            rate: 0.02,
            spike: None,
        }
    }
}

impl SynthSpec {
    pub fn validate(&self) -> Result<()> {
        if self.acquisitions < 2 {
            return Err(Error::config("acquisitions", "must be at least 2"));
        }
        if self.points < 1 {
            return Err(Error::config("points", "must be >= 1"));
        }
        if !(self.a0 > 0.0 && self.a0.is_finite()) {
            return Err(Error::config("a0", "must be finite and > 0"));
        }
        if !(self.onset_fraction > 0.0 && self.onset_fraction < 1.0) {
            return Err(Error::config("onset_fraction", "must lie strictly between 0 and 1"));
        }
        if !self.rate.is_finite() || self.rate < 0.0 {
            return Err(Error::config("rate", "must be finite and >= 0"));
        }
        if let Some(s) = self.spike {
            if !(0.0..1.0).contains(&s.position) {
                return Err(Error::config("spike.position", "must lie in [0, 1)"));
            }
            if !(s.multiplier > 0.0 && s.multiplier.is_finite()) {
                return Err(Error::config("spike.multiplier", "must be finite and > 0"));
            }
        }
        Ok(())
    }

    /// Acquisition index where growth starts, `floor(f · l)`.
    pub fn onset(&self) -> usize {
        ((self.onset_fraction * self.acquisitions as f64).floor() as usize).min(self.acquisitions - 1)
    }

    /// Acquisitions covered by the spike.
    pub fn spike_range(&self) -> Option<std::ops::Range<usize>> {
        self.spike.map(|s| {
            let start = (s.position * self.acquisitions as f64).floor() as usize;
            start..(start + s.duration).min(self.acquisitions)
        })
    }

    /// Noise standard deviation of acquisition `i`.
    pub fn amplitude(&self, i: usize) -> f64 {
        let onset = self.onset();
        let mut a = if i < onset {
            self.a0
        } else {
            self.a0 * (self.rate * (i - onset) as f64).exp()
        };
        if let (Some(s), Some(r)) = (self.spike, self.spike_range()) {
            if r.contains(&i) {
                a *= s.multiplier;
            }
        }
        a
    }
}

/// Record named `id` with labels whose FPT is the true onset.
pub fn generate(spec: &SynthSpec, id: &str) -> Result<BearingRecord> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let acquisitions = (0..spec.acquisitions)
        .map(|i| {
            let a = spec.amplitude(i);
            (0..2 * spec.points)
                .map(|_| {
                    let z: f64 = StandardNormal.sample(&mut rng);
                    a * z
                })
                .collect::<Vec<f64>>()
        })
        .collect();
    let mut rec = BearingRecord::new(id, spec.points, acquisitions)?;
    rec.sample_period_s = DEFAULT_SAMPLE_PERIOD_S;
    rec.with_labels(spec.onset())
}

/// `count` specs jittered around `base`: onset fraction within ±0.1
/// (clipped to [0.1, 0.9]), rate and amplitude scaled by [0.8, 1.2], each
/// with its own seed. Onsets are kept distinct.
pub fn suite_specs(count: usize, base: &SynthSpec, seed: u64) -> Result<Vec<SynthSpec>> {
    if count < 1 {
        return Err(Error::config("count", "must be >= 1"));
    }
    base.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut specs: Vec<SynthSpec> = Vec::with_capacity(count);
    for _ in 0..count {
        let mut spec;
        let mut attempts = 0;
        loop {
            let f = (base.onset_fraction + rng.random_range(-0.1..=0.1)).clamp(0.1, 0.9);
            spec = SynthSpec {
                seed: 0,
                onset_fraction: f,
                rate: base.rate * rng.random_range(0.8..=1.2),
                a0: base.a0 * rng.random_range(0.8..=1.2),
                ..base.clone()
            };
            attempts += 1;
            if specs.iter().all(|s| s.onset() != spec.onset()) || attempts > 1000 {
                break;
            }
        }
        spec.seed = seed.wrapping_mul(1_000_003).wrapping_add(specs.len() as u64 + 1);
        specs.push(spec);
    }
    Ok(specs)
}

pub fn generate_suite(count: usize, base: &SynthSpec, seed: u64) -> Result<Vec<BearingRecord>> {
    suite_specs(count, base, seed)?
        .iter()
        .enumerate()
        .map(|(i, s)| generate(s, &format!("synth-{i:03}")))
        .collect()
}

/// Writes each record as `<id>.csv` plus sidecar; returns the CSV paths.
pub fn write_suite(records: &[BearingRecord], dir: &Path) -> Result<Vec<PathBuf>> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    records
        .iter()
        .map(|r| {
            let path = dir.join(format!("{}.csv", r.id));
            write_native_bearing(r, &path)?;
            Ok(path)
        })
        .collect()
}
