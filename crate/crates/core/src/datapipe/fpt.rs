//! First-prediction-time detection with a 3σ exceedance rule.

use serde::{Deserialize, Serialize};

use super::BearingRecord;
use crate::error::{Error, Result};

/// Per-acquisition scalar monitored for degradation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Indicator {
    /// Root mean square over both channels.
    #[default]
    Rms,
    /// Excess-free kurtosis over both channels (scale invariant).
    Kurtosis,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Fpt3SigmaConfig {
    pub indicator: Indicator,
    /// Leading acquisitions assumed healthy; they define μ and σ.
    pub baseline_count: usize,
    /// Successive exceedances needed to declare degradation.
    pub consecutive_required: usize,
}

impl Default for Fpt3SigmaConfig {
    fn default() -> Self {
        Self {
            indicator: Indicator::Rms,
            baseline_count: 100,
            consecutive_required: 2,
        }
    }
}

pub fn indicator_series(record: &BearingRecord, indicator: Indicator) -> Vec<f64> {
    record
        .acquisitions
        .iter()
        .map(|a| {
            let n = a.len() as f64;
            match indicator {
                Indicator::Rms => (a.iter().map(|v| v * v).sum::<f64>() / n).sqrt(),
                Indicator::Kurtosis => {
                    let mean = a.iter().sum::<f64>() / n;
                    let m2 = a.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
                    let m4 = a.iter().map(|v| (v - mean).powi(4)).sum::<f64>() / n;
                    if m2 == 0.0 {
                        0.0
                    } else {
                        m4 / (m2 * m2)
                    }
                }
            }
        })
        .collect()
}

/// Index of the first acquisition after the baseline that starts a run of
/// `consecutive_required` indicators above `μ + 3σ`. Returns the last index
/// when no such run exists.
pub fn detect_fpt(record: &BearingRecord, config: &Fpt3SigmaConfig) -> Result<usize> {
    if config.baseline_count < 2 {
        return Err(Error::config("baseline_count", "must be at least 2"));
    }
    if config.consecutive_required < 1 {
        return Err(Error::config("consecutive_required", "must be at least 1"));
    }
    if config.baseline_count >= record.len() {
        return Err(Error::contract(format!(
            "fpt baseline of {} acquisitions does not fit in {} ({} acquisitions)",
            config.baseline_count,
            record.id,
            record.len()
        )));
    }
    let series = indicator_series(record, config.indicator);
    let base = &series[..config.baseline_count];
    let n = base.len() as f64;
    let mean = base.iter().sum::<f64>() / n;
    let std = (base.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n).sqrt();
    let threshold = mean + 3.0 * std;

    let mut run = 0;
    for (i, &v) in series.iter().enumerate().skip(config.baseline_count) {
        if v > threshold {
            run += 1;
            if run == config.consecutive_required {
                return Ok(i + 1 - run);
            }
        } else {
            run = 0;
        }
    }
    Ok(record.len() - 1)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use rand_distr::{Distribution, Normal};

    fn noise_record(seed: u64, amplitudes: &[f64], points: usize) -> BearingRecord {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let acq = amplitudes
            .iter()
            .map(|&a| {
                let d = Normal::new(0.0, a).unwrap();
                (0..2 * points).map(|_| d.sample(&mut rng)).collect()
            })
            .collect();
        BearingRecord::new("noise", points, acq).unwrap()
    }

    #[test]
    fn finds_amplitude_step() {
        let amps: Vec<f64> = (0..400).map(|i| if i < 300 { 1.0 } else { 5.0 }).collect();
        let rec = noise_record(11, &amps, 256);
        let cfg = Fpt3SigmaConfig::default();
        let fpt = detect_fpt(&rec, &cfg).unwrap();
        assert!((298..=302).contains(&fpt), "fpt {fpt}");
    }

    #[test]
    fn stationary_noise_reports_last_index() {
        let rec = noise_record(5, &[1.0; 250], 2560);
        let cfg = Fpt3SigmaConfig {
            consecutive_required: 3,
            ..Default::default()
        };
        assert_eq!(detect_fpt(&rec, &cfg).unwrap(), 249);
    }

    #[test]
    fn baseline_longer_than_record() {
        let rec = noise_record(1, &[1.0; 50], 8);
        assert!(matches!(
            detect_fpt(&rec, &Fpt3SigmaConfig::default()),
            Err(Error::Contract(_))
        ));
    }

    #[test]
    fn invariant_under_positive_rescaling() {
        let amps: Vec<f64> = (0..300).map(|i| if i < 180 { 1.0 } else { 1.0 + 0.05 * (i - 180) as f64 }).collect();
        let rec = noise_record(3, &amps, 128);
        let cfg = Fpt3SigmaConfig::default();
        let base = detect_fpt(&rec, &cfg).unwrap();
        for a in [0.001, 0.5, 7.0, 1e4] {
            let mut scaled = rec.clone();
            scaled.acquisitions.iter_mut().flatten().for_each(|v| *v *= a);
            assert_eq!(detect_fpt(&scaled, &cfg).unwrap(), base, "scale {a}");
        }
    }
}
