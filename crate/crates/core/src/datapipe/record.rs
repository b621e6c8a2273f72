use crate::error::{Error, Result};

pub const DEFAULT_POINTS: usize = 2560;
pub const DEFAULT_SAMPLE_PERIOD_S: f64 = 10.0;

/// One bearing's run-to-failure history.
///
/// Each acquisition is stored channel-major: `S` horizontal samples followed
/// by `S` vertical samples.
#[derive(Debug, Clone, PartialEq)]
pub struct BearingRecord {
    pub id: String,
    pub points: usize,
    pub sample_period_s: f64,
    pub acquisitions: Vec<Vec<f64>>,
    /// HI per acquisition, 1 = healthy, 0 = failed.
    pub labels: Option<Vec<f64>>,
    pub fpt_index: Option<usize>,
}

impl BearingRecord {
    pub fn new(id: impl Into<String>, points: usize, acquisitions: Vec<Vec<f64>>) -> Result<Self> {
        let rec = Self {
            id: id.into(),
            points,
            sample_period_s: DEFAULT_SAMPLE_PERIOD_S,
            acquisitions,
            labels: None,
            fpt_index: None,
        };
        rec.validate()?;
        Ok(rec)
    }

    pub fn len(&self) -> usize {
        self.acquisitions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.acquisitions.is_empty()
    }

    /// `channel` 0 is horizontal, 1 vertical.
    pub fn channel(&self, acquisition: usize, channel: usize) -> &[f64] {
        &self.acquisitions[acquisition][channel * self.points..][..self.points]
    }

    pub fn with_labels(mut self, fpt_index: usize) -> Result<Self> {
        self.labels = Some(super::make_labels(self.len(), fpt_index)?);
        self.fpt_index = Some(fpt_index);
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        if self.points == 0 {
            return Err(Error::contract(format!("{}: zero points per acquisition", self.id)));
        }
        for (i, a) in self.acquisitions.iter().enumerate() {
            if a.len() != 2 * self.points {
                return Err(Error::contract(format!(
                    "{}: acquisition {i} holds {} values, expected 2 x {}",
                    self.id,
                    a.len(),
                    self.points
                )));
            }
        }
        if let Some(labels) = &self.labels {
            if labels.len() != self.len() {
                return Err(Error::contract(format!(
                    "{}: {} labels for {} acquisitions",
                    self.id,
                    labels.len(),
                    self.len()
                )));
            }
            if labels.iter().any(|v| !(0.0..=1.0).contains(v)) {
                return Err(Error::contract(format!("{}: label outside [0, 1]", self.id)));
            }
            if labels.windows(2).any(|w| w[1] > w[0]) {
                return Err(Error::contract(format!("{}: labels increase", self.id)));
            }
        }
        if let Some(fpt) = self.fpt_index {
            if fpt >= self.len() {
                return Err(Error::contract(format!("{}: fpt {fpt} out of range", self.id)));
            }
        }
        Ok(())
    }
}
