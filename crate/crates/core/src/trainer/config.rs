use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::armodel::{Ablation, InitMode, ModelConfig};
use crate::error::{Error, Result};

/// Iteration schedule as written in a config file: either per-epoch
/// triples or the flat 6/9-element encoding (`z` values per epoch).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ScheduleSpec {
    Nested(Vec<Vec<usize>>),
    Flat(Vec<usize>),
}

impl ScheduleSpec {
    pub fn into_nested(self, z: usize) -> Result<Vec<Vec<usize>>> {
        match self {
            ScheduleSpec::Nested(v) => Ok(v),
            ScheduleSpec::Flat(v) => {
                if z == 0 || v.is_empty() || v.len() % z != 0 {
                    return Err(Error::config(
                        "iters_schedule, z",
                        format!("flat schedule of {} values does not split into parts of z = {z}", v.len()),
                    ));
                }
                Ok(v.chunks(z).map(<[usize]>::to_vec).collect())
            }
        }
    }
}

impl std::str::FromStr for ScheduleSpec {
    type Err = Error;

    /// Comma-separated flat list, e.g. `2,2,2,2,2,1,2,1,1`.
    fn from_str(s: &str) -> Result<Self> {
        s.split(',')
            .map(|v| v.trim().parse::<usize>())
            .collect::<std::result::Result<Vec<_>, _>>()
            .map(ScheduleSpec::Flat)
            .map_err(|_| Error::config("iters_schedule", format!("`{s}` is not a comma-separated list")))
    }
}

/// Every training hyperparameter, with all defaults materialized.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub k: usize,
    pub n: usize,
    pub epochs: usize,
    pub lr: f64,
    pub weight_decay: f64,
    pub seed: u64,
    /// Steps per segment that receive repeated training.
    pub bg: usize,
    /// Parts the first `bg` steps are split into.
    pub z: usize,
    /// Iterations per part, one row per epoch; the last row repeats.
    pub iters_schedule: Vec<Vec<usize>>,
    pub bearings_per_batch: usize,
    pub init_mode: InitMode,
    pub ablation: Ablation,
    pub channel_scale: f64,
    pub label_branch_channels: usize,
    pub fusion_hidden: usize,
    pub dropout_rate: f64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            k: 45,
            n: 15,
            epochs: 6,
            lr: 0.0008,
            weight_decay: 0.01,
            seed: 15,
            bg: 120,
            z: 3,
            iters_schedule: vec![vec![2, 2, 2], vec![2, 2, 1], vec![2, 1, 1]],
            bearings_per_batch: 3,
            init_mode: InitMode::Teacher,
            ablation: Ablation::None,
            channel_scale: 1.0,
            label_branch_channels: 8,
            fusion_hidden: 256,
            dropout_rate: 0.2,
        }
    }
}

impl TrainConfig {
    /// Checks everything that does not depend on the data.
    pub fn validate(&self) -> Result<()> {
        if self.epochs < 1 {
            return Err(Error::config("epochs", "must be >= 1"));
        }
        if self.k < 1 {
            return Err(Error::config("k", "must be >= 1"));
        }
        if self.n < 1 {
            return Err(Error::config("n", "must be >= 1"));
        }
        if self.z < 1 {
            return Err(Error::config("z", "must be >= 1"));
        }
        if !self.bg.is_multiple_of(self.z) {
            return Err(Error::config(
                "bg, z",
                format!("bg = {} is not divisible by z = {}", self.bg, self.z),
            ));
        }
        if self.iters_schedule.is_empty() {
            return Err(Error::config("iters_schedule", "needs at least one epoch entry"));
        }
        for (e, row) in self.iters_schedule.iter().enumerate() {
            if row.len() != self.z {
                return Err(Error::config(
                    "iters_schedule, z",
                    format!("epoch entry {e} has {} parts, z = {}", row.len(), self.z),
                ));
            }
            if row.contains(&0) {
                return Err(Error::config("iters_schedule", "iteration counts must be >= 1"));
            }
        }
        if self.bearings_per_batch < 1 {
            return Err(Error::config("bearings_per_batch", "must be >= 1"));
        }
        if self.init_mode == InitMode::Carryover {
            return Err(Error::config(
                "init_mode",
                "carryover needs a finished previous segment and is only available at inference",
            ));
        }
        if !(self.lr >= 0.0 && self.lr.is_finite()) {
            return Err(Error::config("lr", "must be finite and >= 0"));
        }
        if !(self.weight_decay >= 0.0 && self.weight_decay.is_finite()) {
            return Err(Error::config("weight_decay", "must be finite and >= 0"));
        }
        self.model_config(64).validate().map_err(|e| match e {
            Error::Config { field, message } if field != "points" => Error::Config { field, message },
            other => other,
        })
    }

    /// Checks the constraints that need the segment length `m`.
    pub fn validate_for_segment(&self, m: usize) -> Result<()> {
        self.validate()?;
        if self.bg > m {
            return Err(Error::config(
                "bg",
                format!("bg = {} exceeds the {m} windows per segment", self.bg),
            ));
        }
        Ok(())
    }

    pub fn model_config(&self, points: usize) -> ModelConfig {
        ModelConfig {
            k: self.k,
            points,
            channel_scale: self.channel_scale,
            label_branch_channels: self.label_branch_channels,
            fusion_hidden: self.fusion_hidden,
            dropout_rate: self.dropout_rate,
            ablation: self.ablation,
        }
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("train config serializes")
    }
}

/// A config layer where every field is optional: one per config file, one
/// for command-line flags.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PartialTrainConfig {
    pub k: Option<usize>,
    pub n: Option<usize>,
    pub epochs: Option<usize>,
    pub lr: Option<f64>,
    pub weight_decay: Option<f64>,
    pub seed: Option<u64>,
    pub bg: Option<usize>,
    pub z: Option<usize>,
    pub iters_schedule: Option<ScheduleSpec>,
    pub bearings_per_batch: Option<usize>,
    pub init_mode: Option<InitMode>,
    pub ablation: Option<Ablation>,
    pub channel_scale: Option<f64>,
    pub label_branch_channels: Option<usize>,
    pub fusion_hidden: Option<usize>,
    pub dropout_rate: Option<f64>,
}

impl PartialTrainConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::config("config file", e.message().to_string()))
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml(&text).map_err(|e| match e {
            Error::Config { message, .. } => Error::config(path.display().to_string(), message),
            other => other,
        })
    }

    /// Fields set in `over` replace those in `self`.
    pub fn overlay(self, over: PartialTrainConfig) -> Self {
        Self {
            k: over.k.or(self.k),
            n: over.n.or(self.n),
            epochs: over.epochs.or(self.epochs),
            lr: over.lr.or(self.lr),
            weight_decay: over.weight_decay.or(self.weight_decay),
            seed: over.seed.or(self.seed),
            bg: over.bg.or(self.bg),
            z: over.z.or(self.z),
            iters_schedule: over.iters_schedule.or(self.iters_schedule),
            bearings_per_batch: over.bearings_per_batch.or(self.bearings_per_batch),
            init_mode: over.init_mode.or(self.init_mode),
            ablation: over.ablation.or(self.ablation),
            channel_scale: over.channel_scale.or(self.channel_scale),
            label_branch_channels: over.label_branch_channels.or(self.label_branch_channels),
            fusion_hidden: over.fusion_hidden.or(self.fusion_hidden),
            dropout_rate: over.dropout_rate.or(self.dropout_rate),
        }
    }

    /// Fills unset fields from the defaults: flag > file > default.
    pub fn resolve(self) -> Result<TrainConfig> {
        let d = TrainConfig::default();
        let z = self.z.unwrap_or(d.z);
        let iters_schedule = match self.iters_schedule {
            Some(s) => s.into_nested(z)?,
            None => d.iters_schedule,
        };
        let cfg = TrainConfig {
            k: self.k.unwrap_or(d.k),
            n: self.n.unwrap_or(d.n),
            epochs: self.epochs.unwrap_or(d.epochs),
            lr: self.lr.unwrap_or(d.lr),
            weight_decay: self.weight_decay.unwrap_or(d.weight_decay),
            seed: self.seed.unwrap_or(d.seed),
            bg: self.bg.unwrap_or(d.bg),
            z,
            iters_schedule,
            bearings_per_batch: self.bearings_per_batch.unwrap_or(d.bearings_per_batch),
            init_mode: self.init_mode.unwrap_or(d.init_mode),
            ablation: self.ablation.unwrap_or(d.ablation),
            channel_scale: self.channel_scale.unwrap_or(d.channel_scale),
            label_branch_channels: self.label_branch_channels.unwrap_or(d.label_branch_channels),
            fusion_hidden: self.fusion_hidden.unwrap_or(d.fusion_hidden),
            dropout_rate: self.dropout_rate.unwrap_or(d.dropout_rate),
        };
        cfg.validate()?;
        Ok(cfg)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_match_published_settings() {
        let c = TrainConfig::default();
        assert_eq!((c.epochs, c.lr, c.bg, c.z, c.k, c.n), (6, 0.0008, 120, 3, 45, 15));
        assert_eq!(c.iters_schedule, vec![vec![2, 2, 2], vec![2, 2, 1], vec![2, 1, 1]]);
        c.validate().unwrap();
        c.validate_for_segment(200).unwrap();
        assert!(matches!(c.validate_for_segment(100), Err(Error::Config { ref field, .. }) if field == "bg"));
    }

    #[test]
    fn bg_not_divisible_by_z_names_both() {
        let err = PartialTrainConfig { bg: Some(100), ..Default::default() }.resolve().unwrap_err();
        match err {
            Error::Config { field, .. } => assert_eq!(field, "bg, z"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn zero_epochs_rejected() {
        let r = PartialTrainConfig { epochs: Some(0), ..Default::default() }.resolve();
        assert!(matches!(r, Err(Error::Config { ref field, .. }) if field == "epochs"));
    }

    #[test]
    fn carryover_rejected_for_training() {
        let r = PartialTrainConfig { init_mode: Some(InitMode::Carryover), ..Default::default() }.resolve();
        assert!(matches!(r, Err(Error::Config { ref field, .. }) if field == "init_mode"));
    }

    #[test]
    fn flat_six_and_nine_element_schedules() {
        let toml = "iters_schedule = [2,2,1, 1,1,1]\nk = 15\nbg = 30";
        let c = PartialTrainConfig::from_toml(toml).unwrap().resolve().unwrap();
        assert_eq!(c.iters_schedule, vec![vec![2, 2, 1], vec![1, 1, 1]]);
        let c = PartialTrainConfig::from_toml("iters_schedule = [3,2,2,2,2,1,2,1,1]").unwrap().resolve().unwrap();
        assert_eq!(c.iters_schedule.len(), 3);
        let c = PartialTrainConfig::from_toml("iters_schedule = [[1,1,1]]").unwrap().resolve().unwrap();
        assert_eq!(c.iters_schedule, vec![vec![1, 1, 1]]);
        assert!(PartialTrainConfig::from_toml("iters_schedule = [2,2]").unwrap().resolve().is_err());
        assert_eq!("2,2,2, 2,1,1".parse::<ScheduleSpec>().unwrap(), ScheduleSpec::Flat(vec![2, 2, 2, 2, 1, 1]));
    }

    #[test]
    fn unknown_key_rejected() {
        assert!(PartialTrainConfig::from_toml("learning_rate = 0.1").is_err());
    }

    #[test]
    fn resolved_config_round_trips_through_toml() {
        let c = TrainConfig { init_mode: InitMode::Ones, ablation: Ablation::NonAutoregressive, ..Default::default() };
        let back: TrainConfig = toml::from_str(&c.to_toml()).unwrap();
        assert_eq!(back, c);
        let partial = PartialTrainConfig::from_toml(&c.to_toml()).unwrap();
        assert_eq!(partial.resolve().unwrap(), c);
    }
}
