use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Output channels of blocks 1–4; block 5 has `18·k`.
pub const CHANNEL_PLAN: [usize; 4] = [32, 32, 64, 128];
/// Kernel and stride of each block's max pooling.
pub const POOL_PLAN: [usize; 5] = [2, 2, 4, 2, 2];
pub const CONV5_PER_WINDOW: usize = 18;

/// How the HI-window branch is fed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
pub enum Ablation {
    /// Predictions are shifted into the HI window (the full model).
    #[default]
    #[serde(rename = "none")]
    None,
    /// The HI window is held at ones and never shifted.
    #[serde(rename = "non-ar")]
    NonAutoregressive,
}

impl Ablation {
    pub const NAMES: [&'static str; 2] = ["none", "non-ar"];

    pub fn name(self) -> &'static str {
        match self {
            Ablation::None => "none",
            Ablation::NonAutoregressive => "non-ar",
        }
    }
}

impl std::str::FromStr for Ablation {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "none" | "ar" => Ok(Ablation::None),
            "non-ar" | "nar" => Ok(Ablation::NonAutoregressive),
            other => Err(Error::config(
                "ablation",
                format!("unknown ablation `{other}`; valid names: {}", Ablation::NAMES.join(", ")),
            )),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelConfig {
    /// Window size in acquisitions.
    pub k: usize,
    /// Points per acquisition, `S`.
    pub points: usize,
    /// Width multiplier on every backbone channel count.
    pub channel_scale: f64,
    pub label_branch_channels: usize,
    pub fusion_hidden: usize,
    pub dropout_rate: f64,
    #[serde(default)]
    pub ablation: Ablation,
}

impl ModelConfig {
    pub fn new(k: usize, points: usize) -> Self {
        Self {
            k,
            points,
            channel_scale: 1.0,
            label_branch_channels: 8,
            fusion_hidden: 256,
            dropout_rate: 0.2,
            ablation: Ablation::None,
        }
    }

    fn scaled(&self, channels: usize) -> usize {
        ((channels as f64 * self.channel_scale).round() as usize).max(1)
    }

    /// Output channels of the five convolution blocks.
    pub fn channel_plan(&self) -> [usize; 5] {
        [
            self.scaled(CHANNEL_PLAN[0]),
            self.scaled(CHANNEL_PLAN[1]),
            self.scaled(CHANNEL_PLAN[2]),
            self.scaled(CHANNEL_PLAN[3]),
            self.scaled(CONV5_PER_WINDOW * self.k),
        ]
    }

    pub fn total_pooling(&self) -> usize {
        POOL_PLAN.iter().product()
    }

    /// Length after each pooling stage.
    pub fn length_plan(&self) -> [usize; 5] {
        let mut len = self.points;
        POOL_PLAN.map(|p| {
            len /= p;
            len
        })
    }

    pub fn backbone_features(&self) -> usize {
        self.channel_plan()[4] * self.points / self.total_pooling()
    }

    pub fn fusion_inputs(&self) -> usize {
        self.backbone_features() + self.k * self.label_branch_channels
    }

    pub fn validate(&self) -> Result<()> {
        if self.k == 0 {
            return Err(Error::config("k", "window size must be >= 1"));
        }
        if self.points == 0 || !self.points.is_multiple_of(self.total_pooling()) {
            return Err(Error::config(
                "points",
                format!(
                    "points per acquisition ({}) must be a positive multiple of {}",
                    self.points,
                    self.total_pooling()
                ),
            ));
        }
        if !(self.channel_scale > 0.0 && self.channel_scale <= 1.0) {
            return Err(Error::config("channel_scale", "must lie in (0, 1]"));
        }
        if self.label_branch_channels == 0 {
            return Err(Error::config("label_branch_channels", "must be >= 1"));
        }
        if self.fusion_hidden == 0 {
            return Err(Error::config("fusion_hidden", "must be >= 1"));
        }
        if !(0.0..1.0).contains(&self.dropout_rate) {
            return Err(Error::config("dropout_rate", "must lie in [0, 1)"));
        }
        Ok(())
    }

    /// Writes the model manifest (`key = value` lines).
    pub fn save(&self, path: &Path) -> Result<()> {
        let text = toml::to_string(self).map_err(|e| Error::Format(e.to_string()))?;
        std::fs::write(path, text).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let cfg: Self =
            toml::from_str(&text).map_err(|e| Error::Format(format!("{}: {e}", path.display())))?;
        cfg.validate()?;
        Ok(cfg)
    }
}
