use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::tensor::Tensor;

/// How the HI window is seeded at the start of a segment.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum InitMode {
    /// True labels of the segment's first window.
    #[default]
    Teacher,
    /// All ones (healthy prior).
    Ones,
    /// Last `k` predictions of the previous segment.
    Carryover,
}

impl std::str::FromStr for InitMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "teacher" => Ok(Self::Teacher),
            "ones" => Ok(Self::Ones),
            "carryover" => Ok(Self::Carryover),
            other => Err(Error::config(
                "init_mode",
                format!("unknown mode `{other}` (teacher, ones, carryover)"),
            )),
        }
    }
}

/// The `[B, k]` window of most recent HI values fed to the label branch.
#[derive(Debug, Clone, PartialEq)]
pub struct ArState {
    x2: Tensor,
}

impl ArState {
    pub fn from_tensor(x2: Tensor) -> Result<Self> {
        x2.expect_rank(2, "HI window")?;
        if !x2.all_finite() {
            return Err(Error::contract("HI window holds a non-finite value"));
        }
        Ok(Self { x2 })
    }

    pub fn ones(batch: usize, k: usize) -> Self {
        Self {
            x2: Tensor::full(&[batch, k], 1.0),
        }
    }

    pub fn teacher(label_windows: &Tensor) -> Result<Self> {
        Self::from_tensor(label_windows.clone())
    }

    /// Each row takes the last `k` values of the matching previous rollout.
    pub fn carryover(previous: &[&[f64]], k: usize) -> Result<Self> {
        let mut data = Vec::with_capacity(previous.len() * k);
        for (row, p) in previous.iter().enumerate() {
            if p.len() < k {
                return Err(Error::contract(format!(
                    "carryover row {row} has {} predictions, needs {k}",
                    p.len()
                )));
            }
            data.extend_from_slice(&p[p.len() - k..]);
        }
        if previous.is_empty() {
            return Err(Error::contract("carryover needs at least one previous rollout"));
        }
        Self::from_tensor(Tensor::new(vec![previous.len(), k], data)?)
    }

    pub fn init(
        mode: InitMode,
        batch: usize,
        k: usize,
        label_windows: Option<&Tensor>,
        previous: Option<&[&[f64]]>,
    ) -> Result<Self> {
        let st = match mode {
            InitMode::Ones => Self::ones(batch, k),
            InitMode::Teacher => Self::teacher(
                label_windows.ok_or_else(|| Error::contract("teacher init needs label windows"))?,
            )?,
            InitMode::Carryover => Self::carryover(
                previous.ok_or_else(|| Error::contract("carryover init needs a previous rollout"))?,
                k,
            )?,
        };
        st.x2.expect_shape(&[batch, k], "initial HI window")?;
        Ok(st)
    }

    pub fn x2(&self) -> &Tensor {
        &self.x2
    }

    pub fn batch(&self) -> usize {
        self.x2.shape()[0]
    }

    pub fn k(&self) -> usize {
        self.x2.shape()[1]
    }

    /// Drops the oldest value of every row and appends that row's prediction.
    pub fn shift_update(&self, y_pred: &Tensor) -> Result<Self> {
        let (b, k) = (self.batch(), self.k());
        y_pred.expect_shape(&[b], "shift_update prediction")?;
        let mut data = Vec::with_capacity(b * k);
        for (row, &y) in self.x2.data().chunks(k).zip(y_pred.data()) {
            data.extend_from_slice(&row[1..]);
            data.push(y);
        }
        Self::from_tensor(Tensor::new(vec![b, k], data)?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn shift_drops_oldest() {
        let s = ArState::ones(1, 3);
        let t = s.shift_update(&Tensor::from_slice(&[0.9])).unwrap();
        assert_eq!(t.x2().data(), &[1.0, 1.0, 0.9]);
        assert_eq!(s.x2().data(), &[1.0, 1.0, 1.0], "value semantics");
    }

    #[test]
    fn k_updates_reach_fixed_point() {
        let mut s = ArState::ones(2, 4);
        for _ in 0..4 {
            s = s.shift_update(&Tensor::from_slice(&[0.3, 0.6])).unwrap();
        }
        assert_eq!(s.x2().data(), &[0.3, 0.3, 0.3, 0.3, 0.6, 0.6, 0.6, 0.6]);
        assert_eq!(s.k(), 4);
    }

    #[test]
    fn updates_are_order_sensitive() {
        let s = ArState::ones(1, 3);
        let ab = s.shift_update(&Tensor::from_slice(&[0.5])).unwrap()
            .shift_update(&Tensor::from_slice(&[0.2])).unwrap();
        let ba = s.shift_update(&Tensor::from_slice(&[0.2])).unwrap()
            .shift_update(&Tensor::from_slice(&[0.5])).unwrap();
        assert_eq!(ab.x2().data(), &[1.0, 0.5, 0.2]);
        assert_ne!(ab, ba);
    }

    #[test]
    fn init_modes() {
        let healthy = Tensor::full(&[2, 3], 1.0);
        let t = ArState::init(InitMode::Teacher, 2, 3, Some(&healthy), None).unwrap();
        assert_eq!(t.x2(), &healthy);
        assert_eq!(ArState::init(InitMode::Ones, 1, 4, None, None).unwrap().x2().data(), &[1.0; 4]);
        let prev: &[f64] = &[0.9, 0.5, 0.40, 0.38];
        let c = ArState::init(InitMode::Carryover, 1, 2, None, Some(&[prev])).unwrap();
        assert_eq!(c.x2().data(), &[0.40, 0.38]);
    }

    #[test]
    fn missing_init_inputs() {
        assert!(ArState::init(InitMode::Teacher, 1, 2, None, None).is_err());
        assert!(ArState::init(InitMode::Carryover, 1, 2, None, None).is_err());
        let short: &[f64] = &[0.5];
        assert!(ArState::init(InitMode::Carryover, 1, 2, None, Some(&[short])).is_err());
        let wrong = Tensor::full(&[1, 3], 1.0);
        assert!(ArState::init(InitMode::Teacher, 1, 2, Some(&wrong), None).is_err());
    }
}
