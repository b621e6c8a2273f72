use rand::{Rng, RngExt};

use super::Mode;
use crate::error::{Error, Result};
use crate::tensor::Tensor;

/// Inverted dropout: kept activations are scaled by `1 / (1 - rate)`.
#[derive(Debug, Clone)]
pub struct Dropout {
    rate: f64,
    mask: Option<Vec<f64>>,
}

impl Dropout {
    pub fn new(rate: f64) -> Result<Self> {
        if !(0.0..1.0).contains(&rate) {
            return Err(Error::contract(format!("dropout rate {rate} outside [0, 1)")));
        }
        Ok(Self { rate, mask: None })
    }

    pub fn rate(&self) -> f64 {
        self.rate
    }

    pub fn forward<R: Rng + ?Sized>(&mut self, input: &Tensor, mode: Mode, rng: &mut R) -> Tensor {
        match mode {
            Mode::Eval => input.clone(),
            Mode::Train => {
                let mask: Vec<f64> = if self.rate == 0.0 {
                    vec![1.0; input.len()]
                } else {
                    let keep = 1.0 / (1.0 - self.rate);
                    (0..input.len())
                        .map(|_| if rng.random_bool(self.rate) { 0.0 } else { keep })
                        .collect()
                };
                let mut out = input.clone();
                for (v, m) in out.data_mut().iter_mut().zip(&mask) {
                    *v *= m;
                }
                self.mask = Some(mask);
                out
            }
        }
    }

    pub fn backward(&mut self, grad_out: &Tensor) -> Result<Tensor> {
        let mask = self
            .mask
            .take()
            .ok_or_else(|| Error::state("dropout backward without a training-mode forward"))?;
        if mask.len() != grad_out.len() {
            return Err(Error::contract("dropout grad_out does not match cached mask"));
        }
        let mut g = grad_out.clone();
        for (v, m) in g.data_mut().iter_mut().zip(&mask) {
            *v *= m;
        }
        Ok(g)
    }
}
