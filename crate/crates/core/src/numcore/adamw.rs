//! Adam with decoupled weight decay.
//!
//! ```text
//! p ← p − lr·wd·p
//! m ← β1·m + (1 − β1)·g
//! v ← β2·v + (1 − β2)·g²
//! p ← p − lr · (m / (1 − β1ᵗ)) / (sqrt(v / (1 − β2ᵗ)) + ε)
//! ```

use super::Parameterized;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct AdamWState {
    pub step: u64,
    pub first_moment: Vec<Vec<f64>>,
    pub second_moment: Vec<Vec<f64>>,
}

#[derive(Debug, Clone)]
pub struct AdamW {
    pub lr: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
    pub weight_decay: f64,
    pub state: AdamWState,
}

impl AdamW {
    pub fn new(lr: f64, weight_decay: f64) -> Self {
        Self {
            lr,
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
            weight_decay,
            state: AdamWState {
                step: 0,
                first_moment: Vec::new(),
                second_moment: Vec::new(),
            },
        }
    }

    /// One update of every parameter from its accumulated gradient.
    pub fn step<M: Parameterized + ?Sized>(&mut self, model: &mut M) -> Result<()> {
        let mut params = model.params_mut();
        let st = &mut self.state;
        if st.first_moment.is_empty() {
            st.first_moment = params.iter().map(|(_, p)| vec![0.0; p.value.len()]).collect();
            st.second_moment = st.first_moment.clone();
        }
        if st.first_moment.len() != params.len() {
            return Err(Error::contract(format!(
                "adamw: optimizer tracks {} parameters, model has {}",
                st.first_moment.len(),
                params.len()
            )));
        }
        st.step += 1;
        let t = st.step as i32;
        let bc1 = 1.0 - self.beta1.powi(t);
        let bc2 = 1.0 - self.beta2.powi(t);
        let decay = 1.0 - self.lr * self.weight_decay;

        for (i, (name, p)) in params.iter_mut().enumerate() {
            let m = &mut st.first_moment[i];
            let v = &mut st.second_moment[i];
            if m.len() != p.value.len() {
                return Err(Error::contract(format!("adamw: `{name}` changed size")));
            }
            let grads = p.grad.data().to_vec();
            for (j, w) in p.value.data_mut().iter_mut().enumerate() {
                let g = grads[j];
                *w *= decay;
                m[j] = self.beta1 * m[j] + (1.0 - self.beta1) * g;
                v[j] = self.beta2 * v[j] + (1.0 - self.beta2) * g * g;
                let mhat = m[j] / bc1;
                let vhat = v[j] / bc2;
                *w -= self.lr * mhat / (vhat.sqrt() + self.eps);
            }
        }
        Ok(())
    }
}
