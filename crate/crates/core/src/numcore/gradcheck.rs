//! Central finite-difference verification of analytic gradients.
//!
//! Each parameter block is compared with a norm-wise relative error
//! `‖analytic − numeric‖₂ / max(‖analytic‖₂, ‖numeric‖₂, ZERO_NORM)`, which
//! stays meaningful when individual entries are near zero. The floor keeps
//! blocks whose true gradient is exactly zero (a conv bias feeding
//! batchnorm) from comparing difference noise against nothing.

use super::Parameterized;
use crate::error::Result;

#[derive(Debug, Clone, Copy)]
pub struct GradCheckConfig {
    /// Perturbation size.
    pub step: f64,
    /// Check at most this many evenly spaced entries per block.
    pub max_entries_per_block: Option<usize>,
}

impl Default for GradCheckConfig {
    fn default() -> Self {
        Self {
            step: 1e-5,
            max_entries_per_block: None,
        }
    }
}

#[derive(Debug, Clone)]
pub struct BlockReport {
    pub name: String,
    pub checked: usize,
    pub max_abs_error: f64,
    pub rel_error: f64,
}

#[derive(Debug, Clone, Default)]
pub struct GradReport {
    pub blocks: Vec<BlockReport>,
}

impl GradReport {
    pub fn max_rel_error(&self) -> f64 {
        self.blocks.iter().map(|b| b.rel_error).fold(0.0, f64::max)
    }

    /// Blocks whose relative error exceeds `tol`.
    pub fn failures(&self, tol: f64) -> Vec<&BlockReport> {
        self.blocks.iter().filter(|b| b.rel_error.is_nan() || b.rel_error > tol).collect()
    }
}

/// Gradient norms below this are treated as zero. Central differences with
/// a 1e-5 step on an O(1) loss carry noise up to about 1e-9 per block.
pub const ZERO_NORM: f64 = 1e-5;

/// Norm-wise relative difference between two gradient vectors.
pub fn relative_error(analytic: &[f64], numeric: &[f64]) -> f64 {
    let diff = analytic
        .iter()
        .zip(numeric)
        .map(|(a, n)| (a - n) * (a - n))
        .sum::<f64>()
        .sqrt();
    diff / norm(analytic).max(norm(numeric)).max(ZERO_NORM)
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// Central differences of a scalar function at `x`.
pub fn finite_difference(mut f: impl FnMut(&[f64]) -> f64, x: &[f64], step: f64) -> Vec<f64> {
    let mut probe = x.to_vec();
    (0..x.len())
        .map(|i| {
            probe[i] = x[i] + step;
            let up = f(&probe);
            probe[i] = x[i] - step;
            let down = f(&probe);
            probe[i] = x[i];
            (up - down) / (2.0 * step)
        })
        .collect()
}

/// Compares the gradients left in the model by `backprop` with central
/// differences of `loss`.
///
/// `backprop` must zero gradients, run forward and backward for the same
/// scalar objective that `loss` evaluates. `loss` must not depend on state
/// that changes between calls (seed any dropout inside it).
pub fn gradient_check<M: Parameterized>(
    model: &mut M,
    mut loss: impl FnMut(&mut M) -> Result<f64>,
    backprop: impl FnOnce(&mut M) -> Result<()>,
    config: GradCheckConfig,
) -> Result<GradReport> {
    backprop(model)?;
    let analytic: Vec<(String, Vec<f64>)> = model
        .params_mut()
        .into_iter()
        .map(|(name, p)| (name, p.grad.data().to_vec()))
        .collect();

    let mut report = GradReport::default();
    for (block, (name, grads)) in analytic.iter().enumerate() {
        let indices: Vec<usize> = match config.max_entries_per_block {
            Some(cap) if cap < grads.len() => {
                (0..cap).map(|i| i * grads.len() / cap).collect()
            }
            _ => (0..grads.len()).collect(),
        };
        let mut numeric = Vec::with_capacity(indices.len());
        for &i in &indices {
            let original = param_value(model, block, i);
            set_param_value(model, block, i, original + config.step);
            let up = loss(model)?;
            set_param_value(model, block, i, original - config.step);
            let down = loss(model)?;
            set_param_value(model, block, i, original);
            numeric.push((up - down) / (2.0 * config.step));
        }
        let selected: Vec<f64> = indices.iter().map(|&i| grads[i]).collect();
        let max_abs_error = selected
            .iter()
            .zip(&numeric)
            .map(|(a, n)| (a - n).abs())
            .fold(0.0, f64::max);
        report.blocks.push(BlockReport {
            name: name.clone(),
            checked: indices.len(),
            max_abs_error,
            rel_error: relative_error(&selected, &numeric),
        });
    }
    Ok(report)
}

fn param_value<M: Parameterized>(model: &mut M, block: usize, index: usize) -> f64 {
    model.params_mut()[block].1.value.data()[index]
}

fn set_param_value<M: Parameterized>(model: &mut M, block: usize, index: usize, value: f64) {
    model.params_mut()[block].1.value.data_mut()[index] = value;
}
