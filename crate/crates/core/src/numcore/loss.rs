use crate::error::{Error, Result};
use crate::tensor::Tensor;

/// Mean squared error and its gradient with respect to `pred`.
pub fn mse_loss(pred: &Tensor, target: &Tensor) -> Result<(f64, Tensor)> {
    masked_mse_loss(pred, target, None)
}

/// MSE over the rows where `mask` is true; other rows get zero gradient.
///
/// With an all-false mask the loss is 0 and the gradient is zero.
pub fn masked_mse_loss(pred: &Tensor, target: &Tensor, mask: Option<&[bool]>) -> Result<(f64, Tensor)> {
    if pred.shape() != target.shape() {
        return Err(Error::contract(format!(
            "mse: prediction shape {:?} vs target shape {:?}",
            pred.shape(),
            target.shape()
        )));
    }
    if let Some(m) = mask {
        if m.len() != pred.len() {
            return Err(Error::contract("mse: mask length differs from prediction length"));
        }
    }
    let active = |i: usize| mask.is_none_or(|m| m[i]);
    let count = (0..pred.len()).filter(|&i| active(i)).count();
    let mut grad = Tensor::zeros(pred.shape());
    if count == 0 {
        return Ok((0.0, grad));
    }
    let n = count as f64;
    let mut loss = 0.0;
    for (i, g) in grad.data_mut().iter_mut().enumerate() {
        if active(i) {
            let d = pred.data()[i] - target.data()[i];
            loss += d * d;
            *g = 2.0 * d / n;
        }
    }
    Ok((loss / n, grad))
}
