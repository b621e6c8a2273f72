//! Fixed kernel set for the convolutional regressor: forward and exact
//! backward for every layer type the network uses, MSE, AdamW, and a
//! central-difference gradient checker.
//!
//! Layers cache what their backward needs during a training-mode forward
//! and consume it on backward. Parameter gradients accumulate into
//! [`Param::grad`] until [`Parameterized::zero_grad`] is called.

mod adamw;
mod batchnorm;
mod conv;
mod dropout;
pub mod gradcheck;
mod init;
mod linear;
mod loss;
mod param;
mod pool;
mod relu;

pub use adamw::{AdamW, AdamWState};
pub use batchnorm::BatchNorm1d;
pub use conv::Conv1d;
pub use dropout::Dropout;
pub use gradcheck::{gradient_check, GradCheckConfig, GradReport};
pub use init::uniform_fan_in;
pub use linear::Linear;
pub use loss::{masked_mse_loss, mse_loss};
pub use param::{Param, Parameterized};
pub use pool::MaxPool1d;
pub use relu::{relu, Relu};

/// Whether a forward pass should cache for backward and use batch statistics.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    Train,
    Eval,
}
