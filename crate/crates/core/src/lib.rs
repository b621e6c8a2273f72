//! Multi-input autoregressive 1-D CNN for bearing remaining-useful-life
//! prediction.
//!
//! The network reads a window of `k` vibration acquisitions together with
//! the `k` most recent health-indicator (HI) values and predicts the HI of
//! the next acquisition. At inference the prediction is shifted into the HI
//! window and the model rolls forward over the whole bearing life.
//!
//! Module map:
//! - [`numcore`]: layer kernels with exact backward, AdamW, gradient checking
//! - [`datapipe`]: ingestion, normalization, FPT detection, labels, windowing
//! - [`armodel`]: the two-branch network and its HI window state
//! - [`trainer`]: the segment-lockstep training loop with repeated early steps
//! - [`evaluator`]: rollout inference and RMSE / MAE / score
//! - [`synthgen`]: seeded synthetic degradation records
//! - [`cli`]: command implementations behind the `ar-rul` binary

pub mod checkpoint;
pub mod error;
pub mod numcore;
pub mod tensor;

pub use error::{Error, Result};
pub use tensor::Tensor;
pub mod datapipe;
pub mod armodel;
pub mod trainer;
pub mod evaluator;
pub mod synthgen;
pub mod cli;
