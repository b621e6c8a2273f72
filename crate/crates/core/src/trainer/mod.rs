//! Segment-lockstep autoregressive training with repeated early steps.
//!
//! All segments of a group of bearings advance together, one window per
//! step. The first `bg` steps of each segment are split into `z` parts and
//! each part is trained for a per-epoch number of iterations while the HI
//! window stays fixed; the window is shifted once per step.

mod config;
mod schedule;
mod train;

pub use config::{PartialTrainConfig, ScheduleSpec, TrainConfig};
pub use schedule::{expected_backward_passes, find_train_iters};
pub use train::{train, train_segment_step, train_with_observer, EpochReport, SegmentStep, TrainEvent, TrainReport};
