//! From raw acquisitions to windowed autoregressive training samples.

mod fpt;
mod fpt_table;
mod labels;
mod native;
mod normalize;
mod phm2012;
mod record;
mod window;

pub use fpt::{detect_fpt, indicator_series, Fpt3SigmaConfig, Indicator};
pub use fpt_table::{canonical_bearing_id, FptTable};
pub use labels::{make_labels, piecewise_labels};
pub use native::{load_native_bearing, sidecar_path, write_native_bearing};
pub use normalize::normalize;
pub use phm2012::{load_phm2012_bearing, PHM2012_POINTS};
pub use record::{BearingRecord, DEFAULT_POINTS, DEFAULT_SAMPLE_PERIOD_S};
pub use window::{
    assemble_batch, assemble_inputs, lcm, pad_and_window, pad_and_window_to, window_all, Batch,
    Geometry, WindowedDataset,
};
