use rand_chacha::ChaCha8Rng;
use rand::SeedableRng;
use serde::{Deserialize, Serialize};

use crate::armodel::{Ablation, ArNetwork, ArState, InitMode};
use crate::datapipe::WindowedDataset;
use crate::error::{Error, Result};
use crate::numcore::Mode;

/// Predicted HI for every real window of one bearing.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PredictionCurve {
    pub bearing_id: String,
    /// Window size; `predicted[i]` is the HI of acquisition `i + k`.
    pub k: usize,
    pub predicted: Vec<f64>,
    /// Labels of the same acquisitions, when the record has them.
    pub truth: Option<Vec<f64>>,
    pub clamped: bool,
}

impl PredictionCurve {
    pub fn len(&self) -> usize {
        self.predicted.len()
    }

    pub fn is_empty(&self) -> bool {
        self.predicted.is_empty()
    }

    /// Acquisition index of each prediction.
    pub fn acquisition_indices(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.predicted.len()).map(|i| i + self.k)
    }

    /// Copy with predictions clipped to `[0, 1]`, for reporting.
    pub fn clamp(&self) -> Self {
        Self {
            predicted: self.predicted.iter().map(|v| v.clamp(0.0, 1.0)).collect(),
            clamped: true,
            ..self.clone()
        }
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("acq_index,predicted_hi,true_hi\n");
        for (i, (idx, p)) in self.acquisition_indices().zip(&self.predicted).enumerate() {
            let t = self.truth.as_ref().map(|t| t[i].to_string()).unwrap_or_default();
            out.push_str(&format!("{idx},{p},{t}\n"));
        }
        out
    }
}

/// Autoregressive rollout over every segment, one window at a time.
///
/// `init` picks the HI window at each segment start: `Carryover` (the
/// default) starts segment 0 from ones and later segments from the last `k`
/// predictions of the previous one; `Ones` resets every segment; `Teacher`
/// uses the labels. The NAR ablation always feeds ones and never shifts.
/// Predictions for padding windows are never produced.
pub fn rollout(model: &mut ArNetwork, dataset: &WindowedDataset, init: InitMode) -> Result<PredictionCurve> {
    let cfg = *model.config();
    let g = *dataset.geometry();
    if (cfg.k, cfg.points) != (g.k, dataset.points()) {
        return Err(Error::contract(format!(
            "model expects k={}, S={} but {} has k={}, S={}",
            cfg.k,
            cfg.points,
            dataset.id(),
            g.k,
            dataset.points()
        )));
    }
    if init == InitMode::Teacher && !dataset.has_labels() {
        return Err(Error::contract(format!("teacher rollout needs labels on {}", dataset.id())));
    }
    // eval mode never draws from it
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    let nar = cfg.ablation == Ablation::NonAutoregressive;
    let mut predicted = Vec::with_capacity(g.real_windows);
    'segments: for seg in 0..g.n {
        let first = g.window_index(seg, 0);
        if dataset.is_padding(first) {
            break;
        }
        let mut state = if nar {
            ArState::ones(1, g.k)
        } else {
            match init {
                InitMode::Carryover if seg > 0 => ArState::carryover(&[&predicted[..]], g.k)?,
                InitMode::Carryover | InitMode::Ones => ArState::ones(1, g.k),
                InitMode::Teacher => {
                    let w = dataset.label_window(first).expect("labels checked");
                    ArState::from_tensor(crate::Tensor::new(vec![1, g.k], w)?)?
                }
            }
        };
        for step in 0..g.windows_per_segment {
            let w = g.window_index(seg, step);
            if dataset.is_padding(w) {
                break 'segments;
            }
            let x = dataset.block(w).reshape(&[1, 2 * g.k, dataset.points()])?;
            let y = model.forward(&x, state.x2(), Mode::Eval, &mut rng)?;
            if !y.all_finite() {
                return Err(Error::contract(format!("non-finite prediction at window {w} of {}", dataset.id())));
            }
            predicted.push(y.data()[0]);
            if !nar {
                state = state.shift_update(&y)?;
            }
        }
    }
    debug_assert_eq!(predicted.len(), g.real_windows);
    let truth = dataset
        .record()
        .labels
        .as_ref()
        .map(|l| l[g.k..g.k + g.real_windows].to_vec());
    Ok(PredictionCurve {
        bearing_id: dataset.id().to_string(),
        k: g.k,
        predicted,
        truth,
        clamped: false,
    })
}
