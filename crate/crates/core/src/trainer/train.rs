use std::time::Instant;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{find_train_iters, TrainConfig};
use crate::armodel::{Ablation, ArNetwork, ArState, InitMode};
use crate::datapipe::{assemble_batch, Batch, WindowedDataset};
use crate::error::{Error, Result};
use crate::numcore::{masked_mse_loss, AdamW, Mode, Parameterized};
use crate::tensor::Tensor;

/// Outcome of training one lockstep step.
#[derive(Debug, Clone)]
pub struct SegmentStep {
    /// Loss of every iteration that had at least one non-padding row.
    pub losses: Vec<f64>,
    pub backward_passes: usize,
    /// Prediction of the last iteration, the value shifted into the window.
    pub last_prediction: Tensor,
}

/// Hooks into the training loop, used for checkpointing and inspection.
#[derive(Debug)]
pub enum TrainEvent<'a> {
    Iteration {
        epoch: usize,
        group: usize,
        step: usize,
        iter: usize,
        x2: &'a Tensor,
        loss: f64,
    },
    Shift {
        epoch: usize,
        group: usize,
        step: usize,
        before: &'a Tensor,
        after: &'a Tensor,
    },
    EpochEnd {
        epoch: usize,
        mean_loss: f64,
        model: &'a ArNetwork,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpochReport {
    pub epoch: usize,
    pub mean_loss: f64,
    /// Bearing ids of each group, in training order.
    pub groups: Vec<Vec<String>>,
    /// `[group][step]` backward passes.
    pub backward_passes: Vec<Vec<usize>>,
}

impl EpochReport {
    pub fn passes_per_group(&self) -> Vec<usize> {
        self.backward_passes.iter().map(|g| g.iter().sum()).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainReport {
    pub config: TrainConfig,
    pub windows_per_segment: usize,
    pub epochs: Vec<EpochReport>,
    pub wall_time_s: f64,
}

impl TrainReport {
    pub fn final_loss(&self) -> f64 {
        self.epochs.last().map_or(f64::NAN, |e| e.mean_loss)
    }
}

/// Trains `iters` times on one batch with the HI window held fixed, then
/// shifts the last prediction into the window. Padding rows are excluded
/// from the loss; an iteration with no real rows skips the update.
#[allow(clippy::too_many_arguments)]
pub fn train_segment_step<R: Rng + ?Sized>(
    model: &mut ArNetwork,
    optimizer: &mut AdamW,
    batch: &Batch,
    state: &ArState,
    iters: usize,
    rng: &mut R,
    on_iter: &mut dyn FnMut(usize, f64) -> Result<()>,
) -> Result<(ArState, SegmentStep)> {
    if iters == 0 {
        return Err(Error::contract("a training step needs at least one iteration"));
    }
    let mask: Vec<bool> = batch.padding.iter().map(|p| !p).collect();
    let any_active = mask.iter().any(|&a| a);
    let mut losses = Vec::with_capacity(iters);
    let mut backward_passes = 0;
    let mut last = None;
    for iter in 0..iters {
        model.zero_grad();
        let y = model.forward(&batch.x, state.x2(), Mode::Train, rng)?;
        let (loss, grad) = masked_mse_loss(&y, &batch.y, Some(&mask))?;
        if any_active {
            model.backward(&grad)?;
            optimizer.step(model)?;
            backward_passes += 1;
            losses.push(loss);
        } else {
            // drop the cached activations so the next forward starts clean
            model.backward(&grad)?;
            model.zero_grad();
        }
        on_iter(iter, loss)?;
        last = Some(y);
    }
    let last_prediction = last.expect("iters >= 1");
    let next = match model.config().ablation {
        Ablation::None => state.shift_update(&last_prediction)?,
        Ablation::NonAutoregressive => state.clone(),
    };
    Ok((
        next,
        SegmentStep {
            losses,
            backward_passes,
            last_prediction,
        },
    ))
}

pub fn train(datasets: &[WindowedDataset], config: &TrainConfig) -> Result<(ArNetwork, TrainReport)> {
    train_with_observer(datasets, config, &mut |_| Ok(()))
}

fn check_datasets(datasets: &[WindowedDataset], config: &TrainConfig) -> Result<usize> {
    let first = datasets
        .first()
        .ok_or_else(|| Error::contract("training needs at least one bearing"))?;
    let g = first.geometry();
    if (g.k, g.n) != (config.k, config.n) {
        return Err(Error::contract(format!(
            "data windowed with k={}, n={} but the config asks for k={}, n={}",
            g.k, g.n, config.k, config.n
        )));
    }
    for d in datasets {
        if !d.has_labels() {
            return Err(Error::contract(format!("{} has no labels", d.id())));
        }
        if d.geometry().windows_per_segment != g.windows_per_segment || d.points() != first.points() {
            return Err(Error::contract(format!(
                "{} does not share the geometry of {}; window them together",
                d.id(),
                first.id()
            )));
        }
    }
    Ok(g.windows_per_segment)
}

/// Full training run. All randomness (init, dropout, group shuffling)
/// comes from one generator seeded with `config.seed`.
pub fn train_with_observer(
    datasets: &[WindowedDataset],
    config: &TrainConfig,
    observer: &mut dyn FnMut(TrainEvent<'_>) -> Result<()>,
) -> Result<(ArNetwork, TrainReport)> {
    let started = Instant::now();
    let m = check_datasets(datasets, config)?;
    config.validate_for_segment(m)?;

    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut model = ArNetwork::new(config.model_config(datasets[0].points()), &mut rng)?;
    let mut optimizer = AdamW::new(config.lr, config.weight_decay);
    let mut order: Vec<usize> = (0..datasets.len()).collect();
    let mut epochs = Vec::with_capacity(config.epochs);

    for epoch in 0..config.epochs {
        order.shuffle(&mut rng);
        let mut loss_sum = 0.0;
        let mut loss_count = 0usize;
        let mut groups = Vec::new();
        let mut passes = Vec::new();
        for (group, members) in order.chunks(config.bearings_per_batch).enumerate() {
            let group_sets: Vec<&WindowedDataset> = members.iter().map(|&i| &datasets[i]).collect();
            groups.push(group_sets.iter().map(|d| d.id().to_string()).collect());
            let mut step_passes = Vec::with_capacity(m);
            let mut state: Option<ArState> = None;
            for step in 0..m {
                let batch = assemble_batch(&group_sets, step)?;
                let current = match state.take() {
                    Some(s) => s,
                    None => initial_state(config, &batch)?,
                };
                let iters = find_train_iters(step, epoch, config);
                let x2 = current.x2().clone();
                let (next, out) = train_segment_step(
                    &mut model,
                    &mut optimizer,
                    &batch,
                    &current,
                    iters,
                    &mut rng,
                    &mut |iter, loss| {
                        observer(TrainEvent::Iteration { epoch, group, step, iter, x2: &x2, loss })
                    },
                )?;
                observer(TrainEvent::Shift {
                    epoch,
                    group,
                    step,
                    before: current.x2(),
                    after: next.x2(),
                })?;
                loss_sum += out.losses.iter().sum::<f64>();
                loss_count += out.losses.len();
                step_passes.push(out.backward_passes);
                state = Some(next);
            }
            passes.push(step_passes);
        }
        let mean_loss = if loss_count == 0 { 0.0 } else { loss_sum / loss_count as f64 };
        observer(TrainEvent::EpochEnd { epoch, mean_loss, model: &model })?;
        epochs.push(EpochReport {
            epoch,
            mean_loss,
            groups,
            backward_passes: passes,
        });
    }

    Ok((
        model,
        TrainReport {
            config: config.clone(),
            windows_per_segment: m,
            epochs,
            wall_time_s: started.elapsed().as_secs_f64(),
        },
    ))
}

fn initial_state(config: &TrainConfig, batch: &Batch) -> Result<ArState> {
    let rows = batch.padding.len();
    if config.ablation == Ablation::NonAutoregressive {
        return Ok(ArState::ones(rows, config.k));
    }
    let mode = match config.init_mode {
        InitMode::Carryover => InitMode::Teacher,
        other => other,
    };
    ArState::init(mode, rows, config.k, Some(&batch.label_windows), None)
}
