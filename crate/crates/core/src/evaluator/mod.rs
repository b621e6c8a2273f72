//! Rollout inference over whole bearings and the RMSE / MAE / score metrics.

mod metrics;
mod rollout;

pub use metrics::{mae, rmse, score, score_term, MetricsReport};
pub use rollout::{rollout, PredictionCurve};

use crate::armodel::{ArNetwork, InitMode};
use crate::datapipe::WindowedDataset;
use crate::error::{Error, Result};

/// Metrics of a finished curve over its labelled points.
pub fn curve_metrics(curve: &PredictionCurve) -> Result<MetricsReport> {
    let truth = curve
        .truth
        .as_ref()
        .ok_or_else(|| Error::contract(format!("{} has no labels to score against", curve.bearing_id)))?;
    MetricsReport::compute(&curve.predicted, truth)
}

/// Default rollout, then the three metrics over every real predicted point.
pub fn evaluate(model: &mut ArNetwork, dataset: &WindowedDataset) -> Result<(PredictionCurve, MetricsReport)> {
    let curve = rollout(model, dataset, InitMode::Carryover)?;
    let report = curve_metrics(&curve)?;
    Ok((curve, report))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::armodel::{Ablation, ModelConfig};
    use crate::datapipe::{pad_and_window, BearingRecord};
    use crate::Tensor;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use rand_distr::{Distribution, StandardNormal};

    fn record(len: usize, points: usize, fpt: usize, seed: u64) -> BearingRecord {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let acq = (0..len)
            .map(|_| (0..2 * points).map(|_| StandardNormal.sample(&mut rng)).collect())
            .collect();
        BearingRecord::new("r", points, acq).unwrap().with_labels(fpt).unwrap()
    }

    fn model(k: usize, seed: u64, ablation: Ablation) -> ArNetwork {
        let cfg = ModelConfig { channel_scale: 0.1, fusion_hidden: 16, ablation, ..ModelConfig::new(k, 64) };
        ArNetwork::new(cfg, &mut ChaCha8Rng::seed_from_u64(seed)).unwrap()
    }

    fn constant_model(k: usize, value: f64) -> ArNetwork {
        let mut m = model(k, 0, Ablation::None);
        let records: Vec<(String, Tensor)> = m
            .to_records()
            .into_iter()
            .map(|(name, t)| {
                let fill = if name == "head.fc2.bias" {
                    value
                } else if name.ends_with("running_var") || name.ends_with("gamma") {
                    1.0
                } else {
                    0.0
                };
                let shape = t.shape().to_vec();
                (name, Tensor::full(&shape, fill))
            })
            .collect();
        m.load_records(&records).unwrap();
        m
    }

    #[test]
    fn constant_network_gives_flat_curve() {
        let data = pad_and_window(record(137, 64, 136, 1), 5, 3).unwrap();
        let mut m = constant_model(5, 1.0);
        let (curve, report) = evaluate(&mut m, &data).unwrap();
        assert_eq!(curve.len(), 137 - 5);
        assert!(curve.predicted.iter().all(|&v| v == 1.0));
        // fpt at the last acquisition: labels are 1 everywhere but the final point
        assert_eq!(curve.acquisition_indices().next(), Some(5));
        assert_eq!(report.n, 132);
    }

    #[test]
    fn all_healthy_constant_one_scores_zero() {
        // labels are flat 1 up to the fpt; score only the healthy span
        let data = pad_and_window(record(120, 64, 110, 2), 5, 2).unwrap();
        let mut m = constant_model(5, 1.0);
        let curve = rollout(&mut m, &data, InitMode::Carryover).unwrap();
        let truth = curve.truth.as_ref().unwrap();
        let healthy = 110 - 5;
        let r = MetricsReport::compute(&curve.predicted[..healthy], &truth[..healthy]).unwrap();
        assert_eq!((r.rmse, r.mae, r.score), (0.0, 0.0, 0.0));
    }

    #[test]
    fn rollout_is_pure_and_repeatable() {
        let data = pad_and_window(record(90, 64, 50, 3), 5, 2).unwrap();
        let mut m = model(5, 4, Ablation::None);
        let before = m.to_records();
        let a = rollout(&mut m, &data, InitMode::Carryover).unwrap();
        let b = rollout(&mut m, &data, InitMode::Carryover).unwrap();
        assert_eq!(a, b);
        assert_eq!(before, m.to_records());
        assert_eq!(a.len(), 85);
    }

    #[test]
    fn segmented_carryover_equals_continuous_rollout() {
        let rec = record(260, 64, 150, 5);
        let one = pad_and_window(rec.clone(), 5, 1).unwrap();
        let many = pad_and_window(rec, 5, 4).unwrap();
        assert_eq!(many.geometry().windows_per_segment, 75);
        let mut m = model(5, 6, Ablation::None);
        let a = rollout(&mut m, &one, InitMode::Carryover).unwrap();
        let b = rollout(&mut m, &many, InitMode::Carryover).unwrap();
        assert_eq!(a.predicted, b.predicted);
        // resetting every segment breaks the equivalence
        let c = rollout(&mut m, &many, InitMode::Ones).unwrap();
        assert_ne!(a.predicted, c.predicted);
    }

    #[test]
    fn non_autoregressive_ignores_own_predictions() {
        let data = pad_and_window(record(90, 64, 50, 7), 5, 2).unwrap();
        let mut nar = model(5, 8, Ablation::NonAutoregressive);
        let a = rollout(&mut nar, &data, InitMode::Carryover).unwrap();
        let b = rollout(&mut nar, &data, InitMode::Ones).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn geometry_mismatch_rejected() {
        let data = pad_and_window(record(90, 64, 50, 9), 6, 2).unwrap();
        let mut m = model(5, 0, Ablation::None);
        assert!(matches!(rollout(&mut m, &data, InitMode::Carryover), Err(Error::Contract(_))));
    }

    #[test]
    fn csv_layout_and_clamp() {
        let curve = PredictionCurve {
            bearing_id: "b".into(),
            k: 3,
            predicted: vec![1.2, 0.5, -0.1],
            truth: Some(vec![1.0, 0.5, 0.0]),
            clamped: false,
        };
        let c = curve.clamp();
        assert_eq!(c.predicted, vec![1.0, 0.5, 0.0]);
        assert!(c.clamped);
        assert_eq!(c.to_csv(), "acq_index,predicted_hi,true_hi\n3,1,1\n4,0.5,0.5\n5,0,0\n");
    }
}
