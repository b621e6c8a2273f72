use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub rmse: f64,
    pub mae: f64,
    pub score: f64,
    pub n: usize,
}

impl MetricsReport {
    pub fn compute(pred: &[f64], truth: &[f64]) -> Result<Self> {
        Ok(Self {
            rmse: rmse(pred, truth)?,
            mae: mae(pred, truth)?,
            score: score(pred, truth)?,
            n: pred.len(),
        })
    }

    /// Arithmetic mean of each metric; `n` is the total point count.
    pub fn mean(reports: &[MetricsReport]) -> Result<Self> {
        if reports.is_empty() {
            return Err(Error::contract("cannot average zero metric reports"));
        }
        let c = reports.len() as f64;
        Ok(Self {
            rmse: reports.iter().map(|r| r.rmse).sum::<f64>() / c,
            mae: reports.iter().map(|r| r.mae).sum::<f64>() / c,
            score: reports.iter().map(|r| r.score).sum::<f64>() / c,
            n: reports.iter().map(|r| r.n).sum(),
        })
    }
}

fn check(pred: &[f64], truth: &[f64]) -> Result<()> {
    if pred.len() != truth.len() {
        return Err(Error::contract(format!(
            "prediction has {} points, truth has {}",
            pred.len(),
            truth.len()
        )));
    }
    if pred.is_empty() {
        return Err(Error::contract("metrics need at least one point"));
    }
    Ok(())
}

pub fn rmse(pred: &[f64], truth: &[f64]) -> Result<f64> {
    check(pred, truth)?;
    let sse: f64 = pred.iter().zip(truth).map(|(p, t)| (t - p) * (t - p)).sum();
    Ok((sse / pred.len() as f64).sqrt())
}

pub fn mae(pred: &[f64], truth: &[f64]) -> Result<f64> {
    check(pred, truth)?;
    let sae: f64 = pred.iter().zip(truth).map(|(p, t)| (t - p).abs()).sum();
    Ok(sae / pred.len() as f64)
}

/// Penalty of one error `e = truth − pred`.
pub fn score_term(e: f64) -> f64 {
    if e <= 0.0 {
        (-e / 13.0).exp_m1()
    } else {
        (e / 10.0).exp_m1()
    }
}

/// Asymmetric exponential score, summed over points. 0 is perfect.
pub fn score(pred: &[f64], truth: &[f64]) -> Result<f64> {
    check(pred, truth)?;
    Ok(pred.iter().zip(truth).map(|(p, t)| score_term(t - p)).sum())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    const E: f64 = std::f64::consts::E;

    #[test]
    fn direct_values() {
        assert_eq!(rmse(&[0.0, 0.0], &[1.0, 1.0]).unwrap(), 1.0);
        assert_eq!(mae(&[0.0, 1.0], &[1.0, 1.0]).unwrap(), 0.5);
        assert!((score(&[0.0], &[10.0]).unwrap() - (E - 1.0)).abs() < 1e-12);
        assert!((score(&[13.0], &[0.0]).unwrap() - (E - 1.0)).abs() < 1e-12);
        let neg10 = score(&[10.0], &[0.0]).unwrap();
        assert!((neg10 - ((10.0f64 / 13.0).exp() - 1.0)).abs() < 1e-12);
        assert!(neg10 < E - 1.0);
    }

    #[test]
    fn length_mismatch_and_empty_rejected() {
        assert!(rmse(&[1.0], &[1.0, 2.0]).is_err());
        assert!(mae(&[], &[]).is_err());
        assert!(score(&[1.0, 2.0], &[1.0]).is_err());
    }

    #[test]
    fn mean_of_reports() {
        let a = MetricsReport { rmse: 0.1, mae: 0.05, score: 2.0, n: 10 };
        let b = MetricsReport { rmse: 0.3, mae: 0.15, score: 4.0, n: 30 };
        let m = MetricsReport::mean(&[a, b]).unwrap();
        assert!((m.rmse - 0.2).abs() < 1e-15 && (m.mae - 0.1).abs() < 1e-15);
        assert_eq!((m.score, m.n), (3.0, 40));
    }

    proptest! {
        #[test]
        fn mae_never_exceeds_rmse(v in proptest::collection::vec((-2.0f64..2.0, -2.0f64..2.0), 1..50)) {
            let (p, t): (Vec<f64>, Vec<f64>) = v.into_iter().unzip();
            prop_assert!(mae(&p, &t).unwrap() <= rmse(&p, &t).unwrap() + 1e-12);
        }

        #[test]
        fn mae_symmetric_under_error_sign_flip(v in proptest::collection::vec((-2.0f64..2.0, -2.0f64..2.0), 1..50)) {
            let (p, t): (Vec<f64>, Vec<f64>) = v.into_iter().unzip();
            let flipped: Vec<f64> = p.iter().zip(&t).map(|(p, t)| 2.0 * t - p).collect();
            prop_assert!((mae(&p, &t).unwrap() - mae(&flipped, &t).unwrap()).abs() < 1e-12);
        }

        #[test]
        fn score_zero_iff_exact(t in proptest::collection::vec(-1.0f64..1.0, 1..30), idx in 0usize..30, d in -0.5f64..0.5) {
            prop_assert_eq!(score(&t, &t).unwrap(), 0.0);
            let mut p = t.clone();
            let i = idx % p.len();
            p[i] += d;
            if p[i] != t[i] {
                prop_assert!(score(&p, &t).unwrap() > 0.0);
            }
        }

        #[test]
        fn uniform_error_score_is_additive(e in -3.0f64..3.0, n in 1usize..40) {
            let t = vec![0.5; n];
            let p: Vec<f64> = t.iter().map(|t| t - e).collect();
            let s = score(&p, &t).unwrap();
            let expect = n as f64 * score_term(0.5 - (0.5 - e));
            prop_assert!((s - expect).abs() <= 1e-9 * expect.abs().max(1.0));
        }
    }
}
