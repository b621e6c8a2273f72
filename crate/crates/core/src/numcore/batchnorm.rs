use super::{conv::accumulate, Mode, Param};
use crate::error::{Error, Result};
use crate::tensor::Tensor;

pub const BN_EPS: f64 = 1e-5;
pub const BN_MOMENTUM: f64 = 0.1;

/// Per-channel batch normalization over `[batch, channels, length]`.
///
/// Eval mode uses running statistics, which start at mean 0 / variance 1.
#[derive(Debug, Clone)]
pub struct BatchNorm1d {
    pub gamma: Param,
    pub beta: Param,
    pub running_mean: Vec<f64>,
    pub running_var: Vec<f64>,
    pub eps: f64,
    pub momentum: f64,
    cache: Option<BnCache>,
}

#[derive(Debug, Clone)]
struct BnCache {
    shape: Vec<usize>,
    normalized: Vec<f64>,
    inv_std: Vec<f64>,
}

impl BatchNorm1d {
    pub fn new(channels: usize) -> Self {
        Self {
            gamma: Param::new(Tensor::full(&[channels], 1.0)),
            beta: Param::new(Tensor::zeros(&[channels])),
            running_mean: vec![0.0; channels],
            running_var: vec![1.0; channels],
            eps: BN_EPS,
            momentum: BN_MOMENTUM,
            cache: None,
        }
    }

    pub fn channels(&self) -> usize {
        self.running_mean.len()
    }

    pub fn forward(&mut self, input: &Tensor, mode: Mode) -> Result<Tensor> {
        input.expect_rank(3, "batchnorm input")?;
        let (batch, ch, len) = (input.shape()[0], input.shape()[1], input.shape()[2]);
        if ch != self.channels() {
            return Err(Error::contract(format!(
                "batchnorm: input has {ch} channels, layer has {}",
                self.channels()
            )));
        }
        let count = batch * len;
        if mode == Mode::Train && count < 2 {
            return Err(Error::contract(
                "batchnorm: training mode needs at least two values per channel",
            ));
        }
        let x = input.data();
        let gamma = self.gamma.value.data();
        let beta = self.beta.value.data();
        let mut out = vec![0.0; x.len()];

        let mut normalized = if mode == Mode::Train { vec![0.0; x.len()] } else { Vec::new() };
        let mut inv_stds = vec![0.0; ch];

        for c in 0..ch {
            let (mean, inv_std) = match mode {
                Mode::Train => {
                    let mut sum = 0.0;
                    for b in 0..batch {
                        sum += x[(b * ch + c) * len..][..len].iter().sum::<f64>();
                    }
                    let mean = sum / count as f64;
                    let mut sq = 0.0;
                    for b in 0..batch {
                        sq += x[(b * ch + c) * len..][..len]
                            .iter()
                            .map(|v| (v - mean) * (v - mean))
                            .sum::<f64>();
                    }
                    let var = sq / count as f64;
                    let unbiased = sq / (count - 1) as f64;
                    self.running_mean[c] =
                        (1.0 - self.momentum) * self.running_mean[c] + self.momentum * mean;
                    self.running_var[c] =
                        (1.0 - self.momentum) * self.running_var[c] + self.momentum * unbiased;
                    (mean, 1.0 / (var + self.eps).sqrt())
                }
                Mode::Eval => (
                    self.running_mean[c],
                    1.0 / (self.running_var[c].max(0.0) + self.eps).sqrt(),
                ),
            };
            inv_stds[c] = inv_std;
            for b in 0..batch {
                let off = (b * ch + c) * len;
                for i in off..off + len {
                    let xhat = (x[i] - mean) * inv_std;
                    if mode == Mode::Train {
                        normalized[i] = xhat;
                    }
                    out[i] = gamma[c] * xhat + beta[c];
                }
            }
        }

        if mode == Mode::Train {
            self.cache = Some(BnCache {
                shape: input.shape().to_vec(),
                normalized,
                inv_std: inv_stds,
            });
        }
        Tensor::new(input.shape().to_vec(), out)
    }

    pub fn backward(&mut self, grad_out: &Tensor) -> Result<Tensor> {
        let cache = self
            .cache
            .take()
            .ok_or_else(|| Error::state("batchnorm backward without a training-mode forward"))?;
        grad_out.expect_shape(&cache.shape, "batchnorm grad_out")?;
        let (batch, ch, len) = (cache.shape[0], cache.shape[1], cache.shape[2]);
        let n = (batch * len) as f64;
        let g = grad_out.data();
        let xhat = &cache.normalized;
        let gamma = self.gamma.value.data();
        let mut gx = vec![0.0; g.len()];
        let mut ggamma = vec![0.0; ch];
        let mut gbeta = vec![0.0; ch];

        for c in 0..ch {
            let (mut sum_g, mut sum_gx) = (0.0, 0.0);
            for b in 0..batch {
                let off = (b * ch + c) * len;
                for i in off..off + len {
                    sum_g += g[i];
                    sum_gx += g[i] * xhat[i];
                }
            }
            ggamma[c] = sum_gx;
            gbeta[c] = sum_g;
            let scale = gamma[c] * cache.inv_std[c] / n;
            for b in 0..batch {
                let off = (b * ch + c) * len;
                for i in off..off + len {
                    gx[i] = scale * (n * g[i] - sum_g - xhat[i] * sum_gx);
                }
            }
        }

        accumulate(&mut self.gamma.grad, &ggamma);
        accumulate(&mut self.beta.grad, &gbeta);
        Tensor::new(cache.shape, gx)
    }
}
