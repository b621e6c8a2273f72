use super::Mode;
use crate::error::{Error, Result};
use crate::tensor::Tensor;

/// Max pooling over the last axis of `[batch, channels, length]`.
///
/// Ties resolve to the lowest index in the window.
#[derive(Debug, Clone)]
pub struct MaxPool1d {
    pub kernel: usize,
    pub stride: usize,
    cache: Option<(Vec<usize>, Vec<usize>)>,
}

impl MaxPool1d {
    pub fn new(kernel: usize, stride: usize) -> Self {
        Self {
            kernel,
            stride,
            cache: None,
        }
    }

    pub fn output_len(&self, len: usize) -> Result<usize> {
        if self.kernel == 0 || self.stride == 0 {
            return Err(Error::contract("maxpool kernel and stride must be >= 1"));
        }
        if len < self.kernel {
            return Err(Error::contract(format!(
                "maxpool: kernel {} longer than input length {len}",
                self.kernel
            )));
        }
        Ok((len - self.kernel) / self.stride + 1)
    }

    pub fn forward(&mut self, input: &Tensor, mode: Mode) -> Result<Tensor> {
        input.expect_rank(3, "maxpool input")?;
        let (batch, ch, len) = (input.shape()[0], input.shape()[1], input.shape()[2]);
        let out_len = self.output_len(len)?;
        let x = input.data();
        let mut out = Vec::with_capacity(batch * ch * out_len);
        let mut argmax = Vec::with_capacity(batch * ch * out_len);
        for row in 0..batch * ch {
            let base = row * len;
            for j in 0..out_len {
                let start = base + j * self.stride;
                let mut best = start;
                for i in start + 1..start + self.kernel {
                    if x[i] > x[best] {
                        best = i;
                    }
                }
                out.push(x[best]);
                argmax.push(best);
            }
        }
        if mode == Mode::Train {
            self.cache = Some((input.shape().to_vec(), argmax));
        }
        Tensor::new(vec![batch, ch, out_len], out)
    }

    pub fn backward(&mut self, grad_out: &Tensor) -> Result<Tensor> {
        let (shape, argmax) = self
            .cache
            .take()
            .ok_or_else(|| Error::state("maxpool backward without a training-mode forward"))?;
        if grad_out.len() != argmax.len() {
            return Err(Error::contract("maxpool grad_out does not match cached output"));
        }
        let mut gx = Tensor::zeros(&shape);
        let data = gx.data_mut();
        for (&idx, &g) in argmax.iter().zip(grad_out.data()) {
            data[idx] += g;
        }
        Ok(gx)
    }

    /// Input positions selected by the last training-mode forward.
    pub fn cached_argmax(&self) -> Option<&[usize]> {
        self.cache.as_ref().map(|(_, a)| a.as_slice())
    }
}
