use rand::Rng;

use super::{conv::accumulate, init::uniform_fan_in, Mode, Param};
use crate::error::{Error, Result};
use crate::tensor::Tensor;

/// Fully connected layer, `y = x Wᵀ + b` on `[batch, in]` inputs.
#[derive(Debug, Clone)]
pub struct Linear {
    /// `[out, in]`
    pub weight: Param,
    /// `[out]`
    pub bias: Param,
    cached_input: Option<Tensor>,
}

impl Linear {
    pub fn new<R: Rng + ?Sized>(inputs: usize, outputs: usize, rng: &mut R) -> Self {
        let weight = uniform_fan_in(&[outputs, inputs], inputs, rng);
        Self::from_parts(weight, Tensor::zeros(&[outputs])).expect("consistent shapes")
    }

    pub fn from_parts(weight: Tensor, bias: Tensor) -> Result<Self> {
        weight.expect_rank(2, "linear weight")?;
        bias.expect_shape(&[weight.shape()[0]], "linear bias")?;
        Ok(Self {
            weight: Param::new(weight),
            bias: Param::new(bias),
            cached_input: None,
        })
    }

    pub fn inputs(&self) -> usize {
        self.weight.value.shape()[1]
    }

    pub fn outputs(&self) -> usize {
        self.weight.value.shape()[0]
    }

    pub fn forward(&mut self, input: &Tensor, mode: Mode) -> Result<Tensor> {
        input.expect_rank(2, "linear input")?;
        let (batch, din) = (input.shape()[0], input.shape()[1]);
        if din != self.inputs() {
            return Err(Error::contract(format!(
                "linear: input width {din}, weight expects {}",
                self.inputs()
            )));
        }
        let dout = self.outputs();
        let w = self.weight.value.data();
        let b = self.bias.value.data();
        let x = input.data();
        let mut out = Vec::with_capacity(batch * dout);
        for bi in 0..batch {
            let xrow = &x[bi * din..][..din];
            for o in 0..dout {
                let wrow = &w[o * din..][..din];
                out.push(b[o] + xrow.iter().zip(wrow).map(|(a, c)| a * c).sum::<f64>());
            }
        }
        if mode == Mode::Train {
            self.cached_input = Some(input.clone());
        }
        Tensor::new(vec![batch, dout], out)
    }

    pub fn backward(&mut self, grad_out: &Tensor) -> Result<Tensor> {
        let input = self
            .cached_input
            .take()
            .ok_or_else(|| Error::state("linear backward without a training-mode forward"))?;
        let (batch, din) = (input.shape()[0], input.shape()[1]);
        let dout = self.outputs();
        grad_out.expect_shape(&[batch, dout], "linear grad_out")?;
        let x = input.data();
        let g = grad_out.data();
        let w = self.weight.value.data();
        let mut gx = vec![0.0; batch * din];
        let mut gw = vec![0.0; dout * din];
        let mut gb = vec![0.0; dout];
        for bi in 0..batch {
            let xrow = &x[bi * din..][..din];
            let gxrow = &mut gx[bi * din..][..din];
            for o in 0..dout {
                let go = g[bi * dout + o];
                if go == 0.0 {
                    continue;
                }
                gb[o] += go;
                let wrow = &w[o * din..][..din];
                let gwrow = &mut gw[o * din..][..din];
                for i in 0..din {
                    gwrow[i] += go * xrow[i];
                    gxrow[i] += go * wrow[i];
                }
            }
        }
        accumulate(&mut self.weight.grad, &gw);
        accumulate(&mut self.bias.grad, &gb);
        Tensor::new(vec![batch, din], gx)
    }
}
