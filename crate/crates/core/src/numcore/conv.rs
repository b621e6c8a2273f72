use rand::Rng;

use super::{init::uniform_fan_in, Mode, Param};
use crate::error::{Error, Result};
use crate::tensor::Tensor;

/// 1-D convolution over `[batch, channels, length]` with zero padding.
#[derive(Debug, Clone)]
pub struct Conv1d {
    /// `[out_channels, in_channels, kernel]`
    pub weight: Param,
    /// `[out_channels]`
    pub bias: Param,
    pub stride: usize,
    pub padding: usize,
    cached_input: Option<Tensor>,
}

impl Conv1d {
    pub fn new<R: Rng + ?Sized>(
        in_channels: usize,
        out_channels: usize,
        kernel: usize,
        stride: usize,
        padding: usize,
        rng: &mut R,
    ) -> Self {
        let weight = uniform_fan_in(&[out_channels, in_channels, kernel], in_channels * kernel, rng);
        let bias = Tensor::zeros(&[out_channels]);
        Self::from_parts(weight, bias, stride, padding).expect("consistent shapes")
    }

    pub fn from_parts(weight: Tensor, bias: Tensor, stride: usize, padding: usize) -> Result<Self> {
        weight.expect_rank(3, "conv1d weight")?;
        bias.expect_shape(&[weight.shape()[0]], "conv1d bias")?;
        if stride == 0 {
            return Err(Error::contract("conv1d stride must be >= 1"));
        }
        Ok(Self {
            weight: Param::new(weight),
            bias: Param::new(bias),
            stride,
            padding,
            cached_input: None,
        })
    }

    pub fn out_channels(&self) -> usize {
        self.weight.value.shape()[0]
    }

    pub fn in_channels(&self) -> usize {
        self.weight.value.shape()[1]
    }

    pub fn kernel(&self) -> usize {
        self.weight.value.shape()[2]
    }

    pub fn output_len(&self, len: usize) -> Result<usize> {
        let padded = len + 2 * self.padding;
        if padded < self.kernel() {
            return Err(Error::contract(format!(
                "conv1d: padded length {padded} shorter than kernel {}",
                self.kernel()
            )));
        }
        Ok((padded - self.kernel()) / self.stride + 1)
    }

    // Output positions j for which tap t reads a real (unpadded) input sample.
    fn valid_outputs(&self, tap: usize, len: usize, out_len: usize) -> std::ops::Range<usize> {
        let s = self.stride;
        let p = self.padding;
        let start = if tap >= p { 0 } else { (p - tap).div_ceil(s) };
        // need j*s + tap - p <= len - 1
        let end = if len + p < tap + 1 {
            0
        } else {
            ((len - 1 + p - tap) / s + 1).min(out_len)
        };
        start..end.max(start)
    }

    pub fn forward(&mut self, input: &Tensor, mode: Mode) -> Result<Tensor> {
        input.expect_rank(3, "conv1d input")?;
        let (batch, cin, len) = (input.shape()[0], input.shape()[1], input.shape()[2]);
        if cin != self.in_channels() {
            return Err(Error::contract(format!(
                "conv1d: input has {cin} channels, weight expects {}",
                self.in_channels()
            )));
        }
        let out_len = self.output_len(len)?;
        let (cout, k, s, p) = (self.out_channels(), self.kernel(), self.stride, self.padding);
        let w = self.weight.value.data();
        let b = self.bias.value.data();
        let x = input.data();
        let mut out = vec![0.0; batch * cout * out_len];

        for bi in 0..batch {
            for o in 0..cout {
                let row = &mut out[(bi * cout + o) * out_len..][..out_len];
                row.fill(b[o]);
                for c in 0..cin {
                    let xrow = &x[(bi * cin + c) * len..][..len];
                    for t in 0..k {
                        let wv = w[(o * cin + c) * k + t];
                        if wv == 0.0 {
                            continue;
                        }
                        for j in self.valid_outputs(t, len, out_len) {
                            row[j] += wv * xrow[j * s + t - p];
                        }
                    }
                }
            }
        }

        if mode == Mode::Train {
            self.cached_input = Some(input.clone());
        }
        let out = Tensor::new(vec![batch, cout, out_len], out)?;
        out.debug_assert_finite("conv1d output");
        Ok(out)
    }

    /// Returns the input gradient; weight and bias gradients accumulate.
    pub fn backward(&mut self, grad_out: &Tensor) -> Result<Tensor> {
        let input = self
            .cached_input
            .take()
            .ok_or_else(|| Error::state("conv1d backward without a training-mode forward"))?;
        let (batch, cin, len) = (input.shape()[0], input.shape()[1], input.shape()[2]);
        let out_len = self.output_len(len)?;
        let (cout, k, s, p) = (self.out_channels(), self.kernel(), self.stride, self.padding);
        grad_out.expect_shape(&[batch, cout, out_len], "conv1d grad_out")?;

        let x = input.data();
        let g = grad_out.data();
        let w = self.weight.value.data();
        let mut gx = vec![0.0; x.len()];
        let mut gw = vec![0.0; w.len()];
        let mut gb = vec![0.0; cout];

        for bi in 0..batch {
            for o in 0..cout {
                let grow = &g[(bi * cout + o) * out_len..][..out_len];
                gb[o] += grow.iter().sum::<f64>();
                for c in 0..cin {
                    let base = (bi * cin + c) * len;
                    for t in 0..k {
                        let widx = (o * cin + c) * k + t;
                        let wv = w[widx];
                        let mut acc = 0.0;
                        for j in self.valid_outputs(t, len, out_len) {
                            let xi = base + j * s + t - p;
                            acc += grow[j] * x[xi];
                            gx[xi] += wv * grow[j];
                        }
                        gw[widx] += acc;
                    }
                }
            }
        }

        accumulate(&mut self.weight.grad, &gw);
        accumulate(&mut self.bias.grad, &gb);
        Tensor::new(input.shape().to_vec(), gx)
    }
}

pub(super) fn accumulate(dst: &mut Tensor, src: &[f64]) {
    for (d, s) in dst.data_mut().iter_mut().zip(src) {
        *d += s;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numcore::gradcheck::finite_difference;

    fn conv(w: &[f64], bias: f64, pad: usize, stride: usize) -> Conv1d {
        Conv1d::from_parts(
            Tensor::new(vec![1, 1, w.len()], w.to_vec()).unwrap(),
            Tensor::from_slice(&[bias]),
            stride,
            pad,
        )
        .unwrap()
    }

    fn input(values: &[f64]) -> Tensor {
        Tensor::new(vec![1, 1, values.len()], values.to_vec()).unwrap()
    }

    // Direct arithmetic: padded x = [0,1,2,3,4,0], window sums of three.
    #[test]
    fn box_kernel_matches_hand_sums() {
        let mut c = conv(&[1.0, 1.0, 1.0], 0.0, 1, 1);
        let y = c.forward(&input(&[1.0, 2.0, 3.0, 4.0]), Mode::Eval).unwrap();
        assert_eq!(y.data(), &[3.0, 6.0, 9.0, 7.0]);
    }

    #[test]
    fn identity_kernel_preserves_input() {
        let mut c = conv(&[0.0, 1.0, 0.0], 0.0, 1, 1);
        let x = input(&[0.3, -1.2, 4.0, 2.5, 7.0]);
        assert_eq!(c.forward(&x, Mode::Eval).unwrap(), x);
    }

    #[test]
    fn zero_weights_emit_bias() {
        let mut c = conv(&[0.0, 0.0, 0.0], 0.5, 1, 1);
        let y = c.forward(&input(&[1.0, -2.0, 3.0]), Mode::Eval).unwrap();
        assert!(y.data().iter().all(|&v| v == 0.5));
    }

    #[test]
    fn output_length_formula() {
        let mut c = conv(&[1.0, 1.0, 1.0], 0.0, 0, 2);
        assert_eq!(c.output_len(7).unwrap(), 3);
        let y = c.forward(&input(&[1.0; 7]), Mode::Eval).unwrap();
        assert_eq!(y.shape(), &[1, 1, 3]);
        assert!(c.output_len(2).is_err());
    }

    #[test]
    fn channel_mismatch_is_contract_error() {
        let mut c = conv(&[1.0, 1.0, 1.0], 0.0, 1, 1);
        let x = Tensor::zeros(&[1, 2, 5]);
        assert!(matches!(c.forward(&x, Mode::Eval), Err(Error::Contract(_))));
    }

    #[test]
    fn backward_requires_cached_forward() {
        let mut c = conv(&[1.0, 1.0, 1.0], 0.0, 1, 1);
        let g = Tensor::zeros(&[1, 1, 4]);
        assert!(matches!(c.backward(&g), Err(Error::State(_))));
        c.forward(&input(&[1.0; 4]), Mode::Eval).unwrap();
        assert!(matches!(c.backward(&g), Err(Error::State(_))));
        c.forward(&input(&[1.0; 4]), Mode::Train).unwrap();
        c.backward(&g).unwrap();
        assert!(matches!(c.backward(&g), Err(Error::State(_))), "cache is consumed");
    }

    #[test]
    fn identity_kernel_backward() {
        let mut c = conv(&[0.0, 1.0, 0.0], 0.0, 1, 1);
        let x = input(&[1.0, 2.0, 3.0, 4.0, 5.0]);
        c.forward(&x, Mode::Train).unwrap();
        let gi = c.backward(&Tensor::full(&[1, 1, 5], 1.0)).unwrap();
        assert!(gi.data().iter().all(|&v| v == 1.0));
        // tap t sees x shifted by t-1 with zero padding
        assert_eq!(c.weight.grad.data(), &[10.0, 15.0, 14.0]);
        assert_eq!(c.bias.grad.data(), &[5.0]);
    }

    #[test]
    fn zero_grad_out_gives_zero_grads() {
        let mut c = conv(&[0.4, -1.0, 2.0], 0.1, 1, 1);
        c.forward(&input(&[1.0, 2.0, 3.0]), Mode::Train).unwrap();
        let gi = c.backward(&Tensor::zeros(&[1, 1, 3])).unwrap();
        assert!(gi.data().iter().all(|&v| v == 0.0));
        assert!(c.weight.grad.data().iter().all(|&v| v == 0.0));
        assert!(c.bias.grad.data().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn single_element_chain_rule() {
        let mut c = conv(&[0.7], 0.0, 0, 1);
        c.forward(&input(&[3.0]), Mode::Train).unwrap();
        let gi = c.backward(&input(&[2.0])).unwrap();
        assert_eq!(c.weight.grad.data(), &[6.0]);
        assert!((gi.data()[0] - 1.4).abs() < 1e-15);
    }

    #[test]
    fn input_gradient_matches_finite_differences() {
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        let mut c = Conv1d::new(2, 3, 3, 2, 1, &mut rng);
        let x = crate::numcore::init::uniform_fan_in(&[2, 2, 9], 1, &mut rng);
        let gy = crate::numcore::init::uniform_fan_in(&[2, 3, 5], 1, &mut rng);
        c.forward(&x, Mode::Train).unwrap();
        let gi = c.backward(&gy).unwrap();
        let numeric = finite_difference(
            |v| {
                let xt = Tensor::new(x.shape().to_vec(), v.to_vec()).unwrap();
                let y = c.clone().forward(&xt, Mode::Eval).unwrap();
                y.data().iter().zip(gy.data()).map(|(a, b)| a * b).sum()
            },
            x.data(),
            1e-5,
        );
        for (a, n) in gi.data().iter().zip(&numeric) {
            assert!((a - n).abs() < 1e-8, "{a} vs {n}");
        }
    }
}
