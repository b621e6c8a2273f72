use std::path::Path;

use rand::{Rng, SeedableRng};

use super::{ModelConfig, POOL_PLAN};
use crate::checkpoint;
use crate::error::{Error, Result};
use crate::numcore::{BatchNorm1d, Conv1d, Dropout, Linear, MaxPool1d, Mode, Param, Parameterized, Relu};
use crate::tensor::Tensor;

pub const CHECKPOINT_FILE: &str = "model.ckpt";
pub const MANIFEST_FILE: &str = "model.toml";

/// conv(k=3, s=1, p=1) → batchnorm → relu → maxpool.
#[derive(Debug, Clone)]
pub struct ConvBlock {
    pub conv: Conv1d,
    pub bn: BatchNorm1d,
    relu: Relu,
    pub pool: MaxPool1d,
}

impl ConvBlock {
    fn new<R: Rng + ?Sized>(cin: usize, cout: usize, pool: usize, rng: &mut R) -> Self {
        Self {
            conv: Conv1d::new(cin, cout, 3, 1, 1, rng),
            bn: BatchNorm1d::new(cout),
            relu: Relu::new(),
            pool: MaxPool1d::new(pool, pool),
        }
    }

    fn forward(&mut self, x: &Tensor, mode: Mode) -> Result<Tensor> {
        let h = self.conv.forward(x, mode)?;
        let h = self.bn.forward(&h, mode)?;
        let h = self.relu.forward(&h, mode);
        self.pool.forward(&h, mode)
    }

    fn backward(&mut self, g: &Tensor) -> Result<Tensor> {
        let g = self.pool.backward(g)?;
        let g = self.relu.backward(&g)?;
        let g = self.bn.backward(&g)?;
        self.conv.backward(&g)
    }
}

#[derive(Debug, Clone)]
pub struct ArNetwork {
    config: ModelConfig,
    pub blocks: Vec<ConvBlock>,
    /// 1×1 convolution lifting each HI value to `label_branch_channels`.
    pub label_branch: Conv1d,
    pub fc1: Linear,
    head_relu: Relu,
    dropout: Dropout,
    pub fc2: Linear,
    cached_split: Option<(usize, [usize; 3])>,
}

impl ArNetwork {
    pub fn new<R: Rng + ?Sized>(config: ModelConfig, rng: &mut R) -> Result<Self> {
        config.validate()?;
        let plan = config.channel_plan();
        let mut cin = 2 * config.k;
        let mut blocks = Vec::with_capacity(5);
        for (cout, pool) in plan.iter().zip(POOL_PLAN) {
            blocks.push(ConvBlock::new(cin, *cout, pool, rng));
            cin = *cout;
        }
        let label_branch = Conv1d::new(1, config.label_branch_channels, 1, 1, 0, rng);
        let fc1 = Linear::new(config.fusion_inputs(), config.fusion_hidden, rng);
        let fc2 = Linear::new(config.fusion_hidden, 1, rng);
        Ok(Self {
            config,
            blocks,
            label_branch,
            fc1,
            head_relu: Relu::new(),
            dropout: Dropout::new(config.dropout_rate)?,
            fc2,
            cached_split: None,
        })
    }

    pub fn config(&self) -> &ModelConfig {
        &self.config
    }

    /// Switches how the HI window is fed without touching any weight.
    pub fn set_ablation(&mut self, ablation: super::Ablation) {
        self.config.ablation = ablation;
    }

    /// `x`: `[B, 2k, S]` vibration block, `x2`: `[B, k]` HI window.
    /// Returns one HI prediction per row.
    pub fn forward<R: Rng + ?Sized>(
        &mut self,
        x: &Tensor,
        x2: &Tensor,
        mode: Mode,
        rng: &mut R,
    ) -> Result<Tensor> {
        let c = &self.config;
        x.expect_rank(3, "model input x")?;
        let batch = x.shape()[0];
        x.expect_shape(&[batch, 2 * c.k, c.points], "model input x")?;
        x2.expect_shape(&[batch, c.k], "model input x2")?;

        let mut h = x.clone();
        for block in &mut self.blocks {
            h = block.forward(&h, mode)?;
        }
        let backbone_shape = h.shape().to_vec();
        let backbone = h.into_data();

        let hi = x2.clone().reshape(&[batch, 1, c.k])?;
        let branch_t = self.label_branch.forward(&hi, mode)?;
        let branch = branch_t.data();

        let (fb, fl) = (backbone.len() / batch, branch.len() / batch);
        let mut fused = Vec::with_capacity(batch * (fb + fl));
        for b in 0..batch {
            fused.extend_from_slice(&backbone[b * fb..(b + 1) * fb]);
            fused.extend_from_slice(&branch[b * fl..(b + 1) * fl]);
        }
        let fused = Tensor::new(vec![batch, fb + fl], fused)?;

        let h = self.fc1.forward(&fused, mode)?;
        let h = self.head_relu.forward(&h, mode);
        let h = self.dropout.forward(&h, mode, rng);
        let y = self.fc2.forward(&h, mode)?;
        if mode == Mode::Train {
            self.cached_split = Some((
                fb,
                [backbone_shape[0], backbone_shape[1], backbone_shape[2]],
            ));
        }
        y.debug_assert_finite("model output");
        y.reshape(&[batch])
    }

    /// Backpropagates `grad_y` (`[B]`) into every parameter gradient.
    /// The HI window is input data and receives no gradient.
    pub fn backward(&mut self, grad_y: &Tensor) -> Result<()> {
        let (fb, backbone_shape) = self
            .cached_split
            .take()
            .ok_or_else(|| Error::state("model backward without a training-mode forward"))?;
        let batch = backbone_shape[0];
        grad_y.expect_shape(&[batch], "grad_y")?;
        let g = grad_y.clone().reshape(&[batch, 1])?;
        let g = self.fc2.backward(&g)?;
        let g = self.dropout.backward(&g)?;
        let g = self.head_relu.backward(&g)?;
        let g = self.fc1.backward(&g)?;

        let width = g.shape()[1];
        let fl = width - fb;
        let mut g_backbone = Vec::with_capacity(batch * fb);
        let mut g_branch = Vec::with_capacity(batch * fl);
        for row in g.data().chunks(width) {
            g_backbone.extend_from_slice(&row[..fb]);
            g_branch.extend_from_slice(&row[fb..]);
        }
        let g_branch = Tensor::new(vec![batch, self.config.label_branch_channels, self.config.k], g_branch)?;
        self.label_branch.backward(&g_branch)?;

        let mut g = Tensor::new(backbone_shape.to_vec(), g_backbone)?;
        for block in self.blocks.iter_mut().rev() {
            g = block.backward(&g)?;
        }
        Ok(())
    }

    /// Parameters in optimizer order.
    pub fn named_params(&self) -> Vec<(String, &Param)> {
        let mut out = Vec::with_capacity(4 * self.blocks.len() + 6);
        for (i, b) in self.blocks.iter().enumerate() {
            out.push((format!("block{i}.conv.weight"), &b.conv.weight));
            out.push((format!("block{i}.conv.bias"), &b.conv.bias));
            out.push((format!("block{i}.bn.gamma"), &b.bn.gamma));
            out.push((format!("block{i}.bn.beta"), &b.bn.beta));
        }
        out.push(("label_branch.weight".into(), &self.label_branch.weight));
        out.push(("label_branch.bias".into(), &self.label_branch.bias));
        out.push(("head.fc1.weight".into(), &self.fc1.weight));
        out.push(("head.fc1.bias".into(), &self.fc1.bias));
        out.push(("head.fc2.weight".into(), &self.fc2.weight));
        out.push(("head.fc2.bias".into(), &self.fc2.bias));
        out
    }

    /// Parameters and batchnorm running statistics, in checkpoint order.
    pub fn to_records(&self) -> Vec<(String, Tensor)> {
        let mut records: Vec<(String, Tensor)> = self
            .named_params()
            .into_iter()
            .map(|(n, p)| (n, p.value.clone()))
            .collect();
        for (i, b) in self.blocks.iter().enumerate() {
            records.push((format!("block{i}.bn.running_mean"), Tensor::from_slice(&b.bn.running_mean)));
            records.push((format!("block{i}.bn.running_var"), Tensor::from_slice(&b.bn.running_var)));
        }
        records
    }

    pub fn load_records(&mut self, records: &[(String, Tensor)]) -> Result<()> {
        let expected = self.to_records();
        if expected.len() != records.len() {
            return Err(Error::Format(format!(
                "checkpoint has {} records, model expects {}",
                records.len(),
                expected.len()
            )));
        }
        for ((en, et), (rn, rt)) in expected.iter().zip(records) {
            if en != rn || et.shape() != rt.shape() {
                return Err(Error::Format(format!(
                    "checkpoint record `{rn}` {:?} does not match model `{en}` {:?}",
                    rt.shape(),
                    et.shape()
                )));
            }
        }
        let n_params = records.len() - 2 * self.blocks.len();
        for ((_, p), (_, t)) in self.params_mut().into_iter().zip(&records[..n_params]) {
            p.value = t.clone();
            p.zero_grad();
        }
        for (i, b) in self.blocks.iter_mut().enumerate() {
            b.bn.running_mean = records[n_params + 2 * i].1.data().to_vec();
            b.bn.running_var = records[n_params + 2 * i + 1].1.data().to_vec();
        }
        Ok(())
    }

    /// Writes `model.ckpt` and `model.toml` into `dir`.
    pub fn save(&self, dir: &Path) -> Result<()> {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        self.config.save(&dir.join(MANIFEST_FILE))?;
        checkpoint::write(&dir.join(CHECKPOINT_FILE), &self.to_records())
    }

    pub fn load(dir: &Path) -> Result<Self> {
        let config = ModelConfig::load(&dir.join(MANIFEST_FILE))?;
        let records = checkpoint::read(&dir.join(CHECKPOINT_FILE))?;
        // initial values are overwritten below
        let mut rng = rand::rngs::SmallRng::seed_from_u64(0);
        let mut net = Self::new(config, &mut rng)?;
        net.load_records(&records)?;
        Ok(net)
    }
}

impl Parameterized for ArNetwork {
    fn params_mut(&mut self) -> Vec<(String, &mut Param)> {
        let mut out = Vec::with_capacity(4 * self.blocks.len() + 6);
        for (i, b) in self.blocks.iter_mut().enumerate() {
            out.push((format!("block{i}.conv.weight"), &mut b.conv.weight));
            out.push((format!("block{i}.conv.bias"), &mut b.conv.bias));
            out.push((format!("block{i}.bn.gamma"), &mut b.bn.gamma));
            out.push((format!("block{i}.bn.beta"), &mut b.bn.beta));
        }
        out.push(("label_branch.weight".into(), &mut self.label_branch.weight));
        out.push(("label_branch.bias".into(), &mut self.label_branch.bias));
        out.push(("head.fc1.weight".into(), &mut self.fc1.weight));
        out.push(("head.fc1.bias".into(), &mut self.fc1.bias));
        out.push(("head.fc2.weight".into(), &mut self.fc2.weight));
        out.push(("head.fc2.bias".into(), &mut self.fc2.bias));
        out
    }
}
