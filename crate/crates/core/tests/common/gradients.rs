//! Finite-difference checks shared by the gradient and acceptance suites.

use ar_rul::armodel::{ArNetwork, ModelConfig};
use ar_rul::numcore::gradcheck::{finite_difference, relative_error};
use ar_rul::numcore::{
    gradient_check, masked_mse_loss, BatchNorm1d, Conv1d, Dropout, GradCheckConfig, Linear, MaxPool1d, Mode,
    Parameterized, Relu,
};
use ar_rul::Tensor;
use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub const STEP: f64 = 1e-5;

/// One kernel's worst block error against its tolerance.
#[derive(Debug, Clone)]
pub struct Check {
    pub name: String,
    pub rel_error: f64,
    pub tolerance: f64,
}

impl Check {
    pub fn passed(&self) -> bool {
        self.rel_error <= self.tolerance
    }
}

fn random(rng: &mut ChaCha8Rng, shape: &[usize]) -> Tensor {
    let n = shape.iter().product();
    Tensor::new(shape.to_vec(), (0..n).map(|_| rng.random_range(-1.0..1.0)).collect()).unwrap()
}

fn dot(y: &Tensor, w: &Tensor) -> f64 {
    y.data().iter().zip(w.data()).map(|(a, b)| a * b).sum()
}

/// Compares `backward(w)` with central differences of `x ↦ ⟨forward(x), w⟩`.
fn input_check(
    x: &Tensor,
    w_of: impl Fn(&Tensor) -> Tensor,
    mut forward: impl FnMut(&Tensor) -> Tensor,
    mut backward: impl FnMut(&Tensor) -> Tensor,
) -> f64 {
    let y = forward(x);
    let w = w_of(&y);
    let analytic = backward(&w);
    let shape = x.shape().to_vec();
    let numeric = finite_difference(
        |v| dot(&forward(&Tensor::new(shape.clone(), v.to_vec()).unwrap()), &w),
        x.data(),
        STEP,
    );
    relative_error(analytic.data(), &numeric)
}

fn param_check<M: Parameterized>(
    layer: &mut M,
    x: &Tensor,
    w: &Tensor,
    forward: impl Fn(&mut M, &Tensor) -> Tensor,
    backward: impl Fn(&mut M, &Tensor),
) -> f64 {
    gradient_check(
        layer,
        |l| Ok(dot(&forward(l, x), w)),
        |l| {
            l.zero_grad();
            forward(l, x);
            backward(l, w);
            Ok(())
        },
        GradCheckConfig { step: STEP, max_entries_per_block: None },
    )
    .unwrap()
    .max_rel_error()
}

/// Every kernel on shapes drawn from `seed`: parameter and input gradients.
pub fn kernel_checks(seed: u64) -> Vec<Check> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::new();
    let mut push = |name: &str, rel_error: f64, tolerance: f64| {
        out.push(Check { name: name.to_string(), rel_error, tolerance });
    };

    // convolution
    let (b, cin, cout, len) = (
        rng.random_range(1..4usize),
        rng.random_range(1..5usize),
        rng.random_range(1..5usize),
        rng.random_range(3..12usize),
    );
    let kernel = [1usize, 3][rng.random_range(0..2usize)];
    let pad = kernel / 2;
    let mut conv = Conv1d::new(cin, cout, kernel, 1, pad, &mut rng);
    let x = random(&mut rng, &[b, cin, len]);
    let w = random(&mut rng, &[b, cout, len]);
    push(
        "conv1d.params",
        param_check(&mut conv, &x, &w, |c, x| c.forward(x, Mode::Train).unwrap(), |c, w| {
            c.backward(w).unwrap();
        }),
        1e-6,
    );
    let cw = w.clone();
    let mut c2 = conv.clone();
    let mut c3 = conv.clone();
    push(
        "conv1d.input",
        input_check(&x, |_| cw.clone(), |x| c2.forward(x, Mode::Eval).unwrap(), |w| {
            c3.forward(&x, Mode::Train).unwrap();
            c3.backward(w).unwrap()
        }),
        1e-6,
    );

    // linear
    let (b, fin, fout) = (rng.random_range(1..5usize), rng.random_range(1..8usize), rng.random_range(1..6usize));
    let mut lin = Linear::new(fin, fout, &mut rng);
    let x = random(&mut rng, &[b, fin]);
    let w = random(&mut rng, &[b, fout]);
    push(
        "linear.params",
        param_check(&mut lin, &x, &w, |l, x| l.forward(x, Mode::Train).unwrap(), |l, w| {
            l.backward(w).unwrap();
        }),
        1e-6,
    );
    let lw = w.clone();
    let mut l2 = lin.clone();
    let mut l3 = lin.clone();
    push(
        "linear.input",
        input_check(&x, |_| lw.clone(), |x| l2.forward(x, Mode::Eval).unwrap(), |w| {
            l3.forward(&x, Mode::Train).unwrap();
            l3.backward(w).unwrap()
        }),
        1e-6,
    );

    // batchnorm, train-mode statistics
    let (b, ch, len) = (rng.random_range(2..4usize), rng.random_range(1..4usize), rng.random_range(2..8usize));
    let mut bn = BatchNorm1d::new(ch);
    for v in bn.gamma.value.data_mut() {
        *v = rng.random_range(0.5..1.5);
    }
    for v in bn.beta.value.data_mut() {
        *v = rng.random_range(-0.5..0.5);
    }
    let x = random(&mut rng, &[b, ch, len]);
    let w = random(&mut rng, &[b, ch, len]);
    push(
        "batchnorm.params",
        param_check(&mut bn, &x, &w, |n, x| n.forward(x, Mode::Train).unwrap(), |n, w| {
            n.backward(w).unwrap();
        }),
        1e-4,
    );
    let bw = w.clone();
    let mut n2 = bn.clone();
    let mut n3 = bn.clone();
    push(
        "batchnorm.input",
        input_check(&x, |_| bw.clone(), |x| n2.forward(x, Mode::Train).unwrap(), |w| {
            n3.forward(&x, Mode::Train).unwrap();
            n3.backward(w).unwrap()
        }),
        1e-4,
    );

    // relu, away from the kink
    let shape = [rng.random_range(1..3usize), rng.random_range(1..4usize), rng.random_range(1..8usize)];
    let mut x = random(&mut rng, &shape);
    for v in x.data_mut() {
        if v.abs() < 1e-3 {
            *v = 0.5;
        }
    }
    let w = random(&mut rng, &shape);
    let mut r1 = Relu::new();
    let mut r2 = Relu::new();
    push(
        "relu.input",
        input_check(&x, |_| w.clone(), |x| r1.forward(x, Mode::Eval), |w| {
            r2.forward(&x, Mode::Train);
            r2.backward(w).unwrap()
        }),
        1e-4,
    );

    // max pooling with distinct values
    let k = [2usize, 4][rng.random_range(0..2usize)];
    let shape = [rng.random_range(1..3usize), rng.random_range(1..4usize), k * rng.random_range(1..5usize)];
    let x = random(&mut rng, &shape);
    let mut p1 = MaxPool1d::new(k, k);
    let mut p2 = MaxPool1d::new(k, k);
    push(
        "maxpool.input",
        input_check(
            &x,
            |y| {
                let mut r = ChaCha8Rng::seed_from_u64(seed ^ 0xabc);
                random(&mut r, y.shape())
            },
            |x| p1.forward(x, Mode::Eval).unwrap(),
            |w| {
                p2.forward(&x, Mode::Train).unwrap();
                p2.backward(w).unwrap()
            },
        ),
        1e-4,
    );

    // dropout with a fixed mask
    let shape = [rng.random_range(1..4usize), rng.random_range(1..9usize)];
    let x = random(&mut rng, &shape);
    let w = random(&mut rng, &shape);
    let mut d1 = Dropout::new(0.3).unwrap();
    let mut d2 = Dropout::new(0.3).unwrap();
    push(
        "dropout.input",
        input_check(
            &x,
            |_| w.clone(),
            |x| d1.forward(x, Mode::Train, &mut ChaCha8Rng::seed_from_u64(seed)),
            |w| {
                d2.forward(&x, Mode::Train, &mut ChaCha8Rng::seed_from_u64(seed));
                d2.backward(w).unwrap()
            },
        ),
        1e-4,
    );

    // masked mse
    let n = rng.random_range(1..10usize);
    let pred = random(&mut rng, &[n]);
    let target = random(&mut rng, &[n]);
    let mut mask: Vec<bool> = (0..n).map(|_| rng.random_bool(0.7)).collect();
    mask[0] = true;
    let (_, grad) = masked_mse_loss(&pred, &target, Some(&mask)).unwrap();
    let numeric = finite_difference(
        |v| masked_mse_loss(&Tensor::new(vec![n], v.to_vec()).unwrap(), &target, Some(&mask)).unwrap().0,
        pred.data(),
        STEP,
    );
    push("mse.input", relative_error(grad.data(), &numeric), 1e-4);
    out
}

/// Full network at desk scale: masked MSE on a random batch, dropout mask
/// fixed by reseeding, every parameter block checked.
pub fn model_check(seed: u64) -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let cfg = ModelConfig { channel_scale: 0.1, ..ModelConfig::new(5, 64) };
    let mut net = ArNetwork::new(cfg, &mut rng).unwrap();
    let b = 3;
    let x = random(&mut rng, &[b, 10, 64]);
    let x2 = random(&mut rng, &[b, 5]);
    let y = random(&mut rng, &[b]);
    let mask = vec![true, true, false];
    let drop_seed = seed.wrapping_add(1000);
    let loss = |n: &mut ArNetwork| {
        let p = n.forward(&x, &x2, Mode::Train, &mut ChaCha8Rng::seed_from_u64(drop_seed))?;
        Ok(masked_mse_loss(&p, &y, Some(&mask))?.0)
    };
    let report = gradient_check(
        &mut net,
        loss,
        |n| {
            n.zero_grad();
            let p = n.forward(&x, &x2, Mode::Train, &mut ChaCha8Rng::seed_from_u64(drop_seed))?;
            let (_, g) = masked_mse_loss(&p, &y, Some(&mask))?;
            n.backward(&g)
        },
        GradCheckConfig { step: STEP, max_entries_per_block: Some(48) },
    )
    .unwrap();
    Check { name: "model".into(), rel_error: report.max_rel_error(), tolerance: 1e-3 }
}
