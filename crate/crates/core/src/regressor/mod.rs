//! Two-hidden-layer MLP probe with a joint valence/arousal output.
//!
//! `input → [dropout] → 1024 ReLU → [dropout] → 512 ReLU → [dropout] → (v, a)`
//!
//! Dropout is inverted: kept activations are scaled by `1 / (1 - p)` during
//! training so evaluation uses the weights as they are. The loss is the mean
//! squared error over all `2 n` scalar outputs.

mod checkpoint;
mod train;

pub use checkpoint::{checkpoint_bytes, checkpoint_from_bytes, load_checkpoint, save_checkpoint, MLP1_MAGIC};
pub use train::{train, Adam, StopReason, TrainConfig, TrainReport};

use ndarray::{Array1, Array2, ArrayView1, ArrayView2, Axis};
use rand::Rng;

use crate::datasets::NormalizedLabel;
use crate::error::{Error, Result};

pub const HIDDEN_UNITS: [usize; 2] = [1024, 512];

/// Weights and biases. Also used as the container for gradients.
#[derive(Debug, Clone, PartialEq)]
pub struct MlpParams {
    /// `input_dim × h1`
    pub w1: Array2<f64>,
    pub b1: Array1<f64>,
    /// `h1 × h2`
    pub w2: Array2<f64>,
    pub b2: Array1<f64>,
    /// `h2 × 2`; column 0 is valence, column 1 arousal.
    pub w_out: Array2<f64>,
    pub b_out: Array1<f64>,
}

fn glorot(rng: &mut impl Rng, fan_in: usize, fan_out: usize) -> Array2<f64> {
    let limit = (6.0 / (fan_in + fan_out) as f64).sqrt();
    Array2::from_shape_fn((fan_in, fan_out), |_| rng.random_range(-limit..=limit))
}

impl MlpParams {
    /// Glorot-uniform weights, zero biases, the standard 1024/512 trunk.
    pub fn init(input_dim: usize, seed: u64) -> Result<Self> {
        Self::init_with_hidden(input_dim, HIDDEN_UNITS, seed)
    }

    pub fn init_with_hidden(input_dim: usize, hidden: [usize; 2], seed: u64) -> Result<Self> {
        if input_dim == 0 || hidden.contains(&0) {
            return Err(Error::InvalidParameter(format!("layer sizes {input_dim} → {hidden:?}")));
        }
        let mut rng = crate::rng::seeded(seed, 0x1417);
        Ok(Self {
            w1: glorot(&mut rng, input_dim, hidden[0]),
            b1: Array1::zeros(hidden[0]),
            w2: glorot(&mut rng, hidden[0], hidden[1]),
            b2: Array1::zeros(hidden[1]),
            w_out: glorot(&mut rng, hidden[1], 2),
            b_out: Array1::zeros(2),
        })
    }

    /// All-zero parameters of the given shape.
    pub fn zeros(input_dim: usize, hidden: [usize; 2]) -> Self {
        Self {
            w1: Array2::zeros((input_dim, hidden[0])),
            b1: Array1::zeros(hidden[0]),
            w2: Array2::zeros((hidden[0], hidden[1])),
            b2: Array1::zeros(hidden[1]),
            w_out: Array2::zeros((hidden[1], 2)),
            b_out: Array1::zeros(2),
        }
    }

    pub fn zeros_like(&self) -> Self {
        Self::zeros(self.input_dim(), self.hidden())
    }

    pub fn input_dim(&self) -> usize {
        self.w1.nrows()
    }

    pub fn hidden(&self) -> [usize; 2] {
        [self.w1.ncols(), self.w2.ncols()]
    }

    pub fn n_params(&self) -> usize {
        self.tensors().iter().map(|t| t.len()).sum()
    }

    /// The six tensors in declaration order, flattened row-major.
    pub fn tensors(&self) -> [&[f64]; 6] {
        [
            self.w1.as_slice().expect("standard layout"),
            self.b1.as_slice().expect("standard layout"),
            self.w2.as_slice().expect("standard layout"),
            self.b2.as_slice().expect("standard layout"),
            self.w_out.as_slice().expect("standard layout"),
            self.b_out.as_slice().expect("standard layout"),
        ]
    }

    pub fn tensors_mut(&mut self) -> [&mut [f64]; 6] {
        [
            self.w1.as_slice_mut().expect("standard layout"),
            self.b1.as_slice_mut().expect("standard layout"),
            self.w2.as_slice_mut().expect("standard layout"),
            self.b2.as_slice_mut().expect("standard layout"),
            self.w_out.as_slice_mut().expect("standard layout"),
            self.b_out.as_slice_mut().expect("standard layout"),
        ]
    }

    pub fn is_finite(&self) -> bool {
        self.tensors().iter().all(|t| t.iter().all(|v| v.is_finite()))
    }
}

/// Inverted-dropout multipliers (0 or `1/(1-p)`) for one batch.
#[derive(Debug, Clone, PartialEq)]
pub struct DropoutMasks {
    pub input: Array2<f64>,
    pub hidden1: Array2<f64>,
    pub hidden2: Array2<f64>,
}

fn bernoulli_mask(rng: &mut impl Rng, shape: (usize, usize), p: f64) -> Array2<f64> {
    if p <= 0.0 {
        return Array2::ones(shape);
    }
    let keep = 1.0 / (1.0 - p);
    Array2::from_shape_fn(shape, |_| if rng.random::<f64>() < p { 0.0 } else { keep })
}

impl DropoutMasks {
    pub fn sample(rng: &mut impl Rng, batch: usize, params: &MlpParams, p_input: f64, p_hidden: f64) -> Self {
        let [h1, h2] = params.hidden();
        Self {
            input: bernoulli_mask(rng, (batch, params.input_dim()), p_input),
            hidden1: bernoulli_mask(rng, (batch, h1), p_hidden),
            hidden2: bernoulli_mask(rng, (batch, h2), p_hidden),
        }
    }
}

/// How to run a forward pass.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Mode {
    /// No dropout.
    Eval,
    /// Bernoulli masks drawn from `seed`.
    Train { seed: u64, p_input: f64, p_hidden: f64 },
}

struct Activations {
    x: Array2<f64>,
    z1: Array2<f64>,
    a1: Array2<f64>,
    z2: Array2<f64>,
    a2: Array2<f64>,
    out: Array2<f64>,
}

fn check_dim(params: &MlpParams, got: usize) -> Result<()> {
    if got != params.input_dim() {
        return Err(Error::DimensionMismatch {
            expected: params.input_dim(),
            got,
        });
    }
    Ok(())
}

fn relu_masked(z: &Array2<f64>, mask: Option<&Array2<f64>>) -> Array2<f64> {
    let mut a = z.mapv(|v| v.max(0.0));
    if let Some(m) = mask {
        a *= m;
    }
    a
}

fn forward_cached(params: &MlpParams, x: ArrayView2<f64>, masks: Option<&DropoutMasks>) -> Activations {
    let x = match masks {
        Some(m) => &x * &m.input,
        None => x.to_owned(),
    };
    let z1 = x.dot(&params.w1) + &params.b1;
    let a1 = relu_masked(&z1, masks.map(|m| &m.hidden1));
    let z2 = a1.dot(&params.w2) + &params.b2;
    let a2 = relu_masked(&z2, masks.map(|m| &m.hidden2));
    let out = a2.dot(&params.w_out) + &params.b_out;
    Activations { x, z1, a1, z2, a2, out }
}

/// Batched forward pass; returns an `n × 2` matrix of (valence, arousal).
pub fn forward_batch(params: &MlpParams, x: ArrayView2<f64>, masks: Option<&DropoutMasks>) -> Result<Array2<f64>> {
    check_batch(params, x, masks)?;
    Ok(forward_cached(params, x, masks).out)
}

fn check_batch(params: &MlpParams, x: ArrayView2<f64>, masks: Option<&DropoutMasks>) -> Result<()> {
    check_dim(params, x.ncols())?;
    if let Some(m) = masks {
        let [h1, h2] = params.hidden();
        let n = x.nrows();
        if m.input.dim() != (n, params.input_dim()) || m.hidden1.dim() != (n, h1) || m.hidden2.dim() != (n, h2) {
            return Err(Error::InvalidParameter("dropout mask shape does not match batch".into()));
        }
    }
    Ok(())
}

/// Single-sample forward pass returning `(valence, arousal)`.
pub fn forward(params: &MlpParams, x: ArrayView1<f64>, mode: Mode) -> Result<(f64, f64)> {
    check_dim(params, x.len())?;
    let x2 = x.insert_axis(Axis(0));
    let out = match mode {
        Mode::Eval => forward_batch(params, x2, None)?,
        Mode::Train { seed, p_input, p_hidden } => {
            let mut rng = crate::rng::seeded(seed, 0xd0);
            let masks = DropoutMasks::sample(&mut rng, 1, params, p_input, p_hidden);
            forward_batch(params, x2, Some(&masks))?
        }
    };
    Ok((out[[0, 0]], out[[0, 1]]))
}

/// Eval-mode predictions, one `(valence, arousal)` per row.
pub fn predict(params: &MlpParams, x: ArrayView2<f64>) -> Result<Vec<(f64, f64)>> {
    let out = forward_batch(params, x, None)?;
    Ok(out.rows().into_iter().map(|r| (r[0], r[1])).collect())
}

/// Targets as an `n × 2` (valence, arousal) matrix.
pub fn labels_to_array(labels: &[NormalizedLabel]) -> Array2<f64> {
    Array2::from_shape_fn((labels.len(), 2), |(i, j)| if j == 0 { labels[i].valence } else { labels[i].arousal })
}

/// Mean of the `2 n` squared residuals.
pub fn mse_loss(pred: &[(f64, f64)], target: &[NormalizedLabel]) -> Result<f64> {
    if pred.len() != target.len() {
        return Err(Error::LengthMismatch {
            left: pred.len(),
            right: target.len(),
        });
    }
    if pred.is_empty() {
        return Err(Error::Empty("mse_loss needs at least one pair"));
    }
    let sum: f64 = pred
        .iter()
        .zip(target)
        .map(|(&(v, a), t)| (v - t.valence).powi(2) + (a - t.arousal).powi(2))
        .sum();
    Ok(sum / (2 * pred.len()) as f64)
}

fn mse_array(pred: &Array2<f64>, target: ArrayView2<f64>) -> f64 {
    (pred - &target).mapv(|r| r * r).sum() / pred.len() as f64
}

/// Loss and exact gradient of the MSE over a batch.
///
/// With `masks = None` this differentiates the eval-mode network; with masks
/// it differentiates the training network for that fixed dropout pattern.
pub fn gradient(
    params: &MlpParams,
    x: ArrayView2<f64>,
    targets: ArrayView2<f64>,
    masks: Option<&DropoutMasks>,
) -> Result<(f64, MlpParams)> {
    if x.nrows() == 0 {
        return Err(Error::Empty("gradient needs a non-empty batch"));
    }
    if targets.dim() != (x.nrows(), 2) {
        return Err(Error::LengthMismatch {
            left: x.nrows(),
            right: targets.nrows(),
        });
    }
    check_batch(params, x, masks)?;
    let act = forward_cached(params, x, masks);
    let loss = mse_array(&act.out, targets);

    let n_out = act.out.len() as f64;
    let d_out = (&act.out - &targets) * (2.0 / n_out);
    let w_out = act.a2.t().dot(&d_out);
    let b_out = d_out.sum_axis(Axis(0));

    let mut d2 = d_out.dot(&params.w_out.t());
    if let Some(m) = masks {
        d2 *= &m.hidden2;
    }
    d2.zip_mut_with(&act.z2, |d, &z| {
        if z <= 0.0 {
            *d = 0.0
        }
    });
    let w2 = act.a1.t().dot(&d2);
    let b2 = d2.sum_axis(Axis(0));

    let mut d1 = d2.dot(&params.w2.t());
    if let Some(m) = masks {
        d1 *= &m.hidden1;
    }
    d1.zip_mut_with(&act.z1, |d, &z| {
        if z <= 0.0 {
            *d = 0.0
        }
    });
    let w1 = act.x.t().dot(&d1);
    let b1 = d1.sum_axis(Axis(0));

    Ok((
        loss,
        MlpParams {
            w1: w1.as_standard_layout().into_owned(),
            b1,
            w2: w2.as_standard_layout().into_owned(),
            b2,
            w_out: w_out.as_standard_layout().into_owned(),
            b_out,
        },
    ))
}

/// Batch loss in eval mode.
pub fn batch_loss(params: &MlpParams, x: ArrayView2<f64>, targets: ArrayView2<f64>) -> Result<f64> {
    let out = forward_batch(params, x, None)?;
    Ok(mse_array(&out, targets))
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    fn small_net(d: usize, seed: u64) -> MlpParams {
        let mut p = MlpParams::init_with_hidden(d, [6, 5], seed).unwrap();
        // non-zero biases exercise every path
        let mut rng = crate::rng::seeded(seed, 77);
        for t in [&mut p.b1, &mut p.b2, &mut p.b_out] {
            t.mapv_inplace(|_| rng.random_range(-0.2..0.2));
        }
        p
    }

    #[test]
    fn init_is_seeded() {
        let a = MlpParams::init(8, 1).unwrap();
        assert_eq!(a, MlpParams::init(8, 1).unwrap());
        assert_ne!(a.w1, MlpParams::init(8, 2).unwrap().w1);
        assert_eq!(a.hidden(), [1024, 512]);
        assert!(a.b1.iter().all(|&b| b == 0.0));
        let limit = (6.0f64 / (8 + 1024) as f64).sqrt();
        assert!(a.w1.iter().all(|w| w.abs() <= limit));
    }

    #[test]
    fn fused_input_shape() {
        let p = MlpParams::init(4872, 0).unwrap();
        assert_eq!(p.w1.dim(), (4872, 1024));
        assert_eq!(p.w2.dim(), (1024, 512));
        assert_eq!(p.w_out.dim(), (512, 2));
    }

    #[test]
    fn zero_net_outputs_zero() {
        let p = MlpParams::zeros(3, [4, 4]);
        let x = array![1.0, -2.0, 3.0];
        assert_eq!(forward(&p, x.view(), Mode::Eval).unwrap(), (0.0, 0.0));
        let train = Mode::Train {
            seed: 3,
            p_input: 0.5,
            p_hidden: 0.5,
        };
        assert_eq!(forward(&p, x.view(), train).unwrap(), (0.0, 0.0));
    }

    #[test]
    fn eval_forward_is_repeatable() {
        let p = small_net(4, 9);
        let x = array![0.3, -0.1, 0.8, 0.0];
        assert_eq!(forward(&p, x.view(), Mode::Eval).unwrap(), forward(&p, x.view(), Mode::Eval).unwrap());
    }

    #[test]
    fn forward_matches_hand_arithmetic() {
        let p = small_net(3, 4);
        let x = [0.5, -1.0, 2.0];
        // dense algebra by explicit loops
        let layer = |inp: &[f64], w: &Array2<f64>, b: &Array1<f64>, relu: bool| -> Vec<f64> {
            (0..w.ncols())
                .map(|j| {
                    let s = b[j] + (0..inp.len()).map(|i| inp[i] * w[[i, j]]).sum::<f64>();
                    if relu {
                        s.max(0.0)
                    } else {
                        s
                    }
                })
                .collect()
        };
        let h1 = layer(&x, &p.w1, &p.b1, true);
        let h2 = layer(&h1, &p.w2, &p.b2, true);
        let o = layer(&h2, &p.w_out, &p.b_out, false);
        let (v, a) = forward(&p, ndarray::aview1(&x), Mode::Eval).unwrap();
        assert!((v - o[0]).abs() < 1e-14 && (a - o[1]).abs() < 1e-14);
    }

    #[test]
    fn dimension_mismatch() {
        let p = small_net(3, 0);
        assert!(matches!(forward(&p, array![1.0, 2.0].view(), Mode::Eval), Err(Error::DimensionMismatch { .. })));
        assert!(predict(&p, Array2::zeros((2, 4)).view()).is_err());
    }

    #[test]
    fn mse_cases() {
        let t = |v, a| NormalizedLabel { valence: v, arousal: a };
        assert_eq!(mse_loss(&[(0.3, -0.2)], &[t(0.3, -0.2)]).unwrap(), 0.0);
        assert!((mse_loss(&[(0.0, 0.0)], &[t(1.0, 1.0)]).unwrap() - 1.0).abs() < 1e-12);
        assert!((mse_loss(&[(0.5, 0.0)], &[t(0.0, 0.0)]).unwrap() - 0.125).abs() < 1e-12);
        assert!(mse_loss(&[(0.0, 0.0)], &[]).is_err());
    }

    #[test]
    fn predict_preserves_rows() {
        let p = small_net(2, 1);
        let x = array![[0.1, 0.2], [1.0, -1.0], [0.0, 0.5]];
        let out = predict(&p, x.view()).unwrap();
        assert_eq!(out.len(), 3);
        for (i, row) in x.rows().into_iter().enumerate() {
            assert_eq!(out[i], forward(&p, row, Mode::Eval).unwrap());
        }
    }

    #[test]
    fn eval_ignores_dropout_seed() {
        let p = small_net(4, 2);
        let x = array![[0.1, 0.2, 0.3, 0.4]];
        let before = predict(&p, x.view()).unwrap();
        let _ = forward(&p, x.row(0), Mode::Train { seed: 5, p_input: 0.5, p_hidden: 0.5 }).unwrap();
        assert_eq!(before, predict(&p, x.view()).unwrap());
    }

    #[test]
    fn zero_residual_zero_gradient() {
        let p = small_net(4, 3);
        let x = array![[0.1, 0.2, 0.3, 0.4], [-0.5, 0.0, 0.2, 1.0]];
        let y = forward_batch(&p, x.view(), None).unwrap();
        let (loss, g) = gradient(&p, x.view(), y.view(), None).unwrap();
        assert_eq!(loss, 0.0);
        assert!(g.tensors().iter().all(|t| t.iter().all(|&v| v == 0.0)));
    }

    #[test]
    fn output_bias_gradient_is_mean_residual() {
        // L = Σ r² / (2n) ⇒ ∂L/∂b_out[k] = 2 Σ_i r_ik / (2n)
        let p = small_net(4, 5);
        let x = array![[0.1, 0.2, 0.3, 0.4], [-0.5, 0.0, 0.2, 1.0], [0.9, 0.9, -0.3, 0.0]];
        let y = array![[0.2, -0.1], [0.0, 0.5], [-0.7, 0.3]];
        let out = forward_batch(&p, x.view(), None).unwrap();
        let (_, g) = gradient(&p, x.view(), y.view(), None).unwrap();
        for k in 0..2 {
            let sum_r: f64 = (0..3).map(|i| out[[i, k]] - y[[i, k]]).sum();
            assert!((g.b_out[k] - 2.0 * sum_r / 6.0).abs() < 1e-14);
        }
    }
}
