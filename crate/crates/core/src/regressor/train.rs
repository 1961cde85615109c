use ndarray::{Array2, ArrayView2, Axis};
use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use super::{batch_loss, gradient, DropoutMasks, MlpParams, HIDDEN_UNITS};
use crate::error::{Error, Result};

/// Optimizer and early-stopping settings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TrainConfig {
    pub learning_rate: f64,
    pub batch_size: usize,
    pub max_epochs: usize,
    pub patience: usize,
    pub dropout_input: f64,
    pub dropout_hidden: f64,
    pub seed: u64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
    pub hidden_units: [usize; 2],
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            learning_rate: 1e-4,
            batch_size: 32,
            max_epochs: 300,
            patience: 20,
            dropout_input: 0.1,
            dropout_hidden: 0.3,
            seed: 0,
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
            hidden_units: HIDDEN_UNITS,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        let prob = |p: f64| (0.0..1.0).contains(&p);
        let problem = if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            "learning_rate must be finite and positive"
        } else if self.max_epochs == 0 {
            "max_epochs must be at least 1"
        } else if self.batch_size == 0 {
            "batch_size must be at least 1"
        } else if self.patience == 0 {
            "patience must be at least 1"
        } else if !prob(self.dropout_input) || !prob(self.dropout_hidden) {
            "dropout rates must lie in [0, 1)"
        } else if !prob(self.beta1) || !prob(self.beta2) || !(self.epsilon > 0.0) {
            "invalid Adam coefficients"
        } else if self.hidden_units.contains(&0) {
            "hidden layers must be non-empty"
        } else {
            return Ok(());
        };
        Err(Error::InvalidParameter(problem.into()))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StopReason {
    Patience,
    MaxEpochs,
}

/// Per-epoch losses and where training stopped. Epochs are numbered from 1.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainReport {
    pub train_loss: Vec<f64>,
    pub val_loss: Vec<f64>,
    pub best_epoch: usize,
    pub best_val_loss: f64,
    pub stop_reason: StopReason,
}

/// Adam with bias correction.
#[derive(Debug, Clone)]
pub struct Adam {
    pub learning_rate: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
    m: MlpParams,
    v: MlpParams,
    step: i32,
}

impl Adam {
    pub fn new(params: &MlpParams, learning_rate: f64, beta1: f64, beta2: f64, epsilon: f64) -> Self {
        Self {
            learning_rate,
            beta1,
            beta2,
            epsilon,
            m: params.zeros_like(),
            v: params.zeros_like(),
            step: 0,
        }
    }

    pub fn step(&mut self, params: &mut MlpParams, grad: &MlpParams) {
        self.step += 1;
        let (b1, b2) = (self.beta1, self.beta2);
        let c1 = 1.0 - b1.powi(self.step);
        let c2 = 1.0 - b2.powi(self.step);
        let lr = self.learning_rate;
        let eps = self.epsilon;
        let p_iter = params.tensors_mut();
        let m_iter = self.m.tensors_mut();
        let v_iter = self.v.tensors_mut();
        for (((p, g), m), v) in p_iter.into_iter().zip(grad.tensors()).zip(m_iter).zip(v_iter) {
            for (((p, &g), m), v) in p.iter_mut().zip(g).zip(m.iter_mut()).zip(v.iter_mut()) {
                *m = b1 * *m + (1.0 - b1) * g;
                *v = b2 * *v + (1.0 - b2) * g * g;
                let m_hat = *m / c1;
                let v_hat = *v / c2;
                *p -= lr * m_hat / (v_hat.sqrt() + eps);
            }
        }
    }
}

fn check_set(x: ArrayView2<f64>, y: ArrayView2<f64>, what: &'static str) -> Result<()> {
    if x.nrows() == 0 {
        return Err(Error::Empty(what));
    }
    if y.dim() != (x.nrows(), 2) {
        return Err(Error::LengthMismatch {
            left: x.nrows(),
            right: y.nrows(),
        });
    }
    Ok(())
}

/// Trains from scratch with mini-batch Adam and early stopping on the
/// validation MSE. Returns the parameters of the best validation epoch.
///
/// Targets are `n × 2` (valence, arousal) matrices. Runs are reproducible
/// bit-for-bit for a fixed `config.seed`.
pub fn train(
    train_x: ArrayView2<f64>,
    train_y: ArrayView2<f64>,
    val_x: ArrayView2<f64>,
    val_y: ArrayView2<f64>,
    config: &TrainConfig,
) -> Result<(MlpParams, TrainReport)> {
    config.validate()?;
    check_set(train_x, train_y, "training set is empty")?;
    check_set(val_x, val_y, "validation set is empty")?;
    if val_x.ncols() != train_x.ncols() {
        return Err(Error::DimensionMismatch {
            expected: train_x.ncols(),
            got: val_x.ncols(),
        });
    }

    let mut params = MlpParams::init_with_hidden(train_x.ncols(), config.hidden_units, config.seed)?;
    let mut adam = Adam::new(&params, config.learning_rate, config.beta1, config.beta2, config.epsilon);
    let mut order_rng = crate::rng::seeded(config.seed, 1);
    let mut mask_rng = crate::rng::seeded(config.seed, 2);
    let use_dropout = config.dropout_input > 0.0 || config.dropout_hidden > 0.0;

    let n = train_x.nrows();
    let mut order: Vec<usize> = (0..n).collect();
    let mut best = (params.clone(), f64::INFINITY, 0usize);
    let mut report = TrainReport {
        train_loss: Vec::new(),
        val_loss: Vec::new(),
        best_epoch: 0,
        best_val_loss: f64::INFINITY,
        stop_reason: StopReason::MaxEpochs,
    };
    let mut since_best = 0;

    for epoch in 1..=config.max_epochs {
        order.shuffle(&mut order_rng);
        let mut weighted = 0.0;
        for chunk in order.chunks(config.batch_size) {
            let bx: Array2<f64> = train_x.select(Axis(0), chunk);
            let by: Array2<f64> = train_y.select(Axis(0), chunk);
            let masks = use_dropout.then(|| {
                DropoutMasks::sample(&mut mask_rng, chunk.len(), &params, config.dropout_input, config.dropout_hidden)
            });
            let (loss, grad) = gradient(&params, bx.view(), by.view(), masks.as_ref())?;
            if !loss.is_finite() {
                return Err(Error::Diverged { epoch, loss });
            }
            adam.step(&mut params, &grad);
            weighted += loss * chunk.len() as f64;
        }
        let val = batch_loss(&params, val_x, val_y)?;
        if !val.is_finite() || !params.is_finite() {
            return Err(Error::Diverged { epoch, loss: val });
        }
        report.train_loss.push(weighted / n as f64);
        report.val_loss.push(val);

        if val < best.1 {
            best = (params.clone(), val, epoch);
            since_best = 0;
        } else {
            since_best += 1;
            if since_best >= config.patience {
                report.stop_reason = StopReason::Patience;
                break;
            }
        }
    }

    report.best_epoch = best.2;
    report.best_val_loss = best.1;
    Ok((best.0, report))
}
