//! AdaGrad and AdaDelta with per-parameter state.

use crate::error::{Error, Result};

pub const ADAGRAD_EPS: f64 = 1e-8;
pub const ADADELTA_RHO: f64 = 0.95;
pub const ADADELTA_EPS: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OptimizerKind {
    AdaGrad,
    AdaDelta,
}

impl OptimizerKind {
    pub fn as_str(self) -> &'static str {
        match self {
            OptimizerKind::AdaGrad => "adagrad",
            OptimizerKind::AdaDelta => "adadelta",
        }
    }
}

impl std::str::FromStr for OptimizerKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "adagrad" => Ok(OptimizerKind::AdaGrad),
            "adadelta" => Ok(OptimizerKind::AdaDelta),
            _ => Err(Error::Config(format!("unknown optimizer `{s}` (expected adagrad or adadelta)"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OptimizerConfig {
    pub kind: OptimizerKind,
    /// Step size for AdaGrad; global multiplier on the AdaDelta update.
    pub lr: f64,
    pub rho: f64,
    pub eps: f64,
}

impl OptimizerConfig {
    pub fn adagrad(lr: f64) -> Self {
        OptimizerConfig {
            kind: OptimizerKind::AdaGrad,
            lr,
            rho: 0.0,
            eps: ADAGRAD_EPS,
        }
    }

    pub fn adadelta(lr: f64) -> Self {
        OptimizerConfig {
            kind: OptimizerKind::AdaDelta,
            lr,
            rho: ADADELTA_RHO,
            eps: ADADELTA_EPS,
        }
    }

    pub fn new(kind: OptimizerKind, lr: f64) -> Self {
        match kind {
            OptimizerKind::AdaGrad => Self::adagrad(lr),
            OptimizerKind::AdaDelta => Self::adadelta(lr),
        }
    }
}

/// Accumulators shaped like the parameter vector they update.
///
/// AdaGrad keeps the running sum of squared gradients in `grad_sq`.
/// AdaDelta keeps decaying averages of squared gradients (`grad_sq`) and of
/// squared unscaled updates (`update_sq`).
#[derive(Debug, Clone, PartialEq)]
pub struct OptimizerState {
    config: OptimizerConfig,
    grad_sq: Vec<f64>,
    update_sq: Vec<f64>,
}

impl OptimizerState {
    pub fn new(config: OptimizerConfig, len: usize) -> Self {
        let update_sq = match config.kind {
            OptimizerKind::AdaGrad => Vec::new(),
            OptimizerKind::AdaDelta => vec![0.0; len],
        };
        OptimizerState {
            config,
            grad_sq: vec![0.0; len],
            update_sq,
        }
    }

    pub fn config(&self) -> &OptimizerConfig {
        &self.config
    }

    pub fn len(&self) -> usize {
        self.grad_sq.len()
    }

    pub fn is_empty(&self) -> bool {
        self.grad_sq.is_empty()
    }

    pub fn grad_sq(&self) -> &[f64] {
        &self.grad_sq
    }

    pub fn update_sq(&self) -> &[f64] {
        &self.update_sq
    }

    /// Updates every parameter.
    pub fn step(&mut self, params: &mut [f64], grads: &[f64]) -> Result<()> {
        if params.len() != self.len() || grads.len() != self.len() {
            return Err(Error::Dimension {
                expected: self.len(),
                got: params.len().max(grads.len()),
            });
        }
        self.step_range(0, params, grads);
        Ok(())
    }

    /// Updates the parameters `params`, which sit at `offset` in the full
    /// parameter vector.
    pub(crate) fn step_range(&mut self, offset: usize, params: &mut [f64], grads: &[f64]) {
        let c = self.config;
        match c.kind {
            OptimizerKind::AdaGrad => {
                for ((p, g), acc) in params.iter_mut().zip(grads).zip(&mut self.grad_sq[offset..]) {
                    *acc += g * g;
                    *p -= c.lr * g / (acc.sqrt() + c.eps);
                }
            }
            OptimizerKind::AdaDelta => {
                let accs = self.grad_sq[offset..].iter_mut().zip(&mut self.update_sq[offset..]);
                for ((p, g), (eg, ex)) in params.iter_mut().zip(grads).zip(accs) {
                    *eg = c.rho * *eg + (1.0 - c.rho) * g * g;
                    let update = g * (*ex + c.eps).sqrt() / (*eg + c.eps).sqrt();
                    *ex = c.rho * *ex + (1.0 - c.rho) * update * update;
                    *p -= c.lr * update;
                }
            }
        }
    }
}

/// One AdaGrad update: `acc += g²; p -= lr · g / (√acc + ε)`.
pub fn adagrad_step(state: &mut OptimizerState, params: &mut [f64], grads: &[f64]) -> Result<()> {
    debug_assert_eq!(state.config.kind, OptimizerKind::AdaGrad);
    state.step(params, grads)
}

/// One AdaDelta update, scaled by the configured learning rate.
pub fn adadelta_step(state: &mut OptimizerState, params: &mut [f64], grads: &[f64]) -> Result<()> {
    debug_assert_eq!(state.config.kind, OptimizerKind::AdaDelta);
    state.step(params, grads)
}
