//! Residual convolutional policy-value network, its trainer and checkpoints.

mod checkpoint;
mod network;
mod ops;

use std::sync::Arc;

use thiserror::Error;

pub use checkpoint::{decode_checkpoint, encode_checkpoint, load_checkpoint, save_checkpoint, CheckpointError, CHECKPOINT_MAGIC, CHECKPOINT_VERSION};
pub use network::{data_loss, DenseTargets, LossParts, Network, NetworkConfig, Outputs, Param, LOG_FLOOR, POLICY_OUTPUTS};
pub use ops::Scalar;

use crate::encode::{encode_walk, GridGeometry, PlaneStack};
use crate::eval::{EvalError, Evaluator, PolicyValue};
use crate::hp::FoldState;
use crate::selfplay::ReplaySample;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum NetError {
    #[error("invalid network configuration: {0}")]
    Config(String),
    #[error("input shape mismatch: expected {expected} values, found {found}")]
    Shape { expected: usize, found: usize },
    #[error("input grid {found} does not match the network grid {expected}")]
    Grid { expected: usize, found: usize },
    #[error("invalid training target: {0}")]
    Target(String),
    #[error("non-finite loss")]
    NonFinite,
}

impl<T: Scalar> Network<T> {
    /// Flattens encoded states into one dense input batch.
    pub fn dense_inputs(&self, inputs: &[&PlaneStack]) -> Result<Vec<T>, NetError> {
        let len = self.config().input_len();
        let mut x = vec![T::zero(); inputs.len() * len];
        for (stack, out) in inputs.iter().zip(x.chunks_mut(len)) {
            if stack.grid_size() != self.config().grid_size {
                return Err(NetError::Grid {
                    expected: self.config().grid_size,
                    found: stack.grid_size(),
                });
            }
            stack.write_dense(out);
        }
        Ok(x)
    }

    /// Inference on encoded states.
    pub fn predict(&self, inputs: &[&PlaneStack]) -> Result<Vec<PolicyValue>, NetError> {
        let x = self.dense_inputs(inputs)?;
        let out = self.forward_dense(&x, inputs.len())?;
        Ok((0..inputs.len())
            .map(|b| PolicyValue {
                policy: [0, 1, 2].map(|a| out.policy[b * POLICY_OUTPUTS + a].as_f64()),
                value: out.value[b].as_f64(),
            })
            .collect())
    }
}

/// Network with SGD momentum buffers and a step counter.
#[derive(Debug, Clone)]
pub struct Trainer<T: Scalar = f32> {
    pub net: Network<T>,
    velocity: Vec<Vec<T>>,
    step: u64,
}

impl<T: Scalar> Trainer<T> {
    pub fn new(net: Network<T>) -> Self {
        let velocity = net.params().iter().map(|p| vec![T::zero(); p.data.len()]).collect();
        Self { net, velocity, step: 0 }
    }

    pub(crate) fn from_parts(net: Network<T>, velocity: Vec<Vec<T>>, step: u64) -> Self {
        Self { net, velocity, step }
    }

    pub fn step(&self) -> u64 {
        self.step
    }

    pub fn velocity(&self) -> &[Vec<T>] {
        &self.velocity
    }

    /// One optimizer step on replay samples.
    pub fn train_step(&mut self, samples: &[ReplaySample]) -> Result<LossParts, NetError> {
        if samples.is_empty() {
            return Err(NetError::Target("empty batch".into()));
        }
        let mut policy = Vec::with_capacity(samples.len() * POLICY_OUTPUTS);
        let mut reward = Vec::with_capacity(samples.len());
        for s in samples {
            if (s.target_policy.sum() - 1.0).abs() > 1e-6 {
                return Err(NetError::Target(format!(
                    "policy target sums to {}",
                    s.target_policy.sum()
                )));
            }
            policy.extend(s.target_policy.probabilities.map(T::from_f64));
            reward.push(T::from_f64(s.reward));
        }
        let inputs: Vec<&PlaneStack> = samples.iter().map(|s| &s.input).collect();
        let x = self.net.dense_inputs(&inputs)?;
        self.train_dense(&x, samples.len(), &DenseTargets { policy, reward })
    }

    /// One optimizer step on a dense batch: `buf = mu * buf + g`,
    /// `theta -= lr * buf`. A non-finite loss leaves the parameters alone.
    pub fn train_dense(&mut self, x: &[T], batch: usize, targets: &DenseTargets<T>) -> Result<LossParts, NetError> {
        let (parts, grads) = self.net.loss_and_grads(x, batch, targets)?;
        if !parts.is_finite() {
            return Err(NetError::NonFinite);
        }
        let mu = T::from_f64(self.net.config().momentum);
        let lr = T::from_f64(self.net.config().learning_rate);
        for ((param, buf), grad) in self.net.params_mut().iter_mut().zip(&mut self.velocity).zip(&grads) {
            for ((p, v), g) in param.data.iter_mut().zip(buf.iter_mut()).zip(grad) {
                *v = mu * *v + *g;
                *p = *p - lr * *v;
            }
        }
        self.step += 1;
        Ok(parts)
    }
}

/// Shared inference-mode network used as a search evaluator.
#[derive(Debug, Clone)]
pub struct NetEvaluator {
    pub net: Arc<Network<f32>>,
}

impl NetEvaluator {
    pub fn new(net: Arc<Network<f32>>) -> Self {
        Self { net }
    }

    pub fn grid(&self) -> usize {
        self.net.config().grid_size
    }
}

impl Evaluator for NetEvaluator {
    fn evaluate(&self, state: &FoldState) -> Result<PolicyValue, EvalError> {
        let stack = encode_walk(state, self.grid()).map_err(|e| EvalError(e.to_string()))?;
        let pv = self
            .net
            .predict(&[&stack])
            .map_err(|e| EvalError(e.to_string()))?
            .remove(0);
        pv.check()?;
        Ok(pv)
    }

    fn board_radius(&self) -> Option<u32> {
        GridGeometry::new(self.grid()).ok().map(|g| g.radius())
    }
}
