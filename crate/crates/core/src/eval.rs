//! Leaf evaluators used by the tree search.

use thiserror::Error;

use crate::hp::{FoldState, RelativeMove};

#[derive(Debug, Error, Clone, PartialEq)]
#[error("evaluator failed: {0}")]
pub struct EvalError(pub String);

/// Move priors in `F, L, R` order plus a value estimate in contact units.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PolicyValue {
    pub policy: [f64; 3],
    pub value: f64,
}

impl PolicyValue {
    pub fn prior(&self, mv: RelativeMove) -> f64 {
        self.policy[mv.index()]
    }

    pub fn check(&self) -> Result<(), EvalError> {
        let sum: f64 = self.policy.iter().sum();
        if self.policy.iter().any(|p| !p.is_finite() || *p < 0.0) || !sum.is_finite() {
            return Err(EvalError(format!("invalid policy {:?}", self.policy)));
        }
        if !self.value.is_finite() {
            return Err(EvalError(format!("non-finite value {}", self.value)));
        }
        Ok(())
    }
}

/// A policy-value evaluator that may be shared between episode workers.
pub trait Evaluator: Sync {
    fn evaluate(&self, state: &FoldState) -> Result<PolicyValue, EvalError>;

    /// Largest board radius the evaluator can represent, if limited.
    fn board_radius(&self) -> Option<u32> {
        None
    }
}

/// Evaluator as seen by a single search tree. Unlike [`Evaluator`] it may
/// carry mutable per-search state such as a rollout RNG.
pub trait LeafEvaluator {
    fn evaluate_leaf(&mut self, state: &FoldState) -> Result<PolicyValue, EvalError>;

    fn board_radius(&self) -> Option<u32> {
        None
    }
}

impl<E: Evaluator + ?Sized> LeafEvaluator for &E {
    fn evaluate_leaf(&mut self, state: &FoldState) -> Result<PolicyValue, EvalError> {
        (**self).evaluate(state)
    }

    fn board_radius(&self) -> Option<u32> {
        (**self).board_radius()
    }
}

/// Uniform priors and a constant value.
#[derive(Debug, Clone, Copy, Default)]
pub struct UniformEvaluator {
    pub value: f64,
}

impl Evaluator for UniformEvaluator {
    fn evaluate(&self, _state: &FoldState) -> Result<PolicyValue, EvalError> {
        Ok(PolicyValue {
            policy: [1.0 / 3.0; 3],
            value: self.value,
        })
    }
}
