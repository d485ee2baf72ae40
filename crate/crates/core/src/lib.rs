//! HP lattice protein folding: a regularized UCT search guided by a
//! policy-value network trained through self-play, with an exact
//! branch-and-bound oracle and a rollout-UCT baseline.

pub mod hp;
pub mod encode;
pub mod eval;
pub mod ruct;
pub mod oracle;
pub mod hpnet;
pub mod selfplay;
pub mod baseline;
