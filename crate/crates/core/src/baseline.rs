//! Rollout-UCT baseline and a side-by-side engine comparison table.

use std::fmt::Write as _;

use rand::seq::IndexedRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::eval::{EvalError, LeafEvaluator, PolicyValue};
use crate::hp::{FoldState, HpSequence, Status};
use crate::ruct::{SearchConfig, SearchError};
use crate::selfplay::{fold_with, EpisodeRecord};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RolloutConfig {
    pub simulations: u32,
    pub exploration: f64,
}

impl Default for RolloutConfig {
    fn default() -> Self {
        Self {
            simulations: 1000,
            exploration: 1.0,
        }
    }
}

/// Uniform priors; the value is the contact count reached by playing
/// uniformly random legal moves until the fold completes or traps.
pub struct RolloutEvaluator<'a, R: Rng + ?Sized> {
    rng: &'a mut R,
}

impl<'a, R: Rng + ?Sized> RolloutEvaluator<'a, R> {
    pub fn new(rng: &'a mut R) -> Self {
        Self { rng }
    }
}

/// Plays random legal moves from `state` to termination.
pub fn random_rollout<R: Rng + ?Sized>(state: &FoldState, rng: &mut R) -> FoldState {
    let mut state = state.clone();
    while state.status() == Status::Ongoing {
        let legal = state.legal_moves();
        let mv = *legal.choose(rng).expect("ongoing state has a legal move");
        state.push_move(mv).expect("legal move applies");
    }
    state
}

impl<R: Rng + ?Sized> LeafEvaluator for RolloutEvaluator<'_, R> {
    fn evaluate_leaf(&mut self, state: &FoldState) -> Result<PolicyValue, EvalError> {
        let end = random_rollout(state, self.rng);
        Ok(PolicyValue {
            policy: [1.0 / 3.0; 3],
            value: f64::from(end.score().contacts),
        })
    }
}

/// Folds a sequence with per-residue UCT whose leaves are valued by a single
/// random rollout. Selection and move choice match the network-guided search
/// with uniform priors.
pub fn rollout_uct_fold<R: Rng + ?Sized>(
    sequence: &HpSequence,
    config: &RolloutConfig,
    rng: &mut R,
) -> Result<EpisodeRecord, SearchError> {
    let search = SearchConfig {
        simulations: config.simulations,
        c_alpha: config.exploration,
        ..SearchConfig::default()
    };
    let mut evaluator = RolloutEvaluator::new(rng);
    fold_with(sequence, &mut evaluator, &search, None::<&mut R>)
}

/// Why an engine produced no contact count for a sequence.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub enum CellError {
    Skipped(String),
    Failed(String),
}

pub type EngineFn<'a> = Box<dyn FnMut(&HpSequence) -> Result<u32, CellError> + 'a>;

pub struct Engine<'a> {
    pub name: String,
    pub fold: EngineFn<'a>,
}

impl<'a> Engine<'a> {
    pub fn new(
        name: impl Into<String>,
        fold: impl FnMut(&HpSequence) -> Result<u32, CellError> + 'a,
    ) -> Self {
        Self {
            name: name.into(),
            fold: Box::new(fold),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ComparisonRow {
    pub id: String,
    pub length: usize,
    pub upper_bound: u32,
    pub contact_limit: u32,
    pub cells: Vec<Result<u32, CellError>>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ComparisonTable {
    pub engines: Vec<String>,
    pub rows: Vec<ComparisonRow>,
}

impl ComparisonTable {
    /// Summed contacts per engine over the cells that produced a value.
    pub fn totals(&self) -> Vec<u32> {
        (0..self.engines.len())
            .map(|e| {
                self.rows
                    .iter()
                    .filter_map(|r| r.cells[e].as_ref().ok())
                    .sum()
            })
            .collect()
    }

    /// Cells whose contact count exceeds what any fold of the row's sequence
    /// can reach.
    pub fn bound_violations(&self) -> Vec<(String, String, u32)> {
        let mut out = Vec::new();
        for row in &self.rows {
            for (name, cell) in self.engines.iter().zip(&row.cells) {
                if let Ok(c) = cell {
                    if *c > row.contact_limit {
                        out.push((row.id.clone(), name.clone(), *c));
                    }
                }
            }
        }
        out
    }

    /// Tab-separated text: a header, one row per sequence with contacts and
    /// energy per engine, and a totals row.
    pub fn to_tsv(&self) -> String {
        let mut out = String::from("id\tlength\tupper_bound");
        for name in &self.engines {
            let _ = write!(out, "\t{name}_contacts\t{name}_energy");
        }
        out.push('\n');
        for row in &self.rows {
            let _ = write!(out, "{}\t{}\t{}", row.id, row.length, row.upper_bound);
            for cell in &row.cells {
                match cell {
                    Ok(c) => {
                        let _ = write!(out, "\t{}\t{}", c, -(*c as i64));
                    }
                    Err(CellError::Skipped(why)) => {
                        let _ = write!(out, "\tskipped ({why})\t-");
                    }
                    Err(CellError::Failed(why)) => {
                        let _ = write!(out, "\tfailed ({why})\t-");
                    }
                }
            }
            out.push('\n');
        }
        out.push_str("total\t-\t");
        let _ = write!(out, "{}", self.rows.iter().map(|r| r.upper_bound).sum::<u32>());
        for total in self.totals() {
            let _ = write!(out, "\t{}\t{}", total, -(total as i64));
        }
        out.push('\n');
        out
    }
}

/// Runs every engine on every sequence. A failing cell is recorded and the
/// comparison carries on.
pub fn compare_engines(sequences: &[(String, HpSequence)], engines: &mut [Engine<'_>]) -> ComparisonTable {
    let rows = sequences
        .iter()
        .map(|(id, seq)| ComparisonRow {
            id: id.clone(),
            length: seq.len(),
            upper_bound: seq.upper_bound(),
            contact_limit: seq.contact_limit(),
            cells: engines.iter_mut().map(|e| (e.fold)(seq)).collect(),
        })
        .collect();
    ComparisonTable {
        engines: engines.iter().map(|e| e.name.clone()).collect(),
        rows,
    }
}
