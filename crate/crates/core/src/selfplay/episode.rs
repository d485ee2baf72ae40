use std::sync::Arc;

use rand::Rng;
use serde::Serialize;

use crate::encode::{encode_walk, EncodeError, PlaneStack};
use crate::eval::LeafEvaluator;
use crate::hp::{ContactScore, FoldRecord, FoldState, HpError, HpSequence, RelativeMove, Status};
use crate::ruct::{SearchConfig, SearchError, SearchPolicy, SearchTrace, SearchTree};

/// One folded sequence with the search policy of every decision.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EpisodeRecord {
    pub sequence: HpSequence,
    /// Board radius the episode was folded on.
    pub board_radius: u32,
    pub moves: Vec<RelativeMove>,
    pub contacts: ContactScore,
    pub terminal: Status,
    pub policies: Vec<SearchPolicy>,
    pub traces: Vec<SearchTrace>,
}

impl EpisodeRecord {
    pub fn decisions(&self) -> usize {
        self.moves.len()
    }

    /// Replays the moves on the episode's board.
    pub fn replay(&self) -> Result<FoldState, HpError> {
        let mut state = FoldState::with_radius(Arc::new(self.sequence.clone()), self.board_radius);
        for &mv in &self.moves {
            state.push_move(mv)?;
        }
        Ok(state)
    }

    pub fn fold_record(&self) -> Result<FoldRecord, HpError> {
        let state = self.replay()?;
        let mut record = FoldRecord::from_state(&state);
        // trapped on a narrow board can be ongoing on the default board
        record.status = self.terminal;
        Ok(record)
    }
}

/// Training triple harvested from one decision.
#[derive(Debug, Clone, PartialEq)]
pub struct ReplaySample {
    pub input: PlaneStack,
    pub target_policy: SearchPolicy,
    pub reward: f64,
}

/// Folds a sequence residue by residue: the opening places two residues,
/// then each further residue gets its own search and the most visited move.
/// The tree is carried over between decisions. `noise` enables root
/// Dirichlet noise.
pub fn fold_with<E, R>(
    sequence: &HpSequence,
    evaluator: &mut E,
    config: &SearchConfig,
    mut noise: Option<&mut R>,
) -> Result<EpisodeRecord, SearchError>
where
    E: LeafEvaluator + ?Sized,
    R: Rng + ?Sized,
{
    let len = sequence.len() as u32;
    let board_radius = evaluator.board_radius().map_or(len, |r| r.min(len));
    let root = FoldState::with_radius(Arc::new(sequence.clone()), board_radius);
    let mut tree = SearchTree::new(root);
    let mut moves = Vec::new();
    let mut policies = Vec::new();
    let mut traces = Vec::new();
    while tree.root_state().status() == Status::Ongoing {
        let policy = tree.search(evaluator, config, noise.as_deref_mut())?;
        let mv = policy.choose_move();
        traces.push(tree.trace());
        policies.push(policy);
        moves.push(mv);
        tree.advance(mv)?;
    }
    let last = tree.root_state();
    Ok(EpisodeRecord {
        sequence: sequence.clone(),
        board_radius,
        moves,
        contacts: last.score(),
        terminal: last.status(),
        policies,
        traces,
    })
}

/// One sample per decision, each rewarded with the episode's final contact
/// count and encoded as seen at decision time.
pub fn harvest_samples(episode: &EpisodeRecord, grid: usize) -> Result<Vec<ReplaySample>, EncodeError> {
    let mut state = FoldState::with_radius(Arc::new(episode.sequence.clone()), episode.board_radius);
    let reward = f64::from(episode.contacts.contacts);
    let mut samples = Vec::with_capacity(episode.moves.len());
    for (&mv, policy) in episode.moves.iter().zip(&episode.policies) {
        samples.push(ReplaySample {
            input: encode_walk(&state, grid)?,
            target_policy: *policy,
            reward,
        });
        state.push_move(mv).expect("recorded moves replay");
    }
    Ok(samples)
}
