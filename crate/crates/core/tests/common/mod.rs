#![allow(dead_code)]

use std::collections::HashSet;

use hpfold::encode::{Activation, Channel, GridGeometry, PlaneStack, FRAMES, PLANES};
use hpfold::hp::{Coord, FoldState, HpSequence, RelativeMove, Residue, Status};
use rand::seq::IndexedRandom;
use rand::Rng;

pub fn random_sequence(rng: &mut impl Rng, len: usize) -> HpSequence {
    let residues = (0..len)
        .map(|_| if rng.random_bool(0.5) { Residue::H } else { Residue::P })
        .collect();
    HpSequence::new(residues).unwrap()
}

/// Uniformly random legal moves until the walk completes or traps.
pub fn random_fold(rng: &mut impl Rng, seq: HpSequence) -> FoldState {
    let radius = seq.len() as u32;
    random_fold_on(rng, seq, radius)
}

/// Random walk confined to a board of the given radius.
pub fn random_fold_on(rng: &mut impl Rng, seq: HpSequence, radius: u32) -> FoldState {
    let mut state = FoldState::with_radius(std::sync::Arc::new(seq), radius);
    while state.status() == Status::Ongoing {
        let mv = *state.legal_moves().choose(rng).unwrap();
        state.push_move(mv).unwrap();
    }
    state
}

/// Every complete fold's coordinates, by plain recursion with no pruning.
pub fn all_complete_folds(seq: &HpSequence) -> Vec<Vec<Coord>> {
    fn walk(state: &FoldState, out: &mut Vec<Vec<Coord>>) {
        match state.status() {
            Status::Complete => out.push(state.placed().to_vec()),
            Status::Trapped => {}
            Status::Ongoing => {
                for mv in RelativeMove::ALL {
                    if let Ok(next) = state.apply_move(mv) {
                        walk(&next, out);
                    }
                }
            }
        }
    }
    let mut out = Vec::new();
    walk(&FoldState::new(seq.clone()), &mut out);
    out
}

/// Contact count of a fold computed directly from the definition: H pairs at
/// lattice distance 1 that are not chain neighbours.
pub fn contacts_by_definition(seq: &HpSequence, coords: &[Coord]) -> u32 {
    let mut n = 0;
    for i in 0..coords.len() {
        for j in i + 2..coords.len() {
            let d = (coords[i].x - coords[j].x).abs() + (coords[i].y - coords[j].y).abs();
            if d == 1 && seq.get(i) == Residue::H && seq.get(j) == Residue::H {
                n += 1;
            }
        }
    }
    n
}

/// Best contact count over all complete folds.
pub fn brute_force_optimum(seq: &HpSequence) -> u32 {
    all_complete_folds(seq)
        .iter()
        .map(|c| contacts_by_definition(seq, c))
        .max()
        .unwrap_or(0)
}

/// Checks one encoded decision state against the walk it came from.
pub fn check_invariants(stack: &PlaneStack, state: &FoldState, grid: usize) {
    let geometry = GridGeometry::new(grid).unwrap();
    let mut previous: Option<HashSet<(usize, usize, Channel)>> = None;
    for frame in 1..=FRAMES {
        let acts: Vec<Activation> = stack.decode_frame(frame).unwrap();
        // at most one channel is active per grid point within a frame
        let mut cells = HashSet::new();
        for a in &acts {
            assert!(cells.insert((a.row, a.col)), "two channels at {:?}", (a.row, a.col));
        }
        let len = state.step().saturating_sub(frame - 1);
        let count = |ch: Channel| acts.iter().filter(|a| a.channel == ch).count();
        if len < 2 {
            assert!(acts.is_empty(), "frame {frame} should be empty");
            continue;
        }
        let prefix = FoldState::from_moves(state.sequence().clone(), &state.moves()[..len - 2]).unwrap();
        let h = (0..len).filter(|&i| state.sequence().get(i).is_h()).count();
        assert_eq!(count(Channel::H), h);
        assert_eq!(count(Channel::P), len - h);
        // one connection per chain bond and one contact mark per H-H contact
        assert_eq!(count(Channel::Connect), len - 1);
        assert_eq!(count(Channel::Contact) as u32, prefix.score().contacts);
        // residues sit on even cells, bonds and contacts between them
        for a in &acts {
            let vertex = a.row % 2 == 0 && a.col % 2 == 0;
            assert_eq!(vertex, matches!(a.channel, Channel::H | Channel::P));
            if !vertex {
                assert_eq!((a.row + a.col) % 2, 1, "edge marks sit between two vertices");
            }
        }
        for (i, &c) in prefix.placed().iter().enumerate() {
            let (col, row) = geometry.vertex(c).unwrap();
            let want = if state.sequence().get(i).is_h() { Channel::H } else { Channel::P };
            assert!(acts.iter().any(|a| a.row == row && a.col == col && a.channel == want));
        }
        // an older frame shows a sub-walk of the newer one
        let set: HashSet<_> = acts.iter().map(|a| (a.row, a.col, a.channel)).collect();
        if let Some(newer) = &previous {
            assert!(set.is_subset(newer), "frame {frame} is not contained in frame {}", frame - 1);
        }
        previous = Some(set);
    }
    let next_h = state.next_residue().is_some_and(|r| r.is_h());
    assert_eq!(stack.plane_sum(PLANES - 1), if next_h { grid * grid } else { 0 });
}
