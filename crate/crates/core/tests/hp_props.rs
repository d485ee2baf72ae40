mod common;

use common::{all_complete_folds, brute_force_optimum, contacts_by_definition, random_fold, random_sequence};
use hpfold::hp::{
    hh_contacts, parse_hp_string, Coord, FoldRecord, FoldState, HpSequence, RelativeMove, Residue,
    Status,
};
use hpfold::oracle::{oracle_solve_with, OracleOptions};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn sequence_strategy(max: usize) -> impl Strategy<Value = HpSequence> {
    prop::collection::vec(any::<bool>(), 2..=max).prop_map(|bits| {
        HpSequence::new(bits.into_iter().map(|h| if h { Residue::H } else { Residue::P }).collect()).unwrap()
    })
}

/// Finds the shortest move list that traps a walk of the given sequence.
fn find_trap(seq: &HpSequence) -> Option<Vec<RelativeMove>> {
    fn dfs(state: &FoldState, best: &mut Option<Vec<RelativeMove>>) {
        match state.status() {
            Status::Trapped => {
                let moves = state.moves();
                if best.as_ref().is_none_or(|b| moves.len() < b.len()) {
                    *best = Some(moves);
                }
            }
            Status::Complete => {}
            Status::Ongoing => {
                for mv in RelativeMove::ALL {
                    if let Ok(next) = state.apply_move(mv) {
                        dfs(&next, best);
                    }
                }
            }
        }
    }
    let mut best = None;
    dfs(&FoldState::new(seq.clone()), &mut best);
    best
}

#[test]
fn shortest_trap_at_length_nine() {
    let seq = parse_hp_string("hpphpphph").unwrap();
    let moves = find_trap(&seq).expect("a length-9 walk can trap");
    let state = FoldState::from_moves(seq.clone(), &moves).unwrap();
    assert_eq!(state.status(), Status::Trapped);
    assert!(state.legal_moves().is_empty());
    // the tightest spiral traps the head once eight residues are placed
    assert_eq!(state.step(), 8);
    assert!(state.remaining() > 0);
    // a trapped fold scores its partial contacts
    assert_eq!(state.score().contacts, contacts_by_definition(&seq, state.placed()));
    assert!(state.apply_move(RelativeMove::Forward).is_err());
}

#[test]
fn incremental_contacts_match_definition_on_random_walks() {
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    for _ in 0..2000 {
        let len = 2 + (rand::Rng::random_range(&mut rng, 0..30));
        let seq = random_sequence(&mut rng, len);
        let state = random_fold(&mut rng, seq.clone());
        let expected = contacts_by_definition(&seq, state.placed());
        assert_eq!(state.score().contacts, expected);
        assert_eq!(hh_contacts(&seq, state.placed()).contacts, expected);
        assert!(expected <= seq.contact_limit());
    }
}

#[test]
fn oracle_equals_brute_force_up_to_length_twelve() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for len in 2..=12 {
        for _ in 0..4 {
            let seq = random_sequence(&mut rng, len);
            let oracle = oracle_solve_with(&seq, &OracleOptions::exhaustive(16)).unwrap();
            let folds = all_complete_folds(&seq);
            let best = brute_force_optimum(&seq);
            assert_eq!(oracle.optimum, best, "{seq}");
            let count = folds
                .iter()
                .filter(|c| contacts_by_definition(&seq, c) == best)
                .count() as u64;
            assert_eq!(oracle.count_optimal, Some(count), "{seq}");
        }
    }
}

/// The eight symmetries of the square lattice.
fn symmetries() -> [fn(Coord) -> Coord; 8] {
    [
        |c| Coord::new(c.x, c.y),
        |c| Coord::new(-c.y, c.x),
        |c| Coord::new(-c.x, -c.y),
        |c| Coord::new(c.y, -c.x),
        |c| Coord::new(-c.x, c.y),
        |c| Coord::new(c.x, -c.y),
        |c| Coord::new(c.y, c.x),
        |c| Coord::new(-c.y, -c.x),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn contact_limit_is_sound(seq in sequence_strategy(10)) {
        let oracle = oracle_solve_with(&seq, &OracleOptions::exhaustive(16)).unwrap();
        prop_assert!(oracle.optimum <= seq.contact_limit());
        if !seq.get(0).is_h() && !seq.get(seq.len() - 1).is_h() {
            prop_assert!(oracle.optimum <= seq.upper_bound());
        }
    }

    #[test]
    fn contacts_invariant_under_lattice_symmetry(seq in sequence_strategy(24), seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let state = random_fold(&mut rng, seq.clone());
        let base = state.score();
        for sym in symmetries() {
            let moved: Vec<Coord> = state.placed().iter().map(|&c| {
                let t = sym(c);
                Coord::new(t.x + 7, t.y - 3)
            }).collect();
            prop_assert_eq!(hh_contacts(&seq, &moved), base);
        }
    }

    #[test]
    fn record_round_trip(seq in sequence_strategy(30), seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let state = random_fold(&mut rng, seq);
        let record = FoldRecord::from_state(&state).with_id("x");
        let parsed = FoldRecord::parse_line(&record.to_line()).unwrap();
        prop_assert_eq!(&parsed, &record);
        let replayed = parsed.replay().unwrap();
        prop_assert_eq!(replayed.placed(), state.placed());
        let again = FoldState::from_coords(state.sequence().clone(), state.placed()).unwrap();
        prop_assert_eq!(again.moves(), state.moves());
    }

    #[test]
    fn reversal_keeps_bound_and_optimum(seq in sequence_strategy(10)) {
        let rev = seq.reversed();
        let a = oracle_solve_with(&seq, &OracleOptions::default()).unwrap().optimum;
        let b = oracle_solve_with(&rev, &OracleOptions::default()).unwrap().optimum;
        prop_assert_eq!(a, b);
        prop_assert_eq!(seq.upper_bound(), rev.upper_bound());
    }
}
