mod common;

use common::random_sequence;
use hpfold::hp::{FoldState, HpSequence, Residue};
use hpfold::oracle::{oracle_solve, oracle_solve_with, OracleError, OracleOptions};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[test]
fn pruning_never_changes_the_optimum() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut pruned_nodes = 0;
    let mut full_nodes = 0;
    for _ in 0..200 {
        let len = rng.random_range(2..=10);
        let seq = random_sequence(&mut rng, len);
        let full = oracle_solve_with(&seq, &OracleOptions::exhaustive(16)).unwrap();
        let pruned = oracle_solve_with(&seq, &OracleOptions::default()).unwrap();
        assert_eq!(full.optimum, pruned.optimum, "{seq}");
        let replay = FoldState::from_moves(seq.clone(), &pruned.optimal_fold).unwrap();
        assert_eq!(replay.score().contacts, pruned.optimum);
        assert!(pruned.nodes <= full.nodes);
        pruned_nodes += pruned.nodes;
        full_nodes += full.nodes;
    }
    assert!(pruned_nodes * 4 < full_nodes * 3, "{pruned_nodes} vs {full_nodes}");
}

#[test]
fn pruning_without_early_stop_counts_every_optimum() {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    for _ in 0..50 {
        let seq = random_sequence(&mut rng, 9);
        let full = oracle_solve_with(&seq, &OracleOptions::exhaustive(16)).unwrap();
        let pruned = oracle_solve_with(
            &seq,
            &OracleOptions {
                stop_at_upper_bound: false,
                ..OracleOptions::default()
            },
        )
        .unwrap();
        assert_eq!(pruned.count_optimal, full.count_optimal, "{seq}");
    }
}

#[test]
fn reversal_preserves_the_optimum() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for _ in 0..100 {
        let len = rng.random_range(3..=12);
        let seq = random_sequence(&mut rng, len);
        let a = oracle_solve(&seq, 16).unwrap().optimum;
        let b = oracle_solve(&seq.reversed(), 16).unwrap().optimum;
        assert_eq!(a, b, "{seq}");
    }
}

#[test]
fn known_optima() {
    // a 2x4 block of eight H has ten lattice edges, seven of them bonds
    let cases = [("hhhhhhhh", 3), ("hpphpph", 2), ("hhhh", 1), ("hph", 0)];
    for (text, want) in cases {
        let seq: HpSequence = text.parse().unwrap();
        assert_eq!(oracle_solve(&seq, 16).unwrap().optimum, want, "{text}");
        assert_eq!(common::brute_force_optimum(&seq), want, "{text}");
    }
}

#[test]
fn h_chain_end_can_beat_the_parity_bound() {
    // residue 1 sits among residues 4, 6 and 8 on three sides
    let seq: HpSequence = "hpphphph".parse().unwrap();
    assert_eq!(seq.upper_bound(), 2);
    assert_eq!(common::brute_force_optimum(&seq), 3);
    let solved = oracle_solve(&seq, 16).unwrap();
    assert_eq!(solved.optimum, 3);
    let replay = FoldState::from_moves(seq, &solved.optimal_fold).unwrap();
    assert_eq!(replay.score().contacts, 3);
}

#[test]
fn length_guard_is_a_typed_refusal() {
    let seq = HpSequence::new(vec![Residue::H; 17]).unwrap();
    assert_eq!(
        oracle_solve(&seq, 16).unwrap_err(),
        OracleError::TooLong { len: 17, guard: 16 }
    );
    assert!(oracle_solve(&seq, 17).is_ok());
}

#[test]
fn twelve_residue_prefix_regression() {
    // optimum of the first twelve residues of the 20-residue benchmark,
    // frozen from exhaustive enumeration
    let seq: HpSequence = "hphpphhphpph".parse().unwrap();
    let exhaustive = oracle_solve_with(&seq, &OracleOptions::exhaustive(16)).unwrap();
    assert_eq!(exhaustive.optimum, common::brute_force_optimum(&seq));
    assert_eq!(oracle_solve(&seq, 16).unwrap().optimum, TWELVE_PREFIX_OPTIMUM);
}

const TWELVE_PREFIX_OPTIMUM: u32 = 5;
