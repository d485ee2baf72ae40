mod common;

use common::{check_invariants, random_fold_on, random_sequence};
use hpfold::encode::{encode_state, encode_walk, Channel, GridGeometry, FRAMES, PLANES};
use hpfold::hp::{FoldState, Status};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[test]
fn random_episodes_respect_encoding_invariants() {
    let grid = 41;
    let radius = GridGeometry::new(grid).unwrap().radius();
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    let mut decisions = 0;
    for _ in 0..1000 {
        let len = rng.random_range(3..=20);
        let seq = random_sequence(&mut rng, len);
        let end = random_fold_on(&mut rng, seq.clone(), radius);
        assert!(end.placed().iter().all(|c| c.x.unsigned_abs() <= radius && c.y.unsigned_abs() <= radius));
        let moves = end.moves();
        let mut state = FoldState::with_radius(std::sync::Arc::new(seq), radius);
        for (k, &mv) in moves.iter().enumerate() {
            let stack = encode_walk(&state, grid).unwrap();
            check_invariants(&stack, &state, grid);
            // explicit history gives the same volume
            let history: Vec<FoldState> = (0..FRAMES)
                .filter(|f| k >= *f)
                .map(|f| FoldState::from_moves(state.sequence().clone(), &moves[..k - f]).unwrap())
                .collect();
            assert_eq!(encode_state(&history, grid).unwrap(), stack);
            state.push_move(mv).unwrap();
            decisions += 1;
        }
        assert_ne!(state.status(), Status::Ongoing);
    }
    assert!(decisions > 5000);
}

#[test]
fn opening_sits_at_the_grid_centre() {
    let state = FoldState::new(hpfold::hp::parse_hp_string("hph").unwrap());
    let stack = encode_walk(&state, 9).unwrap();
    let acts = stack.decode_frame(1).unwrap();
    let at = |row, col| acts.iter().find(|a| a.row == row && a.col == col).map(|a| a.channel);
    assert_eq!(acts.len(), 3);
    assert_eq!(at(4, 4), Some(Channel::H));
    assert_eq!(at(5, 4), Some(Channel::Connect));
    assert_eq!(at(6, 4), Some(Channel::P));
    assert_eq!(stack.plane_sum(PLANES - 1), 81);
}
