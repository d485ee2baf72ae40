mod common;

use common::{all_complete_folds, contacts_by_definition, random_sequence};
use hpfold::eval::{EvalError, LeafEvaluator, PolicyValue, UniformEvaluator};
use hpfold::hp::{FoldState, RelativeMove, Status};
use hpfold::ruct::{run_search, SearchConfig, SearchTree};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Random priors and values, seeded per call sequence.
struct NoisyStub {
    rng: ChaCha8Rng,
    calls: u64,
}

impl LeafEvaluator for NoisyStub {
    fn evaluate_leaf(&mut self, _state: &FoldState) -> Result<PolicyValue, EvalError> {
        self.calls += 1;
        let raw: [f64; 3] = [self.rng.random(), self.rng.random(), self.rng.random()];
        let s: f64 = raw.iter().sum();
        Ok(PolicyValue {
            policy: raw.map(|p| p / s),
            value: self.rng.random_range(0.0..6.0),
        })
    }
}

fn check_accounting(tree: &SearchTree, simulations: u32) {
    let root: u32 = tree.root_edges().iter().map(|(_, e)| e.visits).sum();
    assert_eq!(root, simulations);
    for e in tree.all_edges() {
        let expected = if e.visits == 0 { 0.0 } else { e.mean * f64::from(e.visits) };
        assert!((e.total - expected).abs() <= 1e-9 * e.total.abs().max(1.0), "{e:?}");
        assert!(e.mean >= 0.0);
    }
}

#[test]
fn visit_accounting_after_any_search() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for case in 0..60 {
        let len = rng.random_range(4..=24);
        let seq = random_sequence(&mut rng, len);
        let sims = rng.random_range(1..=400);
        let config = SearchConfig::with_simulations(sims);
        let mut tree = SearchTree::new(FoldState::new(seq));
        let mut eval = NoisyStub {
            rng: ChaCha8Rng::seed_from_u64(case),
            calls: 0,
        };
        let mut noise = ChaCha8Rng::seed_from_u64(case + 1000);
        // walk a few decisions so reused roots are covered too
        while tree.root_state().status() == Status::Ongoing {
            let policy = tree.search(&mut eval, &config, Some(&mut noise)).unwrap();
            check_accounting(&tree, sims);
            assert!((policy.sum() - 1.0).abs() < 1e-9);
            // noisy priors stay a distribution over the legal moves
            let priors: Vec<f64> = tree.root_edges().iter().map(|(_, e)| e.prior).collect();
            assert!(priors.iter().all(|&p| p >= 0.0));
            assert!((priors.iter().sum::<f64>() - 1.0).abs() < 1e-9);
            for (mv, e) in tree.root_edges() {
                assert!(tree.root_state().is_legal(mv));
                assert!(e.mean <= f64::from(tree.r_upper()).max(6.0));
            }
            tree.advance(policy.choose_move()).unwrap();
        }
    }
}

#[test]
fn search_is_deterministic_without_noise() {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    for _ in 0..10 {
        let seq = random_sequence(&mut rng, 16);
        let root = FoldState::new(seq);
        let config = SearchConfig::with_simulations(500);
        let run = |seed| {
            let mut eval = NoisyStub {
                rng: ChaCha8Rng::seed_from_u64(seed),
                calls: 0,
            };
            run_search(&root, &mut eval, &config, None::<&mut ChaCha8Rng>).unwrap()
        };
        assert_eq!(run(4).probabilities.map(f64::to_bits), run(4).probabilities.map(f64::to_bits));
    }
}

/// Best contact count reachable from the opening when the first decision is
/// `mv`.
fn best_after(seq: &hpfold::hp::HpSequence, mv: RelativeMove) -> Option<u32> {
    let start = FoldState::new(seq.clone());
    let target = start.apply_move(mv).ok()?.head();
    all_complete_folds(seq)
        .iter()
        .filter(|c| c[2] == target)
        .map(|c| contacts_by_definition(seq, c))
        .max()
}

#[test]
fn long_searches_pick_an_optimal_first_move() {
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    let mut checked = 0;
    while checked < 25 {
        let len = rng.random_range(4..=8);
        let seq = random_sequence(&mut rng, len);
        let best: Vec<Option<u32>> = RelativeMove::ALL.iter().map(|&m| best_after(&seq, m)).collect();
        let optimum = best.iter().flatten().max().copied().unwrap_or(0);
        if optimum == 0 {
            continue;
        }
        let config = SearchConfig::with_simulations(20_000);
        let mut eval = &UniformEvaluator::default();
        let policy = run_search(&FoldState::new(seq.clone()), &mut eval, &config, None::<&mut ChaCha8Rng>).unwrap();
        let chosen = policy.choose_move();
        assert_eq!(best[chosen.index()], Some(optimum), "{seq}: chose {chosen:?}, {:?}", policy);
        checked += 1;
    }
}

#[test]
fn reused_subtree_is_not_re_evaluated() {
    let seq = hpfold::hp::parse_hp_string("hphpphhphpphph").unwrap();
    let mut tree = SearchTree::new(FoldState::new(seq));
    let mut eval = NoisyStub {
        rng: ChaCha8Rng::seed_from_u64(0),
        calls: 0,
    };
    let config = SearchConfig::with_simulations(300);
    let policy = tree.search(&mut eval, &config, None::<&mut ChaCha8Rng>).unwrap();
    let mv = policy.choose_move();
    let kept = tree.root_edges().iter().find(|(m, _)| *m == mv).unwrap().1.visits;
    tree.advance(mv).unwrap();
    // the visit that expanded the new root belongs to no edge below it
    assert_eq!(tree.root_visits(), kept - 1);
    let before = eval.calls;
    // a budget already met by the retained visits costs no evaluations
    tree.search(&mut eval, &SearchConfig::with_simulations(kept - 1), None::<&mut ChaCha8Rng>)
        .unwrap();
    assert_eq!(eval.calls, before);
}
