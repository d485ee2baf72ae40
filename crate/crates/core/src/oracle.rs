//! Exact optimum by depth-first enumeration of self-avoiding walks from the
//! fixed opening, with an admissible contact bound.

use thiserror::Error;

use crate::hp::{Coord, Heading, HpSequence, RelativeMove};

pub const DEFAULT_LENGTH_GUARD: usize = 16;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum OracleError {
    #[error(
        "sequence length {len} exceeds the exact-solver guard of {guard}; use the search engine"
    )]
    TooLong { len: usize, guard: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct OracleOptions {
    pub max_length: usize,
    /// Cut branches whose optimistic contact bound falls below the best fold.
    pub prune: bool,
    /// Stop as soon as a fold reaches the sequence's contact limit.
    pub stop_at_upper_bound: bool,
}

impl Default for OracleOptions {
    fn default() -> Self {
        Self {
            max_length: DEFAULT_LENGTH_GUARD,
            prune: true,
            stop_at_upper_bound: true,
        }
    }
}

impl OracleOptions {
    /// Plain enumeration of every walk.
    pub fn exhaustive(max_length: usize) -> Self {
        Self {
            max_length,
            prune: false,
            stop_at_upper_bound: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OracleResult {
    pub optimum: u32,
    /// Moves after the opening of the first optimal fold in `F, L, R` order.
    pub optimal_fold: Vec<RelativeMove>,
    /// Number of optimal folds. `None` when the search stopped early at the
    /// upper bound and so did not see them all.
    pub count_optimal: Option<u64>,
    /// Search nodes entered.
    pub nodes: u64,
}

pub fn oracle_solve(sequence: &HpSequence, max_length_guard: usize) -> Result<OracleResult, OracleError> {
    oracle_solve_with(
        sequence,
        &OracleOptions {
            max_length: max_length_guard,
            ..OracleOptions::default()
        },
    )
}

pub fn oracle_solve_with(
    sequence: &HpSequence,
    options: &OracleOptions,
) -> Result<OracleResult, OracleError> {
    let n = sequence.len();
    if n > options.max_length {
        return Err(OracleError::TooLong {
            len: n,
            guard: options.max_length,
        });
    }
    let is_h: Vec<bool> = sequence.residues().iter().map(|r| r.is_h()).collect();
    // most contacts residues t.. can still add to a complete fold
    let mut future = vec![0u32; n + 1];
    for i in (0..n).rev() {
        let gain = match (is_h[i], i + 1 == n) {
            (false, _) => 0,
            (true, false) => 2,
            (true, true) => 3,
        };
        future[i] = future[i + 1] + gain;
    }
    let radius = n as i32;
    let side = (2 * radius + 1) as usize;
    let mut search = Dfs {
        is_h,
        future,
        side,
        radius,
        cells: vec![u16::MAX; side * side],
        coords: Vec::with_capacity(n),
        moves: Vec::with_capacity(n),
        options: *options,
        upper: sequence.contact_limit(),
        best: None,
        count: 0,
        nodes: 0,
        stopped: false,
    };
    search.place(Coord::ORIGIN);
    search.place(Coord::new(0, 1));
    search.descend(Heading::North, 0);
    let (optimum, optimal_fold) = search.best.expect("a straight walk always completes");
    Ok(OracleResult {
        optimum,
        optimal_fold,
        count_optimal: (!search.stopped).then_some(search.count),
        nodes: search.nodes,
    })
}

struct Dfs {
    is_h: Vec<bool>,
    future: Vec<u32>,
    side: usize,
    radius: i32,
    cells: Vec<u16>,
    coords: Vec<Coord>,
    moves: Vec<RelativeMove>,
    options: OracleOptions,
    upper: u32,
    best: Option<(u32, Vec<RelativeMove>)>,
    count: u64,
    nodes: u64,
    stopped: bool,
}

impl Dfs {
    fn slot(&self, c: Coord) -> usize {
        (c.y + self.radius) as usize * self.side + (c.x + self.radius) as usize
    }

    fn place(&mut self, c: Coord) {
        let slot = self.slot(c);
        self.cells[slot] = self.coords.len() as u16;
        self.coords.push(c);
    }

    fn unplace(&mut self) {
        let c = self.coords.pop().expect("placed");
        let slot = self.slot(c);
        self.cells[slot] = u16::MAX;
    }

    fn gain(&self, target: Coord) -> u32 {
        let index = self.coords.len();
        if !self.is_h[index] {
            return 0;
        }
        target
            .neighbors()
            .into_iter()
            .filter(|&nb| {
                let j = self.cells[self.slot(nb)];
                j != u16::MAX && (j as usize) + 1 < index && self.is_h[j as usize]
            })
            .count() as u32
    }

    fn descend(&mut self, heading: Heading, contacts: u32) {
        self.nodes += 1;
        let t = self.coords.len();
        if t == self.is_h.len() {
            self.record(contacts);
            return;
        }
        if self.options.prune {
            if let Some((best, _)) = &self.best {
                if contacts + self.future[t] < *best {
                    return;
                }
            }
        }
        let head = *self.coords.last().expect("opening placed");
        for mv in RelativeMove::ALL {
            if self.stopped {
                return;
            }
            let next = heading.turn(mv);
            let target = head.step(next);
            if self.cells[self.slot(target)] != u16::MAX {
                continue;
            }
            let gained = self.gain(target);
            self.place(target);
            self.moves.push(mv);
            self.descend(next, contacts + gained);
            self.moves.pop();
            self.unplace();
        }
    }

    fn record(&mut self, contacts: u32) {
        match &self.best {
            Some((best, _)) if contacts < *best => {}
            Some((best, _)) if contacts == *best => self.count += 1,
            _ => {
                self.best = Some((contacts, self.moves.clone()));
                self.count = 1;
            }
        }
        if self.options.stop_at_upper_bound && contacts >= self.upper {
            self.stopped = true;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hp::{parse_hp_string, FoldState};

    fn seq(s: &str) -> HpSequence {
        parse_hp_string(s).unwrap()
    }

    #[test]
    fn hhhh_optimum() {
        let r = oracle_solve_with(&seq("hhhh"), &OracleOptions::exhaustive(16)).unwrap();
        assert_eq!(r.optimum, 1);
        // the two unit squares: L,L and R,R
        assert_eq!(r.count_optimal, Some(2));
        assert_eq!(r.optimal_fold, vec![RelativeMove::Left, RelativeMove::Left]);
    }

    #[test]
    fn all_p_is_zero() {
        let r = oracle_solve(&seq("pppppppp"), 16).unwrap();
        assert_eq!(r.optimum, 0);
    }

    #[test]
    fn minimal_sequence() {
        let r = oracle_solve(&seq("hh"), 16).unwrap();
        assert_eq!(r.optimum, 0);
        assert!(r.optimal_fold.is_empty());
    }

    #[test]
    fn guard() {
        let long = seq(&"hp".repeat(15));
        assert_eq!(
            oracle_solve(&long, 16).unwrap_err(),
            OracleError::TooLong { len: 30, guard: 16 }
        );
    }

    #[test]
    fn witness_replays_to_optimum() {
        let s = seq("hphpphhphpph");
        let r = oracle_solve(&s, 16).unwrap();
        let state = FoldState::from_moves(s, &r.optimal_fold).unwrap();
        assert_eq!(state.score().contacts, r.optimum);
    }

    #[test]
    fn walk_count_without_pruning() {
        // every complete fold is counted when all contacts are zero: the number
        // of self-avoiding walks of n-1 steps divided by 4 (fixed first step)
        let known = [(3, 3), (4, 9), (5, 25), (6, 71), (7, 195)];
        for (n, walks) in known {
            let s = seq(&"p".repeat(n));
            let r = oracle_solve_with(&s, &OracleOptions::exhaustive(16)).unwrap();
            assert_eq!(r.count_optimal, Some(walks), "length {n}");
        }
    }
}
