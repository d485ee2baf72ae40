use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::{HpError, HpSequence};

/// A vertex of the square lattice. Residue 1 always sits at the origin.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Coord {
    pub x: i32,
    pub y: i32,
}

impl Coord {
    pub const ORIGIN: Coord = Coord { x: 0, y: 0 };

    pub const fn new(x: i32, y: i32) -> Self {
        Self { x, y }
    }

    pub fn step(self, heading: Heading) -> Coord {
        let (dx, dy) = heading.delta();
        Coord::new(self.x + dx, self.y + dy)
    }

    pub fn manhattan(self, other: Coord) -> u32 {
        self.x.abs_diff(other.x) + self.y.abs_diff(other.y)
    }

    pub fn neighbors(self) -> [Coord; 4] {
        Heading::ALL.map(|h| self.step(h))
    }
}

/// Absolute lattice direction. `North` is +y.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Heading {
    North,
    East,
    South,
    West,
}

impl Heading {
    pub const ALL: [Heading; 4] = [Heading::North, Heading::East, Heading::South, Heading::West];

    pub fn delta(self) -> (i32, i32) {
        match self {
            Heading::North => (0, 1),
            Heading::East => (1, 0),
            Heading::South => (0, -1),
            Heading::West => (-1, 0),
        }
    }

    fn index(self) -> usize {
        self as usize
    }

    pub fn turn(self, mv: RelativeMove) -> Heading {
        let i = self.index();
        Heading::ALL[match mv {
            RelativeMove::Forward => i,
            RelativeMove::Right => (i + 1) % 4,
            RelativeMove::Left => (i + 3) % 4,
        }]
    }

    pub fn between(from: Coord, to: Coord) -> Option<Heading> {
        let d = (to.x - from.x, to.y - from.y);
        Heading::ALL.into_iter().find(|h| h.delta() == d)
    }
}

/// A move relative to the current heading of the chain.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum RelativeMove {
    Forward,
    Left,
    Right,
}

impl RelativeMove {
    /// Fixed order used for tie-breaking and for the policy vector layout.
    pub const ALL: [RelativeMove; 3] = [RelativeMove::Forward, RelativeMove::Left, RelativeMove::Right];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_index(i: usize) -> Option<Self> {
        Self::ALL.get(i).copied()
    }

    pub fn as_char(self) -> char {
        match self {
            RelativeMove::Forward => 'F',
            RelativeMove::Left => 'L',
            RelativeMove::Right => 'R',
        }
    }

    pub fn from_char(ch: char) -> Option<Self> {
        match ch.to_ascii_uppercase() {
            'F' => Some(RelativeMove::Forward),
            'L' => Some(RelativeMove::Left),
            'R' => Some(RelativeMove::Right),
            _ => None,
        }
    }

    /// Relative move that turns `heading` into `next`, if one exists.
    pub fn between(heading: Heading, next: Heading) -> Option<Self> {
        Self::ALL.into_iter().find(|&mv| heading.turn(mv) == next)
    }
}

impl fmt::Display for RelativeMove {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.as_char())
    }
}

pub fn moves_to_string(moves: &[RelativeMove]) -> String {
    moves.iter().map(|m| m.as_char()).collect()
}

pub fn parse_moves(text: &str) -> Result<Vec<RelativeMove>, HpError> {
    text.chars()
        .enumerate()
        .map(|(pos, ch)| RelativeMove::from_char(ch).ok_or(HpError::BadMove { pos, ch }))
        .collect()
}

/// H-H contact count of a (possibly partial) fold. Energy is its negation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default, Serialize, Deserialize)]
pub struct ContactScore {
    pub contacts: u32,
}

impl ContactScore {
    pub fn energy(self) -> i32 {
        -(self.contacts as i32)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Complete,
    Trapped,
    Ongoing,
}

impl Status {
    pub fn is_terminal(self) -> bool {
        self != Status::Ongoing
    }
}

/// Occupied vertices of a square board `[-radius, radius]^2`, as a bitmap.
#[derive(Debug, Clone, PartialEq, Eq)]
struct Occupancy {
    radius: i32,
    side: usize,
    bits: Vec<u64>,
}

impl Occupancy {
    fn new(radius: u32) -> Self {
        let side = 2 * radius as usize + 1;
        Self {
            radius: radius as i32,
            side,
            bits: vec![0; (side * side).div_ceil(64)],
        }
    }

    fn slot(&self, c: Coord) -> Option<usize> {
        if c.x.abs() > self.radius || c.y.abs() > self.radius {
            return None;
        }
        let col = (c.x + self.radius) as usize;
        let row = (c.y + self.radius) as usize;
        Some(row * self.side + col)
    }

    fn contains(&self, c: Coord) -> bool {
        self.slot(c)
            .is_some_and(|i| self.bits[i / 64] & (1 << (i % 64)) != 0)
    }

    fn insert(&mut self, c: Coord) {
        let i = self.slot(c).expect("insert inside board");
        self.bits[i / 64] |= 1 << (i % 64);
    }
}

/// A partial self-avoiding walk of a sequence on the square lattice.
///
/// Residue 1 is placed at the origin and residue 2 directly north of it, so
/// every state starts with two residues and heading `North`. States are
/// values: [`FoldState::apply_move`] returns a new state.
#[derive(Debug, Clone)]
pub struct FoldState {
    sequence: Arc<HpSequence>,
    placed: Vec<Coord>,
    occupancy: Occupancy,
    heading: Heading,
    contacts: u32,
}

impl PartialEq for FoldState {
    fn eq(&self, other: &Self) -> bool {
        self.sequence == other.sequence && self.placed == other.placed
    }
}

impl Eq for FoldState {}

impl FoldState {
    /// Opening state on a board of radius `len(sequence)`, which no walk of
    /// the sequence can leave.
    pub fn new(sequence: HpSequence) -> Self {
        let radius = sequence.len() as u32;
        Self::with_radius(Arc::new(sequence), radius)
    }

    /// Opening state on a board of the given radius (at least 1).
    pub fn with_radius(sequence: Arc<HpSequence>, radius: u32) -> Self {
        let radius = radius.max(1);
        let mut occupancy = Occupancy::new(radius);
        let second = Coord::ORIGIN.step(Heading::North);
        occupancy.insert(Coord::ORIGIN);
        occupancy.insert(second);
        let mut placed = Vec::with_capacity(sequence.len());
        placed.push(Coord::ORIGIN);
        placed.push(second);
        Self {
            sequence,
            placed,
            occupancy,
            heading: Heading::North,
            contacts: 0,
        }
    }

    /// Replays a move list from the opening.
    pub fn from_moves(sequence: HpSequence, moves: &[RelativeMove]) -> Result<Self, HpError> {
        let mut state = Self::new(sequence);
        for &mv in moves {
            state.push_move(mv)?;
        }
        Ok(state)
    }

    /// Rebuilds a state from absolute coordinates, which must start with the
    /// deterministic opening.
    pub fn from_coords(sequence: HpSequence, coords: &[Coord]) -> Result<Self, HpError> {
        let moves = moves_from_coords(coords)?;
        if coords.len() > sequence.len() {
            return Err(HpError::TooManyCoords {
                coords: coords.len(),
                len: sequence.len(),
            });
        }
        Self::from_moves(sequence, &moves)
    }

    pub fn sequence(&self) -> &HpSequence {
        &self.sequence
    }

    pub fn shared_sequence(&self) -> &Arc<HpSequence> {
        &self.sequence
    }

    pub fn placed(&self) -> &[Coord] {
        &self.placed
    }

    pub fn head(&self) -> Coord {
        *self.placed.last().expect("opening places two residues")
    }

    pub fn heading(&self) -> Heading {
        self.heading
    }

    /// Number of residues placed so far.
    pub fn step(&self) -> usize {
        self.placed.len()
    }

    pub fn board_radius(&self) -> u32 {
        self.occupancy.radius as u32
    }

    pub fn is_occupied(&self, c: Coord) -> bool {
        self.occupancy.contains(c)
    }

    pub fn in_bounds(&self, c: Coord) -> bool {
        self.occupancy.slot(c).is_some()
    }

    /// The residue that the next move will place, if any remain.
    pub fn next_residue(&self) -> Option<super::Residue> {
        (self.step() < self.sequence.len()).then(|| self.sequence.get(self.step()))
    }

    pub fn remaining(&self) -> usize {
        self.sequence.len() - self.step()
    }

    fn target(&self, mv: RelativeMove) -> (Heading, Coord) {
        let heading = self.heading.turn(mv);
        (heading, self.head().step(heading))
    }

    fn check_move(&self, mv: RelativeMove) -> Result<(Heading, Coord), HpError> {
        if self.step() >= self.sequence.len() {
            return Err(HpError::IllegalMove {
                mv,
                reason: "fold is complete",
            });
        }
        let (heading, target) = self.target(mv);
        if !self.in_bounds(target) {
            return Err(HpError::IllegalMove {
                mv,
                reason: "target outside the board",
            });
        }
        if self.occupancy.contains(target) {
            return Err(HpError::IllegalMove {
                mv,
                reason: "target is occupied",
            });
        }
        Ok((heading, target))
    }

    pub fn is_legal(&self, mv: RelativeMove) -> bool {
        self.check_move(mv).is_ok()
    }

    /// Moves whose target is free and on the board, in `F, L, R` order.
    pub fn legal_moves(&self) -> Vec<RelativeMove> {
        if self.step() >= self.sequence.len() {
            return Vec::new();
        }
        RelativeMove::ALL
            .into_iter()
            .filter(|&mv| self.is_legal(mv))
            .collect()
    }

    /// Legality of each move as a mask in `F, L, R` order.
    pub fn legal_mask(&self) -> [bool; 3] {
        RelativeMove::ALL.map(|mv| self.is_legal(mv))
    }

    pub fn status(&self) -> Status {
        if self.step() == self.sequence.len() {
            Status::Complete
        } else if RelativeMove::ALL.iter().any(|&mv| self.is_legal(mv)) {
            Status::Ongoing
        } else {
            Status::Trapped
        }
    }

    pub fn apply_move(&self, mv: RelativeMove) -> Result<FoldState, HpError> {
        let mut next = self.clone();
        next.push_move(mv)?;
        Ok(next)
    }

    /// In-place variant of [`FoldState::apply_move`].
    pub fn push_move(&mut self, mv: RelativeMove) -> Result<(), HpError> {
        let (heading, target) = self.check_move(mv)?;
        let index = self.placed.len();
        if self.sequence.get(index).is_h() {
            let prev = self.head();
            for n in target.neighbors() {
                if n == prev || !self.occupancy.contains(n) {
                    continue;
                }
                // n is occupied and not the chain predecessor
                let j = self
                    .placed
                    .iter()
                    .position(|&c| c == n)
                    .expect("occupied cell is placed");
                if self.sequence.get(j).is_h() {
                    self.contacts += 1;
                }
            }
        }
        self.occupancy.insert(target);
        self.placed.push(target);
        self.heading = heading;
        Ok(())
    }

    /// Contact score among the placed residues.
    pub fn score(&self) -> ContactScore {
        ContactScore {
            contacts: self.contacts,
        }
    }

    /// Relative moves after the opening that reproduce this walk.
    pub fn moves(&self) -> Vec<RelativeMove> {
        moves_from_coords(&self.placed).expect("placed coords form a walk")
    }
}

/// Counts unordered pairs `(i, j)` with `|i - j| >= 2`, both H, at lattice
/// distance 1. Coordinates beyond the sequence length are ignored.
pub fn hh_contacts(sequence: &HpSequence, coords: &[Coord]) -> ContactScore {
    let n = coords.len().min(sequence.len());
    let mut contacts = 0;
    for i in 0..n {
        if !sequence.get(i).is_h() {
            continue;
        }
        for j in (i + 2)..n {
            if sequence.get(j).is_h() && coords[i].manhattan(coords[j]) == 1 {
                contacts += 1;
            }
        }
    }
    ContactScore { contacts }
}

/// Inverts the move encoding. The first two coordinates must be the opening.
pub fn moves_from_coords(coords: &[Coord]) -> Result<Vec<RelativeMove>, HpError> {
    if coords.len() < 2 || coords[0] != Coord::ORIGIN || coords[1] != Coord::new(0, 1) {
        return Err(HpError::BadOpening);
    }
    let mut heading = Heading::North;
    let mut moves = Vec::with_capacity(coords.len() - 2);
    for (i, pair) in coords.windows(2).enumerate().skip(1) {
        let next = Heading::between(pair[0], pair[1]).ok_or(HpError::NotAdjacent { index: i + 1 })?;
        let mv = RelativeMove::between(heading, next).ok_or(HpError::NotAdjacent { index: i + 1 })?;
        moves.push(mv);
        heading = next;
    }
    Ok(moves)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hp::parse_hp_string;
    use RelativeMove::*;

    fn seq(s: &str) -> HpSequence {
        parse_hp_string(s).unwrap()
    }

    #[test]
    fn opening_has_all_moves() {
        let s = FoldState::new(seq("hhhh"));
        assert_eq!(s.step(), 2);
        assert_eq!(s.legal_moves(), vec![Forward, Left, Right]);
        assert_eq!(s.status(), Status::Ongoing);
    }

    #[test]
    fn move_geometry() {
        let s = FoldState::new(seq("hhhh"));
        let f = s.apply_move(Forward).unwrap();
        assert_eq!(f.head(), Coord::new(0, 2));
        let l = s.apply_move(Left).unwrap();
        assert_eq!(l.head(), Coord::new(-1, 1));
        assert_eq!(l.heading(), Heading::West);
        let r = s.apply_move(Right).unwrap();
        assert_eq!(r.head(), Coord::new(1, 1));
        assert_eq!(r.heading(), Heading::East);
        // prior state untouched
        assert_eq!(s.step(), 2);
    }

    #[test]
    fn occupied_target_is_rejected() {
        // L, L brings the head next to the origin; another L would land on it
        let s = FoldState::from_moves(seq("hhhhh"), &[Left, Left]).unwrap();
        assert_eq!(s.head(), Coord::new(-1, 0));
        assert!(matches!(
            s.apply_move(Left),
            Err(HpError::IllegalMove { mv: Left, .. })
        ));
        // origin is on the head's left: only forward and right remain
        assert_eq!(s.legal_moves(), vec![Forward, Right]);
    }

    #[test]
    fn unit_square_contact() {
        let s = FoldState::from_moves(seq("hhhh"), &[Left, Left]).unwrap();
        assert_eq!(s.score().contacts, 1);
        assert_eq!(s.score().energy(), -1);
        assert_eq!(hh_contacts(s.sequence(), s.placed()).contacts, 1);
        assert_eq!(s.status(), Status::Complete);
        assert!(s.legal_moves().is_empty());
    }

    #[test]
    fn straight_pair_has_no_contacts() {
        let s = FoldState::new(seq("hh"));
        assert_eq!(s.score().contacts, 0);
        assert_eq!(s.status(), Status::Complete);
        let p = FoldState::from_moves(seq("pppp"), &[Left, Left]).unwrap();
        assert_eq!(p.score().contacts, 0);
    }

    #[test]
    fn trapped_spiral() {
        // walk curls around (-1, 0) and then steps into it
        let moves = [Left, Forward, Left, Forward, Left, Left];
        let s = FoldState::from_moves(seq("pppppppppppp"), &moves).unwrap();
        assert_eq!(s.head(), Coord::new(-1, 0));
        assert_eq!(s.step(), 8);
        assert!(s.legal_moves().is_empty());
        assert_eq!(s.status(), Status::Trapped);
    }

    #[test]
    fn coords_round_trip() {
        let moves = [Left, Forward, Right, Right, Forward, Left];
        let s = FoldState::from_moves(seq("hphphphp"), &moves).unwrap();
        assert_eq!(s.moves(), moves);
        let back = FoldState::from_coords(seq("hphphphp"), s.placed()).unwrap();
        assert_eq!(back, s);
    }

    #[test]
    fn bad_coords_are_rejected() {
        assert!(matches!(
            moves_from_coords(&[Coord::ORIGIN, Coord::new(1, 0)]),
            Err(HpError::BadOpening)
        ));
        let coords = [Coord::ORIGIN, Coord::new(0, 1), Coord::new(5, 5)];
        assert!(matches!(
            moves_from_coords(&coords),
            Err(HpError::NotAdjacent { index: 2 })
        ));
        // reversal is not a relative move
        let coords = [Coord::ORIGIN, Coord::new(0, 1), Coord::ORIGIN];
        assert!(moves_from_coords(&coords).is_err());
    }

    #[test]
    fn small_board_bounds() {
        let s = FoldState::with_radius(Arc::new(seq("hhhh")), 1);
        // head at (0,1) on a radius-1 board: forward leaves the board
        assert_eq!(s.legal_moves(), vec![Left, Right]);
        assert!(matches!(
            s.apply_move(Forward),
            Err(HpError::IllegalMove { reason: "target outside the board", .. })
        ));
    }

    #[test]
    fn complete_state_rejects_moves() {
        let s = FoldState::new(seq("hh"));
        assert!(s.apply_move(Forward).is_err());
        assert_eq!(s.next_residue(), None);
    }
}
