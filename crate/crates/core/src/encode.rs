//! Binary plane encoding of folding states for the network.
//!
//! The lattice is laid out on an `N x N` tensor grid with vertices and edges
//! interleaved: vertex `(x, y)` sits at `(col, row) = (2(x + c), 2(y + c))`
//! where `c` is the vertex offset that puts residue 1 in the centre.
//! Horizontal edges land on (odd, even) points, vertical edges on
//! (even, odd) points, and (odd, odd) points are always zero.
//!
//! A stack has 17 planes: four state frames of `[H, P, C, B]` (newest
//! first) followed by a constant plane that is all ones when the next
//! residue is H.

use std::fmt::Write as _;

use thiserror::Error;

use crate::hp::{Coord, FoldState, Residue};

pub const FRAMES: usize = 4;
pub const CHANNELS_PER_FRAME: usize = 4;
pub const PLANES: usize = FRAMES * CHANNELS_PER_FRAME + 1;
const NEXT_RESIDUE_PLANE: usize = PLANES - 1;

/// Tensor grid used when nothing else is configured.
pub const DEFAULT_GRID_SIZE: usize = 41;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum EncodeError {
    #[error("grid size {0} must be odd and at least 3")]
    BadGrid(usize),
    #[error("coordinate ({}, {}) does not fit a grid of size {grid}", .coord.x, .coord.y)]
    OutOfGrid { coord: Coord, grid: usize },
    #[error("history is empty")]
    EmptyHistory,
    #[error("history holds {0} states, at most 4 allowed")]
    HistoryTooLong(usize),
    #[error("history frame {0} is not a prefix of the newest state")]
    NotPrefix(usize),
    #[error("frame index {0} out of range 1..=4")]
    BadFrame(usize),
}

/// Per-frame channel of a grid point.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Channel {
    /// Vertex holding an H residue.
    H,
    /// Vertex holding a P residue.
    P,
    /// Chain bond between consecutive residues.
    Connect,
    /// H-H contact between non-consecutive residues.
    Contact,
}

impl Channel {
    const ALL: [Channel; 4] = [Channel::H, Channel::P, Channel::Connect, Channel::Contact];

    fn offset(self) -> usize {
        self as usize
    }
}

/// One activated grid point of a decoded frame.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Activation {
    pub row: usize,
    pub col: usize,
    pub channel: Channel,
}

/// Vertex offset and radius for a tensor grid size.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GridGeometry {
    pub grid: usize,
    offset: i32,
}

impl GridGeometry {
    pub fn new(grid: usize) -> Result<Self, EncodeError> {
        if grid < 3 || grid % 2 == 0 {
            return Err(EncodeError::BadGrid(grid));
        }
        let vertices = (grid + 1) / 2;
        Ok(Self {
            grid,
            offset: ((vertices - 1) / 2) as i32,
        })
    }

    /// Largest board radius (in lattice steps from residue 1) that fits.
    pub fn radius(&self) -> u32 {
        self.offset as u32
    }

    /// `(col, row)` of a lattice vertex.
    pub fn vertex(&self, c: Coord) -> Result<(usize, usize), EncodeError> {
        let vertices = ((self.grid + 1) / 2) as i32;
        let vx = c.x + self.offset;
        let vy = c.y + self.offset;
        if vx < 0 || vy < 0 || vx >= vertices || vy >= vertices {
            return Err(EncodeError::OutOfGrid {
                coord: c,
                grid: self.grid,
            });
        }
        Ok((2 * vx as usize, 2 * vy as usize))
    }

    fn edge(&self, a: Coord, b: Coord) -> Result<(usize, usize), EncodeError> {
        let (ca, ra) = self.vertex(a)?;
        let (cb, rb) = self.vertex(b)?;
        Ok(((ca + cb) / 2, (ra + rb) / 2))
    }
}

/// A bit-packed `17 x N x N` binary volume, stored plane-major.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct PlaneStack {
    grid: usize,
    bits: Vec<u64>,
}

impl PlaneStack {
    pub fn zeros(grid: usize) -> Self {
        Self {
            grid,
            bits: vec![0; (PLANES * grid * grid).div_ceil(64)],
        }
    }

    pub fn grid_size(&self) -> usize {
        self.grid
    }

    fn index(&self, plane: usize, row: usize, col: usize) -> usize {
        (plane * self.grid + row) * self.grid + col
    }

    pub fn get(&self, plane: usize, row: usize, col: usize) -> bool {
        let i = self.index(plane, row, col);
        self.bits[i / 64] & (1 << (i % 64)) != 0
    }

    fn set(&mut self, plane: usize, row: usize, col: usize) {
        let i = self.index(plane, row, col);
        self.bits[i / 64] |= 1 << (i % 64);
    }

    /// Number of set cells in one plane.
    pub fn plane_sum(&self, plane: usize) -> usize {
        let area = self.grid * self.grid;
        (0..area)
            .filter(|&k| self.get(plane, k / self.grid, k % self.grid))
            .count()
    }

    /// Writes the volume as 0/1 values into `out` (length `17 N^2`).
    pub fn write_dense<T: num_traits::Float>(&self, out: &mut [T]) {
        assert_eq!(out.len(), PLANES * self.grid * self.grid);
        for (i, slot) in out.iter_mut().enumerate() {
            *slot = if self.bits[i / 64] & (1 << (i % 64)) != 0 {
                T::one()
            } else {
                T::zero()
            };
        }
    }

    pub fn next_residue_is_h(&self) -> bool {
        self.get(NEXT_RESIDUE_PLANE, 0, 0)
    }

    /// Activated grid points of frame `frame` (1 = newest).
    pub fn decode_frame(&self, frame: usize) -> Result<Vec<Activation>, EncodeError> {
        if !(1..=FRAMES).contains(&frame) {
            return Err(EncodeError::BadFrame(frame));
        }
        let base = (frame - 1) * CHANNELS_PER_FRAME;
        let mut out = Vec::new();
        for row in 0..self.grid {
            for col in 0..self.grid {
                for channel in Channel::ALL {
                    if self.get(base + channel.offset(), row, col) {
                        out.push(Activation { row, col, channel });
                    }
                }
            }
        }
        Ok(out)
    }

    /// Text raster of every frame, top row first.
    pub fn debug_dump(&self) -> String {
        let mut out = String::new();
        let next = if self.next_residue_is_h() { 'H' } else { 'P' };
        let _ = writeln!(out, "grid {} next {}", self.grid, next);
        for frame in 0..FRAMES {
            let _ = writeln!(out, "frame {}", frame + 1);
            let base = frame * CHANNELS_PER_FRAME;
            for row in (0..self.grid).rev() {
                for col in 0..self.grid {
                    let ch = Channel::ALL
                        .into_iter()
                        .find(|c| self.get(base + c.offset(), row, col))
                        .map_or('.', |c| match c {
                            Channel::H => 'H',
                            Channel::P => 'P',
                            Channel::Connect => 'c',
                            Channel::Contact => 'b',
                        });
                    out.push(ch);
                }
                out.push('\n');
            }
        }
        out
    }

    fn encode_frame(
        &mut self,
        geometry: &GridGeometry,
        state: &FoldState,
        len: usize,
        frame: usize,
    ) -> Result<(), EncodeError> {
        let base = frame * CHANNELS_PER_FRAME;
        let coords = &state.placed()[..len];
        let seq = state.sequence();
        for (i, &c) in coords.iter().enumerate() {
            let (col, row) = geometry.vertex(c)?;
            let channel = match seq.get(i) {
                Residue::H => Channel::H,
                Residue::P => Channel::P,
            };
            self.set(base + channel.offset(), row, col);
            if i > 0 {
                let (col, row) = geometry.edge(coords[i - 1], c)?;
                self.set(base + Channel::Connect.offset(), row, col);
            }
        }
        for i in 0..len {
            if !seq.get(i).is_h() {
                continue;
            }
            for j in (i + 2)..len {
                if seq.get(j).is_h() && coords[i].manhattan(coords[j]) == 1 {
                    let (col, row) = geometry.edge(coords[i], coords[j])?;
                    self.set(base + Channel::Contact.offset(), row, col);
                }
            }
        }
        Ok(())
    }

    fn fill_next_residue(&mut self, state: &FoldState) {
        if state.next_residue() == Some(Residue::H) {
            for row in 0..self.grid {
                for col in 0..self.grid {
                    self.set(NEXT_RESIDUE_PLANE, row, col);
                }
            }
        }
    }
}

/// Encodes an explicit history, newest state first. Every older state must
/// be a prefix of the newest one. Missing frames stay zero.
pub fn encode_state(history: &[FoldState], grid: usize) -> Result<PlaneStack, EncodeError> {
    let geometry = GridGeometry::new(grid)?;
    let newest = history.first().ok_or(EncodeError::EmptyHistory)?;
    if history.len() > FRAMES {
        return Err(EncodeError::HistoryTooLong(history.len()));
    }
    let mut stack = PlaneStack::zeros(grid);
    for (frame, state) in history.iter().enumerate() {
        let len = state.step();
        if state.sequence() != newest.sequence()
            || len > newest.step()
            || state.placed() != &newest.placed()[..len]
        {
            return Err(EncodeError::NotPrefix(frame + 1));
        }
        stack.encode_frame(&geometry, newest, len, frame)?;
    }
    stack.fill_next_residue(newest);
    Ok(stack)
}

/// Encodes a state with its own walk prefixes as history: frame `k` shows
/// the walk `k` moves ago, as long as that still covers the two-residue
/// opening.
pub fn encode_walk(state: &FoldState, grid: usize) -> Result<PlaneStack, EncodeError> {
    let geometry = GridGeometry::new(grid)?;
    let mut stack = PlaneStack::zeros(grid);
    for frame in 0..FRAMES {
        let Some(len) = state.step().checked_sub(frame).filter(|&l| l >= 2) else {
            break;
        };
        stack.encode_frame(&geometry, state, len, frame)?;
    }
    stack.fill_next_residue(state);
    Ok(stack)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hp::{parse_hp_string, RelativeMove::*};

    fn state(seq: &str, moves: &[crate::hp::RelativeMove]) -> FoldState {
        FoldState::from_moves(parse_hp_string(seq).unwrap(), moves).unwrap()
    }

    #[test]
    fn opening_frame() {
        let s = state("hppp", &[]);
        let stack = encode_walk(&s, 9).unwrap();
        let f1 = stack.decode_frame(1).unwrap();
        assert_eq!(f1.iter().filter(|a| matches!(a.channel, Channel::H | Channel::P)).count(), 2);
        assert_eq!(f1.iter().filter(|a| a.channel == Channel::Connect).count(), 1);
        for k in 2..=4 {
            assert!(stack.decode_frame(k).unwrap().is_empty());
        }
        // next residue is P
        assert_eq!(stack.plane_sum(NEXT_RESIDUE_PLANE), 0);
    }

    #[test]
    fn next_residue_plane_is_constant() {
        let s = state("hhhh", &[]);
        let stack = encode_walk(&s, 9).unwrap();
        assert_eq!(stack.plane_sum(NEXT_RESIDUE_PLANE), 81);
        assert!(stack.next_residue_is_h());
    }

    #[test]
    fn unit_square_contact_edge() {
        let s = state("hhhh", &[Left, Left]);
        let geometry = GridGeometry::new(9).unwrap();
        let stack = encode_walk(&s, 9).unwrap();
        let contacts: Vec<_> = stack
            .decode_frame(1)
            .unwrap()
            .into_iter()
            .filter(|a| a.channel == Channel::Contact)
            .collect();
        assert_eq!(contacts.len(), 1);
        // between residue 1 at (0,0) and residue 4 at (-1,0)
        let (c1, r1) = geometry.vertex(Coord::new(0, 0)).unwrap();
        let (c4, r4) = geometry.vertex(Coord::new(-1, 0)).unwrap();
        assert_eq!((contacts[0].col, contacts[0].row), ((c1 + c4) / 2, (r1 + r4) / 2));
        // older frames have fewer residues
        assert_eq!(stack.decode_frame(2).unwrap().len(), 3 + 2);
        assert_eq!(stack.decode_frame(3).unwrap().len(), 2 + 1);
        assert!(stack.decode_frame(4).unwrap().is_empty());
    }

    #[test]
    fn explicit_history_matches_walk_history() {
        let seq = parse_hp_string("hpphhph").unwrap();
        let s0 = FoldState::new(seq);
        let s1 = s0.apply_move(Left).unwrap();
        let s2 = s1.apply_move(Left).unwrap();
        let s3 = s2.apply_move(Right).unwrap();
        let via_history = encode_state(&[s3.clone(), s2.clone(), s1, s0], 11).unwrap();
        assert_eq!(via_history, encode_walk(&s3, 11).unwrap());
        assert_eq!(
            encode_state(&[s2, s3], 11).unwrap_err(),
            EncodeError::NotPrefix(2)
        );
    }

    #[test]
    fn errors() {
        let s = state("pppppppp", &[Forward, Forward, Forward]);
        // head at (0,4), radius of a 9-grid is 2
        assert!(matches!(encode_walk(&s, 9), Err(EncodeError::OutOfGrid { .. })));
        assert_eq!(encode_walk(&s, 8).unwrap_err(), EncodeError::BadGrid(8));
        assert_eq!(encode_state(&[], 9).unwrap_err(), EncodeError::EmptyHistory);
        let stack = PlaneStack::zeros(9);
        assert_eq!(stack.decode_frame(0).unwrap_err(), EncodeError::BadFrame(0));
        assert_eq!(stack.decode_frame(5).unwrap_err(), EncodeError::BadFrame(5));
        assert!(stack.decode_frame(1).unwrap().is_empty());
    }

    #[test]
    fn geometry_radius() {
        assert_eq!(GridGeometry::new(41).unwrap().radius(), 10);
        assert_eq!(GridGeometry::new(9).unwrap().radius(), 2);
    }

    #[test]
    fn dump_is_readable() {
        let s = state("hhhh", &[Left, Left]);
        let dump = encode_walk(&s, 5).unwrap().debug_dump();
        assert!(dump.starts_with("grid"));
        assert!(dump.contains('b'));
    }
}
