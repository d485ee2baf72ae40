//! The 2D HP lattice world: sequences, relative moves, self-avoiding walk
//! states and H-H contact scoring.

mod fold;
mod record;
mod sequence;

use thiserror::Error;

pub use fold::{
    hh_contacts, moves_from_coords, moves_to_string, parse_moves, ContactScore, Coord, FoldState,
    Heading, RelativeMove, Status,
};
pub use record::FoldRecord;
pub use sequence::{
    parse_hp_string, parse_sequence_file, translate_amino_acids, HpSequence, Residue,
    HYDROPHOBIC_AMINO_ACIDS,
};

#[derive(Debug, Error)]
pub enum HpError {
    #[error("invalid character {ch:?} at position {pos}")]
    InvalidCharacter { pos: usize, ch: char },
    #[error("unbalanced parentheses")]
    UnbalancedParens,
    #[error("empty group ending at position {pos}")]
    EmptyGroup { pos: usize },
    #[error("repeat count at position {pos} has nothing to repeat")]
    DanglingCount { pos: usize },
    #[error("invalid repeat count at position {pos}")]
    BadRepeat { pos: usize },
    #[error("sequence needs at least 2 residues, got {len}")]
    TooShort { len: usize },
    #[error("unknown amino acid {ch:?} at position {pos}")]
    UnknownAminoAcid { pos: usize, ch: char },
    #[error("line {line}: {source}")]
    Line {
        line: usize,
        #[source]
        source: Box<HpError>,
    },
    #[error("illegal move {mv}: {reason}")]
    IllegalMove { mv: RelativeMove, reason: &'static str },
    #[error("invalid move character {ch:?} at position {pos}")]
    BadMove { pos: usize, ch: char },
    #[error("walk must start at (0,0) then (0,1)")]
    BadOpening,
    #[error("coordinate {index} is not a forward/left/right step from its predecessor")]
    NotAdjacent { index: usize },
    #[error("{coords} coordinates for a sequence of length {len}")]
    TooManyCoords { coords: usize, len: usize },
    #[error("fold record: {0}")]
    Record(String),
}
