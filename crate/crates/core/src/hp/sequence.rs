use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::HpError;

/// Residue class in the HP model.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Residue {
    H,
    P,
}

impl Residue {
    pub fn is_h(self) -> bool {
        self == Residue::H
    }

    pub fn as_char(self) -> char {
        match self {
            Residue::H => 'H',
            Residue::P => 'P',
        }
    }
}

/// Hydrophobic amino acids (one-letter codes). Everything else among the 20
/// standard residues is polar.
pub const HYDROPHOBIC_AMINO_ACIDS: &str = "ACFILMVWY";

const STANDARD_AMINO_ACIDS: &str = "ACDEFGHIKLMNPQRSTVWY";

/// A validated HP string of length at least two.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct HpSequence {
    residues: Vec<Residue>,
}

impl HpSequence {
    pub fn new(residues: Vec<Residue>) -> Result<Self, HpError> {
        if residues.len() < 2 {
            return Err(HpError::TooShort { len: residues.len() });
        }
        Ok(Self { residues })
    }

    pub fn len(&self) -> usize {
        self.residues.len()
    }

    /// Always false; sequences hold at least two residues.
    pub fn is_empty(&self) -> bool {
        self.residues.is_empty()
    }

    /// Residue at a 0-based index.
    pub fn get(&self, index: usize) -> Residue {
        self.residues[index]
    }

    pub fn residues(&self) -> &[Residue] {
        &self.residues
    }

    pub fn h_count(&self) -> usize {
        self.residues.iter().filter(|r| r.is_h()).count()
    }

    /// H counts at odd and even 1-indexed positions.
    pub fn parity_h_counts(&self) -> (usize, usize) {
        let mut odd = 0;
        let mut even = 0;
        for (i, r) in self.residues.iter().enumerate() {
            if r.is_h() {
                // index 0 is position 1 (odd)
                if i % 2 == 0 {
                    odd += 1;
                } else {
                    even += 1;
                }
            }
        }
        (odd, even)
    }

    /// Parity bound `2 * min(odd, even)` on H-H contacts. It holds when both
    /// chain ends are P; see [`Self::contact_limit`] for one that always does.
    pub fn upper_bound(&self) -> u32 {
        let (odd, even) = self.parity_h_counts();
        2 * odd.min(even) as u32
    }

    /// A bound no fold can exceed. An interior H has two free lattice
    /// neighbours but a chain end has three, so an H at either end adds one
    /// to its parity class before taking the minimum. With P at both ends
    /// this equals `upper_bound`.
    pub fn contact_limit(&self) -> u32 {
        let n = self.residues.len();
        if n < 4 {
            return 0;
        }
        let (odd, even) = self.parity_h_counts();
        let (mut odd_cap, mut even_cap) = (2 * odd, 2 * even);
        for i in [0, n - 1] {
            if self.residues[i].is_h() {
                if i % 2 == 0 {
                    odd_cap += 1;
                } else {
                    even_cap += 1;
                }
            }
        }
        odd_cap.min(even_cap) as u32
    }

    pub fn reversed(&self) -> Self {
        let mut residues = self.residues.clone();
        residues.reverse();
        Self { residues }
    }
}

impl fmt::Display for HpSequence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for r in &self.residues {
            write!(f, "{}", r.as_char())?;
        }
        Ok(())
    }
}

impl FromStr for HpSequence {
    type Err = HpError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        parse_hp_string(s)
    }
}

impl Serialize for HpSequence {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for HpSequence {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let text = String::deserialize(deserializer)?;
        parse_hp_string(&text).map_err(serde::de::Error::custom)
    }
}

/// Parses a plain H/P string or run-length notation such as
/// `(hp)2ph(hp)2(ph)2hp(ph)2`. A count applies to the letter or group
/// immediately before it. Case-insensitive.
pub fn parse_hp_string(text: &str) -> Result<HpSequence, HpError> {
    let chars: Vec<char> = text.chars().collect();
    for (pos, &ch) in chars.iter().enumerate() {
        if !matches!(ch, 'h' | 'H' | 'p' | 'P' | '(' | ')' | '0'..='9') {
            return Err(HpError::InvalidCharacter { pos, ch });
        }
    }
    let mut parser = RunLengthParser { chars: &chars, pos: 0 };
    let residues = parser.items(0)?;
    if parser.pos != chars.len() {
        // only a stray ')' stops the top level early
        return Err(HpError::UnbalancedParens);
    }
    HpSequence::new(residues)
}

struct RunLengthParser<'a> {
    chars: &'a [char],
    pos: usize,
}

impl RunLengthParser<'_> {
    fn items(&mut self, depth: usize) -> Result<Vec<Residue>, HpError> {
        let mut out = Vec::new();
        while let Some(&ch) = self.chars.get(self.pos) {
            let unit = match ch {
                'h' | 'H' => {
                    self.pos += 1;
                    vec![Residue::H]
                }
                'p' | 'P' => {
                    self.pos += 1;
                    vec![Residue::P]
                }
                '(' => {
                    self.pos += 1;
                    let inner = self.items(depth + 1)?;
                    if self.chars.get(self.pos) != Some(&')') {
                        return Err(HpError::UnbalancedParens);
                    }
                    self.pos += 1;
                    if inner.is_empty() {
                        return Err(HpError::EmptyGroup { pos: self.pos - 1 });
                    }
                    inner
                }
                ')' => {
                    if depth == 0 {
                        return Err(HpError::UnbalancedParens);
                    }
                    return Ok(out);
                }
                _ => return Err(HpError::DanglingCount { pos: self.pos }),
            };
            let repeat = self.count()?;
            for _ in 0..repeat {
                out.extend_from_slice(&unit);
            }
        }
        if depth > 0 {
            return Err(HpError::UnbalancedParens);
        }
        Ok(out)
    }

    fn count(&mut self) -> Result<usize, HpError> {
        let start = self.pos;
        while self.chars.get(self.pos).is_some_and(|c| c.is_ascii_digit()) {
            self.pos += 1;
        }
        if start == self.pos {
            return Ok(1);
        }
        let digits: String = self.chars[start..self.pos].iter().collect();
        match digits.parse::<usize>() {
            Ok(0) | Err(_) => Err(HpError::BadRepeat { pos: start }),
            Ok(n) => Ok(n),
        }
    }
}

/// Maps one-letter amino-acid codes onto H/P using [`HYDROPHOBIC_AMINO_ACIDS`].
pub fn translate_amino_acids(text: &str) -> Result<HpSequence, HpError> {
    if text.is_empty() {
        return Err(HpError::TooShort { len: 0 });
    }
    let mut residues = Vec::with_capacity(text.len());
    for (pos, ch) in text.chars().enumerate() {
        let upper = ch.to_ascii_uppercase();
        if !STANDARD_AMINO_ACIDS.contains(upper) {
            return Err(HpError::UnknownAminoAcid { pos, ch });
        }
        residues.push(if HYDROPHOBIC_AMINO_ACIDS.contains(upper) {
            Residue::H
        } else {
            Residue::P
        });
    }
    HpSequence::new(residues)
}

/// Parses a sequence file: one sequence per line, blank lines and lines
/// starting with `#` skipped.
pub fn parse_sequence_file(text: &str) -> Result<Vec<HpSequence>, HpError> {
    let mut out = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let seq = parse_hp_string(line).map_err(|source| HpError::Line {
            line: lineno + 1,
            source: Box::new(source),
        })?;
        out.push(seq);
    }
    Ok(out)
}
