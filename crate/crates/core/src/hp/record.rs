use serde::{Deserialize, Serialize};

use super::{moves_to_string, parse_moves, Coord, FoldState, HpError, HpSequence, Status};

/// Canonical fold output, written as one JSON object per line.
///
/// ```text
/// {"sequence":"HHHH","moves":"LL","coords":[[0,0],[0,1],[-1,1],[-1,0]],"contacts":1,"energy":-1,"status":"complete"}
/// ```
///
/// `moves` covers residues 3.. (the first two are fixed by the opening) and
/// `coords` holds one `[x, y]` pair per placed residue.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FoldRecord {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub id: Option<String>,
    pub sequence: HpSequence,
    pub moves: String,
    pub coords: Vec<(i32, i32)>,
    pub contacts: u32,
    pub energy: i32,
    pub status: Status,
}

impl FoldRecord {
    pub fn from_state(state: &FoldState) -> Self {
        let score = state.score();
        Self {
            id: None,
            sequence: state.sequence().clone(),
            moves: moves_to_string(&state.moves()),
            coords: state.placed().iter().map(|c| (c.x, c.y)).collect(),
            contacts: score.contacts,
            energy: score.energy(),
            status: state.status(),
        }
    }

    pub fn with_id(mut self, id: impl Into<String>) -> Self {
        self.id = Some(id.into());
        self
    }

    pub fn to_line(&self) -> String {
        serde_json::to_string(self).expect("fold record serializes")
    }

    /// Parses one line and checks it against a replay of its moves.
    pub fn parse_line(line: &str) -> Result<Self, HpError> {
        let record: FoldRecord =
            serde_json::from_str(line).map_err(|e| HpError::Record(e.to_string()))?;
        record.replay()?;
        Ok(record)
    }

    /// Replays the move string and verifies every stored field.
    pub fn replay(&self) -> Result<FoldState, HpError> {
        let moves = parse_moves(&self.moves)?;
        let state = FoldState::from_moves(self.sequence.clone(), &moves)?;
        let coords: Vec<Coord> = self.coords.iter().map(|&(x, y)| Coord::new(x, y)).collect();
        if coords != state.placed() {
            return Err(HpError::Record("coords do not match moves".into()));
        }
        let score = state.score();
        if score.contacts != self.contacts || score.energy() != self.energy {
            return Err(HpError::Record(format!(
                "stored contacts {} / energy {} but replay gives {}",
                self.contacts,
                self.energy,
                score.contacts
            )));
        }
        if state.status() != self.status {
            return Err(HpError::Record("status does not match replay".into()));
        }
        Ok(state)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hp::{parse_hp_string, RelativeMove::*};

    #[test]
    fn line_round_trip() {
        let s = FoldState::from_moves(parse_hp_string("hhhh").unwrap(), &[Left, Left]).unwrap();
        let rec = FoldRecord::from_state(&s);
        let line = rec.to_line();
        assert_eq!(
            line,
            r#"{"sequence":"HHHH","moves":"LL","coords":[[0,0],[0,1],[-1,1],[-1,0]],"contacts":1,"energy":-1,"status":"complete"}"#
        );
        assert_eq!(FoldRecord::parse_line(&line).unwrap(), rec);
    }

    #[test]
    fn tampered_record_is_rejected() {
        let line = r#"{"sequence":"HHHH","moves":"LL","coords":[[0,0],[0,1],[-1,1],[-1,0]],"contacts":2,"energy":-2,"status":"complete"}"#;
        assert!(FoldRecord::parse_line(line).is_err());
        let line = r#"{"sequence":"HHHH","moves":"LR","coords":[[0,0],[0,1],[-1,1],[-1,0]],"contacts":1,"energy":-1,"status":"complete"}"#;
        assert!(FoldRecord::parse_line(line).is_err());
        assert!(FoldRecord::parse_line("not json").is_err());
    }
}
