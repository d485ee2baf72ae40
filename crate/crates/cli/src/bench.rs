//! Benchmark entries and the energy report.

use std::fmt::Write as _;

use hpfold::baseline::{ComparisonTable, CellError};
use hpfold::hp::{parse_hp_string, HpSequence};

use crate::error::{CliError, CliResult};

pub const BUNDLED: &str = include_str!("../data/table2.tsv");

#[derive(Debug, Clone, PartialEq)]
pub struct BenchmarkEntry {
    pub id: String,
    pub sequence: HpSequence,
    /// Best known contact count.
    pub known_optimum: Option<u32>,
    pub upper_bound: u32,
}

/// Parses tab-separated `id, sequence, optimum|NA, upper_bound` rows. The
/// header row and `#` comments are skipped.
pub fn parse_benchmark(text: &str) -> CliResult<Vec<BenchmarkEntry>> {
    let mut out = Vec::new();
    for (n, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') || line.starts_with("id\t") {
            continue;
        }
        let bad = |msg: String| CliError::Data(format!("benchmark line {}: {msg}", n + 1));
        let fields: Vec<&str> = line.split('\t').collect();
        let [id, seq, opt, bound] = fields[..] else {
            return Err(bad(format!("expected 4 tab-separated fields, found {}", fields.len())));
        };
        let sequence = parse_hp_string(seq).map_err(|e| bad(e.to_string()))?;
        let known_optimum = match opt {
            "NA" => None,
            v => Some(v.parse().map_err(|_| bad(format!("bad optimum {v:?}")))?),
        };
        let upper_bound: u32 = bound.parse().map_err(|_| bad(format!("bad upper bound {bound:?}")))?;
        if upper_bound != sequence.upper_bound() {
            return Err(bad(format!(
                "stored upper bound {upper_bound} disagrees with the computed {}",
                sequence.upper_bound()
            )));
        }
        out.push(BenchmarkEntry {
            id: id.to_string(),
            sequence,
            known_optimum,
            upper_bound,
        });
    }
    Ok(out)
}

pub fn bundled() -> Vec<BenchmarkEntry> {
    parse_benchmark(BUNDLED).expect("bundled benchmark parses")
}

fn energy(c: u32) -> String {
    format!("{}", -(c as i64))
}

/// Energy report: one row per entry with the known optimum and bound as
/// energies, then one column per engine, then engine totals.
pub fn report(entries: &[BenchmarkEntry], table: &ComparisonTable) -> String {
    let mut out = String::from("id\tlength\toptimum\tbound");
    for name in &table.engines {
        let _ = write!(out, "\t{name}");
    }
    out.push('\n');
    for (entry, row) in entries.iter().zip(&table.rows) {
        let opt = entry.known_optimum.map_or("NA".to_string(), energy);
        let _ = write!(out, "{}\t{}\t{}\t{}", entry.id, row.length, opt, energy(row.upper_bound));
        for cell in &row.cells {
            match cell {
                Ok(c) => {
                    let _ = write!(out, "\t{}", energy(*c));
                }
                Err(CellError::Skipped(why)) => {
                    let _ = write!(out, "\tskipped ({why})");
                }
                Err(CellError::Failed(why)) => {
                    let _ = write!(out, "\tfailed ({why})");
                }
            }
        }
        out.push('\n');
    }
    out.push_str("total\t-\t-\t-");
    for total in table.totals() {
        let _ = write!(out, "\t{}", energy(total));
    }
    out.push('\n');
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bundled_bounds() {
        let entries = bundled();
        let bounds: Vec<u32> = entries.iter().map(|e| e.upper_bound).collect();
        assert_eq!(bounds, [10, 10, 58, 78]);
        let lengths: Vec<usize> = entries.iter().map(|e| e.sequence.len()).collect();
        assert_eq!(lengths, [20, 20, 85, 162]);
        assert_eq!(entries[0].known_optimum, Some(9));
        assert_eq!(entries[3].known_optimum, None);
    }

    #[test]
    fn rejects_wrong_bound() {
        let err = parse_benchmark("x\thhhh\t1\t3\n").unwrap_err();
        assert!(err.to_string().contains("disagrees"));
        assert!(parse_benchmark("x\thhhh\t1\n").is_err());
        assert!(parse_benchmark("x\thqhh\t1\t2\n").is_err());
    }
}
