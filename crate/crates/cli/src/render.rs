//! Fold drawings: SVG and a text raster with vertices on even cells and
//! bond or contact glyphs between them.

use std::fmt::Write as _;

use hpfold::hp::{FoldRecord, Residue};

const SCALE: i32 = 40;
const MARGIN: i32 = 30;

fn coords(record: &FoldRecord) -> Vec<(i32, i32)> {
    record.coords.clone()
}

/// Non-consecutive H pairs on neighbouring vertices.
fn contacts(record: &FoldRecord) -> Vec<(usize, usize)> {
    let c = coords(record);
    let mut out = Vec::new();
    for i in 0..c.len() {
        for j in i + 2..c.len() {
            let d = (c[i].0 - c[j].0).abs() + (c[i].1 - c[j].1).abs();
            if d == 1 && record.sequence.get(i) == Residue::H && record.sequence.get(j) == Residue::H {
                out.push((i, j));
            }
        }
    }
    out
}

fn bounds(c: &[(i32, i32)]) -> (i32, i32, i32, i32) {
    let min_x = c.iter().map(|p| p.0).min().unwrap_or(0);
    let max_x = c.iter().map(|p| p.0).max().unwrap_or(0);
    let min_y = c.iter().map(|p| p.1).min().unwrap_or(0);
    let max_y = c.iter().map(|p| p.1).max().unwrap_or(0);
    (min_x, max_x, min_y, max_y)
}

pub fn svg(record: &FoldRecord) -> String {
    let c = coords(record);
    let (min_x, max_x, min_y, max_y) = bounds(&c);
    let width = (max_x - min_x) * SCALE + 2 * MARGIN;
    let height = (max_y - min_y) * SCALE + 2 * MARGIN;
    // lattice y grows upwards, SVG y downwards
    let px = |p: (i32, i32)| (MARGIN + (p.0 - min_x) * SCALE, MARGIN + (max_y - p.1) * SCALE);
    let mut out = String::new();
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" viewBox="0 0 {width} {height}">"#
    );
    let _ = writeln!(
        out,
        "<title>{} contacts {} energy {}</title>",
        record.sequence, record.contacts, record.energy
    );
    for w in c.windows(2) {
        let (a, b) = (px(w[0]), px(w[1]));
        let _ = writeln!(
            out,
            r#"<line class="bond" x1="{}" y1="{}" x2="{}" y2="{}" stroke="black" stroke-width="3"/>"#,
            a.0, a.1, b.0, b.1
        );
    }
    for (i, j) in contacts(record) {
        let (a, b) = (px(c[i]), px(c[j]));
        let _ = writeln!(
            out,
            r#"<line class="contact" x1="{}" y1="{}" x2="{}" y2="{}" stroke="gray" stroke-width="2" stroke-dasharray="5,4"/>"#,
            a.0, a.1, b.0, b.1
        );
    }
    for (i, &p) in c.iter().enumerate() {
        let (x, y) = px(p);
        let fill = match record.sequence.get(i) {
            Residue::H => "black",
            Residue::P => "white",
        };
        let _ = writeln!(
            out,
            r#"<circle class="{}" cx="{x}" cy="{y}" r="9" fill="{fill}" stroke="black" stroke-width="2"/>"#,
            if fill == "black" { "h" } else { "p" }
        );
    }
    if let (Some(&first), Some(&last)) = (c.first(), c.last()) {
        for (label, p) in [("S", first), ("E", last)] {
            let (x, y) = px(p);
            let _ = writeln!(
                out,
                r#"<text x="{}" y="{}" font-family="sans-serif" font-size="14">{label}</text>"#,
                x + 11,
                y - 11
            );
        }
    }
    out.push_str("</svg>\n");
    out
}

/// Character raster, top row first. `H`/`P` residues, `-`/`|` bonds, `*`
/// contacts; a final line names the start and end vertices.
pub fn text(record: &FoldRecord) -> String {
    let c = coords(record);
    let (min_x, max_x, min_y, max_y) = bounds(&c);
    let cols = (2 * (max_x - min_x) + 1) as usize;
    let rows = (2 * (max_y - min_y) + 1) as usize;
    let mut grid = vec![vec![' '; cols]; rows];
    let cell = |p: (i32, i32)| (2 * (max_y - p.1) as usize, 2 * (p.0 - min_x) as usize);
    let mut mark = |a: (i32, i32), b: (i32, i32), glyph: char| {
        let (ra, ca) = cell(a);
        let (rb, cb) = cell(b);
        grid[(ra + rb) / 2][(ca + cb) / 2] = glyph;
    };
    for w in c.windows(2) {
        mark(w[0], w[1], if w[0].1 == w[1].1 { '-' } else { '|' });
    }
    for (i, j) in contacts(record) {
        mark(c[i], c[j], '*');
    }
    for (i, &p) in c.iter().enumerate() {
        let (r, col) = cell(p);
        grid[r][col] = match record.sequence.get(i) {
            Residue::H => 'H',
            Residue::P => 'P',
        };
    }
    let mut out = String::new();
    for row in grid {
        let line: String = row.into_iter().collect();
        out.push_str(line.trim_end());
        out.push('\n');
    }
    if let (Some(first), Some(last)) = (c.first(), c.last()) {
        let _ = writeln!(out, "S ({}, {})  E ({}, {})", first.0, first.1, last.0, last.1);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use hpfold::hp::{parse_hp_string, parse_moves, FoldState};

    fn record(seq: &str, moves: &str) -> FoldRecord {
        let state = FoldState::from_moves(parse_hp_string(seq).unwrap(), &parse_moves(moves).unwrap()).unwrap();
        FoldRecord::from_state(&state)
    }

    #[test]
    fn square_counts() {
        let out = svg(&record("hhhh", "LL"));
        assert_eq!(out.matches("<circle").count(), 4);
        assert_eq!(out.matches(r#"class="bond""#).count(), 3);
        assert_eq!(out.matches(r#"class="contact""#).count(), 1);
        assert_eq!(out.matches(r#"class="h""#).count(), 4);
        assert!(out.contains(">S</text>") && out.contains(">E</text>"));
        assert_eq!(out, svg(&record("hhhh", "LL")));
    }

    #[test]
    fn straight_chain_has_no_contacts() {
        let out = svg(&record("pppppp", "FFFF"));
        assert_eq!(out.matches(r#"class="contact""#).count(), 0);
        assert_eq!(out.matches(r#"class="p""#).count(), 6);
    }

    #[test]
    fn text_raster() {
        // L then L from heading north: (0,0) (0,1) (-1,1) (-1,0)
        assert_eq!(text(&record("hhhh", "LL")), "H-H\n| |\nH*H\nS (0, 0)  E (-1, 0)\n");
        assert_eq!(text(&record("hph", "F")), "H\n|\nP\n|\nH\nS (0, 0)  E (0, 2)\n");
    }
}
