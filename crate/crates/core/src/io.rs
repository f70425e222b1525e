//! Text-grid and structured (JSON) design formats, plus the embedded
//! PBTD(9) golden instance.
//!
//! Text grid: one row per line, cells written `a,b` and separated by
//! whitespace. `#` lines and blank lines are skipped, `|` tokens are
//! ignored, and a space after the comma is allowed (`2, 16`). The side is
//! inferred from the number of rows and must agree with the column count.

use serde::Serialize;
use serde_json::Value;
use thiserror::Error;

use crate::design::{DesignArray, Pair, Side};

/// Errors carry 1-based positions. For text input `line` is the source
/// line; for structured input it is the row index.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseError {
    #[error("shape error{}: {message}", line.map(|l| format!(" at line {l}")).unwrap_or_default())]
    Shape {
        line: Option<usize>,
        message: String,
    },
    #[error("bad token {token:?} at line {line}, cell {cell}")]
    Token {
        line: usize,
        cell: usize,
        token: String,
    },
    #[error("label {element} at line {line}, cell {cell} is out of range for {elements} elements")]
    Range {
        line: usize,
        cell: usize,
        element: u64,
        elements: usize,
    },
    #[error("cell at line {line}, cell {cell} pairs {element} with itself")]
    SelfPair {
        line: usize,
        cell: usize,
        element: u32,
    },
    #[error("schema error: {0}")]
    Schema(String),
}

impl ParseError {
    fn shape(line: Option<usize>, message: impl Into<String>) -> Self {
        ParseError::Shape {
            line,
            message: message.into(),
        }
    }
}

fn build_pair(
    a: u64,
    b: u64,
    line: usize,
    cell: usize,
    elements: usize,
) -> Result<Pair, ParseError> {
    for x in [a, b] {
        if x >= elements as u64 {
            return Err(ParseError::Range {
                line,
                cell,
                element: x,
                elements,
            });
        }
    }
    Pair::new(a as u32, b as u32).map_err(|_| ParseError::SelfPair {
        line,
        cell,
        element: a as u32,
    })
}

/// Splits a line into raw `a,b` cell strings.
fn split_cells(line: &str) -> Vec<String> {
    let mut cells: Vec<String> = Vec::new();
    let mut pending = false;
    for tok in line.split_whitespace() {
        if tok == "|" {
            continue;
        }
        if pending {
            cells
                .last_mut()
                .expect("pending implies a cell")
                .push_str(tok);
        } else {
            cells.push(tok.to_string());
        }
        pending = tok.ends_with(',');
    }
    cells
}

fn parse_cell(raw: &str, line: usize, cell: usize) -> Result<(u64, u64), ParseError> {
    let bad = || ParseError::Token {
        line,
        cell,
        token: raw.to_string(),
    };
    let (a, b) = raw.split_once(',').ok_or_else(bad)?;
    let a = a.parse::<u64>().map_err(|_| bad())?;
    let b = b.parse::<u64>().map_err(|_| bad())?;
    Ok((a, b))
}

pub fn parse_text(input: &str) -> Result<DesignArray, ParseError> {
    let lines: Vec<(usize, Vec<String>)> = input
        .lines()
        .enumerate()
        .filter(|(_, l)| {
            let t = l.trim();
            !t.is_empty() && !t.starts_with('#')
        })
        .map(|(i, l)| (i + 1, split_cells(l)))
        .collect();
    if lines.is_empty() {
        return Err(ParseError::shape(None, "no rows"));
    }
    let rows = lines.len();
    let columns = 2 * rows - 1;
    for (line, cells) in &lines {
        if cells.len() != columns {
            return Err(ParseError::shape(
                Some(*line),
                format!("{} cells, expected {columns} for {rows} rows", cells.len()),
            ));
        }
    }
    let side = Side::new(rows).expect("rows > 0");
    let mut out = Vec::with_capacity(side.pair_count());
    for (line, cells) in &lines {
        for (i, raw) in cells.iter().enumerate() {
            let (a, b) = parse_cell(raw, *line, i + 1)?;
            out.push(build_pair(a, b, *line, i + 1, side.elements())?);
        }
    }
    Ok(DesignArray::from_cells(side, out).expect("shape and range already checked"))
}

/// Canonical text form: single spaces, `" | "` after column n, one row per
/// line with a trailing newline.
pub fn emit_text(design: &DesignArray) -> String {
    let n = design.side().n();
    let mut out = String::new();
    for row in design.rows() {
        let front: Vec<String> = row[..n].iter().map(Pair::to_string).collect();
        out.push_str(&front.join(" "));
        if row.len() > n {
            let back: Vec<String> = row[n..].iter().map(Pair::to_string).collect();
            out.push_str(" | ");
            out.push_str(&back.join(" "));
        }
        out.push('\n');
    }
    out
}

#[derive(Serialize)]
struct StructuredDocument {
    n: usize,
    rows: Vec<Vec<Pair>>,
}

fn as_index(v: &Value) -> Option<u64> {
    v.as_u64()
}

pub fn parse_structured(input: &str) -> Result<DesignArray, ParseError> {
    let doc: Value = serde_json::from_str(input).map_err(|e| ParseError::Schema(e.to_string()))?;
    let obj = doc
        .as_object()
        .ok_or_else(|| ParseError::Schema("expected an object".into()))?;
    let n = obj
        .get("n")
        .ok_or_else(|| ParseError::Schema("missing field `n`".into()))?;
    let rows = obj
        .get("rows")
        .ok_or_else(|| ParseError::Schema("missing field `rows`".into()))?;
    let n = as_index(n)
        .ok_or_else(|| ParseError::Schema(format!("`n` must be a non-negative integer, got {n}")))?
        as usize;
    let side = Side::new(n).map_err(|_| ParseError::shape(None, "n must be at least 1"))?;
    let rows = rows
        .as_array()
        .ok_or_else(|| ParseError::Schema("`rows` must be an array".into()))?;
    if rows.len() != side.rows() {
        return Err(ParseError::shape(
            None,
            format!("{} rows, expected {n}", rows.len()),
        ));
    }
    let mut cells = Vec::with_capacity(side.pair_count());
    for (r, row) in rows.iter().enumerate() {
        let line = r + 1;
        let row = row
            .as_array()
            .ok_or_else(|| ParseError::Schema(format!("row {line} must be an array")))?;
        if row.len() != side.columns() {
            return Err(ParseError::shape(
                Some(line),
                format!("{} cells, expected {}", row.len(), side.columns()),
            ));
        }
        for (c, cell) in row.iter().enumerate() {
            let bad = || ParseError::Token {
                line,
                cell: c + 1,
                token: cell.to_string(),
            };
            let pair = cell.as_array().filter(|a| a.len() == 2).ok_or_else(bad)?;
            let a = as_index(&pair[0]).ok_or_else(bad)?;
            let b = as_index(&pair[1]).ok_or_else(bad)?;
            cells.push(build_pair(a, b, line, c + 1, side.elements())?);
        }
    }
    Ok(DesignArray::from_cells(side, cells).expect("shape and range already checked"))
}

/// Compact JSON with fields in the order `n`, `rows`.
pub fn emit_structured(design: &DesignArray) -> String {
    let doc = StructuredDocument {
        n: design.side().n(),
        rows: design.to_rows(),
    };
    serde_json::to_string(&doc).expect("serialization cannot fail")
}

const TABLE1: [[(u32, u32); 17]; 9] = [
    [
        (2, 16),
        (3, 17),
        (4, 6),
        (5, 7),
        (8, 10),
        (9, 11),
        (12, 14),
        (13, 15),
        (0, 1),
        (2, 5),
        (3, 4),
        (6, 15),
        (7, 14),
        (8, 11),
        (9, 10),
        (12, 16),
        (13, 17),
    ],
    [
        (0, 4),
        (1, 5),
        (7, 9),
        (6, 8),
        (11, 13),
        (10, 12),
        (15, 17),
        (14, 16),
        (2, 3),
        (0, 16),
        (1, 17),
        (4, 8),
        (5, 9),
        (6, 13),
        (7, 12),
        (10, 15),
        (11, 14),
    ],
    [
        (1, 3),
        (0, 2),
        (10, 13),
        (11, 12),
        (14, 17),
        (15, 16),
        (6, 9),
        (7, 8),
        (4, 5),
        (6, 10),
        (7, 11),
        (1, 16),
        (0, 17),
        (9, 12),
        (8, 13),
        (2, 14),
        (3, 15),
    ],
    [
        (10, 14),
        (11, 15),
        (0, 8),
        (1, 9),
        (2, 4),
        (3, 5),
        (13, 16),
        (12, 17),
        (6, 7),
        (3, 13),
        (2, 12),
        (9, 17),
        (8, 16),
        (4, 14),
        (5, 15),
        (0, 11),
        (1, 10),
    ],
    [
        (5, 6),
        (4, 7),
        (2, 17),
        (3, 16),
        (12, 15),
        (13, 14),
        (0, 10),
        (1, 11),
        (8, 9),
        (4, 11),
        (5, 10),
        (2, 13),
        (3, 12),
        (0, 15),
        (1, 14),
        (7, 17),
        (6, 16),
    ],
    [
        (8, 12),
        (9, 13),
        (1, 15),
        (0, 14),
        (5, 16),
        (4, 17),
        (3, 7),
        (2, 6),
        (10, 11),
        (1, 12),
        (0, 13),
        (5, 14),
        (4, 15),
        (7, 16),
        (6, 17),
        (3, 8),
        (2, 9),
    ],
    [
        (9, 15),
        (8, 14),
        (11, 16),
        (10, 17),
        (3, 6),
        (2, 7),
        (1, 4),
        (0, 5),
        (12, 13),
        (9, 14),
        (8, 15),
        (3, 11),
        (2, 10),
        (5, 17),
        (4, 16),
        (1, 6),
        (0, 7),
    ],
    [
        (11, 17),
        (10, 16),
        (5, 12),
        (4, 13),
        (1, 7),
        (0, 6),
        (2, 8),
        (3, 9),
        (14, 15),
        (8, 17),
        (9, 16),
        (7, 10),
        (6, 11),
        (1, 2),
        (0, 3),
        (5, 13),
        (4, 12),
    ],
    [
        (7, 13),
        (6, 12),
        (3, 14),
        (2, 15),
        (0, 9),
        (1, 8),
        (5, 11),
        (4, 10),
        (16, 17),
        (7, 15),
        (6, 14),
        (0, 12),
        (1, 13),
        (3, 10),
        (2, 11),
        (4, 9),
        (5, 8),
    ],
];

/// The published PBTD(9), cell for cell.
pub fn table1() -> DesignArray {
    let side = Side::new(9).expect("nonzero");
    let cells = TABLE1
        .iter()
        .flatten()
        .map(|&(a, b)| Pair::new(a, b).expect("distinct labels"))
        .collect();
    DesignArray::from_cells(side, cells).expect("embedded table is 9x17")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::verify::verify;
    use std::collections::HashSet;

    fn p(a: u32, b: u32) -> Pair {
        Pair::new(a, b).unwrap()
    }

    // Transcribed with the paper's spacing and a comment header.
    const TABLE1_LOOSE: &str = "\
# PBTD(9)
2, 16  3, 17  4, 6  5, 7  8, 10  9, 11  12, 14  13, 15  0, 1 | 2, 5  3, 4  6, 15  7, 14  8, 11  9, 10  12, 16  13, 17
0, 4  1, 5  7, 9  6, 8  11, 13  10, 12  15, 17  14, 16  2, 3 | 0, 16  1, 17  4, 8  5, 9  6, 13  7, 12  10, 15  11, 14
1, 3  0, 2  10, 13  11, 12  14, 17  15, 16  6, 9  7, 8  4, 5 | 6, 10  7, 11  1, 16  0, 17  9, 12  8, 13  2, 14  3, 15

10, 14  11, 15  0, 8  1, 9  2, 4  3, 5  13, 16  12, 17  6, 7 | 3, 13  2, 12  9, 17  8, 16  4, 14  5, 15  0, 11  1, 10
5, 6  4, 7  2, 17  3, 16  12, 15  13, 14  0, 10  1, 11  8, 9 | 4, 11  5, 10  2, 13  3, 12  0, 15  1, 14  7, 17  6, 16
8, 12  9, 13  1, 15  0, 14  5, 16  4, 17  3, 7  2, 6  10, 11 | 1, 12  0, 13  5, 14  4, 15  7, 16  6, 17  3, 8  2, 9
9, 15  8, 14  11, 16  10, 17  3, 6  2, 7  1, 4  0, 5  12, 13 | 9, 14  8, 15  3, 11  2, 10  5, 17  4, 16  1, 6  0, 7
11, 17  10, 16  5, 12  4, 13  1, 7  0, 6  2, 8  3, 9  14, 15 | 8, 17  9, 16  7, 10  6, 11  1, 2  0, 3  5, 13  4, 12
7, 13  6, 12  3, 14  2, 15  0, 9  1, 8  5, 11  4, 10  16, 17 | 7, 15  6, 14  0, 12  1, 13  3, 10  2, 11  4, 9  5, 8
";

    #[test]
    fn table1_shape_and_cells() {
        let t = table1();
        assert_eq!(t.side().n(), 9);
        assert_eq!(t.get(8, 16), p(5, 8));
        assert_eq!(t.cells().len(), 153);
        assert_eq!(t.cells().iter().collect::<HashSet<_>>().len(), 153);
        let row1: Vec<(u32, u32)> = t.row(0).iter().map(|p| (p.low(), p.high())).collect();
        assert_eq!(row1, TABLE1[0].to_vec());
        assert!(verify(&t).valid);
    }

    #[test]
    fn parses_paper_layout() {
        let d = parse_text(TABLE1_LOOSE).unwrap();
        assert_eq!(d, table1());
        assert_eq!(d.get(0, 0), p(2, 16));
    }

    #[test]
    fn parses_trivial_and_canonicalizes() {
        let d = parse_text("1,0\n").unwrap();
        assert_eq!(d.side().n(), 1);
        assert_eq!(d.get(0, 0), p(0, 1));
        assert_eq!(emit_text(&d), "0,1\n");
    }

    #[test]
    fn shape_error_names_line() {
        let mut lines: Vec<String> = emit_text(&table1()).lines().map(str::to_string).collect();
        let cut = lines[4].rfind(' ').unwrap();
        lines[4].truncate(cut);
        let err = parse_text(&lines.join("\n")).unwrap_err();
        assert!(
            matches!(err, ParseError::Shape { line: Some(5), .. }),
            "{err}"
        );
        assert!(err.to_string().contains("line 5"));

        // 3 rows of 3 cells: c != 2r - 1
        assert!(matches!(
            parse_text("0,1 2,3 4,5\n0,2 1,3 4,5\n0,3 1,2 4,5\n"),
            Err(ParseError::Shape { .. })
        ));
        assert!(matches!(
            parse_text("# nothing\n\n"),
            Err(ParseError::Shape { line: None, .. })
        ));
    }

    #[test]
    fn token_range_and_self_pair_errors() {
        assert!(matches!(
            parse_text("0;1\n"),
            Err(ParseError::Token {
                line: 1,
                cell: 1,
                ..
            })
        ));
        assert!(matches!(parse_text("a,1\n"), Err(ParseError::Token { .. })));
        assert!(matches!(
            parse_text("-1,1\n"),
            Err(ParseError::Token { .. })
        ));
        assert!(matches!(
            parse_text("0,2\n"),
            Err(ParseError::Range {
                line: 1,
                cell: 1,
                element: 2,
                elements: 2
            })
        ));
        assert!(matches!(
            parse_text("# c\n1,1\n"),
            Err(ParseError::SelfPair {
                line: 2,
                cell: 1,
                element: 1
            })
        ));
    }

    #[test]
    fn emit_text_canonical() {
        let text = emit_text(&table1());
        assert!(text.starts_with("2,16 3,17 4,6"));
        assert_eq!(text.lines().count(), 9);
        assert!(text.lines().next().unwrap().contains(" 0,1 | 2,5 "));
        assert_eq!(parse_text(&text).unwrap(), table1());
    }

    #[test]
    fn structured_examples() {
        let d = parse_structured(r#"{"n":1,"rows":[[[0,1]]]}"#).unwrap();
        assert_eq!(d.side().n(), 1);
        assert_eq!(emit_structured(&d), r#"{"n":1,"rows":[[[0,1]]]}"#);

        let t = table1();
        assert_eq!(parse_structured(&emit_structured(&t)).unwrap(), t);

        assert!(matches!(
            parse_structured(r#"{"n":2,"rows":[[[0,1],[0,2],[0,3]]]}"#),
            Err(ParseError::Shape { .. })
        ));
        assert!(matches!(
            parse_structured(r#"{"rows":[]}"#),
            Err(ParseError::Schema(_))
        ));
        assert!(matches!(
            parse_structured(r#"{"n":1}"#),
            Err(ParseError::Schema(_))
        ));
        assert!(matches!(
            parse_structured("[1,2"),
            Err(ParseError::Schema(_))
        ));
        assert!(matches!(
            parse_structured(r#"{"n":1,"rows":[[[0,"x"]]]}"#),
            Err(ParseError::Token {
                line: 1,
                cell: 1,
                ..
            })
        ));
        assert!(matches!(
            parse_structured(r#"{"n":1,"rows":[[[0,5]]]}"#),
            Err(ParseError::Range { .. })
        ));
        assert!(matches!(
            parse_structured(r#"{"n":1,"rows":[[[1,1]]]}"#),
            Err(ParseError::SelfPair { .. })
        ));
    }
}
