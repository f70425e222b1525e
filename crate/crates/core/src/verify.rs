//! PBTD verification.
//!
//! Five independent checks, one per clause of the definition plus pair
//! coverage. Every check runs on arbitrary well-shaped arrays and reports
//! all of its violations, not just the first. Locations are 1-based.

use std::collections::BTreeMap;
use std::fmt;

use serde::Serialize;

use crate::design::{DesignArray, Pair};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum ViolationKind {
    ColumnNotFactor,
    PairMissing,
    PairRepeated,
    RowMultiplicityExceeded,
    FrontWindowNotFactor,
    BackWindowNotFactor,
}

impl ViolationKind {
    pub const ALL: [ViolationKind; 6] = [
        ViolationKind::ColumnNotFactor,
        ViolationKind::PairMissing,
        ViolationKind::PairRepeated,
        ViolationKind::RowMultiplicityExceeded,
        ViolationKind::FrontWindowNotFactor,
        ViolationKind::BackWindowNotFactor,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ViolationKind::ColumnNotFactor => "ColumnNotFactor",
            ViolationKind::PairMissing => "PairMissing",
            ViolationKind::PairRepeated => "PairRepeated",
            ViolationKind::RowMultiplicityExceeded => "RowMultiplicityExceeded",
            ViolationKind::FrontWindowNotFactor => "FrontWindowNotFactor",
            ViolationKind::BackWindowNotFactor => "BackWindowNotFactor",
        }
    }
}

impl fmt::Display for ViolationKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
pub struct Violation {
    pub kind: ViolationKind,
    pub row: Option<usize>,
    pub column: Option<usize>,
    pub element: Option<u32>,
    pub pair: Option<Pair>,
    /// Observed occurrences of the element (or pair) at the location.
    pub count: usize,
    /// Every cell holding the pair, for coverage violations.
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub cells: Vec<(usize, usize)>,
}

impl Violation {
    fn element(
        kind: ViolationKind,
        row: Option<usize>,
        column: Option<usize>,
        element: u32,
        count: usize,
    ) -> Self {
        Violation {
            kind,
            row,
            column,
            element: Some(element),
            pair: None,
            count,
            cells: Vec::new(),
        }
    }

    fn sort_key(&self) -> impl Ord + '_ {
        (self.kind, self.row, self.column, self.element, self.pair)
    }
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.kind)?;
        if let Some(r) = self.row {
            write!(f, " row {r}")?;
        }
        if let Some(c) = self.column {
            write!(f, " column {c}")?;
        }
        if let Some(e) = self.element {
            write!(f, " element {e}")?;
        }
        if let Some(p) = self.pair {
            write!(f, " pair {p}")?;
        }
        write!(f, " count {}", self.count)?;
        if !self.cells.is_empty() {
            let cells: Vec<String> = self
                .cells
                .iter()
                .map(|(r, c)| format!("({r},{c})"))
                .collect();
            write!(f, " cells {}", cells.join(" "))?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct VerificationReport {
    pub valid: bool,
    pub violations: Vec<Violation>,
    pub summary: BTreeMap<ViolationKind, usize>,
}

impl VerificationReport {
    fn from_violations(mut violations: Vec<Violation>) -> Self {
        violations.sort_by(|a, b| a.sort_key().cmp(&b.sort_key()));
        let mut summary = BTreeMap::new();
        for v in &violations {
            *summary.entry(v.kind).or_insert(0) += 1;
        }
        VerificationReport {
            valid: violations.is_empty(),
            violations,
            summary,
        }
    }

    pub fn count(&self, kind: ViolationKind) -> usize {
        self.summary.get(&kind).copied().unwrap_or(0)
    }

    pub fn to_text(&self) -> String {
        let mut out = format!(
            "valid: {}, violations: {}\n",
            self.valid,
            self.violations.len()
        );
        for (kind, n) in &self.summary {
            out.push_str(&format!("  {kind}: {n}\n"));
        }
        for v in &self.violations {
            out.push_str(&format!("{v}\n"));
        }
        out
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("report serialization cannot fail")
    }
}

/// Emits one violation per element whose count differs from 1.
fn factor_violations(
    counts: &[usize],
    kind: ViolationKind,
    row: Option<usize>,
    column: Option<usize>,
    out: &mut Vec<Violation>,
) {
    for (e, &c) in counts.iter().enumerate() {
        if c != 1 {
            out.push(Violation::element(kind, row, column, e as u32, c));
        }
    }
}

fn count_elements(cells: impl Iterator<Item = Pair>, elements: usize) -> Vec<usize> {
    let mut counts = vec![0; elements];
    for p in cells {
        counts[p.low() as usize] += 1;
        counts[p.high() as usize] += 1;
    }
    counts
}

pub fn check_column_factors(design: &DesignArray) -> Vec<Violation> {
    let side = design.side();
    let mut out = Vec::new();
    for c in 0..side.columns() {
        let counts = count_elements(design.column(c), side.elements());
        factor_violations(
            &counts,
            ViolationKind::ColumnNotFactor,
            None,
            Some(c + 1),
            &mut out,
        );
    }
    out
}

pub fn check_pair_coverage(design: &DesignArray) -> Vec<Violation> {
    let side = design.side();
    let mut places: BTreeMap<Pair, Vec<(usize, usize)>> =
        side.all_pairs().map(|p| (p, Vec::new())).collect();
    for (r, row) in design.rows().enumerate() {
        for (c, &p) in row.iter().enumerate() {
            places
                .get_mut(&p)
                .expect("pairs are range-checked")
                .push((r + 1, c + 1));
        }
    }
    let mut out = Vec::new();
    for (pair, cells) in places {
        match cells.len() {
            1 => {}
            0 => out.push(Violation {
                kind: ViolationKind::PairMissing,
                row: None,
                column: None,
                element: None,
                pair: Some(pair),
                count: 0,
                cells,
            }),
            n => out.push(Violation {
                kind: ViolationKind::PairRepeated,
                row: Some(cells[0].0),
                column: Some(cells[0].1),
                element: None,
                pair: Some(pair),
                count: n,
                cells,
            }),
        }
    }
    out
}

pub fn check_row_multiplicity(design: &DesignArray) -> Vec<Violation> {
    let side = design.side();
    let mut out = Vec::new();
    for (r, row) in design.rows().enumerate() {
        let counts = count_elements(row.iter().copied(), side.elements());
        for (e, &c) in counts.iter().enumerate() {
            if c > 2 {
                out.push(Violation::element(
                    ViolationKind::RowMultiplicityExceeded,
                    Some(r + 1),
                    None,
                    e as u32,
                    c,
                ));
            }
        }
    }
    out
}

pub fn check_front_factors(design: &DesignArray) -> Vec<Violation> {
    let side = design.side();
    let mut out = Vec::new();
    for (r, row) in design.rows().enumerate() {
        let counts = count_elements(row[..side.n()].iter().copied(), side.elements());
        factor_violations(
            &counts,
            ViolationKind::FrontWindowNotFactor,
            Some(r + 1),
            None,
            &mut out,
        );
    }
    out
}

/// The back window is columns `n..2n-1` (1-based), so it shares the middle
/// column with the front window.
pub fn check_back_factors(design: &DesignArray) -> Vec<Violation> {
    let side = design.side();
    let mut out = Vec::new();
    for (r, row) in design.rows().enumerate() {
        let counts = count_elements(row[side.middle_column()..].iter().copied(), side.elements());
        factor_violations(
            &counts,
            ViolationKind::BackWindowNotFactor,
            Some(r + 1),
            None,
            &mut out,
        );
    }
    out
}

pub fn verify(design: &DesignArray) -> VerificationReport {
    let mut all = check_column_factors(design);
    all.extend(check_pair_coverage(design));
    all.extend(check_row_multiplicity(design));
    all.extend(check_front_factors(design));
    all.extend(check_back_factors(design));
    VerificationReport::from_violations(all)
}
