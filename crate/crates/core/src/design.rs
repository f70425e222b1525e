//! Domain types for tournament design arrays and the symmetry actions that
//! preserve PBTD validity.
//!
//! Rows and columns are 0-based internally. Reports and the CLI use 1-based
//! indices.

use std::fmt;

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DesignError {
    #[error("side must be at least 1")]
    ZeroSide,
    #[error("pair elements must differ (got {0} twice)")]
    EqualElements(u32),
    #[error("element {element} out of range for {elements} elements")]
    OutOfRange { element: u32, elements: u32 },
    #[error("bad permutation: {0}")]
    BadPermutation(String),
    #[error("permutation moves the middle column {0}")]
    MiddleColumnMoved(usize),
    #[error("permutation moves column {0}, outside the selected window")]
    OutOfWindow(usize),
    #[error("bad shape: {0}")]
    Shape(String),
}

/// Number of rows of the array. Everything else is derived from it.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Side(usize);

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Dims {
    pub rows: usize,
    pub columns: usize,
    pub elements: usize,
    pub pair_count: usize,
}

impl Side {
    pub fn new(n: usize) -> Result<Self, DesignError> {
        if n == 0 {
            return Err(DesignError::ZeroSide);
        }
        Ok(Side(n))
    }

    pub fn n(self) -> usize {
        self.0
    }

    pub fn rows(self) -> usize {
        self.0
    }

    pub fn columns(self) -> usize {
        2 * self.0 - 1
    }

    pub fn elements(self) -> usize {
        2 * self.0
    }

    /// `n(2n-1)`, which is both the cell count and `C(2n, 2)`.
    pub fn pair_count(self) -> usize {
        self.0 * (2 * self.0 - 1)
    }

    /// 0-based index of the column shared by both windows.
    pub fn middle_column(self) -> usize {
        self.0 - 1
    }

    pub fn dims(self) -> Dims {
        Dims {
            rows: self.rows(),
            columns: self.columns(),
            elements: self.elements(),
            pair_count: self.pair_count(),
        }
    }

    pub fn in_front(self, col: usize) -> bool {
        col < self.0
    }

    pub fn in_back(self, col: usize) -> bool {
        col + 1 >= self.0
    }

    /// Range-checked pair constructor.
    pub fn pair(self, a: u32, b: u32) -> Result<Pair, DesignError> {
        let elements = self.elements() as u32;
        for x in [a, b] {
            if x >= elements {
                return Err(DesignError::OutOfRange {
                    element: x,
                    elements,
                });
            }
        }
        Pair::new(a, b)
    }

    /// Iterates all `C(2n, 2)` pairs in lexicographic order.
    pub fn all_pairs(self) -> impl Iterator<Item = Pair> {
        let v = self.elements() as u32;
        (0..v).flat_map(move |a| (a + 1..v).map(move |b| Pair { low: a, high: b }))
    }
}

impl fmt::Display for Side {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// An unordered pair of distinct elements, stored with `low < high`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Pair {
    low: u32,
    high: u32,
}

impl Pair {
    pub fn new(a: u32, b: u32) -> Result<Self, DesignError> {
        if a == b {
            return Err(DesignError::EqualElements(a));
        }
        Ok(Pair {
            low: a.min(b),
            high: a.max(b),
        })
    }

    pub fn low(self) -> u32 {
        self.low
    }

    pub fn high(self) -> u32 {
        self.high
    }

    pub fn elements(self) -> [u32; 2] {
        [self.low, self.high]
    }

    pub fn contains(self, x: u32) -> bool {
        self.low == x || self.high == x
    }

    pub fn map(self, f: impl Fn(u32) -> u32) -> Pair {
        let (a, b) = (f(self.low), f(self.high));
        debug_assert_ne!(a, b);
        Pair {
            low: a.min(b),
            high: a.max(b),
        }
    }

    /// Dense index into a `2n x 2n` table.
    pub(crate) fn index(self, elements: usize) -> usize {
        self.low as usize * elements + self.high as usize
    }
}

impl fmt::Display for Pair {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{},{}", self.low, self.high)
    }
}

impl Serialize for Pair {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        [self.low, self.high].serialize(s)
    }
}

/// Bijection on `0..len`. Position `i` maps to `mapping[i]`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Permutation {
    mapping: Vec<usize>,
}

/// A permutation of the `2n` element labels.
pub type ElementPermutation = Permutation;

impl Permutation {
    pub fn new(mapping: Vec<usize>) -> Result<Self, DesignError> {
        let mut seen = vec![false; mapping.len()];
        for &t in &mapping {
            if t >= mapping.len() {
                return Err(DesignError::BadPermutation(format!(
                    "target {t} out of range 0..{}",
                    mapping.len()
                )));
            }
            if std::mem::replace(&mut seen[t], true) {
                return Err(DesignError::BadPermutation(format!("target {t} hit twice")));
            }
        }
        Ok(Permutation { mapping })
    }

    pub fn identity(len: usize) -> Self {
        Permutation {
            mapping: (0..len).collect(),
        }
    }

    pub fn transposition(len: usize, i: usize, j: usize) -> Result<Self, DesignError> {
        let mut mapping: Vec<usize> = (0..len).collect();
        if i >= len || j >= len {
            return Err(DesignError::BadPermutation(format!(
                "swap {i},{j} outside 0..{len}"
            )));
        }
        mapping.swap(i, j);
        Ok(Permutation { mapping })
    }

    pub fn random<R: Rng + ?Sized>(len: usize, rng: &mut R) -> Self {
        let mut mapping: Vec<usize> = (0..len).collect();
        mapping.shuffle(rng);
        Permutation { mapping }
    }

    pub fn len(&self) -> usize {
        self.mapping.len()
    }

    pub fn is_empty(&self) -> bool {
        self.mapping.is_empty()
    }

    pub fn apply(&self, i: usize) -> usize {
        self.mapping[i]
    }

    pub fn inverse(&self) -> Self {
        let mut inv = vec![0; self.mapping.len()];
        for (i, &t) in self.mapping.iter().enumerate() {
            inv[t] = i;
        }
        Permutation { mapping: inv }
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.mapping
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Window {
    Front,
    Back,
}

/// An `n x (2n-1)` grid of pairs. Only the shape and label ranges are
/// enforced here; PBTD validity is the verifier's business.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct DesignArray {
    side: Side,
    cells: Vec<Pair>,
}

impl DesignArray {
    pub fn new(side: Side, rows: Vec<Vec<Pair>>) -> Result<Self, DesignError> {
        if rows.len() != side.rows() {
            return Err(DesignError::Shape(format!(
                "expected {} rows, got {}",
                side.rows(),
                rows.len()
            )));
        }
        let mut cells = Vec::with_capacity(side.pair_count());
        for (r, row) in rows.into_iter().enumerate() {
            if row.len() != side.columns() {
                return Err(DesignError::Shape(format!(
                    "row {} has {} cells, expected {}",
                    r + 1,
                    row.len(),
                    side.columns()
                )));
            }
            cells.extend(row);
        }
        Self::from_cells(side, cells)
    }

    /// Builds from row-major cells.
    pub fn from_cells(side: Side, cells: Vec<Pair>) -> Result<Self, DesignError> {
        if cells.len() != side.pair_count() {
            return Err(DesignError::Shape(format!(
                "expected {} cells, got {}",
                side.pair_count(),
                cells.len()
            )));
        }
        let elements = side.elements() as u32;
        if let Some(p) = cells.iter().find(|p| p.high >= elements) {
            return Err(DesignError::OutOfRange {
                element: p.high,
                elements,
            });
        }
        Ok(DesignArray { side, cells })
    }

    pub fn side(&self) -> Side {
        self.side
    }

    pub fn get(&self, row: usize, col: usize) -> Pair {
        self.cells[row * self.side.columns() + col]
    }

    pub fn set(&mut self, row: usize, col: usize, pair: Pair) -> Result<(), DesignError> {
        let elements = self.side.elements() as u32;
        if pair.high >= elements {
            return Err(DesignError::OutOfRange {
                element: pair.high,
                elements,
            });
        }
        let cols = self.side.columns();
        self.cells[row * cols + col] = pair;
        Ok(())
    }

    pub fn row(&self, row: usize) -> &[Pair] {
        let cols = self.side.columns();
        &self.cells[row * cols..(row + 1) * cols]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[Pair]> {
        self.cells.chunks(self.side.columns())
    }

    pub fn column(&self, col: usize) -> impl Iterator<Item = Pair> + '_ {
        (0..self.side.rows()).map(move |r| self.get(r, col))
    }

    pub fn cells(&self) -> &[Pair] {
        &self.cells
    }

    pub fn to_rows(&self) -> Vec<Vec<Pair>> {
        self.rows().map(<[Pair]>::to_vec).collect()
    }

    pub fn swap_cells(&mut self, a: (usize, usize), b: (usize, usize)) {
        let cols = self.side.columns();
        self.cells.swap(a.0 * cols + a.1, b.0 * cols + b.1);
    }

    pub fn relabel(&self, perm: &ElementPermutation) -> Result<Self, DesignError> {
        if perm.len() != self.side.elements() {
            return Err(DesignError::BadPermutation(format!(
                "relabeling needs {} labels, got {}",
                self.side.elements(),
                perm.len()
            )));
        }
        let cells = self
            .cells
            .iter()
            .map(|p| p.map(|x| perm.apply(x as usize) as u32))
            .collect();
        Ok(DesignArray {
            side: self.side,
            cells,
        })
    }

    /// Row `r` moves to row `perm(r)`.
    pub fn permute_rows(&self, perm: &Permutation) -> Result<Self, DesignError> {
        if perm.len() != self.side.rows() {
            return Err(DesignError::BadPermutation(format!(
                "row permutation needs {} rows, got {}",
                self.side.rows(),
                perm.len()
            )));
        }
        let cols = self.side.columns();
        let mut cells = self.cells.clone();
        for (r, row) in self.rows().enumerate() {
            let to = perm.apply(r);
            cells[to * cols..(to + 1) * cols].copy_from_slice(row);
        }
        Ok(DesignArray {
            side: self.side,
            cells,
        })
    }

    /// Column `j` (1-based) moves to column `2n - j`; the windows swap roles.
    pub fn reflect_horizontal(&self) -> Self {
        let cells = self
            .rows()
            .flat_map(|row| row.iter().rev().copied())
            .collect();
        DesignArray {
            side: self.side,
            cells,
        }
    }

    /// Column `c` moves to `perm(c)`. The permutation runs over all columns
    /// but may only move non-middle columns of the chosen window.
    pub fn permute_window_columns(
        &self,
        window: Window,
        perm: &Permutation,
    ) -> Result<Self, DesignError> {
        let side = self.side;
        if perm.len() != side.columns() {
            return Err(DesignError::BadPermutation(format!(
                "column permutation needs {} columns, got {}",
                side.columns(),
                perm.len()
            )));
        }
        let mid = side.middle_column();
        if perm.apply(mid) != mid {
            return Err(DesignError::MiddleColumnMoved(mid + 1));
        }
        for c in 0..side.columns() {
            let inside = match window {
                Window::Front => c < mid,
                Window::Back => c > mid,
            };
            if !inside && perm.apply(c) != c {
                return Err(DesignError::OutOfWindow(c + 1));
            }
        }
        let cols = side.columns();
        let mut cells = self.cells.clone();
        for r in 0..side.rows() {
            for c in 0..cols {
                cells[r * cols + perm.apply(c)] = self.cells[r * cols + c];
            }
        }
        Ok(DesignArray { side, cells })
    }
}

impl fmt::Display for DesignArray {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&crate::io::emit_text(self))
    }
}
