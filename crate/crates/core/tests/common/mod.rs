//! Test-only helpers shared by the integration suites. The validity
//! predicate here restates the definition directly and does not call into
//! the library's verifier.

#![allow(dead_code)]

use std::collections::HashSet;

use pbtd::{DesignArray, Pair, Permutation, Side, Window};
use rand::Rng;

/// Direct check of the definition on raw rows of `(a, b)` cells.
pub fn is_pbtd(rows: &[Vec<(u32, u32)>]) -> bool {
    let n = rows.len();
    let v = 2 * n as u32;
    let cols = 2 * n - 1;
    if rows.iter().any(|r| r.len() != cols) {
        return false;
    }
    let factor = |cells: &[(u32, u32)]| {
        let mut seen = HashSet::new();
        cells
            .iter()
            .all(|&(a, b)| a != b && seen.insert(a) && seen.insert(b))
            && seen.len() == v as usize
    };
    let mut pairs = HashSet::new();
    for row in rows {
        for &(a, b) in row {
            if a == b || a >= v || b >= v || !pairs.insert((a.min(b), a.max(b))) {
                return false;
            }
        }
    }
    if pairs.len() != n * cols {
        return false;
    }
    for c in 0..cols {
        let column: Vec<(u32, u32)> = rows.iter().map(|r| r[c]).collect();
        if !factor(&column) {
            return false;
        }
    }
    for row in rows {
        for e in 0..v {
            if row.iter().filter(|&&(a, b)| a == e || b == e).count() > 2 {
                return false;
            }
        }
        if !factor(&row[..n]) || !factor(&row[n - 1..]) {
            return false;
        }
    }
    true
}

pub fn raw_rows(d: &DesignArray) -> Vec<Vec<(u32, u32)>> {
    d.rows()
        .map(|r| r.iter().map(|p| (p.low(), p.high())).collect())
        .collect()
}

/// Window defect cost computed from the realized array alone.
pub fn window_defect(d: &DesignArray) -> usize {
    let n = d.side().n();
    let v = d.side().elements();
    d.rows()
        .map(|row| {
            let distinct = |cells: &[Pair]| {
                cells
                    .iter()
                    .flat_map(|p| p.elements())
                    .collect::<HashSet<u32>>()
                    .len()
            };
            (v - distinct(&row[..n])) + (v - distinct(&row[n - 1..]))
        })
        .sum()
}

/// Any shape-valid design: every cell an arbitrary pair, repeats allowed.
pub fn random_design<R: Rng>(side: Side, rng: &mut R) -> DesignArray {
    let v = side.elements() as u32;
    let cells = (0..side.pair_count())
        .map(|_| {
            let a = rng.gen_range(0..v);
            let mut b = rng.gen_range(0..v - 1);
            if b >= a {
                b += 1;
            }
            Pair::new(a, b).unwrap()
        })
        .collect();
    DesignArray::from_cells(side, cells).unwrap()
}

#[derive(Debug, Clone)]
pub enum Symmetry {
    Relabel(Permutation),
    Rows(Permutation),
    Reflect,
    WindowColumns(Window, Permutation),
}

impl Symmetry {
    pub fn apply(&self, d: &DesignArray) -> DesignArray {
        match self {
            Symmetry::Relabel(p) => d.relabel(p).unwrap(),
            Symmetry::Rows(p) => d.permute_rows(p).unwrap(),
            Symmetry::Reflect => d.reflect_horizontal(),
            Symmetry::WindowColumns(w, p) => d.permute_window_columns(*w, p).unwrap(),
        }
    }
}

/// A random permutation of all columns that only moves the non-middle
/// columns of `window`.
pub fn window_perm<R: Rng>(side: Side, window: Window, rng: &mut R) -> Permutation {
    let n = side.n();
    let range = match window {
        Window::Front => 0..n - 1,
        Window::Back => n..2 * n - 1,
    };
    let inner = Permutation::random(range.len(), rng);
    let mut mapping: Vec<usize> = (0..side.columns()).collect();
    for (i, c) in range.clone().enumerate() {
        mapping[c] = range.start + inner.apply(i);
    }
    Permutation::new(mapping).unwrap()
}

pub fn random_symmetry<R: Rng>(side: Side, rng: &mut R) -> Symmetry {
    match rng.gen_range(0..4) {
        0 => Symmetry::Relabel(Permutation::random(side.elements(), rng)),
        1 => Symmetry::Rows(Permutation::random(side.rows(), rng)),
        2 => Symmetry::Reflect,
        _ => {
            let w = if rng.gen_bool(0.5) {
                Window::Front
            } else {
                Window::Back
            };
            Symmetry::WindowColumns(w, window_perm(side, w, rng))
        }
    }
}

pub fn random_composition<R: Rng>(side: Side, rng: &mut R) -> Vec<Symmetry> {
    let len = rng.gen_range(1..=6);
    (0..len).map(|_| random_symmetry(side, rng)).collect()
}

pub fn apply_all(d: &DesignArray, syms: &[Symmetry]) -> DesignArray {
    syms.iter().fold(d.clone(), |acc, s| s.apply(&acc))
}

/// Calls `f` on every permutation of `items` (Heap's algorithm).
pub fn for_each_permutation<T: Clone>(items: &mut [T], f: &mut impl FnMut(&[T])) {
    let n = items.len();
    let mut c = vec![0usize; n];
    f(items);
    let mut i = 0;
    while i < n {
        if c[i] < i {
            if i % 2 == 0 {
                items.swap(0, i);
            } else {
                items.swap(c[i], i);
            }
            f(items);
            c[i] += 1;
            i = 0;
        } else {
            c[i] = 0;
            i += 1;
        }
    }
}
