//! Complete depth-first search over cells in column-major order.
//!
//! A cell's candidates are the globally unused pairs whose elements are
//! free in the cell's column and in every window of its row that contains
//! the column. Each rule is implied by a clause of the definition, so an
//! exhausted tree is a nonexistence proof.

use std::sync::atomic::AtomicBool;

use crate::design::{DesignArray, Pair, Side};
use crate::search::{
    certify, check_side, Budget, Engine, Outcome, SearchConfig, SearchError, SearchOutcome,
    SearchStats,
};

/// Grid of optional pairs with usage bitmasks for every constraint.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PartialDesign {
    side: Side,
    grid: Vec<Option<Pair>>,
    used_pairs: Vec<bool>,
    column_used: Vec<u64>,
    front_used: Vec<u64>,
    back_used: Vec<u64>,
    filled: usize,
}

fn bit(e: u32) -> u64 {
    1u64 << e
}

fn pair_mask(p: Pair) -> u64 {
    bit(p.low()) | bit(p.high())
}

impl PartialDesign {
    pub fn new(side: Side) -> Result<Self, SearchError> {
        check_side(side)?;
        let v = side.elements();
        Ok(PartialDesign {
            side,
            grid: vec![None; side.pair_count()],
            used_pairs: vec![false; v * v],
            column_used: vec![0; side.columns()],
            front_used: vec![0; side.rows()],
            back_used: vec![0; side.rows()],
            filled: 0,
        })
    }

    pub fn side(&self) -> Side {
        self.side
    }

    pub fn get(&self, row: usize, col: usize) -> Option<Pair> {
        self.grid[row * self.side.columns() + col]
    }

    pub fn filled(&self) -> usize {
        self.filled
    }

    fn full_mask(&self) -> u64 {
        let v = self.side.elements();
        if v == 64 {
            u64::MAX
        } else {
            (1u64 << v) - 1
        }
    }

    /// Elements that may still appear in cell `(row, col)`.
    pub fn free_elements(&self, row: usize, col: usize) -> u64 {
        let mut blocked = self.column_used[col];
        if self.side.in_front(col) {
            blocked |= self.front_used[row];
        }
        if self.side.in_back(col) {
            blocked |= self.back_used[row];
        }
        !blocked & self.full_mask()
    }

    pub fn is_candidate(&self, row: usize, col: usize, p: Pair) -> bool {
        let free = self.free_elements(row, col);
        self.get(row, col).is_none()
            && (p.high() as usize) < self.side.elements()
            && free & pair_mask(p) == pair_mask(p)
            && !self.used_pairs[p.index(self.side.elements())]
    }

    /// Candidate pairs in lexicographic order.
    pub fn candidates(&self, row: usize, col: usize) -> Vec<Pair> {
        let mut out = Vec::new();
        self.for_each_candidate(row, col, |p| {
            out.push(p);
            true
        });
        out
    }

    /// Calls `f` on each candidate in lexicographic order until it returns
    /// false. Returns false if stopped early.
    fn for_each_candidate(&self, row: usize, col: usize, mut f: impl FnMut(Pair) -> bool) -> bool {
        let v = self.side.elements();
        let free = self.free_elements(row, col);
        let mut rest = free;
        while rest != 0 {
            let a = rest.trailing_zeros();
            rest &= rest - 1;
            let mut partners = rest;
            while partners != 0 {
                let b = partners.trailing_zeros();
                partners &= partners - 1;
                if !self.used_pairs[a as usize * v + b as usize] {
                    let p = Pair::new(a, b).expect("a < b");
                    if !f(p) {
                        return false;
                    }
                }
            }
        }
        true
    }

    pub fn place(&mut self, row: usize, col: usize, p: Pair) -> Result<(), SearchError> {
        if !self.is_candidate(row, col, p) {
            return Err(SearchError::Config(format!(
                "pair {p} is not a candidate for cell ({}, {})",
                row + 1,
                col + 1
            )));
        }
        self.place_unchecked(row, col, p);
        Ok(())
    }

    fn place_unchecked(&mut self, row: usize, col: usize, p: Pair) {
        let m = pair_mask(p);
        let v = self.side.elements();
        self.grid[row * self.side.columns() + col] = Some(p);
        self.used_pairs[p.index(v)] = true;
        self.column_used[col] |= m;
        if self.side.in_front(col) {
            self.front_used[row] |= m;
        }
        if self.side.in_back(col) {
            self.back_used[row] |= m;
        }
        self.filled += 1;
    }

    pub fn unplace(&mut self, row: usize, col: usize) -> Option<Pair> {
        let idx = row * self.side.columns() + col;
        let p = self.grid[idx].take()?;
        let m = pair_mask(p);
        self.used_pairs[p.index(self.side.elements())] = false;
        self.column_used[col] &= !m;
        if self.side.in_front(col) {
            self.front_used[row] &= !m;
        }
        if self.side.in_back(col) {
            self.back_used[row] &= !m;
        }
        self.filled -= 1;
        Some(p)
    }

    /// True iff every bookkeeping structure equals a recount of the grid.
    pub fn audit(&self) -> bool {
        let mut fresh = PartialDesign::new(self.side).expect("side already checked");
        let cols = self.side.columns();
        for (i, cell) in self.grid.iter().enumerate() {
            if let Some(p) = *cell {
                let (r, c) = (i / cols, i % cols);
                if fresh.used_pairs[p.index(self.side.elements())]
                    || fresh.free_elements(r, c) & pair_mask(p) != pair_mask(p)
                {
                    // grid itself breaks a constraint; masks cannot be a
                    // faithful recount of an invalid grid
                    return false;
                }
                fresh.place_unchecked(r, c, p);
            }
        }
        fresh == *self
    }

    #[cfg(test)]
    pub(crate) fn corrupt_column_mask(&mut self, col: usize) {
        self.column_used[col] ^= 1;
    }

    pub fn to_design(&self) -> Option<DesignArray> {
        let cells: Option<Vec<Pair>> = self.grid.iter().copied().collect();
        DesignArray::from_cells(self.side, cells?).ok()
    }
}

enum Flow {
    Continue,
    Stop,
}

struct Searcher<'a> {
    state: PartialDesign,
    order: Vec<(usize, usize)>,
    budget: Budget<'a>,
    nodes: u64,
    best_empty: usize,
    /// Stop once this many solutions are found.
    stop_after: Option<u64>,
    solutions: u64,
    first: Option<DesignArray>,
    out_of_budget: bool,
}

impl Searcher<'_> {
    fn dfs(&mut self, depth: usize) -> Flow {
        if depth == self.order.len() {
            self.solutions += 1;
            if self.first.is_none() {
                self.first = self.state.to_design();
            }
            return match self.stop_after {
                Some(k) if self.solutions >= k => Flow::Stop,
                _ => Flow::Continue,
            };
        }
        let (row, col) = self.order[depth];
        let candidates = self.state.candidates(row, col);
        for p in candidates {
            self.nodes += 1;
            if self.budget.exhausted(self.nodes) {
                self.out_of_budget = true;
                return Flow::Stop;
            }
            self.state.place_unchecked(row, col, p);
            let empty = self.order.len() - depth - 1;
            self.best_empty = self.best_empty.min(empty);
            let flow = self.dfs(depth + 1);
            self.state.unplace(row, col);
            if let Flow::Stop = flow {
                return Flow::Stop;
            }
        }
        Flow::Continue
    }
}

fn build_searcher<'a>(
    side: Side,
    config: &SearchConfig,
    stop: &'a AtomicBool,
    stop_after: Option<u64>,
) -> Result<Searcher<'a>, SearchError> {
    config.validate()?;
    let mut state = PartialDesign::new(side)?;
    let mid = side.middle_column();
    if config.symmetry_break {
        for r in 0..side.rows() {
            let p = Pair::new(2 * r as u32, 2 * r as u32 + 1).expect("distinct");
            state.place(r, mid, p)?;
        }
    }
    let order: Vec<(usize, usize)> = (0..side.columns())
        .filter(|&c| !(config.symmetry_break && c == mid))
        .flat_map(|c| (0..side.rows()).map(move |r| (r, c)))
        .collect();
    let best_empty = order.len();
    Ok(Searcher {
        state,
        order,
        budget: Budget::new(config, stop),
        nodes: 0,
        best_empty,
        stop_after,
        solutions: 0,
        first: None,
        out_of_budget: false,
    })
}

fn require_backtrack(config: &SearchConfig) -> Result<(), SearchError> {
    if config.engine != Engine::Backtrack {
        return Err(SearchError::Config(
            "this operation needs the backtrack engine".into(),
        ));
    }
    Ok(())
}

/// Returns the first design in search order, or proves none exists.
pub fn backtrack_search(side: Side, config: &SearchConfig) -> Result<SearchOutcome, SearchError> {
    require_backtrack(config)?;
    let stop = AtomicBool::new(false);
    let mut s = build_searcher(side, config, &stop, Some(1))?;
    s.dfs(0);
    let stats = SearchStats {
        explored: s.nodes,
        elapsed: s.budget.elapsed(),
        restarts: 0,
    };
    log::info!(
        "backtrack n={side}: {} nodes in {:?}",
        stats.explored,
        stats.elapsed
    );
    let outcome = match s.first.take() {
        Some(design) => certify(design)?,
        None if s.out_of_budget => Outcome::TimedOut {
            best_cost: s.best_empty,
            best: None,
        },
        None => Outcome::ExhaustedNoSolution,
    };
    Ok(SearchOutcome { outcome, stats })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SolutionCount {
    pub count: u64,
    /// The count is exact: the tree was exhausted before exceeding the
    /// limit and before the budget ran out.
    pub complete: bool,
    pub nodes: u64,
}

/// Counts solutions up to `limit` (falling back to the config's
/// `solution_limit`). With symmetry breaking on, solutions are counted
/// with the middle column normalized, so counts are not orbit counts.
pub fn count_solutions(
    side: Side,
    config: &SearchConfig,
    limit: Option<u64>,
) -> Result<SolutionCount, SearchError> {
    require_backtrack(config)?;
    let limit = limit.or(config.solution_limit);
    if limit == Some(0) {
        return Err(SearchError::Config(
            "solution limit must be positive".into(),
        ));
    }
    let stop = AtomicBool::new(false);
    // Search for one past the limit so that hitting exactly `limit`
    // solutions on an exhausted tree still reports an exact count.
    let mut s = build_searcher(side, config, &stop, limit.map(|l| l + 1))?;
    s.dfs(0);
    let over = limit.is_some_and(|l| s.solutions > l);
    if let Some(design) = s.first.take() {
        certify(design)?;
    }
    Ok(SolutionCount {
        count: limit.map_or(s.solutions, |l| s.solutions.min(l)),
        complete: !over && !s.out_of_budget,
        nodes: s.nodes,
    })
}
