//! Simulated annealing over column-structured states.
//!
//! Every column of a state is a perfect matching and the columns together
//! partition all pairs, so the column and coverage clauses hold by
//! construction. The cost counts the elements missing from each row's two
//! windows; zero cost is exactly a valid design.
//!
//! Moves:
//! - row swap: exchange two cells of one column;
//! - cycle switch: in the union of two columns (a disjoint union of even
//!   alternating cycles), move one cycle's pairs to the other column, then
//!   seat the incoming pairs in the vacated rows.

use std::sync::atomic::AtomicBool;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::design::{DesignArray, Pair, Side};
use crate::search::{
    certify, check_side, round_robin_factorization, Budget, Engine, Outcome, Reassignment,
    SearchConfig, SearchError, SearchOutcome, SearchStats,
};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum StateError {
    #[error("column {0} is not a perfect matching")]
    NotMatching(usize),
    #[error("pair {0} appears in more than one column")]
    RepeatedPair(Pair),
    #[error("side too large for the search engines")]
    TooLarge,
}

/// Columns stored contiguously: cell `(r, c)` lives at `c * n + r`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ColumnStructuredState {
    side: Side,
    grid: Vec<Pair>,
    front: Vec<u16>,
    back: Vec<u16>,
    front_distinct: Vec<usize>,
    back_distinct: Vec<usize>,
    cost: usize,
}

/// Enough to restore the state after a rejected move.
#[derive(Debug, Clone)]
pub enum Move {
    Swap {
        col: usize,
        a: usize,
        b: usize,
    },
    Switch {
        removed: Vec<(usize, usize, Pair)>,
        added: Vec<(usize, usize, Pair)>,
    },
}

impl ColumnStructuredState {
    /// `columns[c][r]` is the pair seated at row `r` of column `c`.
    pub fn from_columns(side: Side, columns: Vec<Vec<Pair>>) -> Result<Self, StateError> {
        if side.n() > super::MAX_SEARCH_SIDE {
            return Err(StateError::TooLarge);
        }
        let (n, v) = (side.n(), side.elements());
        if columns.len() != side.columns() {
            return Err(StateError::NotMatching(
                columns.len().min(side.columns()) + 1,
            ));
        }
        let mut seen = vec![false; v * v];
        for (c, col) in columns.iter().enumerate() {
            let mut hit = vec![false; v];
            let ok = col.len() == n
                && col
                    .iter()
                    .flat_map(|p| p.elements())
                    .all(|e| (e as usize) < v && !std::mem::replace(&mut hit[e as usize], true));
            if !ok {
                return Err(StateError::NotMatching(c + 1));
            }
            for p in col {
                if std::mem::replace(&mut seen[p.index(v)], true) {
                    return Err(StateError::RepeatedPair(*p));
                }
            }
        }
        let grid: Vec<Pair> = columns.into_iter().flatten().collect();
        let mut state = ColumnStructuredState {
            side,
            grid,
            front: vec![0; n * v],
            back: vec![0; n * v],
            front_distinct: vec![0; n],
            back_distinct: vec![0; n],
            cost: 2 * n * v,
        };
        for c in 0..side.columns() {
            for r in 0..n {
                state.add(r, c, state.grid[c * n + r]);
            }
        }
        Ok(state)
    }

    /// Fails unless every column of `design` is a perfect matching and no
    /// pair repeats.
    pub fn from_design(design: &DesignArray) -> Result<Self, StateError> {
        let side = design.side();
        let columns = (0..side.columns())
            .map(|c| design.column(c).collect())
            .collect();
        Self::from_columns(side, columns)
    }

    /// Circle-method factorization with each column's pairs shuffled over
    /// the rows.
    pub fn random<R: Rng + ?Sized>(side: Side, rotation: usize, rng: &mut R) -> Self {
        let mut columns = round_robin_factorization(side, rotation);
        for col in &mut columns {
            col.shuffle(rng);
        }
        Self::from_columns(side, columns).expect("circle method yields a 1-factorization")
    }

    pub fn side(&self) -> Side {
        self.side
    }

    pub fn get(&self, row: usize, col: usize) -> Pair {
        self.grid[col * self.side.n() + row]
    }

    pub fn column(&self, col: usize) -> &[Pair] {
        let n = self.side.n();
        &self.grid[col * n..(col + 1) * n]
    }

    /// Cached total defect.
    pub fn cost(&self) -> usize {
        self.cost
    }

    /// Per-row `(front defect, back defect)`.
    pub fn row_defects(&self, row: usize) -> (usize, usize) {
        let v = self.side.elements();
        (v - self.front_distinct[row], v - self.back_distinct[row])
    }

    pub fn realize(&self) -> DesignArray {
        let (n, cols) = (self.side.n(), self.side.columns());
        let cells = (0..n)
            .flat_map(|r| (0..cols).map(move |c| (r, c)))
            .map(|(r, c)| self.get(r, c))
            .collect();
        DesignArray::from_cells(self.side, cells).expect("state shape matches side")
    }

    fn bump(&mut self, row: usize, col: usize, p: Pair, up: bool) {
        let v = self.side.elements();
        let windows = [
            (
                self.side.in_front(col),
                &mut self.front,
                &mut self.front_distinct,
            ),
            (
                self.side.in_back(col),
                &mut self.back,
                &mut self.back_distinct,
            ),
        ];
        for (inside, counts, distinct) in windows {
            if !inside {
                continue;
            }
            for e in p.elements() {
                let slot = &mut counts[row * v + e as usize];
                if up {
                    if *slot == 0 {
                        distinct[row] += 1;
                        self.cost -= 1;
                    }
                    *slot += 1;
                } else {
                    *slot -= 1;
                    if *slot == 0 {
                        distinct[row] -= 1;
                        self.cost += 1;
                    }
                }
            }
        }
    }

    fn add(&mut self, row: usize, col: usize, p: Pair) {
        self.grid[col * self.side.n() + row] = p;
        self.bump(row, col, p, true);
    }

    /// Drops the counts for the cell; the grid entry is left stale until
    /// the next `add` overwrites it.
    fn remove(&mut self, row: usize, col: usize) -> Pair {
        let p = self.grid[col * self.side.n() + row];
        self.bump(row, col, p, false);
        p
    }

    /// Cost change from seating `p` at `(row, col)` given current counts.
    fn seat_delta(&self, row: usize, col: usize, p: Pair) -> isize {
        let v = self.side.elements();
        let mut gain = 0;
        for e in p.elements() {
            let e = e as usize;
            if self.side.in_front(col) && self.front[row * v + e] == 0 {
                gain += 1;
            }
            if self.side.in_back(col) && self.back[row * v + e] == 0 {
                gain += 1;
            }
        }
        -gain
    }

    /// Swaps rows `a` and `b` within column `col`.
    pub fn swap_rows(&mut self, col: usize, a: usize, b: usize) -> Move {
        if a != b {
            let pa = self.remove(a, col);
            let pb = self.remove(b, col);
            self.add(a, col, pb);
            self.add(b, col, pa);
        }
        Move::Swap { col, a, b }
    }

    /// Alternating cycle through `start` in the union of columns `c1` and
    /// `c2`, as `(column, row)` cells in traversal order.
    pub fn alternating_cycle(&self, c1: usize, c2: usize, start: u32) -> Vec<(usize, usize)> {
        let v = self.side.elements();
        let mut row_of = [vec![0usize; v], vec![0usize; v]];
        let mut mate = [vec![0u32; v], vec![0u32; v]];
        for (k, &c) in [c1, c2].iter().enumerate() {
            for (r, p) in self.column(c).iter().enumerate() {
                row_of[k][p.low() as usize] = r;
                row_of[k][p.high() as usize] = r;
                mate[k][p.low() as usize] = p.high();
                mate[k][p.high() as usize] = p.low();
            }
        }
        let mut cells = Vec::new();
        let mut x = start;
        let mut k = 0;
        loop {
            cells.push(([c1, c2][k], row_of[k][x as usize]));
            x = mate[k][x as usize];
            k ^= 1;
            if x == start && k == 0 {
                break;
            }
        }
        cells
    }

    /// Moves the alternating cycle through `start` across columns `c1` and
    /// `c2` and seats the incoming pairs in the rows the outgoing pairs
    /// vacated.
    pub fn cycle_switch<R: Rng + ?Sized>(
        &mut self,
        c1: usize,
        c2: usize,
        start: u32,
        reassignment: Reassignment,
        rng: &mut R,
    ) -> Move {
        let cycle = self.alternating_cycle(c1, c2, start);
        let removed: Vec<(usize, usize, Pair)> =
            cycle.iter().map(|&(c, r)| (c, r, self.get(r, c))).collect();
        for &(c, r, _) in &removed {
            self.remove(r, c);
        }
        let mut added = Vec::with_capacity(removed.len());
        for (to, from) in [(c1, c2), (c2, c1)] {
            let mut rows: Vec<usize> = removed.iter().filter(|e| e.0 == to).map(|e| e.1).collect();
            let incoming: Vec<Pair> = removed
                .iter()
                .filter(|e| e.0 == from)
                .map(|e| e.2)
                .collect();
            rows.sort_unstable();
            if reassignment == Reassignment::Random {
                rows.shuffle(rng);
            }
            for p in incoming {
                let pick = match reassignment {
                    Reassignment::Random => rows.len() - 1,
                    Reassignment::Greedy => {
                        // min_by_key keeps the first (lowest row) on ties
                        let (i, _) = rows
                            .iter()
                            .enumerate()
                            .min_by_key(|&(_, &r)| self.seat_delta(r, to, p))
                            .expect("as many rows as pairs");
                        i
                    }
                };
                let r = rows.remove(pick);
                self.add(r, to, p);
                added.push((to, r, p));
            }
        }
        Move::Switch { removed, added }
    }

    pub fn undo(&mut self, mv: Move) {
        match mv {
            Move::Swap { col, a, b } => {
                self.swap_rows(col, a, b);
            }
            Move::Switch { removed, added } => {
                for &(c, r, _) in &added {
                    self.remove(r, c);
                }
                for (c, r, p) in removed {
                    self.add(r, c, p);
                }
            }
        }
    }

    /// Applies a random legal move. `None` when the side admits no move.
    pub fn random_move<R: Rng + ?Sized>(
        &mut self,
        cycle_switch_rate: f64,
        reassignment: Reassignment,
        rng: &mut R,
    ) -> Option<Move> {
        let (n, cols) = (self.side.n(), self.side.columns());
        if n < 2 {
            return None;
        }
        if rng.gen_bool(cycle_switch_rate) {
            let c1 = rng.gen_range(0..cols);
            let mut c2 = rng.gen_range(0..cols - 1);
            if c2 >= c1 {
                c2 += 1;
            }
            let start = rng.gen_range(0..self.side.elements() as u32);
            Some(self.cycle_switch(c1, c2, start, reassignment, rng))
        } else {
            let col = rng.gen_range(0..cols);
            let a = rng.gen_range(0..n);
            let mut b = rng.gen_range(0..n - 1);
            if b >= a {
                b += 1;
            }
            Some(self.swap_rows(col, a, b))
        }
    }

    /// Cost computed from scratch, ignoring every cache.
    pub fn recompute_cost(&self) -> usize {
        let (n, v) = (self.side.n(), self.side.elements());
        let mut total = 0;
        for r in 0..n {
            for in_window in [Side::in_front, Side::in_back] {
                let mut seen = vec![false; v];
                for c in (0..self.side.columns()).filter(|&c| in_window(self.side, c)) {
                    for e in self.get(r, c).elements() {
                        seen[e as usize] = true;
                    }
                }
                total += seen.iter().filter(|&&s| !s).count();
            }
        }
        total
    }

    /// True iff the cached counts and cost equal a rebuild from the grid and
    /// the column-structure invariants still hold.
    pub fn audit(&self) -> bool {
        let n = self.side.n();
        let columns = (0..self.side.columns())
            .map(|c| self.column(c).to_vec())
            .collect();
        match Self::from_columns(self.side, columns) {
            Ok(fresh) => {
                fresh == *self
                    && fresh.cost == self.recompute_cost()
                    && self.grid.len() == n * self.side.columns()
            }
            Err(_) => false,
        }
    }

    #[cfg(test)]
    pub(crate) fn corrupt_cost(&mut self) {
        self.cost += 1;
    }
}

/// Cached total defect of a state.
pub fn cost(state: &ColumnStructuredState) -> usize {
    state.cost()
}

/// Anneals from a fresh seeded state.
pub fn anneal_search(side: Side, config: &SearchConfig) -> Result<SearchOutcome, SearchError> {
    let stop = AtomicBool::new(false);
    run(side, config, None, &stop)
}

/// Anneals starting from `initial`. Restarts still draw fresh states.
pub fn anneal_search_from(
    initial: ColumnStructuredState,
    config: &SearchConfig,
) -> Result<SearchOutcome, SearchError> {
    let stop = AtomicBool::new(false);
    run(initial.side(), config, Some(initial), &stop)
}

pub(crate) fn run(
    side: Side,
    config: &SearchConfig,
    initial: Option<ColumnStructuredState>,
    stop: &AtomicBool,
) -> Result<SearchOutcome, SearchError> {
    if config.engine != Engine::Anneal {
        return Err(SearchError::Config(
            "anneal_search needs the anneal engine".into(),
        ));
    }
    config.validate()?;
    check_side(side)?;
    let params = &config.anneal;
    let budget = Budget::new(config, stop);
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let fresh = |rng: &mut ChaCha8Rng| {
        let rotation = rng.gen_range(0..side.columns());
        ColumnStructuredState::random(side, rotation, rng)
    };
    let mut state = match initial {
        Some(s) => s,
        None => fresh(&mut rng),
    };
    let per_epoch = params.moves_per_temperature(side);
    let mut stats = SearchStats::default();
    let mut best_cost = state.cost();
    let mut best = state.realize();

    let finish = |outcome, mut stats: SearchStats| {
        stats.elapsed = budget.elapsed();
        log::info!(
            "anneal n={side}: {} moves, {} restarts, {:?}",
            stats.explored,
            stats.restarts,
            stats.elapsed
        );
        Ok(SearchOutcome { outcome, stats })
    };

    'restarts: loop {
        let mut temperature = params.initial_temperature;
        let mut run_best = state.cost();
        let mut stale_epochs = 0;
        loop {
            let mut improved = false;
            for _ in 0..per_epoch {
                if state.cost() == 0 {
                    return finish(certify(state.realize())?, stats);
                }
                if budget.exhausted(stats.explored) {
                    return finish(
                        Outcome::TimedOut {
                            best_cost,
                            best: Some(best),
                        },
                        stats,
                    );
                }
                let before = state.cost() as f64;
                let Some(mv) =
                    state.random_move(params.cycle_switch_rate, params.reassignment, &mut rng)
                else {
                    break;
                };
                stats.explored += 1;
                let delta = state.cost() as f64 - before;
                if delta > 0.0 && rng.gen::<f64>() >= (-delta / temperature).exp() {
                    state.undo(mv);
                    continue;
                }
                if state.cost() < run_best {
                    run_best = state.cost();
                    improved = true;
                    if run_best < best_cost {
                        best_cost = run_best;
                        best = state.realize();
                    }
                }
            }
            if state.cost() == 0 {
                return finish(certify(state.realize())?, stats);
            }
            if side.n() < 2 {
                // no moves exist and the state is not a design
                return finish(
                    Outcome::TimedOut {
                        best_cost,
                        best: Some(best),
                    },
                    stats,
                );
            }
            temperature *= params.cooling_factor;
            if improved {
                stale_epochs = 0;
            } else {
                stale_epochs += 1;
            }
            log::debug!("T={temperature:.4} cost={} best={best_cost}", state.cost());
            if stale_epochs > params.restart_limit {
                stats.restarts += 1;
                log::info!("restart {} (best cost so far {best_cost})", stats.restarts);
                state = fresh(&mut rng);
                continue 'restarts;
            }
        }
    }
}
