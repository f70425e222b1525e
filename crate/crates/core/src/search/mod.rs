//! Design construction and small-side nonexistence proofs.
//!
//! Two engines: a complete depth-first [`backtrack`] search, which can
//! certify that no design exists, and a simulated-annealing [`anneal`]
//! search over column-structured states, which scales constructively.
//! Every `Found` design has passed [`verify`](crate::verify::verify) before
//! it is returned.

pub mod anneal;
pub mod backtrack;

use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::{mpsc, Arc};
use std::thread;
use std::time::{Duration, Instant};

use thiserror::Error;

use crate::design::{DesignArray, Pair, Side};
use crate::verify::verify;

pub use anneal::{anneal_search, anneal_search_from, ColumnStructuredState};
pub use backtrack::{backtrack_search, count_solutions, PartialDesign, SolutionCount};

/// Largest side the bitmask engines support (`2n <= 64` labels).
pub const MAX_SEARCH_SIDE: usize = 32;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SearchError {
    #[error("invalid search configuration: {0}")]
    Config(String),
    #[error("internal error: engine produced an unverified design: {0}")]
    Unsound(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Engine {
    Backtrack,
    Anneal,
}

/// How new pairs are seated after a cycle switch.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Reassignment {
    /// Least added cost first, ties to the lowest row.
    Greedy,
    Random,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AnnealParams {
    pub initial_temperature: f64,
    pub cooling_factor: f64,
    /// `None` means `200 * n`.
    pub moves_per_temperature: Option<u64>,
    /// Non-improving temperature epochs tolerated before a restart.
    pub restart_limit: u64,
    /// Probability that a move is a cycle switch rather than a row swap.
    pub cycle_switch_rate: f64,
    pub reassignment: Reassignment,
}

impl Default for AnnealParams {
    fn default() -> Self {
        AnnealParams {
            initial_temperature: 2.0,
            cooling_factor: 0.97,
            moves_per_temperature: None,
            restart_limit: 50,
            cycle_switch_rate: 0.1,
            reassignment: Reassignment::Greedy,
        }
    }
}

impl AnnealParams {
    pub fn moves_per_temperature(&self, side: Side) -> u64 {
        self.moves_per_temperature.unwrap_or(200 * side.n() as u64)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SearchConfig {
    pub engine: Engine,
    pub seed: u64,
    /// Wall-clock budget; `None` is unbounded.
    pub time_budget: Option<Duration>,
    pub symmetry_break: bool,
    pub anneal: AnnealParams,
    /// Stop counting after this many solutions; `None` is unbounded.
    pub solution_limit: Option<u64>,
    /// Cap on nodes (backtrack) or moves (anneal). Gives reproducible
    /// bounded runs independent of machine speed.
    pub step_limit: Option<u64>,
}

impl Default for SearchConfig {
    fn default() -> Self {
        SearchConfig {
            engine: Engine::Anneal,
            seed: 0,
            time_budget: Some(Duration::from_secs(60)),
            symmetry_break: false,
            anneal: AnnealParams::default(),
            solution_limit: None,
            step_limit: None,
        }
    }
}

impl SearchConfig {
    pub fn backtrack() -> Self {
        SearchConfig {
            engine: Engine::Backtrack,
            ..Default::default()
        }
    }

    pub fn anneal(seed: u64) -> Self {
        SearchConfig {
            engine: Engine::Anneal,
            seed,
            ..Default::default()
        }
    }

    pub fn unbounded(mut self) -> Self {
        self.time_budget = None;
        self
    }

    pub fn validate(&self) -> Result<(), SearchError> {
        if self.time_budget == Some(Duration::ZERO) {
            return Err(SearchError::Config("time budget must be positive".into()));
        }
        if self.solution_limit == Some(0) {
            return Err(SearchError::Config(
                "solution limit must be positive".into(),
            ));
        }
        if self.step_limit == Some(0) {
            return Err(SearchError::Config("step limit must be positive".into()));
        }
        let a = &self.anneal;
        if !(a.initial_temperature > 0.0 && a.initial_temperature.is_finite()) {
            return Err(SearchError::Config(
                "initial temperature must be positive".into(),
            ));
        }
        if !(a.cooling_factor > 0.0 && a.cooling_factor < 1.0) {
            return Err(SearchError::Config(
                "cooling factor must lie in (0, 1)".into(),
            ));
        }
        if a.moves_per_temperature == Some(0) {
            return Err(SearchError::Config(
                "moves per temperature must be positive".into(),
            ));
        }
        if !(0.0..=1.0).contains(&a.cycle_switch_rate) {
            return Err(SearchError::Config(
                "cycle switch rate must lie in [0, 1]".into(),
            ));
        }
        Ok(())
    }
}

pub(crate) fn check_side(side: Side) -> Result<(), SearchError> {
    if side.n() > MAX_SEARCH_SIDE {
        return Err(SearchError::Config(format!(
            "side {} exceeds the supported maximum {MAX_SEARCH_SIDE}",
            side.n()
        )));
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Outcome {
    Found(DesignArray),
    /// The complete engine exhausted its tree: no design exists.
    ExhaustedNoSolution,
    /// Budget ran out. For annealing `best_cost` is the lowest cost seen;
    /// for backtracking it is the fewest empty cells at any node.
    TimedOut {
        best_cost: usize,
        best: Option<DesignArray>,
    },
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct SearchStats {
    /// Nodes for backtracking, moves for annealing.
    pub explored: u64,
    pub elapsed: Duration,
    pub restarts: u64,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SearchOutcome {
    pub outcome: Outcome,
    pub stats: SearchStats,
}

impl SearchOutcome {
    pub fn found(&self) -> Option<&DesignArray> {
        match &self.outcome {
            Outcome::Found(d) => Some(d),
            _ => None,
        }
    }
}

/// Returns the design only if the verifier accepts it.
pub(crate) fn certify(design: DesignArray) -> Result<Outcome, SearchError> {
    let report = verify(&design);
    if !report.valid {
        return Err(SearchError::Unsound(format!(
            "{} violations",
            report.violations.len()
        )));
    }
    Ok(Outcome::Found(design))
}

/// Budget bookkeeping shared by both engines.
pub(crate) struct Budget<'a> {
    start: Instant,
    deadline: Option<Instant>,
    step_limit: Option<u64>,
    stop: &'a AtomicBool,
}

impl<'a> Budget<'a> {
    pub(crate) fn new(config: &SearchConfig, stop: &'a AtomicBool) -> Self {
        let start = Instant::now();
        Budget {
            start,
            deadline: config.time_budget.map(|d| start + d),
            step_limit: config.step_limit,
            stop,
        }
    }

    /// Cheap check for the step cap; clock and stop flag are polled every
    /// 1024 steps.
    pub(crate) fn exhausted(&self, steps: u64) -> bool {
        if self.step_limit.is_some_and(|l| steps >= l) {
            return true;
        }
        if !steps.is_multiple_of(1024) {
            return false;
        }
        self.stop.load(Ordering::Relaxed) || self.deadline.is_some_and(|d| Instant::now() >= d)
    }

    pub(crate) fn elapsed(&self) -> Duration {
        self.start.elapsed()
    }
}

/// Circle-method 1-factorization of `K_{2n}`. Matching `k` is
/// `{k, 2n-1}` plus `{(k-i) mod (2n-1), (k+i) mod (2n-1)}` for
/// `i = 1..n-1`; column `j` receives matching `(j + rotation) mod (2n-1)`.
pub fn round_robin_factorization(side: Side, rotation: usize) -> Vec<Vec<Pair>> {
    let m = side.columns();
    let fixed = m as u32;
    (0..m)
        .map(|j| {
            let k = (j + rotation) % m;
            let mut matching = vec![Pair::new(k as u32, fixed).expect("k < 2n-1")];
            for i in 1..side.n() {
                let a = (k + m - i) % m;
                let b = (k + i) % m;
                matching.push(Pair::new(a as u32, b as u32).expect("i < n keeps a != b"));
            }
            matching
        })
        .collect()
}

/// Runs the engine named in `config`.
pub fn search(side: Side, config: &SearchConfig) -> Result<SearchOutcome, SearchError> {
    match config.engine {
        Engine::Backtrack => backtrack_search(side, config),
        Engine::Anneal => anneal_search(side, config),
    }
}

/// Runs `workers` annealers with seeds `seed, seed+1, ...` concurrently and
/// returns the first verified design. Which worker wins is not
/// deterministic; if none finds a design the lowest-cost timeout is
/// returned.
pub fn portfolio_search(
    side: Side,
    config: &SearchConfig,
    workers: usize,
) -> Result<SearchOutcome, SearchError> {
    if config.engine != Engine::Anneal {
        return Err(SearchError::Config(
            "portfolio mode requires the anneal engine".into(),
        ));
    }
    if workers == 0 {
        return Err(SearchError::Config(
            "portfolio needs at least one worker".into(),
        ));
    }
    config.validate()?;
    check_side(side)?;
    let stop = Arc::new(AtomicBool::new(false));
    let (tx, rx) = mpsc::channel();
    let handles: Vec<_> = (0..workers)
        .map(|i| {
            let mut cfg = config.clone();
            cfg.seed = config.seed.wrapping_add(i as u64);
            let (stop, tx) = (Arc::clone(&stop), tx.clone());
            thread::spawn(move || {
                let result = anneal::run(side, &cfg, None, &stop);
                if matches!(
                    result,
                    Ok(SearchOutcome {
                        outcome: Outcome::Found(_),
                        ..
                    })
                ) {
                    stop.store(true, Ordering::Relaxed);
                }
                let _ = tx.send(result);
            })
        })
        .collect();
    drop(tx);

    let mut best: Option<SearchOutcome> = None;
    for result in rx {
        let result = result?;
        if result.found().is_some() {
            stop.store(true, Ordering::Relaxed);
            best = Some(result);
            break;
        }
        let better = match (&best, &result.outcome) {
            (None, _) => true,
            (
                Some(SearchOutcome {
                    outcome: Outcome::TimedOut { best_cost: old, .. },
                    ..
                }),
                Outcome::TimedOut { best_cost, .. },
            ) => best_cost < old,
            _ => false,
        };
        if better {
            best = Some(result);
        }
    }
    for h in handles {
        let _ = h.join();
    }
    Ok(best.expect("at least one worker reports"))
}
