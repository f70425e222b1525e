//! Acceptance gate. Each test is one criterion and prints a single
//! `ACCEPTANCE <name>: PASS|FAIL` line (run with `--nocapture` to see them).

mod common;

use std::collections::HashSet;
use std::time::{Duration, Instant};

use pbtd::search::anneal::ColumnStructuredState;
use pbtd::search::Reassignment;
use pbtd::verify::{
    check_back_factors, check_column_factors, check_front_factors, check_pair_coverage,
};
use pbtd::{
    anneal_search, backtrack_search, count_solutions, emit_structured, emit_text, parse_structured,
    parse_text, table1, verify, Outcome, Pair, SearchConfig, Side,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use common::*;

fn gate(name: &str, ok: bool, detail: String) {
    println!(
        "ACCEPTANCE {name}: {} ({detail})",
        if ok { "PASS" } else { "FAIL" }
    );
    assert!(ok, "acceptance criterion {name} failed: {detail}");
}

#[test]
fn golden_verification() {
    let t = table1();
    let start = Instant::now();
    let report = verify(&t);
    let elapsed = start.elapsed();
    let pairs: HashSet<Pair> = t.cells().iter().copied().collect();
    let ok = report.valid
        && report.violations.is_empty()
        && t.cells().len() == 153
        && pairs.len() == 153
        && check_pair_coverage(&t).is_empty()
        && check_column_factors(&t).is_empty()
        && check_front_factors(&t).is_empty()
        && check_back_factors(&t).is_empty()
        && elapsed < Duration::from_millis(50);
    gate(
        "golden_verification",
        ok,
        format!(
            "valid={} violations={} distinct_pairs={} elapsed={elapsed:?}",
            report.valid,
            report.violations.len(),
            pairs.len()
        ),
    );
}

#[test]
fn mutation_completeness() {
    let t = table1();
    let mut swaps = 0;
    let mut false_accepts = 0;
    for c in 0..17 {
        for r1 in 0..9 {
            for r2 in r1 + 1..9 {
                let mut d = t.clone();
                d.swap_cells((r1, c), (r2, c));
                swaps += 1;
                if verify(&d).valid {
                    false_accepts += 1;
                }
            }
        }
    }
    let side = t.side();
    let all: Vec<Pair> = side.all_pairs().collect();
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    let mut overwrites = 0;
    while overwrites < 1000 {
        let (r, c) = (rng.gen_range(0..9), rng.gen_range(0..17));
        let p = all[rng.gen_range(0..all.len())];
        if p == t.get(r, c) {
            continue;
        }
        let mut d = t.clone();
        d.set(r, c, p).unwrap();
        overwrites += 1;
        if verify(&d).valid {
            false_accepts += 1;
        }
    }
    gate(
        "mutation_completeness",
        swaps == 612 && overwrites == 1000 && false_accepts == 0,
        format!("swaps={swaps} overwrites={overwrites} false_accepts={false_accepts}"),
    );
}

#[test]
fn symmetry_suite() {
    let t = table1();
    let side = t.side();
    let mut broken = t.clone();
    broken.swap_cells((2, 5), (6, 5));
    assert!(!verify(&broken).valid);
    let mut rng = ChaCha8Rng::seed_from_u64(200);
    let mut failures = 0;
    for _ in 0..200 {
        let syms = random_composition(side, &mut rng);
        if !verify(&apply_all(&t, &syms)).valid || verify(&apply_all(&broken, &syms)).valid {
            failures += 1;
        }
    }
    gate(
        "symmetry_suite",
        failures == 0,
        format!("compositions=200 failures={failures}"),
    );
}

#[test]
fn nonexistence_n2() {
    let side = Side::new(2).unwrap();
    let cfg = SearchConfig::backtrack().unbounded();
    let start = Instant::now();
    let out = backtrack_search(side, &cfg).unwrap();
    let count = count_solutions(side, &cfg, None).unwrap();
    let elapsed = start.elapsed();

    // naive oracle: every arrangement of the 6 pairs into the 2x3 grid
    let mut pairs: Vec<(u32, u32)> = side.all_pairs().map(|p| (p.low(), p.high())).collect();
    let mut arrangements = 0;
    let mut oracle_valid = 0;
    for_each_permutation(&mut pairs, &mut |cells| {
        arrangements += 1;
        let rows = vec![cells[..3].to_vec(), cells[3..].to_vec()];
        if is_pbtd(&rows) {
            oracle_valid += 1;
        }
    });
    let ok = out.outcome == Outcome::ExhaustedNoSolution
        && count.count == 0
        && count.complete
        && arrangements == 720
        && oracle_valid == 0
        && elapsed < Duration::from_secs(1);
    gate(
        "nonexistence_n2",
        ok,
        format!(
            "outcome={:?} count={} oracle={oracle_valid}/{arrangements} elapsed={elapsed:?}",
            out.outcome, count.count
        ),
    );
}

#[test]
fn nonexistence_n3() {
    let side = Side::new(3).unwrap();
    let mut cfg = SearchConfig::backtrack().unbounded();
    cfg.symmetry_break = true;
    let start = Instant::now();
    let out = backtrack_search(side, &cfg).unwrap();
    let elapsed = start.elapsed();
    gate(
        "nonexistence_n3",
        out.outcome == Outcome::ExhaustedNoSolution && elapsed < Duration::from_secs(120),
        format!(
            "outcome={:?} nodes={} elapsed={elapsed:?}",
            out.outcome, out.stats.explored
        ),
    );
}

#[test]
fn constructive_n5() {
    let side = Side::new(5).unwrap();
    let total = Duration::from_secs(15 * 60);
    let start = Instant::now();
    let mut found = None;
    let mut tried = Vec::new();
    for seed in 0..10u64 {
        let remaining = total.saturating_sub(start.elapsed());
        if remaining.is_zero() {
            break;
        }
        let mut cfg = SearchConfig::anneal(seed);
        cfg.time_budget = Some(remaining);
        let out = anneal_search(side, &cfg).unwrap();
        tried.push(seed);
        if let Some(d) = out.found() {
            found = Some((seed, d.clone(), out.stats.explored));
            break;
        }
    }
    let elapsed = start.elapsed();
    let ok = found
        .as_ref()
        .is_some_and(|(_, d, _)| verify(d).valid && is_pbtd(&raw_rows(d)))
        && elapsed < total;
    let detail = match &found {
        Some((seed, _, moves)) => format!("seed={seed} moves={moves} elapsed={elapsed:?}"),
        None => format!("no design from seeds {tried:?} in {elapsed:?}"),
    };
    gate("constructive_n5", ok, detail);
}

#[test]
fn cost_oracle_equivalence() {
    let mut rng = ChaCha8Rng::seed_from_u64(500);
    let mut states = Vec::new();
    for i in 0..500 {
        let side = Side::new([2, 3, 5][i % 3]).unwrap();
        let rotation = rng.gen_range(0..side.columns());
        let mut s = ColumnStructuredState::random(side, rotation, &mut rng);
        for _ in 0..rng.gen_range(0..20) {
            s.random_move(0.5, Reassignment::Greedy, &mut rng);
        }
        states.push(s);
    }
    // zero-cost states and their one-move neighbours
    let n5 = backtrack_search(Side::new(5).unwrap(), &SearchConfig::backtrack())
        .unwrap()
        .found()
        .cloned()
        .expect("backtracking finds a PBTD(5)");
    for valid in [table1(), n5, parse_text("0,1").unwrap()] {
        let base = ColumnStructuredState::from_design(&valid).unwrap();
        states.push(base.clone());
        for _ in 0..20 {
            let mut s = base.clone();
            s.random_move(0.5, Reassignment::Greedy, &mut rng);
            states.push(s);
        }
    }
    let mut mismatches = 0;
    let mut zero = 0;
    for s in &states {
        let d = s.realize();
        let valid = verify(&d).valid;
        zero += usize::from(s.cost() == 0);
        if (s.cost() == 0) != valid
            || s.cost() != window_defect(&d)
            || valid != is_pbtd(&raw_rows(&d))
        {
            mismatches += 1;
        }
    }

    // incremental cost against full recomputation over a long random walk
    let side = Side::new(5).unwrap();
    let mut s = ColumnStructuredState::random(side, 0, &mut rng);
    let mut drift = 0;
    for i in 0..10_000 {
        let mv = s
            .random_move(
                0.3,
                if i % 2 == 0 {
                    Reassignment::Greedy
                } else {
                    Reassignment::Random
                },
                &mut rng,
            )
            .unwrap();
        if s.cost() != window_defect(&s.realize()) {
            drift += 1;
        }
        if rng.gen_bool(0.3) {
            s.undo(mv);
            if s.cost() != window_defect(&s.realize()) {
                drift += 1;
            }
        }
    }
    let audited = s.audit();
    gate(
        "cost_oracle_equivalence",
        mismatches == 0 && drift == 0 && audited && zero >= 3,
        format!(
            "states={} zero_cost={zero} mismatches={mismatches} drift={drift} audit={audited}",
            states.len()
        ),
    );
}

#[test]
fn round_trips() {
    let mut rng = ChaCha8Rng::seed_from_u64(100);
    let mut failures = 0;
    let mut checked = 0;
    for n in [1, 2, 3, 5, 9] {
        let side = Side::new(n).unwrap();
        for _ in 0..100 {
            let d = random_design(side, &mut rng);
            let text = emit_text(&d);
            let json = emit_structured(&d);
            let via_text = parse_text(&text).unwrap();
            let via_json = parse_structured(&json).unwrap();
            checked += 1;
            if via_text != d
                || via_json != d
                || emit_text(&via_text) != text
                || emit_structured(&via_json) != json
            {
                failures += 1;
            }
        }
    }
    gate(
        "round_trips",
        failures == 0 && checked == 500,
        format!("designs={checked} failures={failures}"),
    );
}
