//! Command-line surface. Exit codes: 0 valid/found, 1 invalid/not found,
//! 2 usage, parse or configuration error.
//!
//! Designs and reports go to stdout; progress and statistics go to stderr.

use std::ffi::OsString;
use std::fs;
use std::io::{Read, Write};
use std::time::Duration;

use clap::{Parser, Subcommand, ValueEnum};
use log::LevelFilter;

use crate::design::{DesignArray, Side};
use crate::io::{emit_structured, emit_text, parse_structured, parse_text, table1};
use crate::search::{
    count_solutions, portfolio_search, search, AnnealParams, Engine, Outcome, Reassignment,
    SearchConfig,
};
use crate::verify::verify;

/// Overrides the default search timeout, in seconds.
pub const TIMEOUT_ENV: &str = "PBTD_SEARCH_TIMEOUT";

pub const EXIT_OK: u8 = 0;
pub const EXIT_NEGATIVE: u8 = 1;
pub const EXIT_ERROR: u8 = 2;

#[derive(Debug, Parser)]
#[command(
    name = "pbtd",
    version,
    about = "Verify and search for partitioned balanced tournament designs"
)]
struct Cli {
    /// More progress output on stderr (-v info, -vv debug)
    #[arg(short, long, action = clap::ArgAction::Count, global = true)]
    verbose: u8,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Format {
    Text,
    Structured,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum ReportFormat {
    Text,
    Machine,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum EngineArg {
    Backtrack,
    Anneal,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum ReassignArg {
    Greedy,
    Random,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Check a design and print a violation report
    Verify {
        /// Input file, or '-' for stdin
        #[arg(default_value = "-")]
        path: String,
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
        #[arg(long, value_enum, default_value_t = ReportFormat::Text)]
        report: ReportFormat,
    },
    /// Search for a design of side N
    Search {
        n: usize,
        #[arg(long, value_enum, default_value_t = EngineArg::Anneal)]
        engine: EngineArg,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Time budget in seconds
        #[arg(long, env = TIMEOUT_ENV, default_value_t = 60.0)]
        timeout: f64,
        /// Run without a time budget (overrides --timeout)
        #[arg(long)]
        no_timeout: bool,
        /// Fix the middle column to (0,1), (2,3), ... (backtrack only)
        #[arg(long)]
        symmetry_break: bool,
        /// Count solutions instead of returning the first (backtrack only)
        #[arg(long)]
        count: bool,
        /// Stop counting after this many solutions
        #[arg(long)]
        limit: Option<u64>,
        /// Cap on search nodes or annealing moves
        #[arg(long)]
        max_steps: Option<u64>,
        /// Write the found design here instead of stdout
        #[arg(long)]
        out: Option<String>,
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
        /// Run this many seeded annealers concurrently
        #[arg(long)]
        portfolio: Option<usize>,
        #[arg(long)]
        initial_temperature: Option<f64>,
        #[arg(long)]
        cooling_factor: Option<f64>,
        #[arg(long)]
        moves_per_temperature: Option<u64>,
        #[arg(long)]
        restart_limit: Option<u64>,
        #[arg(long)]
        cycle_switch_rate: Option<f64>,
        #[arg(long, value_enum)]
        reassignment: Option<ReassignArg>,
    },
    /// Print the embedded PBTD(9)
    Table1 {
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
    },
    /// Convert a design between formats
    Convert {
        #[arg(default_value = "-")]
        path: String,
        #[arg(long, value_enum, default_value_t = Format::Text)]
        from: Format,
        #[arg(long, value_enum, default_value_t = Format::Structured)]
        to: Format,
    },
}

struct Io<'a> {
    stdin: &'a mut dyn Read,
    out: &'a mut dyn Write,
    err: &'a mut dyn Write,
}

/// Failure that maps to exit code 2.
struct Fatal(String);

impl<E: std::fmt::Display> From<E> for Fatal {
    fn from(e: E) -> Self {
        Fatal(e.to_string())
    }
}

type CmdResult = Result<u8, Fatal>;

/// Parses `args` (including the program name) and runs the command.
pub fn run<I, T>(
    args: I,
    stdin: &mut dyn Read,
    stdout: &mut dyn Write,
    stderr: &mut dyn Write,
) -> u8
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_ERROR } else { EXIT_OK };
            let text = e.render().to_string();
            let sink: &mut dyn Write = if e.use_stderr() { stderr } else { stdout };
            let _ = sink.write_all(text.as_bytes());
            return code;
        }
    };
    log::set_max_level(match cli.verbose {
        0 => LevelFilter::Warn,
        1 => LevelFilter::Info,
        _ => LevelFilter::Debug,
    });
    let mut io = Io {
        stdin,
        out: stdout,
        err: stderr,
    };
    let result = match cli.command {
        Command::Verify {
            path,
            format,
            report,
        } => run_verify(&mut io, &path, format, report),
        Command::Table1 { format } => run_emit_table1(&mut io, format),
        Command::Convert { path, from, to } => run_convert(&mut io, &path, from, to),
        cmd @ Command::Search { .. } => run_search(&mut io, cmd),
    };
    match result {
        Ok(code) => code,
        Err(Fatal(msg)) => {
            let _ = writeln!(io.err, "error: {msg}");
            EXIT_ERROR
        }
    }
}

fn read_input(io: &mut Io, path: &str) -> Result<String, Fatal> {
    if path == "-" {
        let mut s = String::new();
        io.stdin.read_to_string(&mut s)?;
        Ok(s)
    } else {
        fs::read_to_string(path).map_err(|e| Fatal(format!("{path}: {e}")))
    }
}

fn parse(input: &str, format: Format) -> Result<DesignArray, Fatal> {
    Ok(match format {
        Format::Text => parse_text(input)?,
        Format::Structured => parse_structured(input)?,
    })
}

fn emit(design: &DesignArray, format: Format) -> String {
    match format {
        Format::Text => emit_text(design),
        Format::Structured => emit_structured(design) + "\n",
    }
}

fn run_verify(io: &mut Io, path: &str, format: Format, report: ReportFormat) -> CmdResult {
    let design = parse(&read_input(io, path)?, format)?;
    let result = verify(&design);
    match report {
        ReportFormat::Text => io.out.write_all(result.to_text().as_bytes())?,
        ReportFormat::Machine => writeln!(io.out, "{}", result.to_json())?,
    }
    Ok(if result.valid { EXIT_OK } else { EXIT_NEGATIVE })
}

fn run_emit_table1(io: &mut Io, format: Format) -> CmdResult {
    io.out.write_all(emit(&table1(), format).as_bytes())?;
    Ok(EXIT_OK)
}

fn run_convert(io: &mut Io, path: &str, from: Format, to: Format) -> CmdResult {
    let design = parse(&read_input(io, path)?, from)?;
    io.out.write_all(emit(&design, to).as_bytes())?;
    Ok(EXIT_OK)
}

fn run_search(io: &mut Io, cmd: Command) -> CmdResult {
    let Command::Search {
        n,
        engine,
        seed,
        timeout,
        no_timeout,
        symmetry_break,
        count,
        limit,
        max_steps,
        out,
        format,
        portfolio,
        initial_temperature,
        cooling_factor,
        moves_per_temperature,
        restart_limit,
        cycle_switch_rate,
        reassignment,
    } = cmd
    else {
        unreachable!("dispatched on Search");
    };
    let side = Side::new(n)?;
    let time_budget = if no_timeout {
        None
    } else {
        if !(timeout > 0.0 && timeout.is_finite()) {
            return Err(Fatal(format!("timeout must be positive, got {timeout}")));
        }
        Some(Duration::from_secs_f64(timeout))
    };
    let defaults = AnnealParams::default();
    let config = SearchConfig {
        engine: match engine {
            EngineArg::Backtrack => Engine::Backtrack,
            EngineArg::Anneal => Engine::Anneal,
        },
        seed,
        time_budget,
        symmetry_break,
        anneal: AnnealParams {
            initial_temperature: initial_temperature.unwrap_or(defaults.initial_temperature),
            cooling_factor: cooling_factor.unwrap_or(defaults.cooling_factor),
            moves_per_temperature: moves_per_temperature.or(defaults.moves_per_temperature),
            restart_limit: restart_limit.unwrap_or(defaults.restart_limit),
            cycle_switch_rate: cycle_switch_rate.unwrap_or(defaults.cycle_switch_rate),
            reassignment: match reassignment {
                Some(ReassignArg::Random) => Reassignment::Random,
                Some(ReassignArg::Greedy) => Reassignment::Greedy,
                None => defaults.reassignment,
            },
        },
        solution_limit: limit,
        step_limit: max_steps,
    };
    config.validate()?;

    if count {
        let c = count_solutions(side, &config, limit)?;
        let state = if c.complete { "complete" } else { "incomplete" };
        writeln!(io.out, "{} solutions, search {state}", c.count)?;
        writeln!(io.err, "nodes: {}", c.nodes)?;
        return Ok(if c.count > 0 { EXIT_OK } else { EXIT_NEGATIVE });
    }

    let result = match portfolio {
        Some(k) => portfolio_search(side, &config, k)?,
        None => search(side, &config)?,
    };
    let s = &result.stats;
    writeln!(
        io.err,
        "explored: {}, restarts: {}, elapsed: {:.3}s",
        s.explored,
        s.restarts,
        s.elapsed.as_secs_f64()
    )?;
    match result.outcome {
        Outcome::Found(design) => {
            // search() has already certified the design; re-check so that no
            // path through this command can print an unverified one
            if !verify(&design).valid {
                return Err(Fatal("engine returned an invalid design".into()));
            }
            let text = emit(&design, format);
            match out {
                Some(path) => {
                    fs::write(&path, text).map_err(|e| Fatal(format!("{path}: {e}")))?;
                    writeln!(io.err, "design written to {path}")?;
                }
                None => io.out.write_all(text.as_bytes())?,
            }
            Ok(EXIT_OK)
        }
        Outcome::ExhaustedNoSolution => {
            writeln!(io.out, "nonexistent (exhaustive)")?;
            Ok(EXIT_NEGATIVE)
        }
        Outcome::TimedOut { best_cost, .. } => {
            writeln!(io.out, "timed out: best_cost {best_cost}")?;
            Ok(EXIT_NEGATIVE)
        }
    }
}
