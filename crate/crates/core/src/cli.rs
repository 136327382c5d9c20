//! The `foon` command line: `merge`, `search`, `bench` and `dot`.
//!
//! Exit status is 0 on success, 1 for usage or input errors and 2 when a
//! search finds no tree.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Parser, Subcommand};

use crate::dot::render_dot;
use crate::merge::{merge, merge_stats, to_document};
use crate::model::{Kitchen, MotionRateTable, ObjectNode, UniversalFoon};
use crate::parser::{
    load_kitchen, load_rates, load_subgraph, parse_goal, serialize_subgraph, serialize_units,
    LoadError,
};
use crate::retrieval::{search, Algorithm, SearchOutcome, DEFAULT_MAX_DEPTH};

pub const EXIT_OK: i32 = 0;
pub const EXIT_INPUT: i32 = 1;
pub const EXIT_NO_SOLUTION: i32 = 2;

/// Header of the `bench` TSV.
pub const BENCH_HEADER: &str = "goal\tids\th1\th2\tids_ms\th1_ms\th2_ms\tids_exp\th1_exp\th2_exp";

#[derive(Debug, Parser)]
#[command(
    name = "foon",
    version,
    about = "Build a universal FOON and retrieve task trees from it"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Merge subgraph files into one universal FOON, dropping duplicate units.
    Merge {
        #[arg(required = true)]
        inputs: Vec<PathBuf>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Retrieve a task tree for one goal.
    Search {
        #[arg(long)]
        foon: PathBuf,
        /// `name[;state,...[;ingredient,...]]`
        #[arg(long)]
        goal: String,
        #[arg(long)]
        kitchen: PathBuf,
        #[arg(long, default_value = "ids")]
        algo: Algorithm,
        #[arg(long)]
        rates: Option<PathBuf>,
        #[arg(long, default_value_t = DEFAULT_MAX_DEPTH)]
        max_depth: usize,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run all three algorithms for every goal in a file and write a TSV.
    Bench {
        #[arg(long)]
        foon: PathBuf,
        #[arg(long)]
        kitchen: PathBuf,
        /// One goal spec per line.
        #[arg(long)]
        goals: PathBuf,
        #[arg(long)]
        rates: Option<PathBuf>,
        #[arg(long, default_value_t = DEFAULT_MAX_DEPTH)]
        max_depth: usize,
        #[arg(long)]
        out: PathBuf,
    },
    /// Render a FOON or task-tree file as Graphviz DOT.
    Dot {
        #[arg(long)]
        foon: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Debug)]
struct Failure(i32, String);

impl From<LoadError> for Failure {
    fn from(e: LoadError) -> Self {
        Failure(EXIT_INPUT, e.to_string())
    }
}

type CmdResult = Result<i32, Failure>;

/// Parses `args` (including the program name) and runs the command.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_INPUT } else { EXIT_OK };
            let rendered = e.render().to_string();
            if e.use_stderr() {
                let _ = write!(stderr, "{rendered}");
            } else {
                let _ = write!(stdout, "{rendered}");
            }
            return code;
        }
    };
    let result = match cli.command {
        Command::Merge { inputs, out } => cmd_merge(&inputs, &out, stdout),
        Command::Search {
            foon,
            goal,
            kitchen,
            algo,
            rates,
            max_depth,
            out,
        } => cmd_search(
            &foon,
            &goal,
            &kitchen,
            algo,
            rates.as_deref(),
            max_depth,
            &out,
            stdout,
        ),
        Command::Bench {
            foon,
            kitchen,
            goals,
            rates,
            max_depth,
            out,
        } => cmd_bench(
            &foon,
            &kitchen,
            &goals,
            rates.as_deref(),
            max_depth,
            &out,
            stdout,
        ),
        Command::Dot { foon, out } => cmd_dot(&foon, &out),
    };
    match result {
        Ok(code) => code,
        Err(Failure(code, msg)) => {
            let _ = writeln!(stderr, "error: {msg}");
            code
        }
    }
}

fn write_file(path: &Path, contents: &str) -> Result<(), Failure> {
    fs::write(path, contents).map_err(|e| Failure(EXIT_INPUT, format!("{}: {e}", path.display())))
}

fn load_foon(path: &Path) -> Result<UniversalFoon, Failure> {
    let doc = load_subgraph(path)?;
    Ok(merge([&doc]))
}

fn load_rates_or_default(path: Option<&Path>) -> Result<MotionRateTable, Failure> {
    Ok(match path {
        Some(p) => load_rates(p)?,
        None => MotionRateTable::new(),
    })
}

fn goal_from_spec(spec: &str) -> Result<ObjectNode, Failure> {
    parse_goal(spec).map_err(|e| Failure(EXIT_INPUT, format!("goal `{spec}`: {e}")))
}

fn cmd_merge(inputs: &[PathBuf], out: &Path, stdout: &mut dyn Write) -> CmdResult {
    let docs = inputs
        .iter()
        .map(|p| load_subgraph(p))
        .collect::<Result<Vec<_>, _>>()?;
    let foon = merge(&docs);
    let stats = merge_stats(&docs, &foon);
    write_file(out, &serialize_subgraph(&to_document(&foon)))?;
    let _ = writeln!(stdout, "units: {}", foon.len());
    let _ = writeln!(stdout, "input_units: {}", stats.total_input_units);
    let _ = writeln!(stdout, "duplicates_removed: {}", stats.duplicates_removed);
    Ok(EXIT_OK)
}

#[allow(clippy::too_many_arguments)]
fn cmd_search(
    foon: &Path,
    goal: &str,
    kitchen: &Path,
    algo: Algorithm,
    rates: Option<&Path>,
    max_depth: usize,
    out: &Path,
    stdout: &mut dyn Write,
) -> CmdResult {
    let foon = load_foon(foon)?;
    let goal = goal_from_spec(goal)?;
    let kitchen = load_kitchen(kitchen)?;
    let rates = load_rates_or_default(rates)?;

    match search(algo, &foon, &goal, &kitchen, &rates, max_depth) {
        SearchOutcome::Found(tree) => {
            write_file(out, &serialize_units(&tree.units))?;
            let s = &tree.stats;
            let _ = writeln!(stdout, "algorithm: {algo}");
            let _ = writeln!(stdout, "goal: {goal}");
            let _ = writeln!(stdout, "size: {}", tree.len());
            let _ = writeln!(stdout, "expansions: {}", s.expansions);
            let _ = writeln!(stdout, "max_stack_depth: {}", s.max_stack_depth);
            if algo == Algorithm::Ids {
                let _ = writeln!(stdout, "depth_limit: {}", s.depth_limit_reached);
            }
            Ok(EXIT_OK)
        }
        SearchOutcome::Failed(f) => {
            let _ = writeln!(stdout, "algorithm: {algo}");
            let _ = writeln!(stdout, "goal: {goal}");
            let _ = writeln!(stdout, "no solution: {}", f.reason);
            for o in &f.blocked_objects {
                let _ = writeln!(stdout, "blocked: {o}");
            }
            Ok(EXIT_NO_SOLUTION)
        }
    }
}

/// One `bench` row for a single goal.
#[derive(Debug, Clone)]
pub struct BenchRow {
    pub goal: String,
    pub sizes: [Option<usize>; 3],
    pub millis: [f64; 3],
    pub expansions: [u64; 3],
}

impl BenchRow {
    pub fn to_tsv(&self) -> String {
        let mut line = self.goal.clone();
        for s in &self.sizes {
            match s {
                Some(n) => {
                    let _ = write!(line, "\t{n}");
                }
                None => line.push_str("\t-"),
            }
        }
        for ms in &self.millis {
            let _ = write!(line, "\t{ms:.3}");
        }
        for e in &self.expansions {
            let _ = write!(line, "\t{e}");
        }
        line
    }
}

/// Runs the three algorithms on each goal, in order.
pub fn bench_rows(
    foon: &UniversalFoon,
    kitchen: &Kitchen,
    rates: &MotionRateTable,
    goals: &[(String, ObjectNode)],
    max_depth: usize,
) -> Vec<BenchRow> {
    goals
        .iter()
        .map(|(spec, goal)| {
            let mut row = BenchRow {
                goal: spec.clone(),
                sizes: [None; 3],
                millis: [0.0; 3],
                expansions: [0; 3],
            };
            for (i, algo) in Algorithm::ALL.into_iter().enumerate() {
                let start = Instant::now();
                let outcome = search(algo, foon, goal, kitchen, rates, max_depth);
                row.millis[i] = start.elapsed().as_secs_f64() * 1000.0;
                row.expansions[i] = outcome.stats().expansions;
                row.sizes[i] = outcome.tree().map(|t| t.len());
            }
            row
        })
        .collect()
}

fn cmd_bench(
    foon: &Path,
    kitchen: &Path,
    goals: &Path,
    rates: Option<&Path>,
    max_depth: usize,
    out: &Path,
    stdout: &mut dyn Write,
) -> CmdResult {
    let foon = load_foon(foon)?;
    let kitchen = load_kitchen(kitchen)?;
    let rates = load_rates_or_default(rates)?;
    let text = fs::read_to_string(goals)
        .map_err(|e| Failure(EXIT_INPUT, format!("{}: {e}", goals.display())))?;
    let mut specs = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let spec = line.trim();
        if spec.is_empty() || spec.starts_with('#') {
            continue;
        }
        let goal = parse_goal(spec)
            .map_err(|e| Failure(EXIT_INPUT, format!("{}:{}: {e}", goals.display(), i + 1)))?;
        specs.push((spec.to_string(), goal));
    }

    let rows = bench_rows(&foon, &kitchen, &rates, &specs, max_depth);
    let mut tsv = String::from(BENCH_HEADER);
    tsv.push('\n');
    for row in &rows {
        tsv.push_str(&row.to_tsv());
        tsv.push('\n');
    }
    write_file(out, &tsv)?;

    for row in &rows {
        let sizes: Vec<String> = row
            .sizes
            .iter()
            .map(|s| s.map_or_else(|| "-".to_string(), |n| n.to_string()))
            .collect();
        let _ = writeln!(
            stdout,
            "{}: ids={} h1={} h2={}",
            row.goal, sizes[0], sizes[1], sizes[2]
        );
    }
    let any_success = rows.iter().any(|r| r.sizes.iter().any(Option::is_some));
    if rows.is_empty() || any_success {
        Ok(EXIT_OK)
    } else {
        Ok(EXIT_NO_SOLUTION)
    }
}

fn cmd_dot(input: &Path, out: &Path) -> CmdResult {
    let doc = load_subgraph(input)?;
    write_file(out, &render_dot(&doc.units))?;
    Ok(EXIT_OK)
}
