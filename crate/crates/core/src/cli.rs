//! The `simrel` command line.
//!
//! Exit codes: 0 success, 1 usage error, 2 invalid input (unreadable file,
//! syntax error, invalid initial relation, too large for `verify`), 3
//! disagreement (`verify` against the oracle, `compare` across strategies,
//! or a failed `--debug-checks` invariant).

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand};

use crate::io::{self, ParseError};
use crate::lts::{normalize, Lts};
use crate::oracle::{self, ORACLE_MAX_STATES};
use crate::partition::PartitionRelation;
use crate::sim::{self, SimOptions, SimResult, Strategy};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_INPUT: i32 = 2;
pub const EXIT_MISMATCH: i32 = 3;

#[derive(Debug, Parser)]
#[command(
    name = "simrel",
    version,
    about = "Coarsest simulation preorders of labelled transition systems"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Compute the coarsest simulation and print the result document.
    Compute(RunArgs),
    /// Compute, then check the result against the brute-force oracle
    /// (inputs of at most 12 states).
    Verify(RunArgs),
    /// Run all three strategies and check that they agree.
    Compare(InputArgs),
    /// Print a random `.aut` file.
    Random(RandomArgs),
    /// Run once and print the counters and timings as key=value lines.
    Bench(RunArgs),
}

#[derive(Debug, Args)]
struct InputArgs {
    /// Input `.aut` file.
    input: PathBuf,
    /// Initial partition-relation file; defaults to the universal relation.
    #[arg(long, value_name = "PATH")]
    pr: Option<PathBuf>,
    /// Also list the relation as pairs of states.
    #[arg(long)]
    expand: bool,
    /// Run the (slow) internal invariant checks.
    #[arg(long)]
    debug_checks: bool,
}

#[derive(Debug, Args)]
struct RunArgs {
    #[command(flatten)]
    input: InputArgs,
    #[arg(long, default_value = "compromise", value_parser = clap::value_parser!(Strategy))]
    strategy: Strategy,
}

#[derive(Debug, Args)]
struct RandomArgs {
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long, default_value_t = 8)]
    states: usize,
    #[arg(long, default_value_t = 3)]
    letters: usize,
    #[arg(long, default_value_t = 20)]
    transitions: usize,
}

impl clap::ValueEnum for Strategy {
    fn value_variants<'a>() -> &'a [Self] {
        &Strategy::ALL
    }

    fn to_possible_value(&self) -> Option<clap::builder::PossibleValue> {
        Some(clap::builder::PossibleValue::new(self.name()))
    }
}

/// A failure with its exit code; the message is printed to stderr.
struct Failure {
    code: i32,
    message: String,
}

impl Failure {
    fn input(message: impl Into<String>) -> Self {
        Failure {
            code: EXIT_INPUT,
            message: message.into(),
        }
    }

    fn at(path: &Path, err: ParseError) -> Self {
        Failure::input(format!("{}:{}: {}", path.display(), err.line, err.message))
    }
}

struct Loaded {
    lts: Lts,
    initial: PartitionRelation,
}

fn read(path: &Path) -> Result<String, Failure> {
    std::fs::read_to_string(path).map_err(|e| Failure::input(format!("{}: {e}", path.display())))
}

fn load(args: &InputArgs) -> Result<Loaded, Failure> {
    let text = read(&args.input)?;
    let doc = io::parse_aut(&text).map_err(|e| Failure::at(&args.input, e))?;
    let (lts, report) = normalize(&doc.lts)
        .map_err(|e| Failure::input(format!("{}: {e}", args.input.display())))?;
    let initial = match &args.pr {
        None => PartitionRelation::universal(lts.num_states()),
        Some(path) => io::parse_pr(&read(path)?)
            .and_then(|pr| pr.resolve(doc.lts.num_states, &report))
            .map_err(|e| Failure::at(path, e))?,
    };
    Ok(Loaded { lts, initial })
}

fn solve(loaded: &Loaded, options: SimOptions) -> Result<SimResult, Failure> {
    let result = sim::run(&loaded.lts, &loaded.initial, options)
        .map_err(|e| Failure::input(e.to_string()))?;
    if !result.checks.is_clean() {
        let mut message = format!("{} invariant check(s) failed", result.checks.failures.len());
        for failure in result.checks.failures.iter().take(10) {
            message.push_str("\n  ");
            message.push_str(failure);
        }
        return Err(Failure {
            code: EXIT_MISMATCH,
            message,
        });
    }
    Ok(result)
}

fn options(strategy: Strategy, args: &InputArgs) -> SimOptions {
    SimOptions {
        strategy,
        debug_checks: args.debug_checks,
        ..Default::default()
    }
}

fn compute(args: &RunArgs, out: &mut dyn Write) -> Result<(), Failure> {
    let loaded = load(&args.input)?;
    let result = solve(&loaded, options(args.strategy, &args.input))?;
    emit(
        out,
        &io::emit_result(&result, &loaded.lts, args.input.expand),
    )
}

fn verify(args: &RunArgs, out: &mut dyn Write, err: &mut dyn Write) -> Result<(), Failure> {
    let loaded = load(&args.input)?;
    let n = loaded.lts.num_states();
    if n > ORACLE_MAX_STATES {
        return Err(Failure::input(format!(
            "{}: {n} states exceed the oracle limit of {ORACLE_MAX_STATES}; use `simrel compare` for larger inputs",
            args.input.input.display()
        )));
    }
    let result = solve(&loaded, options(args.strategy, &args.input))?;
    let got = result.induced_relation();
    let expected =
        oracle::naive_coarsest_simulation(&loaded.lts, &loaded.initial.induced_relation());
    if got != expected {
        let name = |q| loaded.lts.state_name(q);
        let mut message = format!("{} disagrees with the oracle", args.strategy);
        for (q, r) in expected.pairs().filter(|&(q, r)| !got.contains(q, r)) {
            message.push_str(&format!("\n  missing: {} {}", name(q), name(r)));
        }
        for (q, r) in got.pairs().filter(|&(q, r)| !expected.contains(q, r)) {
            message.push_str(&format!("\n  extra:   {} {}", name(q), name(r)));
        }
        return Err(Failure {
            code: EXIT_MISMATCH,
            message,
        });
    }
    let _ = writeln!(err, "{}: agrees with the oracle", args.strategy);
    emit(
        out,
        &io::emit_result(&result, &loaded.lts, args.input.expand),
    )
}

fn compare(args: &InputArgs, out: &mut dyn Write, err: &mut dyn Write) -> Result<(), Failure> {
    let loaded = load(args)?;
    let results: Vec<Result<SimResult, Failure>> = std::thread::scope(|scope| {
        let handles: Vec<_> = Strategy::ALL
            .iter()
            .map(|&strategy| {
                let loaded = &loaded;
                scope.spawn(move || solve(loaded, options(strategy, args)))
            })
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("solver thread panicked"))
            .collect()
    });
    let mut documents = Vec::new();
    let mut relations = Vec::new();
    for result in results {
        let result = result?;
        documents.push(io::emit_result(&result, &loaded.lts, args.expand));
        relations.push(result.induced_relation());
    }

    let mut message = String::new();
    for i in 1..Strategy::ALL.len() {
        let (a, b) = (Strategy::ALL[0], Strategy::ALL[i]);
        if relations[0] != relations[i] {
            message.push_str(&format!("\n  {a} and {b} induce different relations"));
        } else if io::canonical(&documents[0]) != io::canonical(&documents[i]) {
            message.push_str(&format!("\n  {a} and {b} produce different documents"));
        }
    }
    if !message.is_empty() {
        return Err(Failure {
            code: EXIT_MISMATCH,
            message: format!("strategies disagree:{message}"),
        });
    }
    let _ = writeln!(err, "compromise, counting and space agree");
    emit(out, &documents[0])
}

fn bench(args: &RunArgs, out: &mut dyn Write) -> Result<(), Failure> {
    let start = Instant::now();
    let loaded = load(&args.input)?;
    let loaded_at = start.elapsed();
    let result = solve(&loaded, options(args.strategy, &args.input))?;
    let solved_at = start.elapsed();

    let lts = &loaded.lts;
    let mut text = format!(
        "strategy={}\nstates={}\nletters={}\ntransitions={}\nstate_letters={}\nblocks={}\n",
        args.strategy,
        lts.num_states(),
        lts.num_letters(),
        lts.num_transitions(),
        lts.num_state_letters(),
        result.num_blocks(),
    );
    for (key, value) in result.stats.fields() {
        text.push_str(&format!("{key}={value}\n"));
    }
    text.push_str(&format!(
        "load_us={}\nrun_us={}\n",
        loaded_at.as_micros(),
        (solved_at - loaded_at).as_micros()
    ));
    emit(out, &text)
}

fn random(args: &RandomArgs, out: &mut dyn Write) -> Result<(), Failure> {
    if args.transitions > 0 && (args.states == 0 || args.letters == 0) {
        return Err(Failure {
            code: EXIT_USAGE,
            message: "--states and --letters must be positive when --transitions is".to_string(),
        });
    }
    let raw = io::random_lts(args.seed, args.states, args.letters, args.transitions);
    emit(out, &io::emit_raw_aut(0, &raw))
}

fn emit(out: &mut dyn Write, text: &str) -> Result<(), Failure> {
    out.write_all(text.as_bytes())
        .and_then(|_| out.flush())
        .map_err(|e| Failure::input(format!("writing output: {e}")))
}

/// Runs the command line `argv` (program name first), writing the result
/// to `out` and diagnostics to `err`. Returns the exit code.
pub fn run_cli_with<I, T>(argv: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            return if e.use_stderr() {
                let _ = write!(err, "{}", e.render());
                EXIT_USAGE
            } else {
                let _ = write!(out, "{}", e.render());
                EXIT_OK
            };
        }
    };
    let outcome = match &cli.command {
        Command::Compute(args) => compute(args, out),
        Command::Verify(args) => verify(args, out, err),
        Command::Compare(args) => compare(args, out, err),
        Command::Random(args) => random(args, out),
        Command::Bench(args) => bench(args, out),
    };
    match outcome {
        Ok(()) => EXIT_OK,
        Err(failure) => {
            let _ = writeln!(err, "error: {}", failure.message);
            failure.code
        }
    }
}

/// [`run_cli_with`] on the process's stdout and stderr.
pub fn run_cli<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let stdout = std::io::stdout();
    let stderr = std::io::stderr();
    run_cli_with(argv, &mut stdout.lock(), &mut stderr.lock())
}
