//! Command-line front end.
//!
//! Exit codes: 0 success or target found, 1 target not found, 2 bad input or
//! rejected specification, 3 fuel exhausted.

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use num_bigint::BigUint;

use crate::analysis::{build_graph, classify, find_cycle, validate, Spec};
use crate::engine::{decide, evaluate_trace, EvalConfig, Termination, Verdict};
use crate::error::{Error, EvalError};
use crate::expr::ArithMode;
use crate::model::Identifier;
use crate::reductions::{compile_minsky, compile_squares, compile_tqbf, MinskyProgram, Qbf};
use crate::syntax::{parse_spec, print_spec};
use crate::trace_io::{emit_pool, emit_trace, parse_trace, summary, Format};

pub const EXIT_OK: i32 = 0;
pub const EXIT_NOT_FOUND: i32 = 1;
pub const EXIT_ERROR: i32 = 2;
pub const EXIT_UNKNOWN: i32 = 3;

#[derive(Parser, Debug)]
#[command(name = "nfer", version, about = "Evaluate interval rules over event traces")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Evaluate a specification on a trace.
    Eval(EvalArgs),
    /// Report the fragment a specification belongs to.
    Check {
        #[arg(long)]
        spec: PathBuf,
    },
    /// Write a generated specification and trace.
    Gen {
        #[command(subcommand)]
        what: GenCommand,
    },
}

#[derive(Args, Debug)]
struct EvalArgs {
    #[arg(long)]
    spec: PathBuf,
    /// JSON lines, or CSV when the file name ends in `.csv`.
    #[arg(long)]
    trace: PathBuf,
    /// Compute modulo K instead of over unbounded naturals.
    #[arg(long, value_name = "K")]
    bound: Option<BigUint>,
    /// Keep only minimal intervals.
    #[arg(long)]
    minimal: bool,
    /// Maximum number of passes for cyclic specifications.
    #[arg(long, value_name = "N")]
    fuel: Option<u64>,
    /// Decide whether an interval with this label is produced.
    #[arg(long, value_name = "ID")]
    target: Option<Identifier>,
    /// With --target, print the witness tree of a found interval.
    #[arg(long, requires = "target")]
    witness: bool,
    #[arg(long, default_value = "json", value_parser = parse_format)]
    format: Format,
    /// Write the pool here instead of standard output.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand, Debug)]
enum GenCommand {
    /// Two-counter machine simulation.
    Minsky {
        #[arg(long)]
        program: PathBuf,
        /// Output stem; writes STEM.nfer and STEM.jsonl.
        #[arg(long)]
        out: PathBuf,
    },
    /// Quantified Boolean formula evaluation.
    Tqbf {
        #[arg(long)]
        formula: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// The repeated-squaring chain.
    Squares {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        out: PathBuf,
    },
}

fn parse_format(s: &str) -> Result<Format, String> {
    s.parse()
}

/// Runs the command line in `args` (including the program name), writing
/// results to `out` and diagnostics to `err`. Returns the exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_ERROR } else { EXIT_OK };
            let _ = if e.use_stderr() { write!(err, "{}", e.render()) } else { write!(out, "{}", e.render()) };
            return code;
        }
    };
    let outcome = match cli.command {
        Command::Eval(args) => eval(args, out, err),
        Command::Check { spec } => check(&spec, out, err),
        Command::Gen { what } => generate(what, out),
    };
    match outcome {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            EXIT_ERROR
        }
    }
}

fn read(path: &Path) -> Result<String, Error> {
    fs::read_to_string(path).map_err(|e| std::io::Error::new(e.kind(), format!("{}: {e}", path.display())).into())
}

fn located(path: &Path, sep: &str, e: impl std::fmt::Display) -> Error {
    std::io::Error::new(std::io::ErrorKind::InvalidData, format!("{}{sep}{e}", path.display())).into()
}

fn load_spec(path: &Path) -> Result<Spec, Error> {
    parse_spec(&read(path)?).map_err(|e| located(path, ":", e))
}

fn load_trace(path: &Path) -> Result<crate::model::Trace, Error> {
    parse_trace(&read(path)?, Format::from_path(path)).map_err(|e| located(path, ": ", e))
}

fn eval(args: EvalArgs, out: &mut dyn Write, err: &mut dyn Write) -> Result<i32, Error> {
    let spec = load_spec(&args.spec)?;
    let trace = load_trace(&args.trace)?;
    let mode = match args.bound {
        None => ArithMode::Infinite,
        Some(k) => ArithMode::modulo(k).ok_or(EvalError::ZeroBound)?,
    };
    let config = EvalConfig { mode, minimal: args.minimal, fuel: args.fuel, early_exit_target: None };

    if let Some(target) = &args.target {
        let verdict = decide(&spec, &trace, target, &config)?;
        writeln!(out, "{}", verdict.label())?;
        if let (true, Verdict::Found(tree)) = (args.witness, &verdict) {
            let json = serde_json::to_string_pretty(&tree.to_json(&spec)).expect("JSON values serialize");
            writeln!(out, "{json}")?;
        }
        return Ok(match verdict {
            Verdict::Found(_) => EXIT_OK,
            Verdict::NotFound => EXIT_NOT_FOUND,
            Verdict::Unknown => EXIT_UNKNOWN,
        });
    }

    let result = evaluate_trace(&spec, &trace, &config)?;
    for note in &result.diagnostics {
        writeln!(err, "note: {note}")?;
    }
    let body = emit_pool(&result.pool, args.format);
    match &args.out {
        Some(path) => fs::write(path, body)?,
        None => out.write_all(body.as_bytes())?,
    }
    writeln!(err, "{}", summary(&result))?;
    if result.termination == Termination::FuelExhausted {
        writeln!(err, "note: fuel exhausted before the fixed point; the pool is partial")?;
        return Ok(EXIT_UNKNOWN);
    }
    Ok(EXIT_OK)
}

fn check(path: &Path, out: &mut dyn Write, err: &mut dyn Write) -> Result<i32, Error> {
    let spec = load_spec(path)?;
    let info = classify(&spec);
    let yes_no = |b: bool| if b { "yes" } else { "no" };
    writeln!(out, "rules: {}", spec.len())?;
    writeln!(out, "cycle-free: {}", yes_no(info.cycle_free))?;
    writeln!(out, "exclusive rules: {}", yes_no(info.has_exclusive))?;
    if let Some(order) = &info.topo_order {
        let order: Vec<String> = order.iter().map(usize::to_string).collect();
        writeln!(out, "evaluation order: {}", order.join(" "))?;
    }
    if let Some(cycle) = find_cycle(&build_graph(&spec)) {
        let mut steps: Vec<String> = cycle.iter().map(|r| format!("rule {r}")).collect();
        steps.push(format!("rule {}", cycle[0]));
        writeln!(out, "cycle: {}", steps.join(" -> "))?;
    }
    if let Err(e) = validate(&spec) {
        writeln!(err, "rejected: {e}")?;
        return Ok(EXIT_ERROR);
    }
    writeln!(out, "evaluation problem:")?;
    for (finite, minimal, label) in [
        (false, false, "unbounded data"),
        (true, false, "bounded data (--bound)"),
        (false, true, "unbounded data, --minimal"),
        (true, true, "bounded data, --minimal"),
    ] {
        writeln!(out, "  {label}: {}", crate::analysis::complexity_class(&info, finite, minimal))?;
    }
    Ok(EXIT_OK)
}

fn write_pair(out: &mut dyn Write, stem: &Path, spec: &Spec, trace: &crate::model::Trace) -> Result<(PathBuf, PathBuf), Error> {
    let with_ext = |ext: &str| {
        let mut name = stem.as_os_str().to_owned();
        name.push(ext);
        PathBuf::from(name)
    };
    let (spec_path, trace_path) = (with_ext(".nfer"), with_ext(".jsonl"));
    fs::write(&spec_path, print_spec(spec))?;
    fs::write(&trace_path, emit_trace(trace, Format::Json))?;
    writeln!(out, "spec: {}", spec_path.display())?;
    writeln!(out, "trace: {}", trace_path.display())?;
    Ok((spec_path, trace_path))
}

fn generate(what: GenCommand, out: &mut dyn Write) -> Result<i32, Error> {
    match what {
        GenCommand::Minsky { program, out: stem } => {
            let program = MinskyProgram::parse(&read(&program)?)?;
            let (spec, trace, target) = compile_minsky(&program);
            write_pair(out, &stem, &spec, &trace)?;
            writeln!(out, "target: {target}")?;
        }
        GenCommand::Tqbf { formula, out: stem } => {
            let formula = Qbf::parse(&read(&formula)?)?;
            let inst = compile_tqbf(&formula);
            write_pair(out, &stem, &inst.spec, &inst.trace)?;
            writeln!(out, "target: {}", inst.target)?;
            writeln!(out, "bound: {}", inst.bound)?;
        }
        GenCommand::Squares { n, out: stem } => {
            let (spec, trace) = compile_squares(n);
            write_pair(out, &stem, &spec, &trace)?;
            writeln!(out, "target: e{n}")?;
        }
    }
    Ok(EXIT_OK)
}
