use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use arrayeq::oracle::{differential_test, DiffConfig, DiffOutcome};
use arrayeq::report::{EXIT_EQUIVALENT, EXIT_INEQUIVALENT, EXIT_UNSUPPORTED, EXIT_USAGE, TOOL_VERSION};
use arrayeq::{check_sources, parse, render_text, Addg, CheckConfig};
use clap::{Args, Parser, Subcommand};
use serde_json::json;

/// Equivalence checker for affine array programs.
#[derive(Parser, Debug)]
#[command(name = "arrayeq", version = TOOL_VERSION)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Prove two programs equivalent or report where they differ.
    Check(CheckArgs),
    /// Run both programs on random inputs and compare outputs.
    Oracle(OracleArgs),
    /// Print the dependence graph of a program in DOT format.
    DumpAddg {
        file: PathBuf,
        /// Constant overrides, `NAME=value`.
        #[arg(long = "define", short = 'D', value_parser = parse_define)]
        defines: Vec<(String, i64)>,
    },
}

#[derive(Args, Debug)]
struct CheckArgs {
    original: PathBuf,
    transformed: PathBuf,
    /// Structured (JSON) report.
    #[arg(long)]
    json: bool,
    /// Only check these outputs (comma separated).
    #[arg(long, value_delimiter = ',')]
    focus: Vec<String>,
    /// Arrays holding the same values in both programs, `a=b`.
    #[arg(long = "correspond", value_parser = parse_pair)]
    correspond: Vec<(String, String)>,
    /// Work limit per relation operation.
    #[arg(long, default_value_t = arrayeq::relation::DEFAULT_BUDGET,
          value_parser = clap::value_parser!(u64).range(arrayeq::checker::MIN_BUDGET..))]
    budget: u64,
    /// Nesting limit for matching ambiguous commutative operands.
    #[arg(long, default_value_t = arrayeq::checker::DEFAULT_LOOKAHEAD)]
    lookahead: usize,
    /// Disable the table of proven sub-equivalences.
    #[arg(long)]
    no_memo: bool,
    /// Treat every operator as uninterpreted (no flattening or matching).
    #[arg(long)]
    no_normalize: bool,
    #[arg(long, default_value_t = arrayeq::checker::DEFAULT_MAX_DIAGNOSTICS)]
    max_diagnostics: usize,
    /// Show equivalent pieces and leaf pairings too.
    #[arg(short, long)]
    verbose: bool,
}

#[derive(Args, Debug)]
struct OracleArgs {
    original: PathBuf,
    transformed: PathBuf,
    /// Values for the size constant (comma separated or repeated).
    #[arg(long = "n", value_delimiter = ',', default_values_t = [4i64, 8, 16])]
    n: Vec<i64>,
    /// Name of the size constant.
    #[arg(long, default_value = "N")]
    constant: String,
    #[arg(long, default_value_t = 100)]
    trials: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    json: bool,
}

fn parse_pair(s: &str) -> Result<(String, String), String> {
    match s.split_once('=') {
        Some((a, b)) if !a.trim().is_empty() && !b.trim().is_empty() => {
            Ok((a.trim().to_string(), b.trim().to_string()))
        }
        _ => Err(format!("expected NAME=NAME, got '{s}'")),
    }
}

fn parse_define(s: &str) -> Result<(String, i64), String> {
    let (n, v) = s.split_once('=').ok_or_else(|| format!("expected NAME=value, got '{s}'"))?;
    let v = v.trim().parse().map_err(|e| format!("{v}: {e}"))?;
    Ok((n.trim().to_string(), v))
}

fn read(path: &Path) -> Result<String, String> {
    std::fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))
}

fn code(c: i32) -> ExitCode {
    ExitCode::from(c as u8)
}

/// Writes to stdout; a closed pipe is not an error.
fn emit(text: &str) {
    let _ = std::io::stdout().lock().write_all(text.as_bytes());
}

fn usage_error(msg: &str) -> ExitCode {
    eprintln!("arrayeq: {msg}");
    code(EXIT_USAGE)
}

fn check(a: CheckArgs) -> ExitCode {
    let (src_a, src_b) = match (read(&a.original), read(&a.transformed)) {
        (Ok(x), Ok(y)) => (x, y),
        (Err(e), _) | (_, Err(e)) => return usage_error(&e),
    };
    let cfg = CheckConfig {
        focus: (!a.focus.is_empty()).then_some(a.focus),
        correspondences: a.correspond,
        budget: a.budget,
        lookahead: a.lookahead,
        memo: !a.no_memo,
        normalize: !a.no_normalize,
        max_diagnostics: a.max_diagnostics,
        verify_invariants: false,
    };
    let name_a = a.original.display().to_string();
    let name_b = a.transformed.display().to_string();
    let report = check_sources(&name_a, &src_a, &name_b, &src_b, &cfg);
    if a.json {
        emit(&format!("{}\n", report.to_json()));
    } else {
        emit(&render_text(&report, a.verbose));
    }
    code(report.exit_code)
}

fn oracle(a: OracleArgs) -> ExitCode {
    let (src_a, src_b) = match (read(&a.original), read(&a.transformed)) {
        (Ok(x), Ok(y)) => (x, y),
        (Err(e), _) | (_, Err(e)) => return usage_error(&e),
    };
    let cfg = DiffConfig {
        trials: a.trials,
        n_values: a.n,
        constant: a.constant,
        seed: a.seed,
        ..DiffConfig::default()
    };
    let outcome = match differential_test(&src_a, &src_b, &cfg) {
        Ok(o) => o,
        Err(e) => {
            eprintln!("arrayeq: {e}");
            return code(EXIT_UNSUPPORTED);
        }
    };
    let (status, value, text) = match &outcome {
        DiffOutcome::Agree { runs } => (
            EXIT_EQUIVALENT,
            json!({"result": "agree", "runs": runs}),
            format!("agree ({runs} runs)"),
        ),
        DiffOutcome::Counterexample(c) => {
            let n = c.n.map_or("as written".to_string(), |n| format!("{}={n}", cfg.constant));
            let diffs: Vec<String> = c.all.iter().map(|d| d.to_string()).collect();
            (
                EXIT_INEQUIVALENT,
                json!({
                    "result": "counterexample",
                    "n": c.n,
                    "trial": c.trial,
                    "input-seed": c.input_seed,
                    "array": c.first.array,
                    "element": c.first.element,
                    "differences": diffs,
                }),
                format!(
                    "counterexample at {} ({n}, trial {}, input seed {}): {} of {} elements differ\n{}",
                    c.first,
                    c.trial,
                    c.input_seed,
                    c.all.len(),
                    c.all.len(),
                    diffs.join("\n")
                ),
            )
        }
        DiffOutcome::Fault { side, n, trial, fault } => (
            EXIT_UNSUPPORTED,
            json!({"result": "fault", "program": side, "n": n, "trial": trial, "fault": fault.to_string()}),
            format!("program {side} faulted (trial {trial}): {fault}"),
        ),
    };
    if a.json {
        emit(&format!("{}\n", serde_json::to_string_pretty(&value).unwrap_or_default()));
    } else {
        emit(&format!("{text}\n"));
    }
    code(status)
}

fn dump(file: &Path, defines: Vec<(String, i64)>) -> ExitCode {
    let src = match read(file) {
        Ok(s) => s,
        Err(e) => return usage_error(&e),
    };
    let p = if defines.is_empty() {
        parse(&src)
    } else {
        arrayeq::parse_with_overrides(&src, &defines.into_iter().collect())
    };
    let p = match p {
        Ok(p) => p,
        Err(e) => {
            eprintln!("{}", e.render(&file.display().to_string()));
            return code(EXIT_UNSUPPORTED);
        }
    };
    match Addg::build(&p) {
        Ok(g) => {
            emit(&g.to_dot());
            code(EXIT_EQUIVALENT)
        }
        Err(e) => {
            eprintln!("arrayeq: {e}");
            code(EXIT_UNSUPPORTED)
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { code(EXIT_USAGE) } else { code(0) };
        }
    };
    match cli.command {
        Command::Check(a) => check(a),
        Command::Oracle(a) => oracle(a),
        Command::DumpAddg { file, defines } => dump(&file, defines),
    }
}
