//! Command-line front end.
//!
//! Exit codes: 0 success, 1 verification or internal failure, 2 invalid input.

use std::fs;
use std::io::{self, Write};
use std::path::PathBuf;

use clap::{Parser, Subcommand};
use serde_json::{json, Value};

use crate::construct::{check_hypotheses, generate_family, period_exponent, reduce_and_check};
use crate::error::{Error, Result};
use crate::obstruction::{generate_report, ObstructionReport, SCHEMA_VERSION};
use crate::padic::{embed, hensel_root, DEFAULT_PRECISION};
use crate::pell;
use crate::periods::minimal_period;
use crate::quadfield::QuadElem;

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILURE: i32 = 1;
pub const EXIT_INVALID: i32 = 2;

pub const DEFAULT_HEIGHT_BOUND: u64 = 20;
pub const DEFAULT_PELL_COUNT: u64 = 5;

#[derive(Debug, Parser)]
#[command(
    name = "ramper",
    version,
    about = "Certified descent obstructions from minimal ramified periods"
)]
pub struct Cli {
    /// Increase log output on stderr.
    #[arg(short, long, action = clap::ArgAction::Count, global = true)]
    pub verbose: u8,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Build, certify and write obstruction reports for Pell indices 0..count.
    Generate {
        #[arg(long)]
        p: u64,
        #[arg(long)]
        g: u64,
        #[arg(long, default_value_t = DEFAULT_PELL_COUNT)]
        count: u64,
        /// Working precision in base-p digits.
        #[arg(long, env = "RAMPER_PRECISION", default_value_t = DEFAULT_PRECISION)]
        precision: i64,
        #[arg(long, default_value_t = DEFAULT_HEIGHT_BOUND)]
        height_bound: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Recompute every report in a file from its (p, g, pell_index) and compare.
    Verify { file: PathBuf },
    /// Print norm -1 solutions of x^2 - p y^2 = -1 as JSON lines.
    Pell {
        #[arg(long)]
        p: u64,
        #[arg(long, default_value_t = 1)]
        count: u64,
    },
    /// Compute alpha and the minimal period for a parameter a, given as "x+y*sqrtP".
    Period {
        #[arg(long)]
        p: u64,
        #[arg(long)]
        g: u64,
        #[arg(long)]
        a: String,
        #[arg(long, env = "RAMPER_PRECISION", default_value_t = DEFAULT_PRECISION)]
        precision: i64,
    },
}

/// Run-wide settings shared by the subcommands.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Config {
    pub precision: i64,
    pub height_bound: u64,
    pub pell_count: u64,
    pub out: Option<PathBuf>,
    pub verbosity: u8,
}

impl Default for Config {
    fn default() -> Self {
        Config {
            precision: DEFAULT_PRECISION,
            height_bound: DEFAULT_HEIGHT_BOUND,
            pell_count: DEFAULT_PELL_COUNT,
            out: None,
            verbosity: 0,
        }
    }
}

impl Config {
    pub fn validate(&self) -> Result<()> {
        if self.precision < 4 {
            return Err(Error::Config(format!(
                "precision must be at least 4, got {}",
                self.precision
            )));
        }
        if self.height_bound < 1 {
            return Err(Error::Config("height bound must be at least 1".into()));
        }
        Ok(())
    }
}

fn exit_code(err: &Error) -> i32 {
    match err {
        Error::Hypothesis(_)
        | Error::InvalidPrime(_)
        | Error::Parse(_)
        | Error::Config(_)
        | Error::PerfectSquare(_)
        | Error::NotUnit(_)
        | Error::BadReduction(_)
        | Error::HenselPrecondition(_)
        | Error::DivisionByZero => EXIT_INVALID,
        _ => EXIT_FAILURE,
    }
}

/// Generates the reports for Pell indices `0..config.pell_count`.
pub fn cmd_generate(p: u64, g: u64, config: &Config) -> Result<Vec<ObstructionReport>> {
    config.validate()?;
    let params = check_hypotheses(p, g)?;
    // checks pairwise distinctness of a across the batch
    generate_family(params, config.pell_count)?;
    (0..config.pell_count)
        .map(|k| {
            if config.verbosity > 0 {
                eprintln!("generating p={p} g={g} k={k}");
            }
            generate_report(params, k, config.precision, config.height_bound)
        })
        .collect()
}

/// Top-level fields in the order they are compared.
const FIELDS: &[&str] = &[
    "schema_version",
    "p",
    "g",
    "pell_index",
    "v",
    "b",
    "n",
    "a",
    "c",
    "precision",
    "alpha",
    "minimal_period",
    "d",
    "certificate",
    "witness_refutation",
    "conclusion",
];

/// Inputs from which a report is recomputed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
struct Inputs {
    p: u64,
    g: u64,
    k: u64,
    precision: i64,
    height_bound: u64,
}

fn field_u64(v: &Value, path: &[&str]) -> Option<u64> {
    path.iter().try_fold(v, |v, key| v.get(key))?.as_u64()
}

impl Inputs {
    fn of(stored: &Value) -> Result<Self> {
        let need = |path: &[&str]| {
            field_u64(stored, path).ok_or_else(|| {
                Error::Parse(format!("missing or non-integer field `{}`", path.join(".")))
            })
        };
        Ok(Inputs {
            p: need(&["p"])?,
            g: need(&["g"])?,
            k: need(&["pell_index"])?,
            precision: stored
                .get("precision")
                .and_then(Value::as_i64)
                .ok_or_else(|| Error::Parse("missing or non-integer field `precision`".into()))?,
            height_bound: need(&["witness_refutation", "height_bound"])?,
        })
    }
}

fn recompute(inputs: Inputs) -> Result<Value> {
    Config {
        precision: inputs.precision,
        height_bound: inputs.height_bound,
        ..Config::default()
    }
    .validate()?;
    let params = check_hypotheses(inputs.p, inputs.g)?;
    let report = generate_report(params, inputs.k, inputs.precision, inputs.height_bound)?;
    Ok(serde_json::to_value(report).expect("report serializes"))
}

fn mismatches(stored: &Value, recomputed: &Value) -> Vec<&'static str> {
    FIELDS
        .iter()
        .copied()
        .filter(|f| stored.get(f) != recomputed.get(f))
        .collect()
}

/// Result of checking one report.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Verdict {
    Match,
    /// The first field found to diverge from the recomputation.
    Diverges {
        field: String,
        detail: String,
    },
}

/// Input values suggested by the redundant payload, for attributing a divergence to an input field.
fn alternative_inputs(stored: &Value, inputs: Inputs) -> Vec<(&'static str, Inputs)> {
    let mut out = Vec::new();
    let v_p = field_u64(stored, &["v", "p"]);
    if let Some(p) = v_p.filter(|&p| p != inputs.p) {
        out.push(("p", Inputs { p, ..inputs }));
    }
    // g from d = g(g+1)/2, or from the period provenance
    if let Some(d) = field_u64(stored, &["d"]) {
        if let Some(g) = (1..=2 * d + 1)
            .find(|&g| period_exponent(g) == d)
            .filter(|&g| g != inputs.g)
        {
            out.push(("g", Inputs { g, ..inputs }));
        }
    }
    if let Some(g) = field_u64(stored, &["minimal_period", "g"]).filter(|&g| g != inputs.g) {
        out.push(("g", Inputs { g, ..inputs }));
    }
    if let Some(pi_prec) = stored
        .get("alpha")
        .and_then(|a| a.get("precision"))
        .and_then(Value::as_i64)
    {
        if pi_prec % 2 == 0 && pi_prec / 2 != inputs.precision {
            out.push((
                "precision",
                Inputs {
                    precision: pi_prec / 2,
                    ..inputs
                },
            ));
        }
    }
    // pell_index from v: solutions grow with k, so stop once past v
    if let Some(v) = stored
        .get("v")
        .and_then(|v| serde_json::from_value::<QuadElem>(v.clone()).ok())
    {
        let target = v.x().to_integer();
        for k in 0..=10_000u64 {
            let Ok(sol) = pell::pell_solution_at(v.p(), k) else {
                break;
            };
            if sol.to_quad() == v {
                if k != inputs.k {
                    out.push(("pell_index", Inputs { k, ..inputs }));
                }
                break;
            }
            if sol.x > target {
                break;
            }
        }
    }
    out
}

/// Recomputes a stored report from its inputs and names the first divergent field.
///
/// Fails only when the inputs themselves cannot be read.
pub fn verify_value(stored: &Value) -> Result<Verdict> {
    if !stored.is_object() {
        return Err(Error::Parse("report must be a JSON object".into()));
    }
    if field_u64(stored, &["schema_version"]) != Some(SCHEMA_VERSION as u64) {
        return Ok(Verdict::Diverges {
            field: "schema_version".into(),
            detail: format!("expected schema version {SCHEMA_VERSION}"),
        });
    }
    let inputs = Inputs::of(stored)?;
    let primary = recompute(inputs);
    let diverged = match &primary {
        Ok(value) => {
            let m = mismatches(stored, value);
            if m.is_empty() {
                return Ok(Verdict::Match);
            }
            if m.len() == 1 {
                return Ok(Verdict::Diverges {
                    field: m[0].into(),
                    detail: "differs from recomputation".into(),
                });
            }
            Some(m)
        }
        Err(_) => None,
    };

    // Several fields disagree: look for a single tampered input that explains all of them.
    for (field, alt) in alternative_inputs(stored, inputs) {
        if let Ok(value) = recompute(alt) {
            if mismatches(stored, &value) == [field] {
                return Ok(Verdict::Diverges {
                    field: field.into(),
                    detail: "inconsistent with the rest of the report".into(),
                });
            }
        }
    }
    Ok(match (primary, diverged) {
        (Err(Error::Hypothesis(failures)), _) => Verdict::Diverges {
            field: failures[0].field().into(),
            detail: Error::Hypothesis(failures).to_string(),
        },
        (Err(Error::Config(msg)), _) => Verdict::Diverges {
            field: "precision".into(),
            detail: msg,
        },
        (Err(e), _) => Verdict::Diverges {
            field: "p".into(),
            detail: format!("recomputation failed: {e}"),
        },
        (Ok(_), Some(m)) => Verdict::Diverges {
            field: m[0].into(),
            detail: format!("differs from recomputation (also: {})", m[1..].join(", ")),
        },
        (Ok(_), None) => unreachable!("mismatch list computed for successful recomputation"),
    })
}

pub fn verify_report(stored: &ObstructionReport) -> Verdict {
    verify_value(&serde_json::to_value(stored).expect("report serializes"))
        .expect("typed report has all inputs")
}

/// Splits a report file into its reports: a JSON array, or a single object.
pub fn parse_reports(text: &str) -> Result<Vec<Value>> {
    let value: Value = serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
    let items = match value {
        Value::Array(items) => items,
        single @ Value::Object(_) => vec![single],
        _ => {
            return Err(Error::Parse(
                "expected a report or an array of reports".into(),
            ))
        }
    };
    for item in &items {
        Inputs::of(item)?;
    }
    Ok(items)
}

/// Verifies every report, printing one line each; returns the exit code.
pub fn cmd_verify(text: &str, out: &mut impl Write, err: &mut impl Write) -> i32 {
    let reports = match parse_reports(text) {
        Ok(r) => r,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            return EXIT_INVALID;
        }
    };
    let mut code = EXIT_OK;
    for (i, report) in reports.iter().enumerate() {
        match verify_value(report) {
            Ok(Verdict::Match) => {
                let _ = writeln!(out, "report {i}: ok");
            }
            Ok(Verdict::Diverges { field, detail }) => {
                let _ = writeln!(err, "report {i}: field `{field}` diverges: {detail}");
                code = EXIT_FAILURE;
            }
            Err(e) => {
                let _ = writeln!(err, "report {i}: error: {e}");
                return EXIT_INVALID;
            }
        }
    }
    code
}

pub fn cmd_pell(p: u64, count: u64) -> Result<Vec<String>> {
    Ok(pell::solutions(p, count)?
        .iter()
        .map(|s| json!({"index": s.index, "x": s.x.to_string(), "y": s.y.to_string()}).to_string())
        .collect())
}

pub fn cmd_period(p: u64, g: u64, a: &str, precision: i64) -> Result<Value> {
    Config {
        precision,
        ..Config::default()
    }
    .validate()?;
    if g == 0 {
        return Err(Error::Config("genus must be positive".into()));
    }
    let a = QuadElem::parse(a, p)?;
    let c = reduce_and_check(&a, g)?;
    let t = a.scale(&num_rational::BigRational::new(1.into(), c.into()));
    let alpha = hensel_root(&embed(&t, precision), 2 * g + 2, precision)?;
    let period = minimal_period(&alpha, g)?;
    Ok(json!({
        "p": p,
        "g": g,
        "a": a,
        "c": c,
        "precision": precision,
        "alpha": alpha.digits(),
        "minimal_period": period.record(g, &a, c),
    }))
}

/// Writes to stdout; a closed pipe ends the run quietly.
fn emit(text: &str) -> i32 {
    match io::stdout().lock().write_all(text.as_bytes()) {
        Ok(()) => EXIT_OK,
        Err(e) if e.kind() == io::ErrorKind::BrokenPipe => EXIT_OK,
        Err(e) => {
            eprintln!("error: {e}");
            EXIT_FAILURE
        }
    }
}

fn report_error(e: &Error) -> i32 {
    eprintln!("error: {e}");
    exit_code(e)
}

/// Parses `args` and runs the selected subcommand; returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                EXIT_INVALID
            } else {
                EXIT_OK
            };
        }
    };
    match cli.command {
        Command::Generate {
            p,
            g,
            count,
            precision,
            height_bound,
            out,
        } => {
            let config = Config {
                precision,
                height_bound,
                pell_count: count,
                out,
                verbosity: cli.verbose,
            };
            let reports = match cmd_generate(p, g, &config) {
                Ok(r) => r,
                Err(e) => return report_error(&e),
            };
            let mut text = serde_json::to_string_pretty(&reports).expect("reports serialize");
            text.push('\n');
            match &config.out {
                Some(path) => match fs::write(path, text) {
                    Ok(()) => EXIT_OK,
                    Err(e) => {
                        eprintln!("error: cannot write {}: {e}", path.display());
                        EXIT_FAILURE
                    }
                },
                None => emit(&text),
            }
        }
        Command::Verify { file } => {
            let text = match fs::read_to_string(&file) {
                Ok(t) => t,
                Err(e) => {
                    eprintln!("error: cannot read {}: {e}", file.display());
                    return EXIT_INVALID;
                }
            };
            cmd_verify(&text, &mut io::stdout(), &mut io::stderr())
        }
        Command::Pell { p, count } => match cmd_pell(p, count) {
            Ok(lines) => emit(&(lines.join("\n") + "\n")),
            Err(e) => {
                eprintln!("error: {e}");
                EXIT_INVALID
            }
        },
        Command::Period { p, g, a, precision } => match cmd_period(p, g, &a, precision) {
            Ok(value) => emit(&(serde_json::to_string_pretty(&value).expect("serializes") + "\n")),
            Err(e) => {
                eprintln!("error: {e}");
                EXIT_INVALID
            }
        },
    }
}

pub fn main() -> i32 {
    run(std::env::args_os())
}
