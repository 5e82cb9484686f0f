//! Command-line front end: `classify`, `junction`, `check`.
//!
//! Exit codes
//! - classify: 0 every equation resoluble, 2 otherwise, 1 on input errors.
//! - junction: 0 conditions derived, 2 not resoluble, 3 `--method mh` without
//!   a valid MH declaration, 1 on input errors.
//! - check: 0 consistent, 2 violated, 4 inconclusive, 1 on scenario errors.

pub mod json;
pub mod latex;

use std::fs;
use std::path::{Path, PathBuf};

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand, ValueEnum};

use jcond_core::classify::{mh_verify, resoluble_decompose, MHCertificate};
use jcond_core::dsl::{parse_system, PDESystem};
use jcond_core::expr::expr_equal;
use jcond_core::junction::{
    junction_from_mh, junction_from_resoluble, junction_from_resoluble_with, restrict_to_gamma,
    simplify_with_classical, JumpMode, TraceBinding,
};
use jcond_core::numcheck::{
    conditions_max_abs, convergence_study, GridSpec, MollifierSpec, NumVerdict, Scenario,
    CONDITION_TOL,
};

use json::{
    certificates_json, conditions_json, report_json, verdicts_json, Document, VerdictJson,
};
use latex::latex_document;

pub struct Outcome {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

impl Outcome {
    fn failure(message: String) -> Outcome {
        Outcome { code: 1, stdout: String::new(), stderr: message }
    }
}

#[derive(Parser)]
#[command(name = "jcond", version, about = "Junction conditions for jump-discontinuous PDE solutions")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Decide resolubility of each equation and print certificates.
    Classify(ClassifyArgs),
    /// Derive the junction conditions along the jump surface.
    Junction(JunctionArgs),
    /// Mollify the jump and test the conditions numerically.
    Check(CheckArgs),
}

#[derive(Args)]
struct ClassifyArgs {
    /// System description file.
    file: PathBuf,
    /// Emit the JSON document (default).
    #[arg(long)]
    json: bool,
    /// Write the document to PATH instead of stdout.
    #[arg(long, value_name = "PATH")]
    out: Option<PathBuf>,
}

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum)]
enum Method {
    Resoluble,
    Mh,
}

#[derive(Args)]
struct JunctionArgs {
    /// System description file.
    file: PathBuf,
    /// Derivation route: certificate expansion or the declared MH shape.
    #[arg(long, value_enum, default_value_t = Method::Resoluble)]
    method: Method,
    /// Emit LaTeX instead of JSON.
    #[arg(long, conflicts_with = "json")]
    latex: bool,
    /// Emit the JSON document (default).
    #[arg(long)]
    json: bool,
    /// Write the document to PATH instead of stdout.
    #[arg(long, value_name = "PATH")]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct CheckArgs {
    /// System description file.
    file: PathBuf,
    /// Mollifier half-widths, comma separated, strictly decreasing.
    #[arg(long, value_delimiter = ',', default_values_t = vec![0.1, 0.05, 0.025])]
    eps: Vec<f64>,
    /// Base grid points per axis before refinement near the jump.
    #[arg(long, default_value_t = 24)]
    grid: usize,
    /// Emit the JSON document (default).
    #[arg(long)]
    json: bool,
    /// Write the document to PATH instead of stdout.
    #[arg(long, value_name = "PATH")]
    out: Option<PathBuf>,
}

/// Run the CLI on `args` (without the program name) and collect the result
/// instead of exiting, so tests and the binary share one entry point.
pub fn execute(args: &[String]) -> Outcome {
    let mut argv = vec!["jcond".to_string()];
    argv.extend(args.iter().cloned());
    let cli = match Cli::try_parse_from(&argv) {
        Ok(cli) => cli,
        Err(e) => {
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    Outcome { code: 0, stdout: e.to_string(), stderr: String::new() }
                }
                _ => Outcome::failure(e.to_string()),
            }
        }
    };
    match cli.command {
        Command::Classify(a) => cmd_classify(a),
        Command::Junction(a) => cmd_junction(a),
        Command::Check(a) => cmd_check(a),
    }
}

fn load_system(path: &Path) -> Result<PDESystem, Outcome> {
    let text = fs::read_to_string(path)
        .map_err(|e| Outcome::failure(format!("error: {}: {e}\n", path.display())))?;
    parse_system(&text).map_err(|diags| {
        let mut msg = String::new();
        for d in diags {
            msg.push_str(&format!("{}: {d}\n", path.display()));
        }
        Outcome::failure(msg)
    })
}

fn emit(out: &Option<PathBuf>, content: String, code: i32) -> Outcome {
    match out {
        None => Outcome { code, stdout: content, stderr: String::new() },
        Some(path) => match fs::write(path, &content) {
            Ok(()) => Outcome { code, stdout: String::new(), stderr: String::new() },
            Err(e) => Outcome::failure(format!("error: {}: {e}\n", path.display())),
        },
    }
}

fn cmd_classify(a: ClassifyArgs) -> Outcome {
    let sys = match load_system(&a.file) {
        Ok(sys) => sys,
        Err(out) => return out,
    };
    let report = resoluble_decompose(&sys);
    let mut doc = Document::new(&sys);
    doc.verdicts = verdicts_json(&sys, &report.verdicts);
    if let Some(cert) = &report.certificate {
        doc.certificates = certificates_json(&sys, cert);
    }
    let code = if report.all_resoluble() { 0 } else { 2 };
    emit(&a.out, doc.to_pretty(), code)
}

fn cmd_junction(a: JunctionArgs) -> Outcome {
    let sys = match load_system(&a.file) {
        Ok(sys) => sys,
        Err(out) => return out,
    };
    match a.method {
        Method::Resoluble => {
            let report = resoluble_decompose(&sys);
            let mut doc = Document::new(&sys);
            doc.verdicts = verdicts_json(&sys, &report.verdicts);
            let Some(cert) = &report.certificate else {
                return emit(&a.out, doc.to_pretty(), 2);
            };
            doc.certificates = certificates_json(&sys, cert);
            let conds = match junction_from_resoluble(&sys, cert) {
                Ok(conds) => conds,
                Err(e) => {
                    return Outcome::failure(format!("error: certificate expansion failed: {e}\n"))
                }
            };
            let conds = restrict_to_gamma(&simplify_with_classical(&conds, &sys));
            doc.conditions = conditions_json(&sys, &conds);
            let content =
                if a.latex { latex_document(&sys, &conds) } else { doc.to_pretty() };
            emit(&a.out, content, 0)
        }
        Method::Mh => {
            let cert = match MHCertificate::from_system(&sys) {
                Ok(cert) => cert,
                Err(e) => {
                    return Outcome { code: 3, stdout: String::new(), stderr: format!("error: {e}\n") }
                }
            };
            if !mh_verify(&sys, &cert) {
                return Outcome {
                    code: 3,
                    stdout: String::new(),
                    stderr: "error: declared MH shape does not reproduce the equations\n".to_string(),
                };
            }
            let conds = match junction_from_mh(&sys, &cert) {
                Ok(conds) => conds,
                Err(e) => {
                    return Outcome::failure(format!("error: MH expansion failed: {e}\n"))
                }
            };
            let conds = restrict_to_gamma(&simplify_with_classical(&conds, &sys));
            let mut doc = Document::new(&sys);
            doc.verdicts = (1..=sys.num_equations())
                .map(|beta| VerdictJson { beta, status: "mh_verified", witness: None })
                .collect();
            doc.conditions = conditions_json(&sys, &conds);
            let content =
                if a.latex { latex_document(&sys, &conds) } else { doc.to_pretty() };
            emit(&a.out, content, 0)
        }
    }
}

fn read_seed() -> Result<u64, Outcome> {
    match std::env::var("JCOND_SEED") {
        Err(_) => Ok(0),
        Ok(raw) => raw
            .trim()
            .parse()
            .map_err(|_| Outcome::failure(format!("error: invalid JCOND_SEED: {raw:?}\n"))),
    }
}

fn cmd_check(a: CheckArgs) -> Outcome {
    let sys = match load_system(&a.file) {
        Ok(sys) => sys,
        Err(out) => return out,
    };
    let seed = match read_seed() {
        Ok(seed) => seed,
        Err(out) => return out,
    };
    let scenario = match Scenario::from_system(&sys) {
        Ok(s) => s,
        Err(e) => return Outcome::failure(format!("error: {e}\n")),
    };
    let mollifier = match MollifierSpec::new(a.eps) {
        Ok(m) => m,
        Err(e) => return Outcome::failure(format!("error: {e}\n")),
    };
    let grid_spec = match GridSpec::new(a.grid) {
        Ok(g) => g,
        Err(e) => return Outcome::failure(format!("error: {e}\n")),
    };
    let report = match convergence_study(&scenario, &mollifier, &grid_spec, seed) {
        Ok(r) => r,
        Err(e) => return Outcome::failure(format!("error: {e}\n")),
    };

    let class = resoluble_decompose(&sys);
    let mut doc = Document::new(&sys);
    doc.verdicts = verdicts_json(&sys, &class.verdicts);
    let mut rep = report_json(&report, seed);
    if let Some(cert) = &class.certificate {
        doc.certificates = certificates_json(&sys, cert);
        let no_jump = (0..sys.num_unknowns())
            .all(|alpha| expr_equal(&scenario.traces_minus[alpha], &scenario.traces_plus[alpha]));
        let mode = if no_jump { JumpMode::NoJump } else { JumpMode::Jump };
        let binding = TraceBinding::new(&sys, mode);
        if let Ok(conds) = junction_from_resoluble_with(&sys, cert, &binding) {
            let conds = restrict_to_gamma(&simplify_with_classical(&conds, &sys));
            doc.conditions = conditions_json(&sys, &conds);
            if let Ok(max_abs) = conditions_max_abs(&scenario, &conds, &report.gamma_points) {
                rep.condition_max_abs = Some(max_abs);
                rep.conditions_hold_numerically = Some(max_abs < CONDITION_TOL);
            }
        }
    }
    doc.report = Some(rep);
    let code = match report.verdict {
        NumVerdict::Consistent => 0,
        NumVerdict::Violated => 2,
        NumVerdict::Inconclusive => 4,
    };
    emit(&a.out, doc.to_pretty(), code)
}
