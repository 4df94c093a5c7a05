//! Command implementations. Each returns the report body plus the exit
//! code: 0 all pass, 1 certified violation, 2 malformed input or usage.

use crate::config::SweepConfig;
use crate::report::{convergence_to_csv, convergence_to_json};
use crate::suites::{run_suite, SuiteKind};
use gbmul::invertibility::riesz_inverse;
use gbmul::invertibility::RieszInversion;
use gbmul::multiplier::{adjoint_check, norm_certificates};
use gbmul::numerics::{frobenius_norm, max_abs_entry, operator_norm};
use gbmul::{io, CMatrix, ToleranceConfig};
use std::path::Path;

pub const EXIT_PASS: i32 = 0;
pub const EXIT_VIOLATION: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

pub struct CommandOutput {
    pub body: String,
    pub code: i32,
}

#[derive(Debug)]
pub struct CliError {
    pub message: String,
    pub code: i32,
}

impl CliError {
    fn usage(message: impl Into<String>) -> CliError {
        CliError { message: message.into(), code: EXIT_USAGE }
    }
}

impl From<gbmul::Error> for CliError {
    fn from(err: gbmul::Error) -> CliError {
        CliError::usage(err.to_string())
    }
}

pub type CmdResult = Result<CommandOutput, CliError>;

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum MultiplierAction {
    Build,
    Apply,
    Norms,
    Adjoint,
    Invert,
    Profile,
}

fn load(path: &Path) -> Result<String, CliError> {
    std::fs::read_to_string(path)
        .map_err(|e| CliError::usage(format!("cannot read {}: {e}", path.display())))
}

fn finish(doc: serde_json::Value, code: i32) -> CommandOutput {
    let mut body = serde_json::to_string_pretty(&doc).expect("report serialization cannot fail");
    body.push('\n');
    CommandOutput { body, code }
}

/// Classification, frame bounds, and dual summaries for a sequence file.
pub fn cmd_classify(path: &Path, tol: &ToleranceConfig) -> CmdResult {
    let seq = io::sequence_from_json(&load(path)?)?;
    let class = seq.classify(tol)?;
    let bounds = seq.frame_bounds(tol)?;
    let mut doc = serde_json::json!({
        "dim": seq.dim(),
        "count": seq.count(),
        "class": class,
        "bounds": bounds,
    });
    if class.kind.is_frame() {
        let dual = seq.canonical_dual(tol)?;
        doc["canonical_dual_bounds"] = serde_json::json!(dual.frame_bounds(tol)?);
    }
    if class.kind.is_riesz() {
        let dual = seq.biorthogonal_dual(tol)?;
        let cross = dual.analysis_matrix() * seq.synthesis_matrix();
        let n = seq.count();
        let residual = max_abs_entry(&(cross - CMatrix::identity(n, n)));
        doc["biorthogonal_residual"] = serde_json::json!(residual);
    }
    Ok(finish(doc, EXIT_PASS))
}

/// Runs the requested actions against a multiplier bundle. Certificates
/// that fail flip the exit code to 1; shape problems are usage errors.
pub fn cmd_multiplier(
    path: &Path,
    actions: &[MultiplierAction],
    vector: Option<&Path>,
    tol: &ToleranceConfig,
) -> CmdResult {
    let m = io::bundle_from_json(&load(path)?, tol)?;
    let mut doc = serde_json::Map::new();
    let mut code = EXIT_PASS;
    for action in actions {
        match action {
            MultiplierAction::Build => {
                doc.insert(
                    "build".into(),
                    serde_json::json!({
                        "rows": m.assembled().nrows(),
                        "cols": m.assembled().ncols(),
                        "operator_norm": operator_norm(m.assembled())?,
                        "frobenius_norm": frobenius_norm(m.assembled()),
                    }),
                );
            }
            MultiplierAction::Apply => {
                let vec_path = vector.ok_or_else(|| {
                    CliError::usage("the apply action needs --vector <PATH>")
                })?;
                let v = io::vector_from_json(&load(vec_path)?)?;
                let out = m.apply(&v)?;
                let pairs: Vec<[f64; 2]> = out.iter().map(|z| [z.re, z.im]).collect();
                doc.insert("apply".into(), serde_json::json!({ "output": pairs }));
            }
            MultiplierAction::Norms => {
                let certs = norm_certificates(&m, tol)?;
                if certs.iter().any(|c| !c.passed()) {
                    code = EXIT_VIOLATION;
                }
                doc.insert("norms".into(), serde_json::json!({ "certificates": certs }));
            }
            MultiplierAction::Adjoint => {
                let cert = adjoint_check(&m, tol)?;
                if !cert.passed() {
                    code = EXIT_VIOLATION;
                }
                doc.insert("adjoint".into(), serde_json::json!({ "certificate": cert }));
            }
            MultiplierAction::Invert => {
                let value = match riesz_inverse(&m, tol)? {
                    RieszInversion::Invertible { inverse, left_residual, right_residual } => {
                        serde_json::json!({
                            "invertible": true,
                            "left_residual": left_residual,
                            "right_residual": right_residual,
                            "inverse_operator_norm": operator_norm(inverse.assembled())?,
                        })
                    }
                    RieszInversion::Singular { symbol_sigma_min, multiplier_sigma_min } => {
                        serde_json::json!({
                            "invertible": false,
                            "symbol_sigma_min": symbol_sigma_min,
                            "multiplier_sigma_min": multiplier_sigma_min,
                        })
                    }
                };
                doc.insert("invert".into(), value);
            }
            MultiplierAction::Profile => {
                let spectrum = m.singular_profile()?;
                doc.insert(
                    "profile".into(),
                    serde_json::json!({ "singular_values": spectrum.values() }),
                );
            }
        }
    }
    Ok(finish(serde_json::Value::Object(doc), code))
}

/// Runs a randomized suite sweep; any failed draw makes the exit code 1.
pub fn cmd_check(
    kind: SuiteKind,
    cfg: &SweepConfig,
    tol: &ToleranceConfig,
    replay: Option<u64>,
    csv: bool,
) -> CmdResult {
    cfg.validate().map_err(CliError::usage)?;
    let report = run_suite(kind, cfg, tol, replay)?;
    let body = if csv { report.to_csv() } else { report.to_json() };
    let code = if report.any_failure() { EXIT_VIOLATION } else { EXIT_PASS };
    Ok(CommandOutput { body, code })
}

/// Runs a perturbation experiment file; a missed envelope or decay target
/// makes the exit code 1.
pub fn cmd_perturb(path: &Path, tol: &ToleranceConfig, csv: bool) -> CmdResult {
    let experiment = io::experiment_from_json(&load(path)?, tol)?;
    let report = experiment.run(tol)?;
    let body = if csv { convergence_to_csv(&report) } else { convergence_to_json(&report) };
    let code = if report.all_satisfied && report.envelope_monotone {
        EXIT_PASS
    } else {
        EXIT_VIOLATION
    };
    Ok(CommandOutput { body, code })
}
