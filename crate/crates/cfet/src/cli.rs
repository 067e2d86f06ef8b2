//! The `cfet` command line.
//!
//! Exit codes: 0 confirmed, 1 property violated (informational), 2 usage or
//! contract error, 3 numerical failure.

use std::fmt::Write as _;
use std::path::PathBuf;

use cfet_core::certify::Certificate;
use cfet_core::engine::problem::PRESET_NAMES;
use cfet_core::engine::{amplification_probe, empirical_order, halving_steps, preset, ProblemSpec};
use cfet_core::linalg::Matrix;
use cfet_core::scalar::rational_to_string;
use cfet_core::scheme::DerivedCoefficients;
use cfet_core::taylor::{exact_flow_up_to, word_coefficients_closed, word_coefficients_recursive};
use cfet_core::{derive_coefficients, residuals_order5, Rational, Scalar, Scheme};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::{json, Map, Value};

use crate::batch::{certify_all, certify_random, identity_at, identity_random};
use crate::error::CfetError;
use crate::io::resolve_scheme;
use crate::report::{
    convergence_csv, fitted_order_label, flow_table_json, residual_map, scalar_value, word_table_json,
    ConvergenceSummary, ResidualReport, CONDITIONS_NOTE,
};
use crate::search::{search_positive, DEFAULT_EPS, FLOOR_CALIBRATION};

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
    Text,
}

#[derive(Debug, Parser)]
#[command(
    name = "cfet",
    version,
    about = "Order conditions, positivity certificates and experiments for commutator-free exponential schemes"
)]
pub struct Cli {
    /// Seed for every random choice.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Write the report here instead of stdout.
    #[arg(long, global = true)]
    pub output: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    pub format: Format,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Evaluate the order conditions of a scheme file (or bundled scheme name).
    Verify {
        scheme: String,
        /// Absolute tolerance; defaults to 0 for exact schemes and 1e-12 otherwise.
        #[arg(long)]
        tol: Option<String>,
    },
    /// Exact certificates that no y gives order five for positive weights.
    Certify(CertifyArgs),
    /// Multistart least-squares search over positive weights.
    Search {
        #[arg(long = "stages", short = 'J', default_value_t = 2)]
        stages: usize,
        #[arg(long, default_value_t = 5)]
        order: usize,
        #[arg(long, default_value_t = 200)]
        restarts: usize,
        #[arg(long, default_value_t = DEFAULT_EPS)]
        eps: f64,
    },
    /// Empirical convergence order against a reference solution.
    Converge {
        scheme: String,
        #[arg(long)]
        problem: String,
        /// Comma-separated step sizes, each half the previous (default 1/8 … 1/128).
        #[arg(long)]
        taus: Option<String>,
    },
    /// Check the inductive-step identity at random exact points.
    IdentityCheck {
        #[arg(long, default_value_t = 100)]
        trials: usize,
        /// Evaluate at this point `σ̃,b,eSe,eSd,dSd` instead of random ones.
        #[arg(long)]
        point: Option<String>,
    },
    /// Per-exponential growth factors over one step.
    Stability {
        scheme: String,
        #[arg(long)]
        problem: String,
        #[arg(long, conflicts_with = "stiffness")]
        tau: Option<String>,
        /// Choose τ so that |b_j| τ ρ equals this, using the most negative b_j
        /// (or the largest |b_j| when all are positive) and ρ = ‖A(t0)‖∞.
        #[arg(long)]
        stiffness: Option<f64>,
    },
    /// Dump the order-condition system and word-coefficient tables as JSON.
    DeriveConditions { scheme: Option<String> },
}

#[derive(Debug, Args)]
pub struct CertifyArgs {
    /// Comma-separated exact weights, e.g. "1/2,1/2".
    #[arg(long, conflicts_with = "random")]
    pub b: Option<String>,
    /// Number of random lattice weight vectors.
    #[arg(long)]
    pub random: Option<usize>,
    #[arg(long = "j-range", default_value = "2:8")]
    pub j_range: String,
}

/// Rendered output and exit status of one command.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Outcome {
    pub output: String,
    pub code: u8,
}

fn outcome(output: String, ok: bool) -> Outcome {
    Outcome { output, code: if ok { 0 } else { 1 } }
}

fn to_json<T: Serialize>(v: &T) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("reports serialize");
    s.push('\n');
    s
}

fn unsupported(format: Format, command: &str) -> CfetError {
    CfetError::Usage(format!("--format {format:?} is not available for {command}").to_lowercase())
}

fn parse_list(text: &str) -> Result<Vec<Scalar>, CfetError> {
    text.split(',')
        .map(|s| s.trim().parse::<Scalar>().map_err(|e| CfetError::Usage(format!("bad value {s:?}: {e}"))))
        .collect()
}

fn parse_exact_list(text: &str) -> Result<Vec<Rational>, CfetError> {
    parse_list(text)?
        .into_iter()
        .map(|s| {
            s.as_exact()
                .cloned()
                .ok_or_else(|| CfetError::Precondition("precondition violated: weights must be exact rationals".into()))
        })
        .collect()
}

fn parse_range(text: &str) -> Result<[usize; 2], CfetError> {
    let bad = || CfetError::Usage(format!("J range must look like 2:8, got {text:?}"));
    let (lo, hi) = text.split_once(':').ok_or_else(bad)?;
    Ok([lo.trim().parse().map_err(|_| bad())?, hi.trim().parse().map_err(|_| bad())?])
}

fn find_preset(name: &str) -> Result<ProblemSpec, CfetError> {
    preset(name)
        .ok_or_else(|| CfetError::Usage(format!("unknown problem {name:?}; known: {}", PRESET_NAMES.join(", "))))
}

pub fn run(cli: &Cli) -> Result<Outcome, CfetError> {
    let format = cli.format;
    match &cli.command {
        Command::Verify { scheme, tol } => verify(format, scheme, tol.as_deref()),
        Command::Certify(args) => certify(format, args, cli.seed),
        Command::Search { stages, order, restarts, eps } => search(format, *stages, *order, *restarts, *eps, cli.seed),
        Command::Converge { scheme, problem, taus } => converge(format, scheme, problem, taus.as_deref()),
        Command::IdentityCheck { trials, point } => identity(format, *trials, point.as_deref(), cli.seed),
        Command::Stability { scheme, problem, tau, stiffness } => {
            stability(format, scheme, problem, tau.as_deref(), *stiffness)
        }
        Command::DeriveConditions { scheme } => derive_conditions(format, scheme.as_deref()),
    }
}

fn verify(format: Format, path: &str, tol: Option<&str>) -> Result<Outcome, CfetError> {
    let scheme = resolve_scheme(path)?;
    let tol = match tol {
        Some(t) => t.parse::<Scalar>().map_err(|e| CfetError::Usage(format!("bad tolerance: {e}")))?,
        None if scheme.is_exact() => Scalar::exact(0, 1),
        None => Scalar::Float(1e-12),
    };
    if !(tol >= Scalar::exact(0, 1)) {
        return Err(CfetError::Usage("tolerance must be non-negative".into()));
    }
    let report = ResidualReport::new(&scheme, &tol);
    let text = match format {
        Format::Json => to_json(&report),
        Format::Text => report.to_text(),
        Format::Csv => return Err(unsupported(format, "verify")),
    };
    Ok(outcome(text, report.claim_holds()))
}

fn certify(format: Format, args: &CertifyArgs, seed: u64) -> Result<Outcome, CfetError> {
    let report = match (&args.b, args.random) {
        (Some(b), None) => {
            let b = parse_exact_list(b)?;
            let n = b.len();
            certify_all(&[b], [n, n], seed)?
        }
        (None, Some(n)) => certify_random(n, parse_range(&args.j_range)?, seed)?,
        _ => return Err(CfetError::Usage("give exactly one of --b or --random".into())),
    };
    let text = match format {
        Format::Json => to_json(&report),
        Format::Csv => {
            let mut out = String::from("index,J,value,margin,verdict\n");
            for (i, c) in report.certificates.iter().enumerate() {
                let _ = writeln!(
                    out,
                    "{i},{},{},{},{}",
                    c.stages,
                    c.value.as_deref().unwrap_or(""),
                    c.margin.as_deref().unwrap_or(""),
                    c.verdict
                );
            }
            out
        }
        Format::Text => {
            let mut out = String::new();
            if report.samples == 1 {
                out.push_str(&report.certificates[0].to_text());
            }
            let _ = writeln!(
                out,
                "{}/{} infeasible; minimal margin {}",
                report.infeasible,
                report.samples,
                report.minimal_margin.as_deref().unwrap_or("n/a")
            );
            out
        }
    };
    Ok(outcome(text, report.all_infeasible()))
}

fn search(
    format: Format,
    stages: usize,
    order: usize,
    restarts: usize,
    eps: f64,
    seed: u64,
) -> Result<Outcome, CfetError> {
    let report = search_positive(stages, order, restarts, seed, eps)?;
    // For order five the floor should stay above the calibration value; for
    // lower orders the search should find a solution.
    let ok = if order == 5 { report.best_residual_norm > FLOOR_CALIBRATION } else { report.best_residual_norm < 1e-10 };
    let text = match format {
        Format::Json => to_json(&report),
        Format::Csv => {
            let mut out = String::from("restart,residual_norm,full_norm,b,y,verdict\n");
            for h in &report.history {
                let join = |v: &[f64]| v.iter().map(|x| format!("{x:e}")).collect::<Vec<_>>().join(" ");
                let verdict = h.certificate.as_ref().map_or("n/a", |c| c.verdict);
                let _ = writeln!(out, "{},{:e},{:e},{},{},{verdict}", h.index, h.residual_norm, h.full_norm, join(&h.b), join(&h.y));
            }
            out
        }
        Format::Text => format!(
            "J = {}, target order {}, {} restarts (seed {})\nbest residual norm {:.6e} (all six: {:.6e})\nb = {:?}\ny = {:?}\n{}\n",
            report.stages,
            report.target_order,
            report.restarts,
            report.seed,
            report.best_residual_norm,
            report.best_full_norm,
            report.best_b,
            report.best_y,
            report.note
        ),
    };
    Ok(outcome(text, ok))
}

fn parse_taus(text: Option<&str>) -> Result<Vec<f64>, CfetError> {
    match text {
        None => Ok(halving_steps(0.125, 5)),
        Some(t) => Ok(parse_list(t)?.iter().map(Scalar::to_f64).collect()),
    }
}

fn converge(format: Format, path: &str, problem: &str, taus: Option<&str>) -> Result<Outcome, CfetError> {
    let scheme = resolve_scheme(path)?;
    let spec = find_preset(problem)?;
    let taus = parse_taus(taus)?;
    let report = empirical_order(&scheme, &spec, &taus)?;
    let text = match format {
        Format::Csv => convergence_csv(&report),
        Format::Json => to_json(&ConvergenceSummary::new(scheme.name(), problem, &report)),
        Format::Text => {
            let mut out = convergence_csv(&report);
            let _ = writeln!(out, "fitted order: {}", fitted_order_label(&report));
            for n in &report.notes {
                let _ = writeln!(out, "note: {n}");
            }
            out
        }
    };
    Ok(outcome(text, true))
}

fn identity(format: Format, trials: usize, point: Option<&str>, seed: u64) -> Result<Outcome, CfetError> {
    if trials == 0 {
        return Err(CfetError::Usage("trials must be at least 1".into()));
    }
    let report = match point {
        Some(p) => identity_at(&[parse_exact_list(p)?], seed)?,
        None => identity_random(trials, seed)?,
    };
    let text = match format {
        Format::Json => to_json(&report),
        Format::Text => format!(
            "{} points, {} nonzero differences ({} pole draws skipped)\n",
            report.trials,
            report.failures.len(),
            report.skipped_poles
        ),
        Format::Csv => return Err(unsupported(format, "identity-check")),
    };
    Ok(outcome(text, report.all_zero()))
}

fn norm_inf(m: &Matrix<f64>) -> f64 {
    (0..m.rows()).map(|i| m.row(i).iter().map(|x| x.abs()).sum::<f64>()).fold(0.0, f64::max)
}

fn stiffness_tau(scheme: &Scheme, spec: &ProblemSpec, stiffness: f64) -> Result<f64, CfetError> {
    let b: Vec<f64> = scheme.weights().iter().map(Scalar::to_f64).collect();
    let negative = b.iter().filter(|x| **x < 0.0).fold(0.0f64, |acc, x| acc.max(x.abs()));
    let weight = if negative > 0.0 { negative } else { b.iter().fold(0.0f64, |acc, x| acc.max(x.abs())) };
    let rho = norm_inf(&spec.generator.at(spec.t0));
    if !(stiffness > 0.0) || weight == 0.0 || rho == 0.0 {
        return Err(CfetError::Usage("--stiffness needs a positive value and a non-zero generator".into()));
    }
    Ok(stiffness / (weight * rho))
}

#[derive(Serialize)]
struct StabilityReport<'a> {
    scheme: &'a str,
    problem: &'a str,
    tau: f64,
    b: Vec<f64>,
    factors: Vec<f64>,
    max_factor: f64,
    stable: bool,
}

fn stability(
    format: Format,
    path: &str,
    problem: &str,
    tau: Option<&str>,
    stiffness: Option<f64>,
) -> Result<Outcome, CfetError> {
    let scheme = resolve_scheme(path)?;
    let spec = find_preset(problem)?;
    let tau = match (tau, stiffness) {
        (Some(t), None) => t.parse::<Scalar>().map_err(|e| CfetError::Usage(format!("bad tau: {e}")))?.to_f64(),
        (None, Some(s)) => stiffness_tau(&scheme, &spec, s)?,
        _ => return Err(CfetError::Usage("give exactly one of --tau or --stiffness".into())),
    };
    let factors = amplification_probe(&scheme, &spec, tau)?;
    let max_factor = factors.iter().copied().fold(0.0, f64::max);
    let stable = max_factor <= 1.0 + 1e-8;
    let report = StabilityReport {
        scheme: scheme.name(),
        problem,
        tau,
        b: scheme.weights().iter().map(Scalar::to_f64).collect(),
        factors,
        max_factor,
        stable,
    };
    let text = match format {
        Format::Json => to_json(&report),
        Format::Csv | Format::Text => {
            let mut out = String::from("j,b_j,factor\n");
            for (j, (b, f)) in report.b.iter().zip(&report.factors).enumerate() {
                let _ = writeln!(out, "{},{b},{f:e}", j + 1);
            }
            if format == Format::Text {
                let _ = writeln!(
                    out,
                    "tau = {tau:e}, max factor {max_factor:e} -> {}",
                    if stable { "stable" } else { "AMPLIFIES" }
                );
            }
            out
        }
    };
    Ok(outcome(text, stable))
}

fn matrix_json(m: &Matrix<Scalar>) -> Value {
    Value::Array((0..m.rows()).map(|i| Value::Array(m.row(i).iter().map(scalar_value).collect())).collect())
}

fn derived_json(dc: &DerivedCoefficients) -> Value {
    let vec = |v: &[Scalar]| Value::Array(v.iter().map(scalar_value).collect());
    json!({
        "b": vec(&dc.b),
        "y": vec(&dc.y),
        "bhat": vec(&dc.bhat),
        "yhat": vec(&dc.yhat),
        "sigma": scalar_value(&dc.sigma),
        "d": vec(&dc.d),
        "S": matrix_json(&dc.s),
    })
}

fn derive_conditions(format: Format, path: Option<&str>) -> Result<Outcome, CfetError> {
    if format == Format::Csv {
        return Err(unsupported(format, "derive-conditions"));
    }
    let conditions = json!([
        {"name": "r_sum_b", "order": 1, "lhs": "sum_j b_j", "rhs": "1"},
        {"name": "r_sum_y", "order": 2, "lhs": "sum_j y_j", "rhs": "1/2"},
        {"name": "r_bhat_y", "order": 3, "lhs": "sum_j bhat_j y_j", "rhs": "1/3"},
        {"name": "r_bhat2", "order": 4, "lhs": "sum_j (bhat_j^2 + b_j^2/12) y_j", "rhs": "1/4"},
        {"name": "r_bhat3", "order": 5, "lhs": "sum_j (bhat_j^3 + bhat_j b_j^2/4) y_j", "rhs": "1/5"},
        {"name": "r_quad", "order": 5, "lhs": "sum_j (yhat_j^2 + y_j^2/12) b_j", "rhs": "1/20"},
    ]);
    let mut doc = Map::new();
    doc.insert("note".into(), Value::String(CONDITIONS_NOTE.into()));
    doc.insert("conditions".into(), conditions);
    doc.insert("quadric".into(), json!({"e^T y": "1/2", "d^T y": "1/5", "y^T S y": "1/20", "S": "L^T D L + D/12"}));
    doc.insert("exact_flow".into(), Value::Object(flow_table_json(&exact_flow_up_to(5))));
    if let Some(path) = path {
        let scheme = resolve_scheme(path)?;
        let dc = derive_coefficients(&scheme);
        let residuals = residuals_order5(&dc);
        doc.insert("scheme".into(), Value::String(scheme.name().into()));
        doc.insert("derived".into(), derived_json(&dc));
        doc.insert("residuals".into(), Value::Object(residual_map(&residuals)));
        doc.insert(
            "recursive_table".into(),
            Value::Object(word_table_json(&word_coefficients_recursive(&dc.b, &dc.y)?)),
        );
        doc.insert("closed_table".into(), Value::Object(word_table_json(&word_coefficients_closed(&dc.b, &dc.y)?)));
        if let Some((b, _)) = dc.exact_weights() {
            if b.iter().all(|x| *x > Rational::from_integer(0.into())) {
                let cert = cfet_core::certify::certify_no_order5_y(&b)?;
                let summary = match &cert {
                    Certificate::Gram(g) => {
                        json!({"value": rational_to_string(&g.value), "verdict": crate::report::verdict(g.infeasible)})
                    }
                    Certificate::SingleExponential(s) => {
                        json!({"reason": s.reason, "verdict": crate::report::verdict(s.infeasible)})
                    }
                };
                doc.insert("certificate".into(), summary);
            }
        }
    }
    Ok(outcome(to_json(&Value::Object(doc)), true))
}
