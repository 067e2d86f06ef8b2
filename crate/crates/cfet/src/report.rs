//! JSON, CSV and text renderings of results.

use std::fmt::Write as _;

use cfet_core::certify::Certificate;
use cfet_core::conditions::ResidualVector;
use cfet_core::engine::ConvergenceReport;
use cfet_core::scalar::rational_to_string;
use cfet_core::taylor::{ExactFlowTable, WordCoefficientTable};
use cfet_core::{derive_coefficients, order_achieved, residuals_order5, validate_scheme, Rational, Scalar, Scheme};
use serde::Serialize;
use serde_json::{Map, Value};

/// Exact scalars as `"p/q"` strings, floats as JSON numbers.
pub fn scalar_value(s: &Scalar) -> Value {
    match s {
        Scalar::Exact(r) => Value::String(rational_to_string(r)),
        Scalar::Float(x) => serde_json::Number::from_f64(*x).map(Value::Number).unwrap_or(Value::Null),
    }
}

pub fn rationals(v: &[Rational]) -> Vec<String> {
    v.iter().map(rational_to_string).collect()
}

pub fn residual_map(r: &ResidualVector) -> Map<String, Value> {
    r.entries().iter().map(|(name, v)| (name.to_string(), scalar_value(v))).collect()
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ResidualReport {
    pub scheme: String,
    pub exact: bool,
    pub residuals: Map<String, Value>,
    pub order_achieved: usize,
    pub claimed_order: Option<u32>,
    pub positivity_ok: bool,
    pub tol: Value,
    /// The six conditions are necessary for the linear-in-time problem class.
    pub note: &'static str,
}

pub const CONDITIONS_NOTE: &str = "necessary conditions on the linear-in-time problem class";

impl ResidualReport {
    pub fn new(scheme: &Scheme, tol: &Scalar) -> Self {
        let dc = derive_coefficients(scheme);
        let r = residuals_order5(&dc);
        ResidualReport {
            scheme: scheme.name().to_string(),
            exact: r.is_exact(),
            residuals: residual_map(&r),
            order_achieved: order_achieved(&dc, tol),
            claimed_order: scheme.claimed_order(),
            positivity_ok: validate_scheme(scheme).positivity_ok,
            tol: scalar_value(tol),
            note: CONDITIONS_NOTE,
        }
    }

    /// The claimed order, when present, is at most the achieved one.
    pub fn claim_holds(&self) -> bool {
        self.claimed_order.is_none_or(|p| p as usize <= self.order_achieved)
    }

    pub fn to_text(&self) -> String {
        let mut out = format!("scheme {} ({})\n", self.scheme, if self.exact { "exact" } else { "float" });
        for (name, v) in &self.residuals {
            let _ = writeln!(out, "  {name:<9} {}", display_value(v));
        }
        let _ = writeln!(out, "order achieved: {} ({})", self.order_achieved, self.note);
        if let Some(p) = self.claimed_order {
            let _ =
                writeln!(out, "claimed order: {p} -> {}", if self.claim_holds() { "consistent" } else { "NOT met" });
        }
        let _ = writeln!(out, "positivity: {}", if self.positivity_ok { "all b_j > 0" } else { "violated" });
        out
    }
}

fn display_value(v: &Value) -> String {
    match v {
        Value::String(s) => s.clone(),
        other => other.to_string(),
    }
}

/// Certificate as emitted by `certify`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CertificateReport {
    #[serde(rename = "J")]
    pub stages: usize,
    pub b: Vec<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub gram: Option<[[String; 2]; 2]>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub value: Option<String>,
    pub threshold: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub margin: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub reason: Option<String>,
    pub verdict: &'static str,
}

pub fn verdict(infeasible: bool) -> &'static str {
    if infeasible {
        "infeasible"
    } else {
        "feasible"
    }
}

impl From<&Certificate> for CertificateReport {
    fn from(c: &Certificate) -> Self {
        match c {
            Certificate::Gram(g) => CertificateReport {
                stages: g.stages,
                b: rationals(&g.b),
                gram: Some([
                    [rational_to_string(&g.gram[0][0]), rational_to_string(&g.gram[0][1])],
                    [rational_to_string(&g.gram[1][0]), rational_to_string(&g.gram[1][1])],
                ]),
                value: Some(rational_to_string(&g.value)),
                threshold: rational_to_string(&g.threshold),
                margin: Some(rational_to_string(&g.margin)),
                reason: None,
                verdict: verdict(g.infeasible),
            },
            Certificate::SingleExponential(s) => CertificateReport {
                stages: 1,
                b: vec![rational_to_string(&s.b)],
                gram: None,
                value: None,
                threshold: "1/20".into(),
                margin: None,
                reason: Some(s.reason.clone()),
                verdict: verdict(s.infeasible),
            },
        }
    }
}

impl CertificateReport {
    pub fn to_text(&self) -> String {
        let mut out = format!("b = ({})\n", self.b.join(", "));
        if let (Some(g), Some(v), Some(m)) = (&self.gram, &self.value, &self.margin) {
            let _ = writeln!(out, "  Gram = [[{}, {}], [{}, {}]]", g[0][0], g[0][1], g[1][0], g[1][1]);
            let _ = writeln!(out, "  c^T Gram^-1 c = {v}  (threshold {}, margin {m})", self.threshold);
        }
        if let Some(r) = &self.reason {
            let _ = writeln!(out, "  {r}");
        }
        let _ = writeln!(out, "  verdict: {}", self.verdict);
        out
    }
}

pub fn word_table_json(t: &WordCoefficientTable) -> Map<String, Value> {
    t.entries.iter().map(|(w, c)| (w.to_string(), Value::String(c.to_string()))).collect()
}

pub fn flow_table_json(t: &ExactFlowTable) -> Map<String, Value> {
    t.entries.iter().map(|(w, c)| (w.to_string(), Value::String(rational_to_string(c)))).collect()
}

fn order_cell(o: Option<f64>) -> String {
    o.map(|x| format!("{x:.6}")).unwrap_or_default()
}

/// Columns `tau,error,observed_order`; the order in row `i` compares rows
/// `i-1` and `i`.
pub fn convergence_csv(r: &ConvergenceReport) -> String {
    let mut out = String::from("tau,error,observed_order\n");
    for (i, (tau, err)) in r.taus.iter().zip(&r.errors).enumerate() {
        let order = if i == 0 { None } else { r.observed_orders[i - 1] };
        let _ = writeln!(out, "{tau:e},{err:e},{}", order_cell(order));
    }
    out
}

pub fn fitted_order_label(r: &ConvergenceReport) -> String {
    if r.exact {
        "exact".into()
    } else {
        r.fitted_order.map(|p| format!("{p:.4}")).unwrap_or_else(|| "undetermined".into())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ConvergenceSummary {
    pub scheme: String,
    pub problem: String,
    pub taus: Vec<f64>,
    pub errors: Vec<f64>,
    pub observed_orders: Vec<Option<f64>>,
    pub fitted_order: String,
    pub reference_accuracy: f64,
    pub notes: Vec<String>,
}

impl ConvergenceSummary {
    pub fn new(scheme: &str, problem: &str, r: &ConvergenceReport) -> Self {
        ConvergenceSummary {
            scheme: scheme.into(),
            problem: problem.into(),
            taus: r.taus.clone(),
            errors: r.errors.clone(),
            observed_orders: r.observed_orders.clone(),
            fitted_order: fitted_order_label(r),
            reference_accuracy: r.reference_accuracy,
            notes: r.notes.clone(),
        }
    }
}
