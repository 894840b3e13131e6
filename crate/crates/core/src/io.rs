//! Model documents, run reports and CSV tables.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::analytics::IrfPath;
use crate::ensemble::Ensemble;
use crate::error::{MumsError, Result};
use crate::markov::{MarkovSolution, PersistenceRoot, RestrictionReport};
use crate::model::ModelSpec;
use crate::nk::AsadLoci;
use crate::roots::RootTrace;

/// On-disk JSON form of a model plus optional run defaults.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelDocument {
    pub n_controls: usize,
    pub control_names: Vec<String>,
    #[serde(rename = "A0")]
    pub a0: Vec<Vec<f64>>,
    #[serde(rename = "A1")]
    pub a1: Vec<Vec<f64>>,
    #[serde(rename = "B0")]
    pub b0: Vec<f64>,
    #[serde(rename = "B1")]
    pub b1: Vec<f64>,
    #[serde(rename = "C0")]
    pub c0: Vec<f64>,
    #[serde(rename = "D0")]
    pub d0: Vec<f64>,
    pub rho: f64,
    pub e: f64,
    pub p: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub shock: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub horizon: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub beta: Option<f64>,
}

impl ModelDocument {
    pub fn spec(&self) -> ModelSpec {
        ModelSpec {
            n_controls: self.n_controls,
            control_names: self.control_names.clone(),
            a0: self.a0.clone(),
            a1: self.a1.clone(),
            b0: self.b0.clone(),
            b1: self.b1.clone(),
            c0: self.c0.clone(),
            d0: self.d0.clone(),
            rho: self.rho,
            e: self.e,
            p: self.p,
        }
    }
}

impl From<&ModelSpec> for ModelDocument {
    fn from(m: &ModelSpec) -> Self {
        Self {
            n_controls: m.n_controls,
            control_names: m.control_names.clone(),
            a0: m.a0.clone(),
            a1: m.a1.clone(),
            b0: m.b0.clone(),
            b1: m.b1.clone(),
            c0: m.c0.clone(),
            d0: m.d0.clone(),
            rho: m.rho,
            e: m.e,
            p: m.p,
            shock: None,
            horizon: None,
            beta: None,
        }
    }
}

/// Parses a document without validating the model.
pub fn parse_document(text: &str) -> Result<ModelDocument> {
    serde_json::from_str(text).map_err(|err| {
        use serde_json::error::Category;
        let kind = match err.classify() {
            Category::Syntax | Category::Eof | Category::Io => "malformed JSON",
            Category::Data => "schema violation",
        };
        MumsError::Document(format!("{kind}: {err}"))
    })
}

/// Parses and validates a model document.
pub fn parse_model(text: &str) -> Result<ModelSpec> {
    let spec = parse_document(text)?.spec();
    spec.ensure_valid()?;
    Ok(spec)
}

pub fn emit_document(doc: &ModelDocument) -> String {
    serde_json::to_string_pretty(doc).expect("documents always serialize")
}

pub fn to_json<T: Serialize>(value: &T) -> String {
    serde_json::to_string_pretty(value).expect("reports always serialize")
}

/// 17 significant digits; parses back to the same double.
pub fn fmt_num(x: f64) -> String {
    format!("{x:.16e}")
}

/// Columns `n`, `z`, `k`, then one per control.
pub fn irf_csv(path: &IrfPath) -> String {
    let mut out = String::from("n,z,k");
    for name in &path.control_names {
        out.push(',');
        out.push_str(name);
    }
    out.push('\n');
    for n in 0..=path.horizon {
        let _ = write!(
            out,
            "{n},{},{}",
            fmt_num(path.exogenous[n]),
            fmt_num(path.state[n])
        );
        for c in &path.controls {
            out.push(',');
            out.push_str(&fmt_num(c[n]));
        }
        out.push('\n');
    }
    out
}

/// Columns `n`, the three state counts, then mean and standard error of each
/// tracked variable.
pub fn ensemble_csv(ens: &Ensemble) -> String {
    let mut out = String::from("n,impact,medium,absorbed");
    for v in &ens.variables {
        let _ = write!(out, ",{0}_mean,{0}_se", v.name);
    }
    out.push('\n');
    for (n, c) in ens.counts.iter().enumerate() {
        let _ = write!(out, "{n},{},{},{}", c[0], c[1], c[2]);
        for v in &ens.variables {
            let _ = write!(out, ",{},{}", fmt_num(v.mean[n]), fmt_num(v.stderr[n]));
        }
        out.push('\n');
    }
    out
}

/// Long-format table of loci points and equilibrium markers.
pub fn loci_csv(loci: &AsadLoci) -> String {
    let mut out = String::from("panel,series,y,pi\n");
    for l in &loci.loci {
        for (y, pi) in &l.points {
            let _ = writeln!(
                out,
                "{},{},{},{}",
                l.panel,
                l.name,
                fmt_num(*y),
                fmt_num(*pi)
            );
        }
    }
    for e in &loci.equilibria {
        let _ = writeln!(
            out,
            "{},{},{},{}",
            e.panel,
            e.name,
            fmt_num(e.y),
            fmt_num(e.pi)
        );
    }
    out
}

/// Solver metadata accompanying every emitted solution.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RunReport {
    pub tool: &'static str,
    pub version: &'static str,
    pub q: f64,
    pub markov_valid: bool,
    pub q_equals_p: bool,
    pub closed_form_q: Option<f64>,
    pub restrictions: RestrictionReport,
    pub max_residual: f64,
    pub root_trace: RootTrace,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub elapsed_ms: Option<f64>,
    pub warnings: Vec<String>,
}

impl RunReport {
    pub fn new(
        sol: &MarkovSolution,
        root: &PersistenceRoot,
        restrictions: RestrictionReport,
    ) -> Self {
        let mut warnings = Vec::new();
        if !sol.markov_valid {
            warnings.push(format!(
                "q = {} lies outside [0, 1): Markov states have an algebraic interpretation only",
                sol.q
            ));
        }
        if sol.q_equals_p {
            warnings.push("q coincides with p: IRFs use the limit formula".into());
        }
        Self {
            tool: "mums",
            version: env!("CARGO_PKG_VERSION"),
            q: sol.q,
            markov_valid: sol.markov_valid,
            q_equals_p: sol.q_equals_p,
            closed_form_q: root.closed_form,
            max_residual: restrictions.max(),
            restrictions,
            root_trace: root.trace.clone(),
            elapsed_ms: None,
            warnings,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SolveOutput {
    pub solution: MarkovSolution,
    pub report: RunReport,
}
