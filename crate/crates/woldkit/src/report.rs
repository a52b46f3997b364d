//! JSON report schema written by every command.

use serde::Serialize;
use serde_json::{Map, Value};

use woldkit_core::classd::CheckReport;
use woldkit_core::wold::WoldResult;
use woldkit_core::wold2d::FourfoldResult;
use woldkit_core::FinVec;

use crate::spec::OpSpec;
use crate::vector::vector_rows;

pub const SCHEMA_VERSION: u32 = 1;

pub type Rows = Vec<Vec<Value>>;

#[derive(Clone, Debug, Serialize)]
pub struct Report {
    pub schema_version: u32,
    pub command: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub spec: Option<OpSpec>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub vector: Option<Rows>,
    pub params: Params,
    /// Verdicts that decide the exit code.
    pub checks: Vec<CheckEntry>,
    /// Informational residuals; never gate.
    pub diagnostics: Vec<CheckEntry>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub decomposition: Option<DecompositionEntry>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub fourfold: Option<FourfoldEntry>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub oracle: Option<Vec<CheckEntry>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub zoo: Option<Vec<ZooEntry>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<ErrorEntry>,
    pub ok: bool,
}

impl Report {
    pub fn new(command: &str, params: Params) -> Self {
        Report {
            schema_version: SCHEMA_VERSION,
            command: command.to_string(),
            spec: None,
            vector: None,
            params,
            checks: Vec::new(),
            diagnostics: Vec::new(),
            decomposition: None,
            fourfold: None,
            oracle: None,
            zoo: None,
            error: None,
            ok: false,
        }
    }

    /// True when every gating check (and every oracle comparison) passed.
    pub fn verdicts_pass(&self) -> bool {
        self.checks.iter().all(|c| c.passed) && self.oracle.as_ref().is_none_or(|o| o.iter().all(|c| c.passed))
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct Params {
    pub tol: f64,
    /// `null` means 16 times the largest band offset of each operator.
    pub guard: Option<usize>,
    pub max_window: usize,
    pub n_max: usize,
    pub j_max: usize,
    pub seed: u64,
    pub oracle: bool,
    pub classd_n_max: usize,
    pub isometry_window: usize,
    pub probe_count: usize,
    pub tolerances: Tolerances,
}

#[derive(Clone, Debug, Serialize)]
pub struct Tolerances {
    pub class_d: f64,
    pub algebraic: f64,
    pub product_closure: f64,
    pub lower_bound_min: f64,
    pub reconstruction_rel: f64,
    pub orthogonality_rel: f64,
    pub oracle_rel: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct CheckEntry {
    pub name: String,
    pub operator: String,
    pub residual: f64,
    pub tolerance: f64,
    pub passed: bool,
    pub probes: usize,
    pub window: usize,
    pub components: Map<String, Value>,
    pub notes: Vec<String>,
}

impl CheckEntry {
    pub fn from_core(operator: &str, r: &CheckReport) -> Self {
        CheckEntry {
            name: r.name.clone(),
            operator: operator.to_string(),
            residual: r.residual,
            tolerance: r.tolerance,
            passed: r.passed,
            probes: r.probes,
            window: r.window,
            components: r.components.iter().map(|(k, v)| (k.clone(), Value::from(*v))).collect(),
            notes: r.notes.clone(),
        }
    }

    /// Passes when `residual ≤ tolerance`.
    pub fn at_most(name: &str, operator: &str, residual: f64, tolerance: f64) -> Self {
        CheckEntry {
            name: name.to_string(),
            operator: operator.to_string(),
            residual,
            tolerance,
            passed: residual <= tolerance,
            probes: 0,
            window: 0,
            components: Map::new(),
            notes: Vec::new(),
        }
    }

    pub fn note(mut self, n: impl Into<String>) -> Self {
        self.notes.push(n.into());
        self
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct DecompositionEntry {
    pub limit_part: Rows,
    pub components: Vec<Rows>,
    pub reconstruction_residual: f64,
    pub convergence_history: Vec<f64>,
    pub n_used: usize,
    pub j_used: usize,
    pub max_cross_inner: f64,
    pub classd_gap: f64,
    pub flags: Vec<String>,
}

impl From<&WoldResult> for DecompositionEntry {
    fn from(r: &WoldResult) -> Self {
        DecompositionEntry {
            limit_part: vector_rows(&r.limit_part),
            components: r.components.iter().map(vector_rows).collect(),
            reconstruction_residual: r.reconstruction_residual,
            convergence_history: r.convergence_history.clone(),
            n_used: r.n_used,
            j_used: r.j_used,
            max_cross_inner: r.max_cross_inner,
            classd_gap: r.classd_gap,
            flags: r.flags.clone(),
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct FourfoldEntry {
    pub inf_inf: Rows,
    pub inf_s: Rows,
    pub s_inf: Rows,
    pub s_s: Rows,
    pub residual: f64,
    pub cross_terms: f64,
    pub order_delta: f64,
    pub double_commuting: f64,
    pub flags: Vec<String>,
}

impl From<&FourfoldResult> for FourfoldEntry {
    fn from(r: &FourfoldResult) -> Self {
        let rows = |v: &FinVec| vector_rows(v);
        FourfoldEntry {
            inf_inf: rows(&r.inf_inf),
            inf_s: rows(&r.inf_s),
            s_inf: rows(&r.s_inf),
            s_s: rows(&r.s_s),
            residual: r.residual,
            cross_terms: r.cross_terms,
            order_delta: r.order_delta,
            double_commuting: r.double_commuting,
            flags: r.flags.clone(),
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct ZooEntry {
    pub kind: String,
    pub description: String,
    pub example: Value,
}

#[derive(Clone, Debug, Serialize)]
pub struct ErrorEntry {
    pub kind: String,
    pub message: String,
}
