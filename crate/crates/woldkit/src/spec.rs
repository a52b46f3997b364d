//! Operator spec files.
//!
//! A spec is a JSON object with a `kind` field naming a zoo constructor or a
//! combinator. Parsing happens in two passes: a structural walk over the raw
//! JSON that collects every problem with its field path, then typed
//! deserialization and construction.

use serde::{Deserialize, Serialize};
use serde_json::Value;

use woldkit_core::{zoo, Axis, BandOp, Lattice, PhiFamily, WeightFn, C64};

/// Real number or `[re, im]`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Scalar {
    Real(f64),
    Complex([f64; 2]),
}

impl Scalar {
    pub fn value(&self) -> C64 {
        match *self {
            Scalar::Real(x) => C64::new(x, 0.0),
            Scalar::Complex([re, im]) => C64::new(re, im),
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub enum LatticeSpec {
    #[default]
    N,
    Z,
}

impl LatticeSpec {
    pub fn axis(self) -> Axis {
        match self {
            LatticeSpec::N => Axis::Natural,
            LatticeSpec::Z => Axis::Integer,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum PhiSpec {
    Exp { alpha: f64 },
    Power { beta: f64 },
    /// Samples of `φ` at `0, h, 2h, …`.
    Table { samples: Vec<f64>, h: f64 },
}

impl PhiSpec {
    pub fn family(&self) -> PhiFamily {
        match self {
            PhiSpec::Exp { alpha } => PhiFamily::Exp { alpha: *alpha },
            PhiSpec::Power { beta } => PhiFamily::Power { beta: *beta },
            PhiSpec::Table { samples, h } => PhiFamily::Table { samples: samples.clone(), step: *h },
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum WeightSpec {
    Constant { value: Scalar },
    Bergman,
    Dirichlet,
    /// `values[k]` for `0 ≤ k < len`, `default` elsewhere.
    Table { values: Vec<Scalar>, default: Scalar },
    PhiRatio { phi: PhiSpec, step: usize, h: f64 },
}

impl WeightSpec {
    pub fn weight(&self) -> WeightFn {
        match self {
            WeightSpec::Constant { value } => WeightFn::Constant(value.value()),
            WeightSpec::Bergman => WeightFn::Bergman,
            WeightSpec::Dirichlet => WeightFn::Dirichlet,
            WeightSpec::Table { values, default } => {
                WeightFn::Table { values: values.iter().map(Scalar::value).collect(), default: default.value() }
            }
            WeightSpec::PhiRatio { phi, step, h } => WeightFn::PhiRatio { phi: phi.family(), step: *step, h: *h },
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum OpSpec {
    WeightedShift {
        weights: WeightSpec,
        #[serde(default = "one")]
        step: usize,
        #[serde(default)]
        lattice: LatticeSpec,
    },
    UnilateralShift,
    BilateralShift,
    BergmanShift,
    DirichletShift,
    WeightedTranslation { phi: PhiSpec, t: f64, h: f64 },
    QuasinormalBlock {
        #[serde(rename = "L")]
        l: Vec<Vec<Scalar>>,
    },
    TensorPair {
        w1: WeightSpec,
        w2: WeightSpec,
        #[serde(default)]
        lattice1: LatticeSpec,
        #[serde(default)]
        lattice2: LatticeSpec,
    },
    /// Two operators on the same lattice, checked and split as a pair.
    Pair { first: Box<OpSpec>, second: Box<OpSpec> },
    DirectSum { left: Box<OpSpec>, right: Box<OpSpec> },
    Scale { factor: Scalar, of: Box<OpSpec> },
    Adjoint { of: Box<OpSpec> },
    Compose { left: Box<OpSpec>, right: Box<OpSpec> },
    Identity {
        #[serde(default)]
        lattice: LatticeSpec,
    },
}

fn one() -> usize {
    1
}

/// A built spec: one operator or a pair on a common lattice.
#[derive(Clone, Debug)]
pub enum Built {
    Single(BandOp),
    Pair(BandOp, BandOp),
}

impl Built {
    pub fn lattice(&self) -> &Lattice {
        match self {
            Built::Single(t) | Built::Pair(t, _) => t.lattice(),
        }
    }
}

/// Problem found in a spec, with the JSON path where it occurred.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SpecIssue {
    pub path: String,
    pub message: String,
}

impl std::fmt::Display for SpecIssue {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}: {}", self.path, self.message)
    }
}

#[derive(Debug, thiserror::Error)]
pub enum SpecError {
    #[error("spec is not valid JSON (line {line}, column {column}): {message}")]
    Syntax { line: usize, column: usize, message: String },
    #[error("spec has {} problem(s):\n{}", .0.len(), render(.0))]
    Invalid(Vec<SpecIssue>),
}

fn render(issues: &[SpecIssue]) -> String {
    issues.iter().map(|i| format!("  {i}")).collect::<Vec<_>>().join("\n")
}

pub const KINDS: &[&str] = &[
    "weighted_shift",
    "unilateral_shift",
    "bilateral_shift",
    "bergman_shift",
    "dirichlet_shift",
    "weighted_translation",
    "quasinormal_block",
    "tensor_pair",
    "pair",
    "direct_sum",
    "scale",
    "adjoint",
    "compose",
    "identity",
];

/// Parses and validates a spec; on failure every problem found is listed.
pub fn parse_spec(text: &str) -> Result<OpSpec, SpecError> {
    let value: Value = serde_json::from_str(text)
        .map_err(|e| SpecError::Syntax { line: e.line(), column: e.column(), message: e.to_string() })?;
    let mut issues = Vec::new();
    check_op(&value, "$", &mut issues);
    if !issues.is_empty() {
        return Err(SpecError::Invalid(issues));
    }
    let spec: OpSpec = serde_json::from_value(value)
        .map_err(|e| SpecError::Invalid(vec![SpecIssue { path: "$".into(), message: e.to_string() }]))?;
    if let Err(e) = build(&spec) {
        return Err(SpecError::Invalid(e));
    }
    Ok(spec)
}

struct Obj<'a> {
    map: &'a serde_json::Map<String, Value>,
    path: &'a str,
}

impl<'a> Obj<'a> {
    fn at(&self, key: &str) -> String {
        format!("{}.{}", self.path, key)
    }

    fn allow(&self, keys: &[&str], issues: &mut Vec<SpecIssue>) {
        for k in self.map.keys() {
            if k != "kind" && !keys.contains(&k.as_str()) {
                issues.push(issue(&self.at(k), "unknown field"));
            }
        }
    }

    fn required(&self, key: &str, issues: &mut Vec<SpecIssue>) -> Option<&'a Value> {
        let v = self.map.get(key);
        if v.is_none() {
            issues.push(issue(&self.at(key), "missing field"));
        }
        v
    }

    fn number(&self, key: &str, optional: bool, issues: &mut Vec<SpecIssue>) {
        match self.map.get(key) {
            None if optional => {}
            None => issues.push(issue(&self.at(key), "missing field")),
            Some(v) if v.as_f64().is_some() => {}
            Some(_) => issues.push(issue(&self.at(key), "expected a number")),
        }
    }

    fn count(&self, key: &str, optional: bool, issues: &mut Vec<SpecIssue>) {
        match self.map.get(key) {
            None if optional => {}
            None => issues.push(issue(&self.at(key), "missing field")),
            Some(v) if v.as_u64().is_some_and(|n| n >= 1) => {}
            Some(_) => issues.push(issue(&self.at(key), "expected a positive integer")),
        }
    }

    fn lattice(&self, key: &str, issues: &mut Vec<SpecIssue>) {
        if let Some(v) = self.map.get(key) {
            if !matches!(v.as_str(), Some("N") | Some("Z")) {
                issues.push(issue(&self.at(key), "expected \"N\" or \"Z\""));
            }
        }
    }
}

fn issue(path: &str, message: &str) -> SpecIssue {
    SpecIssue { path: path.to_string(), message: message.to_string() }
}

fn object<'a>(v: &'a Value, path: &'a str, issues: &mut Vec<SpecIssue>) -> Option<(Obj<'a>, &'a str)> {
    let Some(map) = v.as_object() else {
        issues.push(issue(path, "expected an object"));
        return None;
    };
    match map.get("kind").and_then(Value::as_str) {
        Some(kind) => Some((Obj { map, path }, kind)),
        None => {
            issues.push(issue(&format!("{path}.kind"), "missing or non-string kind"));
            None
        }
    }
}

fn check_scalar(v: &Value, path: &str, issues: &mut Vec<SpecIssue>) {
    let ok = v.as_f64().is_some()
        || v.as_array().is_some_and(|a| a.len() == 2 && a.iter().all(|x| x.as_f64().is_some()));
    if !ok {
        issues.push(issue(path, "expected a number or [re, im]"));
    }
}

fn check_op(v: &Value, path: &str, issues: &mut Vec<SpecIssue>) {
    let Some((o, kind)) = object(v, path, issues) else { return };
    match kind {
        "weighted_shift" => {
            o.allow(&["weights", "step", "lattice"], issues);
            if let Some(w) = o.required("weights", issues) {
                check_weight(w, &o.at("weights"), issues);
            }
            o.count("step", true, issues);
            o.lattice("lattice", issues);
        }
        "unilateral_shift" | "bilateral_shift" | "bergman_shift" | "dirichlet_shift" => o.allow(&[], issues),
        "weighted_translation" => {
            o.allow(&["phi", "t", "h"], issues);
            if let Some(p) = o.required("phi", issues) {
                check_phi(p, &o.at("phi"), issues);
            }
            o.number("t", false, issues);
            o.number("h", false, issues);
        }
        "quasinormal_block" => {
            o.allow(&["L"], issues);
            if let Some(l) = o.required("L", issues) {
                match l.as_array() {
                    Some(rows) if !rows.is_empty() => {
                        for (r, row) in rows.iter().enumerate() {
                            let rp = format!("{}[{r}]", o.at("L"));
                            match row.as_array() {
                                Some(cells) if cells.len() == rows.len() => {
                                    for (c, x) in cells.iter().enumerate() {
                                        check_scalar(x, &format!("{rp}[{c}]"), issues);
                                    }
                                }
                                _ => issues.push(issue(&rp, "expected a row of the same length as L")),
                            }
                        }
                    }
                    _ => issues.push(issue(&o.at("L"), "expected a nonempty square matrix")),
                }
            }
        }
        "tensor_pair" => {
            o.allow(&["w1", "w2", "lattice1", "lattice2"], issues);
            for k in ["w1", "w2"] {
                if let Some(w) = o.required(k, issues) {
                    check_weight(w, &o.at(k), issues);
                }
            }
            o.lattice("lattice1", issues);
            o.lattice("lattice2", issues);
        }
        "pair" => child_ops(&o, &["first", "second"], issues),
        "direct_sum" | "compose" => child_ops(&o, &["left", "right"], issues),
        "scale" => {
            o.allow(&["factor", "of"], issues);
            if let Some(f) = o.required("factor", issues) {
                check_scalar(f, &o.at("factor"), issues);
            }
            if let Some(c) = o.required("of", issues) {
                check_op(c, &o.at("of"), issues);
            }
        }
        "adjoint" => child_ops(&o, &["of"], issues),
        "identity" => {
            o.allow(&["lattice"], issues);
            o.lattice("lattice", issues);
        }
        other => issues.push(issue(&format!("{path}.kind"), &format!("unknown operator kind {other:?}"))),
    }
}

fn child_ops(o: &Obj<'_>, keys: &[&str], issues: &mut Vec<SpecIssue>) {
    o.allow(keys, issues);
    for k in keys {
        if let Some(c) = o.required(k, issues) {
            check_op(c, &o.at(k), issues);
        }
    }
}

fn check_weight(v: &Value, path: &str, issues: &mut Vec<SpecIssue>) {
    let Some((o, kind)) = object(v, path, issues) else { return };
    match kind {
        "constant" => {
            o.allow(&["value"], issues);
            if let Some(x) = o.required("value", issues) {
                check_scalar(x, &o.at("value"), issues);
            }
        }
        "bergman" | "dirichlet" => o.allow(&[], issues),
        "table" => {
            o.allow(&["values", "default"], issues);
            if let Some(vs) = o.required("values", issues) {
                match vs.as_array() {
                    Some(a) => {
                        for (i, x) in a.iter().enumerate() {
                            check_scalar(x, &format!("{}[{i}]", o.at("values")), issues);
                        }
                    }
                    None => issues.push(issue(&o.at("values"), "expected an array")),
                }
            }
            if let Some(d) = o.required("default", issues) {
                check_scalar(d, &o.at("default"), issues);
            }
        }
        "phi_ratio" => {
            o.allow(&["phi", "step", "h"], issues);
            if let Some(p) = o.required("phi", issues) {
                check_phi(p, &o.at("phi"), issues);
            }
            o.count("step", false, issues);
            o.number("h", false, issues);
        }
        other => issues.push(issue(&format!("{path}.kind"), &format!("unknown weight kind {other:?}"))),
    }
}

fn check_phi(v: &Value, path: &str, issues: &mut Vec<SpecIssue>) {
    let Some((o, kind)) = object(v, path, issues) else { return };
    match kind {
        "exp" => {
            o.allow(&["alpha"], issues);
            o.number("alpha", false, issues);
        }
        "power" => {
            o.allow(&["beta"], issues);
            o.number("beta", false, issues);
        }
        "table" => {
            o.allow(&["samples", "h"], issues);
            if let Some(s) = o.required("samples", issues) {
                if !s.as_array().is_some_and(|a| a.iter().all(|x| x.as_f64().is_some())) {
                    issues.push(issue(&o.at("samples"), "expected an array of numbers"));
                }
            }
            o.number("h", false, issues);
        }
        other => issues.push(issue(&format!("{path}.kind"), &format!("unknown phi kind {other:?}"))),
    }
}

fn engine(path: &str, e: woldkit_core::Error) -> Vec<SpecIssue> {
    vec![issue(path, &e.to_string())]
}

/// Builds the operator (or pair) a spec describes. Constructor errors are
/// reported with the path of the offending node; sibling subtrees are all
/// visited.
pub fn build(spec: &OpSpec) -> Result<Built, Vec<SpecIssue>> {
    build_at(spec, "$")
}

fn single(spec: &OpSpec, path: &str) -> Result<BandOp, Vec<SpecIssue>> {
    match build_at(spec, path)? {
        Built::Single(t) => Ok(t),
        Built::Pair(..) => Err(vec![issue(path, "a pair cannot be used as a single operator")]),
    }
}

fn both<A, B>(a: Result<A, Vec<SpecIssue>>, b: Result<B, Vec<SpecIssue>>) -> Result<(A, B), Vec<SpecIssue>> {
    match (a, b) {
        (Ok(a), Ok(b)) => Ok((a, b)),
        (Err(mut x), Err(y)) => {
            x.extend(y);
            Err(x)
        }
        (Err(x), _) | (_, Err(x)) => Err(x),
    }
}

fn build_at(spec: &OpSpec, path: &str) -> Result<Built, Vec<SpecIssue>> {
    let at = |k: &str| format!("{path}.{k}");
    let op = match spec {
        OpSpec::WeightedShift { weights, step, lattice } => {
            zoo::weighted_shift(weights.weight(), *step, lattice.axis()).map_err(|e| engine(path, e))?
        }
        OpSpec::UnilateralShift => zoo::unilateral_shift(),
        OpSpec::BilateralShift => zoo::bilateral_shift(),
        OpSpec::BergmanShift => zoo::bergman_shift(),
        OpSpec::DirichletShift => zoo::dirichlet_shift(),
        OpSpec::WeightedTranslation { phi, t, h } => {
            zoo::weighted_translation(phi.family(), *t, *h).map_err(|e| engine(path, e))?
        }
        OpSpec::QuasinormalBlock { l } => {
            let m: Vec<Vec<C64>> = l.iter().map(|r| r.iter().map(Scalar::value).collect()).collect();
            zoo::quasinormal_block(&m).map_err(|e| engine(&at("L"), e))?
        }
        OpSpec::TensorPair { w1, w2, lattice1, lattice2 } => {
            let (a, b) = zoo::tensor_pair_on(w1.weight(), lattice1.axis(), w2.weight(), lattice2.axis())
                .map_err(|e| engine(path, e))?;
            return Ok(Built::Pair(a, b));
        }
        OpSpec::Pair { first, second } => {
            let (a, b) = both(single(first, &at("first")), single(second, &at("second")))?;
            if a.lattice() != b.lattice() {
                return Err(vec![issue(path, "pair members live on different lattices")]);
            }
            return Ok(Built::Pair(a, b));
        }
        OpSpec::DirectSum { left, right } => {
            let (a, b) = both(single(left, &at("left")), single(right, &at("right")))?;
            zoo::direct_sum(&a, &b).map_err(|e| engine(path, e))?
        }
        OpSpec::Scale { factor, of } => single(of, &at("of"))?.scale(factor.value()),
        OpSpec::Adjoint { of } => single(of, &at("of"))?.adjoint(),
        OpSpec::Compose { left, right } => {
            let (a, b) = both(single(left, &at("left")), single(right, &at("right")))?;
            BandOp::compose(&a, &b).map_err(|e| engine(path, e))?
        }
        OpSpec::Identity { lattice } => BandOp::identity(Lattice::grid(&[lattice.axis()])),
    };
    Ok(Built::Single(op))
}

/// One example spec per kind, for `zoo list`.
pub fn examples() -> Vec<(&'static str, &'static str, Value)> {
    use serde_json::json;
    vec![
        ("weighted_shift", "T e_k = w_k e_{k+step} on N or Z", json!({"kind": "weighted_shift", "weights": {"kind": "constant", "value": 2.0}, "step": 1, "lattice": "Z"})),
        ("unilateral_shift", "unweighted shift on N", json!({"kind": "unilateral_shift"})),
        ("bilateral_shift", "unweighted shift on Z", json!({"kind": "bilateral_shift"})),
        ("bergman_shift", "weights sqrt((k+1)/(k+2))", json!({"kind": "bergman_shift"})),
        ("dirichlet_shift", "weights sqrt((k+2)/(k+1))", json!({"kind": "dirichlet_shift"})),
        ("weighted_translation", "f(x) -> phi(x)/phi(x-t) f(x-t) on the grid x = j h", json!({"kind": "weighted_translation", "phi": {"kind": "exp", "alpha": 1.0}, "t": 1.0, "h": 1.0})),
        ("quasinormal_block", "(k0, k1, ...) -> (0, L k0, L k1, ...), L Hermitian positive definite", json!({"kind": "quasinormal_block", "L": [[2, 0], [0, 3]]})),
        ("tensor_pair", "S_w1 (x) I and I (x) S_w2 on a product lattice", json!({"kind": "tensor_pair", "w1": {"kind": "bergman"}, "w2": {"kind": "dirichlet"}})),
        ("pair", "two operators on one lattice", json!({"kind": "pair", "first": {"kind": "bergman_shift"}, "second": {"kind": "scale", "factor": 2.0, "of": {"kind": "identity"}}})),
        ("direct_sum", "block diagonal operator on a tagged lattice", json!({"kind": "direct_sum", "left": {"kind": "bilateral_shift"}, "right": {"kind": "unilateral_shift"}})),
        ("scale", "factor * operator", json!({"kind": "scale", "factor": [0.0, 1.0], "of": {"kind": "bergman_shift"}})),
        ("adjoint", "adjoint operator", json!({"kind": "adjoint", "of": {"kind": "bergman_shift"}})),
        ("compose", "left after right", json!({"kind": "compose", "left": {"kind": "bergman_shift"}, "right": {"kind": "dirichlet_shift"}})),
        ("identity", "identity on N or Z", json!({"kind": "identity", "lattice": "N"})),
    ]
}
