//! Command execution: load spec and vector files, run the engine, assemble a
//! report and pick an exit code.

use std::path::{Path, PathBuf};

use woldkit_core::bandop::{lower_bound_estimate, GramSolveParams, LeftInverse};
use woldkit_core::classd::{self, CheckReport, ALGEBRAIC_TOL, CLASSD_TOL};
use woldkit_core::probes::{default_probes, DEFAULT_SEED};
use woldkit_core::{wold, wold2d, BandOp, Error, FinVec, Index};

use crate::oracle::{self, DenseEngine, OracleError};
use crate::report::{CheckEntry, DecompositionEntry, ErrorEntry, FourfoldEntry, Params, Report, Tolerances, ZooEntry};
use crate::spec::{self, Built, SpecError};
use crate::vector::{self, vector_rows};

pub const EXIT_OK: i32 = 0;
pub const EXIT_SPEC: i32 = 1;
pub const EXIT_CONVERGENCE: i32 = 2;
pub const EXIT_VERDICT: i32 = 3;

pub const DEFAULT_TOL: f64 = 1e-12;
pub const DEFAULT_N_MAX: usize = 64;
pub const DEFAULT_J_MAX: usize = 256;

const CLASSD_N_MAX: usize = 8;
const ISOMETRY_WINDOW: usize = 16;
const LOWER_BOUND_WINDOW: usize = 16;
const LOWER_BOUND_MIN: f64 = 1e-8;
const PRODUCT_TOL: f64 = 1e-9;
const RECONSTRUCTION_REL: f64 = 1e-10;
const ORTHOGONALITY_REL: f64 = 1e-10;
const ORACLE_REL: f64 = 1e-9;
const ORACLE_CHECK_DEPTH: usize = 8;

#[derive(Clone, Debug)]
pub enum Command {
    Check { spec: PathBuf },
    Decompose { spec: PathBuf, vector: PathBuf },
    Fourfold { spec: PathBuf, vector: PathBuf },
    ZooList,
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Check { .. } => "check",
            Command::Decompose { .. } => "decompose",
            Command::Fourfold { .. } => "fourfold",
            Command::ZooList => "zoo list",
        }
    }
}

#[derive(Clone, Debug)]
pub struct Options {
    pub tol: f64,
    pub guard: Option<usize>,
    pub n_max: usize,
    pub j_max: usize,
    pub seed: u64,
    pub oracle: bool,
}

impl Default for Options {
    fn default() -> Self {
        Options {
            tol: DEFAULT_TOL,
            guard: None,
            n_max: DEFAULT_N_MAX,
            j_max: DEFAULT_J_MAX,
            seed: DEFAULT_SEED,
            oracle: false,
        }
    }
}

impl Options {
    fn params(&self, t: &BandOp) -> GramSolveParams {
        let mut p = GramSolveParams::for_operator(t).with_tol(self.tol);
        if let Some(g) = self.guard {
            p.guard = g;
        }
        p
    }
}

/// Result of a command: the report, the exit code and the lines meant for
/// standard error.
#[derive(Debug)]
pub struct Outcome {
    pub report: Report,
    pub exit: i32,
    pub diagnostics: Vec<String>,
}

#[derive(Debug, thiserror::Error)]
enum Failure {
    #[error("cannot read {path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error(transparent)]
    Spec(#[from] SpecError),
    #[error("spec problems:\n{}", .0.iter().map(|i| format!("  {i}")).collect::<Vec<_>>().join("\n"))]
    Build(Vec<spec::SpecIssue>),
    #[error(transparent)]
    Vector(#[from] vector::VectorError),
    #[error("{0}")]
    WrongShape(&'static str),
    #[error(transparent)]
    Engine(#[from] Error),
}

impl Failure {
    fn kind(&self) -> &'static str {
        match self {
            Failure::Io { .. } => "io",
            Failure::Spec(SpecError::Syntax { .. }) => "spec_syntax",
            Failure::Spec(SpecError::Invalid(_)) | Failure::Build(_) => "spec_invalid",
            Failure::Vector(_) => "vector",
            Failure::WrongShape(_) => "spec_shape",
            Failure::Engine(e) if is_convergence(e) => "convergence",
            Failure::Engine(_) => "engine",
        }
    }

    fn exit(&self) -> i32 {
        match self {
            Failure::Engine(e) if is_convergence(e) => EXIT_CONVERGENCE,
            _ => EXIT_SPEC,
        }
    }
}

fn is_convergence(e: &Error) -> bool {
    matches!(e, Error::NoConvergence { .. } | Error::NoStrongConvergence { .. } | Error::SeriesNotConverged { .. })
}

pub fn execute(command: &Command, opts: &Options) -> Outcome {
    let mut report = Report::new(command.name(), params_for(opts));
    let mut diagnostics = Vec::new();
    let result = match command {
        Command::Check { spec } => run_check(spec, opts, &mut report),
        Command::Decompose { spec, vector } => run_decompose(spec, vector, opts, &mut report),
        Command::Fourfold { spec, vector } => run_fourfold(spec, vector, opts, &mut report),
        Command::ZooList => {
            report.zoo = Some(
                spec::examples()
                    .into_iter()
                    .map(|(k, d, e)| ZooEntry { kind: k.into(), description: d.into(), example: e })
                    .collect(),
            );
            Ok(())
        }
    };
    let exit = match result {
        Ok(()) => {
            for c in report.checks.iter().chain(report.oracle.iter().flatten()) {
                if !c.passed {
                    diagnostics.push(format!(
                        "FAIL {} ({}): residual {:e}, tolerance {:e}",
                        c.name, c.operator, c.residual, c.tolerance
                    ));
                }
            }
            for c in &report.diagnostics {
                if !c.passed {
                    diagnostics.push(format!("note: {} ({}) residual {:e}", c.name, c.operator, c.residual));
                }
            }
            for f in flags(&report) {
                diagnostics.push(format!("flag: {f}"));
            }
            if report.verdicts_pass() {
                report.ok = true;
                EXIT_OK
            } else {
                EXIT_VERDICT
            }
        }
        Err(e) => {
            diagnostics.push(format!("error: {e}"));
            report.error = Some(ErrorEntry { kind: e.kind().into(), message: e.to_string() });
            e.exit()
        }
    };
    Outcome { report, exit, diagnostics }
}

fn flags(report: &Report) -> Vec<String> {
    let mut out = Vec::new();
    if let Some(d) = &report.decomposition {
        out.extend(d.flags.iter().cloned());
    }
    if let Some(f) = &report.fourfold {
        out.extend(f.flags.iter().cloned());
    }
    out
}

fn params_for(opts: &Options) -> Params {
    Params {
        tol: opts.tol,
        guard: opts.guard,
        max_window: GramSolveParams::default().max_window,
        n_max: opts.n_max,
        j_max: opts.j_max,
        seed: opts.seed,
        oracle: opts.oracle,
        classd_n_max: CLASSD_N_MAX,
        isometry_window: ISOMETRY_WINDOW,
        probe_count: woldkit_core::probes::BASIS_PROBES + woldkit_core::probes::RANDOM_PROBES,
        tolerances: Tolerances {
            class_d: CLASSD_TOL,
            algebraic: ALGEBRAIC_TOL,
            product_closure: PRODUCT_TOL,
            lower_bound_min: LOWER_BOUND_MIN,
            reconstruction_rel: RECONSTRUCTION_REL,
            orthogonality_rel: ORTHOGONALITY_REL,
            oracle_rel: ORACLE_REL,
        },
    }
}

fn read(path: &Path) -> Result<String, Failure> {
    std::fs::read_to_string(path).map_err(|source| Failure::Io { path: path.display().to_string(), source })
}

fn load_spec(path: &Path, report: &mut Report) -> Result<Built, Failure> {
    let parsed = spec::parse_spec(&read(path)?)?;
    report.spec = Some(parsed.clone());
    spec::build(&parsed).map_err(Failure::Build)
}

fn load_vector(path: &Path, rank: usize, report: &mut Report) -> Result<FinVec, Failure> {
    let v = vector::parse_vector(&read(path)?)?;
    vector::check_rank(&v, rank)?;
    let v = if v.is_zero() { FinVec::zeros(rank) } else { v };
    report.vector = Some(vector_rows(&v));
    Ok(v)
}

fn lower_bound_check(name: &str, t: &BandOp) -> CheckEntry {
    let lb = lower_bound_estimate(t, LOWER_BOUND_WINDOW);
    let mut e = CheckEntry::at_most("lower_bound", name, lb, LOWER_BOUND_MIN)
        .note("passes when the estimate exceeds the tolerance (left invertibility)");
    e.passed = lb > LOWER_BOUND_MIN;
    e.window = LOWER_BOUND_WINDOW;
    e
}

fn single_checks(name: &str, t: &BandOp, probes: &[FinVec], opts: &Options, report: &mut Report) -> Result<(), Failure> {
    let p = opts.params(t);
    let lb = lower_bound_check(name, t);
    let invertible = lb.passed;
    report.checks.push(lb);
    if !invertible {
        return Ok(());
    }
    let cd = classd::classd_residual(t, CLASSD_N_MAX, probes, &p)?;
    report.checks.push(CheckEntry::from_core(name, &cd));
    report.diagnostics.push(CheckEntry::from_core(name, &classd::isometry_residual(t, ISOMETRY_WINDOW, &p)?));
    report.diagnostics.push(CheckEntry::from_core(name, &classd::quasinormal_residual(t, probes)?));
    Ok(())
}

fn run_check(spec_path: &Path, opts: &Options, report: &mut Report) -> Result<(), Failure> {
    let built = load_spec(spec_path, report)?;
    let probes = default_probes(built.lattice(), opts.seed);
    match &built {
        Built::Single(t) => {
            single_checks("T", t, &probes, opts, report)?;
            if opts.oracle {
                report.oracle = Some(oracle_check("T", t, &probes, opts)?);
            }
        }
        Built::Pair(t1, t2) => {
            single_checks("T1", t1, &probes, opts, report)?;
            single_checks("T2", t2, &probes, opts, report)?;
            let dc: CheckReport = classd::double_commuting_residual(t1, t2, &probes)?;
            report.checks.push(CheckEntry::from_core("T1,T2", &dc));
            if report.checks.iter().all(|c| c.name != "lower_bound" || c.passed) {
                let p = opts.params(t1);
                let pc = classd::product_closure_check(t1, t2, CLASSD_N_MAX, &probes, &p)?;
                report.checks.push(CheckEntry::from_core("T1T2", &pc));
            }
            if opts.oracle {
                let mut entries = oracle_check("T1", t1, &probes, opts)?;
                entries.extend(oracle_check("T2", t2, &probes, opts)?);
                report.oracle = Some(entries);
            }
        }
    }
    Ok(())
}

fn support_of(vs: &[&FinVec]) -> Vec<Index> {
    let mut s: Vec<Index> = vs.iter().flat_map(|v| v.support()).collect();
    s.sort();
    s.dedup();
    s
}

fn oracle_failure(name: &str, operator: &str, e: OracleError) -> Result<CheckEntry, Failure> {
    match e {
        OracleError::Engine(e) => Err(Failure::Engine(e)),
        other => Ok(CheckEntry::at_most(name, operator, f64::INFINITY, ORACLE_REL).note(format!("not compared: {other}"))),
    }
}

/// Dense left inverse on the probes and dense lower bound, against the engine.
fn oracle_check(name: &str, t: &BandOp, probes: &[FinVec], opts: &Options) -> Result<Vec<CheckEntry>, Failure> {
    let p = opts.params(t);
    let li = LeftInverse::new(t, p);
    let refs: Vec<&FinVec> = probes.iter().collect();
    let support = support_of(&refs);
    let window = oracle::guarded_window(t, &support, ORACLE_CHECK_DEPTH);
    let mut out = Vec::new();
    let left = (|| -> Result<f64, OracleError> {
        oracle::check_guard(&window, t.lattice(), &support, ORACLE_CHECK_DEPTH, t.max_offset())?;
        let dense_li = oracle::DenseLeftInverse::new(oracle::dense_section_with_image(t, &window)?, t.max_offset())?;
        let mut worst: f64 = 0.0;
        for v in probes {
            let dense = dense_li.apply(v)?;
            let band = li.apply(v)?;
            worst = worst.max((&dense - &band).norm() / v.norm().max(f64::MIN_POSITIVE));
        }
        Ok(worst)
    })();
    out.push(match left {
        Ok(r) => {
            let mut e = CheckEntry::at_most("oracle_left_inverse", name, r, ORACLE_REL);
            e.probes = probes.len();
            e
        }
        Err(e) => oracle_failure("oracle_left_inverse", name, e)?,
    });
    let w = t.lattice().standard_window(LOWER_BOUND_WINDOW);
    let lb = oracle::dense_section_with_image(t, &w).map(|d| {
        let dense = oracle::oracle_min_singular(&d);
        let band = lower_bound_estimate(t, LOWER_BOUND_WINDOW);
        (dense - band).abs() / band.abs().max(1.0)
    });
    out.push(match lb {
        Ok(r) => {
            let mut e = CheckEntry::at_most("oracle_lower_bound", name, r, ORACLE_REL);
            e.window = LOWER_BOUND_WINDOW;
            e
        }
        Err(e) => oracle_failure("oracle_lower_bound", name, e)?,
    });
    Ok(out)
}

fn run_decompose(spec_path: &Path, vector_path: &Path, opts: &Options, report: &mut Report) -> Result<(), Failure> {
    let built = load_spec(spec_path, report)?;
    let Built::Single(t) = built else {
        return Err(Failure::WrongShape("decompose needs a single operator, not a pair"));
    };
    let h = load_vector(vector_path, t.rank(), report)?;
    let p = opts.params(&t);
    let lb = lower_bound_check("T", &t);
    let invertible = lb.passed;
    report.checks.push(lb);
    if !invertible {
        return Ok(());
    }
    let probes = default_probes(t.lattice(), opts.seed);
    let mut cd = CheckEntry::from_core("T", &classd::classd_residual(&t, CLASSD_N_MAX, &probes, &p)?);
    cd.notes.push("informational: the decomposition does not require class D".into());
    report.diagnostics.push(cd);

    let r = wold::decompose(&t, &h, &p, opts.n_max, opts.j_max)?;
    let scale = h.norm();
    report.checks.push(CheckEntry::at_most(
        "reconstruction",
        "T",
        r.reconstruction_residual,
        RECONSTRUCTION_REL * scale,
    ));
    report.checks.push(CheckEntry::at_most(
        "orthogonality",
        "T",
        r.max_cross_inner,
        ORTHOGONALITY_REL * scale * scale,
    ));
    if opts.oracle {
        let depth = r.n_used.max(r.j_used) + 3;
        let entry = oracle_decompose(&t, &h, &r, depth, opts);
        report.oracle = Some(vec![match entry {
            Ok(e) => e,
            Err(e) => oracle_failure("oracle_decompose", "T", e)?,
        }]);
    }
    report.decomposition = Some(DecompositionEntry::from(&r));
    Ok(())
}

fn oracle_decompose(
    t: &BandOp,
    h: &FinVec,
    r: &wold::WoldResult,
    depth: usize,
    opts: &Options,
) -> Result<CheckEntry, OracleError> {
    let support = h.support();
    let window = oracle::guarded_window(t, &support, depth);
    oracle::check_guard(&window, t.lattice(), &support, depth, t.max_offset())?;
    let engine = DenseEngine::new(t, &window, opts.tol.max(1e-12))?;
    let dense = engine.decompose(h, opts.n_max, opts.j_max)?;
    let delta = oracle::wold_delta(r, &dense, h.norm());
    let mut e = CheckEntry::at_most("oracle_decompose", "T", delta, ORACLE_REL);
    e.window = engine.section.cols.len();
    Ok(e)
}

fn run_fourfold(spec_path: &Path, vector_path: &Path, opts: &Options, report: &mut Report) -> Result<(), Failure> {
    let built = load_spec(spec_path, report)?;
    let Built::Pair(t1, t2) = built else {
        return Err(Failure::WrongShape("fourfold needs a pair (tensor_pair or pair)"));
    };
    let h = load_vector(vector_path, t1.rank(), report)?;
    for (name, t) in [("T1", &t1), ("T2", &t2)] {
        let lb = lower_bound_check(name, t);
        let ok = lb.passed;
        report.checks.push(lb);
        if !ok {
            return Ok(());
        }
    }
    let p = opts.params(&t1);
    let r = wold2d::fourfold(&t1, &t2, &h, &p, opts.n_max)?;
    let scale = h.norm();
    let mut dc = CheckEntry::at_most("double_commuting", "T1,T2", r.double_commuting, ALGEBRAIC_TOL);
    dc.notes.push("informational: the split is only orthogonal for double-commuting pairs".into());
    report.diagnostics.push(dc);
    report.checks.push(CheckEntry::at_most("reconstruction", "T1,T2", r.residual, RECONSTRUCTION_REL * scale));
    report.checks.push(CheckEntry::at_most("orthogonality", "T1,T2", r.cross_terms, ORTHOGONALITY_REL * scale * scale));
    if opts.oracle {
        let entry = oracle_fourfold(&t1, &t2, &h, &r, opts);
        report.oracle = Some(vec![match entry {
            Ok(e) => e,
            Err(e) => oracle_failure("oracle_fourfold", "T1,T2", e)?,
        }]);
    }
    report.fourfold = Some(FourfoldEntry::from(&r));
    Ok(())
}

fn oracle_fourfold(
    t1: &BandOp,
    t2: &BandOp,
    h: &FinVec,
    r: &wold2d::FourfoldResult,
    opts: &Options,
) -> Result<CheckEntry, OracleError> {
    let support = h.support();
    let depth = support.iter().map(|k| t1.lattice().depth(k)).max().unwrap_or(0) as usize + 4;
    let max_offset = t1.max_offset().max(t2.max_offset());
    let window = t1.lattice().padded_box(&support, (depth as i64 + 1) * max_offset.max(1) + 1);
    oracle::check_guard(&window, t1.lattice(), &support, depth, max_offset)?;
    let tol = opts.tol.max(1e-12);
    let e1 = DenseEngine::new(t1, &window, tol)?;
    let e2 = DenseEngine::new(t2, &window, tol)?;
    let dense = oracle::oracle_fourfold(&e1, &e2, h, opts.n_max)?;
    let scale = h.norm().max(f64::MIN_POSITIVE);
    let band = [&r.inf_inf, &r.inf_s, &r.s_inf, &r.s_s];
    let delta = band.iter().zip(dense.iter()).map(|(a, b)| (*a - b).norm() / scale).fold(0.0, f64::max);
    let mut e = CheckEntry::at_most("oracle_fourfold", "T1,T2", delta, ORACLE_REL);
    e.window = e1.section.cols.len();
    Ok(e)
}
