//! The two DEA models: output-oriented CCR and the slacks-based measure
//! with undesirable outputs.
//!
//! Both envelopment programs are built with every data row divided by the
//! evaluated DMU's own value and every slack measured as a fraction of it,
//! so the simplex sees dimensionless coefficients of order one regardless
//! of the units the indicators were recorded in. Slacks are converted back
//! to data units when results are assembled.

use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;
use core::fmt::Write;
use core::ops::Range;

use crate::dataset::{Dataset, Role};
use crate::linprog::{self, LpSolution, LpStatus, SolverConfig, StandardFormLp};

/// Smallest admissible Charnes–Cooper scale before recovery is refused.
pub const MIN_SCALE: f64 = 1e-7;
/// Normalised slacks below this are reported as exactly zero.
const SLACK_FLOOR: f64 = 1e-11;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ModelKind {
    CcrOutput,
    SbmUndesirable,
}

/// Bounds `L ≤ Σλ ≤ U` on the intensity vector.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ReturnsToScale {
    /// `L = 0`, no upper row.
    Crs,
    /// `L = U = 1`.
    Vrs,
    /// `upper` may be `f64::INFINITY` to omit the upper row.
    Custom { lower: f64, upper: f64 },
}

impl ReturnsToScale {
    pub fn bounds(self) -> (f64, f64) {
        match self {
            ReturnsToScale::Crs => (0.0, f64::INFINITY),
            ReturnsToScale::Vrs => (1.0, 1.0),
            ReturnsToScale::Custom { lower, upper } => (lower, upper),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModelSpec {
    pub kind: ModelKind,
    pub returns_to_scale: ReturnsToScale,
    /// Lets the SBM model run on data without undesirable outputs.
    pub allow_plain_sbm: bool,
}

impl ModelSpec {
    pub fn ccr(returns_to_scale: ReturnsToScale) -> Self {
        ModelSpec {
            kind: ModelKind::CcrOutput,
            returns_to_scale,
            allow_plain_sbm: false,
        }
    }

    pub fn sbm(returns_to_scale: ReturnsToScale) -> Self {
        ModelSpec {
            kind: ModelKind::SbmUndesirable,
            returns_to_scale,
            allow_plain_sbm: false,
        }
    }

    pub fn with_plain_sbm(mut self) -> Self {
        self.allow_plain_sbm = true;
        self
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ModelError {
    #[error("unknown dmu `{0}`")]
    UnknownDmu(String),
    #[error("dataset has no {0} columns")]
    MissingRole(&'static str),
    #[error("invalid intensity bounds: need 0 <= L <= U, got L = {lower}, U = {upper}")]
    InvalidBounds { lower: f64, upper: f64 },
    #[error("value of `{indicator}` for dmu `{dmu}` is not strictly positive")]
    NonPositiveData { dmu: String, indicator: String },
    #[error("model kind mismatch: expected {expected:?}")]
    WrongKind { expected: ModelKind },
    #[error("dmu `{dmu}`: {stage} LP {status}")]
    Solver {
        dmu: String,
        stage: &'static str,
        status: LpStatus,
    },
    #[error("dmu `{dmu}`: degenerate Charnes-Cooper scale t = {t:e}")]
    DegenerateScale { dmu: String, t: f64 },
}

/// Data of one per-DMU evaluation problem. Matrices are indicator-major:
/// `inputs[i][j]` is input `i` of DMU `j`.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelInstance {
    pub dmu: String,
    pub dmu_index: usize,
    pub input_names: Vec<String>,
    pub good_names: Vec<String>,
    pub bad_names: Vec<String>,
    pub inputs: Vec<Vec<f64>>,
    pub good: Vec<Vec<f64>>,
    pub bad: Vec<Vec<f64>>,
    pub x0: Vec<f64>,
    pub y0_good: Vec<f64>,
    pub y0_bad: Vec<f64>,
    pub lower: f64,
    pub upper: f64,
}

impl ModelInstance {
    pub fn n(&self) -> usize {
        self.inputs.first().map_or(0, Vec::len)
    }

    pub fn m(&self) -> usize {
        self.inputs.len()
    }

    pub fn s1(&self) -> usize {
        self.good.len()
    }

    pub fn s2(&self) -> usize {
        self.bad.len()
    }

    pub fn s(&self) -> usize {
        self.s1() + self.s2()
    }

    pub fn has_upper(&self) -> bool {
        self.upper.is_finite()
    }

    pub fn has_lower(&self) -> bool {
        self.lower > 0.0
    }

    fn n_rts_rows(&self) -> usize {
        usize::from(self.has_lower()) + usize::from(self.has_upper())
    }
}

pub fn build_instance(d: &Dataset, dmu: &str, spec: &ModelSpec) -> Result<ModelInstance, ModelError> {
    let k = d.dmu_index(dmu).ok_or_else(|| ModelError::UnknownDmu(dmu.into()))?;
    let (lower, upper) = spec.returns_to_scale.bounds();
    if !(lower >= 0.0 && lower <= upper && lower.is_finite()) {
        return Err(ModelError::InvalidBounds { lower, upper });
    }
    let ins = d.columns_with_role(Role::Input);
    let goods = d.columns_with_role(Role::DesirableOutput);
    let bads = d.columns_with_role(Role::UndesirableOutput);
    if ins.is_empty() {
        return Err(ModelError::MissingRole("input"));
    }
    if goods.is_empty() {
        return Err(ModelError::MissingRole("desirable output"));
    }
    if spec.kind == ModelKind::SbmUndesirable && bads.is_empty() && !spec.allow_plain_sbm {
        return Err(ModelError::MissingRole("undesirable output"));
    }

    for &j in ins.iter().chain(&goods).chain(&bads) {
        for (i, row) in d.rows().iter().enumerate() {
            let v = row[j];
            if !(v > 0.0 && v.is_finite()) {
                return Err(ModelError::NonPositiveData {
                    dmu: d.dmu_names()[i].clone(),
                    indicator: d.indicators()[j].name.clone(),
                });
            }
        }
    }

    let block = |cols: &[usize]| -> Vec<Vec<f64>> { cols.iter().map(|&j| d.column(j)).collect() };
    let names = |cols: &[usize]| -> Vec<String> { cols.iter().map(|&j| d.indicators()[j].name.clone()).collect() };
    let own = |cols: &[usize]| -> Vec<f64> { cols.iter().map(|&j| d.value(k, j)).collect() };

    Ok(ModelInstance {
        dmu: dmu.into(),
        dmu_index: k,
        input_names: names(&ins),
        good_names: names(&goods),
        bad_names: names(&bads),
        inputs: block(&ins),
        good: block(&goods),
        bad: block(&bads),
        x0: own(&ins),
        y0_good: own(&goods),
        y0_bad: own(&bads),
        lower,
        upper,
    })
}

/// Efficient target point `(x₀ − s⁻, φ·y₀ᵍ + sᵍ, y₀ᵇ − sᵇ)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Projection {
    pub inputs: Vec<f64>,
    pub good: Vec<f64>,
    pub bad: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EfficiencyResult {
    pub dmu: String,
    pub kind: ModelKind,
    /// EE for CCR (`1/φ`), ρ* for SBM.
    pub score: f64,
    /// Radial output expansion; always 1 for SBM.
    pub phi: f64,
    pub lambda: Vec<f64>,
    pub slack_in: Vec<f64>,
    pub slack_good: Vec<f64>,
    /// Empty for CCR, which ignores undesirable outputs.
    pub slack_bad: Vec<f64>,
    pub projection: Projection,
}

impl EfficiencyResult {
    pub fn max_slack(&self) -> f64 {
        self.slack_in
            .iter()
            .chain(&self.slack_good)
            .chain(&self.slack_bad)
            .fold(0.0, |a, &v| a.max(v))
    }
}

/// Column layout of the envelopment LPs.
#[derive(Debug, Clone, PartialEq)]
pub struct VariableLayout {
    pub lambda: Range<usize>,
    pub slack_in: Range<usize>,
    pub slack_good: Range<usize>,
    pub slack_bad: Range<usize>,
    pub n_vars: usize,
}

impl VariableLayout {
    fn after(first: usize, inst: &ModelInstance, with_bad: bool) -> Self {
        let lambda = first..first + inst.n();
        let slack_in = lambda.end..lambda.end + inst.m();
        let slack_good = slack_in.end..slack_in.end + inst.s1();
        let nbad = if with_bad { inst.s2() } else { 0 };
        let slack_bad = slack_good.end..slack_good.end + nbad;
        let n_vars = slack_bad.end + inst.n_rts_rows();
        VariableLayout {
            lambda,
            slack_in,
            slack_good,
            slack_bad,
            n_vars,
        }
    }
}

/// Maps a solution of the linearised SBM program back to `(λ, s)`.
///
/// Slack columns hold `S/t` measured in units of the evaluated DMU's own
/// values, so `s = value · scale / t` and `λ = Λ / t`.
#[derive(Debug, Clone, PartialEq)]
pub struct SbmRecovery {
    pub t: usize,
    pub layout: VariableLayout,
    pub x0: Vec<f64>,
    pub y0_good: Vec<f64>,
    pub y0_bad: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Recovered {
    pub t: f64,
    pub lambda: Vec<f64>,
    pub slack_in: Vec<f64>,
    pub slack_good: Vec<f64>,
    pub slack_bad: Vec<f64>,
}

impl SbmRecovery {
    /// `None` when the scale `t` is at or below [`MIN_SCALE`].
    pub fn recover(&self, primal: &[f64]) -> Option<Recovered> {
        let t = primal[self.t];
        if !(t > MIN_SCALE) {
            return None;
        }
        let l = &self.layout;
        let slacks = |range: &Range<usize>, scale: &[f64]| -> Vec<f64> {
            primal[range.clone()]
                .iter()
                .zip(scale)
                .map(|(&v, &x)| {
                    let frac = v / t;
                    if frac < SLACK_FLOOR {
                        0.0
                    } else {
                        frac * x
                    }
                })
                .collect()
        };
        Some(Recovered {
            t,
            lambda: primal[l.lambda.clone()].iter().map(|v| v / t).collect(),
            slack_in: slacks(&l.slack_in, &self.x0),
            slack_good: slacks(&l.slack_good, &self.y0_good),
            slack_bad: slacks(&l.slack_bad, &self.y0_bad),
        })
    }
}

fn ratio_row(block: &[f64], own: f64) -> impl Iterator<Item = f64> + '_ {
    block.iter().map(move |v| v / own)
}

/// Charnes–Cooper linearisation of the SBM-with-undesirable-outputs ratio.
///
/// Variables are `(t, Λ, S⁻, Sᵍ, Sᵇ)` followed by one surplus/slack column
/// per finite intensity bound. The program minimises
/// `t − (1/m) Σ S⁻ᵢ/x₀ᵢ` subject to the normalisation row
/// `t + (1/s)(Σ Sᵍ/y₀ᵍ + Σ Sᵇ/y₀ᵇ) = 1`, the three data blocks and
/// `L·t ≤ ΣΛ ≤ U·t`. Each data row is divided by the evaluated DMU's
/// value and each slack column is expressed as a fraction of it.
pub fn linearize_sbm(inst: &ModelInstance) -> (StandardFormLp, SbmRecovery) {
    let layout = VariableLayout::after(1, inst, true);
    let nv = layout.n_vars;
    let (m, s) = (inst.m() as f64, inst.s() as f64);

    let mut c = vec![0.0; nv];
    c[0] = 1.0;
    for j in layout.slack_in.clone() {
        c[j] = -1.0 / m;
    }

    let mut a = Vec::new();
    let mut b = Vec::new();

    let mut norm = vec![0.0; nv];
    norm[0] = 1.0;
    for j in layout.slack_good.clone().chain(layout.slack_bad.clone()) {
        norm[j] = 1.0 / s;
    }
    a.push(norm);
    b.push(1.0);

    // (data block, evaluated DMU's values, slack columns, slack sign)
    let blocks = [
        (&inst.inputs, &inst.x0, &layout.slack_in, 1.0),
        (&inst.good, &inst.y0_good, &layout.slack_good, -1.0),
        (&inst.bad, &inst.y0_bad, &layout.slack_bad, 1.0),
    ];
    for (data, own, slack, sign) in blocks {
        for (k, (row, &o)) in data.iter().zip(own).enumerate() {
            let mut r = vec![0.0; nv];
            r[0] = -1.0;
            for (j, v) in layout.lambda.clone().zip(ratio_row(row, o)) {
                r[j] = v;
            }
            r[slack.start + k] = sign;
            a.push(r);
            b.push(0.0);
        }
    }

    let mut extra = layout.slack_bad.end;
    if inst.has_lower() {
        let mut r = vec![0.0; nv];
        r[0] = -inst.lower;
        layout.lambda.clone().for_each(|j| r[j] = 1.0);
        r[extra] = -1.0;
        extra += 1;
        a.push(r);
        b.push(0.0);
    }
    if inst.has_upper() {
        let mut r = vec![0.0; nv];
        r[0] = -inst.upper;
        layout.lambda.clone().for_each(|j| r[j] = 1.0);
        r[extra] = 1.0;
        a.push(r);
        b.push(0.0);
    }

    let lp = StandardFormLp::new(c, a, b).expect("SBM program is well-formed by construction");
    let recovery = SbmRecovery {
        t: 0,
        layout,
        x0: inst.x0.clone(),
        y0_good: inst.y0_good.clone(),
        y0_bad: inst.y0_bad.clone(),
    };
    (lp, recovery)
}

/// CCR envelopment program in normalised form. With `phi_fixed = None`
/// column 0 is φ and the objective is `−φ`; otherwise φ is substituted by
/// the given value and the objective maximises the normalised slack sum.
fn ccr_program(inst: &ModelInstance, phi_fixed: Option<f64>) -> (StandardFormLp, VariableLayout) {
    let first = usize::from(phi_fixed.is_none());
    let layout = VariableLayout::after(first, inst, false);
    let nv = layout.n_vars;

    let mut c = vec![0.0; nv];
    match phi_fixed {
        None => c[0] = -1.0,
        Some(_) => {
            for j in layout.slack_in.clone().chain(layout.slack_good.clone()) {
                c[j] = -1.0;
            }
        }
    }

    let mut a = Vec::new();
    let mut b = Vec::new();
    for (k, (row, &o)) in inst.inputs.iter().zip(&inst.x0).enumerate() {
        let mut r = vec![0.0; nv];
        for (j, v) in layout.lambda.clone().zip(ratio_row(row, o)) {
            r[j] = v;
        }
        r[layout.slack_in.start + k] = 1.0;
        a.push(r);
        b.push(1.0);
    }
    for (k, (row, &o)) in inst.good.iter().zip(&inst.y0_good).enumerate() {
        let mut r = vec![0.0; nv];
        for (j, v) in layout.lambda.clone().zip(ratio_row(row, o)) {
            r[j] = v;
        }
        r[layout.slack_good.start + k] = -1.0;
        match phi_fixed {
            None => {
                r[0] = -1.0;
                b.push(0.0);
            }
            Some(phi) => b.push(phi),
        }
        a.push(r);
    }
    let mut extra = layout.slack_bad.end;
    if inst.has_lower() {
        let mut r = vec![0.0; nv];
        layout.lambda.clone().for_each(|j| r[j] = 1.0);
        r[extra] = -1.0;
        extra += 1;
        a.push(r);
        b.push(inst.lower);
    }
    if inst.has_upper() {
        let mut r = vec![0.0; nv];
        layout.lambda.clone().for_each(|j| r[j] = 1.0);
        r[extra] = 1.0;
        a.push(r);
        b.push(inst.upper);
    }
    let lp = StandardFormLp::new(c, a, b).expect("CCR program is well-formed by construction");
    (lp, layout)
}

/// The CCR programs as solved: stage 1 (`phi = None`) maximises φ, stage 2
/// fixes φ and maximises the normalised slack sum.
pub fn linearize_ccr(inst: &ModelInstance, phi: Option<f64>) -> StandardFormLp {
    ccr_program(inst, phi).0
}

fn run_lp(
    lp: &StandardFormLp,
    dmu: &str,
    stage: &'static str,
    config: &SolverConfig,
    trace: Option<&mut dyn Write>,
) -> Result<LpSolution, ModelError> {
    let trace = match trace {
        Some(t) => {
            let _ = writeln!(t, "== dmu `{dmu}`: {stage} ==");
            Some(t)
        }
        None => None,
    };
    let sol = linprog::solve_with(lp, config, trace);
    if sol.status != LpStatus::Optimal {
        return Err(ModelError::Solver {
            dmu: dmu.into(),
            stage,
            status: sol.status,
        });
    }
    Ok(sol)
}

fn reborrow<'s>(trace: &'s mut Option<&mut dyn Write>) -> Option<&'s mut dyn Write> {
    match trace {
        Some(w) => Some(&mut **w),
        None => None,
    }
}

fn scaled_slacks(primal: &[f64], range: &Range<usize>, scale: &[f64]) -> Vec<f64> {
    primal[range.clone()]
        .iter()
        .zip(scale)
        .map(|(&v, &x)| if v < SLACK_FLOOR { 0.0 } else { v * x })
        .collect()
}

pub fn evaluate_ccr_output(d: &Dataset, dmu: &str, spec: &ModelSpec) -> Result<EfficiencyResult, ModelError> {
    evaluate_ccr_output_with(d, dmu, spec, &SolverConfig::default(), None)
}

/// Output-oriented CCR: maximise φ, then with φ fixed maximise the slack
/// sum so the reported projection lies on the strongly efficient frontier.
/// Undesirable outputs play no part.
pub fn evaluate_ccr_output_with(
    d: &Dataset,
    dmu: &str,
    spec: &ModelSpec,
    config: &SolverConfig,
    mut trace: Option<&mut dyn Write>,
) -> Result<EfficiencyResult, ModelError> {
    if spec.kind != ModelKind::CcrOutput {
        return Err(ModelError::WrongKind {
            expected: ModelKind::CcrOutput,
        });
    }
    let inst = build_instance(d, dmu, spec)?;

    let (lp1, _) = ccr_program(&inst, None);
    let sol1 = run_lp(&lp1, dmu, "ccr stage 1", config, reborrow(&mut trace))?;
    let phi = sol1.primal[0].max(1.0);

    let (lp2, layout) = ccr_program(&inst, Some(phi));
    let sol2 = run_lp(&lp2, dmu, "ccr stage 2", config, reborrow(&mut trace))?;
    let p = &sol2.primal;

    let slack_in = scaled_slacks(p, &layout.slack_in, &inst.x0);
    let slack_good = scaled_slacks(p, &layout.slack_good, &inst.y0_good);
    let projection = Projection {
        inputs: inst.x0.iter().zip(&slack_in).map(|(x, s)| x - s).collect(),
        good: inst.y0_good.iter().zip(&slack_good).map(|(y, s)| phi * y + s).collect(),
        bad: Vec::new(),
    };
    Ok(EfficiencyResult {
        dmu: dmu.into(),
        kind: ModelKind::CcrOutput,
        score: 1.0 / phi,
        phi,
        lambda: p[layout.lambda.clone()].to_vec(),
        slack_in,
        slack_good,
        slack_bad: Vec::new(),
        projection,
    })
}

pub fn evaluate_sbm_undesirable(d: &Dataset, dmu: &str, spec: &ModelSpec) -> Result<EfficiencyResult, ModelError> {
    evaluate_sbm_undesirable_with(d, dmu, spec, &SolverConfig::default(), None)
}

pub fn evaluate_sbm_undesirable_with(
    d: &Dataset,
    dmu: &str,
    spec: &ModelSpec,
    config: &SolverConfig,
    trace: Option<&mut dyn Write>,
) -> Result<EfficiencyResult, ModelError> {
    if spec.kind != ModelKind::SbmUndesirable {
        return Err(ModelError::WrongKind {
            expected: ModelKind::SbmUndesirable,
        });
    }
    let inst = build_instance(d, dmu, spec)?;
    let (lp, recovery) = linearize_sbm(&inst);
    let sol = run_lp(&lp, dmu, "sbm", config, trace)?;
    let r = recovery
        .recover(&sol.primal)
        .ok_or_else(|| ModelError::DegenerateScale {
            dmu: dmu.into(),
            t: sol.primal[recovery.t],
        })?;

    let projection = Projection {
        inputs: inst.x0.iter().zip(&r.slack_in).map(|(x, s)| x - s).collect(),
        good: inst.y0_good.iter().zip(&r.slack_good).map(|(y, s)| y + s).collect(),
        bad: inst.y0_bad.iter().zip(&r.slack_bad).map(|(y, s)| y - s).collect(),
    };
    let all_zero = r
        .slack_in
        .iter()
        .chain(&r.slack_good)
        .chain(&r.slack_bad)
        .all(|&v| v == 0.0);
    let score = if all_zero { 1.0 } else { sol.objective.min(1.0) };
    Ok(EfficiencyResult {
        dmu: dmu.into(),
        kind: ModelKind::SbmUndesirable,
        score,
        phi: 1.0,
        lambda: r.lambda,
        slack_in: r.slack_in,
        slack_good: r.slack_good,
        slack_bad: r.slack_bad,
        projection,
    })
}

pub fn evaluate(d: &Dataset, dmu: &str, spec: &ModelSpec) -> Result<EfficiencyResult, ModelError> {
    evaluate_with(d, dmu, spec, &SolverConfig::default(), None)
}

pub fn evaluate_with(
    d: &Dataset,
    dmu: &str,
    spec: &ModelSpec,
    config: &SolverConfig,
    trace: Option<&mut dyn Write>,
) -> Result<EfficiencyResult, ModelError> {
    match spec.kind {
        ModelKind::CcrOutput => evaluate_ccr_output_with(d, dmu, spec, config, trace),
        ModelKind::SbmUndesirable => evaluate_sbm_undesirable_with(d, dmu, spec, config, trace),
    }
}

/// One result per DMU, in dataset order. The first failure aborts the batch.
pub fn evaluate_all(d: &Dataset, spec: &ModelSpec) -> Result<Vec<EfficiencyResult>, ModelError> {
    evaluate_all_with(d, spec, &SolverConfig::default(), None)
}

pub fn evaluate_all_with(
    d: &Dataset,
    spec: &ModelSpec,
    config: &SolverConfig,
    mut trace: Option<&mut dyn Write>,
) -> Result<Vec<EfficiencyResult>, ModelError> {
    d.dmu_names()
        .iter()
        .map(|name| evaluate_with(d, name, spec, config, reborrow(&mut trace)))
        .collect()
}

/// Percent improvements implied by a result: input and undesirable-output
/// reductions, desirable-output increases.
#[derive(Debug, Clone, PartialEq)]
pub struct RateReport {
    pub dmu: String,
    pub input_reduction_pct: Vec<f64>,
    pub bad_reduction_pct: Vec<f64>,
    pub good_increase_pct: Vec<f64>,
}

pub fn improvement_targets(r: &EfficiencyResult, inst: &ModelInstance) -> RateReport {
    let pct =
        |s: &[f64], base: &[f64]| -> Vec<f64> { s.iter().zip(base).map(|(s, b)| (100.0 * s / b).max(0.0)).collect() };
    RateReport {
        dmu: r.dmu.clone(),
        input_reduction_pct: pct(&r.slack_in, &inst.x0),
        bad_reduction_pct: pct(&r.slack_bad, &inst.y0_bad),
        good_increase_pct: r
            .slack_good
            .iter()
            .zip(&inst.y0_good)
            .map(|(s, y)| (100.0 * ((r.phi - 1.0) + s / y)).max(0.0))
            .collect(),
    }
}

impl RateReport {
    /// All-zero report shaped like `inst`, e.g. for a row with no result.
    pub fn zeros(dmu: &str, n_in: usize, n_bad: usize, n_good: usize) -> Self {
        RateReport {
            dmu: dmu.to_string(),
            input_reduction_pct: vec![0.0; n_in],
            bad_reduction_pct: vec![0.0; n_bad],
            good_increase_pct: vec![0.0; n_good],
        }
    }
}
