//! DMU-by-indicator datasets, their validation, summary statistics and
//! moment-matched synthesis.

use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};

/// Relative tolerance on mean and standard deviation for synthesized columns.
pub const SYNTHESIS_TOLERANCE: f64 = 0.005;

/// Default minimum DMU-per-indicator ratio for [`check_discrimination`].
pub const DISCRIMINATION_THRESHOLD: f64 = 1.5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Role {
    Input,
    DesirableOutput,
    UndesirableOutput,
    /// Carried through to reports, never part of a model matrix.
    Meta,
}

impl Role {
    /// CSV header prefix for this role.
    pub fn tag(self) -> &'static str {
        match self {
            Role::Input => "in",
            Role::DesirableOutput => "out+",
            Role::UndesirableOutput => "out-",
            Role::Meta => "meta",
        }
    }

    pub fn from_tag(tag: &str) -> Option<Role> {
        match tag {
            "in" => Some(Role::Input),
            "out+" => Some(Role::DesirableOutput),
            "out-" => Some(Role::UndesirableOutput),
            "meta" => Some(Role::Meta),
            _ => None,
        }
    }

    pub fn is_model(self) -> bool {
        self != Role::Meta
    }
}

impl fmt::Display for Role {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Indicator {
    pub name: String,
    pub role: Role,
    /// Informational only.
    pub units: String,
}

impl Indicator {
    pub fn new(name: impl Into<String>, role: Role) -> Self {
        Indicator {
            name: name.into(),
            role,
            units: String::new(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ViolationKind {
    NoDmus,
    EmptyDmuName,
    DuplicateDmu,
    EmptyIndicatorName,
    DuplicateIndicator,
    ShapeMismatch,
    NonFiniteValue,
    NonPositiveValue,
    MissingInput,
    MissingDesirableOutput,
}

impl ViolationKind {
    pub fn message(self) -> &'static str {
        match self {
            ViolationKind::NoDmus => "no dmus",
            ViolationKind::EmptyDmuName => "empty dmu name",
            ViolationKind::DuplicateDmu => "duplicate dmu",
            ViolationKind::EmptyIndicatorName => "empty indicator name",
            ViolationKind::DuplicateIndicator => "duplicate indicator",
            ViolationKind::ShapeMismatch => "shape mismatch",
            ViolationKind::NonFiniteValue => "non-finite value",
            ViolationKind::NonPositiveValue => "non-positive value",
            ViolationKind::MissingInput => "no input column",
            ViolationKind::MissingDesirableOutput => "no desirable output column",
        }
    }
}

/// One broken dataset invariant, located by zero-based row and/or column.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Violation {
    pub kind: ViolationKind,
    pub row: Option<usize>,
    pub column: Option<usize>,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.kind.message())?;
        match (self.row, self.column) {
            (Some(r), Some(c)) => write!(f, " at row {}, column {}", r + 1, c + 1),
            (Some(r), None) => write!(f, " at row {}", r + 1),
            (None, Some(c)) => write!(f, " at column {}", c + 1),
            (None, None) => Ok(()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum DatasetError {
    #[error("invalid dataset: {}", .0.first().map(|v| v.to_string()).unwrap_or_default())]
    Invalid(Vec<Violation>),
    #[error("sd undefined: need at least 2 dmus, got {0}")]
    SdUndefined(usize),
    #[error("infeasible synthesis spec for indicator `{indicator}`: {reason}")]
    InfeasibleSpec { indicator: String, reason: String },
}

/// Immutable DMU-by-indicator value matrix. Rows are DMUs, columns are
/// indicators.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    dmu_names: Vec<String>,
    indicators: Vec<Indicator>,
    rows: Vec<Vec<f64>>,
}

/// Record of a zero replaced by `1e-6 × column max`.
#[derive(Debug, Clone, PartialEq)]
pub struct ShiftWarning {
    pub row: usize,
    pub column: usize,
    pub replacement: f64,
}

impl Dataset {
    /// Builds a dataset and rejects it if any invariant fails.
    pub fn new(dmu_names: Vec<String>, indicators: Vec<Indicator>, rows: Vec<Vec<f64>>) -> Result<Self, DatasetError> {
        let d = Self::from_raw(dmu_names, indicators, rows);
        let violations = d.validate();
        if violations.is_empty() {
            Ok(d)
        } else {
            Err(DatasetError::Invalid(violations))
        }
    }

    /// Builds a dataset without checking invariants. Pair with
    /// [`Dataset::validate`].
    pub fn from_raw(dmu_names: Vec<String>, indicators: Vec<Indicator>, rows: Vec<Vec<f64>>) -> Self {
        Dataset {
            dmu_names,
            indicators,
            rows,
        }
    }

    /// Lists every broken invariant; empty iff the dataset is valid.
    pub fn validate(&self) -> Vec<Violation> {
        let mut out = Vec::new();
        let at = |kind, row, column| Violation { kind, row, column };

        if self.dmu_names.is_empty() {
            out.push(at(ViolationKind::NoDmus, None, None));
        }
        for (i, name) in self.dmu_names.iter().enumerate() {
            if name.trim().is_empty() {
                out.push(at(ViolationKind::EmptyDmuName, Some(i), None));
            } else if self.dmu_names[..i].contains(name) {
                out.push(at(ViolationKind::DuplicateDmu, Some(i), None));
            }
        }
        for (j, ind) in self.indicators.iter().enumerate() {
            if ind.name.trim().is_empty() {
                out.push(at(ViolationKind::EmptyIndicatorName, None, Some(j)));
            } else if self.indicators[..j].iter().any(|o| o.name == ind.name) {
                out.push(at(ViolationKind::DuplicateIndicator, None, Some(j)));
            }
        }
        if !self.indicators.iter().any(|i| i.role == Role::Input) {
            out.push(at(ViolationKind::MissingInput, None, None));
        }
        if !self.indicators.iter().any(|i| i.role == Role::DesirableOutput) {
            out.push(at(ViolationKind::MissingDesirableOutput, None, None));
        }
        if self.rows.len() != self.dmu_names.len() {
            out.push(at(ViolationKind::ShapeMismatch, None, None));
        }
        for (i, row) in self.rows.iter().enumerate() {
            if row.len() != self.indicators.len() {
                out.push(at(ViolationKind::ShapeMismatch, Some(i), None));
                continue;
            }
            for (j, (&v, ind)) in row.iter().zip(&self.indicators).enumerate() {
                if !v.is_finite() {
                    out.push(at(ViolationKind::NonFiniteValue, Some(i), Some(j)));
                } else if ind.role.is_model() && v <= 0.0 {
                    out.push(at(ViolationKind::NonPositiveValue, Some(i), Some(j)));
                }
            }
        }
        out
    }

    /// Replaces every exact zero in a model column with `1e-6 × column max`.
    pub fn epsilon_shift(mut self) -> (Self, Vec<ShiftWarning>) {
        let mut warnings = Vec::new();
        for (j, ind) in self.indicators.iter().enumerate() {
            if !ind.role.is_model() {
                continue;
            }
            let col_max = self
                .rows
                .iter()
                .filter_map(|r| r.get(j).copied())
                .filter(|v| v.is_finite())
                .fold(f64::NEG_INFINITY, f64::max);
            if !(col_max > 0.0) {
                continue;
            }
            let replacement = 1e-6 * col_max;
            for (i, row) in self.rows.iter_mut().enumerate() {
                if let Some(v) = row.get_mut(j) {
                    if *v == 0.0 {
                        *v = replacement;
                        warnings.push(ShiftWarning {
                            row: i,
                            column: j,
                            replacement,
                        });
                    }
                }
            }
        }
        (self, warnings)
    }

    pub fn dmu_names(&self) -> &[String] {
        &self.dmu_names
    }

    pub fn indicators(&self) -> &[Indicator] {
        &self.indicators
    }

    pub fn rows(&self) -> &[Vec<f64>] {
        &self.rows
    }

    pub fn n_dmus(&self) -> usize {
        self.dmu_names.len()
    }

    pub fn value(&self, row: usize, column: usize) -> f64 {
        self.rows[row][column]
    }

    pub fn column(&self, column: usize) -> Vec<f64> {
        self.rows.iter().map(|r| r[column]).collect()
    }

    pub fn dmu_index(&self, name: &str) -> Option<usize> {
        self.dmu_names.iter().position(|n| n == name)
    }

    pub fn indicator_index(&self, name: &str) -> Option<usize> {
        self.indicators.iter().position(|i| i.name == name)
    }

    /// Column indices carrying `role`, in indicator order.
    pub fn columns_with_role(&self, role: Role) -> Vec<usize> {
        self.indicators
            .iter()
            .enumerate()
            .filter(|(_, i)| i.role == role)
            .map(|(j, _)| j)
            .collect()
    }

    /// Column indices of every non-Meta indicator.
    pub fn model_columns(&self) -> Vec<usize> {
        self.indicators
            .iter()
            .enumerate()
            .filter(|(_, i)| i.role.is_model())
            .map(|(j, _)| j)
            .collect()
    }

    /// Copy with one column multiplied by `factor`.
    pub fn with_scaled_column(&self, column: usize, factor: f64) -> Dataset {
        let mut d = self.clone();
        for row in &mut d.rows {
            row[column] *= factor;
        }
        d
    }
}

/// Table-style summary of one indicator. `sd` uses the sample divisor n − 1.
#[derive(Debug, Clone, PartialEq)]
pub struct StatsRow {
    pub indicator: String,
    pub role: Role,
    pub max: f64,
    pub min: f64,
    pub mean: f64,
    pub sd: f64,
}

/// Max, min, mean and sample SD of every non-Meta indicator, in indicator
/// order.
pub fn descriptive_stats(d: &Dataset) -> Result<Vec<StatsRow>, DatasetError> {
    let n = d.n_dmus();
    if n < 2 {
        return Err(DatasetError::SdUndefined(n));
    }
    Ok(d.model_columns()
        .into_iter()
        .map(|j| {
            let ind = &d.indicators()[j];
            let (min, max, mean, sd) = column_moments(d.column(j));
            StatsRow {
                indicator: ind.name.clone(),
                role: ind.role,
                max,
                min,
                mean,
                sd,
            }
        })
        .collect())
}

// Sorted summation keeps the result independent of row order.
fn column_moments(mut values: Vec<f64>) -> (f64, f64, f64, f64) {
    values.sort_by(f64::total_cmp);
    let n = values.len() as f64;
    let min = values[0];
    let max = values[values.len() - 1];
    if min == max {
        return (min, max, min, 0.0);
    }
    let mean = (values.iter().sum::<f64>() / n).clamp(min, max);
    let mut sq: Vec<f64> = values.iter().map(|v| (v - mean) * (v - mean)).collect();
    sq.sort_by(f64::total_cmp);
    let sd = libm::sqrt(sq.iter().sum::<f64>() / (n - 1.0));
    (min, max, mean, sd)
}

/// Generates an `n`-DMU dataset whose columns have exactly the requested
/// min and max and a mean/SD within [`SYNTHESIS_TOLERANCE`] of the spec.
///
/// Two entries are pinned to min and max; the rest are drawn uniformly,
/// re-centred to the required mean and scaled about it to the required
/// spread. Entries pushed outside `[min, max]` are pinned to the bound they
/// crossed and the remainder re-solved until none cross. Output rows are
/// shuffled so the extremes do not always land on the same DMUs.
pub fn synthesize_matching(spec: &[StatsRow], n: usize, seed: u64) -> Result<Dataset, DatasetError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut columns = Vec::with_capacity(spec.len());
    for row in spec {
        let col = synthesize_column(row, n, &mut rng).map_err(|reason| DatasetError::InfeasibleSpec {
            indicator: row.indicator.clone(),
            reason: reason.into(),
        })?;
        columns.push(col);
    }
    let width = format!("{n}").len().max(2);
    let names = (1..=n).map(|i| format!("DMU{i:0width$}")).collect();
    let indicators = spec
        .iter()
        .map(|r| Indicator::new(r.indicator.clone(), r.role))
        .collect();
    let rows = (0..n).map(|i| columns.iter().map(|c| c[i]).collect()).collect();
    Dataset::new(names, indicators, rows)
}

fn uniform(rng: &mut ChaCha8Rng) -> f64 {
    (rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

fn synthesize_column(spec: &StatsRow, n: usize, rng: &mut ChaCha8Rng) -> Result<Vec<f64>, &'static str> {
    let StatsRow { min, max, mean, sd, .. } = *spec;
    if ![min, max, mean, sd].iter().all(|v| v.is_finite()) {
        return Err("non-finite statistic");
    }
    if n == 0 {
        return Err("need at least one dmu");
    }
    if min > max || mean < min || mean > max || sd < 0.0 {
        return Err("inconsistent min/max/mean/sd");
    }
    if min == max {
        if mean != min || sd > 0.0 {
            return Err("constant column must have mean = min and sd 0");
        }
        return Ok(vec![min; n]);
    }
    if n == 1 {
        return Err("a single dmu cannot span min < max");
    }
    if sd == 0.0 {
        return Err("sd 0 requires min = max");
    }

    let nf = n as f64;
    let interior = n - 2;
    let target_sum = nf * mean - min - max;
    let target_ss = (nf - 1.0) * sd * sd - (min - mean) * (min - mean) - (max - mean) * (max - mean);

    let draws: Vec<f64> = (0..interior).map(|_| min + (max - min) * uniform(rng)).collect();
    let mut pinned: Vec<Option<f64>> = vec![None; interior];
    let mut values: Vec<f64> = Vec::with_capacity(interior);

    loop {
        let free: Vec<usize> = (0..interior).filter(|&k| pinned[k].is_none()).collect();
        let pinned_sum: f64 = pinned.iter().flatten().sum();
        let pinned_ss: f64 = pinned.iter().flatten().map(|p| (p - mean) * (p - mean)).sum();
        values.clear();
        if free.is_empty() {
            values.extend(pinned.iter().map(|p| p.unwrap_or(mean)));
            break;
        }
        let nfree = free.len() as f64;
        let centre = (target_sum - pinned_sum) / nfree;
        if centre < min || centre > max {
            return Err("mean not achievable within [min, max]");
        }
        let draw_mean = free.iter().map(|&k| draws[k]).sum::<f64>() / nfree;
        let spread: f64 = free
            .iter()
            .map(|&k| (draws[k] - draw_mean) * (draws[k] - draw_mean))
            .sum();
        let residual = target_ss - pinned_ss - nfree * (centre - mean) * (centre - mean);
        if residual < -1e-9 * target_ss.abs().max(1.0) {
            return Err("sd smaller than achievable with min and max fixed");
        }
        let alpha = if spread > 0.0 {
            libm::sqrt(residual.max(0.0) / spread)
        } else {
            0.0
        };

        let mut crossed = false;
        for k in 0..interior {
            match pinned[k] {
                Some(p) => values.push(p),
                None => {
                    let v = centre + alpha * (draws[k] - draw_mean);
                    if v < min {
                        pinned[k] = Some(min);
                        crossed = true;
                    } else if v > max {
                        pinned[k] = Some(max);
                        crossed = true;
                    }
                    values.push(v);
                }
            }
        }
        if !crossed {
            break;
        }
    }

    let mut column = Vec::with_capacity(n);
    column.push(min);
    column.push(max);
    column.extend(values.iter().map(|v| v.clamp(min, max)));

    let (_, _, got_mean, got_sd) = column_moments(column.clone());
    if (got_mean - mean).abs() > SYNTHESIS_TOLERANCE * mean.abs() {
        return Err("mean not achievable within [min, max]");
    }
    if (got_sd - sd).abs() > SYNTHESIS_TOLERANCE * sd {
        return Err("sd larger than achievable given min, max, mean and n");
    }

    for i in (1..n).rev() {
        let j = (rng.next_u64() % (i as u64 + 1)) as usize;
        column.swap(i, j);
    }
    Ok(column)
}

/// DMU-to-indicator ratio check against the rule of thumb that DMUs should
/// number about twice the indicators.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Discrimination {
    pub ratio: f64,
    pub ok: bool,
}

pub fn check_discrimination(d: &Dataset) -> Discrimination {
    check_discrimination_with(d, DISCRIMINATION_THRESHOLD)
}

pub fn check_discrimination_with(d: &Dataset, threshold: f64) -> Discrimination {
    let k = d.model_columns().len();
    let ratio = if k == 0 {
        f64::INFINITY
    } else {
        d.n_dmus() as f64 / k as f64
    };
    Discrimination {
        ratio,
        ok: ratio >= threshold,
    }
}
