//! Correlation, ranking, efficiency bands and CCR-vs-SBM comparison.

use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use crate::dataset::{Dataset, Role};
use crate::models::{build_instance, improvement_targets, EfficiencyResult, ModelSpec, RateReport, ReturnsToScale};

/// Scores closer than this share a rank (two-decimal reporting).
pub const RANK_TIE_TOLERANCE: f64 = 5e-3;
/// Default level boundaries for [`efficiency_bands`].
pub const DEFAULT_BAND_THRESHOLDS: (f64, f64) = (0.999, 0.20);

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum AnalysisError {
    #[error("correlation needs at least 3 dmus, got {0}")]
    TooFewDmus(usize),
    #[error("column `{0}` is constant; correlation undefined")]
    ConstantColumn(String),
    #[error("dmu lists differ at position {position}: `{left}` vs `{right}`")]
    DmuMismatch {
        position: usize,
        left: String,
        right: String,
    },
    #[error("result lists have different lengths: {0} vs {1}")]
    LengthMismatch(usize, usize),
    #[error(transparent)]
    Model(#[from] crate::models::ModelError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CorrelationMethod {
    Pearson,
    Spearman,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CorrelationMatrix {
    pub labels: Vec<String>,
    pub values: Vec<Vec<f64>>,
    pub method: CorrelationMethod,
}

/// Pairwise correlation of every non-Meta indicator.
pub fn correlation_matrix(d: &Dataset, method: CorrelationMethod) -> Result<CorrelationMatrix, AnalysisError> {
    if d.n_dmus() < 3 {
        return Err(AnalysisError::TooFewDmus(d.n_dmus()));
    }
    let cols = d.model_columns();
    let labels: Vec<String> = cols.iter().map(|&j| d.indicators()[j].name.clone()).collect();
    let mut centered = Vec::with_capacity(cols.len());
    for (&j, label) in cols.iter().zip(&labels) {
        let raw = d.column(j);
        let col = match method {
            CorrelationMethod::Pearson => raw,
            CorrelationMethod::Spearman => average_ranks(&raw),
        };
        let mean = col.iter().sum::<f64>() / col.len() as f64;
        let dev: Vec<f64> = col.iter().map(|v| v - mean).collect();
        let norm = libm::sqrt(dev.iter().map(|v| v * v).sum::<f64>());
        if !(norm > 1e-300) || col.iter().all(|&v| v == col[0]) {
            return Err(AnalysisError::ConstantColumn(label.clone()));
        }
        centered.push((dev, norm));
    }
    let k = cols.len();
    let mut values = vec![vec![0.0; k]; k];
    for a in 0..k {
        values[a][a] = 1.0;
        for b in a + 1..k {
            let (da, na) = &centered[a];
            let (db, nb) = &centered[b];
            let r = (da.iter().zip(db).map(|(x, y)| x * y).sum::<f64>() / (na * nb)).clamp(-1.0, 1.0);
            values[a][b] = r;
            values[b][a] = r;
        }
    }
    Ok(CorrelationMatrix { labels, values, method })
}

/// 1-based ranks, ascending, ties sharing the mean of their positions.
fn average_ranks(values: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    let mut ranks = vec![0.0; values.len()];
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j + 1 < order.len() && values[order[j + 1]] == values[order[i]] {
            j += 1;
        }
        let avg = (i + j) as f64 / 2.0 + 1.0;
        for &k in &order[i..=j] {
            ranks[k] = avg;
        }
        i = j + 1;
    }
    ranks
}

/// Competition ranking of scores, highest first, with
/// [`RANK_TIE_TOLERANCE`].
pub fn rank_scores(scores: &[f64]) -> Vec<usize> {
    rank_scores_with(scores, RANK_TIE_TOLERANCE)
}

/// Rank of each score = 1 + number of scores greater than it by more than
/// `tolerance`.
pub fn rank_scores_with(scores: &[f64], tolerance: f64) -> Vec<usize> {
    scores
        .iter()
        .map(|&s| 1 + scores.iter().filter(|&&o| o > s + tolerance).count())
        .collect()
}

/// Per-DMU join of the CCR and SBM evaluations.
#[derive(Debug, Clone, PartialEq)]
pub struct ComparisonRecord {
    pub dmu: String,
    pub ee: f64,
    pub epi: f64,
    pub ee_rank: usize,
    pub epi_rank: usize,
    pub ccr_rates: RateReport,
    pub sbm_rates: RateReport,
    /// Meta covariates, e.g. per-capita GDP.
    pub meta: Vec<(String, f64)>,
}

/// Column means of a comparison body.
#[derive(Debug, Clone, PartialEq)]
pub struct MeanRow {
    pub ee: f64,
    pub epi: f64,
    pub ccr_rates: RateReport,
    pub sbm_rates: RateReport,
    pub meta: Vec<(String, f64)>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Comparison {
    pub input_names: Vec<String>,
    pub good_names: Vec<String>,
    pub bad_names: Vec<String>,
    pub records: Vec<ComparisonRecord>,
    pub mean: MeanRow,
}

/// Joins CCR (`ee`) and SBM (`epi`) results DMU by DMU, attaches ranks,
/// rates and Meta covariates, and appends the mean row.
pub fn compare_models(
    ee: &[EfficiencyResult],
    epi: &[EfficiencyResult],
    d: &Dataset,
) -> Result<Comparison, AnalysisError> {
    if ee.len() != epi.len() {
        return Err(AnalysisError::LengthMismatch(ee.len(), epi.len()));
    }
    for (position, (a, b)) in ee.iter().zip(epi).enumerate() {
        if a.dmu != b.dmu {
            return Err(AnalysisError::DmuMismatch {
                position,
                left: a.dmu.clone(),
                right: b.dmu.clone(),
            });
        }
    }
    let ee_scores: Vec<f64> = ee.iter().map(|r| r.score).collect();
    let epi_scores: Vec<f64> = epi.iter().map(|r| r.score).collect();
    let ee_ranks = rank_scores(&ee_scores);
    let epi_ranks = rank_scores(&epi_scores);
    let meta_cols = d.columns_with_role(Role::Meta);

    let mut names = (Vec::new(), Vec::new(), Vec::new());
    let mut records = Vec::with_capacity(ee.len());
    for (k, (a, b)) in ee.iter().zip(epi).enumerate() {
        let inst = build_instance(d, &a.dmu, &ModelSpec::ccr(ReturnsToScale::Crs))?;
        if k == 0 {
            names = (
                inst.input_names.clone(),
                inst.good_names.clone(),
                inst.bad_names.clone(),
            );
        }
        let row = d.dmu_index(&a.dmu).expect("instance built for this dmu");
        records.push(ComparisonRecord {
            dmu: a.dmu.clone(),
            ee: a.score,
            epi: b.score,
            ee_rank: ee_ranks[k],
            epi_rank: epi_ranks[k],
            ccr_rates: improvement_targets(a, &inst),
            sbm_rates: improvement_targets(b, &inst),
            meta: meta_cols
                .iter()
                .map(|&j| (d.indicators()[j].name.clone(), d.value(row, j)))
                .collect(),
        });
    }
    let mean = mean_row(&records);
    Ok(Comparison {
        input_names: names.0,
        good_names: names.1,
        bad_names: names.2,
        records,
        mean,
    })
}

/// Arithmetic mean of every numeric column of `records`. Records must share
/// one shape.
pub fn mean_row(records: &[ComparisonRecord]) -> MeanRow {
    let n = records.len().max(1) as f64;
    let avg = |f: &dyn Fn(&ComparisonRecord) -> f64| records.iter().map(f).sum::<f64>() / n;
    let avg_vec = |f: &dyn Fn(&ComparisonRecord) -> &Vec<f64>| -> Vec<f64> {
        let width = records.first().map_or(0, |r| f(r).len());
        (0..width).map(|i| avg(&|r| f(r)[i])).collect()
    };
    let rates = |f: &dyn Fn(&ComparisonRecord) -> &RateReport| RateReport {
        dmu: String::from("Mean"),
        input_reduction_pct: avg_vec(&|r| &f(r).input_reduction_pct),
        bad_reduction_pct: avg_vec(&|r| &f(r).bad_reduction_pct),
        good_increase_pct: avg_vec(&|r| &f(r).good_increase_pct),
    };
    let meta = records
        .first()
        .map(|first| {
            first
                .meta
                .iter()
                .enumerate()
                .map(|(i, (name, _))| (name.clone(), avg(&|r| r.meta[i].1)))
                .collect()
        })
        .unwrap_or_default();
    MeanRow {
        ee: avg(&|r| r.ee),
        epi: avg(&|r| r.epi),
        ccr_rates: rates(&|r| &r.ccr_rates),
        sbm_rates: rates(&|r| &r.sbm_rates),
        meta,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum BandBasis {
    Ee,
    #[default]
    Epi,
}

/// DMU names per level, in record order.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Bands {
    pub level1: Vec<String>,
    pub level2: Vec<String>,
    pub level3: Vec<String>,
}

impl Bands {
    /// 1, 2 or 3; `None` if the DMU is absent.
    pub fn level_of(&self, dmu: &str) -> Option<u8> {
        [&self.level1, &self.level2, &self.level3]
            .iter()
            .position(|l| l.iter().any(|n| n == dmu))
            .map(|p| p as u8 + 1)
    }
}

/// Splits records into `score ≥ t1`, `t2 ≤ score < t1` and `score < t2`.
pub fn efficiency_bands(records: &[ComparisonRecord], thresholds: (f64, f64), basis: BandBasis) -> Bands {
    let mut bands = Bands::default();
    for r in records {
        let score = match basis {
            BandBasis::Ee => r.ee,
            BandBasis::Epi => r.epi,
        };
        let level = if score >= thresholds.0 {
            &mut bands.level1
        } else if score >= thresholds.1 {
            &mut bands.level2
        } else {
            &mut bands.level3
        };
        level.push(r.dmu.clone());
    }
    bands
}
