//! End-to-end acceptance checks against the published coastal-province
//! results, analytic micro-instances and brute-force oracles.
//!
//! Run with `cargo test -p dea --test acceptance -- --nocapture` to see the
//! per-criterion report.

use std::time::{Duration, Instant};

use dea_core::analysis::DEFAULT_BAND_THRESHOLDS;
use dea_core::dataset::SYNTHESIS_TOLERANCE;
use dea_core::linprog::{solve, verify_optimality, LpStatus};
use dea_core::models::{build_instance, linearize_ccr, linearize_sbm};
use dea_core::{
    descriptive_stats, efficiency_bands, evaluate_all, improvement_targets, mean_row, rank_scores, synthesize_matching,
    BandBasis, ComparisonRecord, Dataset, EfficiencyResult, Indicator, ModelKind, ModelSpec, Projection, RateReport,
    ReturnsToScale, Role, StatsRow,
};
use dea_oracle::{ccr_output_score, random_dea, ratio_score, sbm_grid_score, RawDea, SplitMix};
use serde_json::Value;

const PROVINCES: [&str; 11] = [
    "Liaoning",
    "Hebei",
    "Tianjin",
    "Shandong",
    "Jiangsu",
    "Shanghai",
    "Zhejiang",
    "Fujian",
    "Guangdong",
    "Guangxi",
    "Hainan",
];
const EE: [f64; 11] = [0.49, 0.63, 1.0, 1.0, 1.0, 1.0, 0.42, 0.48, 0.49, 0.21, 0.24];
const EPI: [f64; 11] = [0.22, 0.23, 1.0, 1.0, 1.0, 1.0, 0.16, 0.23, 0.21, 0.07, 0.13];
const CCR_FISHING: [f64; 11] = [91.2, 64.4, 0.0, 0.0, 0.0, 0.0, 95.2, 91.4, 95.5, 73.8, 89.4];
const UOM_FISHING: [f64; 11] = [98.8, 97.7, 0.0, 0.0, 0.0, 0.0, 97.9, 98.9, 97.4, 99.1, 99.6];
const CCR_BERTHS: [f64; 11] = [0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 3.8, 0.0, 0.0];
const UOM_BERTHS: [f64; 11] = [57.7, 59.1, 0.0, 0.0, 0.0, 0.0, 83.0, 61.7, 73.2, 89.0, 70.8];
const CCR_HOTEL: [f64; 11] = [0.0, 26.4, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 3.0, 0.0];
const UOM_HOTEL: [f64; 11] = [69.8, 86.1, 0.0, 0.0, 0.0, 0.0, 80.4, 60.6, 68.6, 92.8, 88.6];
const UOM_WASTE: [f64; 11] = [79.2, 93.1, 0.0, 0.0, 0.0, 0.0, 86.0, 86.4, 71.1, 96.6, 46.1];
const UOM_PERSONNEL: [f64; 11] = [48.4, 71.2, 0.0, 0.0, 0.0, 0.0, 46.5, 50.1, 45.0, 73.1, 75.5];
const CCR_GOP: [f64; 11] = [103.8, 59.9, 0.0, 0.0, 0.0, 0.0, 139.9, 108.7, 105.0, 365.5, 321.7];
const GDP_PER_CAPITA: [f64; 11] = [5.07, 3.39, 8.34, 4.71, 6.22, 8.18, 5.92, 4.72, 5.52, 2.52, 2.88];

struct Outcome {
    ok: bool,
    detail: String,
}

impl Outcome {
    fn from_failures(failures: Vec<String>, summary: String) -> Self {
        if failures.is_empty() {
            Outcome {
                ok: true,
                detail: summary,
            }
        } else {
            Outcome {
                ok: false,
                detail: format!("{summary}; {}", failures.join("; ")),
            }
        }
    }
}

/// The published results as comparison records. Input order is personnel,
/// fishing vessels, berths, hotel rooms; CCR personnel reductions are not
/// published and are zero.
fn published_records() -> Vec<ComparisonRecord> {
    let ee_ranks = rank_scores(&EE);
    let epi_ranks = rank_scores(&EPI);
    (0..11)
        .map(|k| ComparisonRecord {
            dmu: PROVINCES[k].into(),
            ee: EE[k],
            epi: EPI[k],
            ee_rank: ee_ranks[k],
            epi_rank: epi_ranks[k],
            ccr_rates: RateReport {
                dmu: PROVINCES[k].into(),
                input_reduction_pct: vec![0.0, CCR_FISHING[k], CCR_BERTHS[k], CCR_HOTEL[k]],
                bad_reduction_pct: vec![0.0],
                good_increase_pct: vec![CCR_GOP[k]],
            },
            sbm_rates: RateReport {
                dmu: PROVINCES[k].into(),
                input_reduction_pct: vec![UOM_PERSONNEL[k], UOM_FISHING[k], UOM_BERTHS[k], UOM_HOTEL[k]],
                bad_reduction_pct: vec![UOM_WASTE[k]],
                good_increase_pct: vec![0.0],
            },
            meta: vec![("Per capita GDP".into(), GDP_PER_CAPITA[k])],
        })
        .collect()
}

fn ranking_reproduction() -> Outcome {
    let ee = rank_scores(&EE);
    let epi = rank_scores(&EPI);
    let mut failures = Vec::new();
    if ee != [6, 5, 1, 1, 1, 1, 9, 8, 6, 11, 10] {
        failures.push(format!("EE ranks {ee:?}"));
    }
    if epi != [7, 5, 1, 1, 1, 1, 9, 5, 8, 11, 10] {
        failures.push(format!("EPI ranks {epi:?}"));
    }
    Outcome::from_failures(failures, format!("EE {ee:?}, EPI {epi:?}"))
}

fn mean_row_reproduction() -> Outcome {
    let m = mean_row(&published_records());
    let checks = [
        ("EE", m.ee, 0.63),
        ("EPI", m.epi, 0.48),
        ("CCR fishing vessels", m.ccr_rates.input_reduction_pct[1], 54.6),
        ("UOM fishing vessels", m.sbm_rates.input_reduction_pct[1], 62.7),
        ("UOM berths", m.sbm_rates.input_reduction_pct[2], 45.0),
        ("UOM hotel rooms", m.sbm_rates.input_reduction_pct[3], 49.8),
        ("UOM waste water", m.sbm_rates.bad_reduction_pct[0], 50.8),
        ("UOM personnel", m.sbm_rates.input_reduction_pct[0], 37.3),
        ("CCR output increase", m.ccr_rates.good_increase_pct[0], 109.5),
    ];
    let failures = checks
        .iter()
        .filter(|(_, got, want)| (got - want).abs() > 0.05)
        .map(|(name, got, want)| {
            format!(
                "{name} mean {got:.4} vs published {want} (off by {:.4})",
                (got - want).abs()
            )
        })
        .collect();
    Outcome::from_failures(failures, format!("{} cells checked at ±0.05", checks.len()))
}

fn radial_identity() -> Outcome {
    // One-DMU instance with unit output: the rate is exactly 100·(φ − 1).
    let d = Dataset::new(
        vec!["u".into()],
        vec![
            Indicator::new("x", Role::Input),
            Indicator::new("y", Role::DesirableOutput),
        ],
        vec![vec![1.0, 1.0]],
    )
    .unwrap();
    let inst = build_instance(&d, "u", &ModelSpec::ccr(ReturnsToScale::Crs)).unwrap();
    let rate_at = |ee: f64| {
        let phi = 1.0 / ee;
        let r = EfficiencyResult {
            dmu: "u".into(),
            kind: ModelKind::CcrOutput,
            score: ee,
            phi,
            lambda: vec![phi],
            slack_in: vec![0.0],
            slack_good: vec![0.0],
            slack_bad: Vec::new(),
            projection: Projection {
                inputs: vec![1.0],
                good: vec![phi],
                bad: Vec::new(),
            },
        };
        improvement_targets(&r, &inst).good_increase_pct[0]
    };
    let mut failures = Vec::new();
    let mut checked = 0;
    for k in (0..11).filter(|&k| EE[k] < 1.0) {
        let (lo, hi) = (rate_at(EE[k] + 0.005), rate_at(EE[k] - 0.005));
        checked += 1;
        if !(lo <= CCR_GOP[k] && CCR_GOP[k] <= hi) {
            failures.push(format!("{} {} outside [{lo:.1}, {hi:.1}]", PROVINCES[k], CCR_GOP[k]));
        }
    }
    if checked != 7 {
        failures.push(format!("expected 7 inefficient provinces, found {checked}"));
    }
    Outcome::from_failures(
        failures,
        format!("{checked} inefficient provinces inside their intervals"),
    )
}

fn canonical() -> Dataset {
    Dataset::new(
        vec!["A".into(), "B".into()],
        vec![
            Indicator::new("x", Role::Input),
            Indicator::new("g", Role::DesirableOutput),
            Indicator::new("b", Role::UndesirableOutput),
        ],
        vec![vec![1.0, 2.0, 1.0], vec![1.0, 1.0, 2.0]],
    )
    .unwrap()
}

fn micro_instances() -> Outcome {
    let mut failures = Vec::new();
    let mut near = |what: &str, got: f64, want: f64| {
        if (got - want).abs() > 1e-6 {
            failures.push(format!("{what}: {got} vs {want}"));
        }
    };
    // Oracles first: the analytic values must hold for the brute-force checks.
    near("ratio oracle A", ratio_score(&[1.0, 1.0], &[2.0, 1.0], 0), 1.0);
    near("ratio oracle B", ratio_score(&[1.0, 1.0], &[2.0, 1.0], 1), 0.5);
    let (xv, gv, wv) = (
        vec![vec![1.0], vec![1.0]],
        vec![vec![2.0], vec![1.0]],
        vec![vec![1.0], vec![2.0]],
    );
    near("grid oracle A", sbm_grid_score(&xv, &gv, &wv, 0, 2000), 1.0);
    near("grid oracle B", sbm_grid_score(&xv, &gv, &wv, 1, 2000), 4.0 / 11.0);

    let d = canonical();
    let ccr = evaluate_all(&d, &ModelSpec::ccr(ReturnsToScale::Crs)).unwrap();
    let sbm = evaluate_all(&d, &ModelSpec::sbm(ReturnsToScale::Crs)).unwrap();
    near("EE A", ccr[0].score, 1.0);
    near("EE B", ccr[1].score, 0.5);
    near("EPI A", sbm[0].score, 1.0);
    near("EPI B", sbm[1].score, 4.0 / 11.0);
    near("s- B", sbm[1].slack_in[0], 0.5);
    near("sg B", sbm[1].slack_good[0], 0.0);
    near("sb B", sbm[1].slack_bad[0], 1.5);
    Outcome::from_failures(
        failures,
        format!(
            "EE ({:.6}, {:.6}), EPI ({:.6}, {:.6})",
            ccr[0].score, ccr[1].score, sbm[0].score, sbm[1].score
        ),
    )
}

fn to_dataset(raw: &RawDea) -> Dataset {
    let m = raw.x[0].len();
    let mut indicators: Vec<Indicator> = (0..m).map(|i| Indicator::new(format!("x{i}"), Role::Input)).collect();
    indicators.push(Indicator::new("good", Role::DesirableOutput));
    indicators.push(Indicator::new("bad", Role::UndesirableOutput));
    let rows = (0..raw.x.len())
        .map(|j| raw.x[j].iter().chain(&raw.g[j]).chain(&raw.w[j]).copied().collect())
        .collect();
    Dataset::new((0..raw.x.len()).map(|j| format!("D{j}")).collect(), indicators, rows).unwrap()
}

fn oracle_equivalence() -> Outcome {
    let mut rng = SplitMix::new(0xACCE);
    let mut failures = Vec::new();
    let mut worst = (0.0f64, 0.0f64);
    for case in 0..200 {
        let raw = random_dea(&mut rng, 3, 2, 0.5, 10.0);
        let d = to_dataset(&raw);
        let sbm = evaluate_all(&d, &ModelSpec::sbm(ReturnsToScale::Crs)).unwrap();
        let ccr = evaluate_all(&d, &ModelSpec::ccr(ReturnsToScale::Crs)).unwrap();
        for k in 0..raw.x.len() {
            let grid = sbm_grid_score(&raw.x, &raw.g, &raw.w, k, 1000);
            let enumerated = ccr_output_score(&raw.x, &raw.g, k);
            let (ds, dc) = ((sbm[k].score - grid).abs(), (ccr[k].score - enumerated).abs());
            worst = (worst.0.max(ds), worst.1.max(dc));
            if ds > 5e-3 {
                failures.push(format!("case {case} dmu {k}: sbm {} vs grid {grid}", sbm[k].score));
            }
            if dc > 1e-6 {
                failures.push(format!(
                    "case {case} dmu {k}: ccr {} vs enumeration {enumerated}",
                    ccr[k].score
                ));
            }
        }
    }
    Outcome::from_failures(
        failures,
        format!(
            "200 datasets; worst sbm gap {:.2e}, worst ccr gap {:.2e}",
            worst.0, worst.1
        ),
    )
}

fn invariant_suites() -> Outcome {
    let mut rng = SplitMix::new(0x1A7);
    let mut failures = Vec::new();
    let (mut solves, mut max_drift) = (0usize, 0.0f64);
    for case in 0..100 {
        let raw = random_dea(&mut rng, 6, 3, 0.5, 10.0);
        let d = to_dataset(&raw);
        let col = rng.range(0, d.indicators().len() - 1);
        let factor = 10f64.powf(rng.uniform(-4.0, 4.0));
        let scaled = d.with_scaled_column(col, factor);
        for spec in [ModelSpec::ccr(ReturnsToScale::Crs), ModelSpec::sbm(ReturnsToScale::Crs)] {
            let results = evaluate_all(&d, &spec).unwrap();
            let rescaled = evaluate_all(&scaled, &spec).unwrap();
            for (p, q) in results.iter().zip(&rescaled) {
                let drift = (p.score - q.score).abs();
                max_drift = max_drift.max(drift);
                if drift > 1e-7 {
                    failures.push(format!("case {case} {:?}: units drift {drift:.2e}", spec.kind));
                }
            }
            for r in &results {
                let efficient = (r.score - 1.0).abs() <= 1e-9;
                if efficient != (r.max_slack() <= 1e-7 && r.phi - 1.0 <= 1e-9) {
                    failures.push(format!(
                        "case {case} {:?} {}: score {} max slack {:.2e}",
                        spec.kind,
                        r.dmu,
                        r.score,
                        r.max_slack()
                    ));
                }
                for (j, &l) in r.lambda.iter().enumerate() {
                    if l > 1e-7 && (results[j].score - 1.0).abs() > 1e-7 {
                        failures.push(format!(
                            "case {case} {:?}: peer {j} of {} is inefficient",
                            spec.kind, r.dmu
                        ));
                    }
                }
            }
        }
        for name in d.dmu_names() {
            let sbm = build_instance(&d, name, &ModelSpec::sbm(ReturnsToScale::Crs)).unwrap();
            let ccr = build_instance(&d, name, &ModelSpec::ccr(ReturnsToScale::Crs)).unwrap();
            let (lp, _) = linearize_sbm(&sbm);
            let stage1 = linearize_ccr(&ccr, None);
            let s1 = solve(&stage1);
            let stage2 = linearize_ccr(&ccr, Some(s1.primal.first().copied().unwrap_or(1.0).max(1.0)));
            for (what, lp, sol) in [
                ("sbm", &lp, solve(&lp)),
                ("ccr stage 1", &stage1, s1.clone()),
                ("ccr stage 2", &stage2, solve(&stage2)),
            ] {
                solves += 1;
                if sol.status != LpStatus::Optimal || !verify_optimality(lp, &sol).unwrap_or(false) {
                    failures.push(format!(
                        "case {case} {name} {what}: {:?} without certificate",
                        sol.status
                    ));
                }
            }
        }
    }
    failures.truncate(10);
    Outcome::from_failures(
        failures,
        format!("100 scalings, max drift {max_drift:.2e}; {solves} certified solves"),
    )
}

fn coastal_summary() -> Vec<StatsRow> {
    let row = |name: &str, role, max, min, mean, sd| StatsRow {
        indicator: String::from(name),
        role,
        max,
        min,
        mean,
        sd,
    };
    vec![
        row("Personnel", Role::Input, 820.4, 94.2, 309.31, 211.05),
        row("Fishing vessels", Role::Input, 59057.0, 543.0, 26382.3, 20126.2),
        row("Berths", Role::Input, 1392.0, 53.0, 430.27, 415.66),
        row("Hotel rooms", Role::Input, 140252.0, 16850.0, 67469.09, 36289.46),
        row(
            "Waste water",
            Role::UndesirableOutput,
            246298.5,
            6820.12,
            123002.84,
            74293.07,
        ),
        row(
            "Gross ocean product",
            Role::DesirableOutput,
            9191.1,
            613.8,
            4136.0,
            2625.9,
        ),
    ]
}

fn synthesis_round_trip() -> Outcome {
    let mut failures = Vec::new();
    let spec = coastal_summary();
    let d = synthesize_matching(&spec, 11, 42).unwrap();
    for (got, want) in descriptive_stats(&d).unwrap().iter().zip(&spec) {
        let cells = [
            ("max", got.max, want.max),
            ("min", got.min, want.min),
            ("mean", got.mean, want.mean),
            ("sd", got.sd, want.sd),
        ];
        for (what, g, w) in cells {
            if (g - w).abs() > SYNTHESIS_TOLERANCE * w.abs() {
                failures.push(format!("{} {what}: {g} vs {w}", want.indicator));
            }
        }
    }

    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("coastal.csv");
    std::fs::write(&path, dea::io::write_dataset_csv(&d)).unwrap();
    let (mut out, mut err) = (Vec::new(), Vec::new());
    let start = Instant::now();
    let code = dea::run(
        ["dea", "report", "--input", path.to_str().unwrap(), "--format", "json"],
        &mut out,
        &mut err,
    );
    let elapsed = start.elapsed();
    if code != 0 {
        failures.push(format!("report exited {code}: {}", String::from_utf8_lossy(&err)));
        return Outcome::from_failures(failures, String::new());
    }
    if elapsed >= Duration::from_secs(1) {
        failures.push(format!("report took {elapsed:?}"));
    }
    let v: Value = serde_json::from_slice(&out).unwrap();
    let rows = v.as_array().unwrap();
    let records = &rows[..rows.len() - 1];
    if records.len() != 11 || rows.last().unwrap()["DMU"] != "Mean" {
        failures.push(format!("{} records", records.len()));
    }
    for key in ["EE", "EPI"] {
        let scores: Vec<f64> = records.iter().map(|r| r[key].as_f64().unwrap()).collect();
        if let Some(bad) = scores.iter().find(|s| !(**s > 0.0 && **s <= 1.0)) {
            failures.push(format!("{key} score {bad} outside (0, 1]"));
        }
        let ranks: Vec<usize> = records
            .iter()
            .map(|r| r[format!("{key} rank")].as_u64().unwrap() as usize)
            .collect();
        if ranks != rank_scores(&scores) {
            failures.push(format!("{key} ranks {ranks:?}"));
        }
    }
    for r in records {
        let rates = r.as_object().unwrap().iter().filter(|(k, _)| k.ends_with('%'));
        for (k, v) in rates {
            let v = v.as_f64().unwrap();
            let efficient = if k.starts_with("CCR") {
                r["EE"].as_f64()
            } else {
                r["EPI"].as_f64()
            } == Some(1.0);
            if v < 0.0 || (efficient && v > 1e-5) {
                failures.push(format!("{} {k} = {v}", r["DMU"]));
            }
        }
        if !matches!(r["Level"].as_u64(), Some(1..=3)) {
            failures.push(format!("{} has no level", r["DMU"]));
        }
    }
    Outcome::from_failures(failures, format!("stats within 0.5%; report in {elapsed:.2?}"))
}

fn band_reproduction() -> Outcome {
    let bands = efficiency_bands(&published_records(), DEFAULT_BAND_THRESHOLDS, BandBasis::Epi);
    let sorted = |v: &[String]| {
        let mut v = v.to_vec();
        v.sort();
        v
    };
    let want = |names: &[&str]| {
        let mut v: Vec<String> = names.iter().map(|s| s.to_string()).collect();
        v.sort();
        v
    };
    let mut failures = Vec::new();
    let levels = [
        (&bands.level1, want(&["Tianjin", "Shandong", "Jiangsu", "Shanghai"])),
        (&bands.level2, want(&["Hebei", "Fujian", "Liaoning", "Guangdong"])),
        (&bands.level3, want(&["Zhejiang", "Hainan", "Guangxi"])),
    ];
    for (i, (got, want)) in levels.iter().enumerate() {
        if sorted(got) != *want {
            failures.push(format!("level {}: {:?}", i + 1, got));
        }
    }
    Outcome::from_failures(
        failures,
        format!("{:?} / {:?} / {:?}", bands.level1, bands.level2, bands.level3),
    )
}

fn check(name: &str, criterion: fn() -> Outcome, budget: Option<Duration>) {
    let start = Instant::now();
    let mut outcome = criterion();
    let elapsed = start.elapsed();
    if let Some(budget) = budget {
        if elapsed >= budget {
            outcome.ok = false;
            outcome.detail.push_str(&format!("; over budget {budget:?}"));
        }
    }
    let tag = if outcome.ok { "PASS" } else { "FAIL" };
    println!("\n[{tag}] {name} ({elapsed:.2?}): {}", outcome.detail);
    assert!(outcome.ok, "criterion {name} failed: {}", outcome.detail);
}

#[test]
fn criterion_1_ranking_reproduction() {
    check(
        "1 ranking reproduction",
        ranking_reproduction,
        Some(Duration::from_millis(1)),
    );
}

#[test]
fn criterion_2_mean_row_reproduction() {
    check(
        "2 mean-row reproduction",
        mean_row_reproduction,
        Some(Duration::from_millis(1)),
    );
}

#[test]
fn criterion_3_ccr_radial_identity() {
    check("3 CCR radial identity", radial_identity, None);
}

#[test]
fn criterion_4_analytic_micro_instances() {
    check("4 analytic micro-instances", micro_instances, None);
}

#[test]
fn criterion_5_oracle_equivalence() {
    check(
        "5 oracle equivalence",
        oracle_equivalence,
        Some(Duration::from_secs(30)),
    );
}

#[test]
fn criterion_6_invariant_suites() {
    check("6 invariant suites", invariant_suites, None);
}

#[test]
fn criterion_7_synthesis_round_trip() {
    check("7 synthesis round trip", synthesis_round_trip, None);
}

#[test]
fn criterion_8_band_reproduction() {
    check("8 band reproduction", band_reproduction, None);
}
