use dea_core::linprog::{solve, verify_optimality, LpStatus};
use dea_core::models::{build_instance, linearize_ccr, linearize_sbm};
use dea_core::{evaluate_all, Dataset, EfficiencyResult, Indicator, ModelKind, ModelSpec, ReturnsToScale, Role};
use dea_oracle::{ccr_output_score, random_dea, ratio_score, sbm_grid_score, RawDea, SplitMix};

fn to_dataset(raw: &RawDea) -> Dataset {
    let n = raw.x.len();
    let m = raw.x[0].len();
    let mut indicators: Vec<Indicator> = (0..m).map(|i| Indicator::new(format!("x{i}"), Role::Input)).collect();
    indicators.push(Indicator::new("good", Role::DesirableOutput));
    indicators.push(Indicator::new("bad", Role::UndesirableOutput));
    let rows = (0..n)
        .map(|j| {
            let mut r = raw.x[j].clone();
            r.extend(&raw.g[j]);
            r.extend(&raw.w[j]);
            r
        })
        .collect();
    Dataset::new((0..n).map(|j| format!("D{j}")).collect(), indicators, rows).unwrap()
}

fn crs(kind: ModelKind) -> ModelSpec {
    match kind {
        ModelKind::CcrOutput => ModelSpec::ccr(ReturnsToScale::Crs),
        ModelKind::SbmUndesirable => ModelSpec::sbm(ReturnsToScale::Crs),
    }
}

fn sbm_fraction(r: &EfficiencyResult, x0: &[f64], g0: &[f64], b0: &[f64]) -> f64 {
    let m = x0.len() as f64;
    let s = (g0.len() + b0.len()) as f64;
    let num = 1.0 - r.slack_in.iter().zip(x0).map(|(s, x)| s / x).sum::<f64>() / m;
    let den = 1.0
        + (r.slack_good.iter().zip(g0).map(|(s, y)| s / y).sum::<f64>()
            + r.slack_bad.iter().zip(b0).map(|(s, y)| s / y).sum::<f64>())
            / s;
    num / den
}

#[test]
fn sbm_matches_lambda_grid_oracle() {
    let mut rng = SplitMix::new(2024);
    for case in 0..60 {
        let raw = random_dea(&mut rng, 3, 2, 0.5, 10.0);
        let d = to_dataset(&raw);
        let results = evaluate_all(&d, &crs(ModelKind::SbmUndesirable)).unwrap();
        for (k, r) in results.iter().enumerate() {
            let oracle = sbm_grid_score(&raw.x, &raw.g, &raw.w, k, 1000);
            assert!(
                (r.score - oracle).abs() <= 5e-3,
                "case {case} dmu {k}: lp {} vs grid {oracle}",
                r.score
            );
        }
    }
}

#[test]
fn ccr_matches_basis_enumeration_and_ratio_oracle() {
    let mut rng = SplitMix::new(77);
    for case in 0..100 {
        let raw = random_dea(&mut rng, 3, 2, 0.5, 10.0);
        let d = to_dataset(&raw);
        let results = evaluate_all(&d, &crs(ModelKind::CcrOutput)).unwrap();
        for (k, r) in results.iter().enumerate() {
            let oracle = ccr_output_score(&raw.x, &raw.g, k);
            assert!((r.score - oracle).abs() <= 1e-6, "case {case} dmu {k}");
            if raw.x[0].len() == 1 {
                let x: Vec<f64> = raw.x.iter().map(|v| v[0]).collect();
                let y: Vec<f64> = raw.g.iter().map(|v| v[0]).collect();
                assert!((r.score - ratio_score(&x, &y, k)).abs() <= 1e-9);
            }
        }
    }
}

#[test]
fn scores_are_invariant_to_indicator_units() {
    let mut rng = SplitMix::new(5);
    for case in 0..100 {
        let raw = random_dea(&mut rng, 5, 3, 0.5, 10.0);
        let d = to_dataset(&raw);
        let col = rng.range(0, d.indicators().len() - 1);
        let factor = 10f64.powf(rng.uniform(-4.0, 4.0));
        let scaled = d.with_scaled_column(col, factor);
        for kind in [ModelKind::CcrOutput, ModelKind::SbmUndesirable] {
            let a = evaluate_all(&d, &crs(kind)).unwrap();
            let b = evaluate_all(&scaled, &crs(kind)).unwrap();
            for (p, q) in a.iter().zip(&b) {
                assert!(
                    (p.score - q.score).abs() <= 1e-7,
                    "case {case} {kind:?} column {col} x{factor}: {} vs {}",
                    p.score,
                    q.score
                );
            }
        }
    }
}

#[test]
fn efficiency_iff_zero_slack_and_reference_sets_are_efficient() {
    let mut rng = SplitMix::new(11);
    for case in 0..150 {
        let raw = random_dea(&mut rng, 6, 3, 0.5, 10.0);
        let d = to_dataset(&raw);
        for kind in [ModelKind::CcrOutput, ModelKind::SbmUndesirable] {
            let results = evaluate_all(&d, &crs(kind)).unwrap();
            for r in &results {
                assert!(r.score > 0.0 && r.score <= 1.0);
                let efficient = (r.score - 1.0).abs() <= 1e-9;
                assert_eq!(
                    efficient,
                    r.max_slack() <= 1e-7 && r.phi - 1.0 <= 1e-9,
                    "case {case} {kind:?} {r:?}"
                );
                for (j, &l) in r.lambda.iter().enumerate() {
                    if l > 1e-7 {
                        assert!(
                            (results[j].score - 1.0).abs() <= 1e-7,
                            "case {case} {kind:?}: peer {j} of {}",
                            r.dmu
                        );
                    }
                }
            }
        }
    }
}

#[test]
fn sbm_fraction_recomputed_from_slacks_matches_objective() {
    let mut rng = SplitMix::new(99);
    for case in 0..150 {
        let raw = random_dea(&mut rng, 6, 3, 0.5, 10.0);
        let d = to_dataset(&raw);
        let results = evaluate_all(&d, &crs(ModelKind::SbmUndesirable)).unwrap();
        for (k, r) in results.iter().enumerate() {
            let rho = sbm_fraction(r, &raw.x[k], &raw.g[k], &raw.w[k]);
            assert!((rho - r.score).abs() <= 1e-7, "case {case}");
            if r.max_slack() > 1e-6 {
                assert!(rho < 1.0);
            }
            // Projection identity.
            for (i, p) in r.projection.inputs.iter().enumerate() {
                assert!((p - (raw.x[k][i] - r.slack_in[i])).abs() < 1e-12);
            }
        }
    }
}

#[test]
fn every_linearized_solve_carries_a_certificate() {
    let mut rng = SplitMix::new(3);
    for _ in 0..100 {
        let raw = random_dea(&mut rng, 6, 3, 0.5, 10.0);
        let d = to_dataset(&raw);
        for rts in [ReturnsToScale::Crs, ReturnsToScale::Vrs] {
            for name in d.dmu_names() {
                let inst = build_instance(&d, name, &ModelSpec::sbm(rts)).unwrap();
                let (lp, _) = linearize_sbm(&inst);
                let sol = solve(&lp);
                assert_eq!(sol.status, LpStatus::Optimal);
                assert!(verify_optimality(&lp, &sol).unwrap());

                let inst = build_instance(&d, name, &ModelSpec::ccr(rts)).unwrap();
                let stage1 = linearize_ccr(&inst, None);
                let sol = solve(&stage1);
                assert_eq!(sol.status, LpStatus::Optimal);
                assert!(verify_optimality(&stage1, &sol).unwrap());
                let stage2 = linearize_ccr(&inst, Some(sol.primal[0].max(1.0)));
                let sol = solve(&stage2);
                assert_eq!(sol.status, LpStatus::Optimal);
                assert!(verify_optimality(&stage2, &sol).unwrap());
            }
        }
    }
}

#[test]
fn evaluation_is_deterministic() {
    let mut rng = SplitMix::new(8);
    let raw = random_dea(&mut rng, 6, 3, 0.5, 10.0);
    let d = to_dataset(&raw);
    let spec = crs(ModelKind::SbmUndesirable);
    assert_eq!(evaluate_all(&d, &spec).unwrap(), evaluate_all(&d, &spec).unwrap());
}
