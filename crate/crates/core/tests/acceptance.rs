//! Acceptance suite: eight numbered criteria covering estimator exactness,
//! bias structure across the scenario grid, oracle convergence, determinism,
//! and the full-scale run. Each test prints one `criterion N: PASS` line;
//! desk scale is 500 replicates of 20,000 persons unless a criterion says
//! otherwise.

use std::sync::OnceLock;

use perr_lab::dgp::{
    calibrate_dropout_intercept, enumerate_population, DgpParams, Scenario, ScenarioSpec,
};
use perr_lab::estimators::{estimate_all, summarize_cohort, Estimator, EstimatorValue};
use perr_lab::harness::{
    calibrate_cell, run_experiment, run_replicate, ExperimentGrid, ReplicateResult, SummaryRow,
};
use perr_lab::results_csv::results_to_bytes;

const ACCEPTANCE_SEED: u64 = 20240601;
const DESK_REPLICATES: usize = 500;
const DESK_COHORT: usize = 20_000;
const DROPOUT_GRID: [f64; 5] = [0.0, 0.05, 0.10, 0.15, 0.20];

fn desk_grid() -> ExperimentGrid {
    ExperimentGrid {
        dgp: DgpParams::default(),
        scenarios: Scenario::ALL.to_vec(),
        dropout_targets: DROPOUT_GRID.to_vec(),
        cohort_size: DESK_COHORT,
        n_replicates: DESK_REPLICATES,
        master_seed: ACCEPTANCE_SEED,
    }
}

fn desk_rows() -> &'static [SummaryRow] {
    static ROWS: OnceLock<Vec<SummaryRow>> = OnceLock::new();
    ROWS.get_or_init(|| run_experiment(&desk_grid(), 0).expect("desk-scale run"))
}

/// Scenario-1 replicate results for each dropout level, at desk scale.
fn scenario_one_cells() -> &'static [Vec<ReplicateResult>] {
    static CELLS: OnceLock<Vec<Vec<ReplicateResult>>> = OnceLock::new();
    CELLS.get_or_init(|| {
        let grid = desk_grid();
        (0..DROPOUT_GRID.len())
            .map(|dropout_index| {
                let cell = calibrate_cell(&grid, Scenario::ConfounderTreatmentPrior, dropout_index)
                    .expect("calibration");
                (0..grid.n_replicates)
                    .map(|i| run_replicate(&grid, &cell, i).expect("replicate"))
                    .collect()
            })
            .collect()
    })
}

fn values(replicates: &[ReplicateResult], estimator: Estimator) -> Vec<f64> {
    replicates.iter().filter_map(|r| r.estimates.get(estimator).value()).collect()
}

/// Mean and its Monte Carlo standard error (sample SD / sqrt(n)).
fn mean_and_se(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

#[test]
fn criterion_1_no_dropout_correctness() {
    let cell = &scenario_one_cells()[0];
    for r in cell {
        assert_eq!(
            r.estimates.perr_prev, r.estimates.perr_comp,
            "replicate {}: prev and comp must coincide at zero dropout",
            r.replicate_index
        );
    }
    let (prev_mean, _) = mean_and_se(&values(cell, Estimator::PerrPrev));
    let (comp_mean, _) = mean_and_se(&values(cell, Estimator::PerrComp));
    assert!((prev_mean - 2.0).abs() <= 0.02, "mean PERR_Prev {prev_mean} off 2.0 by > 0.02");
    assert!((comp_mean - 2.0).abs() <= 0.02, "mean PERR_Comp {comp_mean} off 2.0 by > 0.02");

    let (rr_mean, rr_se) = mean_and_se(&values(cell, Estimator::Rr));
    let z = (rr_mean - 2.0) / rr_se;
    assert!(
        z > 5.0,
        "RR must stay confounded upward at zero dropout: mean {rr_mean}, z {z}"
    );
    println!(
        "criterion 1: PASS — prev {prev_mean:.4}, comp {comp_mean:.4} within ±0.02 of 2.0; \
         RR {rr_mean:.4} is {z:.0} SEs above 2.0"
    );
}

#[test]
fn criterion_2_completer_perr_unbiased_in_scenarios_3_and_4() {
    let mut worst: (f64, u8, f64) = (0.0, 0, 0.0);
    for row in desk_rows() {
        if row.estimator != Estimator::PerrComp {
            continue;
        }
        let id = row.scenario.id();
        if id != 3 && id != 4 {
            continue;
        }
        let oracle = row.oracle.value().expect("oracle defined");
        assert!(
            (oracle - 2.0).abs() <= 1e-12,
            "scenario {id} d={}: oracle {oracle} off 2.0 beyond 1e-12",
            row.dropout_target
        );
        let mean = row.mean.expect("mean defined");
        let bias = (mean - 2.0).abs();
        assert!(
            bias <= 0.03,
            "scenario {id} d={}: mean PERR_Comp {mean} off 2.0 by {bias} > 0.03",
            row.dropout_target
        );
        if bias > worst.0 {
            worst = (bias, id, row.dropout_target);
        }
    }
    println!(
        "criterion 2: PASS — PERR_Comp within ±0.03 of 2.0 in scenarios 3 and 4 at every \
         dropout level (worst |bias| {:.4} at scenario {} d={}), oracle exact to 1e-12",
        worst.0, worst.1, worst.2
    );
}

#[test]
fn criterion_3_scenario_1_bias_directions_at_20_percent() {
    let cell = &scenario_one_cells()[4];
    let (prev_mean, prev_se) = mean_and_se(&values(cell, Estimator::PerrPrev));
    let (comp_mean, comp_se) = mean_and_se(&values(cell, Estimator::PerrComp));
    let prev_z = (2.0 - prev_mean) / prev_se;
    let comp_z = (comp_mean - 2.0) / comp_se;
    assert!(prev_z > 3.0, "PERR_Prev must under-estimate by > 3 SEs: mean {prev_mean}, z {prev_z}");
    assert!(comp_z > 3.0, "PERR_Comp must over-estimate by > 3 SEs: mean {comp_mean}, z {comp_z}");
    let prev_bias = (prev_mean - 2.0).abs();
    let comp_bias = (comp_mean - 2.0).abs();
    assert!(
        comp_bias < prev_bias,
        "|bias(PERR_Comp)| = {comp_bias} must be below |bias(PERR_Prev)| = {prev_bias}"
    );
    println!(
        "criterion 3: PASS — at 20% dropout prev {prev_mean:.4} ({prev_z:.1} SEs low), \
         comp {comp_mean:.4} ({comp_z:.1} SEs high), bias ratio {:.2}",
        comp_bias / prev_bias
    );
}

#[test]
fn criterion_4_scenario_1_prev_bias_grows_with_dropout() {
    let biases: Vec<f64> = scenario_one_cells()
        .iter()
        .map(|cell| {
            let (mean, _) = mean_and_se(&values(cell, Estimator::PerrPrev));
            (mean - 2.0).abs()
        })
        .collect();
    for (i, pair) in biases.windows(2).enumerate() {
        assert!(
            pair[1] >= pair[0],
            "|mean PERR_Prev - 2| must be non-decreasing: {biases:?} breaks between \
             dropout {} and {}",
            DROPOUT_GRID[i],
            DROPOUT_GRID[i + 1]
        );
    }
    println!("criterion 4: PASS — |mean(PERR_Prev) − 2| non-decreasing across the grid: {biases:?}");
}

#[test]
fn criterion_5_completer_perr_near_unbiased_below_ten_percent() {
    // Parameter-dependent band (see README): holds for the default DGP.
    let mut reported = Vec::new();
    for (dropout_index, cell) in scenario_one_cells().iter().enumerate().take(3) {
        let (mean, _) = mean_and_se(&values(cell, Estimator::PerrComp));
        let bias = (mean - 2.0).abs();
        assert!(
            bias <= 0.02,
            "dropout {}: |mean PERR_Comp - 2| = {bias} exceeds 0.02",
            DROPOUT_GRID[dropout_index]
        );
        reported.push(format!("{:.4}", mean));
    }
    println!(
        "criterion 5: PASS — mean PERR_Comp at dropout ≤ 0.10 stays within ±0.02 of 2.0: [{}]",
        reported.join(", ")
    );
}

#[test]
fn criterion_6_oracle_convergence_and_exactness() {
    // One million-person replicate per grid cell; the estimator must land
    // within 4 delta-method standard errors of the enumerated asymptote.
    // Component variances are summed without the (positive, cancelling)
    // covariance terms, which makes the band conservative.
    let grid = ExperimentGrid { cohort_size: 1_000_000, n_replicates: 1, ..desk_grid() };
    let mut max_abs_z: f64 = 0.0;
    for &scenario in &grid.scenarios {
        for (dropout_index, &target) in grid.dropout_targets.iter().enumerate() {
            let cell = calibrate_cell(&grid, scenario, dropout_index).unwrap();
            let pop = enumerate_population(&grid.dgp, &cell.spec, &cell.model).unwrap();
            assert!(
                (pop.joint_sum() - 1.0).abs() <= 1e-12,
                "joint law must sum to 1 (scenario {scenario}, d={target})"
            );
            assert!(
                (pop.marginal_dropout - target).abs() <= 1e-10,
                "calibrated marginal {} off target {target}",
                pop.marginal_dropout
            );

            let result = run_replicate(&grid, &cell, 0).unwrap();
            let mut rng = perr_lab::stream::derive_stream(
                grid.master_seed,
                scenario.id(),
                dropout_index,
                0,
            );
            let cohort = perr_lab::dgp::sample_cohort(
                &grid.dgp,
                &cell.spec,
                &cell.model,
                grid.cohort_size,
                &mut rng,
            )
            .unwrap();
            let s = summarize_cohort(&cohort).unwrap();
            assert_eq!(estimate_all(&s), result.estimates, "replicate path must match");

            // var(ln p_hat) ~= (1-p)/(p*m) = (1-p)/events for a binomial proportion
            let log_se = |parts: &[(u64, u64)]| -> f64 {
                parts
                    .iter()
                    .map(|&(events, members)| {
                        let p = events as f64 / members as f64;
                        (1.0 - p) / events as f64
                    })
                    .sum::<f64>()
                    .sqrt()
            };
            let t = &s.treated;
            let c = &s.control;
            let y2_parts =
                [(t.sum_y2_completers, t.n_completers), (c.sum_y2_completers, c.n_completers)];
            let prior_all_parts = [(t.sum_y1_all, t.n_total), (c.sum_y1_all, c.n_total)];
            let prior_comp_parts =
                [(t.sum_y1_completers, t.n_completers), (c.sum_y1_completers, c.n_completers)];

            for (estimator, se_parts) in [
                (Estimator::Rr, [&y2_parts[..], &[][..]]),
                (Estimator::PerrPrev, [&y2_parts[..], &prior_all_parts[..]]),
                (Estimator::PerrComp, [&y2_parts[..], &prior_comp_parts[..]]),
            ] {
                let estimate = result.estimates.get(estimator).value().unwrap();
                let oracle = pop.value_of(estimator).value().unwrap();
                let all_parts: Vec<(u64, u64)> =
                    se_parts.iter().flat_map(|p| p.iter().copied()).collect();
                let se = log_se(&all_parts);
                let z = (estimate.ln() - oracle.ln()) / se;
                assert!(
                    z.abs() <= 4.0,
                    "scenario {scenario} d={target} {estimator}: {estimate} vs oracle {oracle} \
                     is {z:.2} SEs away"
                );
                max_abs_z = max_abs_z.max(z.abs());
            }
        }
    }
    println!(
        "criterion 6: PASS — every estimator within 4 delta-method SEs of its asymptote on all \
         20 cells at n=10^6 (max |z| {max_abs_z:.2}); joint sums exact to 1e-12, calibration to 1e-10"
    );
}

#[test]
fn criterion_7_estimator_unit_suite() {
    // the shared 12-record cohort, built inline
    let rec = |x: u8, y1: u8, m2: u8, y2: Option<u8>| perr_lab::dgp::IndividualRecord {
        c: false,
        x: x == 1,
        y1: y1 == 1,
        m2: m2 == 1,
        y2: y2.map(|v| v == 1),
    };
    let cohort = vec![
        rec(1, 1, 0, Some(1)),
        rec(1, 0, 0, Some(1)),
        rec(1, 0, 0, Some(0)),
        rec(1, 0, 0, Some(0)),
        rec(1, 1, 1, None),
        rec(1, 1, 1, None),
        rec(0, 1, 0, Some(1)),
        rec(0, 1, 0, Some(0)),
        rec(0, 0, 0, Some(0)),
        rec(0, 0, 0, Some(0)),
        rec(0, 0, 1, None),
        rec(0, 0, 1, None),
    ];
    let estimates = estimate_all(&summarize_cohort(&cohort).unwrap());
    assert_eq!(estimates.perr_prev, EstimatorValue::Value(4.0 / 3.0));
    assert_eq!(estimates.perr_comp, EstimatorValue::Value(4.0));
    assert_eq!(estimates.rr, EstimatorValue::Value(2.0));

    // randomized invariants over 1000 cohorts with a fixed stream
    use rand::seq::SliceRandom;
    use rand::Rng;
    let mut rng = perr_lab::stream::derive_rng(ACCEPTANCE_SEED, &[7]);
    for case in 0..1000 {
        let n = rng.gen_range(0..60);
        let cohort: Vec<_> = (0..n)
            .map(|_| {
                let m2 = rng.gen::<bool>();
                perr_lab::dgp::IndividualRecord {
                    c: false,
                    x: rng.gen(),
                    y1: rng.gen(),
                    m2,
                    y2: if m2 { None } else { Some(rng.gen()) },
                }
            })
            .collect();
        let base = estimate_all(&summarize_cohort(&cohort).unwrap());

        // permutation invariance
        let mut shuffled = cohort.clone();
        shuffled.shuffle(&mut rng);
        assert_eq!(base, estimate_all(&summarize_cohort(&shuffled).unwrap()), "case {case}");

        // replication invariance
        let mut doubled = cohort.clone();
        doubled.extend_from_slice(&cohort);
        assert_eq!(base, estimate_all(&summarize_cohort(&doubled).unwrap()), "case {case}");

        // label symmetry
        let swapped: Vec<_> = cohort
            .iter()
            .map(|r| perr_lab::dgp::IndividualRecord { x: !r.x, ..*r })
            .collect();
        let sym = estimate_all(&summarize_cohort(&swapped).unwrap());
        for (a, b) in [
            (base.perr_prev, sym.perr_prev),
            (base.perr_comp, sym.perr_comp),
            (base.rr, sym.rr),
        ] {
            match (a, b) {
                (EstimatorValue::Value(x), EstimatorValue::Value(y)) => {
                    assert!((x * y - 1.0).abs() < 1e-12, "case {case}: {x} * {y} != 1")
                }
                (a, b) => assert_eq!(a, b, "case {case}"),
            }
        }

        // coincidence on completer-only cohorts
        let complete: Vec<_> = cohort
            .iter()
            .map(|r| perr_lab::dgp::IndividualRecord {
                m2: false,
                y2: Some(r.y2.unwrap_or(false)),
                ..*r
            })
            .collect();
        let s = summarize_cohort(&complete).unwrap();
        assert_eq!(
            perr_lab::estimators::perr_prev(&s),
            perr_lab::estimators::perr_comp(&s),
            "case {case}"
        );
    }
    println!(
        "criterion 7: PASS — shared cohort gives exactly 4/3, 4, 2; permutation, replication, \
         label-symmetry and coincidence invariants hold over 1000 random cohorts"
    );
}

#[test]
fn criterion_8a_worker_count_determinism() {
    let grid = desk_grid();
    let bytes_1 = results_to_bytes(&run_experiment(&grid, 1).unwrap());
    let bytes_4 = results_to_bytes(&run_experiment(&grid, 4).unwrap());
    let bytes_8 = results_to_bytes(&run_experiment(&grid, 8).unwrap());
    assert_eq!(bytes_1, bytes_4, "worker counts 1 and 4 must produce identical CSV bytes");
    assert_eq!(bytes_1, bytes_8, "worker counts 1 and 8 must produce identical CSV bytes");
    println!(
        "criterion 8a: PASS — results CSV bit-identical for worker counts 1, 4, 8 \
         ({} bytes)",
        bytes_1.len()
    );
}

#[test]
fn criterion_8b_full_scale_run_completes_clean() {
    // The full grid: 4 scenarios x 5 dropout levels x 10,000 replicates of
    // 100,000 persons. Takes a few minutes per core-GHz; run time scales
    // inversely with worker count.
    let grid = ExperimentGrid {
        dgp: DgpParams::default(),
        scenarios: Scenario::ALL.to_vec(),
        dropout_targets: DROPOUT_GRID.to_vec(),
        cohort_size: 100_000,
        n_replicates: 10_000,
        master_seed: ACCEPTANCE_SEED,
    };
    let rows = run_experiment(&grid, 0).expect("full-scale run completes");
    assert_eq!(rows.len(), 60);
    for row in &rows {
        assert_eq!(
            row.n_failed, 0,
            "scenario {} d={} {}: {} failed replicates",
            row.scenario, row.dropout_target, row.estimator, row.n_failed
        );
        assert_eq!(row.n_used, 10_000);
    }
    println!(
        "criterion 8b: PASS — full paper-scale grid (60 cells, 200,000 replicates of 100,000 \
         persons) completed with n_failed = 0 everywhere"
    );
}
