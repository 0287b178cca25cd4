//! Cross-implementation anchors for the exact population enumeration.
//!
//! The expected values below were computed by an independent implementation
//! of the same 32-state enumeration (NumPy, 200-step bisection for the
//! dropout intercept) and frozen here. They pin the oracle against silent
//! regressions in the factorization, the calibration, or the estimand
//! arithmetic.

use perr_lab::dgp::{
    calibrate_dropout_intercept, enumerate_population, DgpParams, Scenario, ScenarioSpec,
};

/// (scenario id, dropout target, perr_prev, perr_comp, rr)
const ANCHORS: [(u8, f64, f64, f64, f64); 20] = [
    (1, 0.00, 2.0, 2.0, 2.7283506542974876),
    (1, 0.05, 1.9791148026260965, 2.005729092154441, 2.699859583337376),
    (1, 0.10, 1.955574597156985, 2.0110301397316737, 2.6677466158404024),
    (1, 0.15, 1.9292281313396105, 2.015810065240937, 2.6318054172147725),
    (1, 0.20, 1.9001688080090005, 2.0199752901108448, 2.5921634053035163),
    (2, 0.00, 2.0, 2.0, 2.7283506542974876),
    (2, 0.05, 2.005807693528452, 2.0018214076499037, 2.7362733665166425),
    (2, 0.10, 2.0103986319988634, 2.0035977839068098, 2.7425362115064362),
    (2, 0.15, 2.0134446385005664, 2.005291001929926, 2.746691498422394),
    (2, 0.20, 2.014580434200061, 2.0068540133686836, 2.748240922892326),
    (3, 0.00, 2.0, 2.0, 2.7283506542974876),
    (3, 0.05, 1.9791650600362385, 2.0, 2.6999281432562983),
    (3, 0.10, 1.9556932555386062, 2.0, 2.6679084866769696),
    (3, 0.15, 1.9294389123413993, 2.0, 2.6320929594568443),
    (3, 0.20, 1.9005009160625472, 2.0, 2.5926164589161123),
    (4, 0.00, 2.0, 2.0, 2.7283506542974876),
    (4, 0.05, 2.0057927885589333, 2.0, 2.7362530335249735),
    (4, 0.10, 2.010375965174654, 2.0, 2.7425052899841043),
    (4, 0.15, 2.0134250810309418, 2.0, 2.7466648186048706),
    (4, 0.20, 2.014579593256062, 2.0, 2.748239775697271),
];

#[test]
fn asymptotic_estimands_match_independent_enumeration() {
    let params = DgpParams::default();
    for (scenario_id, target, prev, comp, rr) in ANCHORS {
        let spec = ScenarioSpec::new(Scenario::from_id(scenario_id).unwrap(), target).unwrap();
        let model = calibrate_dropout_intercept(&params, &spec).unwrap();
        let pop = enumerate_population(&params, &spec, &model).unwrap();
        let checks = [
            ("perr_prev", pop.perr_prev.value().unwrap(), prev),
            ("perr_comp", pop.perr_comp.value().unwrap(), comp),
            ("rr", pop.rr.value().unwrap(), rr),
        ];
        for (name, got, want) in checks {
            let rel = ((got - want) / want).abs();
            assert!(
                rel < 1e-9,
                "scenario {scenario_id} target {target} {name}: got {got}, want {want} (rel {rel:e})"
            );
        }
    }
}

#[test]
fn calibrated_intercepts_match_independent_solver() {
    // gamma0 anchors at target 0.20, one per scenario.
    let anchors = [
        (1u8, -4.191822995006072),
        (2, -2.699503550458803),
        (3, -4.1732226829842105),
        (4, -2.681501644111564),
    ];
    let params = DgpParams::default();
    for (scenario_id, gamma0) in anchors {
        let spec = ScenarioSpec::new(Scenario::from_id(scenario_id).unwrap(), 0.20).unwrap();
        let model = calibrate_dropout_intercept(&params, &spec).unwrap();
        let got = model.intercept().unwrap();
        assert!(
            (got - gamma0).abs() < 1e-9,
            "scenario {scenario_id}: gamma0 {got} vs anchor {gamma0}"
        );
    }
}
