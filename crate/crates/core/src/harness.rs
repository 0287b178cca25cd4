//! The experiment harness: runs the full (scenario × dropout level) grid with
//! deterministic per-replicate random streams and aggregates the replicate
//! estimates into summary rows.
//!
//! Determinism contract: the output of [`run_experiment`] is a pure function
//! of the grid, whatever the worker count. Each replicate owns a stream
//! derived from `(master_seed, scenario, dropout index, replicate index)`,
//! and aggregation is a single-threaded fold over replicate results in
//! replicate-index order — no parallel floating-point reduction.

use rayon::prelude::*;

use crate::dgp::{
    calibrate_dropout_intercept, enumerate_population, sample_cohort, DgpParams, DropoutModel,
    PopulationEstimands, Scenario, ScenarioSpec,
};
use crate::error::{Error, Result};
use crate::estimators::{
    estimate_all, percentile, summarize_cohort, EstimateSet, Estimator, EstimatorValue,
};
use crate::stream::derive_stream;

/// The full experiment definition.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentGrid {
    pub dgp: DgpParams,
    pub scenarios: Vec<Scenario>,
    /// Target marginal dropout rates, strictly ascending, each in [0, 0.5].
    pub dropout_targets: Vec<f64>,
    pub cohort_size: usize,
    pub n_replicates: usize,
    pub master_seed: u64,
}

impl ExperimentGrid {
    pub fn validate(&self) -> Result<()> {
        self.dgp.validate()?;
        if self.scenarios.is_empty() {
            return Err(Error::validation("scenarios", "at least one scenario is required"));
        }
        if self.dropout_targets.is_empty() {
            return Err(Error::validation("dropout_rates", "at least one dropout rate is required"));
        }
        for (i, &d) in self.dropout_targets.iter().enumerate() {
            if !(0.0..=0.5).contains(&d) {
                return Err(Error::validation(
                    &format!("dropout_rates[{i}]"),
                    format!("{d} is not in [0, 0.5]"),
                ));
            }
            if i > 0 && d <= self.dropout_targets[i - 1] {
                return Err(Error::validation(
                    &format!("dropout_rates[{i}]"),
                    "dropout rates must be strictly ascending",
                ));
            }
        }
        if self.cohort_size == 0 {
            return Err(Error::validation("cohort_size", "must be at least 1"));
        }
        if self.n_replicates == 0 {
            return Err(Error::validation("replicates", "must be at least 1"));
        }
        Ok(())
    }
}

/// One grid cell with its calibrated dropout model.
#[derive(Debug, Clone)]
pub struct CalibratedCell {
    pub spec: ScenarioSpec,
    pub dropout_index: usize,
    pub model: DropoutModel,
}

/// Calibrates the dropout intercept for one `(scenario, dropout level)` cell.
pub fn calibrate_cell(
    grid: &ExperimentGrid,
    scenario: Scenario,
    dropout_index: usize,
) -> Result<CalibratedCell> {
    let target = *grid
        .dropout_targets
        .get(dropout_index)
        .ok_or_else(|| Error::validation("dropout_index", "out of range"))?;
    let spec = ScenarioSpec::new(scenario, target)?;
    let model = calibrate_dropout_intercept(&grid.dgp, &spec)?;
    Ok(CalibratedCell { spec, dropout_index, model })
}

/// One replicate's estimates.
#[derive(Debug, Clone, PartialEq)]
pub struct ReplicateResult {
    pub scenario: Scenario,
    pub dropout_target: f64,
    pub replicate_index: usize,
    pub estimates: EstimateSet,
    pub realized_dropout_fraction: f64,
}

/// Samples one cohort and computes the three estimators. Deterministic given
/// the grid's master seed and the cell/replicate indices.
pub fn run_replicate(
    grid: &ExperimentGrid,
    cell: &CalibratedCell,
    replicate_index: usize,
) -> Result<ReplicateResult> {
    let mut rng = derive_stream(
        grid.master_seed,
        cell.spec.scenario.id(),
        cell.dropout_index,
        replicate_index,
    );
    let cohort = sample_cohort(&grid.dgp, &cell.spec, &cell.model, grid.cohort_size, &mut rng)?;
    let summary = summarize_cohort(&cohort)?;
    let completers = summary.treated.n_completers + summary.control.n_completers;
    let dropped = cohort.len() as u64 - completers;
    Ok(ReplicateResult {
        scenario: cell.spec.scenario,
        dropout_target: cell.spec.target_dropout,
        replicate_index,
        estimates: estimate_all(&summary),
        realized_dropout_fraction: dropped as f64 / cohort.len() as f64,
    })
}

/// Aggregated results for one (scenario, dropout level, estimator) cell.
#[derive(Debug, Clone, PartialEq)]
pub struct SummaryRow {
    pub scenario: Scenario,
    pub dropout_target: f64,
    pub estimator: Estimator,
    /// Mean over non-failed replicates; `None` when every replicate failed.
    pub mean: Option<f64>,
    pub p2_5: Option<f64>,
    pub p97_5: Option<f64>,
    pub n_used: usize,
    pub n_failed: usize,
    /// Asymptotic value from the exact population enumeration.
    pub oracle: EstimatorValue,
}

/// Estimators in results-row order (sorted by estimator name).
pub const ESTIMATOR_ROW_ORDER: [Estimator; 3] =
    [Estimator::PerrComp, Estimator::PerrPrev, Estimator::Rr];

/// Runs every cell of the grid and aggregates Figure-style summary rows.
///
/// `worker_count` sizes the thread pool; 0 means one worker per available
/// core. The rows are identical for every worker count.
pub fn run_experiment(grid: &ExperimentGrid, worker_count: usize) -> Result<Vec<SummaryRow>> {
    grid.validate()?;

    let mut cells = Vec::new();
    let mut oracles: Vec<PopulationEstimands> = Vec::new();
    for &scenario in &grid.scenarios {
        for dropout_index in 0..grid.dropout_targets.len() {
            let cell = calibrate_cell(grid, scenario, dropout_index)?;
            oracles.push(enumerate_population(&grid.dgp, &cell.spec, &cell.model)?);
            cells.push(cell);
        }
    }

    let n = grid.n_replicates;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(worker_count)
        .build()
        .map_err(|e| Error::ThreadPool(e.to_string()))?;
    let results: Vec<ReplicateResult> = pool.install(|| {
        (0..cells.len() * n)
            .into_par_iter()
            .map(|task| run_replicate(grid, &cells[task / n], task % n))
            .collect::<Result<Vec<_>>>()
    })?;

    let mut rows = Vec::with_capacity(cells.len() * 3);
    for (ci, cell) in cells.iter().enumerate() {
        let replicates = &results[ci * n..(ci + 1) * n];
        for estimator in ESTIMATOR_ROW_ORDER {
            rows.push(summarize_cell(cell, replicates, estimator, oracles[ci].value_of(estimator)));
        }
    }
    Ok(rows)
}

/// Deterministic fold over one cell's replicates, in replicate-index order.
fn summarize_cell(
    cell: &CalibratedCell,
    replicates: &[ReplicateResult],
    estimator: Estimator,
    oracle: EstimatorValue,
) -> SummaryRow {
    let values: Vec<f64> =
        replicates.iter().filter_map(|r| r.estimates.get(estimator).value()).collect();
    let n_used = values.len();
    let n_failed = replicates.len() - n_used;
    let mean = (n_used > 0).then(|| values.iter().sum::<f64>() / n_used as f64);
    let mut sorted = values;
    sorted.sort_by(f64::total_cmp);
    let (p2_5, p97_5) = if sorted.is_empty() {
        (None, None)
    } else {
        (Some(percentile(&sorted, 0.025)), Some(percentile(&sorted, 0.975)))
    };
    SummaryRow {
        scenario: cell.spec.scenario,
        dropout_target: cell.spec.target_dropout,
        estimator,
        mean,
        p2_5,
        p97_5,
        n_used,
        n_failed,
        oracle,
    }
}
