//! Run configuration: a JSON file mapping onto the experiment grid plus
//! output and worker settings. Every key is optional; omitted keys take the
//! documented defaults, so the minimal useful config is `{"seed": 1}`.

use serde::{Deserialize, Serialize};

use crate::dgp::{DgpParams, Scenario};
use crate::error::{Error, Result};
use crate::harness::ExperimentGrid;

pub const DEFAULT_DROPOUT_RATES: [f64; 5] = [0.0, 0.05, 0.10, 0.15, 0.20];
pub const DEFAULT_COHORT_SIZE: usize = 100_000;
pub const DEFAULT_REPLICATES: usize = 10_000;
pub const DEFAULT_SEED: u64 = 12345;

/// Environment variable consulted when the CLI `--workers` flag is absent.
pub const WORKERS_ENV_VAR: &str = "PERR_LAB_WORKERS";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub dgp: DgpParams,
    pub scenarios: Vec<Scenario>,
    pub dropout_rates: Vec<f64>,
    pub cohort_size: usize,
    pub replicates: usize,
    pub seed: u64,
    /// Worker threads; 0 means one per available core.
    pub workers: usize,
    /// Output directory for `simulate`; overridden by the CLI `--out` flag.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub out_dir: Option<String>,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            dgp: DgpParams::default(),
            scenarios: Scenario::ALL.to_vec(),
            dropout_rates: DEFAULT_DROPOUT_RATES.to_vec(),
            cohort_size: DEFAULT_COHORT_SIZE,
            replicates: DEFAULT_REPLICATES,
            seed: DEFAULT_SEED,
            workers: 0,
            out_dir: None,
        }
    }
}

impl RunConfig {
    /// Validates every field, naming the offender, and returns the grid.
    pub fn to_grid(&self) -> Result<ExperimentGrid> {
        let grid = ExperimentGrid {
            dgp: self.dgp,
            scenarios: self.scenarios.clone(),
            dropout_targets: self.dropout_rates.clone(),
            cohort_size: self.cohort_size,
            n_replicates: self.replicates,
            master_seed: self.seed,
        };
        grid.validate()?;
        Ok(grid)
    }

    pub fn validate(&self) -> Result<()> {
        self.to_grid().map(|_| ())
    }
}

/// Parses and validates a JSON run config.
pub fn parse_config(text: &str) -> Result<RunConfig> {
    let config: RunConfig = serde_json::from_str(text).map_err(|e| {
        // DGP parameter bounds live in validate(); serde only sees shape errors.
        Error::Parse(e)
    })?;
    // Surface DGP violations as validation errors naming the dotted field.
    if let Err(Error::InvalidParams { field, message }) = config.dgp.validate() {
        return Err(Error::validation(&format!("dgp.{field}"), message));
    }
    config.validate()?;
    Ok(config)
}

/// Canonical JSON serialization; `parse_config(serialize_config(c))` equals `c`.
pub fn serialize_config(config: &RunConfig) -> String {
    serde_json::to_string_pretty(config).expect("config serialization cannot fail")
}

/// Worker-count resolution: CLI flag, then the PERR_LAB_WORKERS environment
/// variable, then the config file value (0 = auto).
pub fn resolve_workers(cli: Option<usize>, env: Option<&str>, config: usize) -> Result<usize> {
    if let Some(w) = cli {
        return Ok(w);
    }
    if let Some(text) = env {
        return text.trim().parse::<usize>().map_err(|_| {
            Error::validation(WORKERS_ENV_VAR, format!("`{text}` is not a worker count"))
        });
    }
    Ok(config)
}
