use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use perr_lab::cohort_csv::read_cohort;
use perr_lab::config::{parse_config, resolve_workers, serialize_config, WORKERS_ENV_VAR};
use perr_lab::dgp::{calibrate_dropout_intercept, enumerate_population, ScenarioSpec};
use perr_lab::error::{Error, Result};
use perr_lab::estimators::{bootstrap_ci, estimate_all, summarize_cohort, Estimator};
use perr_lab::figure::emit_figure;
use perr_lab::harness::run_experiment;
use perr_lab::results_csv::{format_sig6, read_results, write_results};
use perr_lab::stream::{derive_rng, DOMAIN_BOOTSTRAP};

#[derive(Parser)]
#[command(name = "perr-lab", version, about = "Simulation laboratory and estimators for the prior event rate ratio (PERR) method")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the full experiment grid and write a results CSV.
    Simulate {
        /// JSON run configuration.
        #[arg(long)]
        config: PathBuf,
        /// Output directory (falls back to the config's `out_dir`).
        #[arg(long)]
        out: Option<PathBuf>,
        /// Worker threads (0 = one per core); falls back to PERR_LAB_WORKERS, then the config.
        #[arg(long)]
        workers: Option<usize>,
    },
    /// Estimate treatment effects from a cohort CSV (header id,x,y1,m2,y2).
    Estimate {
        #[arg(long)]
        input: PathBuf,
        /// Number of bootstrap resamples for percentile confidence intervals.
        #[arg(long)]
        bootstrap: Option<usize>,
        /// Confidence level for the bootstrap interval.
        #[arg(long, default_value_t = 0.95)]
        level: f64,
        /// Seed for the bootstrap resampling streams.
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Print exact asymptotic estimator values for every grid cell.
    Oracle {
        #[arg(long)]
        config: PathBuf,
    },
    /// Render a results CSV as an SVG figure.
    Plot {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// True treatment effect drawn as a horizontal reference line.
        #[arg(long, default_value_t = 2.0)]
        truth: f64,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Simulate { config, out, workers } => simulate(config, out, workers),
        Command::Estimate { input, bootstrap, level, seed } => estimate(input, bootstrap, level, seed),
        Command::Oracle { config } => oracle(config),
        Command::Plot { input, out, truth } => plot(input, out, truth),
    }
}

fn read_to_string(path: &PathBuf) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::Io { path: path.clone(), source: e })
}

fn simulate(config_path: PathBuf, out: Option<PathBuf>, workers_flag: Option<usize>) -> Result<()> {
    let config = parse_config(&read_to_string(&config_path)?)?;
    let out_dir = out
        .or_else(|| config.out_dir.as_ref().map(PathBuf::from))
        .ok_or_else(|| Error::Validation {
            field: "out_dir".into(),
            message: "pass --out DIR or set `out_dir` in the config".into(),
        })?;
    let env_workers = std::env::var(WORKERS_ENV_VAR).ok();
    let workers = resolve_workers(workers_flag, env_workers.as_deref(), config.workers)?;

    let grid = config.to_grid()?;
    let rows = run_experiment(&grid, workers)?;

    fs::create_dir_all(&out_dir).map_err(|e| Error::Io { path: out_dir.clone(), source: e })?;
    let results_path = out_dir.join("results.csv");
    write_results(&rows, &results_path)?;
    let config_path_out = out_dir.join("config_resolved.json");
    fs::write(&config_path_out, serialize_config(&config))
        .map_err(|e| Error::Io { path: config_path_out.clone(), source: e })?;

    println!(
        "wrote {} rows to {} ({} scenarios x {} dropout levels x {} replicates of {} persons)",
        rows.len(),
        results_path.display(),
        grid.scenarios.len(),
        grid.dropout_targets.len(),
        grid.n_replicates,
        grid.cohort_size,
    );
    println!("resolved config written to {}", config_path_out.display());
    Ok(())
}

fn estimate(input: PathBuf, bootstrap: Option<usize>, level: f64, seed: u64) -> Result<()> {
    let records = read_cohort(&input)?;
    if records.is_empty() {
        eprintln!("warning: {} contains no data rows", input.display());
    }
    let summary = summarize_cohort(&records)?;
    let estimates = estimate_all(&summary);
    let completers = summary.treated.n_completers + summary.control.n_completers;
    println!("records: {}  completers: {}", records.len(), completers);

    for (index, estimator) in Estimator::ALL.into_iter().enumerate() {
        let value = estimates.get(estimator);
        let rendered = match value.value() {
            Some(v) => format_sig6(v),
            None => value.to_string(),
        };
        match (bootstrap, value.value()) {
            (Some(n_resamples), Some(_)) => {
                let mut rng = derive_rng(seed, &[DOMAIN_BOOTSTRAP, index as u64]);
                let ci = bootstrap_ci(&records, estimator, n_resamples, level, &mut rng)?;
                println!(
                    "{} = {rendered}  {:.0}% CI [{}, {}]  (resamples: {}, failed: {})",
                    estimator.name(),
                    level * 100.0,
                    format_sig6(ci.lower),
                    format_sig6(ci.upper),
                    n_resamples,
                    ci.n_failed,
                );
            }
            _ => println!("{} = {rendered}", estimator.name()),
        }
    }
    Ok(())
}

fn oracle(config_path: PathBuf) -> Result<()> {
    let config = parse_config(&read_to_string(&config_path)?)?;
    let grid = config.to_grid()?;
    println!("scenario,dropout_target,perr_prev,perr_comp,rr");
    for &scenario in &grid.scenarios {
        for &target in &grid.dropout_targets {
            let spec = ScenarioSpec::new(scenario, target)?;
            let model = calibrate_dropout_intercept(&grid.dgp, &spec)?;
            let pop = enumerate_population(&grid.dgp, &spec, &model)?;
            let cell = |v: perr_lab::estimators::EstimatorValue| match v.value() {
                Some(x) => format_sig6(x),
                None => v.to_string(),
            };
            println!(
                "{},{},{},{},{}",
                scenario.id(),
                format_sig6(target),
                cell(pop.perr_prev),
                cell(pop.perr_comp),
                cell(pop.rr),
            );
        }
    }
    Ok(())
}

fn plot(input: PathBuf, out: PathBuf, truth: f64) -> Result<()> {
    let rows = read_results(&input)?;
    emit_figure(&rows, truth, &out)?;
    println!("wrote figure with {} rows to {}", rows.len(), out.display());
    Ok(())
}
