//! SNR sweeps over Monte Carlo trials with deterministic per-trial seeding.

use rayon::prelude::*;
use sha2::{Digest, Sha256};

use super::metrics::{resolution_probability, rmse};
use super::trial::{default_resolution_threshold, run_trial, TrialOutcome};
use super::{Algorithm, SweepConfig};
use crate::error::{DoaError, Result};
use crate::estimators::AngleGrid;
use crate::signal::derive_seed;

const ROLE_TRIAL: u64 = 3;

/// Deterministic seed of one trial: a counter-based split of the master
/// seed over (SNR index, trial index). Shared by every algorithm at the
/// same grid point so cross-algorithm comparisons are paired.
pub fn trial_seed(master_seed: u64, snr_index: usize, trial: usize) -> u64 {
    derive_seed(
        master_seed,
        ((snr_index as u64) << 32) | trial as u64,
        ROLE_TRIAL,
    )
}

/// Aggregated metrics for one (SNR, algorithm) cell.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub snr_db: f64,
    pub algorithm: Algorithm,
    pub rmse_deg: Option<f64>,
    pub resolution_prob: f64,
    pub failed_trials: usize,
}

/// Aggregated sweep output plus reproducibility metadata.
#[derive(Debug, Clone)]
pub struct SweepResult {
    pub rows: Vec<SweepRow>,
    pub master_seed: u64,
    pub config_sha256: String,
}

/// Raw per-trial outcomes of one (SNR, algorithm) cell, in trial order.
#[derive(Debug)]
pub struct SweepCell {
    pub snr_db: f64,
    pub algorithm: Algorithm,
    pub outcomes: Vec<TrialOutcome>,
}

/// A sweep result together with every per-trial outcome.
#[derive(Debug)]
pub struct DetailedSweep {
    pub cells: Vec<SweepCell>,
    pub result: SweepResult,
}

/// SHA-256 of the serialized config, hex-encoded.
pub(super) fn config_hash(config: &SweepConfig) -> String {
    let bytes = serde_json::to_vec(config).expect("config serializes");
    let digest = Sha256::digest(&bytes);
    digest.iter().map(|b| format!("{b:02x}")).collect()
}

/// Run the whole sweep, keeping per-trial outcomes. Trials execute in
/// parallel on `threads` workers (available parallelism when `None`);
/// results are aggregated in trial order, so the output is independent of
/// the scheduling.
pub fn run_sweep_detailed(config: &SweepConfig, threads: Option<usize>) -> Result<DetailedSweep> {
    config.validate()?;
    let template = config.scenario.resolve()?;
    let grid = AngleGrid::with_step(config.grid_step_deg)?;

    let mut pool_builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = threads {
        pool_builder = pool_builder.num_threads(n.max(1));
    }
    let pool = pool_builder
        .build()
        .map_err(|e| DoaError::Config(format!("thread pool: {e}")))?;

    let threshold = config
        .resolution_threshold_deg
        .unwrap_or_else(|| default_resolution_threshold(&template.to_scenario(0).expect("validated")));

    let mut cells = Vec::new();
    let mut rows = Vec::new();
    for (snr_index, &snr_db) in config.snr_grid_db.iter().enumerate() {
        for &algorithm in &config.algorithms {
            let outcomes: Vec<TrialOutcome> = pool.install(|| {
                (0..config.num_trials)
                    .into_par_iter()
                    .map(|trial| {
                        let seed = trial_seed(config.master_seed, snr_index, trial);
                        let scenario = template
                            .to_scenario(seed)
                            .expect("validated template")
                            .with_snr_db(snr_db);
                        run_trial(&scenario, algorithm, &grid)
                    })
                    .collect::<Result<Vec<_>>>()
            })?;

            let failed_trials = outcomes.iter().filter(|o| o.is_failed()).count();
            rows.push(SweepRow {
                snr_db,
                algorithm,
                rmse_deg: rmse(&outcomes),
                resolution_prob: resolution_probability(&outcomes, threshold),
                failed_trials,
            });
            cells.push(SweepCell {
                snr_db,
                algorithm,
                outcomes,
            });
        }
    }

    Ok(DetailedSweep {
        cells,
        result: SweepResult {
            rows,
            master_seed: config.master_seed,
            config_sha256: config_hash(config),
        },
    })
}

/// Run the sweep and keep only the aggregated rows.
pub fn run_sweep(config: &SweepConfig, threads: Option<usize>) -> Result<SweepResult> {
    run_sweep_detailed(config, threads).map(|d| d.result)
}
