//! Monte Carlo harness: scenario configuration, trial execution, RMSE and
//! resolution metrics, SNR sweeps and CSV/JSON emission.

mod emit;
mod metrics;
mod scenario;
mod sweep;
mod trial;

pub use emit::{emit_results, emit_spectra, EmittedFiles};
pub use metrics::{resolution_probability, rmse};
pub use scenario::{ScenarioConfig, ScenarioRef};
pub use sweep::{
    run_sweep, run_sweep_detailed, trial_seed, DetailedSweep, SweepCell, SweepResult, SweepRow,
};
pub use trial::{default_resolution_threshold, run_algorithm, run_trial, AlgorithmOutput,
    DoaMatch, TrialOutcome};

use serde::{Deserialize, Serialize};

use crate::error::{DoaError, Result};

/// Estimator selection for trials and sweeps.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
pub enum Algorithm {
    #[serde(rename = "music")]
    #[value(name = "music")]
    Music,
    #[serde(rename = "nc-music")]
    #[value(name = "nc-music")]
    NcMusic,
    #[serde(rename = "hrnc")]
    #[value(name = "hrnc")]
    Hrnc,
}

impl Algorithm {
    pub fn as_str(&self) -> &'static str {
        match self {
            Algorithm::Music => "music",
            Algorithm::NcMusic => "nc-music",
            Algorithm::Hrnc => "hrnc",
        }
    }
}

impl std::fmt::Display for Algorithm {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

fn default_algorithms() -> Vec<Algorithm> {
    vec![Algorithm::Music, Algorithm::NcMusic, Algorithm::Hrnc]
}

fn default_grid_step() -> f64 {
    crate::estimators::AngleGrid::DEFAULT_STEP
}

/// Full description of one Monte Carlo experiment.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SweepConfig {
    /// Scenario template (seed and per-point SNR are supplied by the sweep).
    pub scenario: ScenarioRef,
    /// SNR grid in dB, evaluated in order.
    pub snr_grid_db: Vec<f64>,
    /// Monte Carlo trials per SNR point.
    pub num_trials: usize,
    #[serde(default = "default_algorithms")]
    pub algorithms: Vec<Algorithm>,
    pub master_seed: u64,
    #[serde(default = "default_grid_step")]
    pub grid_step_deg: f64,
    /// Override for the per-trial resolution threshold; defaults to half the
    /// minimum true angular separation.
    #[serde(default)]
    pub resolution_threshold_deg: Option<f64>,
}

impl SweepConfig {
    pub fn validate(&self) -> Result<()> {
        if self.snr_grid_db.is_empty() {
            return Err(DoaError::Config("snr_grid_db must not be empty".into()));
        }
        if self.snr_grid_db.iter().any(|s| !s.is_finite()) {
            return Err(DoaError::Config("snr_grid_db entries must be finite".into()));
        }
        if self.num_trials < 1 {
            return Err(DoaError::Config("num_trials must be at least 1".into()));
        }
        if self.algorithms.is_empty() {
            return Err(DoaError::Config("algorithms must not be empty".into()));
        }
        if !(self.grid_step_deg > 0.0) || !self.grid_step_deg.is_finite() {
            return Err(DoaError::Config(format!(
                "grid_step_deg must be positive, got {}",
                self.grid_step_deg
            )));
        }
        if let Some(t) = self.resolution_threshold_deg {
            if !(t > 0.0) || !t.is_finite() {
                return Err(DoaError::Config(format!(
                    "resolution_threshold_deg must be positive, got {t}"
                )));
            }
        }
        self.scenario.resolve()?.validate()?;
        Ok(())
    }

    /// Parse a sweep config from JSON; a run manifest (an object carrying a
    /// `config` field) is accepted too, so a previous run can be replayed.
    pub fn from_json(text: &str) -> Result<Self> {
        #[derive(Deserialize)]
        struct ManifestEnvelope {
            config: SweepConfig,
        }
        let cfg = match serde_json::from_str::<SweepConfig>(text) {
            Ok(cfg) => cfg,
            Err(direct_err) => serde_json::from_str::<ManifestEnvelope>(text)
                .map(|m| m.config)
                .map_err(|_| DoaError::Config(format!("invalid sweep config: {direct_err}")))?,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_file(path: &std::path::Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|source| DoaError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::from_json(&text)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn config_json_round_trip_and_manifest_unwrap() {
        let text = r#"{
            "scenario": {"name": "fig2"},
            "snr_grid_db": [-5, 0, 5, 10, 15],
            "num_trials": 10,
            "master_seed": 7
        }"#;
        let cfg = SweepConfig::from_json(text).unwrap();
        assert_eq!(cfg.algorithms.len(), 3);
        assert_eq!(cfg.grid_step_deg, 0.05);

        let manifest = format!(
            r#"{{"version": "x", "config": {}}}"#,
            serde_json::to_string(&cfg).unwrap()
        );
        let reparsed = SweepConfig::from_json(&manifest).unwrap();
        assert_eq!(reparsed.master_seed, 7);
    }

    #[test]
    fn invalid_configs_rejected() {
        let bad = r#"{"scenario": {"name": "fig2"}, "snr_grid_db": [], "num_trials": 10, "master_seed": 1}"#;
        assert!(SweepConfig::from_json(bad).is_err());
        let bad = r#"{"scenario": {"name": "nope"}, "snr_grid_db": [5], "num_trials": 10, "master_seed": 1}"#;
        assert!(SweepConfig::from_json(bad).is_err());
        let bad = r#"{"scenario": {"name": "fig2"}, "snr_grid_db": [5], "num_trials": 0, "master_seed": 1}"#;
        assert!(SweepConfig::from_json(bad).is_err());
    }
}
