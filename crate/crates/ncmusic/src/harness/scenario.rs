//! Serializable scenario templates and the built-in benchmark scenarios.

use serde::{Deserialize, Serialize};

use crate::array::UlaGeometry;
use crate::error::{DoaError, Result};
use crate::signal::{Scenario, SourceSpec};

fn default_snapshots() -> usize {
    500
}

fn default_snr() -> f64 {
    10.0
}

/// Scenario template: everything but the per-trial seed.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ScenarioConfig {
    pub geometry: UlaGeometry,
    pub sources: Vec<SourceSpec>,
    #[serde(default = "default_snr")]
    pub snr_db: f64,
    #[serde(default)]
    pub noiseless: bool,
    #[serde(default = "default_snapshots")]
    pub num_snapshots: usize,
}

impl ScenarioConfig {
    /// Built-in benchmark scenarios by name.
    ///
    /// * `fig1` — five sources on a 5-element half-wavelength ULA at 3 dB:
    ///   BPSK at 35° and 95°, QPSK at 40° and 125°, UQPSK (rate 0.5) at 135°.
    /// * `fig2` — four sources on a 6-element half-wavelength ULA: BPSK at
    ///   35° (phase 10°) and 65° (phase 20°), QPSK at 75°, UQPSK at 85°
    ///   (rate 0.5, phase 40°).
    pub fn builtin(name: &str) -> Option<Self> {
        match name {
            "fig1" => Some(Self {
                geometry: UlaGeometry::half_wavelength(5).expect("valid geometry"),
                sources: vec![
                    SourceSpec::bpsk(35.0, 10.0).expect("valid source"),
                    SourceSpec::bpsk(95.0, 20.0).expect("valid source"),
                    SourceSpec::qpsk(40.0).expect("valid source"),
                    SourceSpec::qpsk(125.0).expect("valid source"),
                    SourceSpec::uqpsk(135.0, 0.5, 40.0).expect("valid source"),
                ],
                snr_db: 3.0,
                noiseless: false,
                num_snapshots: 500,
            }),
            "fig2" => Some(Self {
                geometry: UlaGeometry::half_wavelength(6).expect("valid geometry"),
                sources: vec![
                    SourceSpec::bpsk(35.0, 10.0).expect("valid source"),
                    SourceSpec::bpsk(65.0, 20.0).expect("valid source"),
                    SourceSpec::qpsk(75.0).expect("valid source"),
                    SourceSpec::uqpsk(85.0, 0.5, 40.0).expect("valid source"),
                ],
                snr_db: 10.0,
                noiseless: false,
                num_snapshots: 500,
            }),
            _ => None,
        }
    }

    /// Load a scenario by built-in name or from a JSON file path.
    pub fn load(name_or_path: &str) -> Result<Self> {
        if let Some(builtin) = Self::builtin(name_or_path) {
            return Ok(builtin);
        }
        let path = std::path::Path::new(name_or_path);
        if !path.exists() {
            return Err(DoaError::Config(format!(
                "'{name_or_path}' is neither a built-in scenario (fig1, fig2) nor an existing file"
            )));
        }
        let text = std::fs::read_to_string(path).map_err(|source| DoaError::Io {
            path: name_or_path.to_string(),
            source,
        })?;
        let cfg: ScenarioConfig = serde_json::from_str(&text)
            .map_err(|e| DoaError::Config(format!("invalid scenario file: {e}")))?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Template-level validation (a throwaway scenario is constructed).
    pub fn validate(&self) -> Result<()> {
        self.to_scenario(0).map(|_| ())
    }

    /// Instantiate with a seed.
    pub fn to_scenario(&self, seed: u64) -> Result<Scenario> {
        Scenario::build(
            self.geometry,
            self.sources.clone(),
            self.snr_db,
            self.noiseless,
            self.num_snapshots,
            seed,
        )
    }
}

/// A scenario either named (`{"name": "fig2"}`) or written inline.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ScenarioRef {
    Named { name: String },
    Inline(ScenarioConfig),
}

impl ScenarioRef {
    pub fn resolve(&self) -> Result<ScenarioConfig> {
        match self {
            ScenarioRef::Named { name } => ScenarioConfig::builtin(name).ok_or_else(|| {
                DoaError::Config(format!("unknown built-in scenario '{name}'"))
            }),
            ScenarioRef::Inline(cfg) => {
                cfg.validate()?;
                Ok(cfg.clone())
            }
        }
    }
}
