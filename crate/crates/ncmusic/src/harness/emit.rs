//! CSV and JSON emission. CSVs are UTF-8 with LF line endings; floating
//! point values carry 9 significant digits.

use std::io::Write;
use std::path::{Path, PathBuf};

use super::sweep::SweepResult;
use super::SweepConfig;
use crate::error::{DoaError, Result};
use crate::estimators::SpectrumCurve;

/// Paths written by [`emit_results`].
#[derive(Debug, Clone)]
pub struct EmittedFiles {
    pub sweep_csv: PathBuf,
    pub manifest_json: PathBuf,
}

/// Nine significant digits, scientific.
pub(crate) fn fmt9(x: f64) -> String {
    format!("{x:.8e}")
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> DoaError + '_ {
    move |source| DoaError::Io {
        path: path.display().to_string(),
        source,
    }
}

fn write_atomic(path: &Path, contents: &str) -> Result<()> {
    let mut file = std::fs::File::create(path).map_err(io_err(path))?;
    file.write_all(contents.as_bytes()).map_err(io_err(path))?;
    Ok(())
}

/// Render the sweep CSV: one row per (SNR, algorithm), an empty RMSE field
/// when every trial failed.
pub(crate) fn sweep_csv_string(result: &SweepResult) -> String {
    let mut out = String::from("snr_db,algorithm,rmse_deg,resolution_prob,failed_trials\n");
    for row in &result.rows {
        let rmse = row.rmse_deg.map(fmt9).unwrap_or_default();
        out.push_str(&format!(
            "{},{},{},{},{}\n",
            fmt9(row.snr_db),
            row.algorithm.as_str(),
            rmse,
            fmt9(row.resolution_prob),
            row.failed_trials
        ));
    }
    out
}

/// Write `sweep.csv` and `manifest.json` into `out_dir` (created if absent).
pub fn emit_results(
    result: &SweepResult,
    config: &SweepConfig,
    out_dir: &Path,
) -> Result<EmittedFiles> {
    std::fs::create_dir_all(out_dir).map_err(io_err(out_dir))?;

    let sweep_csv = out_dir.join("sweep.csv");
    write_atomic(&sweep_csv, &sweep_csv_string(result))?;

    let manifest_json = out_dir.join("manifest.json");
    let manifest = serde_json::json!({
        "version": env!("CARGO_PKG_VERSION"),
        "created_utc": chrono::Utc::now().to_rfc3339(),
        "master_seed": result.master_seed,
        "config_sha256": result.config_sha256,
        "config": config,
        "outputs": ["sweep.csv"],
    });
    let mut text = serde_json::to_string_pretty(&manifest)
        .map_err(|e| DoaError::Config(format!("manifest serialization: {e}")))?;
    text.push('\n');
    write_atomic(&manifest_json, &text)?;

    Ok(EmittedFiles {
        sweep_csv,
        manifest_json,
    })
}

/// Write one or more spectrum curves as `kind,theta_deg,value` rows.
pub fn emit_spectra(curves: &[&SpectrumCurve], path: &Path) -> Result<()> {
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            std::fs::create_dir_all(parent).map_err(io_err(parent))?;
        }
    }
    let mut out = String::from("kind,theta_deg,value\n");
    for curve in curves {
        for (theta, value) in curve.grid().iter().zip(curve.values()) {
            out.push_str(&format!(
                "{},{},{}\n",
                curve.kind().as_str(),
                fmt9(*theta),
                fmt9(*value)
            ));
        }
    }
    write_atomic(path, &out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::{Algorithm, SweepRow};

    #[test]
    fn nine_significant_digit_format() {
        assert_eq!(fmt9(1.0), "1.00000000e0");
        assert_eq!(fmt9(-5.0), "-5.00000000e0");
        assert_eq!(fmt9(0.123456789123), "1.23456789e-1");
    }

    #[test]
    fn empty_sweep_renders_header_only() {
        let result = SweepResult {
            rows: vec![],
            master_seed: 0,
            config_sha256: String::new(),
        };
        assert_eq!(
            sweep_csv_string(&result),
            "snr_db,algorithm,rmse_deg,resolution_prob,failed_trials\n"
        );
    }

    #[test]
    fn missing_rmse_becomes_empty_field() {
        let result = SweepResult {
            rows: vec![SweepRow {
                snr_db: 5.0,
                algorithm: Algorithm::Music,
                rmse_deg: None,
                resolution_prob: 0.0,
                failed_trials: 10,
            }],
            master_seed: 0,
            config_sha256: String::new(),
        };
        let csv = sweep_csv_string(&result);
        assert!(csv.contains("5.00000000e0,music,,0.00000000e0,10\n"), "{csv}");
    }
}
