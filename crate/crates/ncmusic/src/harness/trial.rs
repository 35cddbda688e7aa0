//! One Monte Carlo trial: synthesize, estimate, match estimates to truths.

use super::Algorithm;
use crate::covariance::CovarianceSet;
use crate::error::{DoaError, Result, Stage};
use crate::estimators::{
    AngleGrid, ClassCounts, DoaReport, SpectrumCurve, hrnc_music, music_doas, nc_music_doas,
};
use crate::signal::{Scenario, SignalClass, SourceSpec, synthesize_snapshots};

/// One matched estimate/truth pair.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DoaMatch {
    /// Signal class of the true source (None when the estimator does not
    /// classify, i.e. the baselines).
    pub class: Option<SignalClass>,
    pub true_deg: f64,
    pub est_deg: f64,
}

impl DoaMatch {
    pub fn error_deg(&self) -> f64 {
        self.est_deg - self.true_deg
    }
}

/// Outcome of one trial: matched estimates, or the stage that ran out of
/// spectrum minima. Estimation failure is data, not an error.
#[derive(Debug, Clone)]
pub enum TrialOutcome {
    Estimated { matches: Vec<DoaMatch> },
    Failed { stage: Stage, needed: usize, found: usize },
}

impl TrialOutcome {
    /// Signed errors (est - truth) for a successful trial.
    pub fn errors_deg(&self) -> Option<Vec<f64>> {
        match self {
            TrialOutcome::Estimated { matches } => {
                Some(matches.iter().map(|m| m.error_deg()).collect())
            }
            TrialOutcome::Failed { .. } => None,
        }
    }

    /// Full peak set delivered and every matched error inside the threshold.
    pub fn resolved(&self, threshold_deg: f64) -> bool {
        match self {
            TrialOutcome::Estimated { matches } => matches
                .iter()
                .all(|m| m.error_deg().abs() < threshold_deg),
            TrialOutcome::Failed { .. } => false,
        }
    }

    pub fn is_failed(&self) -> bool {
        matches!(self, TrialOutcome::Failed { .. })
    }
}

/// Estimator output rich enough for both metrics and spectrum emission.
pub enum AlgorithmOutput {
    Hrnc(Box<DoaReport>),
    Baseline {
        doas: Vec<f64>,
        curve: SpectrumCurve,
    },
}

impl AlgorithmOutput {
    pub fn curves(&self) -> Vec<&SpectrumCurve> {
        match self {
            AlgorithmOutput::Hrnc(report) => report.curves().iter().collect(),
            AlgorithmOutput::Baseline { curve, .. } => vec![curve],
        }
    }
}

/// Non-circularity rates of the common-NC sources, ascending by true DOA
/// (canonical scenario order).
fn common_nc_rates(scenario: &Scenario) -> Vec<f64> {
    scenario
        .sources()
        .iter()
        .filter(|s| s.class() == SignalClass::CommonNc)
        .map(|s| s.nc_rate())
        .collect()
}

/// Run one estimator on an already-built covariance set.
pub fn run_algorithm(
    scenario: &Scenario,
    cov: &CovarianceSet,
    algorithm: Algorithm,
    grid: &AngleGrid,
) -> Result<AlgorithmOutput> {
    let geom = scenario.geometry();
    let counts = ClassCounts::from_sources(scenario.sources())?;
    match algorithm {
        Algorithm::Music => {
            let (doas, curve) = music_doas(geom, cov.conj(), counts.total(), grid)?;
            Ok(AlgorithmOutput::Baseline { doas, curve })
        }
        Algorithm::NcMusic => {
            let (doas, curve) = nc_music_doas(geom, cov.extended(), &counts, grid)?;
            Ok(AlgorithmOutput::Baseline { doas, curve })
        }
        Algorithm::Hrnc => {
            let rates = common_nc_rates(scenario);
            let report = hrnc_music(geom, cov, &counts, &rates, grid)?;
            Ok(AlgorithmOutput::Hrnc(Box::new(report)))
        }
    }
}

/// Synthesize snapshots, estimate and match against the true DOAs. An
/// insufficient-peaks failure becomes a [`TrialOutcome::Failed`] marker;
/// anything else propagates as a real error.
pub fn run_trial(
    scenario: &Scenario,
    algorithm: Algorithm,
    grid: &AngleGrid,
) -> Result<TrialOutcome> {
    let snapshots = synthesize_snapshots(scenario)?;
    let cov = CovarianceSet::from_snapshots(&snapshots)?;
    let output = match run_algorithm(scenario, &cov, algorithm, grid) {
        Ok(out) => out,
        Err(DoaError::InsufficientPeaks { stage, needed, found }) => {
            return Ok(TrialOutcome::Failed { stage, needed, found });
        }
        Err(e) => return Err(e),
    };
    Ok(match_output(scenario, &output))
}

/// Match estimates to truths: per class for the pipeline, globally for the
/// baselines.
pub fn match_output(scenario: &Scenario, output: &AlgorithmOutput) -> TrialOutcome {
    match output {
        AlgorithmOutput::Hrnc(report) => {
            let mut matches = Vec::new();
            for (class, estimates) in [
                (SignalClass::MaximalNc, report.ncm()),
                (SignalClass::CommonNc, report.ncn()),
                (SignalClass::Circular, report.circ()),
            ] {
                let truths = class_doas(scenario.sources(), class);
                debug_assert_eq!(truths.len(), estimates.len());
                for (pair_true, pair_est) in truths.iter().zip(estimates.iter()) {
                    matches.push(DoaMatch {
                        class: Some(class),
                        true_deg: *pair_true,
                        est_deg: *pair_est,
                    });
                }
            }
            TrialOutcome::Estimated { matches }
        }
        AlgorithmOutput::Baseline { doas, .. } => {
            let mut truths = scenario.doas_deg();
            truths.sort_by(|a, b| a.partial_cmp(b).unwrap());
            // Both lists sorted ascending: the monotone pairing minimizes the
            // total absolute error over all one-to-one assignments.
            let mut estimates = doas.clone();
            estimates.sort_by(|a, b| a.partial_cmp(b).unwrap());
            let matches = truths
                .iter()
                .zip(estimates.iter())
                .map(|(&t, &e)| DoaMatch {
                    class: None,
                    true_deg: t,
                    est_deg: e,
                })
                .collect();
            TrialOutcome::Estimated { matches }
        }
    }
}

fn class_doas(sources: &[SourceSpec], class: SignalClass) -> Vec<f64> {
    let mut doas: Vec<f64> = sources
        .iter()
        .filter(|s| s.class() == class)
        .map(|s| s.doa().degrees())
        .collect();
    doas.sort_by(|a, b| a.partial_cmp(b).unwrap());
    doas
}

/// Default resolution threshold: half the minimum angular separation of the
/// true DOAs (the whole open interval if there is a single source).
pub fn default_resolution_threshold(scenario: &Scenario) -> f64 {
    let mut doas = scenario.doas_deg();
    doas.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let min_sep = doas
        .windows(2)
        .map(|w| w[1] - w[0])
        .fold(f64::INFINITY, f64::min);
    if min_sep.is_finite() {
        min_sep / 2.0
    } else {
        90.0
    }
}
