//! RMSE and resolution-probability aggregation over trial outcomes.

use super::trial::TrialOutcome;

/// Root mean-square error over all successful trials and sources:
/// `sqrt(sum_k sum_i e_{k,i}^2 / (K_success * q))`. `None` when every trial
/// failed.
pub fn rmse(outcomes: &[TrialOutcome]) -> Option<f64> {
    let mut sum_sq = 0.0;
    let mut count = 0usize;
    for outcome in outcomes {
        if let Some(errors) = outcome.errors_deg() {
            for e in errors {
                sum_sq += e * e;
                count += 1;
            }
        }
    }
    if count == 0 {
        None
    } else {
        Some((sum_sq / count as f64).sqrt())
    }
}

/// Fraction of trials (out of all trials) that delivered a full peak set
/// with every matched error inside the threshold.
pub fn resolution_probability(outcomes: &[TrialOutcome], threshold_deg: f64) -> f64 {
    if outcomes.is_empty() {
        return 0.0;
    }
    let resolved = outcomes
        .iter()
        .filter(|o| o.resolved(threshold_deg))
        .count();
    resolved as f64 / outcomes.len() as f64
}
