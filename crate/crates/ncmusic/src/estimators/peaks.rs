//! Minimum search on pseudo-spectrum curves with sub-grid refinement.

use super::spectrum::SpectrumCurve;
use crate::error::{DoaError, Result, Stage};

/// Locate the `k` deepest local minima of the curve and refine each by
/// three-point parabolic interpolation on `log f`. Returns the refined
/// angles sorted ascending. Minima must be strictly smaller than both
/// neighbours; ties in depth are broken towards the smaller angle.
pub fn peak_search(curve: &SpectrumCurve, k: usize, stage: Stage) -> Result<Vec<f64>> {
    if k == 0 {
        return Err(DoaError::InsufficientPeaks {
            stage,
            needed: 0,
            found: 0,
        });
    }
    let grid = curve.grid();
    let values = curve.values();
    if grid.len() < 3 {
        return Err(DoaError::Config(format!(
            "peak search needs at least 3 grid points, got {}",
            grid.len()
        )));
    }

    let mut minima: Vec<usize> = Vec::new();
    for i in 1..grid.len() - 1 {
        if values[i] < values[i - 1] && values[i] < values[i + 1] {
            minima.push(i);
        }
    }
    if minima.len() < k {
        return Err(DoaError::InsufficientPeaks {
            stage,
            needed: k,
            found: minima.len(),
        });
    }

    minima.sort_by(|&a, &b| {
        (values[a], grid[a])
            .partial_cmp(&(values[b], grid[b]))
            .unwrap()
    });
    minima.truncate(k);

    // Values are floored at a small fraction of the curve's maximum before
    // taking logs: below that level they are rounding noise (deep nulls of
    // analytic covariances) and would only jitter the parabola vertex. The
    // floor is relative, so refinement commutes with a global rescaling of
    // the spectrum.
    let max_value = values.iter().cloned().fold(0.0f64, f64::max);
    let floor = (max_value * 1e-14).max(f64::MIN_POSITIVE);

    let mut angles: Vec<f64> = minima
        .into_iter()
        .map(|i| refine_parabolic(grid, values, i, floor))
        .collect();
    angles.sort_by(|a, b| a.partial_cmp(b).unwrap());
    Ok(angles)
}

/// Parabola vertex through the three log-values around a strict minimum.
/// Clamped to half a grid step; degenerate curvature keeps the grid point.
fn refine_parabolic(grid: &[f64], values: &[f64], i: usize, floor: f64) -> f64 {
    let yl = values[i - 1].max(floor).ln();
    let yc = values[i].max(floor).ln();
    let yr = values[i + 1].max(floor).ln();
    let denom = yl - 2.0 * yc + yr;
    if !(denom > 0.0) || !denom.is_finite() {
        return grid[i];
    }
    let delta = (0.5 * (yl - yr) / denom).clamp(-0.5, 0.5);
    let half_span = 0.5 * (grid[i + 1] - grid[i - 1]);
    grid[i] + delta * half_span
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::estimators::spectrum::{AngleGrid, SpectrumKind};

    fn curve_from_fn(grid: &AngleGrid, f: impl Fn(f64) -> f64) -> SpectrumCurve {
        SpectrumCurve::for_tests(
            SpectrumKind::Music,
            grid.points().to_vec(),
            grid.points().iter().map(|&x| f(x)).collect(),
        )
    }

    #[test]
    fn parabola_vertex_recovered_exactly() {
        let grid = AngleGrid::new(50.0, 90.0, 1.0).unwrap();
        let curve = curve_from_fn(&grid, |x| (x - 70.0) * (x - 70.0));
        let peaks = peak_search(&curve, 1, Stage::Baseline).unwrap();
        assert!((peaks[0] - 70.0).abs() < 1e-6, "got {}", peaks[0]);
    }

    #[test]
    fn offgrid_parabola_vertex_within_tolerance() {
        let grid = AngleGrid::new(50.0, 90.0, 1.0).unwrap();
        let curve = curve_from_fn(&grid, |x| 1e-4 + (x - 70.4) * (x - 70.4));
        let peaks = peak_search(&curve, 1, Stage::Baseline).unwrap();
        assert!((peaks[0] - 70.4).abs() < 0.2, "got {}", peaks[0]);
    }

    #[test]
    fn tie_breaks_to_smaller_angle() {
        let grid = AngleGrid::new(50.0, 90.0, 1.0).unwrap();
        // Two identical dips at 60 and 80.
        let curve = curve_from_fn(&grid, |x| {
            let d1 = (x - 60.0).abs();
            let d2 = (x - 80.0).abs();
            1.0 + d1.min(d2).min(5.0)
        });
        let peaks = peak_search(&curve, 1, Stage::Baseline).unwrap();
        assert!((peaks[0] - 60.0).abs() < 1e-9, "got {}", peaks[0]);
    }

    #[test]
    fn monotone_curve_yields_insufficient_peaks() {
        let grid = AngleGrid::new(50.0, 90.0, 1.0).unwrap();
        let curve = curve_from_fn(&grid, |x| x);
        match peak_search(&curve, 1, Stage::Circular) {
            Err(DoaError::InsufficientPeaks { stage, needed, found }) => {
                assert_eq!(stage, Stage::Circular);
                assert_eq!(needed, 1);
                assert_eq!(found, 0);
            }
            other => panic!("expected insufficient peaks, got {other:?}"),
        }
    }

    #[test]
    fn deepest_minima_kept_and_sorted_by_angle() {
        let grid = AngleGrid::new(10.0, 170.0, 1.0).unwrap();
        let curve = curve_from_fn(&grid, |x| {
            let dip = |c: f64, depth: f64| depth + (x - c) * (x - c) * 0.01;
            dip(120.0, 0.1).min(dip(40.0, 0.2)).min(dip(90.0, 3.0))
        });
        let peaks = peak_search(&curve, 2, Stage::Baseline).unwrap();
        assert_eq!(peaks.len(), 2);
        assert!((peaks[0] - 40.0).abs() < 0.5);
        assert!((peaks[1] - 120.0).abs() < 0.5);
    }

    #[test]
    fn exact_zero_minimum_stays_on_grid_point() {
        let grid = AngleGrid::new(50.0, 90.0, 1.0).unwrap();
        let curve = curve_from_fn(&grid, |x| if x == 70.0 { 0.0 } else { (x - 70.0).abs() });
        let peaks = peak_search(&curve, 1, Stage::Baseline).unwrap();
        assert_eq!(peaks[0], 70.0);
    }
}
