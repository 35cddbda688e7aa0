//! Shared helpers for the integration suites: random admissible scenarios
//! and brute-force grid oracles that stay independent of the library's peak
//! refinement.

use ncmusic::array::UlaGeometry;
use ncmusic::estimators::SpectrumCurve;
use ncmusic::signal::{Scenario, SourceSpec};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

/// Draw a random scenario with `q <= M - 2`, pairwise DOA separation of at
/// least 5°, and arbitrary class mix (possibly missing classes).
pub fn random_scenario(rng: &mut ChaCha8Rng, noiseless: bool) -> Scenario {
    loop {
        let m = rng.random_range(4..=10usize);
        let q = rng.random_range(1..=(m - 2));
        let mut doas: Vec<f64> = Vec::new();
        let mut guard = 0;
        while doas.len() < q && guard < 1000 {
            let cand = rng.random_range(10.0..170.0);
            if doas.iter().all(|d: &f64| (d - cand).abs() >= 5.0) {
                doas.push(cand);
            }
            guard += 1;
        }
        if doas.len() < q {
            continue;
        }
        let sources: Vec<SourceSpec> = doas
            .iter()
            .map(|&doa| {
                let phase = rng.random_range(0.0..360.0);
                match rng.random_range(0..3u8) {
                    0 => SourceSpec::bpsk(doa, phase).unwrap(),
                    1 => SourceSpec::uqpsk(doa, rng.random_range(0.1..0.9), phase).unwrap(),
                    _ => SourceSpec::qpsk(doa).unwrap(),
                }
            })
            .collect();
        let geometry = UlaGeometry::half_wavelength(m).unwrap();
        let scenario = if noiseless {
            Scenario::noiseless(geometry, sources, 64, rng.random())
        } else {
            Scenario::new(geometry, sources, 10.0, 500, rng.random())
        };
        if let Ok(sc) = scenario {
            return sc;
        }
    }
}

/// Rates of the common-NC sources in canonical (ascending DOA) order.
pub fn common_nc_rates(scenario: &Scenario) -> Vec<f64> {
    scenario
        .sources()
        .iter()
        .filter(|s| s.class() == ncmusic::signal::SignalClass::CommonNc)
        .map(|s| s.nc_rate())
        .collect()
}

/// Brute-force oracle: the grid angle with the smallest spectrum value in
/// `[center - halfwidth, center + halfwidth]`.
pub fn grid_argmin_near(curve: &SpectrumCurve, center: f64, halfwidth: f64) -> f64 {
    curve
        .grid()
        .iter()
        .zip(curve.values())
        .filter(|(t, _)| (**t - center).abs() <= halfwidth)
        .min_by(|a, b| a.1.partial_cmp(b.1).unwrap())
        .map(|(t, _)| *t)
        .expect("window contains grid points")
}

/// Brute-force oracle: global grid argmin.
pub fn grid_argmin(curve: &SpectrumCurve) -> f64 {
    curve
        .grid()
        .iter()
        .zip(curve.values())
        .min_by(|a, b| a.1.partial_cmp(b.1).unwrap())
        .map(|(t, _)| *t)
        .expect("non-empty curve")
}

/// Median of the spectrum values.
pub fn median_value(curve: &SpectrumCurve) -> f64 {
    let mut v: Vec<f64> = curve.values().to_vec();
    v.sort_by(|a, b| a.partial_cmp(b).unwrap());
    v[v.len() / 2]
}

/// Numerical rank by SVD with an absolute singular-value threshold
/// (independent oracle on raw nalgebra).
pub fn svd_rank(matrix: &ncmusic::CMatrix, threshold: f64) -> usize {
    let svd = matrix.clone().svd(false, false);
    svd.singular_values.iter().filter(|&&s| s > threshold).count()
}
