//! Fine-grid brute-force oracles on analytic covariances. These avoid the
//! library's peak refinement entirely: minima are located by scanning the
//! grid, so they independently confirm where each stage's spectrum nulls.

mod common;

use common::*;
use ncmusic::array::steering_vector_deg;
use ncmusic::estimators::{
    build_w11, circular_spectrum, differenced_noise_subspace, extended_noise_subspace,
    hrnc_music, music_spectrum, nc_music_spectrum, nc_noise_subspace, ncm_spectrum,
    recover_ncn_covariances, spatial_differencing, spectrum_ncn, AngleGrid, ClassCounts,
};
use ncmusic::harness::ScenarioConfig;
use ncmusic::signal::{exact_covariances, Scenario, SourceSpec};
use ncmusic::{C64, CMatrix};

fn fig2() -> Scenario {
    ScenarioConfig::builtin("fig2").unwrap().to_scenario(0).unwrap()
}

fn fig1() -> Scenario {
    ScenarioConfig::builtin("fig1").unwrap().to_scenario(0).unwrap()
}

fn fine_grid() -> AngleGrid {
    AngleGrid::with_step(0.01).unwrap()
}

struct Fig2Stages {
    scenario: Scenario,
    q_n1: CMatrix,
    w11: CMatrix,
    ubar_n1: CMatrix,
    ubar_n2: CMatrix,
}

fn fig2_stage_bases() -> Fig2Stages {
    let sc = fig2();
    let cov = exact_covariances(&sc).unwrap();
    let counts = ClassCounts::from_sources(sc.sources()).unwrap();
    let q_n1 = nc_noise_subspace(cov.unconj(), &counts).unwrap();
    let (u_n1, _) = extended_noise_subspace(cov.extended(), &counts).unwrap();
    let w11 = build_w11(&q_n1, &u_n1, &counts).unwrap();
    let a_nc = ncmusic::array::manifold_deg(sc.geometry(), &[35.0, 65.0, 85.0]).unwrap();
    let (r_ncn, rp_ncn) =
        recover_ncn_covariances(cov.unconj(), &a_nc, &counts, &[0.5]).unwrap();
    let diff = spatial_differencing(cov.extended(), &r_ncn, &rp_ncn).unwrap();
    let (ubar_n1, ubar_n2) = differenced_noise_subspace(&diff, &counts).unwrap();
    Fig2Stages {
        scenario: sc,
        q_n1,
        w11,
        ubar_n1,
        ubar_n2,
    }
}

#[test]
fn common_nc_spectrum_minimum_sits_at_the_uqpsk_source() {
    let stages = fig2_stage_bases();
    let curve = spectrum_ncn(stages.scenario.geometry(), &stages.w11, &fine_grid()).unwrap();
    let argmin = grid_argmin(&curve);
    assert!((argmin - 85.0).abs() <= 0.01, "global argmin {argmin}");
    // No null at the maximal-NC DOAs.
    let at_85 = curve.value_near(85.0);
    for d in [35.0, 65.0] {
        assert!(
            curve.value_near(d) >= 10.0 * at_85.max(1e-300),
            "unexpected dip at {d}"
        );
    }
}

#[test]
fn circular_spectrum_minimum_sits_at_the_qpsk_source() {
    let stages = fig2_stage_bases();
    let curve =
        circular_spectrum(stages.scenario.geometry(), &stages.ubar_n1, &fine_grid()).unwrap();
    let argmin = grid_argmin(&curve);
    assert!((argmin - 75.0).abs() <= 0.01, "global argmin {argmin}");
    // The differenced-away common-NC source no longer nulls.
    assert!(curve.value_near(85.0) >= 10.0 * curve.value_near(75.0).max(1e-300));
}

#[test]
fn maximal_nc_spectrum_minima_sit_at_the_bpsk_sources() {
    let stages = fig2_stage_bases();
    let curve = ncm_spectrum(
        stages.scenario.geometry(),
        &stages.ubar_n1,
        &stages.ubar_n2,
        &stages.q_n1,
        &fine_grid(),
    )
    .unwrap();
    for truth in [35.0, 65.0] {
        let local = grid_argmin_near(&curve, truth, 5.0);
        assert!((local - truth).abs() <= 0.01, "argmin near {truth}: {local}");
    }
    // The circular-source null is suppressed by the penalty term.
    assert!(curve.value_near(75.0) >= 10.0 * curve.value_near(35.0).max(1e-300));
}

#[test]
fn extended_steering_of_maximal_sources_annihilates_differenced_noise_space() {
    let stages = fig2_stage_bases();
    let geom = stages.scenario.geometry();
    let m = geom.num_elements();
    let k = stages.ubar_n1.ncols();
    let mut stacked = CMatrix::zeros(2 * m, k);
    stacked.view_mut((0, 0), (m, k)).copy_from(&stages.ubar_n1);
    stacked.view_mut((m, 0), (m, k)).copy_from(&stages.ubar_n2);
    for (doa, phase_deg) in [(35.0, 10.0f64), (65.0, 20.0f64)] {
        let a = steering_vector_deg(geom, doa).unwrap();
        let mut ext = CMatrix::zeros(2 * m, 1);
        ext.view_mut((0, 0), (m, 1)).copy_from(&a);
        let rotated = a.conjugate() * C64::from_polar(1.0, -phase_deg.to_radians());
        ext.view_mut((m, 0), (m, 1)).copy_from(&rotated);
        let residual = (ext.adjoint() * &stacked).norm();
        assert!(residual <= 1e-8, "residual {residual} at {doa}");
    }
}

#[test]
fn fig1_circular_minima_near_both_qpsk_sources() {
    let sc = fig1();
    let cov = exact_covariances(&sc).unwrap();
    let counts = ClassCounts::from_sources(sc.sources()).unwrap();
    let grid = fine_grid();
    let report = hrnc_music(sc.geometry(), &cov, &counts, &[0.5], &grid).unwrap();
    let circ_curve = report
        .curves()
        .iter()
        .find(|c| c.kind() == ncmusic::estimators::SpectrumKind::Circular)
        .expect("circular stage ran");
    for truth in [40.0, 125.0] {
        let local = grid_argmin_near(circ_curve, truth, 4.0);
        assert!((local - truth).abs() <= 0.01, "argmin near {truth}: {local}");
    }
}

#[test]
fn nc_music_baseline_nulls_at_maximal_sources() {
    let sc = fig2();
    let cov = exact_covariances(&sc).unwrap();
    let counts = ClassCounts::from_sources(sc.sources()).unwrap();
    let curve = nc_music_spectrum(sc.geometry(), cov.extended(), &counts, &fine_grid()).unwrap();
    assert!(curve.value_near(35.0) <= 1e-10);
    assert!(curve.value_near(65.0) <= 1e-10);
    for v in curve.values() {
        assert!(*v >= 0.0);
    }
}

#[test]
fn music_minima_at_all_four_sources() {
    let sc = fig2();
    let cov = exact_covariances(&sc).unwrap();
    let curve = music_spectrum(sc.geometry(), cov.conj(), 4, &fine_grid()).unwrap();
    for truth in [35.0, 65.0, 75.0, 85.0] {
        let local = grid_argmin_near(&curve, truth, 4.0);
        assert!((local - truth).abs() <= 0.01, "argmin near {truth}: {local}");
        assert!(curve.value_near(truth) <= 1e-10);
    }
}

#[test]
fn peak_locations_invariant_under_common_power_scaling() {
    let grid = AngleGrid::with_step(0.05).unwrap();
    let base = fig2();
    let counts = ClassCounts::from_sources(base.sources()).unwrap();
    let reference = hrnc_music(
        base.geometry(),
        &exact_covariances(&base).unwrap(),
        &counts,
        &[0.5],
        &grid,
    )
    .unwrap();

    for scale in [0.1, 7.3] {
        let sources: Vec<SourceSpec> = base
            .sources()
            .iter()
            .map(|s| s.with_power(s.power() * scale).unwrap())
            .collect();
        let scaled = Scenario::new(
            *base.geometry(),
            sources,
            base.snr_db(),
            base.num_snapshots(),
            base.seed(),
        )
        .unwrap();
        let report = hrnc_music(
            scaled.geometry(),
            &exact_covariances(&scaled).unwrap(),
            &counts,
            &[0.5],
            &grid,
        )
        .unwrap();
        for (group, ref_group) in [
            (report.ncm(), reference.ncm()),
            (report.ncn(), reference.ncn()),
            (report.circ(), reference.circ()),
        ] {
            for (a, b) in group.iter().zip(ref_group) {
                assert!(
                    (a - b).abs() <= 1e-6,
                    "scale {scale}: peak moved {a} vs {b}"
                );
            }
        }
    }
}
