//! The full three-stage pipeline: preliminary non-circular estimation,
//! common-NC refinement, covariance recovery and spatial differencing,
//! then the circular and maximal-NC stages. Also the one-shot baseline
//! runners.

use super::peaks::peak_search;
use super::spectrum::{
    AngleGrid, SpectrumCurve, circular_spectrum, music_spectrum, nc_music_spectrum, ncm_spectrum,
    spectrum_nc, spectrum_ncn,
};
use super::subspace::{
    build_w11, differenced_noise_subspace, extended_noise_subspace, nc_noise_subspace,
    recover_ncn_covariances, spatial_differencing,
};
use super::ClassCounts;
use crate::array::{UlaGeometry, manifold_deg};
use crate::covariance::CovarianceSet;
use crate::error::{DoaError, Result, Stage};
use crate::linalg;
use crate::CMatrix;

const ORTHONORMALITY_TOL: f64 = 1e-9;

/// The subspace bases constructed while running the pipeline. Stages that
/// were skipped (zero class count) leave their entries empty. Split bases
/// are stored stacked (`2M x k`); the halves are exposed through accessors.
#[derive(Debug, Clone)]
pub struct SubspaceBundle {
    num_elements: usize,
    counts: ClassCounts,
    q_n1: Option<CMatrix>,
    extended_noise: Option<CMatrix>,
    w11: Option<CMatrix>,
    differenced_noise: Option<CMatrix>,
}

impl SubspaceBundle {
    fn new(num_elements: usize, counts: ClassCounts) -> Self {
        Self {
            num_elements,
            counts,
            q_n1: None,
            extended_noise: None,
            w11: None,
            differenced_noise: None,
        }
    }

    fn set_q_n1(&mut self, q_n1: CMatrix) {
        let m = self.num_elements;
        assert_eq!(
            (q_n1.nrows(), q_n1.ncols()),
            (m, m - self.counts.num_nc()),
            "preliminary noise basis has the wrong shape"
        );
        assert!(linalg::orthonormality_defect(&q_n1) <= ORTHONORMALITY_TOL);
        self.q_n1 = Some(q_n1);
    }

    fn set_extended(&mut self, top: &CMatrix, bottom: &CMatrix) {
        let m = self.num_elements;
        let cols = 2 * m - self.counts.extended_signal_dim();
        assert_eq!((top.nrows(), top.ncols()), (m, cols));
        assert_eq!((bottom.nrows(), bottom.ncols()), (m, cols));
        let stacked = stack_rows(top, bottom);
        assert!(linalg::orthonormality_defect(&stacked) <= ORTHONORMALITY_TOL);
        self.extended_noise = Some(stacked);
    }

    fn set_w11(&mut self, w11: CMatrix) {
        let m = self.num_elements;
        assert_eq!(w11.nrows(), m);
        assert_eq!(w11.ncols() as i64, self.counts.w_dim(m));
        assert!(linalg::orthonormality_defect(&w11) <= ORTHONORMALITY_TOL);
        self.w11 = Some(w11);
    }

    fn set_differenced(&mut self, top: &CMatrix, bottom: &CMatrix) {
        let m = self.num_elements;
        let cols = 2 * m - self.counts.differenced_signal_dim();
        assert_eq!((top.nrows(), top.ncols()), (m, cols));
        assert_eq!((bottom.nrows(), bottom.ncols()), (m, cols));
        let stacked = stack_rows(top, bottom);
        assert!(linalg::orthonormality_defect(&stacked) <= ORTHONORMALITY_TOL);
        self.differenced_noise = Some(stacked);
    }

    pub fn counts(&self) -> &ClassCounts {
        &self.counts
    }

    pub fn num_elements(&self) -> usize {
        self.num_elements
    }

    /// Preliminary noise basis `Q_N1` (`M x (M - q_ncm - q_ncn)`).
    pub fn q_n1(&self) -> Option<&CMatrix> {
        self.q_n1.as_ref()
    }

    /// Stacked noise basis of the extended covariance (`2M x k`).
    pub fn extended_noise(&self) -> Option<&CMatrix> {
        self.extended_noise.as_ref()
    }

    /// Top half `U_N1` of the extended noise basis.
    pub fn u_n1(&self) -> Option<CMatrix> {
        self.extended_noise
            .as_ref()
            .map(|u| u.rows(0, self.num_elements).into_owned())
    }

    /// Bottom half `U_N2` of the extended noise basis.
    pub fn u_n2(&self) -> Option<CMatrix> {
        self.extended_noise
            .as_ref()
            .map(|u| u.rows(self.num_elements, self.num_elements).into_owned())
    }

    /// Combined common-NC basis `W_11` (`M x w`).
    pub fn w11(&self) -> Option<&CMatrix> {
        self.w11.as_ref()
    }

    /// Stacked noise basis of the differenced matrix (`2M x k`).
    pub fn differenced_noise(&self) -> Option<&CMatrix> {
        self.differenced_noise.as_ref()
    }

    /// Top half of the differenced noise basis.
    pub fn ubar_n1(&self) -> Option<CMatrix> {
        self.differenced_noise
            .as_ref()
            .map(|u| u.rows(0, self.num_elements).into_owned())
    }

    /// Bottom half of the differenced noise basis.
    pub fn ubar_n2(&self) -> Option<CMatrix> {
        self.differenced_noise
            .as_ref()
            .map(|u| u.rows(self.num_elements, self.num_elements).into_owned())
    }
}

fn stack_rows(top: &CMatrix, bottom: &CMatrix) -> CMatrix {
    let m = top.nrows();
    let k = top.ncols();
    let mut out = CMatrix::zeros(2 * m, k);
    out.view_mut((0, 0), (m, k)).copy_from(top);
    out.view_mut((m, 0), (m, k)).copy_from(bottom);
    out
}

/// Estimated DOAs grouped by signal class, with the spectra that produced
/// them and the subspace bases for inspection.
#[derive(Debug, Clone)]
pub struct DoaReport {
    ncm: Vec<f64>,
    ncn: Vec<f64>,
    circ: Vec<f64>,
    preliminary_nc: Vec<f64>,
    curves: Vec<SpectrumCurve>,
    subspaces: SubspaceBundle,
}

impl DoaReport {
    /// Maximal-NC DOA estimates, degrees, ascending.
    pub fn ncm(&self) -> &[f64] {
        &self.ncm
    }

    /// Common-NC DOA estimates, degrees, ascending.
    pub fn ncn(&self) -> &[f64] {
        &self.ncn
    }

    /// Circular DOA estimates, degrees, ascending.
    pub fn circ(&self) -> &[f64] {
        &self.circ
    }

    /// Stage-one coarse estimates of all non-circular DOAs.
    pub fn preliminary_nc(&self) -> &[f64] {
        &self.preliminary_nc
    }

    pub fn curves(&self) -> &[SpectrumCurve] {
        &self.curves
    }

    pub fn subspaces(&self) -> &SubspaceBundle {
        &self.subspaces
    }
}

/// Run the full three-stage estimator on a covariance set.
///
/// `p_ncn` holds the a-priori non-circularity rates of the common-NC
/// sources, ascending by true DOA (the refined estimates are matched to
/// them in sorted order). Stages whose class count is zero are skipped.
pub fn hrnc_music(
    geom: &UlaGeometry,
    cov: &CovarianceSet,
    counts: &ClassCounts,
    p_ncn: &[f64],
    grid: &AngleGrid,
) -> Result<DoaReport> {
    let m = geom.num_elements();
    if cov.num_elements() != m {
        return Err(DoaError::DimensionMismatch(format!(
            "covariances are {}x{} but the array has {m} elements",
            cov.num_elements(),
            cov.num_elements()
        )));
    }
    if p_ncn.len() != counts.q_ncn() {
        return Err(DoaError::DimensionMismatch(format!(
            "expected {} common-NC rates, got {}",
            counts.q_ncn(),
            p_ncn.len()
        )));
    }

    let mut bundle = SubspaceBundle::new(m, *counts);
    let mut curves = Vec::new();

    // Stage 1: preliminary non-circular DOAs from the unconjugated
    // covariance.
    let mut preliminary = Vec::new();
    if counts.num_nc() > 0 {
        let q_n1 = nc_noise_subspace(cov.unconj(), counts)?;
        let curve = spectrum_nc(geom, &q_n1, grid)?;
        preliminary = peak_search(&curve, counts.num_nc(), Stage::PreliminaryNc)?;
        curves.push(curve);
        bundle.set_q_n1(q_n1);
    }

    // Stage 2: refine the common-NC DOAs on the combined basis.
    let mut ncn = Vec::new();
    if counts.q_ncn() > 0 {
        let (u_n1, u_n2) = extended_noise_subspace(cov.extended(), counts)?;
        let q_n1 = bundle.q_n1().expect("stage 1 ran");
        let w11 = build_w11(q_n1, &u_n1, counts)?;
        let curve = spectrum_ncn(geom, &w11, grid)?;
        ncn = peak_search(&curve, counts.q_ncn(), Stage::CommonNc)?;
        curves.push(curve);
        bundle.set_extended(&u_n1, &u_n2);
        bundle.set_w11(w11);
    }

    // Stage 3: each refined common-NC DOA consumes its nearest preliminary
    // peak; the survivors are the coarse maximal-NC estimates.
    let ncm_coarse = classify_preliminary(&preliminary, &ncn);
    debug_assert_eq!(ncm_coarse.len(), counts.q_ncm());

    // Stage 4: reconstruct the common-NC covariance contribution and
    // difference it out of the extended covariance.
    let r_diff = if counts.q_ncn() > 0 {
        let mut nc_doas = ncm_coarse.clone();
        nc_doas.extend_from_slice(&ncn);
        let a_hat_nc = manifold_deg(geom, &nc_doas)?;
        let (r_ncn, r_prime_ncn) =
            recover_ncn_covariances(cov.unconj(), &a_hat_nc, counts, p_ncn)?;
        spatial_differencing(cov.extended(), &r_ncn, &r_prime_ncn)?
    } else {
        cov.extended().clone()
    };

    // Stages 5 and 6 share the noise split of the differenced matrix.
    let mut circ = Vec::new();
    let mut ncm = Vec::new();
    if counts.q_c() > 0 || counts.q_ncm() > 0 {
        let (ubar_n1, ubar_n2) = differenced_noise_subspace(&r_diff, counts)?;

        if counts.q_c() > 0 {
            let curve = circular_spectrum(geom, &ubar_n1, grid)?;
            circ = peak_search(&curve, counts.q_c(), Stage::Circular)?;
            curves.push(curve);
        }

        if counts.q_ncm() > 0 {
            let q_n1 = bundle.q_n1().expect("stage 1 ran");
            let curve = ncm_spectrum(geom, &ubar_n1, &ubar_n2, q_n1, grid)?;
            ncm = peak_search(&curve, counts.q_ncm(), Stage::MaximalNc)?;
            curves.push(curve);
        }

        bundle.set_differenced(&ubar_n1, &ubar_n2);
    }

    Ok(DoaReport {
        ncm,
        ncn,
        circ,
        preliminary_nc: preliminary,
        curves,
        subspaces: bundle,
    })
}

/// Greedy nearest-match consumption: every refined common-NC estimate
/// removes one preliminary peak; the remainder are returned sorted.
/// Ties resolve towards the smaller preliminary angle, then the smaller
/// refined angle.
fn classify_preliminary(preliminary: &[f64], ncn_refined: &[f64]) -> Vec<f64> {
    let mut pairs: Vec<(f64, f64, usize, usize)> = Vec::new();
    for (j, &r) in ncn_refined.iter().enumerate() {
        for (i, &p) in preliminary.iter().enumerate() {
            pairs.push(((p - r).abs(), p, i, j));
        }
    }
    pairs.sort_by(|a, b| {
        (a.0, a.1, ncn_refined[a.3])
            .partial_cmp(&(b.0, b.1, ncn_refined[b.3]))
            .unwrap()
    });

    let mut prelim_used = vec![false; preliminary.len()];
    let mut refined_used = vec![false; ncn_refined.len()];
    for (_, _, i, j) in pairs {
        if !prelim_used[i] && !refined_used[j] {
            prelim_used[i] = true;
            refined_used[j] = true;
        }
    }
    let mut survivors: Vec<f64> = preliminary
        .iter()
        .zip(prelim_used.iter())
        .filter(|(_, &used)| !used)
        .map(|(&p, _)| p)
        .collect();
    survivors.sort_by(|a, b| a.partial_cmp(b).unwrap());
    survivors
}

/// MUSIC baseline: spectrum plus the `q` deepest minima.
pub fn music_doas(
    geom: &UlaGeometry,
    r: &CMatrix,
    q: usize,
    grid: &AngleGrid,
) -> Result<(Vec<f64>, SpectrumCurve)> {
    let curve = music_spectrum(geom, r, q, grid)?;
    let doas = peak_search(&curve, q, Stage::Baseline)?;
    Ok((doas, curve))
}

/// NC-MUSIC baseline on the extended covariance: spectrum plus the `q`
/// deepest minima.
pub fn nc_music_doas(
    geom: &UlaGeometry,
    r_y: &CMatrix,
    counts: &ClassCounts,
    grid: &AngleGrid,
) -> Result<(Vec<f64>, SpectrumCurve)> {
    let curve = nc_music_spectrum(geom, r_y, counts, grid)?;
    let doas = peak_search(&curve, counts.total(), Stage::Baseline)?;
    Ok((doas, curve))
}
