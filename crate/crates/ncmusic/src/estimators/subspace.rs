//! Noise-subspace extraction, the combined common-NC basis, covariance
//! recovery via the manifold pseudo-inverse, and spatial differencing.

use super::ClassCounts;
use crate::error::{DoaError, Result};
use crate::linalg;
use crate::{C64, CMatrix};

const PINV_REL_CUTOFF: f64 = 1e-10;
const MANIFOLD_SV_THRESHOLD: f64 = 1e-8;

fn expect_square(m: &CMatrix, what: &str) -> Result<usize> {
    if m.nrows() != m.ncols() {
        return Err(DoaError::DimensionMismatch(format!(
            "{what} must be square, got {}x{}",
            m.nrows(),
            m.ncols()
        )));
    }
    Ok(m.nrows())
}

/// Noise subspace `Q_N1` of the non-circular sources: the left singular
/// vectors of `R' R'^H` associated with its `M - q_ncm - q_ncn` smallest
/// singular values.
pub fn nc_noise_subspace(r_prime: &CMatrix, counts: &ClassCounts) -> Result<CMatrix> {
    let m = expect_square(r_prime, "unconjugated covariance")?;
    if counts.num_nc() == 0 {
        return Err(DoaError::DegenerateCounts(
            "no non-circular sources: the preliminary stage does not apply".into(),
        ));
    }
    counts.check_preliminary_rank(m)?;
    // R' R'^H is Hermitian positive semidefinite, so its eigenvectors are
    // its left singular vectors.
    let squared = r_prime * r_prime.adjoint();
    Ok(linalg::smallest_eigenvectors(&squared, m - counts.num_nc()))
}

/// Eigenvectors of the `k` smallest eigenvalues of a Hermitian `2M x 2M`
/// matrix, split row-wise into top and bottom `M x k` halves.
fn noise_split(matrix: &CMatrix, signal_dim: usize, what: &str) -> Result<(CMatrix, CMatrix)> {
    let two_m = expect_square(matrix, what)?;
    if two_m % 2 != 0 {
        return Err(DoaError::DimensionMismatch(format!(
            "{what} must have even dimension, got {two_m}"
        )));
    }
    let m = two_m / 2;
    if signal_dim >= two_m {
        return Err(DoaError::EmptyNoiseSubspace(format!(
            "signal dimension {signal_dim} leaves no noise directions in a {two_m}-dimensional space"
        )));
    }
    let noise_dim = two_m - signal_dim;
    let basis = linalg::smallest_eigenvectors(matrix, noise_dim);
    let top = basis.rows(0, m).into_owned();
    let bottom = basis.rows(m, m).into_owned();
    Ok((top, bottom))
}

/// Noise subspace of the extended covariance `R_y`, split into `U_N1` (top
/// `M` rows) and `U_N2` (bottom `M` rows). The signal space has dimension
/// `q_ncm + 2 q_ncn + 2 q_c`.
pub fn extended_noise_subspace(r_y: &CMatrix, counts: &ClassCounts) -> Result<(CMatrix, CMatrix)> {
    noise_split(r_y, counts.extended_signal_dim(), "extended covariance")
}

/// Noise subspace of the differenced matrix, split like
/// [`extended_noise_subspace`]; after differencing, the signal space shrinks
/// to `q_ncm + 2 q_c`.
pub fn differenced_noise_subspace(
    r_diff: &CMatrix,
    counts: &ClassCounts,
) -> Result<(CMatrix, CMatrix)> {
    noise_split(r_diff, counts.differenced_signal_dim(), "differenced matrix")
}

/// Combined basis for the common-NC stage: the `w` dominant left singular
/// vectors of `W = [Q_N1, U_N1]` with
/// `w = min{3M - 2q_ncm - 3q_ncn - 2q_c, M - q_ncn}`.
pub fn build_w11(q_n1: &CMatrix, u_n1: &CMatrix, counts: &ClassCounts) -> Result<CMatrix> {
    if counts.q_ncn() == 0 {
        return Err(DoaError::DegenerateCounts(
            "no common-NC sources: the refinement stage does not apply".into(),
        ));
    }
    let m = q_n1.nrows();
    if u_n1.nrows() != m {
        return Err(DoaError::DimensionMismatch(format!(
            "row mismatch: Q_N1 has {m} rows, U_N1 has {}",
            u_n1.nrows()
        )));
    }
    if q_n1.ncols() != m - counts.num_nc() {
        return Err(DoaError::DimensionMismatch(format!(
            "Q_N1 must have {} columns, got {}",
            m - counts.num_nc(),
            q_n1.ncols()
        )));
    }
    let expected_u_cols = 2 * m - counts.extended_signal_dim();
    if u_n1.ncols() != expected_u_cols {
        return Err(DoaError::DimensionMismatch(format!(
            "U_N1 must have {expected_u_cols} columns, got {}",
            u_n1.ncols()
        )));
    }

    let total_cols = q_n1.ncols() + u_n1.ncols();
    debug_assert_eq!(total_cols as i64, counts.combined_w_cols(m));
    let w_dim = counts.w_dim(m);
    if w_dim < 1 {
        return Err(DoaError::EmptyNoiseSubspace(
            "combined common-NC basis is empty".into(),
        ));
    }

    let mut w = CMatrix::zeros(m, total_cols);
    w.view_mut((0, 0), (m, q_n1.ncols())).copy_from(q_n1);
    w.view_mut((0, q_n1.ncols()), (m, u_n1.ncols()))
        .copy_from(u_n1);
    Ok(linalg::largest_left_singular_vectors(&w, w_dim as usize))
}

/// Recover the conjugated and unconjugated covariance contributions of the
/// common-NC sources from the estimated non-circular manifold.
///
/// `a_hat_nc` stacks the coarse maximal-NC steering vectors (first `q_ncm`
/// columns) and the refined common-NC ones (last `q_ncn` columns); `p_ncn`
/// holds the a-priori non-circularity rates aligned with those last columns.
pub fn recover_ncn_covariances(
    r_prime: &CMatrix,
    a_hat_nc: &CMatrix,
    counts: &ClassCounts,
    p_ncn: &[f64],
) -> Result<(CMatrix, CMatrix)> {
    let m = expect_square(r_prime, "unconjugated covariance")?;
    if a_hat_nc.nrows() != m {
        return Err(DoaError::DimensionMismatch(format!(
            "manifold rows {} do not match covariance dimension {m}",
            a_hat_nc.nrows()
        )));
    }
    if a_hat_nc.ncols() != counts.num_nc() {
        return Err(DoaError::DimensionMismatch(format!(
            "manifold must have {} columns (q_ncm + q_ncn), got {}",
            counts.num_nc(),
            a_hat_nc.ncols()
        )));
    }
    if p_ncn.len() != counts.q_ncn() {
        return Err(DoaError::DimensionMismatch(format!(
            "expected {} non-circularity rates, got {}",
            counts.q_ncn(),
            p_ncn.len()
        )));
    }
    for &rate in p_ncn {
        if !(rate > 0.0 && rate < 1.0) {
            return Err(DoaError::InvalidSource(format!(
                "common-NC rates must lie strictly inside (0, 1), got {rate}"
            )));
        }
    }
    let sigma_min = linalg::smallest_singular_value(a_hat_nc);
    if sigma_min <= MANIFOLD_SV_THRESHOLD {
        return Err(DoaError::SingularManifold {
            sigma_min,
            threshold: MANIFOLD_SV_THRESHOLD,
        });
    }

    // pinv(A) R' pinv(A^T) recovers the diagonal middle factor of
    // R' = A P B R_S A^T; its lower-right q_ncn block is the unconjugated
    // signal covariance of the common-NC sources.
    let a_pinv = linalg::pseudo_inverse(a_hat_nc, PINV_REL_CUTOFF);
    let at_pinv = linalg::pseudo_inverse(&a_hat_nc.transpose(), PINV_REL_CUTOFF);
    let middle = &a_pinv * r_prime * &at_pinv;
    let q_ncn = counts.q_ncn();
    let r4 = middle
        .view((counts.q_ncm(), counts.q_ncm()), (q_ncn, q_ncn))
        .into_owned();

    // Per-source powers from the known rates: |(P^-1 R_4)_ii|.
    let mut power_diag = CMatrix::zeros(q_ncn, q_ncn);
    for i in 0..q_ncn {
        power_diag[(i, i)] = C64::new(r4[(i, i)].norm() / p_ncn[i], 0.0);
    }

    let a_ncn = a_hat_nc.columns(counts.q_ncm(), q_ncn).into_owned();
    let r_ncn = linalg::hermitian_part(&(&a_ncn * &power_diag * a_ncn.adjoint()));
    let r_prime_ncn = &a_ncn * &r4 * a_ncn.transpose();
    Ok((r_ncn, r_prime_ncn))
}

/// Subtract the reconstructed common-NC contribution from the extended
/// covariance: `R_y - [[R_ncn, R'_ncn], [R'_ncn*, R_ncn*]]`,
/// Hermitian-symmetrized.
pub fn spatial_differencing(
    r_y: &CMatrix,
    r_ncn: &CMatrix,
    r_prime_ncn: &CMatrix,
) -> Result<CMatrix> {
    let two_m = expect_square(r_y, "extended covariance")?;
    let m = two_m / 2;
    if two_m % 2 != 0 || r_ncn.nrows() != m || r_ncn.ncols() != m || r_prime_ncn.nrows() != m
        || r_prime_ncn.ncols() != m
    {
        return Err(DoaError::DimensionMismatch(format!(
            "differencing blocks must be {m}x{m} against a {two_m}x{two_m} extended covariance"
        )));
    }
    let mut reconstructed = CMatrix::zeros(two_m, two_m);
    reconstructed.view_mut((0, 0), (m, m)).copy_from(r_ncn);
    reconstructed
        .view_mut((0, m), (m, m))
        .copy_from(r_prime_ncn);
    reconstructed
        .view_mut((m, 0), (m, m))
        .copy_from(&r_prime_ncn.conjugate());
    reconstructed
        .view_mut((m, m), (m, m))
        .copy_from(&r_ncn.conjugate());
    Ok(linalg::hermitian_part(&(r_y - reconstructed)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::array::{UlaGeometry, manifold_deg, steering_vector_deg};
    use crate::signal::{Scenario, SourceSpec, exact_covariances};
    use approx::assert_relative_eq;

    fn fig2_exact() -> (UlaGeometry, crate::covariance::CovarianceSet, ClassCounts) {
        let geom = UlaGeometry::half_wavelength(6).unwrap();
        let sc = Scenario::new(
            geom,
            vec![
                SourceSpec::bpsk(35.0, 10.0).unwrap(),
                SourceSpec::bpsk(65.0, 20.0).unwrap(),
                SourceSpec::qpsk(75.0).unwrap(),
                SourceSpec::uqpsk(85.0, 0.5, 40.0).unwrap(),
            ],
            10.0,
            500,
            0,
        )
        .unwrap();
        let cov = exact_covariances(&sc).unwrap();
        let counts = ClassCounts::from_sources(sc.sources()).unwrap();
        (geom, cov, counts)
    }

    #[test]
    fn single_bpsk_noise_space_is_orthogonal_complement() {
        let geom = UlaGeometry::half_wavelength(5).unwrap();
        let sc = Scenario::noiseless(
            geom,
            vec![SourceSpec::bpsk(50.0, 30.0).unwrap()],
            8,
            0,
        )
        .unwrap();
        let cov = exact_covariances(&sc).unwrap();
        let counts = ClassCounts::new(1, 0, 0).unwrap();
        let q_n1 = nc_noise_subspace(cov.unconj(), &counts).unwrap();
        assert_eq!((q_n1.nrows(), q_n1.ncols()), (5, 4));
        let a = steering_vector_deg(&geom, 50.0).unwrap();
        assert!((a.adjoint() * &q_n1).norm() <= 1e-10);
        assert!(crate::linalg::orthonormality_defect(&q_n1) <= 1e-10);
    }

    #[test]
    fn fig2_preliminary_noise_space_nulls_all_nc_sources() {
        let (geom, cov, counts) = fig2_exact();
        let q_n1 = nc_noise_subspace(cov.unconj(), &counts).unwrap();
        assert_eq!((q_n1.nrows(), q_n1.ncols()), (6, 3));
        for deg in [35.0, 65.0, 85.0] {
            let a = steering_vector_deg(&geom, deg).unwrap();
            assert!((a.adjoint() * &q_n1).norm() <= 1e-8, "null fails at {deg}");
        }
    }

    #[test]
    fn all_circular_counts_rejected_by_preliminary_stage() {
        let counts = ClassCounts::new(0, 0, 2).unwrap();
        let r = CMatrix::zeros(4, 4);
        assert!(matches!(
            nc_noise_subspace(&r, &counts),
            Err(DoaError::DegenerateCounts(_))
        ));
    }

    #[test]
    fn extended_noise_split_scalar_bpsk() {
        // M = 1, single BPSK with zero phase: R_y = [[1,1],[1,1]] + sigma^2 I,
        // noise eigenvector proportional to [1, -1]/sqrt(2).
        let a = CMatrix::from_element(1, 1, C64::new(1.0, 0.0));
        let cov =
            crate::signal::exact_covariances_from_manifold(&a, &[1.0], &[1.0], &[0.0], 0.01)
                .unwrap();
        let counts = ClassCounts::new(1, 0, 0).unwrap();
        let (u_n1, u_n2) = extended_noise_subspace(cov.extended(), &counts).unwrap();
        assert_eq!((u_n1.nrows(), u_n1.ncols()), (1, 1));
        let inv_sqrt2 = 1.0 / 2f64.sqrt();
        assert_relative_eq!(u_n1[(0, 0)].norm(), inv_sqrt2, epsilon = 1e-12);
        // Opposite signs across the split.
        let ratio = u_n2[(0, 0)] / u_n1[(0, 0)];
        assert_relative_eq!(ratio.re, -1.0, epsilon = 1e-12);
        assert!(ratio.im.abs() < 1e-12);
    }

    #[test]
    fn fig2_extended_noise_dimension_and_eigen_gap() {
        let (_, cov, counts) = fig2_exact();
        assert_eq!(counts.extended_signal_dim(), 6);
        let (u_n1, u_n2) = extended_noise_subspace(cov.extended(), &counts).unwrap();
        assert_eq!((u_n1.nrows(), u_n1.ncols()), (6, 6));
        assert_eq!((u_n2.nrows(), u_n2.ncols()), (6, 6));
        // Analytic EVD oracle: all noise eigenvalues equal sigma^2 and the
        // signal eigenvalues sit clearly above.
        let sigma2 = 10f64.powf(-1.0);
        let (vals, _) = {
            let sym = crate::linalg::hermitian_part(cov.extended());
            let eig = sym.symmetric_eigen();
            let mut v: Vec<f64> = eig.eigenvalues.iter().cloned().collect();
            v.sort_by(|x, y| x.partial_cmp(y).unwrap());
            (v, ())
        };
        for &v in &vals[..6] {
            assert!((v - sigma2).abs() <= 1e-9, "noise eigenvalue {v}");
        }
        assert!(vals[6] >= sigma2 + 0.1, "signal eigenvalue gap {}", vals[6]);
    }

    #[test]
    fn noise_split_requires_room() {
        let counts = ClassCounts::new(1, 1, 1).unwrap();
        // 2M = 4 but the signal dimension is 5: no noise directions left.
        let r = CMatrix::identity(4, 4);
        assert!(matches!(
            extended_noise_subspace(&r, &counts),
            Err(DoaError::EmptyNoiseSubspace(_))
        ));
    }

    #[test]
    fn w11_dimensions_and_common_nc_orthogonality() {
        let (geom, cov, counts) = fig2_exact();
        let q_n1 = nc_noise_subspace(cov.unconj(), &counts).unwrap();
        let (u_n1, _) = extended_noise_subspace(cov.extended(), &counts).unwrap();
        let w11 = build_w11(&q_n1, &u_n1, &counts).unwrap();
        assert_eq!((w11.nrows(), w11.ncols()), (6, 5));
        assert!(crate::linalg::orthonormality_defect(&w11) <= 1e-10);
        let a = steering_vector_deg(&geom, 85.0).unwrap();
        assert!((a.adjoint() * &w11).norm() <= 1e-8);
    }

    #[test]
    fn w11_rejected_without_common_nc_sources() {
        let counts = ClassCounts::new(2, 0, 1).unwrap();
        let q_n1 = CMatrix::zeros(6, 4);
        let u_n1 = CMatrix::zeros(6, 8);
        assert!(matches!(
            build_w11(&q_n1, &u_n1, &counts),
            Err(DoaError::DegenerateCounts(_))
        ));
    }

    #[test]
    fn recover_ncn_exact_covariances() {
        // With the exact manifold and exact R', the recovered UQPSK power is
        // 1 and the recovered unconjugated moment is 0.5 e^{j40°}.
        let (geom, cov, counts) = fig2_exact();
        let a_hat = manifold_deg(&geom, &[35.0, 65.0, 85.0]).unwrap();
        let (r_ncn, r_prime_ncn) =
            recover_ncn_covariances(cov.unconj(), &a_hat, &counts, &[0.5]).unwrap();
        let a85 = steering_vector_deg(&geom, 85.0).unwrap();
        let expected_conj = (&a85 * a85.adjoint()) * C64::new(1.0, 0.0);
        assert!((&r_ncn - expected_conj).camax() <= 1e-8);
        let expected_unconj =
            (&a85 * a85.transpose()) * C64::from_polar(0.5, 40f64.to_radians());
        assert!((&r_prime_ncn - expected_unconj).camax() <= 1e-8);
    }

    #[test]
    fn recover_single_ncn_without_maximal_sources() {
        let geom = UlaGeometry::half_wavelength(5).unwrap();
        let sc = Scenario::new(
            geom,
            vec![SourceSpec::uqpsk(70.0, 0.3, 25.0).unwrap()],
            10.0,
            8,
            0,
        )
        .unwrap();
        let cov = exact_covariances(&sc).unwrap();
        let counts = ClassCounts::new(0, 1, 0).unwrap();
        let a_hat = manifold_deg(&geom, &[70.0]).unwrap();
        let (r_ncn, _) = recover_ncn_covariances(cov.unconj(), &a_hat, &counts, &[0.3]).unwrap();
        let a = steering_vector_deg(&geom, 70.0).unwrap();
        assert!((&r_ncn - &a * a.adjoint()).camax() <= 1e-8);
    }

    #[test]
    fn recover_rejects_singular_manifold() {
        let geom = UlaGeometry::half_wavelength(5).unwrap();
        let counts = ClassCounts::new(1, 1, 0).unwrap();
        let a = steering_vector_deg(&geom, 40.0).unwrap();
        let a_hat = CMatrix::from_columns(&[a.column(0), a.column(0)]);
        let r = CMatrix::zeros(5, 5);
        assert!(matches!(
            recover_ncn_covariances(&r, &a_hat, &counts, &[0.5]),
            Err(DoaError::SingularManifold { .. })
        ));
    }

    #[test]
    fn recover_rejects_out_of_range_rates() {
        let geom = UlaGeometry::half_wavelength(5).unwrap();
        let counts = ClassCounts::new(0, 1, 0).unwrap();
        let a_hat = manifold_deg(&geom, &[70.0]).unwrap();
        let r = CMatrix::zeros(5, 5);
        for bad in [0.0, 1.0, -0.5] {
            assert!(recover_ncn_covariances(&r, &a_hat, &counts, &[bad]).is_err());
        }
    }

    #[test]
    fn differencing_with_zero_blocks_is_identity() {
        let (_, cov, _) = fig2_exact();
        let zero = CMatrix::zeros(6, 6);
        let diff = spatial_differencing(cov.extended(), &zero, &zero).unwrap();
        assert!((diff - cov.extended()).camax() <= 1e-15);
    }

    #[test]
    fn differencing_removes_common_nc_contribution() {
        let (geom, cov, counts) = fig2_exact();
        let a_hat = manifold_deg(&geom, &[35.0, 65.0, 85.0]).unwrap();
        let (r_ncn, r_prime_ncn) =
            recover_ncn_covariances(cov.unconj(), &a_hat, &counts, &[0.5]).unwrap();
        let diff = spatial_differencing(cov.extended(), &r_ncn, &r_prime_ncn).unwrap();

        // With exact inputs the differenced matrix equals the extended
        // covariance of the same scenario without the common-NC source.
        let remaining = Scenario::new(
            geom,
            vec![
                SourceSpec::bpsk(35.0, 10.0).unwrap(),
                SourceSpec::bpsk(65.0, 20.0).unwrap(),
                SourceSpec::qpsk(75.0).unwrap(),
            ],
            10.0,
            500,
            0,
        )
        .unwrap();
        let cov_remaining = exact_covariances(&remaining).unwrap();
        assert!((&diff - cov_remaining.extended()).camax() <= 1e-6);

        // Rank oracle: the remaining signal space has dimension
        // q_ncm + 2 q_c = 4.
        let sigma2 = 10f64.powf(-1.0);
        let centered = &diff - CMatrix::identity(12, 12) * C64::new(sigma2, 0.0);
        let rank = crate::linalg::rank_with_threshold(&centered, 1e-8);
        assert_eq!(rank, 4);
    }
}
