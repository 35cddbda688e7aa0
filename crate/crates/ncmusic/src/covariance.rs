//! Sample conjugated, unconjugated and extended covariance matrices.
//!
//! All estimators use the `1/N` normalization and are structurally
//! symmetrized after accumulation so downstream decompositions see exactly
//! Hermitian (respectively complex-symmetric) inputs.

use crate::error::{DoaError, Result};
use crate::linalg;
use crate::signal::SnapshotSet;
use crate::{C64, CMatrix};

/// Conjugated (`R`), unconjugated (`R'`) and extended (`R_y`) covariance
/// matrices estimated from the same data (or assembled analytically).
#[derive(Debug, Clone)]
pub struct CovarianceSet {
    conj: CMatrix,
    unconj: CMatrix,
    extended: CMatrix,
    num_snapshots: usize,
}

impl CovarianceSet {
    /// Assemble the set from the two `M x M` blocks; the extended matrix is
    /// `[[R, R'], [R'*, R*]]`. `num_snapshots` is 0 for analytic sets.
    pub fn from_blocks(conj: CMatrix, unconj: CMatrix, num_snapshots: usize) -> Result<Self> {
        let m = conj.nrows();
        if conj.ncols() != m || unconj.nrows() != m || unconj.ncols() != m {
            return Err(DoaError::DimensionMismatch(format!(
                "covariance blocks must be square and equal-sized, got {}x{} and {}x{}",
                conj.nrows(),
                conj.ncols(),
                unconj.nrows(),
                unconj.ncols()
            )));
        }
        let extended = assemble_extended(&conj, &unconj);
        Ok(Self {
            conj,
            unconj,
            extended,
            num_snapshots,
        })
    }

    /// Estimate all three matrices from a snapshot set.
    pub fn from_snapshots(snapshots: &SnapshotSet) -> Result<Self> {
        let x = snapshots.data();
        let conj = sample_covariance(x)?;
        let unconj = sample_unconjugated(x)?;
        let extended = extended_covariance(x)?;

        // The extended estimate must coincide with the block assembly of the
        // two M x M estimates; both are sums of the same outer products.
        let assembled = assemble_extended(&conj, &unconj);
        let defect = (&extended - &assembled).camax();
        assert!(
            defect <= 1e-13,
            "extended covariance deviates from its block assembly by {defect:e}"
        );

        Ok(Self {
            conj,
            unconj,
            extended,
            num_snapshots: x.ncols(),
        })
    }

    /// Conjugated covariance `R`, `M x M` Hermitian.
    pub fn conj(&self) -> &CMatrix {
        &self.conj
    }

    /// Unconjugated covariance `R'`, `M x M` complex-symmetric.
    pub fn unconj(&self) -> &CMatrix {
        &self.unconj
    }

    /// Extended covariance `R_y`, `2M x 2M` Hermitian.
    pub fn extended(&self) -> &CMatrix {
        &self.extended
    }

    /// Sensor count `M`.
    pub fn num_elements(&self) -> usize {
        self.conj.nrows()
    }

    /// Snapshots used for estimation; 0 marks an analytic set.
    pub fn num_snapshots(&self) -> usize {
        self.num_snapshots
    }
}

fn assemble_extended(conj: &CMatrix, unconj: &CMatrix) -> CMatrix {
    let m = conj.nrows();
    let mut ext = CMatrix::zeros(2 * m, 2 * m);
    ext.view_mut((0, 0), (m, m)).copy_from(conj);
    ext.view_mut((0, m), (m, m)).copy_from(unconj);
    ext.view_mut((m, 0), (m, m)).copy_from(&unconj.conjugate());
    ext.view_mut((m, m), (m, m)).copy_from(&conj.conjugate());
    ext
}

fn check_nonempty(x: &CMatrix) -> Result<()> {
    if x.ncols() == 0 || x.nrows() == 0 {
        return Err(DoaError::EmptySnapshots);
    }
    Ok(())
}

/// `(1/N) sum_t x(t) x(t)^H`, Hermitian-symmetrized.
pub fn sample_covariance(x: &CMatrix) -> Result<CMatrix> {
    check_nonempty(x)?;
    let n = x.ncols() as f64;
    let acc = x * x.adjoint() / C64::new(n, 0.0);
    Ok(linalg::hermitian_part(&acc))
}

/// `(1/N) sum_t x(t) x(t)^T`, symmetrized without conjugation.
pub fn sample_unconjugated(x: &CMatrix) -> Result<CMatrix> {
    check_nonempty(x)?;
    let n = x.ncols() as f64;
    let acc = x * x.transpose() / C64::new(n, 0.0);
    Ok(linalg::symmetric_part(&acc))
}

/// `(1/N) sum_t y(t) y(t)^H` for the extended vector `y = [x; x*]`,
/// Hermitian-symmetrized.
pub fn extended_covariance(x: &CMatrix) -> Result<CMatrix> {
    check_nonempty(x)?;
    let m = x.nrows();
    let n = x.ncols();
    let mut y = CMatrix::zeros(2 * m, n);
    y.view_mut((0, 0), (m, n)).copy_from(x);
    y.view_mut((m, 0), (m, n)).copy_from(&x.conjugate());
    let acc = &y * y.adjoint() / C64::new(n as f64, 0.0);
    Ok(linalg::hermitian_part(&acc))
}
