//! Subspace constructions and pseudo-spectra for the three-stage estimator
//! (preliminary non-circular, common-NC refinement, spatial differencing,
//! circular and maximal-NC stages) plus the MUSIC and NC-MUSIC baselines.

mod peaks;
mod pipeline;
mod spectrum;
mod subspace;

pub use peaks::peak_search;
pub use pipeline::{DoaReport, SubspaceBundle, hrnc_music, music_doas, nc_music_doas};
pub use spectrum::{
    AngleGrid, SpectrumCurve, SpectrumKind, circular_spectrum, music_spectrum, nc_music_spectrum,
    ncm_spectrum, spectrum_nc, spectrum_ncn,
};
pub use subspace::{
    build_w11, differenced_noise_subspace, extended_noise_subspace, nc_noise_subspace,
    recover_ncn_covariances, spatial_differencing,
};

use crate::error::{DoaError, Result};
use crate::signal::{SignalClass, SourceSpec};

/// Numbers of maximal-NC, common-NC and circular sources.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ClassCounts {
    q_ncm: usize,
    q_ncn: usize,
    q_c: usize,
}

impl ClassCounts {
    pub fn new(q_ncm: usize, q_ncn: usize, q_c: usize) -> Result<Self> {
        if q_ncm + q_ncn + q_c == 0 {
            return Err(DoaError::DegenerateCounts(
                "at least one source is required".into(),
            ));
        }
        Ok(Self { q_ncm, q_ncn, q_c })
    }

    pub fn from_sources(sources: &[SourceSpec]) -> Result<Self> {
        let mut counts = [0usize; 3];
        for s in sources {
            match s.class() {
                SignalClass::MaximalNc => counts[0] += 1,
                SignalClass::CommonNc => counts[1] += 1,
                SignalClass::Circular => counts[2] += 1,
            }
        }
        Self::new(counts[0], counts[1], counts[2])
    }

    pub fn q_ncm(&self) -> usize {
        self.q_ncm
    }

    pub fn q_ncn(&self) -> usize {
        self.q_ncn
    }

    pub fn q_c(&self) -> usize {
        self.q_c
    }

    /// Total source count `q`.
    pub fn total(&self) -> usize {
        self.q_ncm + self.q_ncn + self.q_c
    }

    /// Number of non-circular sources, the rank of the unconjugated
    /// covariance.
    pub fn num_nc(&self) -> usize {
        self.q_ncm + self.q_ncn
    }

    /// Signal-space dimension of the extended covariance: every maximal-NC
    /// source occupies rank 1 in extended space, every common-NC and circular
    /// source rank 2.
    pub fn extended_signal_dim(&self) -> usize {
        self.q_ncm + 2 * self.q_ncn + 2 * self.q_c
    }

    /// Signal-space dimension after the common-NC contribution has been
    /// differenced away.
    pub fn differenced_signal_dim(&self) -> usize {
        self.q_ncm + 2 * self.q_c
    }

    /// Column count of the combined matrix `[Q_N1, U_N1]` for an `m`-element
    /// array.
    pub fn combined_w_cols(&self, m: usize) -> i64 {
        3 * m as i64 - 2 * self.q_ncm as i64 - 3 * self.q_ncn as i64 - 2 * self.q_c as i64
    }

    /// Retained column count `w = min{3M - 2q_ncm - 3q_ncn - 2q_c, M - q_ncn}`.
    pub fn w_dim(&self, m: usize) -> i64 {
        self.combined_w_cols(m).min(m as i64 - self.q_ncn as i64)
    }

    /// Rank condition for the preliminary stage: the non-circular sources
    /// must leave at least one noise direction in the unconjugated
    /// covariance.
    pub fn check_preliminary_rank(&self, m: usize) -> Result<()> {
        if self.num_nc() + 1 > m {
            return Err(DoaError::DegenerateCounts(format!(
                "{} non-circular sources saturate the {m}-element array (need q_ncm + q_ncn <= M - 1)",
                self.num_nc()
            )));
        }
        Ok(())
    }
}
