//! Angle grids and pseudo-spectrum evaluation. Every spectrum stores the
//! denominator `f(theta)`; estimated DOAs are its minima.

use super::subspace::extended_noise_subspace;
use super::ClassCounts;
use crate::array::{UlaGeometry, fill_steering};
use crate::error::{DoaError, Result};
use crate::linalg;
use crate::{C64, CMatrix};

/// Uniformly spaced search grid strictly inside (0°, 180°).
#[derive(Debug, Clone, PartialEq)]
pub struct AngleGrid {
    points: Vec<f64>,
    step: f64,
}

impl AngleGrid {
    pub const DEFAULT_START: f64 = 0.5;
    pub const DEFAULT_STOP: f64 = 179.5;
    pub const DEFAULT_STEP: f64 = 0.05;

    pub fn new(start_deg: f64, stop_deg: f64, step_deg: f64) -> Result<Self> {
        if !(start_deg > 0.0 && stop_deg < 180.0 && start_deg < stop_deg) {
            return Err(DoaError::Config(format!(
                "grid must satisfy 0 < start < stop < 180, got [{start_deg}, {stop_deg}]"
            )));
        }
        if !(step_deg > 0.0) || !step_deg.is_finite() {
            return Err(DoaError::Config(format!(
                "grid step must be positive, got {step_deg}"
            )));
        }
        let n = ((stop_deg - start_deg) / step_deg + 0.5).floor() as usize + 1;
        if n < 3 {
            return Err(DoaError::Config(format!(
                "grid needs at least 3 points, got {n}"
            )));
        }
        let points = (0..n).map(|k| start_deg + k as f64 * step_deg).collect();
        Ok(Self {
            points,
            step: step_deg,
        })
    }

    /// The default search grid with a custom step.
    pub fn with_step(step_deg: f64) -> Result<Self> {
        Self::new(Self::DEFAULT_START, Self::DEFAULT_STOP, step_deg)
    }

    pub fn points(&self) -> &[f64] {
        &self.points
    }

    pub fn step(&self) -> f64 {
        self.step
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

impl Default for AngleGrid {
    fn default() -> Self {
        Self::with_step(Self::DEFAULT_STEP).expect("default grid is valid")
    }
}

/// Which pseudo-spectrum a curve belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SpectrumKind {
    NcPreliminary,
    Ncn,
    Circular,
    Ncm,
    Music,
    NcMusic,
}

impl SpectrumKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            SpectrumKind::NcPreliminary => "nc_preliminary",
            SpectrumKind::Ncn => "ncn",
            SpectrumKind::Circular => "circular",
            SpectrumKind::Ncm => "ncm",
            SpectrumKind::Music => "music",
            SpectrumKind::NcMusic => "nc_music",
        }
    }
}

impl std::fmt::Display for SpectrumKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Sampled pseudo-spectrum denominator over an angle grid.
#[derive(Debug, Clone)]
pub struct SpectrumCurve {
    kind: SpectrumKind,
    grid: Vec<f64>,
    values: Vec<f64>,
}

impl SpectrumCurve {
    fn new(kind: SpectrumKind, grid: Vec<f64>, values: Vec<f64>) -> Self {
        debug_assert_eq!(grid.len(), values.len());
        Self { kind, grid, values }
    }

    #[cfg(test)]
    pub(crate) fn for_tests(kind: SpectrumKind, grid: Vec<f64>, values: Vec<f64>) -> Self {
        Self::new(kind, grid, values)
    }

    pub fn kind(&self) -> SpectrumKind {
        self.kind
    }

    /// Grid angles in degrees, strictly increasing.
    pub fn grid(&self) -> &[f64] {
        &self.grid
    }

    /// Nonnegative spectrum values, one per grid angle.
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.grid.len()
    }

    pub fn is_empty(&self) -> bool {
        self.grid.is_empty()
    }

    /// Value at the grid point closest to `deg`.
    pub fn value_near(&self, deg: f64) -> f64 {
        let idx = self
            .grid
            .iter()
            .enumerate()
            .min_by(|(_, a), (_, b)| {
                (**a - deg).abs().partial_cmp(&(**b - deg).abs()).unwrap()
            })
            .map(|(i, _)| i)
            .expect("non-empty grid");
        self.values[idx]
    }
}

fn check_rows(geom: &UlaGeometry, basis: &CMatrix, what: &str) -> Result<()> {
    if basis.nrows() != geom.num_elements() {
        return Err(DoaError::DimensionMismatch(format!(
            "{what} has {} rows but the array has {} elements",
            basis.nrows(),
            geom.num_elements()
        )));
    }
    Ok(())
}

/// `f(theta) = a^H B B^H a = ||B^H a||^2` sampled over the grid.
fn projection_spectrum(
    geom: &UlaGeometry,
    basis: &CMatrix,
    grid: &AngleGrid,
    kind: SpectrumKind,
) -> Result<SpectrumCurve> {
    check_rows(geom, basis, "subspace basis")?;
    if basis.ncols() == 0 {
        return Err(DoaError::EmptyNoiseSubspace(format!(
            "cannot evaluate the {kind} spectrum on an empty basis"
        )));
    }
    let m = geom.num_elements();
    let mut steer = vec![C64::new(0.0, 0.0); m];
    let mut values = Vec::with_capacity(grid.len());
    for &deg in grid.points() {
        fill_steering(geom, deg, &mut steer);
        let mut acc = 0.0;
        for j in 0..basis.ncols() {
            let mut s = C64::new(0.0, 0.0);
            for (i, &a_i) in steer.iter().enumerate() {
                s += basis[(i, j)].conj() * a_i;
            }
            acc += s.norm_sqr();
        }
        values.push(acc.max(0.0));
    }
    Ok(SpectrumCurve::new(kind, grid.points().to_vec(), values))
}

/// `f = ||U1^H a||^2 (+ ||Q^H a||^2) - |a^T U2 U1^H a|`, clamped at zero.
fn widely_linear_spectrum(
    geom: &UlaGeometry,
    u_n1: &CMatrix,
    u_n2: &CMatrix,
    q_n1: Option<&CMatrix>,
    grid: &AngleGrid,
    kind: SpectrumKind,
) -> Result<SpectrumCurve> {
    check_rows(geom, u_n1, "split noise basis (top)")?;
    check_rows(geom, u_n2, "split noise basis (bottom)")?;
    if u_n1.ncols() != u_n2.ncols() {
        return Err(DoaError::DimensionMismatch(format!(
            "split noise bases disagree: {} vs {} columns",
            u_n1.ncols(),
            u_n2.ncols()
        )));
    }
    if let Some(q) = q_n1 {
        check_rows(geom, q, "preliminary noise basis")?;
    }
    let m = geom.num_elements();
    let k = u_n1.ncols();
    let mut steer = vec![C64::new(0.0, 0.0); m];
    let mut values = Vec::with_capacity(grid.len());
    for &deg in grid.points() {
        fill_steering(geom, deg, &mut steer);
        let mut norm_u = 0.0;
        let mut cross = C64::new(0.0, 0.0);
        for j in 0..k {
            let mut u = C64::new(0.0, 0.0);
            let mut w = C64::new(0.0, 0.0);
            for (i, &a_i) in steer.iter().enumerate() {
                u += u_n1[(i, j)].conj() * a_i;
                w += u_n2[(i, j)] * a_i;
            }
            norm_u += u.norm_sqr();
            cross += w * u;
        }
        let mut f = norm_u - cross.norm();
        if let Some(q) = q_n1 {
            for j in 0..q.ncols() {
                let mut s = C64::new(0.0, 0.0);
                for (i, &a_i) in steer.iter().enumerate() {
                    s += q[(i, j)].conj() * a_i;
                }
                f += s.norm_sqr();
            }
        }
        values.push(f.max(0.0));
    }
    Ok(SpectrumCurve::new(kind, grid.points().to_vec(), values))
}

/// Preliminary non-circular spectrum on `Q_N1` (nulls at maximal- and
/// common-NC DOAs).
pub fn spectrum_nc(
    geom: &UlaGeometry,
    q_n1: &CMatrix,
    grid: &AngleGrid,
) -> Result<SpectrumCurve> {
    projection_spectrum(geom, q_n1, grid, SpectrumKind::NcPreliminary)
}

/// Common-NC spectrum on the combined basis `W_11` (nulls at common-NC DOAs
/// only).
pub fn spectrum_ncn(
    geom: &UlaGeometry,
    w11: &CMatrix,
    grid: &AngleGrid,
) -> Result<SpectrumCurve> {
    projection_spectrum(geom, w11, grid, SpectrumKind::Ncn)
}

/// Circular spectrum on the top half of the differenced noise space.
pub fn circular_spectrum(
    geom: &UlaGeometry,
    ubar_n1: &CMatrix,
    grid: &AngleGrid,
) -> Result<SpectrumCurve> {
    projection_spectrum(geom, ubar_n1, grid, SpectrumKind::Circular)
}

/// Maximal-NC spectrum on the differenced noise split, with the `Q_N1`
/// penalty that suppresses circular nulls.
pub fn ncm_spectrum(
    geom: &UlaGeometry,
    ubar_n1: &CMatrix,
    ubar_n2: &CMatrix,
    q_n1: &CMatrix,
    grid: &AngleGrid,
) -> Result<SpectrumCurve> {
    widely_linear_spectrum(geom, ubar_n1, ubar_n2, Some(q_n1), grid, SpectrumKind::Ncm)
}

/// Classical MUSIC on the conjugated covariance with `q` sources.
pub fn music_spectrum(
    geom: &UlaGeometry,
    r: &CMatrix,
    q: usize,
    grid: &AngleGrid,
) -> Result<SpectrumCurve> {
    let m = r.nrows();
    if r.ncols() != m {
        return Err(DoaError::DimensionMismatch(format!(
            "covariance must be square, got {}x{}",
            r.nrows(),
            r.ncols()
        )));
    }
    if q + 1 > m {
        return Err(DoaError::DegenerateCounts(format!(
            "MUSIC needs q <= M - 1, got q = {q} on an {m}-element array"
        )));
    }
    let noise = linalg::smallest_eigenvectors(r, m - q);
    projection_spectrum(geom, &noise, grid, SpectrumKind::Music)
}

/// NC-MUSIC baseline: the widely linear spectrum on the noise split of
/// `R_y` itself, without differencing or the circular penalty.
pub fn nc_music_spectrum(
    geom: &UlaGeometry,
    r_y: &CMatrix,
    counts: &ClassCounts,
    grid: &AngleGrid,
) -> Result<SpectrumCurve> {
    let (u_n1, u_n2) = extended_noise_subspace(r_y, counts)?;
    widely_linear_spectrum(geom, &u_n1, &u_n2, None, grid, SpectrumKind::NcMusic)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::array::steering_vector_deg;
    use crate::estimators::nc_noise_subspace;
    use crate::signal::{Scenario, SourceSpec, exact_covariances};

    fn geom6() -> UlaGeometry {
        UlaGeometry::half_wavelength(6).unwrap()
    }

    #[test]
    fn grid_construction_and_bounds() {
        let g = AngleGrid::default();
        assert_eq!(g.len(), 3581);
        assert_eq!(g.points()[0], 0.5);
        assert!((g.points()[g.len() - 1] - 179.5).abs() < 1e-9);
        assert!(AngleGrid::new(0.0, 90.0, 1.0).is_err());
        assert!(AngleGrid::new(10.0, 180.0, 1.0).is_err());
        assert!(AngleGrid::new(10.0, 20.0, -1.0).is_err());
        assert!(AngleGrid::new(10.0, 10.5, 1.0).is_err());
    }

    #[test]
    fn complete_basis_spectrum_equals_element_count() {
        // With a full orthonormal basis the projection recovers ||a||^2 = M.
        let geom = geom6();
        let basis = CMatrix::identity(6, 6);
        let grid = AngleGrid::new(10.0, 170.0, 5.0).unwrap();
        let curve = spectrum_nc(&geom, &basis, &grid).unwrap();
        for &v in curve.values() {
            assert!((v - 6.0).abs() < 1e-10);
        }
    }

    #[test]
    fn preliminary_spectrum_nulls_at_nc_sources_only() {
        let geom = geom6();
        let sc = Scenario::new(
            geom,
            vec![
                SourceSpec::bpsk(35.0, 10.0).unwrap(),
                SourceSpec::qpsk(75.0).unwrap(),
            ],
            10.0,
            100,
            0,
        )
        .unwrap();
        let cov = exact_covariances(&sc).unwrap();
        let counts = ClassCounts::from_sources(sc.sources()).unwrap();
        let q_n1 = nc_noise_subspace(cov.unconj(), &counts).unwrap();
        let grid = AngleGrid::with_step(0.05).unwrap();
        let curve = spectrum_nc(&geom, &q_n1, &grid).unwrap();
        assert!(curve.value_near(35.0) <= 1e-10);
        assert!(curve.value_near(75.0) >= 0.1);
    }

    #[test]
    fn music_spectrum_guards_source_count() {
        let geom = geom6();
        let r = CMatrix::identity(6, 6);
        let grid = AngleGrid::with_step(1.0).unwrap();
        assert!(music_spectrum(&geom, &r, 6, &grid).is_err());
        assert!(music_spectrum(&geom, &r, 5, &grid).is_ok());
    }

    #[test]
    fn music_nulls_single_source_at_truth() {
        let geom = geom6();
        let sc = Scenario::new(geom, vec![SourceSpec::qpsk(90.0).unwrap()], 10.0, 64, 0).unwrap();
        let cov = exact_covariances(&sc).unwrap();
        let grid = AngleGrid::with_step(0.5).unwrap();
        let curve = music_spectrum(&geom, cov.conj(), 1, &grid).unwrap();
        assert!(curve.value_near(90.0) <= 1e-10);
    }

    #[test]
    fn nc_music_values_nonnegative_and_null_at_maximal_sources() {
        let geom = geom6();
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
        let grid = AngleGrid::with_step(0.05).unwrap();
        let curve = nc_music_spectrum(&geom, cov.extended(), &counts, &grid).unwrap();
        for &v in curve.values() {
            assert!(v >= 0.0);
        }
        assert!(curve.value_near(35.0) <= 1e-10);
        assert!(curve.value_near(65.0) <= 1e-10);
    }

    #[test]
    fn empty_basis_rejected() {
        let geom = geom6();
        let grid = AngleGrid::with_step(1.0).unwrap();
        let empty = CMatrix::zeros(6, 0);
        assert!(spectrum_ncn(&geom, &empty, &grid).is_err());
    }
}
