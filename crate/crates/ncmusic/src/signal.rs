//! Baseband symbol generation with prescribed non-circularity, noisy array
//! snapshot synthesis, and analytic (infinite-snapshot) covariances.
//!
//! The second-order target is `E[s^2] = rate * exp(j*phase) * E[|s|^2]`:
//! BPSK realizes rate 1, QPSK rate 0, and UQPSK any rate strictly between,
//! via an amplitude-unbalanced quadrature pair. The non-circularity phase
//! enters as a global constellation rotation `exp(j*phase/2)`.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::array::{DoaAngle, UlaGeometry, manifold};
use crate::covariance::CovarianceSet;
use crate::error::{DoaError, Result};
use crate::linalg;
use crate::{C64, CMatrix, CVector};

/// Modulation of one emitter; fixes its non-circularity class.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Modulation {
    Bpsk,
    Qpsk,
    Uqpsk,
}

/// Non-circularity class of a source, derived from its modulation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum SignalClass {
    /// Rate exactly 1 (BPSK).
    MaximalNc,
    /// Rate strictly inside (0, 1) (UQPSK).
    CommonNc,
    /// Rate 0 (QPSK).
    Circular,
}

impl Modulation {
    pub fn class(&self) -> SignalClass {
        match self {
            Modulation::Bpsk => SignalClass::MaximalNc,
            Modulation::Uqpsk => SignalClass::CommonNc,
            Modulation::Qpsk => SignalClass::Circular,
        }
    }
}

/// One emitter: true DOA, power, modulation and non-circularity parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SourceSpec {
    #[serde(rename = "doa_deg")]
    doa: DoaAngle,
    power: f64,
    modulation: Modulation,
    nc_rate: f64,
    nc_phase_deg: f64,
}

impl SourceSpec {
    pub fn new(
        doa: DoaAngle,
        power: f64,
        modulation: Modulation,
        nc_rate: f64,
        nc_phase_deg: f64,
    ) -> Result<Self> {
        if !(power > 0.0) || !power.is_finite() {
            return Err(DoaError::InvalidSource(format!(
                "power must be positive and finite, got {power}"
            )));
        }
        if !nc_phase_deg.is_finite() || !(0.0..360.0).contains(&nc_phase_deg) {
            return Err(DoaError::InvalidSource(format!(
                "non-circularity phase must lie in [0°, 360°), got {nc_phase_deg}"
            )));
        }
        match modulation {
            Modulation::Bpsk if nc_rate != 1.0 => {
                return Err(DoaError::InvalidSource(format!(
                    "BPSK forces non-circularity rate 1, got {nc_rate}"
                )));
            }
            Modulation::Qpsk if nc_rate != 0.0 => {
                return Err(DoaError::InvalidSource(format!(
                    "QPSK forces non-circularity rate 0, got {nc_rate}"
                )));
            }
            Modulation::Uqpsk if !(nc_rate > 0.0 && nc_rate < 1.0) => {
                return Err(DoaError::InvalidSource(format!(
                    "UQPSK requires a rate strictly inside (0, 1), got {nc_rate}"
                )));
            }
            _ => {}
        }
        Ok(Self {
            doa,
            power,
            modulation,
            nc_rate,
            nc_phase_deg,
        })
    }

    /// Unit-power BPSK source (rate 1).
    pub fn bpsk(doa_deg: f64, nc_phase_deg: f64) -> Result<Self> {
        Self::new(
            DoaAngle::from_degrees(doa_deg)?,
            1.0,
            Modulation::Bpsk,
            1.0,
            nc_phase_deg,
        )
    }

    /// Unit-power QPSK source (rate 0; the phase is irrelevant).
    pub fn qpsk(doa_deg: f64) -> Result<Self> {
        Self::new(DoaAngle::from_degrees(doa_deg)?, 1.0, Modulation::Qpsk, 0.0, 0.0)
    }

    /// Unit-power UQPSK source with the given rate and phase.
    pub fn uqpsk(doa_deg: f64, nc_rate: f64, nc_phase_deg: f64) -> Result<Self> {
        Self::new(
            DoaAngle::from_degrees(doa_deg)?,
            1.0,
            Modulation::Uqpsk,
            nc_rate,
            nc_phase_deg,
        )
    }

    pub fn with_power(mut self, power: f64) -> Result<Self> {
        if !(power > 0.0) || !power.is_finite() {
            return Err(DoaError::InvalidSource(format!(
                "power must be positive and finite, got {power}"
            )));
        }
        self.power = power;
        Ok(self)
    }

    pub fn doa(&self) -> DoaAngle {
        self.doa
    }

    pub fn power(&self) -> f64 {
        self.power
    }

    pub fn modulation(&self) -> Modulation {
        self.modulation
    }

    pub fn class(&self) -> SignalClass {
        self.modulation.class()
    }

    pub fn nc_rate(&self) -> f64 {
        self.nc_rate
    }

    pub fn nc_phase_deg(&self) -> f64 {
        self.nc_phase_deg
    }

    fn nc_phase_rad(&self) -> f64 {
        self.nc_phase_deg.to_radians()
    }
}

#[derive(Deserialize)]
struct SourceSpecRaw {
    doa_deg: f64,
    modulation: Modulation,
    #[serde(default = "one")]
    power: f64,
    nc_rate: Option<f64>,
    #[serde(default)]
    nc_phase_deg: f64,
}

fn one() -> f64 {
    1.0
}

impl TryFrom<SourceSpecRaw> for SourceSpec {
    type Error = DoaError;

    fn try_from(raw: SourceSpecRaw) -> Result<Self> {
        let rate = match (raw.modulation, raw.nc_rate) {
            (Modulation::Bpsk, None) => 1.0,
            (Modulation::Qpsk, None) => 0.0,
            (Modulation::Uqpsk, None) => {
                return Err(DoaError::InvalidSource(
                    "UQPSK sources must state nc_rate".into(),
                ));
            }
            (_, Some(r)) => r,
        };
        SourceSpec::new(
            DoaAngle::from_degrees(raw.doa_deg)?,
            raw.power,
            raw.modulation,
            rate,
            raw.nc_phase_deg,
        )
    }
}

impl<'de> Deserialize<'de> for SourceSpec {
    fn deserialize<D>(deserializer: D) -> std::result::Result<Self, D::Error>
    where
        D: serde::Deserializer<'de>,
    {
        let raw = SourceSpecRaw::deserialize(deserializer)?;
        SourceSpec::try_from(raw).map_err(serde::de::Error::custom)
    }
}

/// Counter-based derivation of substream seeds from a master seed
/// (splitmix-style mixing). Stable across platforms and releases.
pub fn derive_seed(master: u64, index: u64, role: u64) -> u64 {
    fn mix(mut z: u64) -> u64 {
        z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^ (z >> 31)
    }
    mix(master ^ mix(index.wrapping_add(1)) ^ mix(role.wrapping_mul(0xD1B5_4A32_D192_ED03)))
}

/// Seeded generator for one substream.
pub fn substream_rng(master: u64, index: u64, role: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(derive_seed(master, index, role))
}

const ROLE_SOURCE: u64 = 1;
const ROLE_NOISE: u64 = 2;

/// A simulation scenario: geometry, sources, SNR, snapshot count and seed.
///
/// Sources are stored in canonical order (maximal-NC, then common-NC, then
/// circular; ascending DOA within each class) so that metrics and RNG
/// substreams do not depend on the order sources were listed in.
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    geometry: UlaGeometry,
    sources: Vec<SourceSpec>,
    snr_db: f64,
    noiseless: bool,
    num_snapshots: usize,
    seed: u64,
}

impl Scenario {
    pub fn new(
        geometry: UlaGeometry,
        sources: Vec<SourceSpec>,
        snr_db: f64,
        num_snapshots: usize,
        seed: u64,
    ) -> Result<Self> {
        Self::build(geometry, sources, snr_db, false, num_snapshots, seed)
    }

    /// Scenario with the additive noise disabled (infinite SNR).
    pub fn noiseless(
        geometry: UlaGeometry,
        sources: Vec<SourceSpec>,
        num_snapshots: usize,
        seed: u64,
    ) -> Result<Self> {
        Self::build(geometry, sources, f64::INFINITY, true, num_snapshots, seed)
    }

    pub(crate) fn build(
        geometry: UlaGeometry,
        mut sources: Vec<SourceSpec>,
        snr_db: f64,
        noiseless: bool,
        num_snapshots: usize,
        seed: u64,
    ) -> Result<Self> {
        if sources.is_empty() {
            return Err(DoaError::InvalidScenario("no sources".into()));
        }
        if num_snapshots < 1 {
            return Err(DoaError::InvalidScenario(
                "need at least one snapshot".into(),
            ));
        }
        if !noiseless && !snr_db.is_finite() {
            return Err(DoaError::InvalidScenario(format!(
                "SNR must be finite unless noise is disabled, got {snr_db}"
            )));
        }
        for (i, a) in sources.iter().enumerate() {
            for b in sources.iter().skip(i + 1) {
                if a.doa().degrees() == b.doa().degrees() {
                    return Err(DoaError::InvalidScenario(format!(
                        "two sources share the DOA {}°",
                        a.doa().degrees()
                    )));
                }
            }
        }
        sources.sort_by(|a, b| {
            (a.class(), a.doa().degrees())
                .partial_cmp(&(b.class(), b.doa().degrees()))
                .unwrap()
        });
        Ok(Self {
            geometry,
            sources,
            snr_db,
            noiseless,
            num_snapshots,
            seed,
        })
    }

    pub fn geometry(&self) -> &UlaGeometry {
        &self.geometry
    }

    /// Sources in canonical order.
    pub fn sources(&self) -> &[SourceSpec] {
        &self.sources
    }

    pub fn num_sources(&self) -> usize {
        self.sources.len()
    }

    pub fn snr_db(&self) -> f64 {
        self.snr_db
    }

    pub fn is_noiseless(&self) -> bool {
        self.noiseless
    }

    pub fn num_snapshots(&self) -> usize {
        self.num_snapshots
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Per-sensor noise variance implied by the SNR (unit-power convention).
    pub fn noise_variance(&self) -> f64 {
        if self.noiseless {
            0.0
        } else {
            10f64.powf(-self.snr_db / 10.0)
        }
    }

    /// True DOAs in canonical source order, degrees.
    pub fn doas_deg(&self) -> Vec<f64> {
        self.sources.iter().map(|s| s.doa().degrees()).collect()
    }

    pub fn with_seed(&self, seed: u64) -> Self {
        let mut s = self.clone();
        s.seed = seed;
        s
    }

    pub fn with_snr_db(&self, snr_db: f64) -> Self {
        let mut s = self.clone();
        s.snr_db = snr_db;
        s.noiseless = !snr_db.is_finite();
        s
    }

    pub fn with_num_snapshots(&self, num_snapshots: usize) -> Self {
        let mut s = self.clone();
        s.num_snapshots = num_snapshots;
        s
    }
}

/// One batch of array observations plus the symbol matrix that produced it.
#[derive(Debug, Clone)]
pub struct SnapshotSet {
    data: CMatrix,
    symbols: CMatrix,
    scenario: Scenario,
}

impl SnapshotSet {
    /// Sensor outputs, one column per snapshot (`M x N`).
    pub fn data(&self) -> &CMatrix {
        &self.data
    }

    /// Transmitted symbols, one row per source (`q x N`).
    pub fn symbols(&self) -> &CMatrix {
        &self.symbols
    }

    pub fn scenario(&self) -> &Scenario {
        &self.scenario
    }

    pub fn num_snapshots(&self) -> usize {
        self.data.ncols()
    }
}

/// Draw `n` symbols for one source. The population moments satisfy
/// `E[s s*] = power` and `E[s^2] = rate * exp(j*phase) * power` exactly.
pub fn generate_symbols<R: Rng + ?Sized>(spec: &SourceSpec, n: usize, rng: &mut R) -> CVector {
    let amp = spec.power().sqrt();
    let half_rot = C64::from_polar(1.0, spec.nc_phase_rad() / 2.0);
    match spec.modulation() {
        Modulation::Bpsk => CVector::from_iterator(
            n,
            (0..n).map(|_| {
                let b = if rng.random::<bool>() { 1.0 } else { -1.0 };
                half_rot * (amp * b)
            }),
        ),
        Modulation::Qpsk => CVector::from_iterator(
            n,
            (0..n).map(|_| {
                let k: u8 = rng.random_range(0..4);
                C64::from_polar(
                    amp,
                    std::f64::consts::FRAC_PI_2 * k as f64 + std::f64::consts::FRAC_PI_4,
                )
            }),
        ),
        Modulation::Uqpsk => {
            // In-phase/quadrature amplitudes solve alpha^2 + gamma^2 = 1 and
            // alpha^2 - gamma^2 = rate.
            let alpha = ((1.0 + spec.nc_rate()) / 2.0).sqrt();
            let gamma = ((1.0 - spec.nc_rate()) / 2.0).sqrt();
            CVector::from_iterator(
                n,
                (0..n).map(|_| {
                    let i = if rng.random::<bool>() { 1.0 } else { -1.0 };
                    let q = if rng.random::<bool>() { 1.0 } else { -1.0 };
                    half_rot * (C64::new(alpha * i, gamma * q) * amp)
                }),
            )
        }
    }
}

/// Synthesize `x(t) = A s(t) + n(t)` for the whole scenario. Deterministic
/// for a fixed seed: every source and the noise draw from independent
/// substreams derived from the scenario seed.
pub fn synthesize_snapshots(scenario: &Scenario) -> Result<SnapshotSet> {
    let m = scenario.geometry().num_elements();
    let q = scenario.num_sources();
    let n = scenario.num_snapshots();
    if q > m {
        return Err(DoaError::InvalidScenario(format!(
            "{q} sources exceed the {m}-element array"
        )));
    }

    let doas: Vec<DoaAngle> = scenario.sources().iter().map(|s| s.doa()).collect();
    let a = manifold(scenario.geometry(), &doas)?;

    let mut symbols = CMatrix::zeros(q, n);
    for (i, spec) in scenario.sources().iter().enumerate() {
        let mut rng = substream_rng(scenario.seed(), i as u64, ROLE_SOURCE);
        let row = generate_symbols(spec, n, &mut rng);
        symbols.row_mut(i).tr_copy_from(&row);
    }

    let mut data = &a * &symbols;
    let sigma2 = scenario.noise_variance();
    if sigma2 > 0.0 {
        let comp_std = (sigma2 / 2.0).sqrt();
        let mut rng = substream_rng(scenario.seed(), 0, ROLE_NOISE);
        for t in 0..n {
            for s in 0..m {
                let re: f64 = StandardNormal.sample(&mut rng);
                let im: f64 = StandardNormal.sample(&mut rng);
                data[(s, t)] += C64::new(re * comp_std, im * comp_std);
            }
        }
    }

    Ok(SnapshotSet {
        data,
        symbols,
        scenario: scenario.clone(),
    })
}

/// Analytic covariances from an explicit manifold and per-source moments.
/// This is the infinite-snapshot limit used as an oracle throughout testing.
pub fn exact_covariances_from_manifold(
    a: &CMatrix,
    powers: &[f64],
    nc_rates: &[f64],
    nc_phases_rad: &[f64],
    noise_variance: f64,
) -> Result<CovarianceSet> {
    let q = a.ncols();
    if powers.len() != q || nc_rates.len() != q || nc_phases_rad.len() != q {
        return Err(DoaError::DimensionMismatch(format!(
            "manifold has {q} columns but got {} powers, {} rates, {} phases",
            powers.len(),
            nc_rates.len(),
            nc_phases_rad.len()
        )));
    }
    let m = a.nrows();
    let mut signal_cov = CMatrix::zeros(q, q);
    let mut unconj_signal_cov = CMatrix::zeros(q, q);
    for i in 0..q {
        signal_cov[(i, i)] = C64::new(powers[i], 0.0);
        unconj_signal_cov[(i, i)] = C64::from_polar(nc_rates[i] * powers[i], nc_phases_rad[i]);
    }
    let mut conj = a * &signal_cov * a.adjoint();
    for i in 0..m {
        conj[(i, i)] += C64::new(noise_variance, 0.0);
    }
    let conj = linalg::hermitian_part(&conj);
    let unconj = linalg::symmetric_part(&(a * &unconj_signal_cov * a.transpose()));
    CovarianceSet::from_blocks(conj, unconj, 0)
}

/// Analytic covariances of a scenario: conjugated, unconjugated and extended.
pub fn exact_covariances(scenario: &Scenario) -> Result<CovarianceSet> {
    let doas: Vec<DoaAngle> = scenario.sources().iter().map(|s| s.doa()).collect();
    let a = manifold(scenario.geometry(), &doas)?;
    let powers: Vec<f64> = scenario.sources().iter().map(|s| s.power()).collect();
    let rates: Vec<f64> = scenario.sources().iter().map(|s| s.nc_rate()).collect();
    let phases: Vec<f64> = scenario.sources().iter().map(|s| s.nc_phase_rad()).collect();
    exact_covariances_from_manifold(&a, &powers, &rates, &phases, scenario.noise_variance())
}
