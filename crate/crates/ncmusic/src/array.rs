//! Uniform linear array geometry, steering vectors and manifold matrices.
//!
//! Angles are measured in degrees from the array axis, so the phase ramp of
//! the steering vector is `tau(theta) = 2*pi*spacing*cos(theta)`. This keeps
//! the response injective over the open interval (0°, 180°) for spacings up
//! to half a wavelength.

use serde::{Deserialize, Serialize};

use crate::error::{DoaError, Result};
use crate::{C64, CMatrix, CVector};

/// Element count and spacing (in wavelengths) of a uniform linear array.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct UlaGeometry {
    num_elements: usize,
    spacing: f64,
}

impl UlaGeometry {
    pub const DEFAULT_SPACING: f64 = 0.5;

    /// A ULA with `num_elements` sensors spaced `spacing` wavelengths apart.
    pub fn new(num_elements: usize, spacing: f64) -> Result<Self> {
        if num_elements < 2 {
            return Err(DoaError::InvalidGeometry(format!(
                "need at least 2 elements, got {num_elements}"
            )));
        }
        if !(spacing > 0.0) || !spacing.is_finite() {
            return Err(DoaError::InvalidGeometry(format!(
                "spacing must be positive and finite, got {spacing}"
            )));
        }
        Ok(Self {
            num_elements,
            spacing,
        })
    }

    /// Half-wavelength array with `num_elements` sensors.
    pub fn half_wavelength(num_elements: usize) -> Result<Self> {
        Self::new(num_elements, Self::DEFAULT_SPACING)
    }

    pub fn num_elements(&self) -> usize {
        self.num_elements
    }

    pub fn spacing(&self) -> f64 {
        self.spacing
    }
}

impl<'de> Deserialize<'de> for UlaGeometry {
    fn deserialize<D>(deserializer: D) -> std::result::Result<Self, D::Error>
    where
        D: serde::Deserializer<'de>,
    {
        #[derive(Deserialize)]
        struct Raw {
            num_elements: usize,
            #[serde(default = "default_spacing")]
            spacing: f64,
        }
        fn default_spacing() -> f64 {
            UlaGeometry::DEFAULT_SPACING
        }
        let raw = Raw::deserialize(deserializer)?;
        UlaGeometry::new(raw.num_elements, raw.spacing).map_err(serde::de::Error::custom)
    }
}

/// A direction of arrival, strictly inside (0°, 180°).
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize)]
#[serde(transparent)]
pub struct DoaAngle(f64);

impl DoaAngle {
    pub fn from_degrees(degrees: f64) -> Result<Self> {
        if !degrees.is_finite() || degrees <= 0.0 || degrees >= 180.0 {
            return Err(DoaError::InvalidAngle { degrees });
        }
        Ok(Self(degrees))
    }

    pub fn degrees(&self) -> f64 {
        self.0
    }

    pub fn radians(&self) -> f64 {
        self.0.to_radians()
    }
}

impl<'de> Deserialize<'de> for DoaAngle {
    fn deserialize<D>(deserializer: D) -> std::result::Result<Self, D::Error>
    where
        D: serde::Deserializer<'de>,
    {
        let degrees = f64::deserialize(deserializer)?;
        DoaAngle::from_degrees(degrees).map_err(serde::de::Error::custom)
    }
}

/// Steering vector `a(theta)`: element `m` equals `exp(j*m*tau(theta))`.
pub fn steering_vector(geom: &UlaGeometry, theta: DoaAngle) -> CVector {
    let mut out = vec![C64::new(0.0, 0.0); geom.num_elements()];
    fill_steering(geom, theta.degrees(), &mut out);
    CVector::from_vec(out)
}

/// Fill `out` with the steering vector for a raw angle in degrees. The
/// caller guarantees the angle lies inside (0°, 180°) (grid points are
/// validated at construction).
pub(crate) fn fill_steering(geom: &UlaGeometry, degrees: f64, out: &mut [C64]) {
    debug_assert_eq!(out.len(), geom.num_elements());
    let tau = 2.0 * std::f64::consts::PI * geom.spacing() * degrees.to_radians().cos();
    for (m, slot) in out.iter_mut().enumerate() {
        *slot = C64::from_polar(1.0, m as f64 * tau);
    }
}

/// Steering vector for a raw angle in degrees, validated first.
pub fn steering_vector_deg(geom: &UlaGeometry, degrees: f64) -> Result<CVector> {
    Ok(steering_vector(geom, DoaAngle::from_degrees(degrees)?))
}

/// Manifold matrix: column `i` is the steering vector of `thetas[i]`.
/// Angles must be pairwise distinct, otherwise the manifold is rank
/// deficient.
pub fn manifold(geom: &UlaGeometry, thetas: &[DoaAngle]) -> Result<CMatrix> {
    for (i, a) in thetas.iter().enumerate() {
        for b in thetas.iter().skip(i + 1) {
            if a.degrees() == b.degrees() {
                return Err(DoaError::DuplicateAngles {
                    degrees: a.degrees(),
                });
            }
        }
    }
    let columns: Vec<CVector> = thetas.iter().map(|&t| steering_vector(geom, t)).collect();
    if columns.is_empty() {
        return Err(DoaError::DimensionMismatch(
            "manifold needs at least one angle".into(),
        ));
    }
    Ok(CMatrix::from_columns(&columns))
}

/// Manifold from raw angles in degrees.
pub fn manifold_deg(geom: &UlaGeometry, degrees: &[f64]) -> Result<CMatrix> {
    let thetas: Vec<DoaAngle> = degrees
        .iter()
        .map(|&d| DoaAngle::from_degrees(d))
        .collect::<Result<_>>()?;
    manifold(geom, &thetas)
}
