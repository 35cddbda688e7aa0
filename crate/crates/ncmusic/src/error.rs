use thiserror::Error;

/// Pipeline stage labels attached to estimation errors.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stage {
    /// Preliminary non-circular stage on the unconjugated covariance.
    PreliminaryNc,
    /// Common non-circular refinement stage.
    CommonNc,
    /// Circular stage after spatial differencing.
    Circular,
    /// Final maximal non-circular stage.
    MaximalNc,
    /// MUSIC / NC-MUSIC baseline peak search.
    Baseline,
}

impl std::fmt::Display for Stage {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            Stage::PreliminaryNc => "preliminary-nc",
            Stage::CommonNc => "common-nc",
            Stage::Circular => "circular",
            Stage::MaximalNc => "maximal-nc",
            Stage::Baseline => "baseline",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Error)]
pub enum DoaError {
    #[error("invalid array geometry: {0}")]
    InvalidGeometry(String),

    #[error("angle {degrees}° outside the open interval (0°, 180°)")]
    InvalidAngle { degrees: f64 },

    #[error("invalid source specification: {0}")]
    InvalidSource(String),

    #[error("invalid scenario: {0}")]
    InvalidScenario(String),

    #[error("duplicate steering angles: {degrees}° appears more than once")]
    DuplicateAngles { degrees: f64 },

    #[error("snapshot set is empty")]
    EmptySnapshots,

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("degenerate class counts: {0}")]
    DegenerateCounts(String),

    #[error("noise subspace is empty: {0}")]
    EmptyNoiseSubspace(String),

    #[error("singular manifold: smallest singular value {sigma_min:.3e} below {threshold:.3e}")]
    SingularManifold { sigma_min: f64, threshold: f64 },

    #[error("{stage} stage: found {found} local minima, needed {needed}")]
    InsufficientPeaks {
        stage: Stage,
        needed: usize,
        found: usize,
    },

    #[error("configuration error: {0}")]
    Config(String),

    #[error("I/O error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

impl DoaError {
    /// Process exit code mandated for this error class: 2 for configuration
    /// errors, 3 for I/O errors.
    pub fn exit_code(&self) -> i32 {
        match self {
            DoaError::Io { .. } => 3,
            _ => 2,
        }
    }
}

pub type Result<T> = std::result::Result<T, DoaError>;
