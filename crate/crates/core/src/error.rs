use thiserror::Error;

/// Errors raised anywhere in the simulation pipeline.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("invalid {field}: {message}")]
    InvalidParameter {
        field: &'static str,
        message: String,
    },

    #[error(
        "wavelength {wavelength_nm:.3} nm outside tabulated range [{min_nm:.3}, {max_nm:.3}] nm"
    )]
    SpectralRange {
        wavelength_nm: f64,
        min_nm: f64,
        max_nm: f64,
    },

    #[error("undoped fiber has no cross section")]
    Undoped,

    #[error("mode approximation invalid at this wavelength (V = {v_number:.4} <= 0.8)")]
    ModeApproximation { v_number: f64 },

    #[error("configuration error: {0}")]
    Configuration(String),

    #[error("integration diverged at z = {z:.6} m (channel {channel})")]
    Divergence { z: f64, channel: usize },

    #[error(
        "step-halving check failed: relative change {relative_change:.3e} exceeds {tolerance:.1e}"
    )]
    Accuracy {
        relative_change: f64,
        tolerance: f64,
    },

    #[error("bidirectional relaxation did not converge after {iterations} iterations (residual {residual:.3e})")]
    NotConverged { iterations: usize, residual: f64 },

    #[error("at {variable} = {value}: {source}")]
    SweepPoint {
        variable: &'static str,
        value: f64,
        #[source]
        source: Box<Error>,
    },

    #[error("slope fit needs at least 4 points in window [{window_min:.4}, {window_max:.4}], found {found}")]
    Fit {
        found: usize,
        window_min: f64,
        window_max: f64,
    },

    #[error("measured ratio {ratio:.6} outside achievable range [{min:.6}, {max:.6}]")]
    RatioOutOfRange { ratio: f64, min: f64, max: f64 },

    #[error("power ratio is not strictly monotone in pairing near k = {k:.3}; inversion refused")]
    ModelDegeneracy { k: f64 },

    #[error(
        "signal output is not unimodal over the length bracket; local maxima near {maxima:?} m"
    )]
    NotUnimodal { maxima: Vec<f64> },
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn invalid(field: &'static str, message: impl Into<String>) -> Self {
        Error::InvalidParameter {
            field,
            message: message.into(),
        }
    }

    pub(crate) fn at_point(self, variable: &'static str, value: f64) -> Self {
        Error::SweepPoint {
            variable,
            value,
            source: Box::new(self),
        }
    }
}
