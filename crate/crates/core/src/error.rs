use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid {field}: {reason}")]
    InvalidSpec { field: &'static str, reason: String },

    #[error("probe beam ({beam_m} m along {axis}) exceeds the crystal ({crystal_m} m)")]
    BeamOverfill {
        axis: &'static str,
        beam_m: f64,
        crystal_m: f64,
    },

    #[error("hole edges cross at x = {x_m} m (left {left_hz} Hz >= right {right_hz} Hz)")]
    EdgeCrossing {
        x_m: f64,
        left_hz: f64,
        right_hz: f64,
    },

    #[error("zero detuning: the probe is resonant with the ion")]
    ZeroDetuning,

    #[error("hole edge reaches the probe carrier at x = {x_m} m (edge at {edge_hz} Hz)")]
    EdgeTouchesCarrier { x_m: f64, edge_hz: f64 },

    #[error("quadrature did not reach tolerance: estimate {estimate}, error {error_estimate} after {intervals} intervals")]
    QuadratureFailure {
        estimate: f64,
        error_estimate: f64,
        intervals: usize,
    },

    #[error("|g*gradB| = {zeeman_slope_hz_per_m} Hz/m and k*Xburn = {smear_slope_hz_per_m} Hz/m are degenerate")]
    GradientSmearDegenerate {
        zeeman_slope_hz_per_m: f64,
        smear_slope_hz_per_m: f64,
    },

    #[error("logarithm argument {argument} out of domain in the closed form")]
    LogDomain { argument: f64 },

    #[error("trajectory not periodic by t_end: residual {residual} > tolerance {tolerance}")]
    NonConvergent { residual: f64, tolerance: f64 },

    #[error("line {line}: key `{key}`: {reason}")]
    Parse {
        line: usize,
        key: String,
        reason: String,
    },

    #[error("config validation failed: {0}")]
    Validation(String),

    #[error("unknown parameter `{0}`")]
    UnknownParameter(String),

    #[error("i/o: {0}")]
    Io(String),
}

/// Coarse classification used for process exit codes and FFI status codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorKind {
    Config,
    Physics,
    Numerical,
    Io,
}

impl Error {
    pub fn kind(&self) -> ErrorKind {
        match self {
            Error::Parse { .. }
            | Error::Validation(_)
            | Error::UnknownParameter(_)
            | Error::InvalidSpec { .. } => ErrorKind::Config,
            Error::BeamOverfill { .. }
            | Error::EdgeCrossing { .. }
            | Error::ZeroDetuning
            | Error::EdgeTouchesCarrier { .. }
            | Error::GradientSmearDegenerate { .. }
            | Error::LogDomain { .. } => ErrorKind::Physics,
            Error::QuadratureFailure { .. } | Error::NonConvergent { .. } => ErrorKind::Numerical,
            Error::Io(_) => ErrorKind::Io,
        }
    }

    /// Process exit code: 2 config, 3 physics domain, 4 numerical, 1 otherwise.
    pub fn exit_code(&self) -> i32 {
        match self.kind() {
            ErrorKind::Config => 2,
            ErrorKind::Physics => 3,
            ErrorKind::Numerical => 4,
            ErrorKind::Io => 1,
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Io(e.to_string())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exit_codes_follow_kind() {
        assert_eq!(Error::Validation("x".into()).exit_code(), 2);
        assert_eq!(Error::ZeroDetuning.exit_code(), 3);
        assert_eq!(
            Error::NonConvergent {
                residual: 1.0,
                tolerance: 0.1
            }
            .exit_code(),
            4
        );
    }
}
