use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension error: {0}")]
    Dimension(String),

    #[error("unsupported number of modes: expected {expected}, got {got}")]
    UnsupportedModes { expected: usize, got: usize },

    #[error("unphysical covariance: {0}")]
    Physicality(String),

    #[error("invalid parameter `{name}`: {reason}")]
    Parameter { name: &'static str, reason: String },

    #[error("generator is not self-adjoint: {0}")]
    NonSelfAdjoint(String),

    #[error("unsupported generator: {0}")]
    UnsupportedGenerator(String),

    #[error("time grid too coarse: h*rate = {ratio:.3e} exceeds {limit}")]
    StepTooCoarse { ratio: f64, limit: f64 },

    #[error("invalid time grid: {0}")]
    Grid(String),

    #[error("integration diverged after t = {last_valid_time:e} s")]
    Divergence { last_valid_time: f64 },

    #[error("drift is not Hurwitz: eigenvalue {re:e} {im:+e}i has non-negative real part")]
    Unstable { re: f64, im: f64 },

    #[error("covariance is not in the rotated frame: |V12| = {0:e}")]
    FrameNotRotated(f64),

    #[error("singular linear system: {0}")]
    Singular(String),
}

impl Error {
    /// True for failures caused by the numerics rather than by the inputs' shape.
    pub fn is_numeric(&self) -> bool {
        matches!(
            self,
            Error::Divergence { .. } | Error::Unstable { .. } | Error::Singular(_)
        )
    }
}
