use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("grid domain must be symmetric about zero with x_min < 0 < x_max (got [{x_min}, {x_max}])")]
    AsymmetricDomain { x_min: f64, x_max: f64 },

    #[error("grid needs at least {min} points (got {got})")]
    TooFewPoints { got: usize, min: usize },

    #[error("scaling angle must satisfy 0 <= theta < pi/4 (got {0})")]
    InvalidTheta(f64),

    #[error("speed of light must be finite and positive (got {0})")]
    InvalidUnits(f64),

    #[error("potential is not finite at x = {x} (rotated argument)")]
    PotentialNotEvaluable { x: f64 },

    #[error("eigensolver failed: {0}")]
    EigensolverFailure(String),

    #[error("state {index} is self-orthogonal under the c-product (|sum psi^2 dx| = {norm:e})")]
    DegenerateNormalization { index: usize, norm: f64 },

    #[error("theta trajectory needs at least 3 sorted angles (got {0})")]
    TooFewThetas(usize),

    #[error("theta list must be sorted ascending")]
    UnsortedThetas,

    #[error("ambiguous continuation near E = {re} {im:+}i at theta = {theta}")]
    TrajectoryAmbiguity { re: f64, im: f64, theta: f64 },

    #[error("wavefunction length {got} does not match grid size {expected}")]
    GridMismatch { got: usize, expected: usize },

    #[error("arg(-f) is undefined at f = 0")]
    ZeroArgument,

    #[error("theta = {theta} does not expose state {state}; need theta > {required}")]
    ThetaTooSmall { state: usize, theta: f64, required: f64 },

    #[error("state {0} is not a discrete (bound or resonance) state")]
    StateNotDiscrete(usize),

    #[error("state {0} is not a bound state of a Hermitian (theta = 0) spectrum")]
    StateNotBound(usize),

    #[error("grids disagree on the number of discrete states ({0} vs {1})")]
    PoleCountMismatch(usize, usize),
}

impl Error {
    /// True for errors caused by invalid inputs rather than numerical breakdown.
    pub fn is_precondition(&self) -> bool {
        matches!(
            self,
            Error::AsymmetricDomain { .. }
                | Error::TooFewPoints { .. }
                | Error::InvalidTheta(_)
                | Error::InvalidUnits(_)
                | Error::TooFewThetas(_)
                | Error::UnsortedThetas
                | Error::GridMismatch { .. }
                | Error::ZeroArgument
                | Error::ThetaTooSmall { .. }
                | Error::StateNotDiscrete(_)
                | Error::StateNotBound(_)
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
