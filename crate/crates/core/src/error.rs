use thiserror::Error;

/// Failure modes of the solver pipeline.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("shape mismatch: {0}")]
    Shape(String),
    #[error("truncation order too low: {0}")]
    DegenerateOrder(String),
    #[error("eigenvalues {i} and {j} are not separated (gap {gap:e})")]
    EigenvaluesNotSeparated { i: usize, j: usize, gap: f64 },
    #[error("eigenvalue subset does not fit in an open half-plane: {0}")]
    NoHalfPlane(String),
    #[error("resonance in component {component} at index {index:?} (divisor {divisor:e})")]
    Resonance {
        component: usize,
        index: Vec<u32>,
        divisor: f64,
    },
    #[error("zero divisor for entry ({row},{col}) at order {order}")]
    ZeroDivisor { row: usize, col: usize, order: usize },
    #[error("integration ray obstructed by a pole at {re}{im:+}i (distance {distance:e})")]
    RayObstruction { re: f64, im: f64, distance: f64 },
    #[error("ray direction is singular: {0}")]
    SingularDirection(String),
    #[error("tolerance not reached: {0}")]
    Tolerance(String),
    #[error("point outside the admissible region: {0}")]
    OutsideRegion(String),
    #[error("radius exceeded: {0}")]
    Radius(String),
    #[error("no admissible direction; obstructing directions {0:?}")]
    SearchFailure(Vec<f64>),
    #[error("coefficient tail carries no signal")]
    NoSignal,
    #[error("kappa mismatch: {0} vs {1}")]
    KappaMismatch(u32, u32),
    #[error("singular matrix: {0}")]
    Singular(String),
}

/// Coarse classification used to map errors to process exit codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorClass {
    /// Input or mathematical precondition failed (conditions, shapes, regions).
    Precondition,
    /// A numerical procedure failed to meet its target.
    Numerical,
}

impl Error {
    pub fn class(&self) -> ErrorClass {
        match self {
            Error::Tolerance(_)
            | Error::RayObstruction { .. }
            | Error::Singular(_)
            | Error::NoSignal
            | Error::Radius(_)
            | Error::SearchFailure(_) => ErrorClass::Numerical,
            _ => ErrorClass::Precondition,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
