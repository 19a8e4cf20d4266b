use core::fmt;

pub type Result<T, E = Error> = core::result::Result<T, E>;

/// Everything that can go wrong inside the numerical core.
#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// A physical constant is outside its admissible range.
    InvalidParameter { name: &'static str, value: f64 },
    /// Grid sizes must be powers of two (and at least 4).
    GridSize { name: &'static str, n: usize },
    /// Two operands live on different grids.
    GridMismatch,
    /// The velocity box does not contain the tail of the Maxwellian or of the
    /// kernel function (`tail` is the relative boundary value, `limit` its bound).
    VelocityBoxTooSmall { v_max: f64, tail: f64, limit: f64 },
    /// An aperiodic potential was handed to an operator that differentiates in `x`.
    AperiodicPotential,
    /// A field that must have zero velocity mass does not.
    NonZeroMass { max_density: f64 },
    /// `D(x)` is not bounded below by a positive constant on the grid.
    EllipticityViolation { min: f64, x: f64 },
    /// The time step exceeds the advective CFL heuristic.
    TimeStepTooLarge { dt: f64, limit: f64 },
    /// A time integrator blew up.
    StabilityViolation { step: usize, growth: f64 },
    /// Adaptive Duhamel quadrature did not settle.
    QuadratureNotConverged { tau: f64, difference: f64 },
    /// A requested time is not one of the stored output times.
    TimeNotInTrajectory { t: f64 },
    /// Requested output time is negative or beyond the final time.
    InvalidOutputTime { t: f64 },
    /// Dense linear solve hit a zero pivot.
    SingularMatrix,
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::InvalidParameter { name, value } => {
                write!(f, "invalid parameter {name} = {value}")
            }
            Error::GridSize { name, n } => {
                write!(f, "grid size {name} = {n} must be a power of two >= 4")
            }
            Error::GridMismatch => f.write_str("operands live on different grids"),
            Error::VelocityBoxTooSmall { v_max, tail, limit } => {
                write!(f, "velocity box too small: v_max = {v_max} leaves relative tail {tail:e} (need < {limit:e})")
            }
            Error::AperiodicPotential => {
                f.write_str("aperiodic potential cannot be used with periodic spectral x-transport")
            }
            Error::NonZeroMass { max_density } => {
                write!(f, "field must have zero velocity mass, max |n| = {max_density:e}")
            }
            Error::EllipticityViolation { min, x } => {
                write!(f, "diffusion coefficient not elliptic: min D = {min} at x = {x}")
            }
            Error::TimeStepTooLarge { dt, limit } => {
                write!(f, "time step {dt} exceeds stability limit {limit}")
            }
            Error::StabilityViolation { step, growth } => {
                write!(f, "integration diverged at step {step} (norm growth {growth:e})")
            }
            Error::QuadratureNotConverged { tau, difference } => {
                write!(f, "Duhamel quadrature at tau = {tau} did not converge (last difference {difference:e})")
            }
            Error::TimeNotInTrajectory { t } => write!(f, "time {t} is not a stored output time"),
            Error::InvalidOutputTime { t } => write!(f, "output time {t} outside [0, t_final]"),
            Error::SingularMatrix => f.write_str("singular matrix in dense solve"),
        }
    }
}

impl core::error::Error for Error {}
