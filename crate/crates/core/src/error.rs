use core::fmt;

/// Errors shared across the solver, phase and composite layers.
#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// Two series with different fundamentals (or incompatible symbolic
    /// frequency bases) were combined.
    FrequencyMismatch { lhs: f64, rhs: f64 },
    /// The Hill eigenproblem produced a near-degenerate or ambiguous
    /// quasienergy pair for these parameters.
    Resonance { epsilon: f64, omega: f64 },
    /// The solver did not reach the requested accuracy at the cutoff.
    Convergence { cutoff: u32, residual: f64 },
    /// Requested backend is not available in this build.
    UnsupportedBackend(&'static str),
    /// Rabi period is undefined because the quasienergy vanishes.
    ZeroRabiFrequency,
    /// The overlap magnitude is below threshold; its argument is undefined.
    UndefinedPhase { magnitude: f64 },
    /// A parameter is outside its valid domain.
    Domain { field: &'static str, reason: &'static str },
    /// The adaptive integrator underflowed its step size.
    IntegrationFailure { t: f64 },
    /// Adaptive quadrature failed to converge; carries the achieved estimate.
    QuadratureFailure { achieved: f64 },
    /// No survival-probability recurrence was found within the scan horizon.
    RecurrenceNotFound { horizon: f64 },
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::FrequencyMismatch { lhs, rhs } => {
                write!(f, "frequency mismatch: {lhs} vs {rhs}")
            }
            Error::Resonance { epsilon, omega } => write!(
                f,
                "near-degenerate quasienergies at epsilon={epsilon}, omega={omega}"
            ),
            Error::Convergence { cutoff, residual } => write!(
                f,
                "no convergence at cutoff M={cutoff} (unitarity residual {residual:.3e})"
            ),
            Error::UnsupportedBackend(name) => write!(f, "backend `{name}` is not implemented"),
            Error::ZeroRabiFrequency => write!(f, "Rabi period undefined: quasienergy is zero"),
            Error::UndefinedPhase { magnitude } => {
                write!(f, "phase undefined: overlap magnitude {magnitude:.3e}")
            }
            Error::Domain { field, reason } => write!(f, "invalid `{field}`: {reason}"),
            Error::IntegrationFailure { t } => {
                write!(f, "integrator step size underflow at t={t}")
            }
            Error::QuadratureFailure { achieved } => {
                write!(f, "quadrature did not converge (achieved {achieved:.3e})")
            }
            Error::RecurrenceNotFound { horizon } => {
                write!(f, "no recurrence found within horizon {horizon}")
            }
        }
    }
}

#[cfg(any(test, feature = "std"))]
impl std::error::Error for Error {}

pub type Result<T> = core::result::Result<T, Error>;
