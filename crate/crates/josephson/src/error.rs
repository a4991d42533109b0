use alloc::string::String;
use core::fmt;

/// Failure modes of the toolkit. Numerical invariant *reports* (residual
/// tables, sweep fits) are ordinary return values; an `Error` means the
/// requested computation could not produce a trustworthy result at all.
#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// Requested mode count above the hard cap (memory guard).
    Capacity { n_modes: usize, max_modes: usize },
    /// Mode or site index outside its range.
    IndexOutOfRange { index: usize, bound: usize },
    /// Two operands built over different bases.
    BasisMismatch { left_modes: usize, right_modes: usize },
    /// State vector norm too far from 1.
    NotNormalized { norm: f64 },
    /// Operator expected to be hermitian is not.
    NotHermitian { defect: f64 },
    /// Bad argument or precondition; message names the offender.
    Validation(String),
    /// Gap-equation bisection failed to bracket or converge.
    SolverFailure {
        lo: f64,
        hi: f64,
        f_lo: f64,
        f_hi: f64,
        iterations: usize,
    },
    /// Adaptive integrator drove the step size below resolution.
    IntegrationFailure {
        t: f64,
        step: f64,
        error_estimate: f64,
        tolerance: f64,
    },
    /// A Hamiltonian term moves charge between regions outside the junction
    /// term: the two forms of the current operator disagree.
    ModelInconsistency { residual: f64, tolerance: f64 },
    /// Mean-field and exact engines disagree on the same state.
    OracleMismatch {
        max_discrepancy: f64,
        tolerance: f64,
    },
    /// Wick contraction requested for a monomial above the pfaffian cost cap.
    MonomialTooLong { len: usize, max_len: usize },
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::Capacity { n_modes, max_modes } => write!(
                f,
                "capacity: {} modes requested (dimension 2^{}), cap is {} modes",
                n_modes, n_modes, max_modes
            ),
            Error::IndexOutOfRange { index, bound } => {
                write!(f, "index {} out of range (bound {})", index, bound)
            }
            Error::BasisMismatch {
                left_modes,
                right_modes,
            } => write!(
                f,
                "basis mismatch: {} modes vs {} modes",
                left_modes, right_modes
            ),
            Error::NotNormalized { norm } => {
                write!(f, "state vector not normalized: |v| = {:e}", norm)
            }
            Error::NotHermitian { defect } => {
                write!(f, "operator not hermitian: max |A - A^H| = {:e}", defect)
            }
            Error::Validation(msg) => write!(f, "validation: {}", msg),
            Error::SolverFailure {
                lo,
                hi,
                f_lo,
                f_hi,
                iterations,
            } => write!(
                f,
                "gap solver failed after {} iterations: bracket [{:e}, {:e}], f = [{:e}, {:e}]",
                iterations, lo, hi, f_lo, f_hi
            ),
            Error::IntegrationFailure {
                t,
                step,
                error_estimate,
                tolerance,
            } => write!(
                f,
                "integration failure at t = {:e}: step {:e} underflowed with error estimate {:e} (tolerance {:e})",
                t, step, error_estimate, tolerance
            ),
            Error::ModelInconsistency {
                residual,
                tolerance,
            } => write!(
                f,
                "model inconsistency: current-operator reduction residual {:e} exceeds {:e}",
                residual, tolerance
            ),
            Error::OracleMismatch {
                max_discrepancy,
                tolerance,
            } => write!(
                f,
                "engine disagreement: mean-field vs exact differ by {:e} (tolerance {:e})",
                max_discrepancy, tolerance
            ),
            Error::MonomialTooLong { len, max_len } => write!(
                f,
                "monomial of length {} exceeds the Wick-contraction cap {}",
                len, max_len
            ),
        }
    }
}

impl core::error::Error for Error {}
