//! Error types shared across the crate.
//!
//! `CtError::is_obstruction` distinguishes mathematical obstructions (a
//! precondition of a theorem fails on the given input) from usage/schema
//! errors; the CLI maps the former to exit code 2 and the latter to 1.

use thiserror::Error;

#[derive(Error, Debug, Clone)]
pub enum CtError {
    #[error("dimension mismatch: {0} vs {1}")]
    DimMismatch(usize, usize),
    #[error("degree mismatch: {0} vs {1}")]
    DegreeMismatch(String, String),
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("residue obstruction: res = {residue} must vanish (degree -n constant-harmonic part nonzero)")]
    ResidueObstruction { residue: String },
    #[error("cut-off integral obstruction: regularized integral = {value} must vanish at non-integer order")]
    CutoffIntegralObstruction { value: String },
    #[error("nonzero total integral: ∫f = {value}, Schwartz-type primitives require ∫f = 0")]
    NonzeroIntegral { value: String },
    #[error("form is not closed: dω ≠ 0")]
    NotClosed,
    #[error("zero homogeneity: Euler primitive needs homogeneity ≠ 0")]
    ZeroHomogeneity,
    #[error("spanning frame rank deficient at grid node {node:?}: smallest singular value {sigma_min:.3e}")]
    RankDeficient { node: Vec<f64>, sigma_min: f64 },
    #[error("tolerance not met: achieved {achieved:.3e}, required {required:.3e}")]
    ToleranceNotMet { achieved: f64, required: f64 },
    #[error("residue leak at degree -n: |symplectic residue| = {leak:.3e} exceeds tol {tol:.3e} (truncation error surfaced)")]
    ResidueLeak { leak: f64, tol: f64 },
    #[error("order too high for L² trace: order {order} must be < -n (or the operator smoothing-only)")]
    OrderTooHigh { order: String },
    #[error("order outside supported TR range: {order} (supported: order < -n+1 and not an integer ≥ -n)")]
    OrderOutOfSupportedRange { order: String },
    #[error("unsupported order for this dispatch: {order}")]
    UnsupportedOrder { order: String },
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("matrix is not an idempotent: e² ≠ e ({0})")]
    NotIdempotent(String),
    #[error("hypertrace reduction violated: |T(A⊗E_{i}{j})| = {value:.3e} exceeds tol {tol:.3e}")]
    ReductionViolation { i: usize, j: usize, value: f64, tol: f64 },
    #[error("schema error: {0}")]
    Schema(String),
}

impl CtError {
    pub fn is_obstruction(&self) -> bool {
        !matches!(self, CtError::Schema(_) | CtError::InvalidInput(_))
    }
}

pub type CtResult<T> = Result<T, CtError>;
