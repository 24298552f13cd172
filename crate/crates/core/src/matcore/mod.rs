//! Dense complex matrices and the matrix functions built on the Hermitian
//! eigendecomposition: absolute value, fractional powers, polar
//! decomposition, Aluthge transform, norms and spectral radius.

mod eigen;
mod functions;
mod matrix;

use thiserror::Error;

use crate::interval::Interval;

pub use functions::{
    abs_op, aluthge, commutation_defect, eigh, frac_power, operator_norm, polar_decompose,
    spectral_radius, Eigh, HermitianMatrix, PolarParts, PsdMatrix, SpectralHint,
};
pub use matrix::{inner, normalized, vec_norm, ComplexMatrix, MatrixJson, VectorJson, C64};

pub(crate) use eigen::hermitian_eigen;

/// Relative Hermitian tolerance: `‖M − M*‖_F ≤ HERMITIAN_TOL·‖M‖_F`.
pub const HERMITIAN_TOL: f64 = 1e-12;
/// Eigenvalues in `[−PSD_TOL·‖a‖, 0)` are clipped to zero.
pub const PSD_TOL: f64 = 1e-10;
/// Target relative width of the Gelfand spectral-radius bracket.
pub const GELFAND_WIDTH: f64 = 1e-6;
/// Largest Gelfand squaring step.
pub const GELFAND_MAX_K: u32 = 20;
/// Tolerance for accepting a spectral hint (commutation and polynomial match).
pub const HINT_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Error, PartialEq)]
pub enum MatError {
    #[error("matrix is not square or has inconsistent shape ({rows} rows, {cols} columns)")]
    Shape { rows: usize, cols: usize },
    #[error("matrix has non-finite entries")]
    NonFinite,
    #[error("matrix is not Hermitian (relative defect {0:.3e})")]
    NotHermitian(f64),
    #[error("matrix is not positive semidefinite (smallest eigenvalue {0:.3e})")]
    NotPsd(f64),
    #[error("negative exponent {0} in fractional power")]
    NegativeExponent(f64),
    #[error("dimension mismatch: {0} vs {1}")]
    DimensionMismatch(usize, usize),
    #[error("eigenvalue iteration did not converge")]
    NoConvergence,
    #[error("Gelfand bracket did not reach the width target: [{}, {}]", .0.lo, .0.hi)]
    GelfandNoConvergence(Interval),
}
