//! Dense complex linear algebra used by everything above it: null spaces and
//! subspace algebra, Hermitian eigendecomposition, and the matrix exponential.
//!
//! Matrices are plain `nalgebra` dynamic matrices over `Complex<f64>`. All
//! routines are pure; nothing here holds shared state.

mod eig;
mod expm;
mod subspace;

pub use eig::{hermitian_eig, HermitianEig};
pub use expm::{expm, expm_pade, expm_spectral, propagate_grid};
pub use subspace::{column_space, intersect, null_space, principal_angles, Subspace};

pub(crate) use eig::common_eigenvector;
pub(crate) use subspace::kernel_with_gap;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type ComplexMatrix = DMatrix<Complex64>;
pub type ComplexVector = DVector<Complex64>;

/// Relative tolerance under which a matrix is treated as (anti-)Hermitian.
pub const HERMITIAN_TOL: f64 = 1e-12;

/// Threshold on singular values below which a direction counts as null.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub enum RankTolerance {
    /// `eps * max(rows, cols) * sigma_max`, resolved at the point of use.
    #[default]
    Automatic,
    Explicit(f64),
}

impl RankTolerance {
    pub fn explicit(value: f64) -> Result<Self> {
        if !(value.is_finite() && value >= 0.0) {
            return Err(Error::InvalidParameter(format!(
                "rank tolerance must be finite and nonnegative, got {value}"
            )));
        }
        Ok(RankTolerance::Explicit(value))
    }

    /// Resolves against a matrix of the given shape and largest singular value.
    pub fn resolve(self, rows: usize, cols: usize, sigma_max: f64) -> f64 {
        match self {
            RankTolerance::Automatic => f64::EPSILON * rows.max(cols) as f64 * sigma_max,
            RankTolerance::Explicit(v) => v,
        }
    }
}

#[inline]
pub fn c64(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

#[inline]
pub fn real(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

pub fn identity(n: usize) -> ComplexMatrix {
    ComplexMatrix::identity(n, n)
}

pub fn ensure_square(m: &ComplexMatrix) -> Result<usize> {
    if m.nrows() != m.ncols() {
        return Err(Error::NotSquare {
            rows: m.nrows(),
            cols: m.ncols(),
        });
    }
    Ok(m.nrows())
}

/// `||m - m^dagger||_F / ||m||_F`, zero for the zero matrix.
pub fn hermiticity_error(m: &ComplexMatrix) -> f64 {
    relative_error(&(m - m.adjoint()), m)
}

/// `||m + m^dagger||_F / ||m||_F`, zero for the zero matrix.
pub fn anti_hermiticity_error(m: &ComplexMatrix) -> f64 {
    relative_error(&(m + m.adjoint()), m)
}

fn relative_error(diff: &ComplexMatrix, reference: &ComplexMatrix) -> f64 {
    let scale = reference.norm();
    if scale == 0.0 {
        0.0
    } else {
        diff.norm() / scale
    }
}

pub fn is_hermitian(m: &ComplexMatrix, rel_tol: f64) -> bool {
    m.nrows() == m.ncols() && hermiticity_error(m) <= rel_tol
}

pub fn is_anti_hermitian(m: &ComplexMatrix, rel_tol: f64) -> bool {
    m.nrows() == m.ncols() && anti_hermiticity_error(m) <= rel_tol
}

/// Largest singular value.
pub fn spectral_norm(m: &ComplexMatrix) -> f64 {
    if m.is_empty() {
        return 0.0;
    }
    singular_values(m).first().copied().unwrap_or(0.0)
}

/// Singular values in descending order.
pub fn singular_values(m: &ComplexMatrix) -> Vec<f64> {
    if m.is_empty() {
        return Vec::new();
    }
    let mut sv: Vec<f64> = m.singular_values().iter().copied().collect();
    sv.sort_by(|a, b| b.total_cmp(a));
    sv
}

/// `ab - ba`.
pub fn commutator(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    a * b - b * a
}

/// Trace norm of a Hermitian matrix: the sum of absolute eigenvalues.
pub fn trace_norm_hermitian(m: &ComplexMatrix) -> Result<f64> {
    let h = (m + m.adjoint()) * real(0.5);
    let eig = hermitian_eig(&h)?;
    Ok(eig.values.iter().map(|v| v.abs()).sum())
}

pub fn trace(m: &ComplexMatrix) -> Complex64 {
    m.diagonal().iter().sum()
}
