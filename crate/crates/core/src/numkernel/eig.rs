use nalgebra::linalg::{Schur, SymmetricEigen};
use num_complex::Complex64;

use super::{
    ensure_square, hermiticity_error, null_space, real, spectral_norm, ComplexMatrix,
    ComplexVector, RankTolerance,
};
use crate::error::{Error, Result};

/// Relative non-Hermiticity accepted by [`hermitian_eig`].
const EIG_HERMITIAN_TOL: f64 = 1e-10;

#[derive(Clone, Debug)]
pub struct HermitianEig {
    /// Ascending.
    pub values: Vec<f64>,
    /// Unitary; column `j` belongs to `values[j]`.
    pub vectors: ComplexMatrix,
}

pub fn hermitian_eig(m: &ComplexMatrix) -> Result<HermitianEig> {
    let n = ensure_square(m)?;
    if n == 0 {
        return Err(Error::Empty);
    }
    let deviation = hermiticity_error(m);
    if deviation > EIG_HERMITIAN_TOL {
        return Err(Error::NotHermitian { deviation });
    }
    let sym = (m + m.adjoint()) * real(0.5);
    let dec = SymmetricEigen::try_new(sym, f64::EPSILON, 1000 * n)
        .ok_or_else(|| Error::numerical("hermitian_eig", (n, n), "QR iteration did not converge"))?;
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| dec.eigenvalues[i].total_cmp(&dec.eigenvalues[j]));
    let values = order.iter().map(|&i| dec.eigenvalues[i]).collect();
    let mut vectors = ComplexMatrix::zeros(n, n);
    for (j, &i) in order.iter().enumerate() {
        vectors.set_column(j, &dec.eigenvectors.column(i));
    }
    Ok(HermitianEig { values, vectors })
}

fn schur(m: &ComplexMatrix) -> Result<(ComplexMatrix, ComplexMatrix)> {
    let n = m.nrows();
    Schur::try_new(m.clone(), f64::EPSILON, 1000 * n.max(1))
        .map(|s| s.unpack())
        .ok_or_else(|| Error::numerical("schur", (n, n), "did not converge"))
}

/// A common eigenvector of two matrices that commute on the whole space.
/// Among the eigenvalues of `b` the one of smallest modulus is preferred, so
/// a vector annihilated by `b` is returned when one exists.
///
/// Returns `(vector, eigenvalue of a, eigenvalue of b)`.
pub(crate) fn common_eigenvector(
    a: &ComplexMatrix,
    b: &ComplexMatrix,
) -> Result<(ComplexVector, Complex64, Complex64)> {
    let k = ensure_square(b)?;
    if k == 0 {
        return Err(Error::Empty);
    }
    let (_, tb) = schur(b)?;
    let beta = (0..k)
        .map(|i| tb[(i, i)])
        .min_by(|x, y| x.norm().total_cmp(&y.norm()))
        .expect("k > 0");

    // b's eigenspace for beta is a-invariant because the two commute.
    let shifted = b - ComplexMatrix::identity(k, k) * beta;
    let scale = spectral_norm(b).max(spectral_norm(a)).max(f64::MIN_POSITIVE);
    let eigenspace = null_space(&shifted, RankTolerance::Explicit(1e-8 * scale))?;
    let e = if eigenspace.is_zero() {
        null_space(&shifted, RankTolerance::Explicit(1e-6 * scale))?
    } else {
        eigenspace
    };
    if e.is_zero() {
        return Err(Error::numerical(
            "common_eigenvector",
            (k, k),
            "eigenspace of the second matrix collapsed",
        ));
    }
    let f = e.frame();
    let a_e = f.adjoint() * a * f;
    let (q, _) = schur(&a_e)?;
    let mut v = f * q.column(0);
    let nrm = v.norm();
    v /= real(nrm);
    let alpha = (v.adjoint() * a * &v)[(0, 0)];
    let beta = (v.adjoint() * b * &v)[(0, 0)];
    Ok((v, alpha, beta))
}
