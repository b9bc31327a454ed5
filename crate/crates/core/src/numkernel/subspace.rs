use std::f64::consts::FRAC_PI_2;

use nalgebra::linalg::SVD;

use super::{identity, singular_values, ComplexMatrix, ComplexVector, RankTolerance};
use crate::error::{Error, Result};

/// Orthonormality tolerance enforced on every frame.
pub const FRAME_TOL: f64 = 1e-10;

/// Largest principal angle at which two subspaces are considered equal.
pub const EQUALITY_ANGLE: f64 = 1e-8;

/// A linear subspace held as an orthonormal column frame. The zero subspace
/// has a frame with no columns.
#[derive(Clone, Debug, PartialEq)]
pub struct Subspace {
    frame: ComplexMatrix,
}

impl Subspace {
    /// Wraps an existing frame, rejecting it unless its columns are
    /// orthonormal within [`FRAME_TOL`].
    pub fn from_frame(frame: ComplexMatrix) -> Result<Self> {
        if frame.nrows() == 0 {
            return Err(Error::Empty);
        }
        let s = Subspace { frame };
        let dev = s.orthonormality_error();
        if dev > FRAME_TOL {
            return Err(Error::NotOrthonormal { deviation: dev });
        }
        Ok(s)
    }

    /// Span of the columns of an arbitrary matrix.
    pub fn span(vectors: &ComplexMatrix, tol: RankTolerance) -> Result<Self> {
        column_space(vectors, tol)
    }

    pub fn zero(ambient_dim: usize) -> Self {
        Subspace {
            frame: ComplexMatrix::zeros(ambient_dim, 0),
        }
    }

    pub fn full(ambient_dim: usize) -> Self {
        Subspace {
            frame: identity(ambient_dim),
        }
    }

    pub(crate) fn from_frame_unchecked(frame: ComplexMatrix) -> Self {
        Subspace { frame }
    }

    pub fn ambient_dim(&self) -> usize {
        self.frame.nrows()
    }

    pub fn dim(&self) -> usize {
        self.frame.ncols()
    }

    pub fn is_zero(&self) -> bool {
        self.dim() == 0
    }

    pub fn frame(&self) -> &ComplexMatrix {
        &self.frame
    }

    pub fn into_frame(self) -> ComplexMatrix {
        self.frame
    }

    pub fn basis_vector(&self, i: usize) -> ComplexVector {
        self.frame.column(i).into_owned()
    }

    /// Orthogonal projector onto the subspace.
    pub fn projector(&self) -> ComplexMatrix {
        &self.frame * self.frame.adjoint()
    }

    /// `|| F^dagger F - I ||_F`.
    pub fn orthonormality_error(&self) -> f64 {
        let k = self.dim();
        (self.frame.adjoint() * &self.frame - identity(k)).norm()
    }

    /// Component of `m`'s columns orthogonal to the subspace.
    pub fn reject(&self, m: &ComplexMatrix) -> ComplexMatrix {
        m - &self.frame * (self.frame.adjoint() * m)
    }

    /// Frobenius norm of the part of `m`'s columns lying outside the subspace.
    pub fn residual(&self, m: &ComplexMatrix) -> f64 {
        self.reject(m).norm()
    }

    pub fn vector_residual(&self, v: &ComplexVector) -> f64 {
        let p = &self.frame * (self.frame.adjoint() * v);
        (v - p).norm()
    }

    pub fn contains(&self, other: &Subspace, tol: f64) -> Result<bool> {
        check_ambient(self, other, "subspace containment")?;
        Ok(other.dim() <= self.dim() && self.residual(&other.frame) <= tol)
    }

    /// Same dimension and largest principal angle at most [`EQUALITY_ANGLE`].
    pub fn same_as(&self, other: &Subspace) -> Result<bool> {
        if self.dim() != other.dim() {
            check_ambient(self, other, "subspace comparison")?;
            return Ok(false);
        }
        let angles = principal_angles(self, other)?;
        Ok(angles.last().is_none_or(|&a| a <= EQUALITY_ANGLE))
    }

    /// `self + other`, via the rank of the concatenated frames.
    pub fn sum(&self, other: &Subspace, tol: RankTolerance) -> Result<Subspace> {
        check_ambient(self, other, "subspace sum")?;
        let mut cat = ComplexMatrix::zeros(self.ambient_dim(), self.dim() + other.dim());
        cat.columns_mut(0, self.dim()).copy_from(&self.frame);
        cat.columns_mut(self.dim(), other.dim()).copy_from(&other.frame);
        column_space(&cat, tol)
    }

    /// Orthogonal complement within the ambient space.
    pub fn complement(&self) -> Result<Subspace> {
        let n = self.ambient_dim();
        if self.is_zero() {
            return Ok(Subspace::full(n));
        }
        null_space(&self.frame.adjoint(), RankTolerance::Explicit(0.5))
    }

    /// Maps `x -> frame * x` for a frame of coefficient vectors; used to lift
    /// a subspace of the coordinates back into the ambient space.
    pub(crate) fn lift(&self, coefficients: &Subspace) -> Subspace {
        Subspace {
            frame: &self.frame * &coefficients.frame,
        }
    }
}

fn check_ambient(a: &Subspace, b: &Subspace, context: &'static str) -> Result<()> {
    if a.ambient_dim() != b.ambient_dim() {
        return Err(Error::DimensionMismatch {
            context,
            left: a.ambient_dim(),
            right: b.ambient_dim(),
        });
    }
    Ok(())
}

fn svd(m: ComplexMatrix, u: bool, v: bool, operation: &'static str) -> Result<SVD<num_complex::Complex64, nalgebra::Dyn, nalgebra::Dyn>> {
    let shape = m.shape();
    let max_iter = 500 * shape.0.max(shape.1).max(1);
    SVD::try_new(m, u, v, f64::EPSILON, max_iter)
        .ok_or_else(|| Error::numerical(operation, shape, "SVD did not converge"))
}

/// Orthonormal basis of `{x : ||m x|| <= tol ||x||}`: right singular vectors
/// whose singular value does not exceed the resolved tolerance.
pub fn null_space(m: &ComplexMatrix, tol: RankTolerance) -> Result<Subspace> {
    let (rows, cols) = m.shape();
    kernel_with_gap(m, |sigma_max| tol.resolve(rows, cols, sigma_max)).map(|(k, _)| k)
}

/// Null space for a cutoff computed from the largest singular value, plus
/// the smallest singular value left above the cutoff (the spectral gap that
/// bounds how far the returned frame can sit from the exact kernel).
pub(crate) fn kernel_with_gap(
    m: &ComplexMatrix,
    cutoff: impl FnOnce(f64) -> f64,
) -> Result<(Subspace, Option<f64>)> {
    let (rows, cols) = m.shape();
    if rows == 0 || cols == 0 {
        return Err(Error::Empty);
    }
    // Wide inputs are padded with zero rows so the SVD yields a full set of
    // right singular vectors.
    let work = if rows < cols {
        let mut padded = ComplexMatrix::zeros(cols, cols);
        padded.rows_mut(0, rows).copy_from(m);
        padded
    } else {
        m.clone()
    };
    if !work.iter().all(|z| z.re.is_finite() && z.im.is_finite()) {
        return Err(Error::numerical("null_space", (rows, cols), "non-finite entries"));
    }
    let dec = svd(work, false, true, "null_space")?;
    let v = dec
        .v_t
        .as_ref()
        .expect("requested right singular vectors")
        .adjoint();
    let sigma = &dec.singular_values;
    let sigma_max = sigma.iter().copied().fold(0.0, f64::max);
    let cutoff = cutoff(sigma_max);
    let keep: Vec<usize> = (0..sigma.len()).filter(|&i| sigma[i] <= cutoff).collect();
    let gap = sigma
        .iter()
        .copied()
        .filter(|&s| s > cutoff)
        .min_by(f64::total_cmp);
    let mut frame = ComplexMatrix::zeros(cols, keep.len());
    for (j, &i) in keep.iter().enumerate() {
        frame.set_column(j, &v.column(i));
    }
    Ok((Subspace::from_frame_unchecked(frame), gap))
}

/// Orthonormal basis of the range of `m`: left singular vectors whose
/// singular value exceeds the resolved tolerance.
pub fn column_space(m: &ComplexMatrix, tol: RankTolerance) -> Result<Subspace> {
    let (rows, cols) = m.shape();
    if rows == 0 {
        return Err(Error::Empty);
    }
    if cols == 0 {
        return Ok(Subspace::zero(rows));
    }
    let dec = svd(m.clone(), true, false, "column_space")?;
    let u = dec.u.as_ref().expect("requested left singular vectors");
    let sigma = &dec.singular_values;
    let sigma_max = sigma.iter().copied().fold(0.0, f64::max);
    let cutoff = tol.resolve(rows, cols, sigma_max);
    let keep: Vec<usize> = (0..sigma.len()).filter(|&i| sigma[i] > cutoff).collect();
    let mut frame = ComplexMatrix::zeros(rows, keep.len());
    for (j, &i) in keep.iter().enumerate() {
        frame.set_column(j, &u.column(i));
    }
    Ok(Subspace::from_frame_unchecked(frame))
}

/// `s1 ∩ s2` as the null space of the stacked system
/// `[(I - P1); (I - P2)] x = 0`.
pub fn intersect(s1: &Subspace, s2: &Subspace, tol: RankTolerance) -> Result<Subspace> {
    check_ambient(s1, s2, "intersect")?;
    let n = s1.ambient_dim();
    if s1.is_zero() || s2.is_zero() {
        return Ok(Subspace::zero(n));
    }
    let eye = identity(n);
    let mut stacked = ComplexMatrix::zeros(2 * n, n);
    stacked.rows_mut(0, n).copy_from(&(&eye - s1.projector()));
    stacked.rows_mut(n, n).copy_from(&(&eye - s2.projector()));
    // Both blocks are projectors, so the natural scale is 1 even when one of
    // them vanishes.
    let tol = match tol {
        RankTolerance::Automatic => RankTolerance::Explicit(f64::EPSILON * (2 * n) as f64 * 8.0),
        explicit => explicit,
    };
    null_space(&stacked, tol)
}

/// Canonical angles between two subspaces, ascending, one per dimension of
/// the smaller subspace. Small angles come from sines and large ones from
/// cosines so both ends stay accurate.
pub fn principal_angles(s1: &Subspace, s2: &Subspace) -> Result<Vec<f64>> {
    check_ambient(s1, s2, "principal_angles")?;
    let (small, large) = if s1.dim() <= s2.dim() {
        (s1, s2)
    } else {
        (s2, s1)
    };
    if small.is_zero() {
        return Ok(Vec::new());
    }
    let cosines = singular_values(&(small.frame.adjoint() * &large.frame));
    let mut sines = singular_values(&large.reject(&small.frame));
    sines.reverse();
    let k = small.dim();
    let angles = (0..k)
        .map(|i| {
            let c = cosines.get(i).copied().unwrap_or(0.0).clamp(0.0, 1.0);
            let s = sines.get(i).copied().unwrap_or(0.0).clamp(0.0, 1.0);
            if c * c < 0.5 {
                c.acos()
            } else {
                s.asin()
            }
            .clamp(0.0, FRAC_PI_2)
        })
        .collect::<Vec<_>>();
    let mut angles = angles;
    angles.sort_by(f64::total_cmp);
    Ok(angles)
}
