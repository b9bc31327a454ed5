//! Operator constructors: Pauli matrices, truncated bosonic ladder operators,
//! number and parity operators, Weyl shift-and-phase unitaries, and tensor
//! products.
//!
//! Qubit basis: index 0 is `sigma_z = +1`, index 1 is `sigma_z = -1`.
//! Products are Kronecker products with the first factor varying slowest, so
//! a qubit ⊗ mode state `|s, n>` sits at index `s * n_max + n`.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numkernel::{c64, identity, real, ComplexMatrix, ComplexVector};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Pauli {
    X,
    Y,
    Z,
    /// `sigma_+ = |0><1|`
    Plus,
    /// `sigma_- = |1><0|`
    Minus,
}

pub fn pauli(which: Pauli) -> ComplexMatrix {
    let (o, l, i) = (real(0.0), real(1.0), c64(0.0, 1.0));
    let entries = match which {
        Pauli::X => [o, l, l, o],
        Pauli::Y => [o, -i, i, o],
        Pauli::Z => [l, o, o, -l],
        Pauli::Plus => [o, l, o, o],
        Pauli::Minus => [o, o, l, o],
    };
    ComplexMatrix::from_row_slice(2, 2, &entries)
}

/// Truncated Fock space spanned by `|0>, ..., |n_max - 1>`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FockSpace {
    n_max: usize,
}

impl FockSpace {
    pub fn new(n_max: usize) -> Result<Self> {
        if n_max < 2 {
            return Err(Error::InvalidParameter(format!(
                "Fock truncation must be at least 2, got {n_max}"
            )));
        }
        Ok(FockSpace { n_max })
    }

    pub fn n_max(&self) -> usize {
        self.n_max
    }

    pub fn basis(&self, n: usize) -> ComplexVector {
        basis_vector(self.n_max, n)
    }
}

pub fn basis_vector(dim: usize, i: usize) -> ComplexVector {
    let mut v = ComplexVector::zeros(dim);
    v[i] = real(1.0);
    v
}

/// `a |n> = sqrt(n) |n-1>`.
pub fn annihilation(space: FockSpace) -> ComplexMatrix {
    let n = space.n_max;
    let mut a = ComplexMatrix::zeros(n, n);
    for k in 1..n {
        a[(k - 1, k)] = real((k as f64).sqrt());
    }
    a
}

pub fn creation(space: FockSpace) -> ComplexMatrix {
    annihilation(space).adjoint()
}

/// `a^dagger a`, built directly as `diag(0, ..., n_max - 1)`.
pub fn number(space: FockSpace) -> ComplexMatrix {
    diagonal((0..space.n_max).map(|k| k as f64))
}

pub fn diagonal(values: impl IntoIterator<Item = f64>) -> ComplexMatrix {
    let v: Vec<Complex64> = values.into_iter().map(real).collect();
    ComplexMatrix::from_diagonal(&ComplexVector::from_vec(v))
}

/// Index of a Weyl operator `U_{nm}` on a `d`-level system; both indices are
/// stored reduced mod `d`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct WeylIndex {
    d: usize,
    n: usize,
    m: usize,
}

impl WeylIndex {
    pub fn new(d: usize, n: i64, m: i64) -> Result<Self> {
        if d < 2 {
            return Err(Error::InvalidParameter(format!(
                "Weyl dimension must be at least 2, got {d}"
            )));
        }
        let r = |x: i64| x.rem_euclid(d as i64) as usize;
        Ok(WeylIndex { d, n: r(n), m: r(m) })
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m(&self) -> usize {
        self.m
    }
}

/// `omega^k` with `omega = exp(2 pi i / d)`.
pub fn root_of_unity(d: usize, k: i64) -> Complex64 {
    let k = k.rem_euclid(d as i64);
    Complex64::from_polar(1.0, 2.0 * PI * k as f64 / d as f64)
}

/// `U_{nm} |k> = omega^{nk} |m + k mod d>`.
pub fn weyl(idx: WeylIndex) -> ComplexMatrix {
    let d = idx.d;
    let mut u = ComplexMatrix::zeros(d, d);
    for k in 0..d {
        u[((idx.m + k) % d, k)] = root_of_unity(d, (idx.n * k) as i64);
    }
    u
}

/// Kronecker product, `(a ⊗ b)[(i1 i2), (j1 j2)] = a[i1, j1] b[i2, j2]`.
pub fn tensor(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    a.kronecker(b)
}

/// Kronecker product of several factors, leftmost slowest.
pub fn tensor_all(factors: &[&ComplexMatrix]) -> ComplexMatrix {
    factors
        .iter()
        .fold(identity(1), |acc, f| acc.kronecker(*f))
}

/// Total excitation number and its parity `(-1)^N`.
///
/// Without a qubit `N = a^dagger a`. With one, the space is qubit ⊗ mode and
/// `N = a^dagger a + (1 + sigma_z) / 2`. The parity is taken entrywise on the
/// diagonal of `N`, so it is exactly `±1`.
pub fn parity_number(space: FockSpace, with_qubit: bool) -> (ComplexMatrix, ComplexMatrix) {
    let num = number(space);
    let n_op = if with_qubit {
        let excitation = (identity(2) + pauli(Pauli::Z)) * real(0.5);
        tensor(&identity(2), &num) + tensor(&excitation, &identity(space.n_max))
    } else {
        num
    };
    (n_op.clone(), parity_of_diagonal(&n_op))
}

/// `exp(i pi N)` for diagonal `N`; integer entries map to exact signs.
pub fn parity_of_diagonal(n_op: &ComplexMatrix) -> ComplexMatrix {
    let dim = n_op.nrows();
    let mut p = ComplexMatrix::zeros(dim, dim);
    for i in 0..dim {
        let x = n_op[(i, i)].re;
        let k = x.round();
        p[(i, i)] = if (x - k).abs() < 1e-12 {
            real(if k.rem_euclid(2.0) == 0.0 { 1.0 } else { -1.0 })
        } else {
            Complex64::from_polar(1.0, PI * x)
        };
    }
    p
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numkernel::{commutator, hermitian_eig, trace};
    use crate::test_util::{random_matrix, rng};

    #[test]
    fn pauli_z_basis_convention() {
        let z = pauli(Pauli::Z);
        assert_eq!(z, diagonal([1.0, -1.0]));
        assert_eq!(&z * basis_vector(2, 0), basis_vector(2, 0));
    }

    #[test]
    fn ladder_anticommutator_is_identity() {
        let p = pauli(Pauli::Plus);
        let m = pauli(Pauli::Minus);
        assert_eq!(&p * &m + &m * &p, identity(2));
        assert_eq!(pauli(Pauli::X), &p + &m);
    }

    #[test]
    fn pauli_algebra() {
        let lhs = commutator(&pauli(Pauli::X), &pauli(Pauli::Y));
        assert_eq!(lhs, pauli(Pauli::Z) * c64(0.0, 2.0));
    }

    #[test]
    fn fock_truncation_must_be_at_least_two() {
        assert!(FockSpace::new(1).is_err());
        assert!(FockSpace::new(2).is_ok());
    }

    #[test]
    fn two_level_annihilation() {
        let a = annihilation(FockSpace::new(2).unwrap());
        assert_eq!(a, ComplexMatrix::from_row_slice(2, 2, &[real(0.0), real(1.0), real(0.0), real(0.0)]));
    }

    #[test]
    fn number_operator_counts() {
        let space = FockSpace::new(6).unwrap();
        let a = annihilation(space);
        let n = a.adjoint() * &a;
        assert!((&n - number(space)).norm() < 1e-14);
        assert_eq!(number(space) * space.basis(3), space.basis(3) * real(3.0));
    }

    #[test]
    fn truncated_canonical_commutator() {
        for n_max in [2, 5, 9] {
            let space = FockSpace::new(n_max).unwrap();
            let a = annihilation(space);
            let c = commutator(&a, &a.adjoint());
            let mut expected = identity(n_max);
            expected[(n_max - 1, n_max - 1)] = real(1.0 - n_max as f64);
            assert!((c - expected).norm() < 1e-13);
        }
    }

    #[test]
    fn weyl_identity_and_paulis() {
        assert_eq!(weyl(WeylIndex::new(4, 0, 0).unwrap()), identity(4));
        let z = weyl(WeylIndex::new(2, 1, 0).unwrap());
        let x = weyl(WeylIndex::new(2, 0, 1).unwrap());
        assert!((z - pauli(Pauli::Z)).norm() < 1e-15);
        assert!((x - pauli(Pauli::X)).norm() < 1e-15);
    }

    #[test]
    fn weyl_indices_reduce() {
        let i = WeylIndex::new(3, -1, 4).unwrap();
        assert_eq!((i.n(), i.m()), (2, 1));
    }

    #[test]
    fn weyl_unitary_and_orthogonal() {
        let d = 3;
        let all: Vec<_> = (0..d as i64)
            .flat_map(|m| (0..d as i64).map(move |n| (m, n)))
            .collect();
        for &(m, n) in &all {
            let u = weyl(WeylIndex::new(d, m, n).unwrap());
            assert!((u.adjoint() * &u - identity(d)).norm() < 1e-12);
            for &(k, l) in &all {
                let v = weyl(WeylIndex::new(d, k, l).unwrap());
                let expected = if (m, n) == (k, l) { d as f64 } else { 0.0 };
                assert!((trace(&(u.adjoint() * v)) - real(expected)).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn weyl_adjoint_law() {
        // U_{mn}^dagger = omega^{mn} U_{-m,-n}
        let d = 3;
        for m in 0..3i64 {
            for n in 0..3i64 {
                let lhs = weyl(WeylIndex::new(d, m, n).unwrap()).adjoint();
                let rhs = weyl(WeylIndex::new(d, -m, -n).unwrap()) * root_of_unity(d, m * n);
                assert!((lhs - rhs).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn weyl_composition_law() {
        // From U_{nm}|k> = omega^{nk}|m+k>:
        //   U_{nm} U_{rs} |k> = omega^{rk + n(s+k)} |m+s+k> = omega^{ns} U_{n+r, m+s} |k>.
        // The often-quoted form omega^{ms} U_{n+r, n+s} is checked to fail.
        let d = 3;
        let mut printed_form_holds_everywhere = true;
        for n in 0..3i64 {
            for m in 0..3i64 {
                for r in 0..3i64 {
                    for s in 0..3i64 {
                        let lhs = weyl(WeylIndex::new(d, n, m).unwrap())
                            * weyl(WeylIndex::new(d, r, s).unwrap());
                        let rhs = weyl(WeylIndex::new(d, n + r, m + s).unwrap())
                            * root_of_unity(d, n * s);
                        assert!((&lhs - rhs).norm() < 1e-12);
                        let printed = weyl(WeylIndex::new(d, n + r, n + s).unwrap())
                            * root_of_unity(d, m * s);
                        if (&lhs - printed).norm() > 1e-12 {
                            printed_form_holds_everywhere = false;
                        }
                    }
                }
            }
        }
        assert!(!printed_form_holds_everywhere);
    }

    #[test]
    fn weyl_diagonal_family_commutes() {
        let d = 4;
        let u1 = weyl(WeylIndex::new(d, 1, 0).unwrap());
        let u3 = weyl(WeylIndex::new(d, 3, 0).unwrap());
        assert!(commutator(&u1, &u3).norm() < 1e-14);
    }

    #[test]
    fn tensor_identities() {
        assert_eq!(tensor(&identity(2), &identity(3)), identity(6));
        let zi = tensor(&pauli(Pauli::Z), &identity(2));
        let eig = hermitian_eig(&zi).unwrap();
        assert_eq!(eig.values, vec![-1.0, -1.0, 1.0, 1.0]);
        assert_eq!(zi, diagonal([1.0, 1.0, -1.0, -1.0]));
    }

    #[test]
    fn tensor_mixed_product() {
        let mut r = rng(41);
        let (a, c) = (random_matrix(&mut r, 2, 2), random_matrix(&mut r, 2, 2));
        let (b, d) = (random_matrix(&mut r, 3, 3), random_matrix(&mut r, 3, 3));
        let lhs = tensor(&a, &b) * tensor(&c, &d);
        let rhs = tensor(&(&a * &c), &(&b * &d));
        assert!((lhs - rhs).norm() < 1e-13);
    }

    #[test]
    fn number_and_parity_with_qubit() {
        let space = FockSpace::new(5).unwrap();
        let (n_op, parity) = parity_number(space, true);
        let ket = |s: usize, n: usize| basis_vector(10, s * 5 + n);
        for n in 0..5 {
            // |n,+> has one extra excitation, |n,-> none
            assert_eq!(&n_op * ket(0, n), ket(0, n) * real((n + 1) as f64));
            assert_eq!(&n_op * ket(1, n), ket(1, n) * real(n as f64));
        }
        assert_eq!(&parity * ket(1, 0), ket(1, 0));
        assert_eq!(&parity * &parity, identity(10));
    }

    #[test]
    fn parity_without_qubit() {
        let (n_op, parity) = parity_number(FockSpace::new(4).unwrap(), false);
        assert_eq!(n_op, diagonal([0.0, 1.0, 2.0, 3.0]));
        assert_eq!(parity, diagonal([1.0, -1.0, 1.0, -1.0]));
    }
}
