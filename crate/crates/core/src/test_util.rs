use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::numkernel::{c64, real, ComplexMatrix};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_matrix(r: &mut impl Rng, rows: usize, cols: usize) -> ComplexMatrix {
    ComplexMatrix::from_fn(rows, cols, |_, _| {
        c64(r.random_range(-1.0..1.0), r.random_range(-1.0..1.0))
    })
}

pub fn random_hermitian(r: &mut impl Rng, n: usize) -> ComplexMatrix {
    let m = random_matrix(r, n, n);
    (&m + m.adjoint()) * real(0.5)
}

pub fn random_anti_hermitian(r: &mut impl Rng, n: usize) -> ComplexMatrix {
    let m = random_matrix(r, n, n);
    (&m - m.adjoint()) * real(0.5)
}

pub fn random_unitary(r: &mut impl Rng, n: usize) -> ComplexMatrix {
    random_matrix(r, n, n).qr().q()
}

/// `Q diag(A1, A2) Q^-1` and `Q diag(0, B2) Q^-1` with `A1`, the zero block
/// both `k x k`. `Q` is unitary when `hermitian`, otherwise a conditioned
/// product `U diag(1..2) V`.
pub fn planted_pair(
    r: &mut impl Rng,
    n: usize,
    k: usize,
    hermitian: bool,
) -> (ComplexMatrix, ComplexMatrix, ComplexMatrix) {
    let block = |r: &mut _| {
        if hermitian {
            random_hermitian(r, n)
        } else {
            random_anti_hermitian(r, n) + random_matrix(r, n, n) * real(0.2)
        }
    };
    let mut a = block(r);
    let mut b = block(r);
    for i in 0..n {
        for j in 0..n {
            if (i < k) != (j < k) {
                a[(i, j)] = real(0.0);
                b[(i, j)] = real(0.0);
            }
            if i < k && j < k {
                b[(i, j)] = real(0.0);
            }
        }
    }
    let q = if hermitian {
        random_unitary(r, n)
    } else {
        let s = ComplexMatrix::from_fn(n, n, |i, j| {
            if i == j {
                real(1.0 + i as f64 / (n - 1).max(1) as f64)
            } else {
                real(0.0)
            }
        });
        random_unitary(r, n) * s * random_unitary(r, n)
    };
    let q_inv = q.clone().try_inverse().expect("conditioned");
    (&q * a * &q_inv, &q * b * &q_inv, q)
}
