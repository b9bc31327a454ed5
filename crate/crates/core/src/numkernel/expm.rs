//! Matrix exponential.
//!
//! General inputs go through scaling and squaring with a diagonal Padé
//! approximant (orders 3, 5, 7, 9 or 13 chosen from the 1-norm). Hermitian and
//! anti-Hermitian inputs use the spectral formula instead, which keeps
//! propagators unitary to working precision.

use super::{
    ensure_square, hermitian_eig, identity, is_anti_hermitian, is_hermitian, real, ComplexMatrix,
    HERMITIAN_TOL,
};
use crate::error::{Error, Result};

const THETA_3: f64 = 1.495585217958292e-2;
const THETA_5: f64 = 2.539398330063230e-1;
const THETA_7: f64 = 9.504178996162932e-1;
const THETA_9: f64 = 2.097847961257068;
const THETA_13: f64 = 5.371920351148152;

const B3: [f64; 4] = [120.0, 60.0, 12.0, 1.0];
const B5: [f64; 6] = [30240.0, 15120.0, 3360.0, 420.0, 30.0, 1.0];
const B7: [f64; 8] = [
    17297280.0, 8648640.0, 1995840.0, 277200.0, 25200.0, 1512.0, 56.0, 1.0,
];
const B9: [f64; 10] = [
    17643225600.0,
    8821612800.0,
    2075673600.0,
    302702400.0,
    30270240.0,
    2162160.0,
    110880.0,
    3960.0,
    90.0,
    1.0,
];
const B13: [f64; 14] = [
    64764752532480000.0,
    32382376266240000.0,
    7771770303897600.0,
    1187353796428800.0,
    129060195264000.0,
    10559470521600.0,
    670442572800.0,
    33522128640.0,
    1323241920.0,
    40840800.0,
    960960.0,
    16380.0,
    182.0,
    1.0,
];

/// `e^m`. Dispatches to [`expm_spectral`] when `m` is Hermitian or
/// anti-Hermitian within [`HERMITIAN_TOL`], otherwise [`expm_pade`].
pub fn expm(m: &ComplexMatrix) -> Result<ComplexMatrix> {
    ensure_square(m)?;
    if is_hermitian(m, HERMITIAN_TOL) || is_anti_hermitian(m, HERMITIAN_TOL) {
        if let Some(e) = expm_spectral(m)? {
            return Ok(e);
        }
    }
    expm_pade(m)
}

/// Spectral exponential for (anti-)Hermitian input; `None` for anything else.
pub fn expm_spectral(m: &ComplexMatrix) -> Result<Option<ComplexMatrix>> {
    let n = ensure_square(m)?;
    if n == 0 {
        return Ok(Some(m.clone()));
    }
    if is_hermitian(m, HERMITIAN_TOL) {
        let eig = hermitian_eig(&((m + m.adjoint()) * real(0.5)))?;
        let phases = eig.values.iter().map(|&l| real(l.exp()));
        return Ok(Some(reassemble(&eig.vectors, phases)));
    }
    if is_anti_hermitian(m, HERMITIAN_TOL) {
        // m = -i h with h = i m Hermitian, so e^m = V diag(e^{-i lambda}) V^dagger
        let h = (m - m.adjoint()) * super::c64(0.0, 0.5);
        let eig = hermitian_eig(&h)?;
        let phases = eig
            .values
            .iter()
            .map(|&l| num_complex::Complex64::from_polar(1.0, -l));
        return Ok(Some(reassemble(&eig.vectors, phases)));
    }
    Ok(None)
}

fn reassemble(
    vectors: &ComplexMatrix,
    diag: impl Iterator<Item = num_complex::Complex64>,
) -> ComplexMatrix {
    let mut scaled = vectors.clone();
    for (j, d) in diag.enumerate() {
        for z in scaled.column_mut(j).iter_mut() {
            *z *= d;
        }
    }
    scaled * vectors.adjoint()
}

fn one_norm(m: &ComplexMatrix) -> f64 {
    m.column_iter()
        .map(|c| c.iter().map(|z| z.norm()).sum::<f64>())
        .fold(0.0, f64::max)
}

fn poly(coeffs: &[f64], powers: &[&ComplexMatrix], eye: &ComplexMatrix) -> ComplexMatrix {
    let mut acc = eye * real(coeffs[0]);
    for (c, p) in coeffs[1..].iter().zip(powers) {
        acc += *p * real(*c);
    }
    acc
}

/// Scaling and squaring with a diagonal Padé approximant, for any square
/// matrix.
pub fn expm_pade(m: &ComplexMatrix) -> Result<ComplexMatrix> {
    let n = ensure_square(m)?;
    if n == 0 {
        return Ok(m.clone());
    }
    if !m.iter().all(|z| z.re.is_finite() && z.im.is_finite()) {
        return Err(Error::numerical("expm", (n, n), "non-finite entries"));
    }
    let eye = identity(n);
    let norm = one_norm(m);
    if norm == 0.0 {
        return Ok(eye);
    }

    let low_order = [(THETA_3, &B3[..]), (THETA_5, &B5[..]), (THETA_7, &B7[..]), (THETA_9, &B9[..])];
    for (theta, b) in low_order {
        if norm <= theta {
            let (u, v) = low_order_terms(m, b, &eye);
            return solve_pade(&u, &v, n);
        }
    }

    let s = (norm / THETA_13).log2().ceil().max(0.0) as i32;
    let a = m * real(0.5f64.powi(s));
    let a2 = &a * &a;
    let a4 = &a2 * &a2;
    let a6 = &a4 * &a2;
    let b = &B13;
    let inner_u = &a6 * (&a6 * real(b[13]) + &a4 * real(b[11]) + &a2 * real(b[9]));
    let u = &a
        * (inner_u
            + &a6 * real(b[7])
            + &a4 * real(b[5])
            + &a2 * real(b[3])
            + &eye * real(b[1]));
    let inner_v = &a6 * (&a6 * real(b[12]) + &a4 * real(b[10]) + &a2 * real(b[8]));
    let v = inner_v + &a6 * real(b[6]) + &a4 * real(b[4]) + &a2 * real(b[2]) + &eye * real(b[0]);
    let mut r = solve_pade(&u, &v, n)?;
    for _ in 0..s {
        r = &r * &r;
    }
    if !r.iter().all(|z| z.re.is_finite() && z.im.is_finite()) {
        return Err(Error::numerical("expm", (n, n), "overflow while squaring"));
    }
    Ok(r)
}

fn low_order_terms(
    m: &ComplexMatrix,
    b: &[f64],
    eye: &ComplexMatrix,
) -> (ComplexMatrix, ComplexMatrix) {
    let a2 = m * m;
    let mut even_powers = vec![a2.clone()];
    while even_powers.len() < b.len() / 2 - 1 {
        let next = even_powers.last().unwrap() * &a2;
        even_powers.push(next);
    }
    let refs: Vec<&ComplexMatrix> = even_powers.iter().collect();
    let odd: Vec<f64> = b.iter().skip(1).step_by(2).copied().collect();
    let even: Vec<f64> = b.iter().step_by(2).copied().collect();
    let u = m * poly(&odd, &refs, eye);
    let v = poly(&even, &refs, eye);
    (u, v)
}

fn solve_pade(u: &ComplexMatrix, v: &ComplexMatrix, n: usize) -> Result<ComplexMatrix> {
    let p = v + u;
    let q = v - u;
    q.lu()
        .solve(&p)
        .ok_or_else(|| Error::numerical("expm", (n, n), "singular Padé denominator"))
}

/// `e^{t m} x` for every `t` in the grid. Ascending grids are walked step by
/// step, reusing the step propagator while the spacing is constant; other
/// grids get one exponential per point.
pub fn propagate_grid(
    m: &ComplexMatrix,
    x: &ComplexMatrix,
    t_grid: &[f64],
) -> Result<Vec<ComplexMatrix>> {
    let n = ensure_square(m)?;
    if x.nrows() != n {
        return Err(Error::DimensionMismatch {
            context: "propagate_grid",
            left: n,
            right: x.nrows(),
        });
    }
    let ascending = t_grid.windows(2).all(|w| w[0] <= w[1]);
    let mut out = Vec::with_capacity(t_grid.len());
    if !ascending {
        for &t in t_grid {
            out.push(expm(&(m * real(t)))? * x);
        }
        return Ok(out);
    }
    let mut step: Option<(f64, ComplexMatrix)> = None;
    let mut prev_t = 0.0;
    let mut state = x.clone();
    for &t in t_grid {
        let dt = t - prev_t;
        if dt != 0.0 {
            let reuse = matches!(&step, Some((h, _)) if (h - dt).abs() <= 1e-12 * dt.abs().max(1e-300));
            if !reuse {
                step = Some((dt, expm(&(m * real(dt)))?));
            }
            state = &step.as_ref().expect("step set above").1 * &state;
            if !state.iter().all(|z| z.re.is_finite() && z.im.is_finite()) {
                return Err(Error::numerical("propagate_grid", (n, x.ncols()), format!("overflow at t = {t}")));
            }
        }
        out.push(state.clone());
        prev_t = t;
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use std::f64::consts::PI;

    use super::*;
    use crate::numkernel::{c64, ComplexVector};
    use crate::test_util::{random_anti_hermitian, random_matrix, random_unitary, rng};

    fn diag(values: &[num_complex::Complex64]) -> ComplexMatrix {
        ComplexMatrix::from_diagonal(&ComplexVector::from_column_slice(values))
    }

    #[test]
    fn zero_gives_identity() {
        let e = expm(&ComplexMatrix::zeros(4, 4)).unwrap();
        assert_eq!(e, identity(4));
        assert_eq!(expm_pade(&ComplexMatrix::zeros(4, 4)).unwrap(), identity(4));
    }

    #[test]
    fn scalar_phases() {
        let m = diag(&[c64(0.0, PI), c64(0.0, -PI)]);
        for e in [expm(&m).unwrap(), expm_pade(&m).unwrap()] {
            assert!((e - identity(2) * real(-1.0)).norm() < 1e-12);
        }
    }

    #[test]
    fn rejects_non_square() {
        assert!(matches!(
            expm(&ComplexMatrix::zeros(2, 3)),
            Err(Error::NotSquare { rows: 2, cols: 3 })
        ));
    }

    #[test]
    fn anti_hermitian_exponential_is_unitary() {
        let mut r = rng(7);
        for _ in 0..10 {
            let k = random_anti_hermitian(&mut r, 6) * real(3.0);
            for e in [expm(&k).unwrap(), expm_pade(&k).unwrap()] {
                let dev = (e.adjoint() * &e - identity(6)).norm();
                assert!(dev <= 1e-10, "unitarity deviation {dev:e}");
            }
        }
    }

    #[test]
    fn matches_eigendecomposition_on_normal_matrices() {
        let mut r = rng(19);
        for scale in [0.01, 0.2, 1.0, 3.0, 20.0] {
            let u = random_unitary(&mut r, 6);
            let z: Vec<_> = random_matrix(&mut r, 6, 1)
                .iter()
                .map(|z| z * scale)
                .collect();
            let m = &u * diag(&z) * u.adjoint();
            let oracle = &u * diag(&z.iter().map(|z| z.exp()).collect::<Vec<_>>()) * u.adjoint();
            let e = expm_pade(&m).unwrap();
            let rel = (&e - &oracle).norm() / oracle.norm();
            assert!(rel <= 1e-10, "scale {scale}: relative error {rel:e}");
        }
    }

    #[test]
    fn hermitian_spectral_matches_pade() {
        let mut r = rng(23);
        let k = random_anti_hermitian(&mut r, 5);
        let h = &k * c64(0.0, 1.0);
        let a = expm(&h).unwrap();
        let b = expm_pade(&h).unwrap();
        assert!((&a - &b).norm() / a.norm() < 1e-12);
    }

    #[test]
    fn grid_propagation_matches_direct() {
        let mut r = rng(29);
        let m = random_matrix(&mut r, 4, 4) * real(0.4);
        let x = random_matrix(&mut r, 4, 2);
        let grid: Vec<f64> = (0..=50).map(|i| i as f64 * 0.2).collect();
        let walked = propagate_grid(&m, &x, &grid).unwrap();
        let mut shuffled = grid.clone();
        shuffled.reverse();
        let direct = propagate_grid(&m, &x, &shuffled).unwrap();
        for (i, w) in walked.iter().enumerate() {
            let d = &direct[grid.len() - 1 - i];
            assert!((w - d).norm() <= 1e-10 * d.norm().max(1.0));
        }
    }

    #[test]
    fn nilpotent_is_exact_polynomial() {
        let mut m = ComplexMatrix::zeros(3, 3);
        m[(0, 1)] = real(2.0);
        m[(1, 2)] = real(3.0);
        let e = expm(&m).unwrap();
        let expected = identity(3) + &m + &m * &m * real(0.5);
        assert!((e - expected).norm() < 1e-13);
    }

    mod props {
        use proptest::prelude::*;

        use super::*;

        proptest! {
            #![proptest_config(ProptestConfig::with_cases(32))]

            #[test]
            fn group_law_on_commuting_pairs(seed in any::<u64>(), s in 0.1f64..4.0, t in -3.0f64..3.0) {
                // X and Y are polynomials in one matrix, so they commute
                let mut r = rng(seed);
                let g = random_matrix(&mut r, 5, 5) * real(0.5);
                let x = &g * real(s) + &g * &g * real(0.3);
                let y = &g * real(t) - identity(5) * c64(0.0, 0.7);
                let lhs = expm(&(&x + &y)).unwrap();
                let rhs = expm(&x).unwrap() * expm(&y).unwrap();
                prop_assert!((&lhs - &rhs).norm() <= 1e-9 * lhs.norm());
            }
        }
    }
}
