//! GKSL generators in vectorized form and decoherence-free states.
//!
//! Operators are vectorized by stacking columns, so that
//! `vec(X rho Y) = (Y^T ⊗ X) vec(rho)`. Under this convention
//! `vec(rho)[i + n j] = rho[(i, j)]`, which is also nalgebra's storage order.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::bfree::{compute_m, GeneratorPair, KernelChain, SpaceKind, HAMILTONIAN_TOL};
use crate::error::{Error, Result};
use crate::numkernel::{
    c64, ensure_square, hermitian_eig, hermiticity_error, identity, propagate_grid, real,
    trace, trace_norm_hermitian, ComplexMatrix, ComplexVector, RankTolerance, Subspace,
};
use crate::operators::{root_of_unity, tensor};

/// Tolerance on Hermiticity, unit trace and negativity of density matrices.
pub const STATE_TOL: f64 = 1e-10;

/// Default pass threshold for [`verify_unitary_evolution`].
pub const DEFAULT_VERIFY_TOL: f64 = 1e-8;

#[derive(Clone, Debug)]
pub struct NoiseChannel {
    pub op: ComplexMatrix,
    pub rate: f64,
}

/// `L rho = -i[H_0, rho] + sum_k rate_k (V_k rho V_k^dagger - 1/2 {V_k^dagger V_k, rho})`.
#[derive(Clone, Debug)]
pub struct GkslSpec {
    h0: ComplexMatrix,
    noise: Vec<NoiseChannel>,
}

impl GkslSpec {
    pub fn new(h0: ComplexMatrix, noise: Vec<NoiseChannel>) -> Result<Self> {
        let n = ensure_square(&h0)?;
        if n == 0 {
            return Err(Error::Empty);
        }
        let deviation = hermiticity_error(&h0);
        if deviation > HAMILTONIAN_TOL {
            return Err(Error::NotHermitian { deviation });
        }
        for ch in &noise {
            let k = ensure_square(&ch.op)?;
            if k != n {
                return Err(Error::DimensionMismatch {
                    context: "noise operator vs Hamiltonian",
                    left: k,
                    right: n,
                });
            }
            if !(ch.rate.is_finite() && ch.rate >= 0.0) {
                return Err(Error::InvalidParameter(format!(
                    "noise rates must be finite and nonnegative, got {}",
                    ch.rate
                )));
            }
        }
        Ok(GkslSpec { h0, noise })
    }

    pub fn h0(&self) -> &ComplexMatrix {
        &self.h0
    }

    pub fn noise(&self) -> &[NoiseChannel] {
        &self.noise
    }

    pub fn dim(&self) -> usize {
        self.h0.nrows()
    }
}

/// A validated density matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityMatrix {
    matrix: ComplexMatrix,
}

impl DensityMatrix {
    pub fn new(matrix: ComplexMatrix) -> Result<Self> {
        let n = ensure_square(&matrix)?;
        if n == 0 {
            return Err(Error::Empty);
        }
        let herm = hermiticity_error(&matrix);
        if herm > STATE_TOL {
            return Err(Error::InvalidState(format!(
                "not Hermitian (relative deviation {herm:.3e})"
            )));
        }
        let tr = trace(&matrix);
        if (tr - real(1.0)).norm() > STATE_TOL {
            return Err(Error::InvalidState(format!(
                "trace is {} + {}i, expected 1",
                tr.re, tr.im
            )));
        }
        let min = min_eigenvalue(&matrix)?;
        if min < -STATE_TOL {
            return Err(Error::InvalidState(format!(
                "negative eigenvalue {min:.3e}"
            )));
        }
        Ok(DensityMatrix { matrix })
    }

    /// `|psi><psi| / <psi|psi>`.
    pub fn pure(psi: &ComplexVector) -> Result<Self> {
        let nrm = psi.norm();
        if nrm == 0.0 || !nrm.is_finite() {
            return Err(Error::InvalidState("zero or non-finite state vector".into()));
        }
        let v = psi / real(nrm);
        DensityMatrix::new(&v * v.adjoint())
    }

    pub fn maximally_mixed(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::Empty);
        }
        DensityMatrix::new(identity(n) * real(1.0 / n as f64))
    }

    /// `sum_k p_k |k><k|`.
    pub fn diagonal(populations: &[f64]) -> Result<Self> {
        DensityMatrix::new(ComplexMatrix::from_diagonal(&ComplexVector::from_iterator(
            populations.len(),
            populations.iter().map(|&p| real(p)),
        )))
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> ComplexMatrix {
        self.matrix
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn min_eigenvalue(&self) -> f64 {
        min_eigenvalue(&self.matrix).unwrap_or(f64::NAN)
    }
}

fn min_eigenvalue(m: &ComplexMatrix) -> Result<f64> {
    let h = (m + m.adjoint()) * real(0.5);
    Ok(hermitian_eig(&h)?.values[0])
}

pub fn vectorize(m: &ComplexMatrix) -> ComplexVector {
    ComplexVector::from_column_slice(m.as_slice())
}

pub fn devectorize(v: &ComplexVector, n: usize) -> Result<ComplexMatrix> {
    if v.len() != n * n {
        return Err(Error::DimensionMismatch {
            context: "vectorized operator length vs n squared",
            left: v.len(),
            right: n * n,
        });
    }
    Ok(ComplexMatrix::from_column_slice(n, n, v.as_slice()))
}

/// Matrix of `rho -> x rho y`.
pub fn sandwich(x: &ComplexMatrix, y: &ComplexMatrix) -> ComplexMatrix {
    tensor(&y.transpose(), x)
}

/// Matrix of `rho -> -i[h, rho]`.
pub fn commutator_superop(h: &ComplexMatrix) -> ComplexMatrix {
    let id = identity(h.nrows());
    (sandwich(h, &id) - sandwich(&id, h)) * c64(0.0, -1.0)
}

/// Matrix of `rho -> v rho v^dagger - 1/2 {v^dagger v, rho}`.
pub fn dissipator_superop(v: &ComplexMatrix) -> ComplexMatrix {
    let id = identity(v.nrows());
    let vdv = v.adjoint() * v;
    sandwich(v, &v.adjoint()) - (sandwich(&vdv, &id) + sandwich(&id, &vdv)) * real(0.5)
}

/// `A = L_0` and `B = L_D` as `n^2 x n^2` matrices.
pub fn vectorize_generator(spec: &GkslSpec) -> Result<GeneratorPair> {
    let n = spec.dim();
    let a = commutator_superop(&spec.h0);
    let mut b = ComplexMatrix::zeros(n * n, n * n);
    for ch in &spec.noise {
        b += dissipator_superop(&ch.op) * real(ch.rate);
    }
    GeneratorPair::new(a, b, SpaceKind::DensityOperator { system_dim: n })
}

/// The decoherence-free subspace `M = Ker L_D ∩ Ker L_D L_0 ∩ …` of
/// operator space.
pub fn decoherence_free_subspace(spec: &GkslSpec, tol: RankTolerance) -> Result<KernelChain> {
    compute_m(&vectorize_generator(spec)?, tol)
}

/// A state found in `M`, with the smallest eigenvalue before clipping.
#[derive(Clone, Debug)]
pub struct DfWitness {
    pub state: DensityMatrix,
    pub raw_min_eigenvalue: f64,
}

/// Looks for a density matrix in an operator-space subspace by projecting
/// `I/n` onto it, Hermitizing, clipping eigenvalues in `[-tol, 0)` and
/// renormalizing. `None` means the projection did not yield a state; other
/// states may still exist in `m`.
pub fn find_df_state(m: &Subspace, tol: f64) -> Result<Option<DfWitness>> {
    let n2 = m.ambient_dim();
    let n = (n2 as f64).sqrt().round() as usize;
    if n * n != n2 || n == 0 {
        return Err(Error::DimensionMismatch {
            context: "operator-space ambient dimension is not a square",
            left: n2,
            right: n * n,
        });
    }
    if m.is_zero() {
        return Ok(None);
    }
    let mixed = vectorize(&(identity(n) * real(1.0 / n as f64)));
    let f = m.frame();
    let projected = f * (f.adjoint() * &mixed);
    let raw = devectorize(&projected, n)?;
    let herm = (&raw + raw.adjoint()) * real(0.5);
    let eig = hermitian_eig(&herm)?;
    let raw_min = eig.values[0];
    if raw_min < -tol {
        return Ok(None);
    }
    let clipped: Vec<f64> = eig.values.iter().map(|&v| v.max(0.0)).collect();
    let tr: f64 = clipped.iter().sum();
    if tr <= tol {
        return Ok(None);
    }
    let d = ComplexMatrix::from_diagonal(&ComplexVector::from_iterator(
        n,
        clipped.iter().map(|&v| real(v / tr)),
    ));
    let rho = &eig.vectors * d * eig.vectors.adjoint();
    let rho = (&rho + rho.adjoint()) * real(0.5);
    Ok(Some(DfWitness {
        state: DensityMatrix::new(rho)?,
        raw_min_eigenvalue: raw_min,
    }))
}

#[derive(Clone, Debug, Serialize)]
pub struct VerificationReport {
    pub t_grid: Vec<f64>,
    /// Trace-norm distance between the full and the free evolution.
    pub deviation: Vec<f64>,
    pub energy1: Option<Vec<f64>>,
    pub energy2: Option<Vec<f64>>,
    pub verdict: bool,
    pub tolerance_used: f64,
    /// `|tr rho(t) - 1|` along the full evolution.
    pub trace_error: Vec<f64>,
    /// `||rho(t) - rho(t)^dagger||_F` along the full evolution.
    pub hermiticity_error: Vec<f64>,
}

impl VerificationReport {
    pub fn max_deviation(&self) -> f64 {
        self.deviation.iter().copied().fold(0.0, f64::max)
    }
}

/// Propagates `rho` under the full generator and under `H_0` alone and
/// compares them in trace norm. The verdict requires every deviation, trace
/// error and Hermiticity error to be at most `tol`.
pub fn verify_unitary_evolution(
    spec: &GkslSpec,
    rho: &DensityMatrix,
    t_grid: &[f64],
    tol: f64,
) -> Result<VerificationReport> {
    let n = spec.dim();
    if rho.dim() != n {
        return Err(Error::DimensionMismatch {
            context: "state vs model",
            left: rho.dim(),
            right: n,
        });
    }
    let gen = vectorize_generator(spec)?;
    let x0 = ComplexMatrix::from_column_slice(n * n, 1, rho.matrix().as_slice());
    let full = propagate_grid(&gen.generator(), &x0, t_grid)?;
    let minus_ih = spec.h0() * c64(0.0, -1.0);
    let unitaries = propagate_grid(&minus_ih, &identity(n), t_grid)?;

    let mut deviation = Vec::with_capacity(t_grid.len());
    let mut trace_error = Vec::with_capacity(t_grid.len());
    let mut hermiticity_error = Vec::with_capacity(t_grid.len());
    for (x, u) in full.iter().zip(&unitaries) {
        let rho_t = devectorize(&x.column(0).into_owned(), n)?;
        let free = u * rho.matrix() * u.adjoint();
        deviation.push(trace_norm_hermitian(&(&rho_t - free))?);
        trace_error.push((trace(&rho_t) - real(1.0)).norm());
        hermiticity_error.push((&rho_t - rho_t.adjoint()).norm());
    }
    let verdict = deviation
        .iter()
        .chain(&trace_error)
        .chain(&hermiticity_error)
        .all(|&d| d <= tol);
    Ok(VerificationReport {
        t_grid: t_grid.to_vec(),
        deviation,
        energy1: None,
        energy2: None,
        verdict,
        tolerance_used: tol,
        trace_error,
        hermiticity_error,
    })
}

/// Closed-system check: propagates `psi` under `H_0 + H_I` and under `H_0`
/// and reports `min_phi ||psi_full(t) - e^{i phi} psi_free(t)||`, so the
/// sector phase `e^{-i alpha t}` of an interaction-free state is not counted.
/// With `subsystems = Some((h1, h2))` the energies of both factors along the
/// full trajectory are included.
pub fn verify_closed_evolution(
    h0: &ComplexMatrix,
    h_i: &ComplexMatrix,
    psi: &ComplexVector,
    subsystems: Option<(&ComplexMatrix, &ComplexMatrix)>,
    t_grid: &[f64],
    tol: f64,
) -> Result<VerificationReport> {
    let gen = GeneratorPair::from_hamiltonians(h0, h_i)?;
    if psi.len() != gen.dim() {
        return Err(Error::DimensionMismatch {
            context: "state vs model",
            left: psi.len(),
            right: gen.dim(),
        });
    }
    let nrm = psi.norm();
    if nrm == 0.0 || !nrm.is_finite() {
        return Err(Error::InvalidState("zero or non-finite state vector".into()));
    }
    let x0 = ComplexMatrix::from_column_slice(psi.len(), 1, (psi / real(nrm)).as_slice());
    let full = propagate_grid(&gen.generator(), &x0, t_grid)?;
    let free = propagate_grid(gen.a(), &x0, t_grid)?;

    let mut deviation = Vec::with_capacity(t_grid.len());
    let mut trace_error = Vec::with_capacity(t_grid.len());
    let mut states = Vec::with_capacity(t_grid.len());
    for (p, q) in full.iter().zip(&free) {
        let p = p.column(0).into_owned();
        let q = q.column(0).into_owned();
        let overlap = q.dotc(&p);
        let phase = if overlap.norm() > 0.0 {
            overlap / overlap.norm()
        } else {
            real(1.0)
        };
        deviation.push((&p - &q * phase).norm());
        trace_error.push((p.norm_squared() - 1.0).abs());
        states.push(p);
    }
    let (energy1, energy2) = match subsystems {
        Some((h1, h2)) => {
            let (e1, e2) = energy_curves(h1, h2, &states)?;
            (Some(e1), Some(e2))
        }
        None => (None, None),
    };
    let verdict = deviation.iter().chain(&trace_error).all(|&d| d <= tol);
    Ok(VerificationReport {
        t_grid: t_grid.to_vec(),
        hermiticity_error: vec![0.0; deviation.len()],
        deviation,
        energy1,
        energy2,
        verdict,
        tolerance_used: tol,
        trace_error,
    })
}

/// `E_1(t) = <psi|h1 ⊗ I|psi>`, `E_2(t) = <psi|I ⊗ h2|psi>`.
pub fn energy_curves(
    h1: &ComplexMatrix,
    h2: &ComplexMatrix,
    psi_t: &[ComplexVector],
) -> Result<(Vec<f64>, Vec<f64>)> {
    let d1 = ensure_square(h1)?;
    let d2 = ensure_square(h2)?;
    let big1 = tensor(h1, &identity(d2));
    let big2 = tensor(&identity(d1), h2);
    let mut e1 = Vec::with_capacity(psi_t.len());
    let mut e2 = Vec::with_capacity(psi_t.len());
    for psi in psi_t {
        if psi.len() != d1 * d2 {
            return Err(Error::DimensionMismatch {
                context: "state vs product of subsystem dimensions",
                left: psi.len(),
                right: d1 * d2,
            });
        }
        e1.push(psi.dotc(&(&big1 * psi)).re);
        e2.push(psi.dotc(&(&big2 * psi)).re);
    }
    Ok((e1, e2))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "model", rename_all = "snake_case")]
pub enum DephasingParams {
    /// `H_0 = sum_{n>=1} E_n P_n`, `L_D rho = sum_{n>=1} gamma_n (U_{n0} rho U_{n0}^dagger - rho)`.
    /// `gammas[n-1]` is `gamma_n`, `energies[n-1]` is `E_n`; `E_0 = 0`.
    WeylQudit {
        d: usize,
        gammas: Vec<f64>,
        energies: Vec<f64>,
    },
    /// `H_0 = omega N`, `L_D rho = gamma (N rho N - 1/2 {N^2, rho})`.
    PhaseDamping { omega: f64, gamma: f64, dim: usize },
}

impl DephasingParams {
    pub fn dim(&self) -> usize {
        match self {
            DephasingParams::WeylQudit { d, .. } => *d,
            DephasingParams::PhaseDamping { dim, .. } => *dim,
        }
    }
}

/// `rho_kl(t) / rho_kl(0)` for the exactly solvable dephasing models,
/// including the free phase `e^{-i(E_k - E_l)t}`.
pub fn dephasing_factor(params: &DephasingParams, k: usize, l: usize, t: f64) -> Result<Complex64> {
    let dim = params.dim();
    if k >= dim || l >= dim {
        return Err(Error::InvalidParameter(format!(
            "indices ({k}, {l}) out of range for dimension {dim}"
        )));
    }
    if k == l {
        return Ok(real(1.0));
    }
    let exponent = match params {
        DephasingParams::WeylQudit { d, gammas, energies } => {
            let level = |i: usize| if i == 0 { 0.0 } else { energies.get(i - 1).copied().unwrap_or(0.0) };
            let diff = k as i64 - l as i64;
            let decay: Complex64 = gammas
                .iter()
                .enumerate()
                .map(|(i, &g)| (root_of_unity(*d, (i as i64 + 1) * diff) - real(1.0)) * g)
                .sum();
            decay + c64(0.0, -(level(k) - level(l)))
        }
        DephasingParams::PhaseDamping { omega, gamma, .. } => {
            let diff = k as f64 - l as f64;
            c64(-0.5 * diff * diff * gamma, -omega * diff)
        }
    };
    Ok((exponent * t).exp())
}
