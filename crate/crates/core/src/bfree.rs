//! B-free subspaces of a split generator `L = A + B`.
//!
//! A vector `x` is B-free when `e^{t(A+B)} x = e^{tA} x` for all `t`. The set
//! of such vectors is the kernel chain
//!
//! ```text
//! M = Ker B ∩ Ker BA ∩ Ker BA² ∩ …
//! ```
//!
//! which is the largest `A`-invariant subspace contained in `Ker B` (the
//! unobservable subspace of the pair). It is computed here by invariant
//! refinement, `W_0 = Ker B`, `W_{k+1} = {x ∈ W_k : A x ∈ W_k}`, which
//! produces exactly the chain sets `W_k = Ker B ∩ … ∩ Ker BA^k` without ever
//! forming powers of `A`.
//!
//! For Hamiltonian splittings `H = H_0 + H_I` the same routine runs once per
//! eigenvalue `alpha` of `H_I` with `B = -i(H_I - alpha)`, giving the sectors
//! `M_alpha` of interaction-free states that pick up the phase
//! `e^{-i alpha t}`.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::numkernel::{
    c64, commutator, common_eigenvector, ensure_square, expm, hermitian_eig, hermiticity_error,
    identity, kernel_with_gap, principal_angles, propagate_grid, real, spectral_norm,
    ComplexMatrix, ComplexVector, RankTolerance, Subspace,
};

/// Relative non-Hermiticity accepted for Hamiltonians.
pub const HAMILTONIAN_TOL: f64 = 1e-10;

/// Largest principal angle tolerated when checking that a subspace lies
/// inside a computed `M`.
pub const CONTAINMENT_ANGLE: f64 = 1e-6;

/// Multiplier on the estimated rounding level when rank is decided
/// automatically.
const NOISE_SAFETY: f64 = 10.0;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SpaceKind {
    /// Vectors of the underlying space.
    StateVector,
    /// Column-stacked operators on a `system_dim`-dimensional space.
    DensityOperator { system_dim: usize },
}

/// The split `L = A + B` of a linear generator.
#[derive(Clone, Debug)]
pub struct GeneratorPair {
    a: ComplexMatrix,
    b: ComplexMatrix,
    kind: SpaceKind,
}

impl GeneratorPair {
    pub fn new(a: ComplexMatrix, b: ComplexMatrix, kind: SpaceKind) -> Result<Self> {
        let n = ensure_square(&a)?;
        let nb = ensure_square(&b)?;
        if n == 0 {
            return Err(Error::Empty);
        }
        if n != nb {
            return Err(Error::DimensionMismatch {
                context: "generator pair",
                left: n,
                right: nb,
            });
        }
        if let SpaceKind::DensityOperator { system_dim } = kind {
            if system_dim * system_dim != n {
                return Err(Error::DimensionMismatch {
                    context: "operator-space generator (expected system_dim squared)",
                    left: system_dim * system_dim,
                    right: n,
                });
            }
        }
        Ok(GeneratorPair { a, b, kind })
    }

    /// `A = -i H_0`, `B = -i H_I` acting on state vectors.
    pub fn from_hamiltonians(h0: &ComplexMatrix, h_i: &ComplexMatrix) -> Result<Self> {
        check_hermitian(h0)?;
        check_hermitian(h_i)?;
        let minus_i = c64(0.0, -1.0);
        GeneratorPair::new(h0 * minus_i, h_i * minus_i, SpaceKind::StateVector)
    }

    pub fn a(&self) -> &ComplexMatrix {
        &self.a
    }

    pub fn b(&self) -> &ComplexMatrix {
        &self.b
    }

    pub fn kind(&self) -> SpaceKind {
        self.kind
    }

    pub fn dim(&self) -> usize {
        self.a.nrows()
    }

    /// `A + B`.
    pub fn generator(&self) -> ComplexMatrix {
        &self.a + &self.b
    }

    /// The pair with `B` replaced by `B + i alpha`, i.e. `H_I` replaced by
    /// `H_I - alpha` for a Hamiltonian pair. States B-free for the shifted
    /// pair evolve as `e^{-i alpha t} e^{tA} x` under the original one.
    pub fn shifted(&self, alpha: f64) -> Self {
        GeneratorPair {
            a: self.a.clone(),
            b: &self.b + identity(self.dim()) * c64(0.0, alpha),
            kind: self.kind,
        }
    }
}

fn check_hermitian(h: &ComplexMatrix) -> Result<()> {
    ensure_square(h)?;
    let deviation = hermiticity_error(h);
    if deviation > HAMILTONIAN_TOL {
        return Err(Error::NotHermitian { deviation });
    }
    Ok(())
}

/// Result of a kernel-chain computation.
#[derive(Clone, Debug)]
pub struct KernelChain {
    pub subspace: Subspace,
    /// `dim W_0, dim W_1, …`; the last entry repeats the previous one once the
    /// chain has stabilized (or is zero).
    pub chain_dims: Vec<usize>,
    /// Singular-value cutoff used at each step, for auditing borderline ranks.
    pub cutoffs: Vec<f64>,
}

/// Rank decisions along a sequence of restricted kernels. In automatic mode
/// it carries an estimate of how far the current frame may sit from the
/// exact subspace (rounding divided by the spectral gap, accumulated over
/// steps), and sets each cutoff a safety factor above the noise this induces.
struct RankTracker {
    tol: RankTolerance,
    ambient: usize,
    frame_err: f64,
}

impl RankTracker {
    fn new(tol: RankTolerance, ambient: usize) -> Self {
        RankTracker {
            tol,
            ambient,
            frame_err: 0.0,
        }
    }

    fn cutoff(&self, scale: f64) -> f64 {
        match self.tol {
            RankTolerance::Explicit(v) => v,
            RankTolerance::Automatic => {
                NOISE_SAFETY * scale * (self.frame_err + f64::EPSILON * self.ambient as f64)
            }
        }
    }

    /// Coefficients `c` with `image * c ≈ 0`, lifted through `basis`.
    fn restrict(
        &mut self,
        basis: &Subspace,
        image: &ComplexMatrix,
        scale: f64,
    ) -> Result<(Subspace, f64)> {
        let cutoff = self.cutoff(scale);
        let (coeffs, gap) = kernel_with_gap(image, |_| cutoff)?;
        if let Some(g) = gap {
            self.frame_err += cutoff / NOISE_SAFETY / g;
        }
        Ok((basis.lift(&coeffs), cutoff))
    }
}

/// The B-free subspace `M` of a generator pair.
pub fn compute_m(gen: &GeneratorPair, tol: RankTolerance) -> Result<KernelChain> {
    let n = gen.dim();
    let b_scale = spectral_norm(&gen.b);
    let first_cutoff = tol.resolve(n, n, b_scale);
    let (ker_b, gap) = kernel_with_gap(&gen.b, |_| first_cutoff)?;
    let mut tracker = RankTracker::new(tol, n);
    if let Some(g) = gap {
        tracker.frame_err = f64::EPSILON * n as f64 * b_scale / g;
    }
    refine_invariant(ker_b, first_cutoff, &gen.a, tracker)
}

/// Shrinks `start` to its largest `a`-invariant subspace.
fn refine_invariant(
    start: Subspace,
    first_cutoff: f64,
    a: &ComplexMatrix,
    mut tracker: RankTracker,
) -> Result<KernelChain> {
    let n = a.nrows();
    let a_scale = spectral_norm(a);
    let mut chain_dims = vec![start.dim()];
    let mut cutoffs = vec![first_cutoff];
    let mut current = start;
    for _ in 1..n.max(2) {
        if current.is_zero() {
            break;
        }
        let leak = current.reject(&(a * current.frame()));
        let (next, cutoff) = tracker.restrict(&current, &leak, a_scale)?;
        chain_dims.push(next.dim());
        cutoffs.push(cutoff);
        let stable = next.dim() == current.dim();
        current = next;
        if stable {
            break;
        }
    }
    Ok(KernelChain {
        subspace: current,
        chain_dims,
        cutoffs,
    })
}

/// Outcome of the common-eigenvector test.
#[derive(Clone, Debug)]
pub struct ShemeshReport {
    pub nontrivial: bool,
    /// `∩_{k,l} Ker [A^k, B^l]` over the powers actually examined.
    pub subspace: Subspace,
    pub witness: Option<ComplexVector>,
    pub eigenvalue_a: Option<Complex64>,
    pub eigenvalue_b: Option<Complex64>,
    /// `max(||A w - a w||, ||B w - b w||)` for the witness.
    pub witness_residual: Option<f64>,
    /// Largest `(k, l)` reached before the intersection was certified final.
    pub powers_examined: (usize, usize),
}

/// Tests whether `A` and `B` share an eigenvector by computing
/// `N = ∩_{k,l=1}^{max_power} Ker [A^k, B^l]`, with both matrices scaled to
/// unit spectral norm first.
///
/// `N` is `A`- and `B`-invariant with `A`, `B` commuting on it, and every
/// subspace with those properties lies inside `N`. So as soon as the running
/// intersection has those properties it cannot shrink further, and the loop
/// over powers stops early.
pub fn shemesh_nontrivial(
    gen: &GeneratorPair,
    max_power: usize,
    tol: RankTolerance,
) -> Result<ShemeshReport> {
    let n = gen.dim();
    if max_power > n.saturating_sub(1) {
        return Err(Error::InvalidParameter(format!(
            "max_power must not exceed n - 1 = {}, got {max_power}",
            n.saturating_sub(1)
        )));
    }
    let normalized = |m: &ComplexMatrix| {
        let s = spectral_norm(m);
        if s > 0.0 {
            m * real(1.0 / s)
        } else {
            m.clone()
        }
    };
    let a_hat = normalized(&gen.a);
    let b_hat = normalized(&gen.b);

    let mut tracker = RankTracker::new(tol, n);
    let mut current = Subspace::full(n);
    let mut examined = (0, 0);
    let mut a_pow = identity(n);
    'powers: for k in 1..=max_power {
        a_pow = &a_pow * &a_hat;
        let mut b_pow = identity(n);
        for l in 1..=max_power {
            if current.is_zero() || is_commuting_invariant(&current, &a_hat, &b_hat, &tracker) {
                break 'powers;
            }
            b_pow = &b_pow * &b_hat;
            let comm = commutator(&a_pow, &b_pow);
            if !comm.iter().all(|z| z.re.is_finite() && z.im.is_finite()) {
                return Err(Error::numerical(
                    "shemesh_nontrivial",
                    (n, n),
                    format!("powers overflowed at (k, l) = ({k}, {l}); pass an explicit tolerance and a smaller max_power"),
                ));
            }
            let scale = 2.0 * spectral_norm(&a_pow) * spectral_norm(&b_pow);
            let image = &comm * current.frame();
            current = tracker.restrict(&current, &image, scale)?.0;
            examined = (k, l);
        }
    }

    if current.is_zero() {
        return Ok(ShemeshReport {
            nontrivial: false,
            subspace: current,
            witness: None,
            eigenvalue_a: None,
            eigenvalue_b: None,
            witness_residual: None,
            powers_examined: examined,
        });
    }
    let f = current.frame();
    let a_r = f.adjoint() * &gen.a * f;
    let b_r = f.adjoint() * &gen.b * f;
    let (coeffs, alpha, beta) = common_eigenvector(&a_r, &b_r)?;
    let w = f * coeffs;
    let residual = (&gen.a * &w - &w * alpha)
        .norm()
        .max((&gen.b * &w - &w * beta).norm());
    Ok(ShemeshReport {
        nontrivial: true,
        subspace: current,
        witness: Some(w),
        eigenvalue_a: Some(alpha),
        eigenvalue_b: Some(beta),
        witness_residual: Some(residual),
        powers_examined: examined,
    })
}

fn is_commuting_invariant(
    s: &Subspace,
    a: &ComplexMatrix,
    b: &ComplexMatrix,
    tracker: &RankTracker,
) -> bool {
    let f = s.frame();
    let bound = match tracker.tol {
        RankTolerance::Explicit(v) => v,
        RankTolerance::Automatic => tracker.cutoff(2.0),
    };
    spectral_norm(&s.reject(&(a * f))) <= bound
        && spectral_norm(&s.reject(&(b * f))) <= bound
        && spectral_norm(&(commutator(a, b) * f)) <= bound
}

/// One interaction-eigenvalue sector `M_alpha`.
#[derive(Clone, Debug)]
pub struct Sector {
    pub alpha: f64,
    pub subspace: Subspace,
    /// `H_0` restricted to the sector, in the sector's frame.
    pub restricted_free: ComplexMatrix,
    pub chain_dims: Vec<usize>,
}

#[derive(Clone, Debug)]
pub struct SectorDecomposition {
    pub sectors: Vec<Sector>,
    pub ambient_dim: usize,
}

impl SectorDecomposition {
    pub fn eigenvalues(&self) -> Vec<f64> {
        self.sectors.iter().map(|s| s.alpha).collect()
    }

    pub fn total_dim(&self) -> usize {
        self.sectors.iter().map(|s| s.subspace.dim()).sum()
    }

    /// `M_{alpha_1} ⊕ … ⊕ M_{alpha_n}` as one subspace.
    pub fn direct_sum(&self) -> Result<Subspace> {
        let mut frame = ComplexMatrix::zeros(self.ambient_dim, self.total_dim());
        let mut col = 0;
        for s in &self.sectors {
            frame
                .columns_mut(col, s.subspace.dim())
                .copy_from(s.subspace.frame());
            col += s.subspace.dim();
        }
        Subspace::span(&frame, RankTolerance::Automatic)
    }

    pub fn sector_for(&self, alpha: f64, tol: f64) -> Option<&Sector> {
        self.sectors.iter().find(|s| (s.alpha - alpha).abs() <= tol)
    }
}

/// Groups sorted eigenvalues into clusters whose consecutive gaps are at
/// most `tol`; returns index ranges.
fn cluster(values: &[f64], tol: f64) -> Vec<std::ops::Range<usize>> {
    let mut out = Vec::new();
    let mut start = 0;
    for i in 1..=values.len() {
        if i == values.len() || values[i] - values[i - 1] > tol {
            out.push(start..i);
            start = i;
        }
    }
    out
}

/// Splits the interaction-free subspace of `H = H_0 + H_I` by the eigenvalue
/// of `H_I`. For each clustered eigenvalue `alpha` the chain starts from the
/// eigenspace `Ker(H_I - alpha)` and is refined to its largest
/// `H_0`-invariant subspace. Empty sectors are dropped.
///
/// `cluster_tol` defaults to `1e-8 * ||H_I||`.
pub fn sector_decompose(
    h0: &ComplexMatrix,
    h_i: &ComplexMatrix,
    cluster_tol: Option<f64>,
) -> Result<SectorDecomposition> {
    let gen = GeneratorPair::from_hamiltonians(h0, h_i)?;
    let n = gen.dim();
    let eig = hermitian_eig(h_i)?;
    let h_i_norm = eig.values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let tol = cluster_tol.unwrap_or(1e-8 * h_i_norm);
    let clusters = cluster(&eig.values, tol);

    let mut sectors = Vec::new();
    for (c, range) in clusters.iter().enumerate() {
        let members = &eig.values[range.clone()];
        let alpha = members.iter().sum::<f64>() / members.len() as f64;
        let spread = members.last().unwrap() - members.first().unwrap();
        let below = (c > 0).then(|| eig.values[range.start] - eig.values[range.start - 1]);
        let above = (range.end < n).then(|| eig.values[range.end] - eig.values[range.end - 1]);
        let gap = below.into_iter().chain(above).fold(f64::INFINITY, f64::min);

        let start = Subspace::from_frame_unchecked(eig.vectors.columns(range.start, range.len()).into_owned());
        let mut tracker = RankTracker::new(RankTolerance::Automatic, n);
        if gap.is_finite() {
            tracker.frame_err = (f64::EPSILON * n as f64 * h_i_norm + spread) / gap;
        }
        let chain = refine_invariant(start, tol, h0, tracker)?;
        if chain.subspace.is_zero() {
            continue;
        }
        let f = chain.subspace.frame();
        let restricted_free = f.adjoint() * h0 * f;
        sectors.push(Sector {
            alpha,
            subspace: chain.subspace,
            restricted_free,
            chain_dims: chain.chain_dims,
        });
    }
    Ok(SectorDecomposition {
        sectors,
        ambient_dim: n,
    })
}

/// Per-time deviations of the interaction-picture and `A`-picture checks.
#[derive(Clone, Debug)]
pub struct PictureReport {
    pub t_grid: Vec<f64>,
    /// `|| e^{-tA} B e^{tA} F ||_2`
    pub interaction_deviation: Vec<f64>,
    /// `|| (e^{-tB} A e^{tB} - A) F ||_2`
    pub free_deviation: Vec<f64>,
    pub tolerance: f64,
    pub passed: bool,
}

impl PictureReport {
    pub fn max_interaction_deviation(&self) -> f64 {
        self.interaction_deviation.iter().copied().fold(0.0, f64::max)
    }

    pub fn max_free_deviation(&self) -> f64 {
        self.free_deviation.iter().copied().fold(0.0, f64::max)
    }
}

/// Errors unless `m` lies inside the B-free subspace of `gen`.
pub fn ensure_inside_m(gen: &GeneratorPair, m: &Subspace) -> Result<()> {
    if m.ambient_dim() != gen.dim() {
        return Err(Error::DimensionMismatch {
            context: "subspace vs generator",
            left: m.ambient_dim(),
            right: gen.dim(),
        });
    }
    if m.is_zero() {
        return Ok(());
    }
    let full = compute_m(gen, RankTolerance::Automatic)?.subspace;
    if m.dim() > full.dim() {
        return Err(Error::Precondition(format!(
            "subspace of dimension {} cannot lie in M of dimension {}",
            m.dim(),
            full.dim()
        )));
    }
    let worst = principal_angles(m, &full)?
        .last()
        .copied()
        .unwrap_or(0.0);
    if worst > CONTAINMENT_ANGLE {
        return Err(Error::Precondition(format!(
            "subspace is not inside M (largest principal angle {worst:.3e})"
        )));
    }
    Ok(())
}

/// Checks that `B(t) = e^{-tA} B e^{tA}` vanishes on `m` and that
/// `A(t) = e^{-tB} A e^{tB}` agrees with `A` there, at every grid time.
pub fn verify_picture_invariance(
    gen: &GeneratorPair,
    m: &Subspace,
    t_grid: &[f64],
    tol: f64,
) -> Result<PictureReport> {
    ensure_inside_m(gen, m)?;
    let f = m.frame();
    let mut interaction_deviation = Vec::with_capacity(t_grid.len());
    let mut free_deviation = Vec::with_capacity(t_grid.len());
    for &t in t_grid {
        if m.is_zero() {
            interaction_deviation.push(0.0);
            free_deviation.push(0.0);
            continue;
        }
        let ea = expm(&(gen.a() * real(t)))?;
        let ea_inv = expm(&(gen.a() * real(-t)))?;
        let b_t = &ea_inv * (gen.b() * (&ea * f));
        interaction_deviation.push(spectral_norm(&b_t));

        let eb = expm(&(gen.b() * real(t)))?;
        let eb_inv = expm(&(gen.b() * real(-t)))?;
        let a_t = &eb_inv * (gen.a() * (&eb * f)) - gen.a() * f;
        free_deviation.push(spectral_norm(&a_t));
    }
    let passed = interaction_deviation
        .iter()
        .chain(&free_deviation)
        .all(|&d| d <= tol);
    Ok(PictureReport {
        t_grid: t_grid.to_vec(),
        interaction_deviation,
        free_deviation,
        tolerance: tol,
        passed,
    })
}

#[derive(Clone, Debug)]
pub struct Restriction {
    /// `|| (AB - BA) F ||_2`
    pub commutator_norm: f64,
    /// `F^dagger A F`
    pub restricted_a: ComplexMatrix,
    /// `F^dagger B F`
    pub restricted_b: ComplexMatrix,
}

/// `A` and `B` restricted to a subspace of `M`, where they commute.
pub fn restriction_commutes(gen: &GeneratorPair, m: &Subspace) -> Result<Restriction> {
    ensure_inside_m(gen, m)?;
    let f = m.frame();
    Ok(Restriction {
        commutator_norm: spectral_norm(&(commutator(gen.a(), gen.b()) * f)),
        restricted_a: f.adjoint() * gen.a() * f,
        restricted_b: f.adjoint() * gen.b() * f,
    })
}

/// `|| e^{t(A+B)} x - e^{tA} x ||` at each grid time, for every column of `x`
/// (the largest column deviation is reported).
pub fn propagation_deviation(
    gen: &GeneratorPair,
    x: &ComplexMatrix,
    t_grid: &[f64],
) -> Result<Vec<f64>> {
    let full = propagate_grid(&gen.generator(), x, t_grid)?;
    let free = propagate_grid(gen.a(), x, t_grid)?;
    Ok(full
        .iter()
        .zip(&free)
        .map(|(p, q)| {
            (p - q)
                .column_iter()
                .map(|c| c.norm())
                .fold(0.0, f64::max)
        })
        .collect())
}

/// Uniform grid of `steps` points on `[0, t_max]`.
pub fn uniform_grid(t_max: f64, steps: usize) -> Vec<f64> {
    match steps {
        0 => Vec::new(),
        1 => vec![0.0],
        _ => (0..steps)
            .map(|i| t_max * i as f64 / (steps - 1) as f64)
            .collect(),
    }
}
