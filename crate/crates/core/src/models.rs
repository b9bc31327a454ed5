//! Reference models: two closed atom-field systems and three pure-dephasing
//! semigroups, each with a list of checkable structural facts.
//!
//! Basis order is qubit ⊗ mode(s), first factor slowest. Qubit index 0 is
//! the excited state `sigma_z = +1`.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::bfree::{sector_decompose, uniform_grid, SectorDecomposition};
use crate::error::{Error, Result};
use crate::liouville::{
    decoherence_free_subspace, dephasing_factor, devectorize, find_df_state, vectorize,
    vectorize_generator, verify_closed_evolution, verify_unitary_evolution, DensityMatrix,
    DephasingParams, GkslSpec, NoiseChannel,
};
use crate::numkernel::{
    c64, commutator, expm, hermitian_eig, identity, intersect, null_space, real, spectral_norm,
    ComplexMatrix, ComplexVector, RankTolerance, Subspace,
};
use crate::operators::{
    annihilation, diagonal, number, parity_of_diagonal, pauli, tensor, tensor_all, weyl,
    FockSpace, Pauli, WeylIndex,
};

pub const CATALOG: [&str; 5] = [
    "example1",
    "example2",
    "qubit_dephasing",
    "weyl_qudit",
    "phase_damping",
];

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DephasingAxis {
    Z,
    X,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelKind {
    ClosedBipartite,
    Gksl,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "name", rename_all = "snake_case", deny_unknown_fields)]
pub enum ModelSpec {
    /// `H_0 = omega a^dagger a`, `H_I = omega (-1)^N sigma_z / 2`,
    /// `N = a^dagger a + (1 + sigma_z) / 2`.
    Example1 { omega: f64, n_max: usize },
    /// Two modes at resonance with one atom:
    /// `H_0 = omega (n_1 + n_2) + omega_0 sigma_z / 2`,
    /// `H_I = sum_i gamma_i (a_i^dagger sigma_- + a_i sigma_+)`.
    /// With `sector_n` the model is restricted to the `N = sector_n`
    /// eigenspace in the basis `|n_1, n_2, -> (n_1 + n_2 = n)` then
    /// `|m_1, m_2, +> (m_1 + m_2 = n - 1)`, both by increasing first index.
    Example2 {
        omega: f64,
        omega0: f64,
        gamma1: f64,
        gamma2: f64,
        n_max: usize,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        sector_n: Option<usize>,
    },
    /// `H_0 = omega sigma_axis`, `L_D rho = gamma (sigma_z rho sigma_z - rho)`.
    QubitDephasing {
        omega: f64,
        gamma: f64,
        axis: DephasingAxis,
    },
    /// `H_0 = sum_{n>=1} E_n P_n`, `L_D rho = sum_{n>=1} gamma_n (U_{n0} rho U_{n0}^dagger - rho)`.
    WeylQudit {
        d: usize,
        gammas: Vec<f64>,
        energies: Vec<f64>,
    },
    /// `H_0 = omega N`, `L_D rho = gamma (N rho N - 1/2 {N^2, rho})`.
    PhaseDamping { omega: f64, gamma: f64, n_max: usize },
}

impl ModelSpec {
    pub fn default_for(name: &str) -> Result<Self> {
        Ok(match name {
            "example1" => ModelSpec::Example1 { omega: 1.0, n_max: 20 },
            "example2" => ModelSpec::Example2 {
                omega: 1.0,
                omega0: 1.0,
                gamma1: 3.0,
                gamma2: 4.0,
                n_max: 8,
                sector_n: None,
            },
            "qubit_dephasing" => ModelSpec::QubitDephasing {
                omega: 1.0,
                gamma: 1.0,
                axis: DephasingAxis::Z,
            },
            "weyl_qudit" => ModelSpec::WeylQudit {
                d: 3,
                gammas: vec![0.5, 1.2],
                energies: vec![1.0, 2.5],
            },
            "phase_damping" => ModelSpec::PhaseDamping {
                omega: 1.0,
                gamma: 0.7,
                n_max: 12,
            },
            other => return Err(Error::UnknownModel(other.to_string())),
        })
    }

    pub fn catalog() -> Vec<ModelSpec> {
        CATALOG
            .iter()
            .map(|n| ModelSpec::default_for(n).expect("catalog names are known"))
            .collect()
    }

    pub fn name(&self) -> &'static str {
        match self {
            ModelSpec::Example1 { .. } => "example1",
            ModelSpec::Example2 { .. } => "example2",
            ModelSpec::QubitDephasing { .. } => "qubit_dephasing",
            ModelSpec::WeylQudit { .. } => "weyl_qudit",
            ModelSpec::PhaseDamping { .. } => "phase_damping",
        }
    }

    pub fn kind(&self) -> ModelKind {
        match self {
            ModelSpec::Example1 { .. } | ModelSpec::Example2 { .. } => ModelKind::ClosedBipartite,
            _ => ModelKind::Gksl,
        }
    }

    pub fn basis_order(&self) -> String {
        match self {
            ModelSpec::Example1 { n_max, .. } => format!("qubit(+,-) x mode(0..{})", n_max - 1),
            ModelSpec::Example2 { n_max, sector_n: None, .. } => {
                format!("qubit(+,-) x mode1(0..{m}) x mode2(0..{m})", m = n_max - 1)
            }
            ModelSpec::Example2 { sector_n: Some(n), .. } => {
                format!("N={n} eigenspace: |n1,n2,-> with n1+n2={n}, then |m1,m2,+> with m1+m2={}", n - 1)
            }
            ModelSpec::QubitDephasing { .. } => "qubit(+,-)".into(),
            ModelSpec::WeylQudit { d, .. } => format!("qudit(0..{})", d - 1),
            ModelSpec::PhaseDamping { n_max, .. } => format!("mode(0..{})", n_max - 1),
        }
    }

    /// Caveats that belong with the model's reported results.
    pub fn notes(&self) -> Vec<&'static str> {
        match self {
            ModelSpec::Example1 { .. } => vec![
                "H_I |n,s> = (-1)^(n+1) omega/2 |n,s> for both atomic states; the sectors are the +-1 eigenspaces of (-1)^N sigma_z, and photon parity (-1)^(a^dagger a) is -+1 on them.",
                "Fock truncation makes the sector degeneracies finite: each sector has dimension n_max.",
            ],
            ModelSpec::QubitDephasing { axis: DephasingAxis::X, .. } => vec![
                "The identity is annihilated by both L_0 and L_D, so M = span{vec I} and I/2 is decoherence free; M contains no traceless direction.",
            ],
            ModelSpec::WeylQudit { .. } => vec![
                "Off-diagonal factors are exp[t sum_n gamma_n (omega^(n(k-l)) - 1) - i (E_k - E_l) t]; the n = 0 term of the sum vanishes.",
            ],
            ModelSpec::PhaseDamping { .. } => vec![
                "L_0 and L_D are kept separate; their sum reproduces the combined factor exp{[-i omega (n-m) - (n-m)^2 Gamma / 2] t}.",
            ],
            _ => Vec::new(),
        }
    }

    /// Human-readable summary of the generator.
    pub fn describe(&self) -> String {
        let body = match self {
            ModelSpec::Example1 { omega, n_max } => format!(
                "closed system, H = H_0 + H_I\n  H_0 = {omega} a^dagger a\n  H_I = {omega} (-1)^N sigma_z / 2, N = a^dagger a + (1 + sigma_z)/2\n  Fock truncation n_max = {n_max}\n  claim: H_I has two eigenvalues +-omega/2; every H_I eigenvector is interaction free"
            ),
            ModelSpec::Example2 { omega, omega0, gamma1, gamma2, n_max, sector_n } => format!(
                "closed system, H = H_0 + H_I\n  H_0 = {omega} (n_1 + n_2) + {omega0} sigma_z / 2\n  H_I = {gamma1} (a_1^dagger sigma_- + a_1 sigma_+) + {gamma2} (a_2^dagger sigma_- + a_2 sigma_+)\n  Fock truncation n_max = {n_max} per mode{}\n  claim: the N = n eigenspace is (2n+1)-dimensional; H_I eigenvalues 0, +-k sqrt(gamma1^2 + gamma2^2)",
                sector_n.map(|n| format!(", restricted to N = {n}")).unwrap_or_default()
            ),
            ModelSpec::QubitDephasing { omega, gamma, axis } => format!(
                "GKSL semigroup, L = L_0 + L_D\n  L_0 rho = -i[{omega} sigma_{}, rho]\n  L_D rho = {gamma} (sigma_z rho sigma_z - rho)\n  claim: {}",
                match axis { DephasingAxis::Z => "z", DephasingAxis::X => "x" },
                match axis {
                    DephasingAxis::Z => "[L_0, L_D] = 0, M = Ker L_D, every p P_0 + (1-p) P_1 is decoherence free",
                    DephasingAxis::X => "L_0 and L_D do not commute; only the identity direction survives",
                }
            ),
            ModelSpec::WeylQudit { d, gammas, energies } => format!(
                "GKSL semigroup on a {d}-level system, L = L_0 + L_D\n  H_0 = sum_n E_n P_n, E = (0, {})\n  L_D rho = sum_n gamma_n (U_n0 rho U_n0^dagger - rho), gamma = ({})\n  claim: [L_0, L_D] = 0, rho(t) = D(t) o rho (Hadamard), every diagonal state is decoherence free",
                join(energies), join(gammas)
            ),
            ModelSpec::PhaseDamping { omega, gamma, n_max } => format!(
                "GKSL semigroup on a mode truncated at n_max = {n_max}, L = L_0 + L_D\n  L_0 rho = -i[{omega} N, rho]\n  L_D rho = {gamma} (N rho N - N^2 rho / 2 - rho N^2 / 2)\n  L |n><m| = [-i omega (n-m) - (n-m)^2 Gamma / 2] |n><m|\n  claim: N is conserved, rho = sum_n rho_nn |n><n| is decoherence free"
            ),
        };
        let mut out = format!("{}\n  {}\n  basis: {}", self.name(), body, self.basis_order());
        for n in self.notes() {
            out.push_str("\n  note: ");
            out.push_str(n);
        }
        out
    }

    pub fn validate(&self) -> Result<()> {
        let finite = |name: &str, v: f64| {
            if v.is_finite() {
                Ok(())
            } else {
                Err(Error::InvalidParameter(format!("{name} must be finite, got {v}")))
            }
        };
        let rate = |name: &str, v: f64| {
            if v.is_finite() && v >= 0.0 {
                Ok(())
            } else {
                Err(Error::InvalidParameter(format!("{name} must be finite and nonnegative, got {v}")))
            }
        };
        let truncation = |n: usize| FockSpace::new(n).map(|_| ());
        match self {
            ModelSpec::Example1 { omega, n_max } => {
                finite("omega", *omega)?;
                truncation(*n_max)
            }
            ModelSpec::Example2 { omega, omega0, gamma1, gamma2, n_max, sector_n } => {
                finite("omega", *omega)?;
                finite("gamma1", *gamma1)?;
                finite("gamma2", *gamma2)?;
                if omega0 != omega {
                    return Err(Error::InvalidParameter(format!(
                        "the model is defined at resonance: omega0 must equal omega ({omega0} != {omega})"
                    )));
                }
                truncation(*n_max)?;
                if let Some(n) = sector_n {
                    if *n == 0 || *n >= *n_max {
                        return Err(Error::InvalidParameter(format!(
                            "sector_n must lie in 1..{}, got {n}",
                            n_max - 1
                        )));
                    }
                }
                Ok(())
            }
            ModelSpec::QubitDephasing { omega, gamma, .. } => {
                finite("omega", *omega)?;
                rate("gamma", *gamma)
            }
            ModelSpec::WeylQudit { d, gammas, energies } => {
                if *d < 2 {
                    return Err(Error::InvalidParameter(format!("d must be at least 2, got {d}")));
                }
                if gammas.len() != d - 1 || energies.len() != d - 1 {
                    return Err(Error::InvalidParameter(format!(
                        "gammas and energies need d - 1 = {} entries, got {} and {}",
                        d - 1,
                        gammas.len(),
                        energies.len()
                    )));
                }
                gammas.iter().try_for_each(|&g| rate("gamma_n", g))?;
                energies.iter().try_for_each(|&e| finite("E_n", e))
            }
            ModelSpec::PhaseDamping { omega, gamma, n_max } => {
                finite("omega", *omega)?;
                rate("gamma", *gamma)?;
                truncation(*n_max)
            }
        }
    }

    pub fn build(&self) -> Result<BuiltModel> {
        self.validate()?;
        Ok(match self {
            ModelSpec::Example1 { omega, n_max } => BuiltModel::Closed(example1(*omega, *n_max)),
            ModelSpec::Example2 { omega, omega0, gamma1, gamma2, n_max, sector_n } => {
                let full = example2(*omega, *omega0, [*gamma1, *gamma2], *n_max);
                match sector_n {
                    None => BuiltModel::Closed(full),
                    Some(n) => {
                        let p = number_sector_basis(*n, *n_max);
                        BuiltModel::Closed(ClosedModel {
                            h0: p.adjoint() * &full.h0 * &p,
                            h_i: p.adjoint() * &full.h_i * &p,
                            subsystems: None,
                        })
                    }
                }
            }
            ModelSpec::QubitDephasing { omega, gamma, axis } => {
                let h0 = pauli(match axis {
                    DephasingAxis::Z => Pauli::Z,
                    DephasingAxis::X => Pauli::X,
                }) * real(*omega);
                BuiltModel::Gksl(GkslSpec::new(
                    h0,
                    vec![NoiseChannel { op: pauli(Pauli::Z), rate: *gamma }],
                )?)
            }
            ModelSpec::WeylQudit { d, gammas, energies } => {
                let h0 = diagonal(std::iter::once(0.0).chain(energies.iter().copied()));
                let noise = gammas
                    .iter()
                    .enumerate()
                    .map(|(i, &g)| {
                        Ok(NoiseChannel {
                            op: weyl(WeylIndex::new(*d, i as i64 + 1, 0)?),
                            rate: g,
                        })
                    })
                    .collect::<Result<Vec<_>>>()?;
                BuiltModel::Gksl(GkslSpec::new(h0, noise)?)
            }
            ModelSpec::PhaseDamping { omega, gamma, n_max } => {
                let num = number(FockSpace::new(*n_max)?);
                BuiltModel::Gksl(GkslSpec::new(
                    &num * real(*omega),
                    vec![NoiseChannel { op: num, rate: *gamma }],
                )?)
            }
        })
    }

    /// Closed-form dephasing parameters, for the models that have them.
    pub fn dephasing_params(&self) -> Option<DephasingParams> {
        match self {
            ModelSpec::WeylQudit { d, gammas, energies } => Some(DephasingParams::WeylQudit {
                d: *d,
                gammas: gammas.clone(),
                energies: energies.clone(),
            }),
            ModelSpec::PhaseDamping { omega, gamma, n_max } => Some(DephasingParams::PhaseDamping {
                omega: *omega,
                gamma: *gamma,
                dim: *n_max,
            }),
            // sigma_z = U_10 at d = 2, and omega sigma_z = diag(0, -2 omega) up to a shift
            ModelSpec::QubitDephasing { omega, gamma, axis: DephasingAxis::Z } => Some(DephasingParams::WeylQudit {
                d: 2,
                gammas: vec![*gamma],
                energies: vec![-2.0 * omega],
            }),
            _ => None,
        }
    }
}

fn join(v: &[f64]) -> String {
    v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(", ")
}

/// A closed system `H = H_0 + H_I`.
#[derive(Clone, Debug)]
pub struct ClosedModel {
    pub h0: ComplexMatrix,
    pub h_i: ComplexMatrix,
    /// `(H_1, H_2)` with `H_0 = H_1 ⊗ I + I ⊗ H_2`, atom first.
    pub subsystems: Option<(ComplexMatrix, ComplexMatrix)>,
}

impl ClosedModel {
    pub fn dim(&self) -> usize {
        self.h0.nrows()
    }
}

#[derive(Clone, Debug)]
pub enum BuiltModel {
    Closed(ClosedModel),
    Gksl(GkslSpec),
}

impl BuiltModel {
    pub fn kind(&self) -> ModelKind {
        match self {
            BuiltModel::Closed(_) => ModelKind::ClosedBipartite,
            BuiltModel::Gksl(_) => ModelKind::Gksl,
        }
    }
}

fn example1(omega: f64, n_max: usize) -> ClosedModel {
    let space = FockSpace::new(n_max).expect("validated");
    let num = number(space);
    let sz = pauli(Pauli::Z);
    let excitation = (identity(2) + &sz) * real(0.5);
    let n_op = tensor(&identity(2), &num) + tensor(&excitation, &identity(n_max));
    let parity = parity_of_diagonal(&n_op);
    let h0 = tensor(&identity(2), &num) * real(omega);
    let h_i = &parity * tensor(&sz, &identity(n_max)) * real(0.5 * omega);
    ClosedModel {
        h0,
        h_i,
        subsystems: Some((ComplexMatrix::zeros(2, 2), num * real(omega))),
    }
}

fn example2(omega: f64, omega0: f64, gamma: [f64; 2], n_max: usize) -> ClosedModel {
    let space = FockSpace::new(n_max).expect("validated");
    let a = annihilation(space);
    let id_m = identity(n_max);
    let id_q = identity(2);
    let a1 = tensor(&a, &id_m);
    let a2 = tensor(&id_m, &a);
    let modes = (tensor(&number(space), &id_m) + tensor(&id_m, &number(space))) * real(omega);
    let atom = pauli(Pauli::Z) * real(0.5 * omega0);
    let h0 = tensor(&id_q, &modes) + tensor(&atom, &identity(n_max * n_max));
    let sp = pauli(Pauli::Plus);
    let sm = pauli(Pauli::Minus);
    let mut h_i = ComplexMatrix::zeros(2 * n_max * n_max, 2 * n_max * n_max);
    for (g, ai) in gamma.iter().zip([&a1, &a2]) {
        h_i += (tensor(&sm, &ai.adjoint()) + tensor(&sp, ai)) * real(*g);
    }
    ClosedModel {
        h0,
        h_i,
        subsystems: Some((atom, modes)),
    }
}

/// Index of `|s, n_1, n_2>` in the two-mode basis, `s = 0` for `+`.
pub fn example2_index(n_max: usize, excited: bool, n1: usize, n2: usize) -> usize {
    let s = if excited { 0 } else { 1 };
    s * n_max * n_max + n1 * n_max + n2
}

/// Isometry onto the `N = n` eigenspace of the two-mode model, columns
/// ordered as in [`ModelSpec::Example2`].
pub fn number_sector_basis(n: usize, n_max: usize) -> ComplexMatrix {
    let dim = 2 * n_max * n_max;
    let mut cols = Vec::with_capacity(2 * n + 1);
    for n1 in 0..=n {
        cols.push(example2_index(n_max, false, n1, n - n1));
    }
    for m1 in 0..n {
        cols.push(example2_index(n_max, true, m1, n - 1 - m1));
    }
    let mut p = ComplexMatrix::zeros(dim, cols.len());
    for (j, &i) in cols.iter().enumerate() {
        p[(i, j)] = real(1.0);
    }
    p
}

/// Index of `|n, s>` in the one-mode model, `s = +1` for the excited state.
pub fn example1_index(n_max: usize, n: usize, excited: bool) -> usize {
    if excited {
        n
    } else {
        n_max + n
    }
}

/// Outcome of one fact check.
#[derive(Clone, Debug, Serialize)]
pub struct FactOutcome {
    pub passed: bool,
    pub detail: String,
}

type Check = Box<dyn Fn() -> Result<FactOutcome> + Send + Sync>;

/// A structural claim about a model with the code that checks it.
pub struct Fact {
    pub description: String,
    check: Check,
}

impl Fact {
    fn new(description: impl Into<String>, check: impl Fn() -> Result<FactOutcome> + Send + Sync + 'static) -> Self {
        Fact {
            description: description.into(),
            check: Box::new(check),
        }
    }

    pub fn run(&self) -> Result<FactOutcome> {
        (self.check)()
    }
}

impl std::fmt::Debug for Fact {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Fact").field("description", &self.description).finish()
    }
}

fn outcome(passed: bool, detail: impl Into<String>) -> Result<FactOutcome> {
    Ok(FactOutcome {
        passed,
        detail: detail.into(),
    })
}

fn closed(spec: &ModelSpec) -> Result<ClosedModel> {
    match spec.build()? {
        BuiltModel::Closed(m) => Ok(m),
        BuiltModel::Gksl(_) => Err(Error::Precondition(format!("{} is not a closed model", spec.name()))),
    }
}

fn gksl(spec: &ModelSpec) -> Result<GkslSpec> {
    match spec.build()? {
        BuiltModel::Gksl(g) => Ok(g),
        BuiltModel::Closed(_) => Err(Error::Precondition(format!("{} is not a GKSL model", spec.name()))),
    }
}

fn sorted_close(got: &[f64], want: &[f64], tol: f64) -> (bool, f64) {
    let mut g = got.to_vec();
    let mut w = want.to_vec();
    g.sort_by(f64::total_cmp);
    w.sort_by(f64::total_cmp);
    if g.len() != w.len() {
        return (false, f64::INFINITY);
    }
    let err = g.iter().zip(&w).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    (err <= tol, err)
}

fn spread(v: &[f64]) -> f64 {
    let lo = v.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    hi - lo
}

/// The checkable claims attached to a catalog model. Parameters other than
/// the defaults are honoured where the claim depends on them.
pub fn expected_facts(spec: &ModelSpec) -> Result<Vec<Fact>> {
    spec.validate()?;
    let s = spec.clone();
    Ok(match spec {
        ModelSpec::Example1 { .. } => example1_facts(s),
        ModelSpec::Example2 { .. } => example2_facts(s),
        ModelSpec::QubitDephasing { axis: DephasingAxis::Z, .. } => qubit_z_facts(s),
        ModelSpec::QubitDephasing { axis: DephasingAxis::X, .. } => qubit_x_facts(s),
        ModelSpec::WeylQudit { .. } => weyl_facts(s),
        ModelSpec::PhaseDamping { .. } => phase_damping_facts(s),
    })
}

pub fn expected_facts_by_name(name: &str) -> Result<Vec<Fact>> {
    expected_facts(&ModelSpec::default_for(name)?)
}

fn example1_facts(spec: ModelSpec) -> Vec<Fact> {
    let ModelSpec::Example1 { omega, n_max } = spec else { unreachable!() };
    let sp = spec.clone();
    let commute = Fact::new("[H_0, H_I] = 0 within 1e-12", move || {
        let m = closed(&sp)?;
        let c = spectral_norm(&commutator(&m.h0, &m.h_i));
        outcome(c <= 1e-12, format!("||[H_0, H_I]|| = {c:.3e}"))
    });
    let sp = spec.clone();
    let two_clusters = Fact::new("H_I has exactly two eigenvalue clusters, +-omega/2 (tol 1e-10)", move || {
        let m = closed(&sp)?;
        let dec = sector_decompose(&m.h0, &m.h_i, Some(1e-10))?;
        let (ok, err) = sorted_close(&dec.eigenvalues(), &[-0.5 * omega, 0.5 * omega], 1e-10);
        outcome(ok && dec.total_dim() == 2 * n_max, format!("eigenvalues {:?}, sector dims {:?}, max error {err:.3e}", dec.eigenvalues(), dims(&dec)))
    });
    let sp = spec.clone();
    let membership = Fact::new("|2n+1, +-> span the omega/2 sector and |2n, +-> the -omega/2 sector", move || {
        let m = closed(&sp)?;
        let dec = sector_decompose(&m.h0, &m.h_i, Some(1e-10))?;
        let frame = |odd: bool| {
            let cols: Vec<ComplexVector> = (0..n_max)
                .filter(|n| (n % 2 == 1) == odd)
                .flat_map(|n| [true, false].map(|e| unit(2 * n_max, example1_index(n_max, n, e))))
                .collect();
            Subspace::span(&ComplexMatrix::from_columns(&cols), RankTolerance::Automatic)
        };
        let plus = dec.sector_for(0.5 * omega, 1e-10).map(|s| s.subspace.clone());
        let minus = dec.sector_for(-0.5 * omega, 1e-10).map(|s| s.subspace.clone());
        let ok = match (plus, minus) {
            (Some(p), Some(q)) => p.same_as(&frame(true)?)? && q.same_as(&frame(false)?)?,
            _ => false,
        };
        outcome(ok, "compared by principal angles")
    });
    let sp = spec.clone();
    let parity = Fact::new("sectors are the +-1 eigenspaces of (-1)^N sigma_z and the -+1 eigenspaces of (-1)^(a^dagger a)", move || {
        let m = closed(&sp)?;
        let dec = sector_decompose(&m.h0, &m.h_i, Some(1e-10))?;
        let (total_parity, photon_parity) = example1_parities(n_max);
        let mut worst: f64 = 0.0;
        for s in &dec.sectors {
            let sign = s.alpha.signum();
            let f = s.subspace.frame();
            worst = worst.max(spectral_norm(&(&total_parity * f - f * real(sign))));
            worst = worst.max(spectral_norm(&(&photon_parity * f + f * real(sign))));
        }
        outcome(worst <= 1e-12 && dec.sectors.len() == 2, format!("largest residual {worst:.3e}"))
    });
    let sp = spec.clone();
    let trajectory = Fact::new("an omega/2-sector state evolves as e^{-i omega t/2} sum_n e^{-i omega (2n+1) t}(a_n|2n+1,-> + b_n|2n+1,+>) within 1e-9", move || {
        let m = closed(&sp)?;
        let psi = example1_sector_state(n_max);
        let grid = uniform_grid(10.0, 101);
        let h = &m.h0 + &m.h_i;
        let mut worst: f64 = 0.0;
        let states = crate::numkernel::propagate_grid(
            &(h * c64(0.0, -1.0)),
            &ComplexMatrix::from_columns(&[psi.clone()]),
            &grid,
        )?;
        for (t, x) in grid.iter().zip(states) {
            for i in 0..psi.len() {
                let n = i % n_max;
                let expected = psi[i] * c64(0.0, -omega * (0.5 + n as f64) * t).exp();
                worst = worst.max((x[(i, 0)] - expected).norm());
            }
        }
        outcome(worst <= 1e-9, format!("max termwise error {worst:.3e}"))
    });
    let sp = spec.clone();
    let energies = Fact::new("field and atom energies are constant along that trajectory within 1e-9", move || {
        let m = closed(&sp)?;
        let psi = example1_sector_state(n_max);
        let (h1, h2) = m.subsystems.as_ref().expect("bipartite");
        let rep = verify_closed_evolution(&m.h0, &m.h_i, &psi, Some((h1, h2)), &uniform_grid(10.0, 101), 1e-9)?;
        let (e1, e2) = (rep.energy1.clone().unwrap(), rep.energy2.clone().unwrap());
        let (s1, s2) = (spread(&e1), spread(&e2));
        outcome(s1 <= 1e-9 && s2 <= 1e-9 && rep.verdict, format!("atom spread {s1:.3e}, field spread {s2:.3e}, interaction-free deviation {:.3e}", rep.max_deviation()))
    });
    vec![commute, two_clusters, membership, parity, trajectory, energies]
}

/// `(-1)^N sigma_z` and `(-1)^(a^dagger a)` on qubit ⊗ mode.
pub fn example1_parities(n_max: usize) -> (ComplexMatrix, ComplexMatrix) {
    let space = FockSpace::new(n_max).expect("n_max >= 2");
    let num = number(space);
    let excitation = (identity(2) + pauli(Pauli::Z)) * real(0.5);
    let n_op = tensor(&identity(2), &num) + tensor(&excitation, &identity(n_max));
    let total = parity_of_diagonal(&n_op) * tensor(&pauli(Pauli::Z), &identity(n_max));
    let photon = tensor(&identity(2), &parity_of_diagonal(&num));
    (total, photon)
}

/// A normalized superposition of `|2n+1, ->` and `|2n+1, +>` for `n <= 5`
/// with fixed complex weights.
pub fn example1_sector_state(n_max: usize) -> ComplexVector {
    let mut psi = ComplexVector::zeros(2 * n_max);
    for n in 0..=5usize {
        let k = 2 * n + 1;
        if k >= n_max {
            break;
        }
        let a = c64(1.0 / (1.0 + n as f64), 0.3 * n as f64);
        let b = c64(0.5 - 0.1 * n as f64, -0.2);
        psi[example1_index(n_max, k, false)] = a;
        psi[example1_index(n_max, k, true)] = b;
    }
    let nrm = psi.norm();
    psi / real(nrm)
}

fn unit(dim: usize, i: usize) -> ComplexVector {
    let mut v = ComplexVector::zeros(dim);
    v[i] = real(1.0);
    v
}

fn dims(dec: &SectorDecomposition) -> Vec<usize> {
    dec.sectors.iter().map(|s| s.subspace.dim()).collect()
}

fn example2_facts(spec: ModelSpec) -> Vec<Fact> {
    let ModelSpec::Example2 { omega, omega0, gamma1, gamma2, n_max, .. } = spec else { unreachable!() };
    let full = ModelSpec::Example2 { omega, omega0, gamma1, gamma2, n_max, sector_n: None };
    let g = (gamma1 * gamma1 + gamma2 * gamma2).sqrt();

    let sp = full.clone();
    let commute = Fact::new("[H_0, H_I] = 0 and [N, H_I] = 0 within 1e-12", move || {
        let m = closed(&sp)?;
        let n_op = example2_number(n_max);
        let c1 = spectral_norm(&commutator(&m.h0, &m.h_i));
        let c2 = spectral_norm(&commutator(&n_op, &m.h_i));
        outcome(c1 <= 1e-12 && c2 <= 1e-12, format!("||[H_0, H_I]|| = {c1:.3e}, ||[N, H_I]|| = {c2:.3e}"))
    });
    let max_n = 4.min(n_max - 1);
    let sector_dims = Fact::new(format!("the N = n eigenspace has dimension 2n+1 for n = 1..{max_n}"), move || {
        let n_op = example2_number(n_max);
        let mut got = Vec::new();
        for n in 1..=max_n {
            let k = null_space(&(&n_op - identity(n_op.nrows()) * real(n as f64)), RankTolerance::Automatic)?;
            let p = number_sector_basis(n, n_max);
            let same = k.same_as(&Subspace::from_frame(p)?)?;
            got.push((k.dim(), same));
        }
        let ok = got.iter().enumerate().all(|(i, &(d, same))| d == 2 * (i + 1) + 1 && same);
        outcome(ok, format!("(dimension, equals S_- u S_+ span) per n: {got:?}"))
    });
    let spectra = Fact::new("H_I on N = 1 has spectrum {0, +-g}, on N = 2 {0, +-g, +-sqrt2 g}, g = sqrt(gamma1^2 + gamma2^2), within 1e-10", move || {
        let m = closed(&full)?;
        let mut report = Vec::new();
        let mut ok = true;
        for (n, want) in [(1, vec![0.0, g, -g]), (2, vec![0.0, g, -g, 2f64.sqrt() * g, -(2f64.sqrt()) * g])] {
            let p = number_sector_basis(n, n_max);
            let vals = hermitian_eig(&(p.adjoint() * &m.h_i * &p))?.values;
            let (close, err) = sorted_close(&vals, &want, 1e-10);
            ok &= close;
            report.push(format!("n={n}: {vals:?} (error {err:.1e})"));
        }
        outcome(ok, report.join("; "))
    });
    let sp = spec.clone();
    let ife = Fact::new("an H_I eigenvector with alpha = g in N = 1 is interaction free (1e-8) and changes by > 1e-3 at t = pi/(2 omega)", move || {
        let _ = &sp;
        let m = closed(&ModelSpec::Example2 { omega, omega0, gamma1, gamma2, n_max, sector_n: None })?;
        let psi = example2_alpha_vector(&m, 1, n_max, g)?;
        let grid = uniform_grid(10.0, 101);
        let rep = verify_closed_evolution(&m.h0, &m.h_i, &psi, None, &grid, 1e-8)?;
        let t = PI / (2.0 * omega);
        let u = expm(&((&m.h0 + &m.h_i) * c64(0.0, -t)))?;
        let change = (&u * &psi - &psi).norm();
        outcome(rep.verdict && change > 1e-3, format!("max deviation {:.3e}, ||psi(pi/2) - psi|| = {change:.3e}", rep.max_deviation()))
    });
    let superposition = Fact::new("a superposition of alpha = g eigenvectors from N = 1 and N = 2 is interaction free (1e-8) with time-dependent populations", move || {
        let m = closed(&ModelSpec::Example2 { omega, omega0, gamma1, gamma2, n_max, sector_n: None })?;
        let psi = (example2_alpha_vector(&m, 1, n_max, g)? + example2_alpha_vector(&m, 2, n_max, g)?) * real(0.5f64.sqrt());
        let grid = uniform_grid(10.0, 101);
        let rep = verify_closed_evolution(&m.h0, &m.h_i, &psi, None, &grid, 1e-8)?;
        let t = PI / (2.0 * omega);
        let u = expm(&((&m.h0 + &m.h_i) * c64(0.0, -t)))?;
        let overlap = psi.dotc(&(&u * &psi)).norm();
        outcome(rep.verdict && (1.0 - overlap) > 1e-3, format!("max deviation {:.3e}, |<psi|psi(pi/2)>| = {overlap:.6}", rep.max_deviation()))
    });
    vec![commute, sector_dims, spectra, ife, superposition]
}

/// `N = n_1 + n_2 + (1 + sigma_z)/2` on qubit ⊗ mode ⊗ mode.
pub fn example2_number(n_max: usize) -> ComplexMatrix {
    let space = FockSpace::new(n_max).expect("n_max >= 2");
    let id_m = identity(n_max);
    let modes = tensor(&number(space), &id_m) + tensor(&id_m, &number(space));
    let excitation = (identity(2) + pauli(Pauli::Z)) * real(0.5);
    tensor(&identity(2), &modes) + tensor_all(&[&excitation, &id_m, &id_m])
}

/// Unit eigenvector of `H_I` with eigenvalue `alpha` inside the `N = n`
/// eigenspace, in the full two-mode basis.
pub fn example2_alpha_vector(m: &ClosedModel, n: usize, n_max: usize, alpha: f64) -> Result<ComplexVector> {
    let p = number_sector_basis(n, n_max);
    let eig = hermitian_eig(&(p.adjoint() * &m.h_i * &p))?;
    let j = (0..eig.values.len())
        .min_by(|&i, &k| (eig.values[i] - alpha).abs().total_cmp(&(eig.values[k] - alpha).abs()))
        .expect("nonempty");
    if (eig.values[j] - alpha).abs() > 1e-8 * alpha.abs().max(1.0) {
        return Err(Error::Precondition(format!("alpha = {alpha} is not an eigenvalue in sector N = {n}")));
    }
    Ok(&p * eig.vectors.column(j))
}

fn diagonal_state_frame(n: usize) -> ComplexMatrix {
    let cols: Vec<ComplexVector> = (0..n)
        .map(|k| {
            let mut p = ComplexMatrix::zeros(n, n);
            p[(k, k)] = real(1.0);
            vectorize(&p)
        })
        .collect();
    ComplexMatrix::from_columns(&cols)
}

fn qubit_z_facts(spec: ModelSpec) -> Vec<Fact> {
    let ModelSpec::QubitDephasing { gamma, .. } = spec else { unreachable!() };
    let sp = spec.clone();
    let commute = Fact::new("[L_0, L_D] = 0 and M = Ker L_D", move || {
        let g = vectorize_generator(&gksl(&sp)?)?;
        let c = spectral_norm(&commutator(g.a(), g.b()));
        let m = crate::bfree::compute_m(&g, RankTolerance::Automatic)?.subspace;
        let k = null_space(g.b(), RankTolerance::Automatic)?;
        outcome(c <= 1e-12 && m.same_as(&k)?, format!("||[L_0, L_D]|| = {c:.3e}, dim M = {}", m.dim()))
    });
    let sp = spec.clone();
    let diagonal_df = Fact::new("p P_0 + (1-p) P_1 lies in M for p in {0, 0.3, 1} (residual <= 1e-8)", move || {
        let m = decoherence_free_subspace(&gksl(&sp)?, RankTolerance::Automatic)?.subspace;
        let mut worst: f64 = 0.0;
        for p in [0.0, 0.3, 1.0] {
            let rho = diagonal([p, 1.0 - p]);
            worst = worst.max(m.vector_residual(&vectorize(&rho)));
        }
        outcome(worst <= 1e-8, format!("largest residual {worst:.3e}, dim M = {}", m.dim()))
    });
    let sp = spec.clone();
    let mixed = Fact::new("I/2 is found in M and evolves unitarily (1e-8) over t in [0, 10]", move || {
        let g = gksl(&sp)?;
        let m = decoherence_free_subspace(&g, RankTolerance::Automatic)?.subspace;
        let w = find_df_state(&m, 1e-10)?;
        let Some(w) = w else { return outcome(false, "no state found") };
        let err = (w.state.matrix() - identity(2) * real(0.5)).norm();
        let rep = verify_unitary_evolution(&g, &w.state, &uniform_grid(10.0, 101), 1e-8)?;
        outcome(rep.verdict && err <= 1e-12, format!("||rho - I/2|| = {err:.3e}, max deviation {:.3e}", rep.max_deviation()))
    });
    let sp = spec.clone();
    let plus = Fact::new("|+><+| fails verification and its deviation is 1 - e^{-2 gamma t} within 1e-6", move || {
        let g = gksl(&sp)?;
        let rho = DensityMatrix::pure(&ComplexVector::from_vec(vec![real(1.0), real(1.0)]))?;
        let grid = uniform_grid(10.0, 101);
        let rep = verify_unitary_evolution(&g, &rho, &grid, 1e-8)?;
        let err = grid
            .iter()
            .zip(&rep.deviation)
            .map(|(t, d)| (d - (1.0 - (-2.0 * gamma * t).exp())).abs())
            .fold(0.0, f64::max);
        outcome(!rep.verdict && err <= 1e-6, format!("verdict {}, envelope error {err:.3e}", rep.verdict))
    });
    vec![commute, diagonal_df, mixed, plus]
}

fn qubit_x_facts(spec: ModelSpec) -> Vec<Fact> {
    let sp = spec.clone();
    let noncommuting = Fact::new("L_0 and L_D do not commute", move || {
        let g = vectorize_generator(&gksl(&sp)?)?;
        let c = spectral_norm(&commutator(g.a(), g.b()));
        outcome(c > 1e-3, format!("||[L_0, L_D]|| = {c:.3e}"))
    });
    let sp = spec.clone();
    let identity_only = Fact::new("M = span{vec I}: no traceless operator is decoherence free, I/2 is", move || {
        let g = gksl(&sp)?;
        let m = decoherence_free_subspace(&g, RankTolerance::Automatic)?.subspace;
        let id = Subspace::span(&ComplexMatrix::from_columns(&[vectorize(&identity(2))]), RankTolerance::Automatic)?;
        let traceless = id.complement()?;
        let meet = intersect(&m, &traceless, RankTolerance::Automatic)?;
        let w = find_df_state(&m, 1e-10)?;
        let verified = match &w {
            Some(w) => verify_unitary_evolution(&g, &w.state, &uniform_grid(10.0, 101), 1e-8)?.verdict,
            None => false,
        };
        outcome(
            m.dim() == 1 && m.same_as(&id)? && meet.dim() == 0 && verified,
            format!("dim M = {}, dim(M ∩ traceless) = {}, I/2 verified: {verified}", m.dim(), meet.dim()),
        )
    });
    vec![noncommuting, identity_only]
}

fn weyl_facts(spec: ModelSpec) -> Vec<Fact> {
    let ModelSpec::WeylQudit { d, .. } = spec else { unreachable!() };
    let sp = spec.clone();
    let commute = Fact::new("[L_0, L_D] = 0, L_0 P_k = L_D P_k = 0", move || {
        let g = vectorize_generator(&gksl(&sp)?)?;
        let c = spectral_norm(&commutator(g.a(), g.b()));
        let diag = diagonal_state_frame(d);
        let k0 = spectral_norm(&(g.a() * &diag));
        let kd = spectral_norm(&(g.b() * &diag));
        outcome(c <= 1e-12 && k0 <= 1e-12 && kd <= 1e-12, format!("||[L_0, L_D]|| = {c:.3e}, ||L_0 P|| = {k0:.1e}, ||L_D P|| = {kd:.1e}"))
    });
    let sp = spec.clone();
    let hadamard = Fact::new("propagation equals the Hadamard closed form entrywise within 1e-8 at t = 0.5 and 2", move || {
        let g = gksl(&sp)?;
        let params = sp.dephasing_params().expect("closed form");
        let l = vectorize_generator(&g)?.generator();
        let rho = reference_state(d);
        let mut worst: f64 = 0.0;
        for t in [0.5, 2.0] {
            let out = devectorize(&(expm(&(&l * real(t)))? * vectorize(&rho)), d)?;
            for k in 0..d {
                for j in 0..d {
                    let f = dephasing_factor(&params, k, j, t)?;
                    worst = worst.max((out[(k, j)] - f * rho[(k, j)]).norm());
                }
            }
        }
        outcome(worst <= 1e-8, format!("max entry error {worst:.3e}"))
    });
    let sp = spec.clone();
    let diagonal_df = Fact::new("M is the span of P_0..P_{d-1} and diagonal mixtures evolve unitarily (1e-8)", move || {
        let g = gksl(&sp)?;
        let m = decoherence_free_subspace(&g, RankTolerance::Automatic)?.subspace;
        let expected = Subspace::from_frame(diagonal_state_frame(d))?;
        let grid = uniform_grid(10.0, 101);
        let mut ok = m.same_as(&expected)?;
        let mut worst: f64 = 0.0;
        for pops in mixtures(d) {
            let rep = verify_unitary_evolution(&g, &DensityMatrix::diagonal(&pops)?, &grid, 1e-8)?;
            ok &= rep.verdict;
            worst = worst.max(rep.max_deviation());
        }
        outcome(ok, format!("dim M = {}, max deviation over mixtures {worst:.3e}", m.dim()))
    });
    vec![commute, hadamard, diagonal_df]
}

fn phase_damping_facts(spec: ModelSpec) -> Vec<Fact> {
    let ModelSpec::PhaseDamping { gamma, n_max, .. } = spec else { unreachable!() };
    let sp = spec.clone();
    let factors = Fact::new("L |n><m| = [-i omega (n-m) - (n-m)^2 Gamma/2] |n><m| and |factor| = e^{-(n-m)^2 Gamma t/2} within 1e-8", move || {
        let g = gksl(&sp)?;
        let params = sp.dephasing_params().expect("closed form");
        let l = vectorize_generator(&g)?.generator();
        let t = 1.0;
        let prop = expm(&(&l * real(t)))?;
        let mut worst: f64 = 0.0;
        for n in 0..n_max {
            for m in 0..n_max {
                let mut e = ComplexMatrix::zeros(n_max, n_max);
                e[(n, m)] = real(1.0);
                let out = devectorize(&(&prop * vectorize(&e)), n_max)?;
                let f = dephasing_factor(&params, n, m, t)?;
                let dm = n as f64 - m as f64;
                worst = worst
                    .max((out[(n, m)] - f).norm())
                    .max((f.norm() - (-0.5 * dm * dm * gamma * t).exp()).abs());
            }
        }
        outcome(worst <= 1e-8, format!("max error {worst:.3e}"))
    });
    let sp = spec.clone();
    let populations = Fact::new("populations are constant within 1e-9 for a generic initial state", move || {
        let g = gksl(&sp)?;
        let l = vectorize_generator(&g)?.generator();
        let rho = reference_state(n_max);
        let grid = [0.1, 1.0, 5.0, 10.0];
        let states = crate::numkernel::propagate_grid(&l, &ComplexMatrix::from_columns(&[vectorize(&rho)]), &grid)?;
        let mut worst: f64 = 0.0;
        for x in states {
            let out = devectorize(&x.column(0).into_owned(), n_max)?;
            for k in 0..n_max {
                worst = worst.max((out[(k, k)] - rho[(k, k)]).norm());
            }
        }
        outcome(worst <= 1e-9, format!("max population drift {worst:.3e}"))
    });
    let sp = spec.clone();
    let df = Fact::new("the state found in M is diagonal and evolves unitarily (1e-8)", move || {
        let g = gksl(&sp)?;
        let m = decoherence_free_subspace(&g, RankTolerance::Automatic)?.subspace;
        let Some(w) = find_df_state(&m, 1e-10)? else { return outcome(false, "no state found") };
        let rho = w.state.matrix();
        let off = (0..n_max)
            .flat_map(|i| (0..n_max).map(move |j| (i, j)))
            .filter(|(i, j)| i != j)
            .map(|(i, j)| rho[(i, j)].norm())
            .fold(0.0, f64::max);
        let rep = verify_unitary_evolution(&g, &w.state, &uniform_grid(10.0, 101), 1e-8)?;
        outcome(off <= 1e-12 && rep.verdict, format!("largest off-diagonal {off:.3e}, max deviation {:.3e}, dim M = {}", rep.max_deviation(), m.dim()))
    });
    vec![factors, populations, df]
}

/// A fixed full-rank state with every coherence nonzero.
pub fn reference_state(n: usize) -> ComplexMatrix {
    let g = ComplexMatrix::from_fn(n, n, |i, j| {
        c64(
            ((3 * i + 5 * j + 1) % 7) as f64 / 7.0 - 0.4,
            ((2 * i + 7 * j + 3) % 5) as f64 / 5.0 - 0.5,
        )
    }) + identity(n) * real(0.5);
    let rho = &g * g.adjoint();
    let tr = crate::numkernel::trace(&rho);
    rho / tr
}

fn mixtures(d: usize) -> Vec<Vec<f64>> {
    let mut out: Vec<Vec<f64>> = (0..d)
        .map(|k| (0..d).map(|i| if i == k { 1.0 } else { 0.0 }).collect())
        .collect();
    out.push(vec![1.0 / d as f64; d]);
    let w: Vec<f64> = (1..=d).map(|i| i as f64).collect();
    let s: f64 = w.iter().sum();
    out.push(w.iter().map(|x| x / s).collect());
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn catalog_lists_five_models() {
        let cat = ModelSpec::catalog();
        assert_eq!(cat.len(), 5);
        for (spec, name) in cat.iter().zip(CATALOG) {
            assert_eq!(spec.name(), name);
            spec.build().unwrap();
        }
        assert!(matches!(ModelSpec::default_for("nope"), Err(Error::UnknownModel(_))));
    }

    #[test]
    fn all_catalog_facts_hold() {
        for spec in ModelSpec::catalog() {
            for fact in expected_facts(&spec).unwrap() {
                let out = fact.run().unwrap();
                assert!(out.passed, "{}: {} ({})", spec.name(), fact.description, out.detail);
            }
        }
    }

    #[test]
    fn sigma_x_variant_facts_hold() {
        let spec = ModelSpec::QubitDephasing { omega: 1.0, gamma: 1.0, axis: DephasingAxis::X };
        for fact in expected_facts(&spec).unwrap() {
            let out = fact.run().unwrap();
            assert!(out.passed, "{} ({})", fact.description, out.detail);
        }
    }

    #[test]
    fn resonance_enforced() {
        let spec = ModelSpec::Example2 { omega: 1.0, omega0: 1.1, gamma1: 3.0, gamma2: 4.0, n_max: 4, sector_n: None };
        assert!(matches!(spec.build(), Err(Error::InvalidParameter(_))));
    }

    #[test]
    fn parameter_validation() {
        let bad = [
            ModelSpec::Example1 { omega: f64::NAN, n_max: 4 },
            ModelSpec::Example1 { omega: 1.0, n_max: 1 },
            ModelSpec::QubitDephasing { omega: 1.0, gamma: -0.1, axis: DephasingAxis::Z },
            ModelSpec::WeylQudit { d: 3, gammas: vec![0.5], energies: vec![1.0, 2.0] },
            ModelSpec::PhaseDamping { omega: 1.0, gamma: -1.0, n_max: 4 },
            ModelSpec::Example2 { omega: 1.0, omega0: 1.0, gamma1: 3.0, gamma2: 4.0, n_max: 4, sector_n: Some(4) },
        ];
        for spec in bad {
            assert!(spec.build().is_err(), "{spec:?}");
        }
    }

    #[test]
    fn example1_hamiltonian_entries() {
        let BuiltModel::Closed(m) = ModelSpec::Example1 { omega: 2.0, n_max: 6 }.build().unwrap() else { panic!() };
        for n in 0..6 {
            for excited in [true, false] {
                let i = example1_index(6, n, excited);
                let sign = if n % 2 == 1 { 1.0 } else { -1.0 };
                assert_eq!(m.h_i[(i, i)], real(sign * 1.0));
                assert_eq!(m.h0[(i, i)], real(2.0 * n as f64));
            }
        }
    }

    #[test]
    fn total_parity_alone_is_not_a_sector_sign() {
        // (-1)^N takes both signs inside each sector
        let n_max = 6;
        let (_, parity) = crate::operators::parity_number(FockSpace::new(n_max).unwrap(), true);
        let plus = example1_index(n_max, 1, true);
        let minus = example1_index(n_max, 1, false);
        assert_eq!(parity[(plus, plus)], real(1.0));
        assert_eq!(parity[(minus, minus)], real(-1.0));
    }

    #[test]
    fn example2_sector_restriction() {
        let spec = ModelSpec::Example2 { omega: 1.0, omega0: 1.0, gamma1: 3.0, gamma2: 4.0, n_max: 8, sector_n: Some(1) };
        let BuiltModel::Closed(m) = spec.build().unwrap() else { panic!() };
        assert_eq!(m.dim(), 3);
        // H_0 is (n - 1/2) omega on the N = n eigenspace
        assert!((&m.h0 - identity(3) * real(0.5)).norm() < 1e-14);
        let dec = sector_decompose(&m.h0, &m.h_i, None).unwrap();
        let (ok, _) = sorted_close(&dec.eigenvalues(), &[-5.0, 0.0, 5.0], 1e-10);
        assert!(ok);
        assert_eq!(dec.total_dim(), 3);
    }

    #[test]
    fn example2_full_space_dimension() {
        let BuiltModel::Closed(m) = ModelSpec::default_for("example2").unwrap().build().unwrap() else { panic!() };
        assert_eq!(m.dim(), 128);
        let (h1, h2) = m.subsystems.unwrap();
        assert!((tensor(&h1, &identity(64)) + tensor(&identity(2), &h2) - m.h0).norm() < 1e-14);
    }

    #[test]
    fn example2_non_ife_state_changes_energies() {
        let BuiltModel::Closed(m) = ModelSpec::Example2 { omega: 1.0, omega0: 1.0, gamma1: 3.0, gamma2: 4.0, n_max: 4, sector_n: None }.build().unwrap() else { panic!() };
        let mut psi = ComplexVector::zeros(m.dim());
        psi[example2_index(4, true, 0, 0)] = real(1.0);
        let (h1, h2) = m.subsystems.as_ref().unwrap();
        let rep = verify_closed_evolution(&m.h0, &m.h_i, &psi, Some((h1, h2)), &uniform_grid(2.0, 41), 1e-8).unwrap();
        assert!(!rep.verdict);
        assert!(spread(&rep.energy1.unwrap()) > 1e-3);
    }

    #[test]
    fn qubit_dephasing_closed_form() {
        let spec = ModelSpec::QubitDephasing { omega: 0.7, gamma: 1.3, axis: DephasingAxis::Z };
        let params = spec.dephasing_params().unwrap();
        let BuiltModel::Gksl(g) = spec.build().unwrap() else { panic!() };
        let l = vectorize_generator(&g).unwrap().generator();
        let rho = reference_state(2);
        let t = 0.9;
        let out = devectorize(&(expm(&(&l * real(t))).unwrap() * vectorize(&rho)), 2).unwrap();
        for k in 0..2 {
            for j in 0..2 {
                let f = dephasing_factor(&params, k, j, t).unwrap();
                assert!((out[(k, j)] - f * rho[(k, j)]).norm() < 1e-12);
            }
        }
        let x = ModelSpec::QubitDephasing { omega: 0.7, gamma: 1.3, axis: DephasingAxis::X };
        assert!(x.dephasing_params().is_none());
    }

    #[test]
    fn reference_state_is_valid() {
        for n in [2, 3, 12] {
            DensityMatrix::new(reference_state(n)).unwrap();
        }
    }

    #[test]
    fn specs_round_trip_through_json() {
        for spec in ModelSpec::catalog() {
            let text = serde_json::to_string(&spec).unwrap();
            let back: ModelSpec = serde_json::from_str(&text).unwrap();
            assert_eq!(back, spec);
        }
    }
}
