use std::path::Path;

use bfree_core::bfree::{
    compute_m, propagation_deviation, sector_decompose, shemesh_nontrivial, uniform_grid,
    verify_picture_invariance, GeneratorPair, KernelChain, SectorDecomposition,
};
use bfree_core::liouville::{
    find_df_state, verify_closed_evolution, verify_unitary_evolution, DensityMatrix,
    DEFAULT_VERIFY_TOL, STATE_TOL,
};
use bfree_core::modelfile::{to_json_string, LoadedKind, LoadedModel, LoadedState, MatrixData, ModelFile, VectorData};
use bfree_core::models::{ModelKind, ModelSpec};
use bfree_core::numkernel::{ComplexMatrix, ComplexVector, RankTolerance, Subspace};
use bfree_core::Error;

use crate::io::{emit, load_model, load_state, write_atomic, CliError, CliResult};
use crate::report::{
    self, CatalogEntry, DfWitnessOut, PictureOut, SectorRow, ShemeshOut, SubspaceReport, VerifyReport,
};
use crate::{CatalogAction, ShemeshArgs, SubspaceArgs, VerifyArgs, OK, VERDICT_FALSE};

/// Times at which the subspace report checks picture invariance.
const PICTURE_TIMES: [f64; 3] = [0.1, 1.0, 5.0];

fn rank_tol(tol: Option<f64>) -> CliResult<RankTolerance> {
    Ok(match tol {
        Some(v) => RankTolerance::explicit(v)?,
        None => RankTolerance::Automatic,
    })
}

fn kind_label(model: &LoadedKind) -> &'static str {
    match model {
        LoadedKind::Closed(_) => "closed_bipartite",
        LoadedKind::Gksl(_) => "gksl",
        LoadedKind::RawPair(_) => "raw_pair",
    }
}

/// Scale-aware pass threshold for the picture checks.
fn picture_tol(gen: &GeneratorPair, t_max: f64) -> f64 {
    let scale = bfree_core::numkernel::spectral_norm(gen.a()) + bfree_core::numkernel::spectral_norm(gen.b());
    1e-8 * (1.0 + scale * t_max)
}

pub fn subspace(args: &SubspaceArgs) -> CliResult<u8> {
    let src = load_model(&args.model.model, args.sector_n)?;
    let tol = rank_tol(args.tol)?;
    let gen = src.loaded.generator_pair()?;
    let chain: KernelChain = compute_m(&gen, tol)?;
    let times = PICTURE_TIMES.to_vec();
    let picture = verify_picture_invariance(&gen, &chain.subspace, &times, picture_tol(&gen, 5.0))?;

    let mut sectors = None;
    let mut shemesh = None;
    let mut df_witness = None;
    match &src.loaded.model {
        LoadedKind::Closed(m) => {
            let dec = sector_decompose(&m.h0, &m.h_i, None)?;
            sectors = Some(sector_rows(&gen, &dec, &times)?);
            shemesh = Some(shemesh_nontrivial(&gen, gen.dim().saturating_sub(1), tol)?.nontrivial);
        }
        LoadedKind::Gksl(_) => {
            df_witness = find_df_state(&chain.subspace, STATE_TOL)?.map(|w| DfWitnessOut {
                state: MatrixData::from_matrix(w.state.matrix()),
                raw_min_eigenvalue: w.raw_min_eigenvalue,
            });
        }
        LoadedKind::RawPair(_) => {
            shemesh = Some(shemesh_nontrivial(&gen, gen.dim().saturating_sub(1), tol)?.nontrivial);
        }
    }

    let report = SubspaceReport {
        schema_version: report::version(),
        command: "subspace",
        model: src.label.clone(),
        kind: kind_label(&src.loaded.model),
        basis_order: src.loaded.basis_order.clone(),
        ambient_dim: gen.dim(),
        m_dim: chain.subspace.dim(),
        chain_dims: chain.chain_dims.clone(),
        cutoffs: chain.cutoffs.clone(),
        tolerance: match tol {
            RankTolerance::Automatic => "automatic".into(),
            RankTolerance::Explicit(v) => format!("{v:e}"),
        },
        frame: MatrixData::from_matrix(chain.subspace.frame()),
        sectors,
        shemesh_nontrivial: shemesh,
        df_witness,
        picture: PictureOut {
            t_grid: times,
            max_interaction_deviation: picture.max_interaction_deviation(),
            max_free_deviation: picture.max_free_deviation(),
        },
        notes: src
            .loaded
            .spec
            .as_ref()
            .map(|s| s.notes().into_iter().map(String::from).collect())
            .unwrap_or_default(),
    };
    emit(args.out.as_deref(), &to_json_string(&report)?)?;
    Ok(OK)
}

fn sector_rows(gen: &GeneratorPair, dec: &SectorDecomposition, times: &[f64]) -> CliResult<Vec<SectorRow>> {
    let mut rows = Vec::with_capacity(dec.sectors.len());
    for s in &dec.sectors {
        let shifted = gen.shifted(s.alpha);
        let pic = verify_picture_invariance(&shifted, &s.subspace, times, picture_tol(&shifted, 5.0))?;
        rows.push(SectorRow {
            alpha: s.alpha,
            dim: s.subspace.dim(),
            chain_dims: s.chain_dims.clone(),
            max_interaction_deviation: pic.max_interaction_deviation(),
            max_free_deviation: pic.max_free_deviation(),
        });
    }
    Ok(rows)
}

enum StateInput {
    Vector(ComplexVector),
    Density(DensityMatrix),
}

/// The first basis vector of the largest interaction-free sector, or of M
/// for raw pairs.
fn builtin_vector(loaded: &LoadedModel) -> CliResult<ComplexVector> {
    let space: Subspace = match &loaded.model {
        LoadedKind::Closed(m) => sector_decompose(&m.h0, &m.h_i, None)?
            .sectors
            .into_iter()
            .max_by_key(|s| s.subspace.dim())
            .map(|s| s.subspace)
            .unwrap_or_else(|| Subspace::zero(m.dim())),
        _ => compute_m(&loaded.generator_pair()?, RankTolerance::Automatic)?.subspace,
    };
    if space.is_zero() {
        return Err(Error::InvalidState("the model has no interaction-free state".into()).into());
    }
    Ok(space.basis_vector(0))
}

fn resolve_state(source: &str, loaded: &LoadedModel) -> CliResult<StateInput> {
    match source {
        "builtin:maximally_mixed" => {
            let n = match &loaded.model {
                LoadedKind::Gksl(g) => g.dim(),
                other => {
                    return Err(CliError::Usage(format!(
                        "builtin:maximally_mixed needs a gksl model, got {}",
                        kind_label(other)
                    )))
                }
            };
            Ok(StateInput::Density(DensityMatrix::maximally_mixed(n)?))
        }
        "builtin:df" => match &loaded.model {
            LoadedKind::Gksl(_) => {
                let m = compute_m(&loaded.generator_pair()?, RankTolerance::Automatic)?.subspace;
                match find_df_state(&m, STATE_TOL)? {
                    Some(w) => Ok(StateInput::Density(w.state)),
                    None => Err(Error::InvalidState("no decoherence-free state found in M".into()).into()),
                }
            }
            _ => Ok(StateInput::Vector(builtin_vector(loaded)?)),
        },
        s if s.starts_with("builtin:") => Err(CliError::Usage(format!(
            "unknown built-in state {s:?} (expected builtin:maximally_mixed or builtin:df)"
        ))),
        path => Ok(match load_state(path)?.load()? {
            LoadedState::Vector(v) => StateInput::Vector(v),
            LoadedState::Density(d) => StateInput::Density(d),
        }),
    }
}

pub fn verify(args: &VerifyArgs) -> CliResult<u8> {
    if !(args.t_max.is_finite() && args.t_max >= 0.0) {
        return Err(CliError::Usage(format!("--t-max must be finite and >= 0, got {}", args.t_max)));
    }
    if args.t_steps == 0 {
        return Err(CliError::Usage("--t-steps must be at least 1".into()));
    }
    let tol = args.tol.unwrap_or(DEFAULT_VERIFY_TOL);
    if !(tol.is_finite() && tol >= 0.0) {
        return Err(CliError::Usage(format!("--tol must be finite and >= 0, got {tol}")));
    }
    let src = load_model(&args.model.model, None)?;
    let state = resolve_state(&args.state, &src.loaded)?;
    let grid = uniform_grid(args.t_max, args.t_steps);

    let core = match (&src.loaded.model, state) {
        (LoadedKind::Closed(m), StateInput::Vector(psi)) => {
            let subsystems = m.subsystems.as_ref().map(|(a, b)| (a, b));
            verify_closed_evolution(&m.h0, &m.h_i, &psi, subsystems, &grid, tol)?
        }
        (LoadedKind::Gksl(g), StateInput::Vector(psi)) => {
            verify_unitary_evolution(g, &DensityMatrix::pure(&psi)?, &grid, tol)?
        }
        (LoadedKind::Gksl(g), StateInput::Density(rho)) => verify_unitary_evolution(g, &rho, &grid, tol)?,
        (LoadedKind::RawPair(p), StateInput::Vector(psi)) => {
            if psi.len() != p.dim() {
                return Err(Error::DimensionMismatch {
                    context: "state vs model",
                    left: psi.len(),
                    right: p.dim(),
                }
                .into());
            }
            let x = ComplexMatrix::from_column_slice(psi.len(), 1, psi.as_slice());
            let deviation = propagation_deviation(p, &x, &grid)?;
            let verdict = deviation.iter().all(|&d| d <= tol);
            bfree_core::liouville::VerificationReport {
                t_grid: grid.clone(),
                trace_error: vec![0.0; deviation.len()],
                hermiticity_error: vec![0.0; deviation.len()],
                deviation,
                energy1: None,
                energy2: None,
                verdict,
                tolerance_used: tol,
            }
        }
        (other, StateInput::Density(_)) => {
            return Err(CliError::Usage(format!(
                "a density matrix needs a gksl model, got {}",
                kind_label(other)
            )))
        }
    };

    let report = VerifyReport {
        schema_version: report::version(),
        command: "verify",
        model: src.label.clone(),
        state: args.state.clone(),
        max_deviation: core.max_deviation(),
        t_grid: core.t_grid,
        deviation: core.deviation,
        energy1: core.energy1,
        energy2: core.energy2,
        trace_error: core.trace_error,
        hermiticity_error: core.hermiticity_error,
        tolerance_used: core.tolerance_used,
        verdict: core.verdict,
    };
    let json = to_json_string(&report)?;
    if let Some(out) = &args.out {
        write_atomic(&out.with_extension("csv"), &report::verify_csv(&report))?;
    }
    emit(args.out.as_deref(), &json)?;
    Ok(if report.verdict { OK } else { VERDICT_FALSE })
}

pub fn shemesh(args: &ShemeshArgs) -> CliResult<u8> {
    let src = load_model(&args.model.model, None)?;
    if let LoadedKind::Gksl(_) = src.loaded.model {
        return Err(CliError::Usage("shemesh takes a raw_pair or closed_bipartite model".into()));
    }
    let gen = src.loaded.generator_pair()?;
    let max_power = args.max_power.unwrap_or(gen.dim().saturating_sub(1));
    let rep = shemesh_nontrivial(&gen, max_power, rank_tol(args.tol)?)?;
    let pair = |z: Option<num_complex::Complex64>| z.map(|z| [z.re, z.im]);
    let out = ShemeshOut {
        schema_version: report::version(),
        command: "shemesh",
        model: src.label.clone(),
        nontrivial: rep.nontrivial,
        common_dim: rep.subspace.dim(),
        max_power,
        powers_examined: [rep.powers_examined.0, rep.powers_examined.1],
        witness: rep.witness.as_ref().map(VectorData::from_vector),
        eigenvalue_a: pair(rep.eigenvalue_a),
        eigenvalue_b: pair(rep.eigenvalue_b),
        witness_residual: rep.witness_residual,
    };
    emit(args.out.as_deref(), &to_json_string(&out)?)?;
    Ok(OK)
}

pub fn catalog(action: &CatalogAction) -> CliResult<u8> {
    match action {
        CatalogAction::List => {
            let entries: Vec<CatalogEntry> = ModelSpec::catalog()
                .iter()
                .map(|s| CatalogEntry {
                    name: s.name(),
                    kind: match s.kind() {
                        ModelKind::ClosedBipartite => "closed_bipartite",
                        ModelKind::Gksl => "gksl",
                    },
                    defaults: serde_json::to_value(s).expect("plain data"),
                })
                .collect();
            for e in &entries {
                println!("{:<16} {:<17} {}", e.name, e.kind, e.defaults);
            }
        }
        CatalogAction::Show { name } => {
            println!("{}", ModelSpec::default_for(name)?.describe());
        }
        CatalogAction::Export { name, path } => {
            let file = ModelFile::export(&ModelSpec::default_for(name)?)?;
            write_atomic(Path::new(path), &file.to_json()?)?;
        }
    }
    Ok(OK)
}
