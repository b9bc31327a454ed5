use bfree_core::modelfile::{MatrixData, VectorData, SCHEMA_VERSION};
use serde::Serialize;

#[derive(Serialize)]
pub struct SubspaceReport {
    pub schema_version: u32,
    pub command: &'static str,
    pub model: String,
    pub kind: &'static str,
    pub basis_order: String,
    pub ambient_dim: usize,
    pub m_dim: usize,
    pub chain_dims: Vec<usize>,
    pub cutoffs: Vec<f64>,
    /// `"automatic"` or the explicit cutoff.
    pub tolerance: String,
    /// Orthonormal columns spanning M (operator-space vectors for GKSL
    /// models, column-stacked).
    pub frame: MatrixData,
    pub sectors: Option<Vec<SectorRow>>,
    pub shemesh_nontrivial: Option<bool>,
    pub df_witness: Option<DfWitnessOut>,
    pub picture: PictureOut,
    pub notes: Vec<String>,
}

#[derive(Serialize)]
pub struct SectorRow {
    pub alpha: f64,
    pub dim: usize,
    pub chain_dims: Vec<usize>,
    pub max_interaction_deviation: f64,
    pub max_free_deviation: f64,
}

#[derive(Serialize)]
pub struct DfWitnessOut {
    pub state: MatrixData,
    pub raw_min_eigenvalue: f64,
}

#[derive(Serialize)]
pub struct PictureOut {
    pub t_grid: Vec<f64>,
    pub max_interaction_deviation: f64,
    pub max_free_deviation: f64,
}

#[derive(Serialize)]
pub struct VerifyReport {
    pub schema_version: u32,
    pub command: &'static str,
    pub model: String,
    pub state: String,
    pub t_grid: Vec<f64>,
    pub deviation: Vec<f64>,
    pub energy1: Option<Vec<f64>>,
    pub energy2: Option<Vec<f64>>,
    pub trace_error: Vec<f64>,
    pub hermiticity_error: Vec<f64>,
    pub max_deviation: f64,
    pub tolerance_used: f64,
    pub verdict: bool,
}

#[derive(Serialize)]
pub struct ShemeshOut {
    pub schema_version: u32,
    pub command: &'static str,
    pub model: String,
    pub nontrivial: bool,
    pub common_dim: usize,
    pub max_power: usize,
    pub powers_examined: [usize; 2],
    pub witness: Option<VectorData>,
    pub eigenvalue_a: Option<[f64; 2]>,
    pub eigenvalue_b: Option<[f64; 2]>,
    pub witness_residual: Option<f64>,
}

#[derive(Serialize)]
pub struct CatalogEntry {
    pub name: &'static str,
    pub kind: &'static str,
    pub defaults: serde_json::Value,
}

pub fn version() -> u32 {
    SCHEMA_VERSION
}

/// CSV companion of a verification report: `t,deviation,E1,E2`, energies
/// left empty when the model has no bipartite split.
pub fn verify_csv(r: &VerifyReport) -> String {
    let mut out = String::from("t,deviation,E1,E2\n");
    let cell = |v: &Option<Vec<f64>>, i: usize| match v {
        Some(v) => format!("{:.16e}", v[i]),
        None => String::new(),
    };
    for (i, t) in r.t_grid.iter().enumerate() {
        out.push_str(&format!(
            "{:.16e},{:.16e},{},{}\n",
            t,
            r.deviation[i],
            cell(&r.energy1, i),
            cell(&r.energy2, i)
        ));
    }
    out
}
