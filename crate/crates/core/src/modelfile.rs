//! JSON interchange for models and states.
//!
//! Complex entries are `[re, im]` pairs; matrices are arrays of rows. A model
//! file carries `schema_version`, a `kind`, named `matrices`, free-form
//! `parameters` and a `basis_order` tag:
//!
//! | kind               | matrices                               | parameters                   |
//! |--------------------|----------------------------------------|------------------------------|
//! | `closed_bipartite` | `h0`, `h_i`, optional `h1` and `h2`     | optional `model`             |
//! | `gksl`             | `h0`, `v1` … `vk`                      | `rates` (k entries), `model` |
//! | `raw_pair`         | `a`, `b`                               | optional `system_dim`        |
//!
//! `parameters.model`, when present, is the catalog specification the file
//! was exported from.

use std::collections::BTreeMap;
use std::io;

use serde::{Deserialize, Serialize};
use serde_json::ser::Formatter;
use serde_json::Value;

use crate::bfree::{GeneratorPair, SpaceKind};
use crate::error::{Error, Result};
use crate::liouville::{DensityMatrix, GkslSpec, NoiseChannel};
use crate::models::{BuiltModel, ClosedModel, ModelKind, ModelSpec};
use crate::numkernel::{c64, ComplexMatrix, ComplexVector};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FileKind {
    ClosedBipartite,
    Gksl,
    RawPair,
}

/// Rows of `[re, im]` pairs.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct MatrixData(pub Vec<Vec<[f64; 2]>>);

impl MatrixData {
    pub fn from_matrix(m: &ComplexMatrix) -> Self {
        MatrixData(
            (0..m.nrows())
                .map(|i| (0..m.ncols()).map(|j| [m[(i, j)].re, m[(i, j)].im]).collect())
                .collect(),
        )
    }

    pub fn to_matrix(&self, name: &str) -> Result<ComplexMatrix> {
        let rows = self.0.len();
        let cols = self.0.first().map_or(0, Vec::len);
        if rows == 0 || cols == 0 {
            return Err(Error::Format(format!("matrix `{name}` is empty")));
        }
        if let Some(bad) = self.0.iter().position(|r| r.len() != cols) {
            return Err(Error::Format(format!(
                "matrix `{name}` is ragged: row {bad} has {} entries, row 0 has {cols}",
                self.0[bad].len()
            )));
        }
        if self.0.iter().flatten().flatten().any(|x| !x.is_finite()) {
            return Err(Error::Format(format!("matrix `{name}` has non-finite entries")));
        }
        Ok(ComplexMatrix::from_fn(rows, cols, |i, j| {
            let [re, im] = self.0[i][j];
            c64(re, im)
        }))
    }
}

/// A vector of `[re, im]` pairs.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct VectorData(pub Vec<[f64; 2]>);

impl VectorData {
    pub fn from_vector(v: &ComplexVector) -> Self {
        VectorData(v.iter().map(|z| [z.re, z.im]).collect())
    }

    pub fn to_vector(&self) -> Result<ComplexVector> {
        if self.0.is_empty() {
            return Err(Error::Format("state vector is empty".into()));
        }
        if self.0.iter().flatten().any(|x| !x.is_finite()) {
            return Err(Error::Format("state vector has non-finite entries".into()));
        }
        Ok(ComplexVector::from_iterator(
            self.0.len(),
            self.0.iter().map(|&[re, im]| c64(re, im)),
        ))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelFile {
    pub schema_version: u32,
    pub kind: FileKind,
    pub matrices: BTreeMap<String, MatrixData>,
    #[serde(default)]
    pub parameters: BTreeMap<String, Value>,
    pub basis_order: String,
}

/// A model read from a file.
#[derive(Clone, Debug)]
pub struct LoadedModel {
    /// The catalog specification, when the file records one.
    pub spec: Option<ModelSpec>,
    pub model: LoadedKind,
    pub basis_order: String,
}

#[derive(Clone, Debug)]
pub enum LoadedKind {
    Closed(ClosedModel),
    Gksl(GkslSpec),
    RawPair(GeneratorPair),
}

impl LoadedModel {
    /// The generator pair: `(-i H_0, -i H_I)` for closed models, the
    /// vectorized `(L_0, L_D)` for GKSL models.
    pub fn generator_pair(&self) -> Result<GeneratorPair> {
        match &self.model {
            LoadedKind::Closed(m) => GeneratorPair::from_hamiltonians(&m.h0, &m.h_i),
            LoadedKind::Gksl(g) => crate::liouville::vectorize_generator(g),
            LoadedKind::RawPair(p) => Ok(p.clone()),
        }
    }
}

impl ModelFile {
    /// The file for a catalog specification.
    pub fn export(spec: &ModelSpec) -> Result<Self> {
        let built = spec.build()?;
        let mut matrices = BTreeMap::new();
        let mut parameters = BTreeMap::new();
        parameters.insert(
            "model".to_string(),
            serde_json::to_value(spec).map_err(|e| Error::Format(e.to_string()))?,
        );
        let kind = match &built {
            BuiltModel::Closed(m) => {
                matrices.insert("h0".into(), MatrixData::from_matrix(&m.h0));
                matrices.insert("h_i".into(), MatrixData::from_matrix(&m.h_i));
                if let Some((h1, h2)) = &m.subsystems {
                    matrices.insert("h1".into(), MatrixData::from_matrix(h1));
                    matrices.insert("h2".into(), MatrixData::from_matrix(h2));
                }
                FileKind::ClosedBipartite
            }
            BuiltModel::Gksl(g) => {
                matrices.insert("h0".into(), MatrixData::from_matrix(g.h0()));
                for (k, ch) in g.noise().iter().enumerate() {
                    matrices.insert(format!("v{}", k + 1), MatrixData::from_matrix(&ch.op));
                }
                parameters.insert(
                    "rates".into(),
                    Value::from(g.noise().iter().map(|c| c.rate).collect::<Vec<_>>()),
                );
                FileKind::Gksl
            }
        };
        debug_assert_eq!(
            matches!(kind, FileKind::ClosedBipartite),
            spec.kind() == ModelKind::ClosedBipartite
        );
        Ok(ModelFile {
            schema_version: SCHEMA_VERSION,
            kind,
            matrices,
            parameters,
            basis_order: spec.basis_order(),
        })
    }

    /// A `raw_pair` file for an arbitrary generator pair.
    pub fn raw_pair(pair: &GeneratorPair, basis_order: impl Into<String>) -> Self {
        let mut matrices = BTreeMap::new();
        matrices.insert("a".into(), MatrixData::from_matrix(pair.a()));
        matrices.insert("b".into(), MatrixData::from_matrix(pair.b()));
        let mut parameters = BTreeMap::new();
        if let SpaceKind::DensityOperator { system_dim } = pair.kind() {
            parameters.insert("system_dim".into(), Value::from(system_dim));
        }
        ModelFile {
            schema_version: SCHEMA_VERSION,
            kind: FileKind::RawPair,
            matrices,
            parameters,
            basis_order: basis_order.into(),
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let file: ModelFile =
            serde_json::from_str(text).map_err(|e| Error::Format(format!("model file: {e}")))?;
        if file.schema_version != SCHEMA_VERSION {
            return Err(Error::Format(format!(
                "unsupported schema_version {} (expected {SCHEMA_VERSION})",
                file.schema_version
            )));
        }
        Ok(file)
    }

    pub fn to_json(&self) -> Result<String> {
        to_json_string(self)
    }

    fn matrix(&self, name: &str) -> Result<ComplexMatrix> {
        self.matrices
            .get(name)
            .ok_or_else(|| Error::Format(format!("{:?} model needs matrix `{name}`", self.kind)))?
            .to_matrix(name)
    }

    fn square(&self, name: &str) -> Result<ComplexMatrix> {
        let m = self.matrix(name)?;
        if m.nrows() != m.ncols() {
            return Err(Error::Format(format!(
                "matrix `{name}` is {}x{}, expected square",
                m.nrows(),
                m.ncols()
            )));
        }
        Ok(m)
    }

    fn allow_only(&self, names: &[&str], noise: bool) -> Result<()> {
        for key in self.matrices.keys() {
            let is_noise = noise && noise_index(key).is_some();
            if !names.contains(&key.as_str()) && !is_noise {
                return Err(Error::Format(format!(
                    "unexpected matrix `{key}` in {:?} model",
                    self.kind
                )));
            }
        }
        Ok(())
    }

    pub fn load(&self) -> Result<LoadedModel> {
        let spec = match self.parameters.get("model") {
            Some(v) => Some(
                serde_json::from_value::<ModelSpec>(v.clone())
                    .map_err(|e| Error::Format(format!("parameters.model: {e}")))?,
            ),
            None => None,
        };
        let model = match self.kind {
            FileKind::ClosedBipartite => {
                self.allow_only(&["h0", "h_i", "h1", "h2"], false)?;
                let h0 = self.square("h0")?;
                let h_i = self.square("h_i")?;
                let subsystems = match (self.matrices.contains_key("h1"), self.matrices.contains_key("h2")) {
                    (true, true) => Some((self.square("h1")?, self.square("h2")?)),
                    (false, false) => None,
                    _ => return Err(Error::Format("give both `h1` and `h2` or neither".into())),
                };
                GeneratorPair::from_hamiltonians(&h0, &h_i)?;
                if let Some((h1, h2)) = &subsystems {
                    if h1.nrows() * h2.nrows() != h0.nrows() {
                        return Err(Error::DimensionMismatch {
                            context: "subsystem dimensions product vs h0",
                            left: h1.nrows() * h2.nrows(),
                            right: h0.nrows(),
                        });
                    }
                }
                LoadedKind::Closed(ClosedModel { h0, h_i, subsystems })
            }
            FileKind::Gksl => {
                self.allow_only(&["h0"], true)?;
                let mut ops: Vec<(usize, &String)> = self
                    .matrices
                    .keys()
                    .filter_map(|k| noise_index(k).map(|i| (i, k)))
                    .collect();
                ops.sort();
                if ops.iter().enumerate().any(|(pos, (i, _))| *i != pos + 1) {
                    return Err(Error::Format("noise operators must be named v1, v2, … without gaps".into()));
                }
                let rates: Vec<f64> = match self.parameters.get("rates") {
                    Some(v) => serde_json::from_value(v.clone())
                        .map_err(|e| Error::Format(format!("parameters.rates: {e}")))?,
                    None if ops.is_empty() => Vec::new(),
                    None => return Err(Error::Format("gksl model needs parameters.rates".into())),
                };
                if rates.len() != ops.len() {
                    return Err(Error::Format(format!(
                        "{} noise operators but {} rates",
                        ops.len(),
                        rates.len()
                    )));
                }
                let noise = ops
                    .iter()
                    .zip(&rates)
                    .map(|((_, name), &rate)| Ok(NoiseChannel { op: self.square(name)?, rate }))
                    .collect::<Result<Vec<_>>>()?;
                LoadedKind::Gksl(GkslSpec::new(self.square("h0")?, noise)?)
            }
            FileKind::RawPair => {
                self.allow_only(&["a", "b"], false)?;
                let kind = match self.parameters.get("system_dim") {
                    Some(v) => SpaceKind::DensityOperator {
                        system_dim: v
                            .as_u64()
                            .ok_or_else(|| Error::Format("parameters.system_dim must be a positive integer".into()))?
                            as usize,
                    },
                    None => SpaceKind::StateVector,
                };
                LoadedKind::RawPair(GeneratorPair::new(self.square("a")?, self.square("b")?, kind)?)
            }
        };
        Ok(LoadedModel {
            spec,
            model,
            basis_order: self.basis_order.clone(),
        })
    }
}

fn noise_index(name: &str) -> Option<usize> {
    let digits = name.strip_prefix('v')?;
    if digits.is_empty() || digits.starts_with('0') || !digits.bytes().all(|b| b.is_ascii_digit()) {
        return None;
    }
    digits.parse().ok()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StateKind {
    StateVector,
    DensityMatrix,
}

/// A state file: `{"schema_version": 1, "kind": "state_vector", "data": [[re, im], …]}`
/// or `"kind": "density_matrix"` with `data` a matrix.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StateFile {
    pub schema_version: u32,
    pub kind: StateKind,
    pub data: Value,
}

#[derive(Clone, Debug)]
pub enum LoadedState {
    Vector(ComplexVector),
    Density(DensityMatrix),
}

impl StateFile {
    pub fn vector(v: &ComplexVector) -> Self {
        StateFile {
            schema_version: SCHEMA_VERSION,
            kind: StateKind::StateVector,
            data: serde_json::to_value(VectorData::from_vector(v)).expect("plain data"),
        }
    }

    pub fn density(rho: &DensityMatrix) -> Self {
        StateFile {
            schema_version: SCHEMA_VERSION,
            kind: StateKind::DensityMatrix,
            data: serde_json::to_value(MatrixData::from_matrix(rho.matrix())).expect("plain data"),
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let file: StateFile =
            serde_json::from_str(text).map_err(|e| Error::Format(format!("state file: {e}")))?;
        if file.schema_version != SCHEMA_VERSION {
            return Err(Error::Format(format!(
                "unsupported schema_version {} (expected {SCHEMA_VERSION})",
                file.schema_version
            )));
        }
        Ok(file)
    }

    pub fn load(&self) -> Result<LoadedState> {
        match self.kind {
            StateKind::StateVector => {
                let v: VectorData = serde_json::from_value(self.data.clone())
                    .map_err(|e| Error::Format(format!("state data: {e}")))?;
                Ok(LoadedState::Vector(v.to_vector()?))
            }
            StateKind::DensityMatrix => {
                let m: MatrixData = serde_json::from_value(self.data.clone())
                    .map_err(|e| Error::Format(format!("state data: {e}")))?;
                Ok(LoadedState::Density(DensityMatrix::new(m.to_matrix("data")?)?))
            }
        }
    }
}

/// Compact JSON with every float written with 17 significant digits, so
/// output is byte-stable and reads back to the same `f64`. Non-finite floats
/// become `null`.
pub fn to_json_string<T: Serialize + ?Sized>(value: &T) -> Result<String> {
    let mut out = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut out, Fixed17);
    value
        .serialize(&mut ser)
        .map_err(|e| Error::Format(e.to_string()))?;
    out.push(b'\n');
    Ok(String::from_utf8(out).expect("serde_json writes UTF-8"))
}

struct Fixed17;

impl Formatter for Fixed17 {
    fn write_f64<W: ?Sized + io::Write>(&mut self, writer: &mut W, value: f64) -> io::Result<()> {
        write!(writer, "{value:.16e}")
    }

    fn write_f32<W: ?Sized + io::Write>(&mut self, writer: &mut W, value: f32) -> io::Result<()> {
        self.write_f64(writer, value as f64)
    }
}
