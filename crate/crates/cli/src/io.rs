use std::fmt;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use bfree_core::modelfile::{LoadedModel, ModelFile, StateFile};
use bfree_core::models::ModelSpec;

use crate::{INVALID, NUMERICAL};

#[derive(Debug)]
pub enum CliError {
    Core(bfree_core::Error),
    Io { path: PathBuf, source: std::io::Error },
    Usage(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Core(e) if e.is_numerical() => NUMERICAL,
            _ => INVALID,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Core(e) => write!(f, "{e}"),
            CliError::Io { path, source } => write!(f, "{}: {source}", path.display()),
            CliError::Usage(msg) => f.write_str(msg),
        }
    }
}

impl From<bfree_core::Error> for CliError {
    fn from(e: bfree_core::Error) -> Self {
        CliError::Core(e)
    }
}

pub type CliResult<T> = Result<T, CliError>;

fn read(path: &Path) -> CliResult<String> {
    fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })
}

/// Where a model came from, for the report.
pub struct ModelSource {
    pub label: String,
    pub loaded: LoadedModel,
}

pub fn load_model(source: &str, sector_n: Option<usize>) -> CliResult<ModelSource> {
    let (label, mut loaded) = match source.strip_prefix("catalog:") {
        Some(name) => {
            let spec = ModelSpec::default_for(name)?;
            (source.to_string(), ModelFile::export(&spec)?.load()?)
        }
        None => {
            let text = read(Path::new(source))?;
            (source.to_string(), ModelFile::from_json(&text)?.load()?)
        }
    };
    if let Some(n) = sector_n {
        let spec = match &loaded.spec {
            Some(ModelSpec::Example2 { omega, omega0, gamma1, gamma2, n_max, .. }) => ModelSpec::Example2 {
                omega: *omega,
                omega0: *omega0,
                gamma1: *gamma1,
                gamma2: *gamma2,
                n_max: *n_max,
                sector_n: Some(n),
            },
            _ => {
                return Err(CliError::Usage(
                    "--sector-n applies only to the two-mode model (example2)".into(),
                ))
            }
        };
        loaded = ModelFile::export(&spec)?.load()?;
    }
    Ok(ModelSource { label, loaded })
}

pub fn load_state(path: &str) -> CliResult<StateFile> {
    Ok(StateFile::from_json(&read(Path::new(path))?)?)
}

/// Writes through a temporary file in the target directory and renames it
/// into place.
pub fn write_atomic(path: &Path, contents: &str) -> CliResult<()> {
    let io_err = |source| CliError::Io {
        path: path.to_path_buf(),
        source,
    };
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(io_err)?;
    tmp.write_all(contents.as_bytes()).map_err(io_err)?;
    tmp.flush().map_err(io_err)?;
    tmp.persist(path).map_err(|e| io_err(e.error))?;
    Ok(())
}

/// Writes to `out` or, without one, to stdout.
pub fn emit(out: Option<&Path>, contents: &str) -> CliResult<()> {
    match out {
        Some(p) => write_atomic(p, contents),
        None => {
            print!("{contents}");
            Ok(())
        }
    }
}
