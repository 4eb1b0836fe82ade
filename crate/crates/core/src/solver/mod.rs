//! Samplers for compiled QUBOs and export for external solvers.

mod anneal;
mod exact;
mod exhaustive;

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

pub use anneal::{anneal_read, solve_anneal, AnnealParams, Sample, SampleSet};
pub use exact::{solve_exact, ExactOptions, ExactResult};
pub use exhaustive::{solve_exhaustive, GroundStates, DEFAULT_VAR_LIMIT};

use crate::encode::Encoding;
use crate::error::Result;
use crate::qubo::{io, Qubo};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ExportFormat {
    Json,
    Coord,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ExportedFiles {
    pub qubo: PathBuf,
    pub encoding: PathBuf,
}

/// Writes `qubo.json` (or `qubo.coord`) and `encoding.json` into `dir`.
pub fn export_qubo(q: &Qubo, encoding: &Encoding, dir: &Path, format: ExportFormat) -> Result<ExportedFiles> {
    std::fs::create_dir_all(dir)?;
    let (name, text) = match format {
        ExportFormat::Json => ("qubo.json", io::to_json(q)),
        ExportFormat::Coord => ("qubo.coord", io::to_coord(q)),
    };
    let qubo = dir.join(name);
    std::fs::write(&qubo, text)?;
    let encoding_path = dir.join("encoding.json");
    std::fs::write(&encoding_path, serde_json::to_string(encoding)?)?;
    Ok(ExportedFiles {
        qubo,
        encoding: encoding_path,
    })
}
