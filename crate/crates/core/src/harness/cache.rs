//! On-disk expansions keyed by potential, energy, order and problem kind.

use std::path::{Path, PathBuf};

use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::expansion::{AsymptoticSolution, Problem};

/// Short hex key identifying an expansion's inputs.
pub fn cache_key(sol: &AsymptoticSolution) -> String {
    let mut h = Sha256::new();
    h.update(sol.potential.fingerprint().as_bytes());
    h.update(sol.energy.to_le_bytes());
    h.update((sol.order() as u64).to_le_bytes());
    h.update(sol.problem.kind().as_bytes());
    match &sol.problem {
        Problem::Source { source } => {
            h.update(serde_json::to_vec(source).expect("field serialises"));
        }
        Problem::PlaneWave { direction } => h.update(direction.to_le_bytes()),
    }
    hex::encode(h.finalize())[..16].to_string()
}

/// Writes `<stem>-<kind>-<key>.json` under `dir` and returns its path.
pub fn save_expansion(sol: &AsymptoticSolution, dir: &Path, stem: &str) -> Result<PathBuf> {
    std::fs::create_dir_all(dir).map_err(|e| Error::IoFailure(format!("{}: {e}", dir.display())))?;
    let path = dir.join(format!("{stem}-{}-{}.json", sol.problem.kind(), cache_key(sol)));
    let text = serde_json::to_string(sol).map_err(|e| Error::IoFailure(e.to_string()))?;
    std::fs::write(&path, text).map_err(|e| Error::IoFailure(format!("{}: {e}", path.display())))?;
    Ok(path)
}

pub fn load_expansion(path: &Path) -> Result<AsymptoticSolution> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::IoFailure(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| Error::ConfigInvalid(format!("{}: {e}", path.display())))
}
