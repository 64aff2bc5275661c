//! Reading state and channel files, recording a digest of every byte read.

use std::fs;
use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use serde::Serialize;
use sha2::{Digest, Sha256};

use replicheck::io::{ChannelDoc, StateDoc};
use replicheck::{Channel, State};

use crate::error::{CliError, CliResult};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InputDigest {
    pub role: String,
    pub path: String,
    pub sha256: String,
}

#[derive(Debug, Default)]
pub struct Inputs {
    pub digests: Vec<InputDigest>,
}

impl Inputs {
    pub fn read(&mut self, path: &Path, role: &str) -> CliResult<Vec<u8>> {
        let bytes = fs::read(path).map_err(|e| CliError::malformed(e.to_string()).context(path.display()))?;
        self.digests.push(InputDigest {
            role: role.to_string(),
            path: path.display().to_string(),
            sha256: hex::encode(Sha256::digest(&bytes)),
        });
        Ok(bytes)
    }

    pub fn json<T: DeserializeOwned>(&mut self, path: &Path, role: &str) -> CliResult<T> {
        let bytes = self.read(path, role)?;
        serde_json::from_slice(&bytes).map_err(|e| CliError::from(e).context(path.display()))
    }

    /// State plus its subsystem dimensions.
    pub fn state(&mut self, path: &Path, role: &str) -> CliResult<(State, Vec<usize>)> {
        let doc: StateDoc = self.json(path, role)?;
        doc.to_state().map_err(|e| CliError::from(e).context(path.display()))
    }

    pub fn channel(&mut self, path: &Path, role: &str) -> CliResult<Channel> {
        let doc: ChannelDoc = self.json(path, role)?;
        doc.to_channel().map_err(|e| CliError::from(e).context(path.display()))
    }
}

/// Resolves `path` against the directory of the file that referenced it.
pub fn relative_to(base: &Path, path: &str) -> PathBuf {
    let p = Path::new(path);
    if p.is_absolute() {
        return p.to_path_buf();
    }
    base.parent().map_or_else(|| p.to_path_buf(), |dir| dir.join(p))
}
