use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::args::Command;
use crate::failure::Failure;

pub const TOOL: &str = "wardgeo";

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FileDigest {
    pub path: PathBuf,
    pub sha256: String,
}

/// Everything needed to re-run a command and check its outputs. No
/// timestamps, so identical runs give identical manifests.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunManifest {
    pub tool: String,
    pub version: String,
    pub subcommand: String,
    pub argv: Vec<String>,
    pub command: Command,
    pub seed: Option<u64>,
    pub inputs: Vec<FileDigest>,
    pub outputs: Vec<FileDigest>,
}

pub fn sha256_file(path: &Path) -> Result<String, Failure> {
    let bytes = fs::read(path).map_err(|e| Failure::input(format!("{}: {e}", path.display())))?;
    Ok(Sha256::digest(&bytes)
        .iter()
        .map(|b| format!("{b:02x}"))
        .collect())
}

pub fn digests<P: AsRef<Path>>(paths: &[P]) -> Result<Vec<FileDigest>, Failure> {
    paths
        .iter()
        .map(|p| {
            Ok(FileDigest {
                path: p.as_ref().to_path_buf(),
                sha256: sha256_file(p.as_ref())?,
            })
        })
        .collect()
}

impl RunManifest {
    pub fn new(command: &Command, argv: Vec<String>, seed: Option<u64>) -> Result<Self, Failure> {
        Ok(Self {
            tool: TOOL.into(),
            version: env!("CARGO_PKG_VERSION").into(),
            subcommand: command.name().into(),
            argv,
            command: command.clone(),
            seed,
            inputs: digests(&command.inputs())?,
            outputs: digests(&command.outputs())?,
        })
    }

    pub fn read(path: &Path) -> Result<Self, Failure> {
        let text = fs::read_to_string(path)
            .map_err(|e| Failure::input(format!("{}: {e}", path.display())))?;
        serde_json::from_str(&text)
            .map_err(|e| Failure::input(format!("{}: not a run manifest: {e}", path.display())))
    }

    pub fn write(&self, path: &Path) -> Result<(), Failure> {
        let mut text =
            serde_json::to_string_pretty(self).map_err(|e| Failure::internal(e.to_string()))?;
        text.push('\n');
        crate::run::write_output(path, &text)
    }
}

/// `<output>.manifest.json`.
pub fn default_path(output: &Path) -> PathBuf {
    let mut s = output.as_os_str().to_owned();
    s.push(".manifest.json");
    PathBuf::from(s)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn digest_of_known_content() {
        let dir = std::env::temp_dir().join(format!("wardgeo-digest-{}", std::process::id()));
        fs::create_dir_all(&dir).unwrap();
        let p = dir.join("abc.txt");
        fs::write(&p, "abc").unwrap();
        assert_eq!(
            sha256_file(&p).unwrap(),
            "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad"
        );
        fs::remove_dir_all(&dir).unwrap();
        assert_eq!(
            default_path(Path::new("x/t.json")),
            Path::new("x/t.json.manifest.json")
        );
    }
}
