//! Run manifests for reproducibility.
//!
//! Every command writes `manifest.toml` into its output directory: the fully
//! resolved configuration plus identifying comments (command, version, and a
//! SHA-256 over the resolved config). The manifest is itself a valid config
//! file, so `--config <output>/manifest.toml` reruns the exact same job.
//! Nothing time-dependent goes in, keeping reruns byte-identical.

use std::path::Path;

use sha2::{Digest, Sha256};

use crate::config::ExperimentConfig;

pub fn config_hash(config: &ExperimentConfig) -> String {
    let mut hasher = Sha256::new();
    hasher.update(config.to_toml().as_bytes());
    hex_string(&hasher.finalize())
}

fn hex_string(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}

pub fn write_manifest(dir: &Path, command: &str, config: &ExperimentConfig) -> anyhow::Result<()> {
    std::fs::create_dir_all(dir)?;
    let body = format!(
        "# chordseq manifest\n# command = {command}\n# version = {}\n# config_sha256 = {}\n\n{}",
        env!("CARGO_PKG_VERSION"),
        config_hash(config),
        config.to_toml()
    );
    std::fs::write(dir.join("manifest.toml"), body)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn manifest_reloads_as_the_same_config() {
        let dir = tempfile::tempdir().unwrap();
        let mut config = ExperimentConfig::default();
        config.seed = 1234;
        write_manifest(dir.path(), "exp1", &config).unwrap();

        let reloaded = ExperimentConfig::load(&dir.path().join("manifest.toml")).unwrap();
        assert_eq!(config, reloaded);
        assert_eq!(config_hash(&config), config_hash(&reloaded));
    }

    #[test]
    fn hash_tracks_config_changes() {
        let a = ExperimentConfig::default();
        let mut b = ExperimentConfig::default();
        b.seed += 1;
        assert_ne!(config_hash(&a), config_hash(&b));
    }
}
