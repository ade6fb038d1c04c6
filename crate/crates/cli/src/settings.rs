use std::path::{Path, PathBuf};

use anyhow::Context;
use clap::Args;
use scribblekit::io::{read_config, KitConfig};

/// Errors that map to exit code 2.
#[derive(Debug)]
pub struct UsageError(pub String);

impl std::fmt::Display for UsageError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

pub fn usage(message: impl Into<String>) -> anyhow::Error {
    UsageError(message.into()).into()
}

/// `path` if it exists, otherwise a usage error naming it.
pub fn existing(path: &Path) -> anyhow::Result<&Path> {
    if path.exists() {
        Ok(path)
    } else {
        Err(usage(format!("input not found: {}", path.display())))
    }
}

/// Settings layered as: command defaults, then `--config`, then `--set`,
/// then the dedicated flags.
#[derive(Debug, Clone, Default, Args)]
pub struct ConfigArgs {
    /// Flat `key = value` config file.
    #[arg(long, global = true, value_name = "FILE")]
    pub config: Option<PathBuf>,
    /// Override one config key; repeatable.
    #[arg(long = "set", global = true, value_name = "KEY=VALUE")]
    pub set: Vec<String>,
    /// Weight of the global affinity loss.
    #[arg(long, global = true)]
    pub mu: Option<f64>,
    /// Weight of the local coherence loss.
    #[arg(long, global = true)]
    pub beta: Option<f64>,
    #[arg(long, global = true)]
    pub epochs: Option<usize>,
    #[arg(long, global = true)]
    pub lr_max: Option<f64>,
}

impl ConfigArgs {
    pub fn resolve(&self, base: KitConfig) -> anyhow::Result<KitConfig> {
        let mut cfg = match &self.config {
            Some(path) => read_config(existing(path)?, base).with_context(|| format!("reading {}", path.display()))?,
            None => base,
        };
        for assignment in &self.set {
            let (key, value) = assignment
                .split_once('=')
                .ok_or_else(|| usage(format!("--set expects KEY=VALUE, got {assignment:?}")))?;
            cfg.set(key.trim(), value.trim()).map_err(|m| usage(format!("--set {assignment}: {m}")))?;
        }
        if let Some(v) = self.mu {
            cfg.weights.mu = v;
        }
        if let Some(v) = self.beta {
            cfg.weights.beta = v;
        }
        if let Some(v) = self.epochs {
            cfg.train.epochs = v;
        }
        if let Some(v) = self.lr_max {
            cfg.train.lr_max = v;
        }
        cfg.validate().map_err(|e| usage(format!("invalid configuration: {e}")))?;
        Ok(cfg)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flags_override_set_which_overrides_file() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("kit.cfg");
        std::fs::write(&path, "mu = 0.5\nbeta = 0.5\nepochs = 3\n").unwrap();
        let args = ConfigArgs {
            config: Some(path),
            set: vec!["beta=0.25".into(), "mu = 0.4".into()],
            mu: Some(0.15),
            ..ConfigArgs::default()
        };
        let cfg = args.resolve(KitConfig::default()).unwrap();
        assert_eq!((cfg.weights.mu, cfg.weights.beta, cfg.train.epochs), (0.15, 0.25, 3));
    }

    #[test]
    fn bad_assignments_are_usage_errors() {
        for set in ["mu", "nope=1", "mu=-1"] {
            let args = ConfigArgs {
                set: vec![set.into()],
                ..ConfigArgs::default()
            };
            let err = args.resolve(KitConfig::default()).unwrap_err();
            assert!(err.is::<UsageError>(), "{set}");
        }
    }
}
