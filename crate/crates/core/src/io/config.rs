//! Flat `key = value` configuration covering loss weights, kernel settings
//! and training options. Blank lines and lines starting with `#` are
//! ignored; unknown or repeated keys are errors.

use std::collections::HashSet;
use std::fs;
use std::path::Path;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::losses::LossWeights;
use crate::trainer::TrainConfig;

#[derive(Debug, Clone, PartialEq, Default)]
pub struct KitConfig {
    pub weights: LossWeights,
    pub train: TrainConfig,
}

pub const KEYS: [&str; 24] = [
    "mu",
    "beta",
    "alpha_ssc",
    "lambda_stage",
    "lsc_radius",
    "lsc_sigma_color",
    "lsc_sigma_pos",
    "ssim_window",
    "ssim_sigma",
    "ssim_c1",
    "ssim_c2",
    "epochs",
    "batch_size",
    "lr_max",
    "lr_min",
    "momentum",
    "weight_decay",
    "warmup_fraction",
    "seed",
    "input_size",
    "flip_augmentation",
    "hidden_width",
    "aux_heads",
    "ssc_enabled",
];

fn parse<T: FromStr>(key: &str, value: &str) -> std::result::Result<T, String> {
    value
        .parse()
        .map_err(|_| format!("cannot parse {value:?} for {key}"))
}

fn parse_bool(key: &str, value: &str) -> std::result::Result<bool, String> {
    match value {
        "true" | "1" => Ok(true),
        "false" | "0" => Ok(false),
        _ => Err(format!("{key} expects true or false, got {value:?}")),
    }
}

fn join(values: &[f64]) -> String {
    values.iter().map(f64::to_string).collect::<Vec<_>>().join(",")
}

impl KitConfig {
    /// Set one key from its text form.
    pub fn set(&mut self, key: &str, value: &str) -> std::result::Result<(), String> {
        let (w, t) = (&mut self.weights, &mut self.train);
        match key {
            "mu" => w.mu = parse(key, value)?,
            "beta" => w.beta = parse(key, value)?,
            "alpha_ssc" => w.alpha_ssc = parse(key, value)?,
            "lambda_stage" => {
                w.lambda_stage = if value.is_empty() {
                    Vec::new()
                } else {
                    value
                        .split(',')
                        .map(|v| parse(key, v.trim()))
                        .collect::<std::result::Result<_, _>>()?
                }
            }
            "lsc_radius" => t.lsc.radius = parse(key, value)?,
            "lsc_sigma_color" => t.lsc.sigma_color = parse(key, value)?,
            "lsc_sigma_pos" => t.lsc.sigma_pos = parse(key, value)?,
            "ssim_window" => t.ssim.window = parse(key, value)?,
            "ssim_sigma" => t.ssim.sigma = parse(key, value)?,
            "ssim_c1" => t.ssim.c1 = parse(key, value)?,
            "ssim_c2" => t.ssim.c2 = parse(key, value)?,
            "epochs" => t.epochs = parse(key, value)?,
            "batch_size" => t.batch_size = parse(key, value)?,
            "lr_max" => t.lr_max = parse(key, value)?,
            "lr_min" => t.lr_min = parse(key, value)?,
            "momentum" => t.momentum = parse(key, value)?,
            "weight_decay" => t.weight_decay = parse(key, value)?,
            "warmup_fraction" => t.warmup_fraction = parse(key, value)?,
            "seed" => t.seed = parse(key, value)?,
            "input_size" => t.input_size = parse(key, value)?,
            "flip_augmentation" => t.flip_augmentation = parse_bool(key, value)?,
            "hidden_width" => t.hidden_width = parse(key, value)?,
            "aux_heads" => t.aux_heads = parse(key, value)?,
            "ssc_enabled" => t.ssc_enabled = parse_bool(key, value)?,
            _ => return Err(format!("unknown key {key:?}")),
        }
        Ok(())
    }

    /// Text form of one key.
    pub fn get(&self, key: &str) -> Option<String> {
        let (w, t) = (&self.weights, &self.train);
        Some(match key {
            "mu" => w.mu.to_string(),
            "beta" => w.beta.to_string(),
            "alpha_ssc" => w.alpha_ssc.to_string(),
            "lambda_stage" => join(&w.lambda_stage),
            "lsc_radius" => t.lsc.radius.to_string(),
            "lsc_sigma_color" => t.lsc.sigma_color.to_string(),
            "lsc_sigma_pos" => t.lsc.sigma_pos.to_string(),
            "ssim_window" => t.ssim.window.to_string(),
            "ssim_sigma" => t.ssim.sigma.to_string(),
            "ssim_c1" => t.ssim.c1.to_string(),
            "ssim_c2" => t.ssim.c2.to_string(),
            "epochs" => t.epochs.to_string(),
            "batch_size" => t.batch_size.to_string(),
            "lr_max" => t.lr_max.to_string(),
            "lr_min" => t.lr_min.to_string(),
            "momentum" => t.momentum.to_string(),
            "weight_decay" => t.weight_decay.to_string(),
            "warmup_fraction" => t.warmup_fraction.to_string(),
            "seed" => t.seed.to_string(),
            "input_size" => t.input_size.to_string(),
            "flip_augmentation" => t.flip_augmentation.to_string(),
            "hidden_width" => t.hidden_width.to_string(),
            "aux_heads" => t.aux_heads.to_string(),
            "ssc_enabled" => t.ssc_enabled.to_string(),
            _ => return None,
        })
    }

    /// Apply every assignment in `text` on top of `self`.
    pub fn apply_text(&mut self, text: &str) -> Result<()> {
        let mut seen = HashSet::new();
        for (index, raw) in text.lines().enumerate() {
            let line = index + 1;
            let trimmed = raw.trim();
            if trimmed.is_empty() || trimmed.starts_with('#') {
                continue;
            }
            let Some((key, value)) = trimmed.split_once('=') else {
                return Err(Error::Config {
                    line,
                    message: format!("expected key = value, got {trimmed:?}"),
                });
            };
            let key = key.trim();
            if !seen.insert(key.to_string()) {
                return Err(Error::Config {
                    line,
                    message: format!("duplicate key {key:?}"),
                });
            }
            self.set(key, value.trim())
                .map_err(|message| Error::Config { line, message })?;
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<()> {
        self.weights.validate()?;
        self.train.validate()
    }

    /// Every key in canonical order; `apply_text` of the result restores
    /// `self` exactly.
    pub fn render(&self) -> String {
        KEYS.iter()
            .map(|k| format!("{k} = {}\n", self.get(k).expect("known key")))
            .collect()
    }
}

/// Read a config file on top of `base`.
pub fn read_config(path: impl AsRef<Path>, base: KitConfig) -> Result<KitConfig> {
    let mut cfg = base;
    cfg.apply_text(&fs::read_to_string(path)?)?;
    Ok(cfg)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn render_roundtrip() {
        let mut cfg = KitConfig::default();
        cfg.weights.mu = 0.1 + 0.2;
        cfg.weights.lambda_stage = vec![0.5];
        cfg.train.flip_augmentation = false;
        cfg.train.lsc.sigma_color = 0.07;
        let mut back = KitConfig::default();
        back.apply_text(&cfg.render()).unwrap();
        assert_eq!(back, cfg);
    }

    #[test]
    fn every_key_is_settable() {
        let cfg = KitConfig::default();
        for key in KEYS {
            let mut c = cfg.clone();
            c.set(key, &cfg.get(key).unwrap()).unwrap();
            assert_eq!(c, cfg, "{key}");
        }
    }

    #[test]
    fn comments_and_whitespace() {
        let mut cfg = KitConfig::default();
        cfg.apply_text("# weights\n\n  mu=0.2 \nepochs = 3\nlambda_stage = 0.8, 0.6\n").unwrap();
        assert_eq!(cfg.weights.mu, 0.2);
        assert_eq!(cfg.train.epochs, 3);
        assert_eq!(cfg.weights.lambda_stage, vec![0.8, 0.6]);
    }

    #[test]
    fn errors_name_the_line() {
        for (text, bad_line) in [
            ("mu = 1\nbogus = 2\n", 2),
            ("\n\nmu 0.3\n", 3),
            ("epochs = -1\n", 1),
            ("mu = 1\nmu = 2\n", 2),
            ("flip_augmentation = yes\n", 1),
        ] {
            match KitConfig::default().apply_text(text) {
                Err(Error::Config { line, .. }) => assert_eq!(line, bad_line, "{text:?}"),
                other => panic!("{text:?}: {other:?}"),
            }
        }
    }
}
