//! Flat `key = value` run configuration with `#` comments.

use std::collections::HashSet;
use std::fmt::Write;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::train::TrainConfig;

pub const DEFAULT_SPLIT_FRACTION: f64 = 0.15;

/// Recognized keys, in the order the resolved config is written.
pub const KEYS: &[&str] = &[
    "manifest",
    "val_manifest",
    "classes",
    "split_fraction",
    "out",
    "batch_size",
    "lr",
    "lr_decay_factor",
    "plateau_epochs",
    "weight_decay",
    "dropout",
    "aug_probability",
    "window_seconds",
    "hidden_width",
    "hidden_layers",
    "max_epochs",
    "early_stop_patience",
    "class_weighting",
    "seed",
    "workers",
];

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub manifest: PathBuf,
    /// When absent, validation is a stratified split of `manifest`.
    pub val_manifest: Option<PathBuf>,
    /// Class table file; the six built-in emotions when absent.
    pub classes: Option<PathBuf>,
    pub split_fraction: f64,
    pub out: PathBuf,
    pub train: TrainConfig,
}

fn parse_value<T: FromStr>(key: &str, value: &str) -> Result<T> {
    value
        .parse()
        .map_err(|_| Error::Config(format!("invalid value {value:?} for key {key:?}")))
}

impl RunConfig {
    /// Parses config text. Relative paths are resolved against `base`.
    pub fn parse(text: &str, base: &Path) -> Result<Self> {
        let mut manifest = None;
        let mut val_manifest = None;
        let mut classes = None;
        let mut split_fraction = DEFAULT_SPLIT_FRACTION;
        let mut out = base.join("run");
        let mut t = TrainConfig::default();
        let mut seen = HashSet::new();

        for (n, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .map(|(k, v)| (k.trim(), v.trim()))
                .ok_or_else(|| Error::Config(format!("line {}: expected key = value", n + 1)))?;
            if !KEYS.contains(&key) {
                return Err(Error::Config(format!("unknown config key {key:?}")));
            }
            if !seen.insert(key.to_string()) {
                return Err(Error::Config(format!("config key {key:?} given twice")));
            }
            let path = || base.join(value);
            match key {
                "manifest" => manifest = Some(path()),
                "val_manifest" => val_manifest = Some(path()),
                "classes" => classes = Some(path()),
                "split_fraction" => split_fraction = parse_value(key, value)?,
                "out" => out = path(),
                "batch_size" => t.batch_size = parse_value(key, value)?,
                "lr" => t.lr = parse_value(key, value)?,
                "lr_decay_factor" => t.lr_decay_factor = parse_value(key, value)?,
                "plateau_epochs" => t.plateau_epochs = parse_value(key, value)?,
                "weight_decay" => t.weight_decay = parse_value(key, value)?,
                "dropout" => t.dropout = parse_value(key, value)?,
                "aug_probability" => t.aug_probability = parse_value(key, value)?,
                "window_seconds" => t.window_seconds = parse_value(key, value)?,
                "hidden_width" => t.hidden_width = parse_value(key, value)?,
                "hidden_layers" => t.hidden_layers = parse_value(key, value)?,
                "max_epochs" => t.max_epochs = parse_value(key, value)?,
                "early_stop_patience" => t.early_stop_patience = parse_value(key, value)?,
                "class_weighting" => t.class_weighting = parse_value(key, value)?,
                "seed" => t.seed = parse_value(key, value)?,
                "workers" => t.workers = parse_value(key, value)?,
                _ => unreachable!("key list and match arms agree"),
            }
        }

        let manifest =
            manifest.ok_or_else(|| Error::Config("missing required key \"manifest\"".into()))?;
        if val_manifest.is_none() && !(split_fraction > 0.0 && split_fraction < 1.0) {
            return Err(Error::Config(format!(
                "split_fraction {split_fraction} outside (0, 1)"
            )));
        }
        t.validate()?;
        Ok(Self {
            manifest,
            val_manifest,
            classes,
            split_fraction,
            out,
            train: t,
        })
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text, path.parent().unwrap_or(Path::new(".")))
    }

    /// Every key with its effective value.
    pub fn resolved(&self) -> String {
        let t = &self.train;
        let opt = |p: &Option<PathBuf>| {
            p.as_ref()
                .map(|p| p.display().to_string())
                .unwrap_or_default()
        };
        let mut out = String::from("# resolved configuration\n");
        let mut put = |k: &str, v: String| {
            if v.is_empty() {
                writeln!(out, "# {k} =").unwrap();
            } else {
                writeln!(out, "{k} = {v}").unwrap();
            }
        };
        put("manifest", self.manifest.display().to_string());
        put("val_manifest", opt(&self.val_manifest));
        put("classes", opt(&self.classes));
        put("split_fraction", self.split_fraction.to_string());
        put("out", self.out.display().to_string());
        put("batch_size", t.batch_size.to_string());
        put("lr", t.lr.to_string());
        put("lr_decay_factor", t.lr_decay_factor.to_string());
        put("plateau_epochs", t.plateau_epochs.to_string());
        put("weight_decay", t.weight_decay.to_string());
        put("dropout", t.dropout.to_string());
        put("aug_probability", t.aug_probability.to_string());
        put("window_seconds", t.window_seconds.to_string());
        put("hidden_width", t.hidden_width.to_string());
        put("hidden_layers", t.hidden_layers.to_string());
        put("max_epochs", t.max_epochs.to_string());
        put("early_stop_patience", t.early_stop_patience.to_string());
        put("class_weighting", t.class_weighting.to_string());
        put("seed", t.seed.to_string());
        put("workers", t.workers.to_string());
        out
    }
}
