//! Run configuration: TOML with one section per module. Relative paths are
//! resolved against the directory of the config file.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use wam_core::AdamConfig;

use crate::align::{objectives, AlignConfig, KernelConfig, TrainSettings};
use crate::corpus::{DEFAULT_MAX_LEN, DEFAULT_MAX_RATIO};
use crate::error::{Result, WamError};
use crate::transformer::TransformerConfig;

/// Desk-scale preset used by the tests.
pub const TOY_PRESET: &str = include_str!("../../../configs/toy.cfg");
/// Base-transformer sizes, warmup 2000, 2500-token batches.
pub const PAPER_PRESET: &str = include_str!("../../../configs/paper.cfg");

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunSection {
    /// Required; there is no clock-derived default.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default = "default_mode")]
    pub mode: String,
    #[serde(default = "default_steps")]
    pub steps: u64,
    #[serde(default = "default_output")]
    pub output_dir: PathBuf,
}

fn default_mode() -> String {
    "wam".into()
}

fn default_steps() -> u64 {
    3000
}

fn default_output() -> PathBuf {
    PathBuf::from("runs/default")
}

impl Default for RunSection {
    fn default() -> Self {
        RunSection {
            seed: None,
            mode: default_mode(),
            steps: default_steps(),
            output_dir: default_output(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CorpusSection {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub source: Option<PathBuf>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub target: Option<PathBuf>,
    /// Bilingual dictionary: landmarks for `supervised-landmark`, and the
    /// default evaluation dictionary.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub dictionary: Option<PathBuf>,
    pub max_len: usize,
    pub max_ratio: f64,
    pub train_fraction: f64,
    pub min_count: usize,
    pub token_budget: usize,
}

impl Default for CorpusSection {
    fn default() -> Self {
        CorpusSection {
            source: None,
            target: None,
            dictionary: None,
            max_len: DEFAULT_MAX_LEN,
            max_ratio: DEFAULT_MAX_RATIO,
            train_fraction: 0.9,
            min_count: 1,
            token_budget: 512,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct LandmarkSection {
    /// Leading fraction of the dictionary used as landmarks.
    pub dictionary_fraction: f64,
    /// Fraction of landmarks sampled each epoch.
    pub sample_fraction: f64,
}

impl Default for LandmarkSection {
    fn default() -> Self {
        LandmarkSection {
            dictionary_fraction: 0.5,
            sample_fraction: 0.5,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OptimizerSection {
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
    pub warmup_steps: u64,
}

impl Default for OptimizerSection {
    fn default() -> Self {
        let adam = AdamConfig::default();
        OptimizerSection {
            beta1: adam.beta1,
            beta2: adam.beta2,
            epsilon: adam.epsilon,
            warmup_steps: 200,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TrainSection {
    /// Steps between intermediate checkpoints; 0 keeps only the final one.
    pub checkpoint_every: u64,
}

impl Default for TrainSection {
    fn default() -> Self {
        TrainSection { checkpoint_every: 1000 }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    pub run: RunSection,
    pub corpus: CorpusSection,
    pub model: TransformerConfig,
    pub kernel: KernelConfig,
    pub align: AlignConfig,
    pub landmark: LandmarkSection,
    pub optimizer: OptimizerSection,
    pub train: TrainSection,
}

fn resolve(base: &Path, p: &mut PathBuf) {
    if p.is_relative() {
        *p = base.join(&*p);
    }
}

impl RunConfig {
    /// Parses `text`, resolving relative paths against `base_dir`. Only
    /// syntax and unknown keys are checked here; see [`RunConfig::validate`].
    pub fn parse(text: &str, base_dir: &Path) -> Result<RunConfig> {
        let mut cfg: RunConfig = toml::from_str(text).map_err(|e| WamError::Config(vec![e.to_string()]))?;
        cfg.resolve_paths(base_dir);
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<RunConfig> {
        let text = fs::read_to_string(path).map_err(|e| WamError::io(path, e))?;
        // absolute, so the resolved config stays valid from any directory
        let path = std::path::absolute(path).map_err(|e| WamError::io(path, e))?;
        RunConfig::parse(&text, path.parent().unwrap_or(Path::new("/")))
    }

    /// A built-in preset (`toy` or `paper`) with paths relative to `base_dir`.
    pub fn preset(name: &str, base_dir: &Path) -> Result<RunConfig> {
        match name {
            "toy" => RunConfig::parse(TOY_PRESET, base_dir),
            "paper" => RunConfig::parse(PAPER_PRESET, base_dir),
            other => Err(WamError::UnknownStrategy {
                kind: "preset",
                name: other.to_string(),
                available: vec!["toy".into(), "paper".into()],
            }),
        }
    }

    pub fn resolve_paths(&mut self, base_dir: &Path) {
        resolve(base_dir, &mut self.run.output_dir);
        for p in [&mut self.corpus.source, &mut self.corpus.target, &mut self.corpus.dictionary]
            .into_iter()
            .flatten()
        {
            resolve(base_dir, p);
        }
    }

    /// Every problem with the configuration, or `Ok` when there is none.
    pub fn validate(&self) -> Result<()> {
        let mut e = Vec::new();
        if self.run.seed.is_none() {
            e.push("run.seed is required".to_string());
        }
        let modes = objectives();
        if modes.get(&self.run.mode).is_err() {
            e.push(format!(
                "run.mode '{}' is not one of: {}",
                self.run.mode,
                modes.names().join(", ")
            ));
        }
        if self.run.steps == 0 {
            e.push("run.steps must be positive".into());
        }
        for (key, path) in [("corpus.source", &self.corpus.source), ("corpus.target", &self.corpus.target)] {
            match path {
                None => e.push(format!("{key} is required")),
                Some(p) if !p.is_file() => e.push(format!("{key}: file not found: {}", p.display())),
                Some(_) => {}
            }
        }
        match &self.corpus.dictionary {
            Some(p) if !p.is_file() => e.push(format!("corpus.dictionary: file not found: {}", p.display())),
            None if self.run.mode == "supervised-landmark" => {
                e.push("corpus.dictionary is required for mode supervised-landmark".into())
            }
            _ => {}
        }
        let c = &self.corpus;
        if c.max_len == 0 {
            e.push("corpus.max_len must be positive".into());
        }
        if c.max_ratio.is_nan() || c.max_ratio < 1.0 {
            e.push(format!("corpus.max_ratio must be >= 1, got {}", c.max_ratio));
        }
        if !(c.train_fraction > 0.0 && c.train_fraction < 1.0) {
            e.push(format!("corpus.train_fraction must lie in (0, 1), got {}", c.train_fraction));
        }
        if c.min_count == 0 {
            e.push("corpus.min_count must be positive".into());
        }
        if c.token_budget == 0 {
            e.push("corpus.token_budget must be positive".into());
        }
        if c.max_len + 2 > self.model.max_position {
            e.push(format!(
                "model.max_position ({}) must cover corpus.max_len + 2 ({})",
                self.model.max_position,
                c.max_len + 2
            ));
        }
        e.extend(self.model.validate());
        e.extend(self.kernel.validate());
        e.extend(self.align.validate());
        for (key, v) in [
            ("landmark.dictionary_fraction", self.landmark.dictionary_fraction),
            ("landmark.sample_fraction", self.landmark.sample_fraction),
        ] {
            if !(v > 0.0 && v <= 1.0) {
                e.push(format!("{key} must lie in (0, 1], got {v}"));
            }
        }
        let o = &self.optimizer;
        for (key, v) in [("optimizer.beta1", o.beta1), ("optimizer.beta2", o.beta2)] {
            if !(0.0..1.0).contains(&v) {
                e.push(format!("{key} must lie in [0, 1), got {v}"));
            }
        }
        if o.epsilon.is_nan() || o.epsilon <= 0.0 {
            e.push(format!("optimizer.epsilon must be positive, got {}", o.epsilon));
        }
        if o.warmup_steps == 0 {
            e.push("optimizer.warmup_steps must be positive".into());
        }
        if e.is_empty() {
            Ok(())
        } else {
            Err(WamError::Config(e))
        }
    }

    /// The seed; call after [`RunConfig::validate`].
    pub fn seed(&self) -> u64 {
        self.run.seed.expect("validated config has a seed")
    }

    pub fn train_settings(&self) -> TrainSettings {
        TrainSettings {
            steps: self.run.steps,
            seed: self.seed(),
            token_budget: self.corpus.token_budget,
            warmup_steps: self.optimizer.warmup_steps,
            adam: AdamConfig {
                beta1: self.optimizer.beta1,
                beta2: self.optimizer.beta2,
                epsilon: self.optimizer.epsilon,
            },
        }
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }
}
