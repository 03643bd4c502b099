use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::synthetic::SyntheticSpec;
use crate::error::{Error, Result};
use crate::features::{ChunkSize, Normalization};
use crate::svm::TrainConfig;
use crate::vocab::NameFilterPolicy;

pub const CONFIG_VERSION: u32 = 1;

/// Where the books come from.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum CorpusSource {
    /// An `author,title,path,role` manifest.
    Manifest(PathBuf),
    /// Generated into `<out-dir>/corpus` before the run.
    Synthetic(SyntheticSpec),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FeatureConfig {
    pub chunk_sentences: ChunkSize,
    pub vocab_size: usize,
    pub normalization: Normalization,
    pub name_filter: NameFilterPolicy,
}

impl Default for FeatureConfig {
    fn default() -> Self {
        FeatureConfig {
            chunk_sentences: ChunkSize::Sentences(50),
            vocab_size: 1000,
            normalization: Normalization::RowMaxColumnMaxAbs,
            name_filter: NameFilterPolicy::default(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GridConfig {
    pub doc_lengths: Vec<ChunkSize>,
    pub vocab_sizes: Vec<usize>,
}

impl Default for GridConfig {
    fn default() -> Self {
        GridConfig {
            doc_lengths: vec![
                ChunkSize::Sentences(10),
                ChunkSize::Sentences(25),
                ChunkSize::Sentences(50),
                ChunkSize::Sentences(100),
                ChunkSize::WholeBook,
            ],
            vocab_sizes: vec![100, 500, 1000, 5000, 10000],
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MismatchedConfig {
    pub train_length: ChunkSize,
    pub test_lengths: Vec<ChunkSize>,
    pub vocab_sizes: Vec<usize>,
}

impl Default for MismatchedConfig {
    fn default() -> Self {
        MismatchedConfig {
            train_length: ChunkSize::Sentences(50),
            test_lengths: GridConfig::default().doc_lengths,
            vocab_sizes: GridConfig::default().vocab_sizes,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OpenConfig {
    pub doc_length: ChunkSize,
    pub vocab_sizes: Vec<usize>,
}

impl Default for OpenConfig {
    fn default() -> Self {
        OpenConfig {
            doc_length: ChunkSize::Sentences(100),
            vocab_sizes: vec![1000, 2000],
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TopWordsConfig {
    pub doc_length: ChunkSize,
    pub vocab_size: usize,
    pub n: usize,
}

impl Default for TopWordsConfig {
    fn default() -> Self {
        TopWordsConfig {
            doc_length: ChunkSize::Sentences(50),
            vocab_size: 1000,
            n: 100,
        }
    }
}

/// Versioned experiment configuration (TOML on disk).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub version: u32,
    #[serde(default = "default_seed")]
    pub seed: u64,
    /// Worker threads for grid cells; 0 uses every core.
    #[serde(default)]
    pub workers: usize,
    pub corpus: CorpusSource,
    #[serde(default)]
    pub features: FeatureConfig,
    #[serde(default)]
    pub train: TrainConfig,
    #[serde(default)]
    pub grid: GridConfig,
    #[serde(default)]
    pub mismatched: MismatchedConfig,
    #[serde(default)]
    pub open: OpenConfig,
    #[serde(default)]
    pub top_words: TopWordsConfig,
}

fn default_seed() -> u64 {
    42
}

impl ExperimentConfig {
    pub fn new(corpus: CorpusSource) -> Self {
        ExperimentConfig {
            version: CONFIG_VERSION,
            seed: default_seed(),
            workers: 0,
            corpus,
            features: FeatureConfig::default(),
            train: TrainConfig::default(),
            grid: GridConfig::default(),
            mismatched: MismatchedConfig::default(),
            open: OpenConfig::default(),
            top_words: TopWordsConfig::default(),
        }
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: ExperimentConfig = toml::from_str(text)?;
        if cfg.version != CONFIG_VERSION {
            return Err(Error::Version {
                what: "config",
                found: cfg.version,
            });
        }
        Ok(cfg)
    }

    /// Loads a config file; a relative manifest path is resolved against
    /// the config file's directory.
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut cfg = Self::from_toml(&text)?;
        if let CorpusSource::Manifest(m) = &mut cfg.corpus {
            if m.is_relative() {
                if let Some(dir) = path.parent() {
                    *m = dir.join(&*m);
                }
            }
        }
        Ok(cfg)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string_pretty(self).expect("config serializes")
    }

    /// The same config with its training seed set to `seed` as well.
    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self.train.seed = seed;
        self
    }
}
