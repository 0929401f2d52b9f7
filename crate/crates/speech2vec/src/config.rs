//! Run configuration file (TOML). Every field is optional; command-line flags
//! override the file, which overrides the built-in defaults.
//!
//! ```toml
//! seed = 7
//!
//! [paths]
//! features = "data/features.txt"
//! alignments = "data/alignments.txt"
//! benchmarks = "benchmarks/"
//! output = "runs/skipgram-50"
//!
//! [speech2vec]
//! mode = "skipgram"
//! embed_dim = 50
//! epochs = 500
//! ```

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use speech2vec_core::corpus::DEFAULT_MAX_LEN;
use speech2vec_core::model::Mode;
use speech2vec_core::speech2vec::{self as s2v, TrainConfig};
use speech2vec_core::synthetic::SynthConfig;
use speech2vec_core::word2vec::W2vConfig;

use crate::error::{Error, Result};
use crate::formats::read_text;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum ModeName {
    Skipgram,
    Cbow,
}

impl From<ModeName> for Mode {
    fn from(m: ModeName) -> Mode {
        match m {
            ModeName::Skipgram => Mode::Skipgram,
            ModeName::Cbow => Mode::Cbow,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    /// At most `i64::MAX`, the largest TOML integer.
    pub seed: u64,
    pub paths: Paths,
    pub speech2vec: Speech2VecSection,
    pub word2vec: Word2VecSection,
    pub synth: SynthSection,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Paths {
    pub features: Option<PathBuf>,
    pub alignments: Option<PathBuf>,
    /// Token file for `synth` and `train-w2v`: one utterance per line.
    pub tokens: Option<PathBuf>,
    pub benchmarks: Option<PathBuf>,
    pub output: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Speech2VecSection {
    pub mode: ModeName,
    pub embed_dim: usize,
    pub window: usize,
    pub learning_rate: f64,
    pub epochs: usize,
    pub batch_size: usize,
    pub max_len: usize,
    pub clip: Option<f64>,
    /// Per-dimension zero mean, unit variance over the whole corpus.
    pub standardize: bool,
}

impl Default for Speech2VecSection {
    fn default() -> Self {
        Speech2VecSection {
            mode: ModeName::Skipgram,
            embed_dim: s2v::DEFAULT_EMBED_DIM,
            window: s2v::DEFAULT_WINDOW,
            learning_rate: s2v::DEFAULT_LEARNING_RATE,
            epochs: s2v::DEFAULT_EPOCHS,
            batch_size: 1,
            max_len: DEFAULT_MAX_LEN,
            clip: None,
            standardize: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Word2VecSection {
    pub mode: ModeName,
    pub embed_dim: usize,
    pub window: usize,
    pub negatives: usize,
    pub epochs: usize,
    pub learning_rate: f64,
}

impl Default for Word2VecSection {
    fn default() -> Self {
        let d = W2vConfig::default();
        Word2VecSection {
            mode: ModeName::Skipgram,
            embed_dim: d.embed_dim,
            window: d.window,
            negatives: d.negatives,
            epochs: d.epochs,
            learning_rate: d.learning_rate,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SynthSection {
    pub feature_dim: usize,
    pub min_len: usize,
    pub max_len: usize,
    pub noise_sigma: f64,
}

impl Default for SynthSection {
    fn default() -> Self {
        let d = SynthConfig::default();
        SynthSection {
            feature_dim: d.feature_dim,
            min_len: d.min_len,
            max_len: d.max_len,
            noise_sigma: d.noise_sigma,
        }
    }
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Usage(format!("invalid config: {e}")))
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    /// Reads `path`, or returns the defaults when no file is given.
    pub fn load(path: Option<&Path>) -> Result<Self> {
        match path {
            None => Ok(RunConfig::default()),
            Some(p) => Self::from_toml(&read_text(p)?).map_err(|e| Error::Usage(format!("{}: {e}", p.display()))),
        }
    }

    pub fn train_config(&self) -> TrainConfig {
        let s = &self.speech2vec;
        TrainConfig {
            mode: s.mode.into(),
            embed_dim: s.embed_dim,
            window: s.window,
            learning_rate: s.learning_rate,
            epochs: s.epochs,
            batch_size: s.batch_size,
            seed: self.seed,
            max_len: s.max_len,
            clip: s.clip,
        }
    }

    pub fn w2v_config(&self) -> W2vConfig {
        let w = &self.word2vec;
        W2vConfig {
            mode: w.mode.into(),
            embed_dim: w.embed_dim,
            window: w.window,
            negatives: w.negatives,
            epochs: w.epochs,
            learning_rate: w.learning_rate,
            seed: self.seed,
        }
    }

    pub fn synth_config(&self) -> SynthConfig {
        let s = &self.synth;
        SynthConfig {
            feature_dim: s.feature_dim,
            min_len: s.min_len,
            max_len: s.max_len,
            noise_sigma: s.noise_sigma,
            seed: self.seed,
        }
    }
}

/// An input path that must be configured and must exist.
pub fn require_input<'a>(path: Option<&'a PathBuf>, flag: &str) -> Result<&'a Path> {
    let p = path.ok_or_else(|| Error::Usage(format!("no {flag} given (flag or config file)")))?;
    if !p.exists() {
        return Err(Error::io(p, std::io::Error::new(std::io::ErrorKind::NotFound, "no such file or directory")));
    }
    Ok(p)
}

pub fn require_output<'a>(path: Option<&'a PathBuf>, flag: &str) -> Result<&'a Path> {
    path.map(PathBuf::as_path)
        .ok_or_else(|| Error::Usage(format!("no {flag} given (flag or config file)")))
}
