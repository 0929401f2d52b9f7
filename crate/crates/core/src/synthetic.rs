//! Synthetic feature corpora with known word identities, for desk-scale
//! verification of the whole pipeline.
//!
//! Every word type owns a fixed prototype frame drawn from a standard normal
//! distribution; each token is rendered as a run of frames of random length,
//! each frame being the prototype plus i.i.d. Gaussian noise.

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal, StandardNormal};

use crate::corpus::{Utterance, WordAlignment};
use crate::error::{Error, Result};
use crate::seed::derive_seed;
use crate::tensor::Matrix;

#[derive(Debug, Clone, PartialEq)]
pub struct SynthConfig {
    pub feature_dim: usize,
    /// Inclusive range of frames per token.
    pub min_len: usize,
    pub max_len: usize,
    pub noise_sigma: f64,
    pub seed: u64,
}

impl Default for SynthConfig {
    fn default() -> Self {
        SynthConfig {
            feature_dim: 13,
            min_len: 3,
            max_len: 8,
            noise_sigma: 0.1,
            seed: 0,
        }
    }
}

impl SynthConfig {
    fn validate(&self) -> Result<()> {
        if self.feature_dim == 0 {
            return Err(Error::Config("feature_dim must be positive".into()));
        }
        if self.min_len == 0 || self.min_len > self.max_len {
            return Err(Error::Config(alloc::format!(
                "invalid segment length range {}..={}",
                self.min_len,
                self.max_len
            )));
        }
        if !(self.noise_sigma >= 0.0 && self.noise_sigma.is_finite()) {
            return Err(Error::Config(alloc::format!("invalid noise sigma {}", self.noise_sigma)));
        }
        Ok(())
    }
}

/// Prototype frame of `word`. Depends only on the seed and the word itself.
pub fn prototype(word: &str, feature_dim: usize, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, word));
    (0..feature_dim).map(|_| StandardNormal.sample(&mut rng)).collect()
}

/// Renders per-utterance token lists as feature matrices plus alignments.
/// Utterance ids are `utt00000`, `utt00001`, ….
pub fn generate_synthetic(tokens: &[Vec<String>], cfg: &SynthConfig) -> Result<(Vec<Utterance>, Vec<WordAlignment>)> {
    cfg.validate()?;
    if tokens.iter().all(Vec::is_empty) {
        return Err(Error::Config("synthetic corpus needs at least one token".into()));
    }
    let noise = Normal::new(0.0, cfg.noise_sigma).map_err(|e| Error::Config(alloc::format!("{e}")))?;
    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(cfg.seed, "synthetic-render"));
    let mut prototypes: BTreeMap<String, Vec<f64>> = BTreeMap::new();
    let mut utterances = Vec::new();
    let mut alignments = Vec::new();
    let dim = cfg.feature_dim;
    for (u, line) in tokens.iter().enumerate().filter(|(_, l)| !l.is_empty()) {
        let id = alloc::format!("utt{u:05}");
        let mut data = Vec::new();
        let mut frame = 0;
        for token in line {
            let word = token.to_lowercase();
            let proto = prototypes
                .entry(word.clone())
                .or_insert_with(|| prototype(&word, dim, cfg.seed));
            let len = rng.random_range(cfg.min_len..=cfg.max_len);
            for _ in 0..len {
                for p in proto.iter() {
                    let e: f64 = noise.sample(&mut rng);
                    data.push(p + e);
                }
            }
            alignments.push(WordAlignment::new(id.clone(), &word, frame, frame + len)?);
            frame += len;
        }
        utterances.push(Utterance::new(id, Matrix::from_vec(frame, dim, data))?);
    }
    Ok((utterances, alignments))
}

/// Token stream where each utterance draws all its words from a single topic,
/// so words co-occur only with words of their own topic.
#[derive(Debug, Clone, PartialEq)]
pub struct TopicStream {
    pub topics: usize,
    pub words_per_topic: usize,
    pub utterances: usize,
    pub utterance_len: usize,
    pub seed: u64,
}

impl TopicStream {
    /// Word `index` of topic `topic`, e.g. `t1w07`.
    pub fn word(topic: usize, index: usize) -> String {
        alloc::format!("t{topic}w{index:02}")
    }

    pub fn vocabulary(&self) -> Vec<(usize, String)> {
        (0..self.topics)
            .flat_map(|t| (0..self.words_per_topic).map(move |w| (t, Self::word(t, w))))
            .collect()
    }

    /// Utterances alternate topics; words are uniform within the topic.
    pub fn generate(&self) -> Result<Vec<Vec<String>>> {
        if self.topics == 0 || self.words_per_topic == 0 || self.utterance_len == 0 {
            return Err(Error::Config("topic stream dimensions must be positive".into()));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(self.seed, "topic-stream"));
        Ok((0..self.utterances)
            .map(|u| {
                let topic = u % self.topics;
                (0..self.utterance_len)
                    .map(|_| Self::word(topic, rng.random_range(0..self.words_per_topic)))
                    .collect()
            })
            .collect())
    }
}
