//! Training loops for the skipgram and cbow encoder-decoder objectives, and
//! extraction of per-instance embeddings.

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec::Vec;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::corpus::{make_cbow_groups, CbowGroup, SegmentedCorpus, DEFAULT_MAX_LEN};
use crate::error::{Error, Result};
use crate::model::{Example, Gradients, Mode, ModelParams};
use crate::params::{clip_global_norm, sgd_step, ParamSet};
use crate::seed::derive_seed;

pub const DEFAULT_EMBED_DIM: usize = 50;
pub const DEFAULT_WINDOW: usize = 3;
pub const DEFAULT_LEARNING_RATE: f64 = 1e-3;
pub const DEFAULT_EPOCHS: usize = 500;
/// Embedding sizes the defaults were tuned over.
pub const STANDARD_DIMS: [usize; 4] = [10, 50, 100, 200];

#[derive(Debug, Clone, PartialEq)]
pub struct TrainConfig {
    pub mode: Mode,
    /// Positive and even; each encoder direction gets half.
    pub embed_dim: usize,
    pub window: usize,
    pub learning_rate: f64,
    pub epochs: usize,
    /// Examples whose gradients are summed before one SGD step.
    pub batch_size: usize,
    pub seed: u64,
    pub max_len: usize,
    /// Global gradient-norm clip threshold; off when `None`.
    pub clip: Option<f64>,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            mode: Mode::Skipgram,
            embed_dim: DEFAULT_EMBED_DIM,
            window: DEFAULT_WINDOW,
            learning_rate: DEFAULT_LEARNING_RATE,
            epochs: DEFAULT_EPOCHS,
            batch_size: 1,
            seed: 0,
            max_len: DEFAULT_MAX_LEN,
            clip: None,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if self.embed_dim == 0 || !self.embed_dim.is_multiple_of(2) {
            return Err(Error::Config(alloc::format!(
                "embedding dimension must be a positive even number, got {}",
                self.embed_dim
            )));
        }
        if self.window == 0 {
            return Err(Error::Config("window must be at least 1".into()));
        }
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return Err(Error::Config(alloc::format!(
                "learning rate must be positive, got {}",
                self.learning_rate
            )));
        }
        if self.batch_size == 0 {
            return Err(Error::Config("batch size must be at least 1".into()));
        }
        if self.max_len == 0 {
            return Err(Error::Config("max_len must be positive".into()));
        }
        if let Some(c) = self.clip {
            if !(c > 0.0 && c.is_finite()) {
                return Err(Error::Config(alloc::format!("clip threshold must be positive, got {c}")));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Speech2VecModel {
    pub params: ModelParams,
    pub config: TrainConfig,
}

impl Speech2VecModel {
    /// Freshly initialised parameters, seeded from the config.
    pub fn init(feature_dim: usize, config: TrainConfig) -> Result<Self> {
        config.validate()?;
        let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(config.seed, "speech2vec-init"));
        let params = ModelParams::init(feature_dim, config.embed_dim, &mut rng)?;
        Ok(Speech2VecModel { params, config })
    }

    pub fn example<'c>(&self, corpus: &'c SegmentedCorpus, group: &CbowGroup) -> Example<'c> {
        let seq = |i: usize| &corpus.segment(i).sequence;
        match self.config.mode {
            Mode::Skipgram => Example::Skipgram {
                center: seq(group.target),
                contexts: group.contexts.iter().map(|&i| seq(i)).collect(),
            },
            Mode::Cbow => Example::Cbow {
                contexts: group.contexts.iter().map(|&i| seq(i)).collect(),
                target: seq(group.target),
            },
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainOutcome {
    pub model: Speech2VecModel,
    /// Mean loss per decoded frame, one entry per epoch.
    pub loss_trace: Vec<f64>,
    /// Number of SGD steps whose gradient was clipped.
    pub clipped_steps: usize,
}

/// Trains with no progress reporting.
pub fn train(corpus: &SegmentedCorpus, config: &TrainConfig) -> Result<TrainOutcome> {
    train_with(corpus, config, |_, _| {})
}

/// Trains a model, calling `on_epoch(epoch, mean_frame_loss)` after every epoch.
///
/// Each example is one segment with its in-window neighbours: in skipgram
/// mode the segment is encoded once and every neighbour is decoded from that
/// embedding; in cbow mode the neighbours' encodings are summed and the
/// segment is decoded. Example order is reshuffled every epoch.
pub fn train_with<F>(corpus: &SegmentedCorpus, config: &TrainConfig, mut on_epoch: F) -> Result<TrainOutcome>
where
    F: FnMut(usize, f64),
{
    config.validate()?;
    let groups = make_cbow_groups(corpus, config.window);
    if groups.is_empty() {
        return Err(Error::Config(
            "no training examples: every utterance has a single word".into(),
        ));
    }
    let mut model = Speech2VecModel::init(corpus.feature_dim(), config.clone())?;
    let mut shuffle = ChaCha8Rng::seed_from_u64(derive_seed(config.seed, "speech2vec-shuffle"));
    let mut order: Vec<usize> = (0..groups.len()).collect();
    let mut grads: Gradients = model.params.zeros_like();
    let mut loss_trace = Vec::with_capacity(config.epochs);
    let mut clipped_steps = 0;

    for epoch in 0..config.epochs {
        order.shuffle(&mut shuffle);
        let mut epoch_loss = 0.0;
        let mut epoch_frames = 0usize;
        for batch in order.chunks(config.batch_size) {
            grads.zero();
            for &g in batch {
                let ex = model.example(corpus, &groups[g]);
                let record = model.params.forward(&ex)?;
                if !record.loss.is_finite() {
                    return Err(Error::NonFinite {
                        tensor: alloc::format!("loss at epoch {}", epoch + 1),
                    });
                }
                epoch_loss += record.loss;
                epoch_frames += record.frames;
                model.params.backward_into(&record, &mut grads);
            }
            if let Some(threshold) = config.clip {
                if clip_global_norm(&mut grads, threshold) {
                    clipped_steps += 1;
                }
            }
            sgd_step(&mut model.params, &grads, config.learning_rate)?;
        }
        let mean = epoch_loss / epoch_frames as f64;
        on_epoch(epoch + 1, mean);
        loss_trace.push(mean);
    }
    Ok(TrainOutcome {
        model,
        loss_trace,
        clipped_steps,
    })
}

/// Word → one embedding per token instance, in corpus order.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct InstanceEmbeddingTable {
    dim: usize,
    entries: BTreeMap<String, Vec<Vec<f64>>>,
}

impl InstanceEmbeddingTable {
    pub fn new(dim: usize) -> Self {
        InstanceEmbeddingTable {
            dim,
            entries: BTreeMap::new(),
        }
    }

    pub fn push(&mut self, word: &str, vector: Vec<f64>) -> Result<()> {
        if vector.len() != self.dim {
            return Err(Error::dim(&alloc::format!("instance of {word:?}"), self.dim, vector.len()));
        }
        if vector.iter().any(|x| !x.is_finite()) {
            return Err(Error::NonFinite {
                tensor: alloc::format!("instance of {word:?}"),
            });
        }
        self.entries.entry(String::from(word)).or_default().push(vector);
        Ok(())
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn get(&self, word: &str) -> Option<&[Vec<f64>]> {
        self.entries.get(word).map(Vec::as_slice)
    }

    /// Words in lexicographic order with their instances.
    pub fn iter(&self) -> impl Iterator<Item = (&str, &[Vec<f64>])> {
        self.entries.iter().map(|(w, v)| (w.as_str(), v.as_slice()))
    }

    pub fn num_words(&self) -> usize {
        self.entries.len()
    }

    pub fn num_instances(&self) -> usize {
        self.entries.values().map(Vec::len).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

/// Embeds every eligible segment. Skipgram: the segment's own encoding.
/// Cbow: the sum of its in-window neighbours' encodings; segments without
/// neighbours get no vector.
pub fn embed_instances(model: &Speech2VecModel, corpus: &SegmentedCorpus) -> Result<InstanceEmbeddingTable> {
    let params = &model.params;
    params.validate()?;
    if corpus.feature_dim() != params.feature_dim() && !corpus.is_empty() {
        return Err(Error::Config(alloc::format!(
            "model expects {}-dimensional features, corpus has {}",
            params.feature_dim(),
            corpus.feature_dim()
        )));
    }
    let mut table = InstanceEmbeddingTable::new(params.embed_dim());
    match model.config.mode {
        Mode::Skipgram => {
            for seg in corpus.segments() {
                let z = crate::encoder::encode(&params.encoder, &seg.sequence)?;
                table.push(&seg.word, z)?;
            }
        }
        Mode::Cbow => {
            for group in make_cbow_groups(corpus, model.config.window) {
                let z = params.embed(&model.example(corpus, &group))?;
                table.push(&corpus.segment(group.target).word, z)?;
            }
        }
    }
    Ok(table)
}
