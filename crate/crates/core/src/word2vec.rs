//! Text baseline: skipgram and cbow word embeddings trained with negative
//! sampling on per-utterance token lists.

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::eval::EmbeddingSet;
use crate::model::Mode;
use crate::seed::derive_seed;
use crate::tensor::{axpy, dot, sigmoid, Matrix};
use crate::window::neighbors;

pub const NOISE_EXPONENT: f64 = 0.75;

/// `−log σ(score)` and its derivative `σ(score) − 1`, stable for large |score|.
pub fn sigmoid_logloss(score: f64) -> (f64, f64) {
    let loss = if score > 30.0 {
        libm::exp(-score)
    } else if score < -30.0 {
        -score
    } else {
        libm::log1p(libm::exp(-score))
    };
    (loss, sigmoid(score) - 1.0)
}

/// Dense word indices (most frequent first, ties alphabetical) and the
/// unigram noise distribution raised to [`NOISE_EXPONENT`].
#[derive(Debug, Clone)]
pub struct TextVocab {
    words: Vec<String>,
    counts: Vec<usize>,
    index: BTreeMap<String, usize>,
    noise: Vec<f64>,
    sampler: WeightedIndex<f64>,
}

impl TextVocab {
    pub fn build(tokens: &[Vec<String>]) -> Result<Self> {
        let mut freq: BTreeMap<&str, usize> = BTreeMap::new();
        for t in tokens.iter().flatten() {
            *freq.entry(t.as_str()).or_insert(0) += 1;
        }
        if freq.is_empty() {
            return Err(Error::Config("empty vocabulary".into()));
        }
        let mut entries: Vec<(&str, usize)> = freq.into_iter().collect();
        entries.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(b.0)));
        let words: Vec<String> = entries.iter().map(|(w, _)| String::from(*w)).collect();
        let counts: Vec<usize> = entries.iter().map(|e| e.1).collect();
        let weights: Vec<f64> = counts.iter().map(|&c| libm::pow(c as f64, NOISE_EXPONENT)).collect();
        let total: f64 = weights.iter().sum();
        let noise = weights.iter().map(|w| w / total).collect();
        let sampler = WeightedIndex::new(&weights).map_err(|e| Error::Config(alloc::format!("noise table: {e}")))?;
        let index = words.iter().enumerate().map(|(i, w)| (w.clone(), i)).collect();
        Ok(TextVocab {
            words,
            counts,
            index,
            noise,
            sampler,
        })
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    pub fn index(&self, word: &str) -> Option<usize> {
        self.index.get(word).copied()
    }

    pub fn word(&self, index: usize) -> &str {
        &self.words[index]
    }

    pub fn count(&self, index: usize) -> usize {
        self.counts[index]
    }

    /// Noise probability of each index; sums to 1.
    pub fn noise_distribution(&self) -> &[f64] {
        &self.noise
    }

    pub fn sample_noise<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        self.sampler.sample(rng)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct W2vConfig {
    pub mode: Mode,
    pub embed_dim: usize,
    pub window: usize,
    pub negatives: usize,
    pub epochs: usize,
    pub learning_rate: f64,
    pub seed: u64,
}

impl Default for W2vConfig {
    fn default() -> Self {
        W2vConfig {
            mode: Mode::Skipgram,
            embed_dim: 50,
            window: 3,
            negatives: 5,
            epochs: 5,
            learning_rate: 0.025,
            seed: 0,
        }
    }
}

impl W2vConfig {
    pub fn validate(&self) -> Result<()> {
        if self.embed_dim == 0 || self.window == 0 {
            return Err(Error::Config("embedding dimension and window must be positive".into()));
        }
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return Err(Error::Config(alloc::format!(
                "learning rate must be positive, got {}",
                self.learning_rate
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct W2vModel {
    pub vocab: TextVocab,
    /// `V × d`; rows are the word embeddings.
    pub input: Matrix,
    /// `V × d`
    pub output: Matrix,
    /// Mean loss per positive target, one entry per epoch.
    pub loss_trace: Vec<f64>,
}

impl W2vModel {
    pub fn embeddings(&self) -> EmbeddingSet {
        let mut set = EmbeddingSet::new(self.input.cols());
        for i in 0..self.vocab.len() {
            set.insert(self.vocab.word(i), self.input.row(i).to_vec())
                .expect("vocabulary words are unique and finite");
        }
        set
    }
}

/// One positive target plus `negatives` noise targets against the hidden
/// vector `h`. Updates the output rows in place, accumulates `∂loss/∂h` into
/// `dh`, and returns the summed loss.
fn update_targets(
    output: &mut Matrix,
    h: &[f64],
    positive: usize,
    negatives: &[usize],
    lr: f64,
    dh: &mut [f64],
) -> f64 {
    let dim = h.len();
    let mut loss = 0.0;
    let targets = core::iter::once((positive, true)).chain(negatives.iter().map(|&n| (n, false)));
    for (t, label) in targets {
        if !label && t == positive {
            continue;
        }
        let row = &mut output.as_mut_slice()[t * dim..(t + 1) * dim];
        let score = dot(row, h);
        // loss is −log σ(s) for the positive, −log σ(−s) for a negative
        let (l, g) = if label {
            sigmoid_logloss(score)
        } else {
            let (l, g) = sigmoid_logloss(-score);
            (l, -g)
        };
        loss += l;
        axpy(g, row, dh);
        axpy(-lr * g, h, row);
    }
    loss
}

/// Trains embeddings over per-utterance token lists. Context windows never
/// cross utterance boundaries.
pub fn train_w2v(tokens: &[Vec<String>], config: &W2vConfig) -> Result<W2vModel> {
    config.validate()?;
    let vocab = TextVocab::build(tokens)?;
    let (v, d) = (vocab.len(), config.embed_dim);
    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(config.seed, "word2vec"));
    let bound = 0.5 / d as f64;
    let input = Matrix::from_vec(v, d, (0..v * d).map(|_| rng.random_range(-bound..bound)).collect());
    let mut model = W2vModel {
        vocab,
        input,
        output: Matrix::zeros(v, d),
        loss_trace: Vec::with_capacity(config.epochs),
    };
    let sentences: Vec<Vec<usize>> = tokens
        .iter()
        .map(|s| s.iter().map(|w| model.vocab.index(w).expect("vocab built from tokens")).collect())
        .collect();
    let mut order: Vec<usize> = (0..sentences.len()).collect();
    let mut negs = vec![0usize; config.negatives];
    let lr = config.learning_rate;

    for _ in 0..config.epochs {
        order.shuffle(&mut rng);
        let (mut total, mut count) = (0.0, 0usize);
        for &s in &order {
            let sent = &sentences[s];
            for n in 0..sent.len() {
                match config.mode {
                    Mode::Skipgram => {
                        for m in neighbors(n, sent.len(), config.window) {
                            let center = sent[n];
                            let h = model.input.row(center).to_vec();
                            let mut dh = vec![0.0; d];
                            negs.iter_mut().for_each(|x| *x = model.vocab.sample_noise(&mut rng));
                            total += update_targets(&mut model.output, &h, sent[m], &negs, lr, &mut dh);
                            count += 1;
                            axpy(-lr, &dh, &mut model.input.as_mut_slice()[center * d..(center + 1) * d]);
                        }
                    }
                    Mode::Cbow => {
                        let ctx: Vec<usize> = neighbors(n, sent.len(), config.window).map(|m| sent[m]).collect();
                        if ctx.is_empty() {
                            continue;
                        }
                        let scale = 1.0 / ctx.len() as f64;
                        let mut h = vec![0.0; d];
                        for &c in &ctx {
                            axpy(scale, model.input.row(c), &mut h);
                        }
                        let mut dh = vec![0.0; d];
                        negs.iter_mut().for_each(|x| *x = model.vocab.sample_noise(&mut rng));
                        total += update_targets(&mut model.output, &h, sent[n], &negs, lr, &mut dh);
                        count += 1;
                        for &c in &ctx {
                            axpy(-lr * scale, &dh, &mut model.input.as_mut_slice()[c * d..(c + 1) * d]);
                        }
                    }
                }
            }
        }
        model.loss_trace.push(if count == 0 { 0.0 } else { total / count as f64 });
    }
    if !model.input.is_finite() || !model.output.is_finite() {
        return Err(Error::NonFinite {
            tensor: "word2vec embeddings".into(),
        });
    }
    Ok(model)
}
