//! Utterances, forced-alignment word boundaries, word segments and the
//! skipgram / cbow context arrangements built from them.

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec::Vec;
use core::ops::Range;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::sequence::Sequence;
use crate::tensor::Matrix;
use crate::window::neighbors;

pub const DEFAULT_FRAME_SHIFT_MS: f64 = 10.0;
pub const DEFAULT_MAX_LEN: usize = 100;

/// Feature matrix of one utterance, one row per frame.
#[derive(Debug, Clone, PartialEq)]
pub struct Utterance {
    pub id: String,
    pub features: Matrix,
    pub frame_shift_ms: f64,
}

impl Utterance {
    pub fn new(id: impl Into<String>, features: Matrix) -> Result<Self> {
        let id = id.into();
        if features.rows() == 0 || features.cols() == 0 {
            return Err(Error::Validation(alloc::format!("utterance {id} has no frames")));
        }
        if !features.is_finite() {
            return Err(Error::Validation(alloc::format!("utterance {id} has non-finite features")));
        }
        Ok(Utterance {
            id,
            features,
            frame_shift_ms: DEFAULT_FRAME_SHIFT_MS,
        })
    }

    pub fn num_frames(&self) -> usize {
        self.features.rows()
    }

    pub fn feature_dim(&self) -> usize {
        self.features.cols()
    }
}

/// One word token spanning frames `[start, end)` of an utterance.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WordAlignment {
    pub utt_id: String,
    pub word: String,
    pub start: usize,
    pub end: usize,
}

impl WordAlignment {
    /// Lowercases the word and checks `start < end`.
    pub fn new(utt_id: impl Into<String>, word: &str, start: usize, end: usize) -> Result<Self> {
        let utt_id = utt_id.into();
        if start >= end {
            return Err(Error::Validation(alloc::format!(
                "{utt_id} {word}: empty frame range [{start}, {end})"
            )));
        }
        if word.is_empty() || word.chars().any(char::is_whitespace) {
            return Err(Error::Validation(alloc::format!("{utt_id}: invalid word {word:?}")));
        }
        Ok(WordAlignment {
            utt_id,
            word: word.to_lowercase(),
            start,
            end,
        })
    }
}

/// Groups alignments per utterance (in order of first appearance), sorts each
/// group by start frame and rejects overlapping words.
pub fn group_alignments(alignments: Vec<WordAlignment>) -> Result<Vec<(String, Vec<WordAlignment>)>> {
    let mut order: Vec<(String, Vec<WordAlignment>)> = Vec::new();
    let mut index: BTreeMap<String, usize> = BTreeMap::new();
    for a in alignments {
        let slot = *index.entry(a.utt_id.clone()).or_insert_with(|| {
            order.push((a.utt_id.clone(), Vec::new()));
            order.len() - 1
        });
        order[slot].1.push(a);
    }
    for (utt, words) in &mut order {
        words.sort_by_key(|a| (a.start, a.end));
        for pair in words.windows(2) {
            if pair[1].start < pair[0].end {
                return Err(Error::Validation(alloc::format!(
                    "{utt}: {:?} [{}, {}) overlaps {:?} [{}, {})",
                    pair[0].word,
                    pair[0].start,
                    pair[0].end,
                    pair[1].word,
                    pair[1].start,
                    pair[1].end
                )));
            }
        }
    }
    Ok(order)
}

/// Per-utterance token lists in time order.
pub fn transcripts(alignments: &[WordAlignment]) -> Result<Vec<Vec<String>>> {
    Ok(group_alignments(alignments.to_vec())?
        .into_iter()
        .map(|(_, words)| words.into_iter().map(|a| a.word).collect())
        .collect())
}

#[derive(Debug, Clone, PartialEq)]
pub struct Segment {
    pub word: String,
    /// Index into [`SegmentedCorpus::utterances`].
    pub utterance: usize,
    pub sequence: Sequence,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SegmentOptions {
    /// Longer segments are truncated to their first `max_len` frames.
    pub max_len: usize,
    /// Shorter segments are dropped.
    pub min_frames: usize,
}

impl Default for SegmentOptions {
    fn default() -> Self {
        SegmentOptions {
            max_len: DEFAULT_MAX_LEN,
            min_frames: 1,
        }
    }
}

/// Word segments grouped per utterance, in time order.
#[derive(Debug, Clone, PartialEq)]
pub struct SegmentedCorpus {
    segments: Vec<Segment>,
    utterances: Vec<(String, Range<usize>)>,
    vocab: BTreeMap<String, usize>,
    feature_dim: usize,
}

impl SegmentedCorpus {
    /// Builds a corpus from already-sliced segments, one list per utterance.
    pub fn from_utterances(feature_dim: usize, utterances: Vec<(String, Vec<(String, Sequence)>)>) -> Result<Self> {
        let mut corpus = SegmentedCorpus {
            segments: Vec::new(),
            utterances: Vec::with_capacity(utterances.len()),
            vocab: BTreeMap::new(),
            feature_dim,
        };
        for (id, words) in utterances {
            let start = corpus.segments.len();
            let u = corpus.utterances.len();
            for (word, sequence) in words {
                if sequence.dim() != feature_dim {
                    return Err(Error::dim("segment frame", feature_dim, sequence.dim()));
                }
                *corpus.vocab.entry(word.clone()).or_insert(0) += 1;
                corpus.segments.push(Segment {
                    word,
                    utterance: u,
                    sequence,
                });
            }
            corpus.utterances.push((id, start..corpus.segments.len()));
        }
        Ok(corpus)
    }

    pub fn segments(&self) -> &[Segment] {
        &self.segments
    }

    pub fn segment(&self, index: usize) -> &Segment {
        &self.segments[index]
    }

    /// Utterance ids with the range of segment indices each one owns.
    pub fn utterances(&self) -> &[(String, Range<usize>)] {
        &self.utterances
    }

    /// Word type → number of segments.
    pub fn vocab(&self) -> &BTreeMap<String, usize> {
        &self.vocab
    }

    /// `|C|`, the total number of segments.
    pub fn len(&self) -> usize {
        self.segments.len()
    }

    pub fn is_empty(&self) -> bool {
        self.segments.is_empty()
    }

    pub fn feature_dim(&self) -> usize {
        self.feature_dim
    }

    /// Token lists per utterance.
    pub fn transcripts(&self) -> Vec<Vec<String>> {
        self.utterances
            .iter()
            .map(|(_, r)| self.segments[r.clone()].iter().map(|s| s.word.clone()).collect())
            .collect()
    }
}

/// Slices one segment per alignment out of its utterance.
pub fn segment(utterances: &[Utterance], alignments: &[WordAlignment], opts: SegmentOptions) -> Result<SegmentedCorpus> {
    if opts.max_len == 0 {
        return Err(Error::Config("max_len must be positive".into()));
    }
    let by_id: BTreeMap<&str, &Utterance> = utterances.iter().map(|u| (u.id.as_str(), u)).collect();
    let feature_dim = utterances.first().map_or(0, Utterance::feature_dim);
    if let Some(u) = utterances.iter().find(|u| u.feature_dim() != feature_dim) {
        return Err(Error::dim(&alloc::format!("utterance {} feature dim", u.id), feature_dim, u.feature_dim()));
    }
    let mut grouped = Vec::new();
    for (utt_id, words) in group_alignments(alignments.to_vec())? {
        let utt = by_id
            .get(utt_id.as_str())
            .ok_or_else(|| Error::Validation(alloc::format!("alignment for unknown utterance {utt_id}")))?;
        let mut segs = Vec::with_capacity(words.len());
        for a in words {
            if a.end > utt.num_frames() {
                return Err(Error::Validation(alloc::format!(
                    "{utt_id} {}: end frame {} beyond {} frames",
                    a.word,
                    a.end,
                    utt.num_frames()
                )));
            }
            let end = a.end.min(a.start + opts.max_len);
            if end - a.start < opts.min_frames {
                continue;
            }
            let data = utt.features.as_slice()[a.start * feature_dim..end * feature_dim].to_vec();
            segs.push((a.word, Sequence::new(feature_dim, data)?));
        }
        grouped.push((utt_id, segs));
    }
    SegmentedCorpus::from_utterances(feature_dim, grouped)
}

/// Rescales every feature dimension to zero mean and unit variance over all
/// frames of all utterances. Constant dimensions are only centred.
pub fn standardize(utterances: &mut [Utterance]) {
    let Some(dim) = utterances.first().map(Utterance::feature_dim) else {
        return;
    };
    let mut count = 0.0;
    let mut mean = alloc::vec![0.0; dim];
    for u in utterances.iter() {
        for r in 0..u.num_frames() {
            count += 1.0;
            for (m, x) in mean.iter_mut().zip(u.features.row(r)) {
                *m += x;
            }
        }
    }
    mean.iter_mut().for_each(|m| *m /= count);
    let mut var = alloc::vec![0.0; dim];
    for u in utterances.iter() {
        for r in 0..u.num_frames() {
            for ((v, x), m) in var.iter_mut().zip(u.features.row(r)).zip(&mean) {
                *v += (x - m) * (x - m);
            }
        }
    }
    let scale: Vec<f64> = var
        .iter()
        .map(|v| {
            let sd = libm::sqrt(v / count);
            if sd > 0.0 {
                1.0 / sd
            } else {
                1.0
            }
        })
        .collect();
    for u in utterances.iter_mut() {
        for (k, x) in u.features.as_mut_slice().iter_mut().enumerate() {
            let d = k % dim;
            *x = (*x - mean[d]) * scale[d];
        }
    }
}

/// A centre segment and one neighbour within the window.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub struct TrainingPair {
    pub center: usize,
    pub context: usize,
    /// `context − center` in word positions, never 0, `|offset| ≤ k`.
    pub offset: isize,
}

/// A target segment and its in-window neighbours.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CbowGroup {
    pub target: usize,
    pub contexts: Vec<usize>,
}

/// Every (centre, neighbour) pair with `|offset| ≤ k` inside an utterance, in
/// corpus order.
pub fn make_skipgram_pairs(corpus: &SegmentedCorpus, k: usize) -> Vec<TrainingPair> {
    let mut pairs = Vec::new();
    for (_, range) in corpus.utterances() {
        let len = range.len();
        for n in 0..len {
            for m in neighbors(n, len, k) {
                pairs.push(TrainingPair {
                    center: range.start + n,
                    context: range.start + m,
                    offset: m as isize - n as isize,
                });
            }
        }
    }
    pairs
}

/// Pairs in a seeded random order.
pub fn shuffled_skipgram_pairs(corpus: &SegmentedCorpus, k: usize, seed: u64) -> Vec<TrainingPair> {
    let mut pairs = make_skipgram_pairs(corpus, k);
    pairs.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    pairs
}

/// One group per segment that has at least one neighbour within `±k`.
pub fn make_cbow_groups(corpus: &SegmentedCorpus, k: usize) -> Vec<CbowGroup> {
    let mut groups = Vec::new();
    for (_, range) in corpus.utterances() {
        let len = range.len();
        for n in 0..len {
            let contexts: Vec<usize> = neighbors(n, len, k).map(|m| range.start + m).collect();
            if !contexts.is_empty() {
                groups.push(CbowGroup {
                    target: range.start + n,
                    contexts,
                });
            }
        }
    }
    groups
}
