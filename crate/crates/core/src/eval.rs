//! Word-similarity evaluation: averaging instance embeddings, cosine
//! similarity, Spearman rank correlation, the instance variance study and
//! nearest neighbours.

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::speech2vec::InstanceEmbeddingTable;
use crate::tensor::{dot, norm};

/// One vector per word, all of the same length.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingSet {
    dim: usize,
    vectors: BTreeMap<String, Vec<f64>>,
}

impl EmbeddingSet {
    pub fn new(dim: usize) -> Self {
        EmbeddingSet {
            dim,
            vectors: BTreeMap::new(),
        }
    }

    /// Adds a word; keys are lowercased and must be unique.
    pub fn insert(&mut self, word: &str, vector: Vec<f64>) -> Result<()> {
        if vector.len() != self.dim {
            return Err(Error::dim(&alloc::format!("embedding of {word:?}"), self.dim, vector.len()));
        }
        if vector.iter().any(|x| !x.is_finite()) {
            return Err(Error::NonFinite {
                tensor: alloc::format!("embedding of {word:?}"),
            });
        }
        let key = word.to_lowercase();
        if self.vectors.contains_key(&key) {
            return Err(Error::InvalidInput(alloc::format!("duplicate word {key:?}")));
        }
        self.vectors.insert(key, vector);
        Ok(())
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn get(&self, word: &str) -> Option<&[f64]> {
        self.vectors.get(word).map(Vec::as_slice)
    }

    /// Case-insensitive lookup.
    pub fn lookup(&self, word: &str) -> Option<&[f64]> {
        self.get(word).or_else(|| self.get(&word.to_lowercase()))
    }

    pub fn contains(&self, word: &str) -> bool {
        self.lookup(word).is_some()
    }

    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }

    /// Words in lexicographic order.
    pub fn iter(&self) -> impl Iterator<Item = (&str, &[f64])> {
        self.vectors.iter().map(|(w, v)| (w.as_str(), v.as_slice()))
    }
}

/// Per-word arithmetic mean of the instance vectors.
pub fn average_instances(table: &InstanceEmbeddingTable) -> Result<EmbeddingSet> {
    if table.is_empty() {
        return Err(Error::InvalidInput("no instance embeddings to average".into()));
    }
    let mut set = EmbeddingSet::new(table.dim());
    for (word, instances) in table.iter() {
        let mut mean = vec![0.0; table.dim()];
        for v in instances {
            if v.len() != table.dim() {
                return Err(Error::InvalidInput(alloc::format!("instance of {word:?} has wrong length")));
            }
            for (m, x) in mean.iter_mut().zip(v) {
                *m += x;
            }
        }
        let n = instances.len() as f64;
        mean.iter_mut().for_each(|m| *m /= n);
        set.insert(word, mean)?;
    }
    Ok(set)
}

/// `u·v / (‖u‖ ‖v‖)`, clamped to `[−1, 1]`. Orthogonal vectors give `+0.0`.
pub fn cosine(u: &[f64], v: &[f64]) -> Result<f64> {
    if u.len() != v.len() {
        return Err(Error::InvalidInput(alloc::format!(
            "cosine of vectors with lengths {} and {}",
            u.len(),
            v.len()
        )));
    }
    let (nu, nv) = (norm(u), norm(v));
    if nu == 0.0 || nv == 0.0 {
        return Err(Error::UndefinedSimilarity);
    }
    // adding +0.0 maps −0.0 to +0.0 so zero similarities tie in sorts
    Ok((dot(u, v) / (nu * nv)).clamp(-1.0, 1.0) + 0.0)
}

/// 1-based ranks; tied values share the mean of the ranks they span.
pub fn fractional_ranks(values: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    let mut ranks = vec![0.0; values.len()];
    let mut i = 0;
    while i < order.len() {
        let mut j = i + 1;
        while j < order.len() && values[order[j]] == values[order[i]] {
            j += 1;
        }
        // positions i..j hold ranks i+1..=j
        let rank = (i + 1 + j) as f64 / 2.0;
        for &k in &order[i..j] {
            ranks[k] = rank;
        }
        i = j;
    }
    ranks
}

fn pearson(a: &[f64], b: &[f64]) -> Result<f64> {
    let n = a.len() as f64;
    let (ma, mb) = (a.iter().sum::<f64>() / n, b.iter().sum::<f64>() / n);
    let (mut sab, mut saa, mut sbb) = (0.0, 0.0, 0.0);
    for (x, y) in a.iter().zip(b) {
        let (dx, dy) = (x - ma, y - mb);
        sab += dx * dy;
        saa += dx * dx;
        sbb += dy * dy;
    }
    if saa == 0.0 || sbb == 0.0 {
        return Err(Error::UndefinedCorrelation("constant ranks"));
    }
    Ok((sab / libm::sqrt(saa * sbb)).clamp(-1.0, 1.0))
}

/// Spearman's ρ: Pearson correlation of fractional ranks.
pub fn spearman(a: &[f64], b: &[f64]) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::InvalidInput(alloc::format!(
            "rank correlation of lists with lengths {} and {}",
            a.len(),
            b.len()
        )));
    }
    if a.len() < 2 {
        return Err(Error::UndefinedCorrelation("fewer than two observations"));
    }
    if a.iter().chain(b).any(|x| !x.is_finite()) {
        return Err(Error::InvalidInput("non-finite value in rank correlation".into()));
    }
    pearson(&fractional_ranks(a), &fractional_ranks(b))
}

/// Word pairs with human similarity ratings.
#[derive(Debug, Clone, PartialEq)]
pub struct Benchmark {
    pub name: String,
    pub pairs: Vec<(String, String, f64)>,
}

impl Benchmark {
    pub fn new(name: impl Into<String>, pairs: Vec<(String, String, f64)>) -> Result<Self> {
        let name = name.into();
        if pairs.is_empty() {
            return Err(Error::InvalidInput(alloc::format!("benchmark {name} has no pairs")));
        }
        if let Some(p) = pairs.iter().find(|p| !p.2.is_finite()) {
            return Err(Error::InvalidInput(alloc::format!(
                "benchmark {name}: non-finite score for {} {}",
                p.0,
                p.1
            )));
        }
        Ok(Benchmark { name, pairs })
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }
}

/// Benchmark file stems, in the order results are usually tabulated.
pub const STANDARD_BENCHMARKS: [&str; 13] = [
    "WS-353",
    "WS-353-SIM",
    "WS-353-REL",
    "MC-30",
    "RG-65",
    "Rare-Word",
    "MEN",
    "MTurk-287",
    "MTurk-771",
    "YP-130",
    "SimLex-999",
    "Verb-143",
    "SimVerb-3500",
];

#[derive(Debug, Clone, PartialEq)]
pub struct EvalResult {
    pub benchmark: String,
    pub rho: f64,
    pub pairs_used: usize,
    pub pairs_skipped: usize,
}

/// Spearman's ρ between embedding cosines and human scores. Pairs with a
/// missing word or a zero vector are skipped and counted.
pub fn evaluate(embeddings: &EmbeddingSet, benchmark: &Benchmark) -> Result<EvalResult> {
    let mut model = Vec::with_capacity(benchmark.len());
    let mut human = Vec::with_capacity(benchmark.len());
    for (w1, w2, score) in &benchmark.pairs {
        let sim = match (embeddings.lookup(w1), embeddings.lookup(w2)) {
            (Some(u), Some(v)) => cosine(u, v).ok(),
            _ => None,
        };
        if let Some(s) = sim {
            model.push(s);
            human.push(*score);
        }
    }
    let used = model.len();
    let skipped = benchmark.len() - used;
    if used < 2 {
        return Err(Error::InsufficientCoverage { used, skipped });
    }
    Ok(EvalResult {
        benchmark: benchmark.name.clone(),
        rho: spearman(&model, &human)?,
        pairs_used: used,
        pairs_skipped: skipped,
    })
}

/// Mean over dimensions of the population standard deviation across a
/// word's instances (`m_w`).
pub fn instance_spread(instances: &[Vec<f64>]) -> f64 {
    let Some(first) = instances.first() else {
        return 0.0;
    };
    let d = first.len();
    let n = instances.len() as f64;
    let mut total = 0.0;
    for i in 0..d {
        // shifting by the first value keeps identical instances at exactly 0
        let shift = first[i];
        let mean = instances.iter().map(|v| v[i] - shift).sum::<f64>() / n;
        let var = instances
            .iter()
            .map(|v| (v[i] - shift - mean) * (v[i] - shift - mean))
            .sum::<f64>()
            / n;
        total += libm::sqrt(var);
    }
    total / d as f64
}

#[derive(Debug, Clone, PartialEq)]
pub struct VarianceBucket {
    pub label: &'static str,
    /// Inclusive frequency range; `max` is `None` for the open top bucket.
    pub min: usize,
    pub max: Option<usize>,
    pub words: usize,
    /// Mean `m_w` over the bucket's words; 0 when the bucket is empty.
    pub mean_spread: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct VarianceReport {
    pub buckets: Vec<VarianceBucket>,
}

/// Minimum number of instances for a word to enter the variance study.
pub const VARIANCE_MIN_FREQUENCY: usize = 5;

const BUCKETS: [(&str, usize, Option<usize>); 4] = [
    ("5-99", 5, Some(99)),
    ("100-999", 100, Some(999)),
    ("1000-9999", 1000, Some(9999)),
    (">=10000", 10000, None),
];

/// Buckets words by instance count and averages `m_w` within each bucket.
pub fn variance_study(table: &InstanceEmbeddingTable) -> VarianceReport {
    let mut sums = [(0usize, 0.0f64); 4];
    for (_, instances) in table.iter() {
        let n = instances.len();
        let Some(b) = BUCKETS
            .iter()
            .position(|&(_, lo, hi)| n >= lo && hi.is_none_or(|h| n <= h))
        else {
            continue;
        };
        sums[b].0 += 1;
        sums[b].1 += instance_spread(instances);
    }
    VarianceReport {
        buckets: BUCKETS
            .iter()
            .zip(sums)
            .map(|(&(label, min, max), (words, total))| VarianceBucket {
                label,
                min,
                max,
                words,
                mean_spread: if words == 0 { 0.0 } else { total / words as f64 },
            })
            .collect(),
    }
}

/// The `top_n` words most cosine-similar to `word`, excluding itself.
/// Equal similarities are ordered lexicographically; zero vectors are skipped.
pub fn nearest_neighbors(set: &EmbeddingSet, word: &str, top_n: usize) -> Result<Vec<(String, f64)>> {
    let query = set
        .lookup(word)
        .ok_or_else(|| Error::UnknownWord(word.into()))?;
    let key = word.to_lowercase();
    let mut scored: Vec<(String, f64)> = Vec::with_capacity(set.len());
    for (w, v) in set.iter() {
        if w == key {
            continue;
        }
        match cosine(query, v) {
            Ok(s) => scored.push((w.into(), s)),
            Err(Error::UndefinedSimilarity) if norm(query) != 0.0 => {}
            Err(e) => return Err(e),
        }
    }
    scored.sort_by(|a, b| b.1.total_cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
    scored.truncate(top_n);
    Ok(scored)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn set(entries: &[(&str, &[f64])]) -> EmbeddingSet {
        let mut s = EmbeddingSet::new(entries[0].1.len());
        for (w, v) in entries {
            s.insert(w, v.to_vec()).unwrap();
        }
        s
    }

    fn bench(pairs: &[(&str, &str, f64)]) -> Benchmark {
        Benchmark::new("test", pairs.iter().map(|(a, b, s)| ((*a).into(), (*b).into(), *s)).collect()).unwrap()
    }

    #[test]
    fn averaging() {
        let mut t = InstanceEmbeddingTable::new(2);
        t.push("a", vec![1.0, 2.0]).unwrap();
        t.push("b", vec![1.0, -2.0]).unwrap();
        t.push("b", vec![-1.0, 2.0]).unwrap();
        let s = average_instances(&t).unwrap();
        assert_eq!(s.get("a").unwrap(), &[1.0, 2.0]);
        assert_eq!(s.get("b").unwrap(), &[0.0, 0.0]);
        assert!(average_instances(&InstanceEmbeddingTable::new(2)).is_err());
    }

    #[test]
    fn cosine_values() {
        assert!((cosine(&[0.3, 0.4], &[0.3, 0.4]).unwrap() - 1.0).abs() < 1e-15);
        assert_eq!(cosine(&[1.0, 0.0], &[0.0, 1.0]).unwrap(), 0.0);
        assert!(cosine(&[-1.0, 0.0], &[0.0, 1.0]).unwrap().is_sign_positive());
        let oracle = 32.0 / (14f64.sqrt() * 77f64.sqrt());
        assert!((cosine(&[1.0, 2.0, 3.0], &[4.0, 5.0, 6.0]).unwrap() - oracle).abs() < 1e-12);
        assert!((oracle - 0.974_631_846).abs() < 1e-9);
        assert_eq!(cosine(&[0.0, 0.0], &[1.0, 0.0]), Err(Error::UndefinedSimilarity));
        assert!(matches!(cosine(&[1.0], &[1.0, 0.0]), Err(Error::InvalidInput(_))));
    }

    #[test]
    fn ranks_with_ties() {
        assert_eq!(fractional_ranks(&[5.0, 6.0, 7.0, 8.0, 7.0]), [1.0, 2.0, 3.5, 5.0, 3.5]);
        assert_eq!(fractional_ranks(&[2.0, 2.0, 2.0]), [2.0, 2.0, 2.0]);
    }

    #[test]
    fn spearman_extremes() {
        let a = [1.0, 2.0, 3.0, 4.0];
        assert_eq!(spearman(&a, &[10.0, 20.0, 25.0, 100.0]).unwrap(), 1.0);
        assert_eq!(spearman(&a, &[4.0, 3.0, 2.0, 1.0]).unwrap(), -1.0);
        assert!(matches!(spearman(&a, &[1.0; 4]), Err(Error::UndefinedCorrelation(_))));
        assert!(spearman(&[1.0], &[1.0]).is_err());
        assert!(matches!(spearman(&a, &[1.0]), Err(Error::InvalidInput(_))));
    }

    #[test]
    fn spearman_with_ties_matches_hand_computation() {
        // ranks (1..5) vs (1, 2, 3.5, 5, 3.5); mean 3 for both
        // deviations a: (-2, -1, 0, 1, 2), b: (-2, -1, 0.5, 2, 0.5)
        // cov = 4 + 1 + 0 + 2 + 1 = 8, var_a = 10, var_b = 9.5
        let expected = 8.0 / (10.0f64 * 9.5).sqrt();
        let rho = spearman(&[1.0, 2.0, 3.0, 4.0, 5.0], &[5.0, 6.0, 7.0, 8.0, 7.0]).unwrap();
        assert!((rho - expected).abs() < 1e-12);
    }

    #[test]
    fn evaluate_counts_coverage() {
        let s = set(&[("a", &[1.0, 0.0]), ("b", &[1.0, 0.2]), ("c", &[0.0, 1.0]), ("z", &[0.0, 0.0])]);
        let r = evaluate(&s, &bench(&[("a", "b", 9.0), ("A", "c", 1.0), ("b", "c", 3.0), ("a", "x", 5.0), ("a", "z", 1.0)])).unwrap();
        assert_eq!((r.pairs_used, r.pairs_skipped), (3, 2));
        assert_eq!(r.rho, 1.0);

        let err = evaluate(&s, &bench(&[("p", "q", 1.0), ("r", "s", 2.0)])).unwrap_err();
        assert_eq!(err, Error::InsufficientCoverage { used: 0, skipped: 2 });
    }

    #[test]
    fn spread_of_identical_instances_is_zero() {
        let mut t = InstanceEmbeddingTable::new(3);
        for _ in 0..6 {
            t.push("w", vec![0.5, -1.0, 2.0]).unwrap();
        }
        let r = variance_study(&t);
        assert_eq!(r.buckets[0].words, 1);
        assert_eq!(r.buckets[0].mean_spread, 0.0);
    }

    #[test]
    fn spread_population_std() {
        let inst: Vec<Vec<f64>> = [0.0, 2.0, 0.0, 2.0, 0.0].iter().map(|&x| vec![x]).collect();
        // mean 0.8, variance (3·0.64 + 2·1.44)/5 = 0.96
        assert!((instance_spread(&inst) - 0.96f64.sqrt()).abs() < 1e-12);
        assert!((instance_spread(&inst) - 0.979_795_897).abs() < 1e-9);
    }

    #[test]
    fn bucket_floor_and_edges() {
        let mut t = InstanceEmbeddingTable::new(1);
        for (w, n) in [("four", 4), ("five", 5), ("ninety-nine", 99), ("hundred", 100)] {
            for k in 0..n {
                t.push(w, vec![k as f64]).unwrap();
            }
        }
        let r = variance_study(&t);
        let counts: Vec<usize> = r.buckets.iter().map(|b| b.words).collect();
        assert_eq!(counts, [2, 1, 0, 0]);
        assert_eq!(r.buckets[3].mean_spread, 0.0);
    }

    #[test]
    fn neighbors_ranked_with_lexicographic_ties() {
        let s = set(&[("a", &[1.0, 0.0]), ("b", &[1.0, 0.0]), ("c", &[0.0, 1.0])]);
        assert_eq!(nearest_neighbors(&s, "a", 2).unwrap(), vec![("b".into(), 1.0), ("c".into(), 0.0)]);
        assert_eq!(nearest_neighbors(&s, "a", 10).unwrap().len(), 2);
        assert!(matches!(nearest_neighbors(&s, "q", 1), Err(Error::UnknownWord(_))));

        let tied = set(&[("q", &[1.0, 0.0]), ("y", &[2.0, 0.0]), ("x", &[3.0, 0.0])]);
        let names: Vec<String> = nearest_neighbors(&tied, "q", 2).unwrap().into_iter().map(|p| p.0).collect();
        assert_eq!(names, ["x", "y"]);
    }

    #[test]
    fn duplicate_and_bad_inserts() {
        let mut s = EmbeddingSet::new(2);
        s.insert("Word", vec![1.0, 2.0]).unwrap();
        assert!(s.insert("word", vec![1.0, 2.0]).is_err());
        assert!(s.insert("other", vec![1.0]).is_err());
        assert!(s.insert("nan", vec![f64::NAN, 1.0]).is_err());
        assert!(s.contains("WORD"));
    }
}
