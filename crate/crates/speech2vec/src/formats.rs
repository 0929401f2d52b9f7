//! Plain-text file formats.
//!
//! Floats are written with Rust's shortest round-trip representation, so every
//! `parse_*(write_*(x))` reproduces the values bit for bit.
//!
//! * Features: blocks of `<utt_id> <num_frames> <feature_dim>` followed by
//!   `num_frames` rows of `feature_dim` floats.
//! * Alignments: `<utt_id> <word> <start_frame> <end_frame>` per line, `#`
//!   comments allowed.
//! * Embeddings: a `<count> <dim>` header, then `<word> <v1> ... <vdim>` lines.
//!   The instance variant uses the same layout but allows a word to repeat,
//!   one line per spoken instance, in order.
//! * Benchmarks: `<word1> <word2> <score>` per line (tabs or spaces), `#`
//!   comments allowed; the benchmark name is the file stem.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use speech2vec_core::corpus::{group_alignments, Utterance, WordAlignment};
use speech2vec_core::eval::{Benchmark, EmbeddingSet};
use speech2vec_core::speech2vec::InstanceEmbeddingTable;
use speech2vec_core::tensor::Matrix;

use crate::error::{Error, Result};

pub fn read_text(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

/// Writes `contents`, creating missing parent directories.
pub fn write_text(path: &Path, contents: &str) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    fs::write(path, contents).map_err(|e| Error::io(path, e))
}

/// Non-blank lines with their 1-based line numbers.
pub(crate) struct Lines<'a> {
    path: &'a Path,
    inner: std::iter::Enumerate<std::str::Lines<'a>>,
    comments: bool,
}

impl<'a> Lines<'a> {
    pub(crate) fn new(text: &'a str, path: &'a Path, comments: bool) -> Self {
        Lines {
            path,
            inner: text.lines().enumerate(),
            comments,
        }
    }

    pub(crate) fn error(&self, line: usize, message: impl Into<String>) -> Error {
        Error::Parse {
            path: self.path.to_path_buf(),
            line,
            message: message.into(),
        }
    }

    pub(crate) fn parse<T: FromStr>(&self, line: usize, field: &str, what: &str) -> Result<T> {
        field
            .parse()
            .map_err(|_| self.error(line, format!("invalid {what} {field:?}")))
    }

    pub(crate) fn floats(&self, line: usize, fields: &[&str]) -> Result<Vec<f64>> {
        fields
            .iter()
            .map(|f| {
                let x: f64 = self.parse(line, f, "number")?;
                if x.is_finite() {
                    Ok(x)
                } else {
                    Err(self.error(line, format!("non-finite value {f:?}")))
                }
            })
            .collect()
    }
}

impl<'a> Iterator for Lines<'a> {
    type Item = (usize, Vec<&'a str>);

    fn next(&mut self) -> Option<Self::Item> {
        for (i, line) in self.inner.by_ref() {
            let trimmed = line.trim();
            if trimmed.is_empty() || (self.comments && trimmed.starts_with('#')) {
                continue;
            }
            return Some((i + 1, trimmed.split_whitespace().collect()));
        }
        None
    }
}

fn push_row(out: &mut String, head: Option<&str>, values: &[f64]) {
    let mut sep = "";
    if let Some(h) = head {
        out.push_str(h);
        sep = " ";
    }
    for v in values {
        write!(out, "{sep}{v}").unwrap();
        sep = " ";
    }
    out.push('\n');
}

pub fn write_features(utterances: &[Utterance]) -> String {
    let mut out = String::new();
    for u in utterances {
        writeln!(out, "{} {} {}", u.id, u.num_frames(), u.feature_dim()).unwrap();
        for r in 0..u.num_frames() {
            push_row(&mut out, None, u.features.row(r));
        }
    }
    out
}

pub fn parse_features(text: &str, path: &Path) -> Result<Vec<Utterance>> {
    let mut lines = Lines::new(text, path, false);
    let mut utterances: Vec<Utterance> = Vec::new();
    let mut ids = std::collections::BTreeSet::new();
    let mut file_dim = None;
    while let Some((ln, fields)) = lines.next() {
        let [id, frames, dim] = fields[..] else {
            return Err(lines.error(ln, "expected header `<utt_id> <num_frames> <feature_dim>`"));
        };
        let frames: usize = lines.parse(ln, frames, "frame count")?;
        let dim: usize = lines.parse(ln, dim, "feature dimension")?;
        if frames == 0 || dim == 0 {
            return Err(lines.error(ln, format!("utterance {id} is empty")));
        }
        if *file_dim.get_or_insert(dim) != dim {
            return Err(lines.error(
                ln,
                format!("feature dimension {dim} differs from {} earlier in the file", file_dim.unwrap()),
            ));
        }
        if !ids.insert(id.to_string()) {
            return Err(lines.error(ln, format!("duplicate utterance id {id}")));
        }
        let mut data = Vec::with_capacity(frames * dim);
        for _ in 0..frames {
            let Some((rl, row)) = lines.next() else {
                return Err(lines.error(ln, format!("utterance {id}: file ends before {frames} frames")));
            };
            if row.len() != dim {
                return Err(lines.error(rl, format!("expected {dim} values, found {}", row.len())));
            }
            data.extend(lines.floats(rl, &row)?);
        }
        let utt = Utterance::new(id, Matrix::from_vec(frames, dim, data)).map_err(|e| lines.error(ln, e.to_string()))?;
        utterances.push(utt);
    }
    Ok(utterances)
}

pub fn load_features(path: &Path) -> Result<Vec<Utterance>> {
    parse_features(&read_text(path)?, path)
}

pub fn write_alignments(alignments: &[WordAlignment]) -> String {
    let mut out = String::new();
    for a in alignments {
        writeln!(out, "{} {} {} {}", a.utt_id, a.word, a.start, a.end).unwrap();
    }
    out
}

/// Parses alignments in file order; syntax and per-line checks only.
pub fn parse_alignments(text: &str, path: &Path) -> Result<Vec<WordAlignment>> {
    let lines = Lines::new(text, path, true);
    let mut out = Vec::new();
    for (ln, fields) in Lines::new(text, path, true) {
        let [utt, word, start, end] = fields[..] else {
            return Err(lines.error(ln, "expected `<utt_id> <word> <start_frame> <end_frame>`"));
        };
        let start = lines.parse(ln, start, "start frame")?;
        let end = lines.parse(ln, end, "end frame")?;
        out.push(WordAlignment::new(utt, word, start, end).map_err(|e| lines.error(ln, e.to_string()))?);
    }
    Ok(out)
}

/// Loads, groups per utterance, sorts by start frame and rejects overlaps.
pub fn load_alignments(path: &Path) -> Result<Vec<WordAlignment>> {
    let parsed = parse_alignments(&read_text(path)?, path)?;
    Ok(group_alignments(parsed)?.into_iter().flat_map(|(_, words)| words).collect())
}

pub fn write_embeddings(set: &EmbeddingSet) -> String {
    let mut out = format!("{} {}\n", set.len(), set.dim());
    for (word, v) in set.iter() {
        push_row(&mut out, Some(word), v);
    }
    out
}

pub fn write_instances(table: &InstanceEmbeddingTable) -> String {
    let mut out = format!("{} {}\n", table.num_instances(), table.dim());
    for (word, instances) in table.iter() {
        for v in instances {
            push_row(&mut out, Some(word), v);
        }
    }
    out
}

/// `(line, word, vector)`.
type Row<'a> = (usize, &'a str, Vec<f64>);

/// Header-checked `(word, vector)` rows.
fn parse_vectors<'a>(text: &'a str, path: &'a Path) -> Result<(usize, Vec<Row<'a>>)> {
    let mut lines = Lines::new(text, path, false);
    let Some((hl, header)) = lines.next() else {
        return Err(lines.error(1, "missing `<count> <dim>` header"));
    };
    let [count, dim] = header[..] else {
        return Err(lines.error(hl, "expected header `<count> <dim>`"));
    };
    let count: usize = lines.parse(hl, count, "count")?;
    let dim: usize = lines.parse(hl, dim, "dimension")?;
    if dim == 0 {
        return Err(lines.error(hl, "dimension must be positive"));
    }
    let mut rows = Vec::with_capacity(count);
    let mut last = hl;
    while let Some((ln, fields)) = lines.next() {
        last = ln;
        if fields.len() != dim + 1 {
            return Err(lines.error(ln, format!("expected a word and {dim} values, found {} fields", fields.len())));
        }
        rows.push((ln, fields[0], lines.floats(ln, &fields[1..])?));
    }
    if rows.len() != count {
        return Err(lines.error(last, format!("header announces {count} vectors, found {}", rows.len())));
    }
    Ok((dim, rows))
}

pub fn parse_embeddings(text: &str, path: &Path) -> Result<EmbeddingSet> {
    let (dim, rows) = parse_vectors(text, path)?;
    let mut set = EmbeddingSet::new(dim);
    for (ln, word, v) in rows {
        set.insert(word, v).map_err(|e| Error::Parse {
            path: path.to_path_buf(),
            line: ln,
            message: e.to_string(),
        })?;
    }
    Ok(set)
}

pub fn parse_instances(text: &str, path: &Path) -> Result<InstanceEmbeddingTable> {
    let (dim, rows) = parse_vectors(text, path)?;
    let mut table = InstanceEmbeddingTable::new(dim);
    for (ln, word, v) in rows {
        table.push(word, v).map_err(|e| Error::Parse {
            path: path.to_path_buf(),
            line: ln,
            message: e.to_string(),
        })?;
    }
    Ok(table)
}

pub fn load_embeddings(path: &Path) -> Result<EmbeddingSet> {
    parse_embeddings(&read_text(path)?, path)
}

pub fn load_instances(path: &Path) -> Result<InstanceEmbeddingTable> {
    parse_instances(&read_text(path)?, path)
}

pub fn parse_benchmark(name: &str, text: &str, path: &Path) -> Result<Benchmark> {
    let lines = Lines::new(text, path, true);
    let mut pairs = Vec::new();
    for (ln, fields) in Lines::new(text, path, true) {
        let [a, b, score] = fields[..] else {
            return Err(lines.error(ln, "expected `<word1> <word2> <score>`"));
        };
        let score = lines.floats(ln, &[score])?[0];
        pairs.push((a.to_lowercase(), b.to_lowercase(), score));
    }
    Benchmark::new(name, pairs).map_err(|e| lines.error(1, e.to_string()))
}

/// Every regular, non-hidden file in `dir`, sorted by name.
pub fn benchmark_files(dir: &Path) -> Result<Vec<PathBuf>> {
    let mut files = Vec::new();
    for entry in fs::read_dir(dir).map_err(|e| Error::io(dir, e))? {
        let path = entry.map_err(|e| Error::io(dir, e))?.path();
        let hidden = path.file_name().and_then(|n| n.to_str()).is_some_and(|n| n.starts_with('.'));
        if path.is_file() && !hidden {
            files.push(path);
        }
    }
    files.sort();
    Ok(files)
}

pub fn load_benchmark(path: &Path) -> Result<Benchmark> {
    let name = path
        .file_stem()
        .and_then(|s| s.to_str())
        .ok_or_else(|| Error::Usage(format!("{}: file name is not valid UTF-8", path.display())))?;
    parse_benchmark(name, &read_text(path)?, path)
}

pub fn load_benchmark_dir(dir: &Path) -> Result<Vec<Benchmark>> {
    benchmark_files(dir)?.iter().map(|p| load_benchmark(p)).collect()
}
