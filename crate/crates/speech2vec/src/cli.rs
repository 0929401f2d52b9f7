//! Command-line front end.
//!
//! Exit status: 0 success, 1 usage or configuration error, 2 data or parse
//! error, 3 numeric failure.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use log::{info, warn};
use speech2vec_core::corpus::{segment, standardize, transcripts, SegmentOptions, SegmentedCorpus};
use speech2vec_core::eval::{
    average_instances, evaluate, nearest_neighbors, variance_study, Benchmark, EmbeddingSet, EvalResult,
    STANDARD_BENCHMARKS, VARIANCE_MIN_FREQUENCY,
};
use speech2vec_core::speech2vec::{embed_instances, train_with, Speech2VecModel};
use speech2vec_core::synthetic::generate_synthetic;
use speech2vec_core::word2vec::train_w2v;

use crate::checkpoint::{load_checkpoint, write_checkpoint};
use crate::config::{require_input, require_output, ModeName, RunConfig};
use crate::error::Result;
use crate::formats::{
    benchmark_files, load_alignments, load_benchmark, load_embeddings, load_features, load_instances, read_text,
    write_alignments, write_embeddings, write_features, write_instances, write_text,
};

pub const CHECKPOINT_FILE: &str = "checkpoint.txt";
pub const INSTANCES_FILE: &str = "instances.txt";
pub const EMBEDDINGS_FILE: &str = "embeddings.txt";
pub const LOSS_FILE: &str = "loss.tsv";
pub const FEATURES_FILE: &str = "features.txt";
pub const ALIGNMENTS_FILE: &str = "alignments.txt";

#[derive(Debug, Parser)]
#[command(name = "speech2vec", version, args_override_self = true, about = "Train and evaluate word embeddings from spoken-word segments")]
pub struct Cli {
    /// Log more (-v progress, -vv per-epoch losses).
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    pub verbose: u8,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Render a token file as a synthetic feature corpus plus alignments.
    Synth(SynthArgs),
    /// Train the sequence-to-sequence speech embedding model.
    #[command(name = "train-s2v")]
    TrainS2v(TrainS2vArgs),
    /// Train the text baseline (negative-sampling word2vec) on transcripts.
    #[command(name = "train-w2v")]
    TrainW2v(TrainW2vArgs),
    /// Word-similarity evaluation (Spearman's rho) against benchmark files.
    Eval(EvalArgs),
    /// Spread of instance embeddings per frequency bucket.
    Variance(VarianceArgs),
    /// Most cosine-similar words to a query word.
    Neighbors(NeighborsArgs),
    /// Embed a corpus with a trained checkpoint.
    Export(ExportArgs),
}

#[derive(Debug, Clone, Args)]
pub struct CommonArgs {
    /// TOML run configuration; flags given on the command line take precedence.
    #[arg(short, long)]
    pub config: Option<PathBuf>,
    /// Top-level seed; every random component derives its own stream from it [default: 0].
    #[arg(long)]
    pub seed: Option<u64>,
}

#[derive(Debug, Args)]
pub struct SynthArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    /// Token file, one utterance per line.
    #[arg(long)]
    pub tokens: Option<PathBuf>,
    /// Directory receiving features.txt and alignments.txt.
    #[arg(long)]
    pub out_dir: Option<PathBuf>,
    /// Feature dimension [default: 13].
    #[arg(long)]
    pub feature_dim: Option<usize>,
    /// Minimum frames per token [default: 3].
    #[arg(long)]
    pub min_len: Option<usize>,
    /// Maximum frames per token [default: 8].
    #[arg(long)]
    pub max_len: Option<usize>,
    /// Standard deviation of the per-frame Gaussian noise [default: 0.1].
    #[arg(long)]
    pub noise: Option<f64>,
}

#[derive(Debug, Args)]
pub struct CorpusArgs {
    /// Feature file.
    #[arg(long)]
    pub features: Option<PathBuf>,
    /// Word alignment file.
    #[arg(long)]
    pub alignments: Option<PathBuf>,
    /// Standardize every feature dimension over the corpus (off by default).
    #[arg(long)]
    pub standardize: bool,
}

#[derive(Debug, Args)]
pub struct TrainS2vArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    #[command(flatten)]
    pub corpus: CorpusArgs,
    /// Directory receiving checkpoint.txt, instances.txt, embeddings.txt and loss.tsv.
    #[arg(long)]
    pub out_dir: Option<PathBuf>,
    /// Training objective [default: skipgram].
    #[arg(long, value_enum)]
    pub mode: Option<ModeName>,
    /// Embedding size, even; usual sizes are 10, 50, 100 and 200 [default: 50].
    #[arg(long)]
    pub dim: Option<usize>,
    /// Context window k on each side [default: 3].
    #[arg(long)]
    pub window: Option<usize>,
    /// SGD learning rate, no momentum [default: 1e-3].
    #[arg(long)]
    pub lr: Option<f64>,
    /// Training epochs [default: 500].
    #[arg(long)]
    pub epochs: Option<usize>,
    /// Examples whose gradients are summed per SGD step [default: 1].
    #[arg(long)]
    pub batch_size: Option<usize>,
    /// Segments longer than this many frames are truncated [default: 100].
    #[arg(long)]
    pub max_len: Option<usize>,
    /// Clip the global gradient norm to this value (off by default).
    #[arg(long)]
    pub clip: Option<f64>,
}

#[derive(Debug, Args)]
pub struct TrainW2vArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    /// Alignment file whose words form the transcripts.
    #[arg(long, conflicts_with = "tokens")]
    pub alignments: Option<PathBuf>,
    /// Token file, one utterance per line, instead of alignments.
    #[arg(long)]
    pub tokens: Option<PathBuf>,
    /// Output embedding file.
    #[arg(short, long)]
    pub output: Option<PathBuf>,
    /// Training objective [default: skipgram].
    #[arg(long, value_enum)]
    pub mode: Option<ModeName>,
    /// Embedding size [default: 50].
    #[arg(long)]
    pub dim: Option<usize>,
    /// Context window k on each side [default: 3].
    #[arg(long)]
    pub window: Option<usize>,
    /// Noise words per positive target [default: 5].
    #[arg(long)]
    pub negatives: Option<usize>,
    /// Training epochs [default: 5].
    #[arg(long)]
    pub epochs: Option<usize>,
    /// Constant learning rate [default: 0.025].
    #[arg(long)]
    pub lr: Option<f64>,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, ValueEnum)]
pub enum OutputFormat {
    #[default]
    Human,
    Tsv,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    /// Embedding file, optionally labelled as LABEL=PATH; repeat to compare several.
    #[arg(short, long = "embeddings", required = true)]
    pub embeddings: Vec<String>,
    /// Directory of benchmark files, named by benchmark (e.g. WS-353.txt).
    #[arg(short, long)]
    pub benchmarks: Option<PathBuf>,
    /// TOML run configuration (for the benchmark directory).
    #[arg(short, long)]
    pub config: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t)]
    pub format: OutputFormat,
}

#[derive(Debug, Args)]
pub struct VarianceArgs {
    /// Instance-embedding file (one line per spoken instance).
    #[arg(short, long)]
    pub instances: PathBuf,
    #[arg(long, value_enum, default_value_t)]
    pub format: OutputFormat,
}

#[derive(Debug, Args)]
pub struct NeighborsArgs {
    /// Embedding file.
    #[arg(short, long)]
    pub embeddings: PathBuf,
    /// Query word.
    #[arg(short, long)]
    pub word: String,
    /// Number of neighbors.
    #[arg(long, default_value_t = 10)]
    pub top: usize,
}

#[derive(Debug, Args)]
pub struct ExportArgs {
    /// Checkpoint written by train-s2v.
    #[arg(long)]
    pub checkpoint: PathBuf,
    #[command(flatten)]
    pub corpus: CorpusArgs,
    /// TOML run configuration (for the corpus paths).
    #[arg(short, long)]
    pub config: Option<PathBuf>,
    /// Directory receiving instances.txt and embeddings.txt.
    #[arg(long)]
    pub out_dir: Option<PathBuf>,
}

/// Parses `std::env::args`, runs the command and maps the outcome to an
/// exit status.
pub fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    let level = match cli.verbose {
        0 => log::LevelFilter::Warn,
        1 => log::LevelFilter::Info,
        _ => log::LevelFilter::Debug,
    };
    env_logger::Builder::new().filter_level(level).parse_default_env().init();
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}

pub fn run(command: Command) -> Result<()> {
    match command {
        Command::Synth(a) => cmd_synth(a),
        Command::TrainS2v(a) => cmd_train_s2v(a),
        Command::TrainW2v(a) => cmd_train_w2v(a),
        Command::Eval(a) => {
            let table = cmd_eval(&a)?;
            print!("{table}");
            Ok(())
        }
        Command::Variance(a) => {
            print!("{}", cmd_variance(&a)?);
            Ok(())
        }
        Command::Neighbors(a) => {
            let set = load_embeddings(&a.embeddings)?;
            for (w, c) in nearest_neighbors(&set, &a.word, a.top)? {
                println!("{w}\t{c}");
            }
            Ok(())
        }
        Command::Export(a) => cmd_export(a),
    }
}

fn load_config(common: &CommonArgs) -> Result<RunConfig> {
    let mut cfg = RunConfig::load(common.config.as_deref())?;
    if let Some(s) = common.seed {
        cfg.seed = s;
    }
    Ok(cfg)
}

fn set<T>(slot: &mut T, flag: Option<T>) {
    if let Some(v) = flag {
        *slot = v;
    }
}

/// One utterance per line, whitespace-separated tokens.
pub fn parse_tokens(text: &str) -> Vec<Vec<String>> {
    text.lines()
        .map(|l| l.split_whitespace().map(str::to_lowercase).collect())
        .collect()
}

fn cmd_synth(a: SynthArgs) -> Result<()> {
    let mut cfg = load_config(&a.common)?;
    set(&mut cfg.paths.tokens, a.tokens.map(Some));
    set(&mut cfg.paths.output, a.out_dir.map(Some));
    set(&mut cfg.synth.feature_dim, a.feature_dim);
    set(&mut cfg.synth.min_len, a.min_len);
    set(&mut cfg.synth.max_len, a.max_len);
    set(&mut cfg.synth.noise_sigma, a.noise);
    let tokens = parse_tokens(&read_text(require_input(cfg.paths.tokens.as_ref(), "--tokens")?)?);
    let out = require_output(cfg.paths.output.as_ref(), "--out-dir")?;
    let (utts, aligns) = generate_synthetic(&tokens, &cfg.synth_config())?;
    write_text(&out.join(FEATURES_FILE), &write_features(&utts))?;
    write_text(&out.join(ALIGNMENTS_FILE), &write_alignments(&aligns))?;
    info!("wrote {} utterances and {} alignments to {}", utts.len(), aligns.len(), out.display());
    Ok(())
}

fn load_corpus(cfg: &RunConfig) -> Result<SegmentedCorpus> {
    let features = require_input(cfg.paths.features.as_ref(), "--features")?;
    let alignments = require_input(cfg.paths.alignments.as_ref(), "--alignments")?;
    let mut utts = load_features(features)?;
    let aligns = load_alignments(alignments)?;
    if cfg.speech2vec.standardize {
        standardize(&mut utts);
    }
    let opts = SegmentOptions {
        max_len: cfg.speech2vec.max_len,
        ..Default::default()
    };
    let corpus = segment(&utts, &aligns, opts)?;
    info!("{} segments, {} word types", corpus.len(), corpus.vocab().len());
    Ok(corpus)
}

fn apply_corpus_args(cfg: &mut RunConfig, c: CorpusArgs) {
    set(&mut cfg.paths.features, c.features.map(Some));
    set(&mut cfg.paths.alignments, c.alignments.map(Some));
    cfg.speech2vec.standardize |= c.standardize;
}

fn write_embedding_outputs(model: &Speech2VecModel, corpus: &SegmentedCorpus, out: &Path) -> Result<()> {
    let table = embed_instances(model, corpus)?;
    write_text(&out.join(INSTANCES_FILE), &write_instances(&table))?;
    write_text(&out.join(EMBEDDINGS_FILE), &write_embeddings(&average_instances(&table)?))
}

fn cmd_train_s2v(a: TrainS2vArgs) -> Result<()> {
    let mut cfg = load_config(&a.common)?;
    apply_corpus_args(&mut cfg, a.corpus);
    set(&mut cfg.paths.output, a.out_dir.map(Some));
    let s = &mut cfg.speech2vec;
    set(&mut s.mode, a.mode);
    set(&mut s.embed_dim, a.dim);
    set(&mut s.window, a.window);
    set(&mut s.learning_rate, a.lr);
    set(&mut s.epochs, a.epochs);
    set(&mut s.batch_size, a.batch_size);
    set(&mut s.max_len, a.max_len);
    if a.clip.is_some() {
        s.clip = a.clip;
    }
    let train_cfg = cfg.train_config();
    train_cfg.validate()?;
    let out = require_output(cfg.paths.output.as_ref(), "--out-dir")?;
    let corpus = load_corpus(&cfg)?;

    info!("training {} dim {} for {} epochs", train_cfg.mode, train_cfg.embed_dim, train_cfg.epochs);
    let outcome = train_with(&corpus, &train_cfg, |epoch, loss| log::debug!("epoch {epoch} loss {loss}"))?;
    if outcome.clipped_steps > 0 {
        warn!("gradient clipping triggered on {} steps", outcome.clipped_steps);
    }
    let mut table = String::from("epoch\tmean_loss\n");
    for (e, l) in outcome.loss_trace.iter().enumerate() {
        writeln!(table, "{}\t{l}", e + 1).unwrap();
    }
    write_text(&out.join(CHECKPOINT_FILE), &write_checkpoint(&outcome.model))?;
    write_text(&out.join(LOSS_FILE), &table)?;
    write_embedding_outputs(&outcome.model, &corpus, out)
}

fn cmd_train_w2v(a: TrainW2vArgs) -> Result<()> {
    let mut cfg = load_config(&a.common)?;
    set(&mut cfg.paths.alignments, a.alignments.map(Some));
    set(&mut cfg.paths.tokens, a.tokens.map(Some));
    set(&mut cfg.paths.output, a.output.map(Some));
    let w = &mut cfg.word2vec;
    set(&mut w.mode, a.mode);
    set(&mut w.embed_dim, a.dim);
    set(&mut w.window, a.window);
    set(&mut w.negatives, a.negatives);
    set(&mut w.epochs, a.epochs);
    set(&mut w.learning_rate, a.lr);
    let w2v_cfg = cfg.w2v_config();
    w2v_cfg.validate()?;
    let out = require_output(cfg.paths.output.as_ref(), "--output")?;
    let tokens = match (&cfg.paths.tokens, &cfg.paths.alignments) {
        (Some(t), _) => parse_tokens(&read_text(require_input(Some(t), "--tokens")?)?),
        (None, a) => transcripts(&load_alignments(require_input(a.as_ref(), "--alignments")?)?)?,
    };
    let model = train_w2v(&tokens, &w2v_cfg)?;
    info!("vocabulary of {} words", model.vocab.len());
    write_text(out, &write_embeddings(&model.embeddings()))
}

/// Orders benchmarks as the standard list, then any others by name.
fn benchmark_order(name: &str) -> (usize, String) {
    let pos = STANDARD_BENCHMARKS.iter().position(|b| b.eq_ignore_ascii_case(name));
    (pos.unwrap_or(STANDARD_BENCHMARKS.len()), name.to_string())
}

fn label_and_path(spec: &str) -> (String, PathBuf) {
    match spec.split_once('=') {
        Some((label, path)) if !label.is_empty() => (label.to_string(), PathBuf::from(path)),
        _ => {
            let path = PathBuf::from(spec);
            let label = path.file_stem().map_or_else(|| spec.to_string(), |s| s.to_string_lossy().into_owned());
            (label, path)
        }
    }
}

/// Renders the evaluation table: one row per benchmark, one column group
/// (rho, pairs used, pairs skipped) per embedding file.
pub fn cmd_eval(a: &EvalArgs) -> Result<String> {
    let cfg = RunConfig::load(a.config.as_deref())?;
    let dir = a.benchmarks.as_ref().or(cfg.paths.benchmarks.as_ref());
    let dir = require_input(dir, "--benchmarks")?;
    let sets: Vec<(String, EmbeddingSet)> = a
        .embeddings
        .iter()
        .map(|spec| {
            let (label, path) = label_and_path(spec);
            Ok((label, load_embeddings(&path)?))
        })
        .collect::<Result<_>>()?;
    let mut benchmarks: Vec<Benchmark> = benchmark_files(dir)?.iter().map(|p| load_benchmark(p)).collect::<Result<_>>()?;
    if benchmarks.is_empty() {
        warn!("no benchmark files in {}", dir.display());
    }
    benchmarks.sort_by_key(|b| benchmark_order(&b.name));

    let rows: Vec<(&Benchmark, Vec<Option<EvalResult>>)> = benchmarks
        .iter()
        .map(|b| {
            let cells = sets
                .iter()
                .map(|(label, set)| match evaluate(set, b) {
                    Ok(r) => Some(r),
                    Err(e) => {
                        warn!("{label} on {}: {e}", b.name);
                        None
                    }
                })
                .collect();
            (b, cells)
        })
        .collect();

    let mut out = String::new();
    match a.format {
        OutputFormat::Tsv => {
            out.push_str("benchmark\tpairs");
            for (label, _) in &sets {
                write!(out, "\t{label}.rho\t{label}.used\t{label}.skipped").unwrap();
            }
            out.push('\n');
            for (b, cells) in &rows {
                write!(out, "{}\t{}", b.name, b.len()).unwrap();
                for cell in cells {
                    match cell {
                        Some(r) => write!(out, "\t{}\t{}\t{}", r.rho, r.pairs_used, r.pairs_skipped).unwrap(),
                        None => out.push_str("\tNA\tNA\tNA"),
                    }
                }
                out.push('\n');
            }
        }
        OutputFormat::Human => {
            let name_w = rows.iter().map(|(b, _)| b.name.len()).chain([9]).max().unwrap();
            let cell_w = sets.iter().map(|(l, _)| l.len()).chain([16]).max().unwrap();
            write!(out, "{:<name_w$}", "benchmark").unwrap();
            for (label, _) in &sets {
                write!(out, "  {label:>cell_w$}").unwrap();
            }
            out.push('\n');
            for (b, cells) in &rows {
                write!(out, "{:<name_w$}", b.name).unwrap();
                for cell in cells {
                    let text = match cell {
                        Some(r) => format!("{:.3} ({}/{})", r.rho, r.pairs_used, b.len()),
                        None => format!("n/a (0/{})", b.len()),
                    };
                    write!(out, "  {text:>cell_w$}").unwrap();
                }
                out.push('\n');
            }
        }
    }
    Ok(out)
}

pub fn cmd_variance(a: &VarianceArgs) -> Result<String> {
    let table = load_instances(&a.instances)?;
    let report = variance_study(&table);
    let mut out = String::new();
    match a.format {
        OutputFormat::Tsv => {
            out.push_str("bucket\twords\tmean_m_w\n");
            for b in &report.buckets {
                writeln!(out, "{}\t{}\t{}", b.label, b.words, b.mean_spread).unwrap();
            }
        }
        OutputFormat::Human => {
            writeln!(out, "words with at least {VARIANCE_MIN_FREQUENCY} instances").unwrap();
            writeln!(out, "{:<10}  {:>6}  {:>10}", "frequency", "words", "mean m_w").unwrap();
            for b in &report.buckets {
                writeln!(out, "{:<10}  {:>6}  {:>10.6}", b.label, b.words, b.mean_spread).unwrap();
            }
        }
    }
    Ok(out)
}

fn cmd_export(a: ExportArgs) -> Result<()> {
    let mut cfg = RunConfig::load(a.config.as_deref())?;
    apply_corpus_args(&mut cfg, a.corpus);
    set(&mut cfg.paths.output, a.out_dir.map(Some));
    let model = load_checkpoint(&a.checkpoint)?;
    cfg.speech2vec.max_len = model.config.max_len;
    let out = require_output(cfg.paths.output.as_ref(), "--out-dir")?;
    let corpus = load_corpus(&cfg)?;
    write_embedding_outputs(&model, &corpus, out)
}
