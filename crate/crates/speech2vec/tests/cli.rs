use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use speech2vec::formats::{load_embeddings, load_features, load_instances, parse_alignments};
use speech2vec_core::corpus::segment;
use speech2vec_core::eval::{evaluate, variance_study, Benchmark};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_speech2vec"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exited normally")
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

const TOKENS: &str = "the cat sat on the mat\nthe dog sat on the log\na cat and a dog\n";

/// Writes a token file and renders it with `synth`; returns the output dir.
fn synth(dir: &Path, tokens: &str, extra: &[&str]) -> PathBuf {
    fs::create_dir_all(dir).unwrap();
    let tok = dir.join("tokens.txt");
    fs::write(&tok, tokens).unwrap();
    let out = dir.join("corpus");
    let mut args = vec!["synth", "--tokens", s(&tok), "--out-dir", s(&out), "--seed", "4"];
    args.extend_from_slice(extra);
    let o = run(&args);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    out
}

fn train_s2v(corpus: &Path, out: &Path, extra: &[&str]) -> Output {
    let feats = corpus.join("features.txt");
    let aligns = corpus.join("alignments.txt");
    let mut args = vec![
        "train-s2v",
        "--features",
        s(&feats),
        "--alignments",
        s(&aligns),
        "--out-dir",
        s(out),
        "--dim",
        "4",
        "--epochs",
        "3",
    ];
    args.extend_from_slice(extra);
    run(&args)
}

#[test]
fn synth_is_deterministic_and_counts_tokens() {
    let tmp = tempfile::tempdir().unwrap();
    let line: Vec<String> = (0..100).map(|i| format!("w{}", i % 10)).collect();
    let a = synth(&tmp.path().join("a"), &line.join(" "), &[]);
    let b = synth(&tmp.path().join("b"), &line.join(" "), &[]);
    for f in ["features.txt", "alignments.txt"] {
        assert_eq!(fs::read(a.join(f)).unwrap(), fs::read(b.join(f)).unwrap(), "{f}");
    }
    let aligns = fs::read_to_string(a.join("alignments.txt")).unwrap();
    assert_eq!(aligns.lines().count(), 100);
}

#[test]
fn noiseless_synth_repeats_prototypes() {
    let tmp = tempfile::tempdir().unwrap();
    let out = synth(tmp.path(), TOKENS, &["--noise", "0"]);
    let utts = load_features(&out.join("features.txt")).unwrap();
    let text = fs::read_to_string(out.join("alignments.txt")).unwrap();
    let aligns = parse_alignments(&text, Path::new("a")).unwrap();
    let corpus = segment(&utts, &aligns, Default::default()).unwrap();
    let cats: Vec<_> = corpus.segments().iter().filter(|s| s.word == "cat").collect();
    assert_eq!(cats.len(), 2);
    assert_eq!(cats[0].sequence.frame(0), cats[1].sequence.frame(0));
}

#[test]
fn train_s2v_outputs_and_determinism() {
    let tmp = tempfile::tempdir().unwrap();
    let corpus = synth(tmp.path(), TOKENS, &[]);
    let (a, b) = (tmp.path().join("run-a"), tmp.path().join("run-b"));
    for out in [&a, &b] {
        let o = train_s2v(&corpus, out, &["--seed", "2"]);
        assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    }
    for f in ["checkpoint.txt", "instances.txt", "embeddings.txt", "loss.tsv"] {
        assert_eq!(fs::read(a.join(f)).unwrap(), fs::read(b.join(f)).unwrap(), "{f}");
    }
    let loss = fs::read_to_string(a.join("loss.tsv")).unwrap();
    assert_eq!(loss.lines().count(), 4);
    assert!(loss.starts_with("epoch\tmean_loss\n1\t"));
    let set = load_embeddings(&a.join("embeddings.txt")).unwrap();
    assert_eq!((set.len(), set.dim()), (9, 4));
    let table = load_instances(&a.join("instances.txt")).unwrap();
    assert_eq!(table.num_instances(), 17);
}

#[test]
fn export_reproduces_training_embeddings() {
    let tmp = tempfile::tempdir().unwrap();
    let corpus = synth(tmp.path(), TOKENS, &[]);
    let run_dir = tmp.path().join("run");
    assert_eq!(code(&train_s2v(&corpus, &run_dir, &["--mode", "cbow"])), 0);
    let exp = tmp.path().join("export");
    let o = run(&[
        "export",
        "--checkpoint",
        s(&run_dir.join("checkpoint.txt")),
        "--features",
        s(&corpus.join("features.txt")),
        "--alignments",
        s(&corpus.join("alignments.txt")),
        "--out-dir",
        s(&exp),
    ]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    for f in ["instances.txt", "embeddings.txt"] {
        assert_eq!(fs::read(run_dir.join(f)).unwrap(), fs::read(exp.join(f)).unwrap(), "{f}");
    }
}

#[test]
fn config_file_with_flag_override() {
    let tmp = tempfile::tempdir().unwrap();
    let corpus = synth(tmp.path(), TOKENS, &[]);
    let cfg = tmp.path().join("run.toml");
    let out = tmp.path().join("from-config");
    fs::write(
        &cfg,
        format!(
            "seed = 2\n[paths]\nfeatures = {:?}\nalignments = {:?}\noutput = {:?}\n[speech2vec]\nembed_dim = 6\nepochs = 3\n",
            corpus.join("features.txt"),
            corpus.join("alignments.txt"),
            out
        ),
    )
    .unwrap();
    let o = run(&["train-s2v", "--config", s(&cfg), "--dim", "4"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(load_embeddings(&out.join("embeddings.txt")).unwrap().dim(), 4);
    let flags = tmp.path().join("from-flags");
    assert_eq!(code(&train_s2v(&corpus, &flags, &["--seed", "2"])), 0);
    assert_eq!(
        fs::read(out.join("checkpoint.txt")).unwrap(),
        fs::read(flags.join("checkpoint.txt")).unwrap()
    );
}

#[test]
fn error_exit_codes() {
    let tmp = tempfile::tempdir().unwrap();
    let corpus = synth(tmp.path(), TOKENS, &[]);
    let out = tmp.path().join("x");
    let o = train_s2v(&corpus, &out, &["--dim", "51"]);
    assert_eq!(code(&o), 1);
    assert!(String::from_utf8_lossy(&o.stderr).contains("even"));

    let missing = tmp.path().join("nope.txt");
    let o = run(&["train-w2v", "--alignments", s(&missing), "--output", s(&out)]);
    assert_eq!(code(&o), 2);
    assert!(String::from_utf8_lossy(&o.stderr).contains("nope.txt"));

    fs::write(tmp.path().join("bad.txt"), "u1 2 2\n1 1\n1\n").unwrap();
    let o = run(&[
        "train-s2v",
        "--features",
        s(&tmp.path().join("bad.txt")),
        "--alignments",
        s(&corpus.join("alignments.txt")),
        "--out-dir",
        s(&out),
    ]);
    assert_eq!(code(&o), 2);
    assert!(String::from_utf8_lossy(&o.stderr).contains("bad.txt:3"));

    assert_eq!(code(&run(&["train-s2v", "--bogus"])), 1);
    assert_eq!(code(&run(&["train-s2v", "--mode", "glove"])), 1);
    assert_eq!(code(&run(&["train-s2v", "--out-dir", s(&out)])), 1);
    assert_eq!(code(&run(&["--help"])), 0);
}

#[test]
fn help_lists_defaults() {
    let o = run(&["train-s2v", "--help"]);
    assert_eq!(code(&o), 0);
    let help = String::from_utf8_lossy(&o.stdout);
    for needle in ["--window", "[default: 3]", "[default: 1e-3]", "[default: 500]", "10, 50, 100 and 200"] {
        assert!(help.contains(needle), "{needle}");
    }
    for sub in ["synth", "train-w2v", "eval", "variance", "neighbors", "export"] {
        assert_eq!(code(&run(&[sub, "--help"])), 0, "{sub}");
    }
}

#[test]
fn train_w2v_modes_and_determinism() {
    let tmp = tempfile::tempdir().unwrap();
    let corpus = synth(tmp.path(), TOKENS, &[]);
    let aligns = corpus.join("alignments.txt");
    let mut outputs = Vec::new();
    for (mode, name) in [("skipgram", "a"), ("skipgram", "b"), ("cbow", "c")] {
        let out = tmp.path().join(format!("{name}.txt"));
        let o = run(&["train-w2v", "--alignments", s(&aligns), "--output", s(&out), "--mode", mode, "--dim", "8"]);
        assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
        outputs.push(fs::read(&out).unwrap());
    }
    assert_eq!(outputs[0], outputs[1]);
    assert_ne!(outputs[0], outputs[2]);
    let set = load_embeddings(&tmp.path().join("a.txt")).unwrap();
    assert_eq!((set.len(), set.dim()), (9, 8));

    let tok = tmp.path().join("tokens.txt");
    let out = tmp.path().join("t.txt");
    assert_eq!(code(&run(&["train-w2v", "--tokens", s(&tok), "--output", s(&out), "--dim", "8"])), 0);
    assert_eq!(fs::read(&out).unwrap(), outputs[0]);
}

fn write_set(path: &Path, rows: &[(&str, &[f64])]) {
    let dim = rows[0].1.len();
    let mut text = format!("{} {dim}\n", rows.len());
    for (w, v) in rows {
        let vals: Vec<String> = v.iter().map(f64::to_string).collect();
        text.push_str(&format!("{w} {}\n", vals.join(" ")));
    }
    fs::write(path, text).unwrap();
}

#[test]
fn eval_table() {
    let tmp = tempfile::tempdir().unwrap();
    let emb = tmp.path().join("vecs.txt");
    write_set(
        &emb,
        &[
            ("a", &[1.0, 0.0]),
            ("b", &[0.9, 0.1]),
            ("c", &[0.0, 1.0]),
            ("d", &[-1.0, 0.2]),
        ],
    );
    let bench = tmp.path().join("bench");
    fs::create_dir(&bench).unwrap();
    let mc = "a\tb\t4\na\tc\t2\nb\td\t0.5\na\td\t1\n";
    fs::write(bench.join("MC-30.txt"), mc).unwrap();
    fs::write(bench.join("WS-353.txt"), "a b 1\nc zzz 2\na c 3\nb c 0\n").unwrap();

    let o = run(&["eval", "-e", &format!("mine={}", s(&emb)), "-b", s(&bench), "--format", "tsv"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let out = String::from_utf8(o.stdout).unwrap();
    let lines: Vec<&str> = out.lines().collect();
    assert_eq!(lines[0], "benchmark\tpairs\tmine.rho\tmine.used\tmine.skipped");
    assert!(lines[1].starts_with("WS-353\t4\t"));
    assert!(lines[1].ends_with("\t3\t1"));
    assert!(lines[2].starts_with("MC-30\t4\t"));
    assert!(lines[2].ends_with("\t4\t0"));

    let set = load_embeddings(&emb).unwrap();
    let pairs = mc
        .lines()
        .map(|l| {
            let f: Vec<&str> = l.split('\t').collect();
            (f[0].to_string(), f[1].to_string(), f[2].parse().unwrap())
        })
        .collect();
    let oracle = evaluate(&set, &Benchmark::new("MC-30", pairs).unwrap()).unwrap();
    let rho: f64 = lines[2].split('\t').nth(2).unwrap().parse().unwrap();
    assert_eq!(rho, oracle.rho);

    let o = run(&["eval", "-e", s(&emb), "-e", &format!("again={}", s(&emb)), "-b", s(&bench)]);
    let human = String::from_utf8(o.stdout).unwrap();
    assert!(human.lines().next().unwrap().contains("vecs"));
    assert!(human.lines().next().unwrap().contains("again"));
    assert!(human.contains("(3/4)"));
}

#[test]
fn eval_with_no_benchmarks_warns() {
    let tmp = tempfile::tempdir().unwrap();
    let emb = tmp.path().join("v.txt");
    write_set(&emb, &[("a", &[1.0])]);
    let empty = tmp.path().join("empty");
    fs::create_dir(&empty).unwrap();
    let o = run(&["eval", "-e", s(&emb), "-b", s(&empty), "--format", "tsv"]);
    assert_eq!(code(&o), 0);
    assert_eq!(String::from_utf8(o.stdout).unwrap(), "benchmark\tpairs\tv.rho\tv.used\tv.skipped\n");
    assert!(String::from_utf8_lossy(&o.stderr).contains("no benchmark files"));
}

#[test]
fn variance_table() {
    let tmp = tempfile::tempdir().unwrap();
    let inst = tmp.path().join("inst.txt");
    let mut text = String::from("9 1\n");
    for v in [0.0, 2.0, 0.0, 2.0, 0.0] {
        text.push_str(&format!("x {v}\n"));
    }
    for _ in 0..4 {
        text.push_str("rare 7\n");
    }
    fs::write(&inst, &text).unwrap();
    let o = run(&["variance", "-i", s(&inst), "--format", "tsv"]);
    assert_eq!(code(&o), 0);
    let out = String::from_utf8(o.stdout).unwrap();
    let oracle = variance_study(&load_instances(&inst).unwrap());
    let first: Vec<&str> = out.lines().nth(1).unwrap().split('\t').collect();
    assert_eq!(first[..2], ["5-99", "1"]);
    let m: f64 = first[2].parse().unwrap();
    assert_eq!(m, oracle.buckets[0].mean_spread);
    assert!((m - 0.979_795_897_113_271_2).abs() < 1e-12);
    assert!(out.lines().skip(2).all(|l| l.ends_with("\t0\t0")));
}

#[test]
fn neighbors_listing() {
    let tmp = tempfile::tempdir().unwrap();
    let emb = tmp.path().join("v.txt");
    write_set(&emb, &[("a", &[1.0, 0.0]), ("b", &[1.0, 0.0]), ("c", &[0.0, 1.0])]);
    let o = run(&["neighbors", "-e", s(&emb), "-w", "a", "--top", "2"]);
    assert_eq!(code(&o), 0);
    assert_eq!(String::from_utf8(o.stdout).unwrap(), "b\t1\nc\t0\n");
    let o = run(&["neighbors", "-e", s(&emb), "-w", "zzz"]);
    assert_eq!(code(&o), 2);
}
