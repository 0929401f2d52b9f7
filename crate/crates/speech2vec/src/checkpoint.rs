//! Versioned text checkpoint: the training config followed by every parameter
//! tensor under a `tensor <name> <rows> <cols>` header.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use speech2vec_core::model::{Mode, ModelParams};
use speech2vec_core::params::ParamSet;
use speech2vec_core::speech2vec::{Speech2VecModel, TrainConfig};

use crate::error::Result;
use crate::formats::{read_text, Lines};

pub const MAGIC: &str = "speech2vec-checkpoint";
pub const VERSION: u32 = 1;

pub fn write_checkpoint(model: &Speech2VecModel) -> String {
    let c = &model.config;
    let mut out = format!("{MAGIC} {VERSION}\n");
    let clip = c.clip.map_or_else(|| "none".to_string(), |x| x.to_string());
    for (k, v) in [
        ("mode", c.mode.to_string()),
        ("embed_dim", c.embed_dim.to_string()),
        ("window", c.window.to_string()),
        ("learning_rate", c.learning_rate.to_string()),
        ("epochs", c.epochs.to_string()),
        ("batch_size", c.batch_size.to_string()),
        ("seed", c.seed.to_string()),
        ("max_len", c.max_len.to_string()),
        ("clip", clip),
        ("feature_dim", model.params.feature_dim().to_string()),
    ] {
        writeln!(out, "{k} {v}").unwrap();
    }
    for (name, t) in model.params.tensors() {
        writeln!(out, "tensor {name} {} {}", t.rows(), t.cols()).unwrap();
        for r in 0..t.rows() {
            let row: Vec<String> = t.row(r).iter().map(f64::to_string).collect();
            writeln!(out, "{}", row.join(" ")).unwrap();
        }
    }
    out
}

pub fn parse_checkpoint(text: &str, path: &Path) -> Result<Speech2VecModel> {
    let mut lines = Lines::new(text, path, false).peekable();
    let helper = Lines::new("", path, false);
    let err = |line, msg: String| helper.error(line, msg);

    match lines.next() {
        Some((_, f)) if f.len() == 2 && f[0] == MAGIC => {
            if f[1] != VERSION.to_string() {
                return Err(err(1, format!("unsupported checkpoint version {}", f[1])));
            }
        }
        _ => return Err(err(1, format!("not a checkpoint (expected `{MAGIC} {VERSION}`)"))),
    }

    let mut fields: BTreeMap<String, (usize, String)> = BTreeMap::new();
    while let Some((ln, f)) = lines.next_if(|(_, f)| f.first() != Some(&"tensor")) {
        let [k, v] = f[..] else {
            return Err(err(ln, "expected `<key> <value>`".into()));
        };
        if fields.insert(k.to_string(), (ln, v.to_string())).is_some() {
            return Err(err(ln, format!("duplicate key {k}")));
        }
    }
    let mut take = |key: &str| -> Result<(usize, String)> {
        fields.remove(key).ok_or_else(|| err(1, format!("missing key {key}")))
    };
    let (ln, v) = take("mode")?;
    let mode: Mode = v.parse().map_err(|_| err(ln, format!("invalid mode {v:?}")))?;
    let (ln, v) = take("embed_dim")?;
    let embed_dim = helper.parse(ln, &v, "embed_dim")?;
    let (ln, v) = take("window")?;
    let window = helper.parse(ln, &v, "window")?;
    let (ln, v) = take("learning_rate")?;
    let learning_rate = helper.parse(ln, &v, "learning_rate")?;
    let (ln, v) = take("epochs")?;
    let epochs = helper.parse(ln, &v, "epochs")?;
    let (ln, v) = take("batch_size")?;
    let batch_size = helper.parse(ln, &v, "batch_size")?;
    let (ln, v) = take("seed")?;
    let seed = helper.parse(ln, &v, "seed")?;
    let (ln, v) = take("max_len")?;
    let max_len = helper.parse(ln, &v, "max_len")?;
    let (ln, v) = take("clip")?;
    let clip = match v.as_str() {
        "none" => None,
        v => Some(helper.parse::<f64>(ln, v, "clip")?),
    };
    let (ln, v) = take("feature_dim")?;
    let feature_dim: usize = helper.parse(ln, &v, "feature_dim")?;
    if let Some((k, (ln, _))) = fields.into_iter().next() {
        return Err(err(ln, format!("unknown key {k}")));
    }
    let config = TrainConfig {
        mode,
        embed_dim,
        window,
        learning_rate,
        epochs,
        batch_size,
        seed,
        max_len,
        clip,
    };
    config.validate().map_err(|e| err(1, e.to_string()))?;

    let mut params = ModelParams::zeros(feature_dim, embed_dim).map_err(|e| err(1, e.to_string()))?;
    for (name, tensor) in params.tensors_mut() {
        let Some((ln, header)) = lines.next() else {
            return Err(err(text.lines().count(), format!("missing tensor {name}")));
        };
        let expected = [
            "tensor".to_string(),
            name.to_string(),
            tensor.rows().to_string(),
            tensor.cols().to_string(),
        ];
        if header != expected {
            return Err(err(ln, format!("expected `{}`", expected.join(" "))));
        }
        let cols = tensor.cols();
        for r in 0..tensor.rows() {
            let Some((rl, row)) = lines.next() else {
                return Err(err(ln, format!("tensor {name} is truncated")));
            };
            if row.len() != cols {
                return Err(err(rl, format!("expected {cols} values, found {}", row.len())));
            }
            let values = helper.floats(rl, &row)?;
            tensor.as_mut_slice()[r * cols..(r + 1) * cols].copy_from_slice(&values);
        }
    }
    if let Some((ln, _)) = lines.next() {
        return Err(err(ln, "trailing content after the last tensor".into()));
    }
    Ok(Speech2VecModel { params, config })
}

pub fn load_checkpoint(path: &Path) -> Result<Speech2VecModel> {
    parse_checkpoint(&read_text(path)?, path)
}
