//! Encoder-decoder parameters, the skipgram and cbow losses, and their
//! gradients by backpropagation through time.

use alloc::vec;
use alloc::vec::Vec;

use rand::Rng;

use crate::decoder::{DecoderParams, DecoderTrace};
use crate::encoder::{EncoderParams, EncoderTrace};
use crate::error::{Error, Result};
use crate::loss::mse_flat;
use crate::params::ParamSet;
use crate::sequence::Sequence;
use crate::tensor::{axpy, Matrix};

/// Training objective.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Mode {
    /// The centre segment's embedding reconstructs each neighbouring segment.
    Skipgram,
    /// The summed neighbour embeddings reconstruct the centre segment.
    Cbow,
}

impl Mode {
    pub fn as_str(self) -> &'static str {
        match self {
            Mode::Skipgram => "skipgram",
            Mode::Cbow => "cbow",
        }
    }
}

impl core::str::FromStr for Mode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "skipgram" => Ok(Mode::Skipgram),
            "cbow" => Ok(Mode::Cbow),
            other => Err(Error::Config(alloc::format!("unknown mode {other:?}"))),
        }
    }
}

impl core::fmt::Display for Mode {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// One training example. Skipgram examples are grouped per centre: the
/// centre is encoded once and every available neighbour is decoded from it.
#[derive(Debug, Clone)]
pub enum Example<'a> {
    Skipgram {
        center: &'a Sequence,
        contexts: Vec<&'a Sequence>,
    },
    Cbow {
        contexts: Vec<&'a Sequence>,
        target: &'a Sequence,
    },
}

impl Example<'_> {
    /// Number of frames the decoder predicts for this example.
    pub fn target_frames(&self) -> usize {
        match self {
            Example::Skipgram { contexts, .. } => contexts.iter().map(|s| s.valid_len()).sum(),
            Example::Cbow { target, .. } => target.valid_len(),
        }
    }
}

/// One shared encoder and one shared decoder.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelParams {
    pub encoder: EncoderParams,
    pub decoder: DecoderParams,
}

/// Gradient accumulators have exactly the shape of the parameters.
pub type Gradients = ModelParams;

impl ModelParams {
    pub fn zeros(feature_dim: usize, embed_dim: usize) -> Result<Self> {
        Ok(ModelParams {
            encoder: EncoderParams::zeros(feature_dim, embed_dim)?,
            decoder: DecoderParams::zeros(feature_dim, embed_dim),
        })
    }

    pub fn init<R: Rng + ?Sized>(feature_dim: usize, embed_dim: usize, rng: &mut R) -> Result<Self> {
        let encoder = EncoderParams::init(feature_dim, embed_dim, rng)?;
        let decoder = DecoderParams::init(feature_dim, embed_dim, rng);
        Ok(ModelParams { encoder, decoder })
    }

    pub fn feature_dim(&self) -> usize {
        self.encoder.feature_dim()
    }

    pub fn embed_dim(&self) -> usize {
        self.encoder.embed_dim()
    }

    pub fn validate(&self) -> Result<()> {
        self.encoder.validate()?;
        self.decoder.validate()?;
        if self.decoder.embed_dim() != self.encoder.embed_dim() {
            return Err(Error::dim(
                "decoder hidden_dim",
                self.encoder.embed_dim(),
                self.decoder.embed_dim(),
            ));
        }
        if self.decoder.feature_dim() != self.encoder.feature_dim() {
            return Err(Error::dim(
                "decoder feature_dim",
                self.encoder.feature_dim(),
                self.decoder.feature_dim(),
            ));
        }
        Ok(())
    }

    pub fn zeros_like(&self) -> Gradients {
        let mut g = self.clone();
        g.zero();
        g
    }

    fn check_example(&self, ex: &Example<'_>) -> Result<()> {
        let (inputs, targets): (&[&Sequence], Vec<&Sequence>) = match ex {
            Example::Skipgram { center, contexts } => (core::slice::from_ref(center), contexts.clone()),
            Example::Cbow { contexts, target } => (contexts, vec![*target]),
        };
        if inputs.is_empty() || targets.is_empty() {
            return Err(Error::InvalidInput("training example without contexts".into()));
        }
        for s in inputs {
            self.encoder.check_sequence(s)?;
        }
        for s in targets {
            if s.dim() != self.decoder.feature_dim() {
                return Err(Error::dim("decoder target frame", self.decoder.feature_dim(), s.dim()));
            }
        }
        Ok(())
    }

    /// Embedding the decoder consumes: the centre encoding (skipgram) or the
    /// sum of context encodings (cbow).
    pub fn embed(&self, ex: &Example<'_>) -> Result<Vec<f64>> {
        self.validate()?;
        self.check_example(ex)?;
        Ok(match ex {
            Example::Skipgram { center, .. } => self.encoder.run(center).0,
            Example::Cbow { contexts, .. } => {
                let mut z = vec![0.0; self.embed_dim()];
                for s in contexts {
                    axpy(1.0, &self.encoder.run(s).0, &mut z);
                }
                z
            }
        })
    }

    /// Loss of one example without recording anything.
    pub fn loss(&self, ex: &Example<'_>) -> Result<f64> {
        Ok(self.forward(ex)?.loss)
    }

    /// Runs the example forward and records every activation needed by
    /// [`ModelParams::backward`].
    pub fn forward(&self, ex: &Example<'_>) -> Result<ForwardRecord> {
        self.validate()?;
        self.check_example(ex)?;
        let mut loss = 0.0;
        let mut decodes = Vec::new();
        let encodings = match ex {
            Example::Skipgram { center, contexts } => {
                let (z, trace) = self.encoder.run(center);
                for target in contexts {
                    let (pred, dtrace) = self.decoder.run(&z, target);
                    let l = mse_flat(&pred, target);
                    loss += l.value;
                    decodes.push((dtrace, l.grad));
                }
                vec![trace]
            }
            Example::Cbow { contexts, target } => {
                let mut z = vec![0.0; self.embed_dim()];
                let mut traces = Vec::with_capacity(contexts.len());
                for s in contexts {
                    let (zi, trace) = self.encoder.run(s);
                    axpy(1.0, &zi, &mut z);
                    traces.push(trace);
                }
                let (pred, dtrace) = self.decoder.run(&z, target);
                let l = mse_flat(&pred, target);
                loss += l.value;
                decodes.push((dtrace, l.grad));
                traces
            }
        };
        Ok(ForwardRecord {
            loss,
            frames: ex.target_frames(),
            encodings,
            decodes,
        })
    }

    /// Accumulates the gradient of a recorded forward pass into `grads`.
    pub fn backward_into(&self, record: &ForwardRecord, grads: &mut Gradients) {
        let mut dz = vec![0.0; self.embed_dim()];
        for (trace, dpred) in &record.decodes {
            let d = self.decoder.backprop(trace, dpred, &mut grads.decoder);
            axpy(1.0, &d, &mut dz);
        }
        // every encoding contributes to z with unit weight in both modes
        for trace in &record.encodings {
            self.encoder.backprop(trace, &dz, &mut grads.encoder);
        }
    }

    pub fn backward(&self, record: &ForwardRecord) -> Gradients {
        let mut grads = self.zeros_like();
        self.backward_into(record, &mut grads);
        grads
    }

    /// Loss and gradient of one example.
    pub fn loss_and_grad(&self, ex: &Example<'_>) -> Result<(f64, Gradients)> {
        let record = self.forward(ex)?;
        Ok((record.loss, self.backward(&record)))
    }
}

/// Activations of one forward pass.
#[derive(Debug, Clone)]
pub struct ForwardRecord {
    pub loss: f64,
    /// Decoded frames the loss was summed over.
    pub frames: usize,
    encodings: Vec<EncoderTrace>,
    decodes: Vec<(DecoderTrace, Vec<f64>)>,
}

/// Holds at most one recorded forward pass; `backward` consumes it.
#[derive(Debug, Default)]
pub struct Tape {
    record: Option<ForwardRecord>,
}

impl Tape {
    pub fn new() -> Self {
        Tape::default()
    }

    pub fn forward(&mut self, params: &ModelParams, ex: &Example<'_>) -> Result<f64> {
        let record = params.forward(ex)?;
        let loss = record.loss;
        self.record = Some(record);
        Ok(loss)
    }

    /// Gradient of the last recorded forward pass. `params` must be the
    /// parameters that pass ran with.
    pub fn backward(&mut self, params: &ModelParams) -> Result<Gradients> {
        let record = self.record.take().ok_or(Error::NoForwardPass)?;
        Ok(params.backward(&record))
    }
}

impl ParamSet for ModelParams {
    fn tensors(&self) -> Vec<(&'static str, &Matrix)> {
        let (e, d) = (&self.encoder, &self.decoder);
        vec![
            ("encoder.forward.w_input", &e.forward.w_input),
            ("encoder.forward.w_hidden", &e.forward.w_hidden),
            ("encoder.forward.bias", &e.forward.bias),
            ("encoder.backward.w_input", &e.backward.w_input),
            ("encoder.backward.w_hidden", &e.backward.w_hidden),
            ("encoder.backward.bias", &e.backward.bias),
            ("decoder.cell.w_input", &d.cell.w_input),
            ("decoder.cell.w_hidden", &d.cell.w_hidden),
            ("decoder.cell.bias", &d.cell.bias),
            ("decoder.w_out", &d.w_out),
            ("decoder.b_out", &d.b_out),
        ]
    }

    fn tensors_mut(&mut self) -> Vec<(&'static str, &mut Matrix)> {
        let (e, d) = (&mut self.encoder, &mut self.decoder);
        vec![
            ("encoder.forward.w_input", &mut e.forward.w_input),
            ("encoder.forward.w_hidden", &mut e.forward.w_hidden),
            ("encoder.forward.bias", &mut e.forward.bias),
            ("encoder.backward.w_input", &mut e.backward.w_input),
            ("encoder.backward.w_hidden", &mut e.backward.w_hidden),
            ("encoder.backward.bias", &mut e.backward.bias),
            ("decoder.cell.w_input", &mut d.cell.w_input),
            ("decoder.cell.w_hidden", &mut d.cell.w_hidden),
            ("decoder.cell.bias", &mut d.cell.bias),
            ("decoder.w_out", &mut d.w_out),
            ("decoder.b_out", &mut d.b_out),
        ]
    }
}
