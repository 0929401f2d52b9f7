//! Bidirectional LSTM encoder. Each direction has `embed_dim / 2` hidden
//! units and the embedding is `[h_forward_final ‖ h_backward_final]`.

use alloc::vec::Vec;

use rand::Rng;

use crate::error::{Error, Result};
use crate::lstm::{LstmParams, RnnState, StepCache};
use crate::sequence::Sequence;

#[derive(Debug, Clone, PartialEq)]
pub struct EncoderParams {
    pub forward: LstmParams,
    pub backward: LstmParams,
}

/// Forward-pass record of one encoding, consumed by [`EncoderParams::backprop`].
#[derive(Debug, Clone)]
pub(crate) struct EncoderTrace {
    forward: Vec<StepCache>,
    backward: Vec<StepCache>,
}

impl EncoderParams {
    pub fn zeros(feature_dim: usize, embed_dim: usize) -> Result<Self> {
        check_even(embed_dim)?;
        Ok(EncoderParams {
            forward: LstmParams::zeros(feature_dim, embed_dim / 2),
            backward: LstmParams::zeros(feature_dim, embed_dim / 2),
        })
    }

    pub fn init<R: Rng + ?Sized>(feature_dim: usize, embed_dim: usize, rng: &mut R) -> Result<Self> {
        check_even(embed_dim)?;
        Ok(EncoderParams {
            forward: LstmParams::init(feature_dim, embed_dim / 2, rng),
            backward: LstmParams::init(feature_dim, embed_dim / 2, rng),
        })
    }

    pub fn feature_dim(&self) -> usize {
        self.forward.input_dim
    }

    pub fn embed_dim(&self) -> usize {
        2 * self.forward.hidden_dim
    }

    pub fn validate(&self) -> Result<()> {
        self.forward.validate("encoder.forward")?;
        self.backward.validate("encoder.backward")?;
        if self.backward.input_dim != self.forward.input_dim {
            return Err(Error::dim(
                "encoder.backward input_dim",
                self.forward.input_dim,
                self.backward.input_dim,
            ));
        }
        if self.backward.hidden_dim != self.forward.hidden_dim {
            return Err(Error::dim(
                "encoder.backward hidden_dim",
                self.forward.hidden_dim,
                self.backward.hidden_dim,
            ));
        }
        Ok(())
    }

    pub(crate) fn check_sequence(&self, seq: &Sequence) -> Result<()> {
        if seq.dim() != self.feature_dim() {
            return Err(Error::dim("encoder input frame", self.feature_dim(), seq.dim()));
        }
        Ok(())
    }

    pub(crate) fn run(&self, seq: &Sequence) -> (Vec<f64>, EncoderTrace) {
        let hd = self.forward.hidden_dim;
        let mut trace = EncoderTrace {
            forward: Vec::with_capacity(seq.valid_len()),
            backward: Vec::with_capacity(seq.valid_len()),
        };
        let mut state = RnnState::zeros(hd);
        for frame in seq.frames() {
            let (next, cache) = self.forward.step_cached(&[frame], &state);
            trace.forward.push(cache);
            state = next;
        }
        let mut z = state.h;
        let mut state = RnnState::zeros(hd);
        for frame in seq.frames().rev() {
            let (next, cache) = self.backward.step_cached(&[frame], &state);
            trace.backward.push(cache);
            state = next;
        }
        z.extend_from_slice(&state.h);
        (z, trace)
    }

    /// Backpropagates `dz` (gradient w.r.t. the embedding) through both
    /// directions, accumulating into `grads`.
    pub(crate) fn backprop(&self, trace: &EncoderTrace, dz: &[f64], grads: &mut EncoderParams) {
        let hd = self.forward.hidden_dim;
        backprop_direction(&self.forward, &trace.forward, &dz[..hd], &mut grads.forward);
        backprop_direction(&self.backward, &trace.backward, &dz[hd..], &mut grads.backward);
    }
}

fn backprop_direction(lstm: &LstmParams, steps: &[StepCache], dh_final: &[f64], grads: &mut LstmParams) {
    let mut dh = dh_final.to_vec();
    let mut dc = alloc::vec![0.0; lstm.hidden_dim];
    for cache in steps.iter().rev() {
        let (_, dh_prev, dc_prev) = lstm.step_backward(cache, &dh, &dc, grads);
        dh = dh_prev;
        dc = dc_prev;
    }
}

fn check_even(embed_dim: usize) -> Result<()> {
    if embed_dim == 0 || !embed_dim.is_multiple_of(2) {
        return Err(Error::Config(alloc::format!(
            "embedding dimension must be a positive even number, got {embed_dim}"
        )));
    }
    Ok(())
}

/// Encodes the non-padding frames of `seq` into a vector of length `embed_dim`.
pub fn encode(enc: &EncoderParams, seq: &Sequence) -> Result<Vec<f64>> {
    enc.validate()?;
    enc.check_sequence(seq)?;
    Ok(enc.run(seq).0)
}
