//! Unidirectional LSTM decoder conditioned on the embedding at every step.
//!
//! The decoder hidden size equals the embedding size, so the initial hidden
//! state is the embedding itself and the initial cell state is zero. The
//! step-`t` input is `[prev_frame ‖ z]`; `prev_frame` is the zero vector at
//! the first step.

use alloc::vec;
use alloc::vec::Vec;

use rand::Rng;

use crate::error::{Error, Result};
use crate::lstm::{LstmParams, RnnState, StepCache};
use crate::sequence::Sequence;
use crate::tensor::Matrix;

#[derive(Debug, Clone, PartialEq)]
pub struct DecoderParams {
    /// Input size `feature_dim + embed_dim`, hidden size `embed_dim`.
    pub cell: LstmParams,
    /// `feature_dim × embed_dim`
    pub w_out: Matrix,
    /// `feature_dim`
    pub b_out: Matrix,
}

#[derive(Debug, Clone)]
pub(crate) struct DecoderTrace {
    steps: Vec<StepCache>,
    hidden: Vec<Vec<f64>>,
}

impl DecoderParams {
    pub fn zeros(feature_dim: usize, embed_dim: usize) -> Self {
        DecoderParams {
            cell: LstmParams::zeros(feature_dim + embed_dim, embed_dim),
            w_out: Matrix::zeros(feature_dim, embed_dim),
            b_out: Matrix::zeros(feature_dim, 1),
        }
    }

    /// LSTM initialised like the encoder; the output projection uses the same
    /// `±1/√H` bound with a zero bias.
    pub fn init<R: Rng + ?Sized>(feature_dim: usize, embed_dim: usize, rng: &mut R) -> Self {
        let mut p = Self::zeros(feature_dim, embed_dim);
        p.cell = LstmParams::init(feature_dim + embed_dim, embed_dim, rng);
        let bound = 1.0 / libm::sqrt(embed_dim as f64);
        for w in p.w_out.as_mut_slice() {
            *w = rng.random_range(-bound..=bound);
        }
        p
    }

    pub fn feature_dim(&self) -> usize {
        self.w_out.rows()
    }

    pub fn embed_dim(&self) -> usize {
        self.cell.hidden_dim
    }

    pub fn validate(&self) -> Result<()> {
        self.cell.validate("decoder.cell")?;
        let (fd, ed) = (self.feature_dim(), self.embed_dim());
        if self.cell.input_dim != fd + ed {
            return Err(Error::dim("decoder.cell input_dim", fd + ed, self.cell.input_dim));
        }
        if self.w_out.cols() != ed {
            return Err(Error::dim("decoder.w_out cols", ed, self.w_out.cols()));
        }
        if self.b_out.shape() != (fd, 1) {
            return Err(Error::dim("decoder.b_out rows", fd, self.b_out.rows()));
        }
        Ok(())
    }

    pub(crate) fn check_inputs(&self, z: &[f64], target: &Sequence) -> Result<()> {
        if z.len() != self.embed_dim() {
            return Err(Error::dim("decoder embedding", self.embed_dim(), z.len()));
        }
        if target.dim() != self.feature_dim() {
            return Err(Error::dim("decoder target frame", self.feature_dim(), target.dim()));
        }
        Ok(())
    }

    fn project(&self, h: &[f64]) -> Vec<f64> {
        let mut y = self.b_out.as_slice().to_vec();
        self.w_out.matvec_acc(&[h], &mut y);
        y
    }

    /// Teacher-forced decoding of `target.valid_len()` frames. Returns the
    /// row-major predictions.
    pub(crate) fn run(&self, z: &[f64], target: &Sequence) -> (Vec<f64>, DecoderTrace) {
        let fd = self.feature_dim();
        let len = target.valid_len();
        let mut state = RnnState {
            h: z.to_vec(),
            c: vec![0.0; z.len()],
        };
        let mut trace = DecoderTrace {
            steps: Vec::with_capacity(len),
            hidden: Vec::with_capacity(len),
        };
        let mut pred = Vec::with_capacity(len * fd);
        let zero = vec![0.0; fd];
        for t in 0..len {
            let prev = if t == 0 { &zero[..] } else { target.frame(t - 1) };
            let (next, cache) = self.cell.step_cached(&[prev, z], &state);
            pred.extend(self.project(&next.h));
            trace.steps.push(cache);
            trace.hidden.push(next.h.clone());
            state = next;
        }
        (pred, trace)
    }

    fn run_free(&self, z: &[f64], len: usize) -> Vec<f64> {
        let fd = self.feature_dim();
        let mut state = RnnState {
            h: z.to_vec(),
            c: vec![0.0; z.len()],
        };
        let mut pred = Vec::with_capacity(len * fd);
        let mut prev = vec![0.0; fd];
        for _ in 0..len {
            let (next, _) = self.cell.step_cached(&[&prev, z], &state);
            prev = self.project(&next.h);
            pred.extend_from_slice(&prev);
            state = next;
        }
        pred
    }

    /// Backpropagates the prediction gradient `dpred` (row-major, one row per
    /// decoded frame) and returns the gradient w.r.t. `z`.
    pub(crate) fn backprop(&self, trace: &DecoderTrace, dpred: &[f64], grads: &mut DecoderParams) -> Vec<f64> {
        let fd = self.feature_dim();
        let ed = self.embed_dim();
        let mut dz = vec![0.0; ed];
        let mut dh_next = vec![0.0; ed];
        let mut dc = vec![0.0; ed];
        for (t, cache) in trace.steps.iter().enumerate().rev() {
            let dy = &dpred[t * fd..(t + 1) * fd];
            grads.w_out.outer_acc(dy, &[&trace.hidden[t]]);
            crate::tensor::axpy(1.0, dy, grads.b_out.as_mut_slice());
            let mut dh = dh_next;
            self.w_out.matvec_t_acc(dy, &mut dh);
            let (dx, dh_prev, dc_prev) = self.cell.step_backward(cache, &dh, &dc, &mut grads.cell);
            crate::tensor::axpy(1.0, &dx[fd..], &mut dz);
            dh_next = dh_prev;
            dc = dc_prev;
        }
        // h_0 = z
        crate::tensor::axpy(1.0, &dh_next, &mut dz);
        dz
    }
}

/// Decodes `target.valid_len()` frames from embedding `z`.
///
/// With `teacher_forcing` the previous input frame is the previous target
/// frame; otherwise it is the decoder's own previous prediction.
pub fn decode(dec: &DecoderParams, z: &[f64], target: &Sequence, teacher_forcing: bool) -> Result<Sequence> {
    dec.validate()?;
    dec.check_inputs(z, target)?;
    let pred = if teacher_forcing {
        dec.run(z, target).0
    } else {
        dec.run_free(z, target.valid_len())
    };
    Ok(Sequence::from_valid_frames(dec.feature_dim(), pred))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sigmoid(x: f64) -> f64 {
        1.0 / (1.0 + (-x).exp())
    }

    fn tanh(x: f64) -> f64 {
        x.tanh()
    }

    #[test]
    fn zero_params_emit_output_bias() {
        let mut dec = DecoderParams::zeros(2, 4);
        let target = Sequence::new(2, vec![1.0; 6]).unwrap();
        let z = [0.5, -0.5, 1.0, 2.0];
        let out = decode(&dec, &z, &target, true).unwrap();
        assert_eq!(out.valid_len(), 3);
        assert!(out.as_slice().iter().all(|&x| x == 0.0));

        dec.b_out = Matrix::column(vec![0.25, -3.0]);
        for tf in [true, false] {
            let out = decode(&dec, &z, &target, tf).unwrap();
            for frame in out.frames() {
                assert_eq!(frame, &[0.25, -3.0]);
            }
        }
    }

    /// Feature dim 1, embed dim 2 split into scalar arithmetic.
    #[test]
    fn tiny_decoder_matches_scalar_oracle() {
        // cell: input [prev, z0, z1], hidden 2
        let w_in: Vec<f64> = (0..24).map(|k| ((k * 7 % 11) as f64 - 5.0) * 0.07).collect();
        let w_hh: Vec<f64> = (0..16).map(|k| ((k * 5 % 9) as f64 - 4.0) * 0.05).collect();
        let bias: Vec<f64> = (0..8).map(|k| (k as f64 - 3.5) * 0.03).collect();
        let dec = DecoderParams {
            cell: LstmParams {
                input_dim: 3,
                hidden_dim: 2,
                w_input: Matrix::from_vec(8, 3, w_in.clone()),
                w_hidden: Matrix::from_vec(8, 2, w_hh.clone()),
                bias: Matrix::from_vec(8, 1, bias.clone()),
            },
            w_out: Matrix::from_vec(1, 2, vec![0.9, -0.6]),
            b_out: Matrix::column(vec![0.1]),
        };
        let z = [0.4, -0.3];
        let target = [0.5, -0.25, 1.0];

        for teacher in [true, false] {
            let mut h = [z[0], z[1]];
            let mut c = [0.0, 0.0];
            let mut prev = 0.0;
            let mut expected = Vec::new();
            for &target_t in &target[..3] {
                let x = [prev, z[0], z[1]];
                let pre = |row: usize| {
                    bias[row]
                        + (0..3).map(|j| w_in[row * 3 + j] * x[j]).sum::<f64>()
                        + (0..2).map(|j| w_hh[row * 2 + j] * h[j]).sum::<f64>()
                };
                let mut nh = [0.0; 2];
                for j in 0..2 {
                    let i = sigmoid(pre(j));
                    let f = sigmoid(pre(2 + j));
                    let g = tanh(pre(4 + j));
                    let o = sigmoid(pre(6 + j));
                    c[j] = f * c[j] + i * g;
                    nh[j] = o * tanh(c[j]);
                }
                h = nh;
                let y = 0.1 + 0.9 * h[0] - 0.6 * h[1];
                expected.push(y);
                prev = if teacher { target_t } else { y };
            }
            let seq = Sequence::new(1, target.to_vec()).unwrap();
            let out = decode(&dec, &z, &seq, teacher).unwrap();
            for (a, b) in out.as_slice().iter().zip(&expected) {
                assert!((a - b).abs() < 1e-12, "{a} vs {b}");
            }
        }
    }

    #[test]
    fn single_frame_target_uses_zero_previous_frame() {
        let mut dec = DecoderParams::zeros(1, 2);
        dec.cell.w_input.set(0, 0, 5.0);
        dec.cell.w_input.set(4, 1, 0.7);
        dec.w_out = Matrix::from_vec(1, 2, vec![1.0, 1.0]);
        let z = [0.3, -0.2];
        let a = decode(&dec, &z, &Sequence::new(1, vec![3.0]).unwrap(), true).unwrap();
        let b = decode(&dec, &z, &Sequence::new(1, vec![-7.0]).unwrap(), true).unwrap();
        assert_eq!(a.valid_len(), 1);
        assert_eq!(a, b);
        assert!(a.as_slice()[0] != 0.0);
    }

    #[test]
    fn mismatched_embedding_rejected() {
        let dec = DecoderParams::zeros(2, 4);
        let target = Sequence::new(2, vec![1.0; 2]).unwrap();
        assert!(matches!(
            decode(&dec, &[0.0; 3], &target, true),
            Err(Error::Dimension { expected: 4, actual: 3, .. })
        ));
        let wrong_dim = Sequence::new(3, vec![1.0; 3]).unwrap();
        assert!(decode(&dec, &[0.0; 4], &wrong_dim, true).is_err());
    }
}
