//! Single LSTM cell: forward step, cached step for backpropagation through
//! time, and the matching backward step.
//!
//! Gates are stacked in the order input, forget, cell candidate, output, so
//! rows `0..H` of every weight matrix belong to the input gate, `H..2H` to the
//! forget gate, and so on.

use alloc::vec;
use alloc::vec::Vec;

use rand::Rng;

use crate::error::{Error, Result};
use crate::tensor::{sigmoid, tanh, Matrix};

#[derive(Debug, Clone, PartialEq)]
pub struct LstmParams {
    pub input_dim: usize,
    pub hidden_dim: usize,
    /// `4H × input_dim`
    pub w_input: Matrix,
    /// `4H × H`
    pub w_hidden: Matrix,
    /// `4H`
    pub bias: Matrix,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RnnState {
    pub h: Vec<f64>,
    pub c: Vec<f64>,
}

impl RnnState {
    pub fn zeros(hidden_dim: usize) -> Self {
        RnnState {
            h: vec![0.0; hidden_dim],
            c: vec![0.0; hidden_dim],
        }
    }
}

/// Activations of one step, kept for the backward pass.
#[derive(Debug, Clone)]
pub(crate) struct StepCache {
    x: Vec<f64>,
    h_prev: Vec<f64>,
    c_prev: Vec<f64>,
    /// Post-activation gates `[i, f, g, o]`, length `4H`.
    gates: Vec<f64>,
    tanh_c: Vec<f64>,
}

impl LstmParams {
    pub fn zeros(input_dim: usize, hidden_dim: usize) -> Self {
        LstmParams {
            input_dim,
            hidden_dim,
            w_input: Matrix::zeros(4 * hidden_dim, input_dim),
            w_hidden: Matrix::zeros(4 * hidden_dim, hidden_dim),
            bias: Matrix::zeros(4 * hidden_dim, 1),
        }
    }

    /// Weights uniform in `±1/√H`, biases zero except the forget gate at 1.
    pub fn init<R: Rng + ?Sized>(input_dim: usize, hidden_dim: usize, rng: &mut R) -> Self {
        let mut p = Self::zeros(input_dim, hidden_dim);
        let bound = 1.0 / libm::sqrt(hidden_dim as f64);
        for w in p
            .w_input
            .as_mut_slice()
            .iter_mut()
            .chain(p.w_hidden.as_mut_slice())
        {
            *w = rng.random_range(-bound..=bound);
        }
        for b in &mut p.bias.as_mut_slice()[hidden_dim..2 * hidden_dim] {
            *b = 1.0;
        }
        p
    }

    pub fn validate(&self, name: &str) -> Result<()> {
        let g = 4 * self.hidden_dim;
        let check = |what: &str, m: &Matrix, rows: usize, cols: usize| -> Result<()> {
            if m.rows() != rows {
                return Err(Error::dim(&alloc::format!("{name}.{what} rows"), rows, m.rows()));
            }
            if m.cols() != cols {
                return Err(Error::dim(&alloc::format!("{name}.{what} cols"), cols, m.cols()));
            }
            Ok(())
        };
        check("w_input", &self.w_input, g, self.input_dim)?;
        check("w_hidden", &self.w_hidden, g, self.hidden_dim)?;
        check("bias", &self.bias, g, 1)
    }

    fn check_inputs(&self, x_len: usize, state: &RnnState) -> Result<()> {
        if x_len != self.input_dim {
            return Err(Error::dim("lstm input", self.input_dim, x_len));
        }
        if state.h.len() != self.hidden_dim {
            return Err(Error::dim("lstm state h", self.hidden_dim, state.h.len()));
        }
        if state.c.len() != self.hidden_dim {
            return Err(Error::dim("lstm state c", self.hidden_dim, state.c.len()));
        }
        Ok(())
    }

    fn gates(&self, x: &[&[f64]], h_prev: &[f64]) -> Vec<f64> {
        let hd = self.hidden_dim;
        let mut a = self.bias.as_slice().to_vec();
        self.w_input.matvec_acc(x, &mut a);
        self.w_hidden.matvec_acc(&[h_prev], &mut a);
        for (k, v) in a.iter_mut().enumerate() {
            *v = if (2 * hd..3 * hd).contains(&k) {
                tanh(*v)
            } else {
                sigmoid(*v)
            };
        }
        a
    }

    fn advance(&self, gates: &[f64], c_prev: &[f64]) -> (Vec<f64>, Vec<f64>, Vec<f64>) {
        let hd = self.hidden_dim;
        let mut c = vec![0.0; hd];
        let mut tanh_c = vec![0.0; hd];
        let mut h = vec![0.0; hd];
        for j in 0..hd {
            let (i, f, g, o) = (gates[j], gates[hd + j], gates[2 * hd + j], gates[3 * hd + j]);
            c[j] = f * c_prev[j] + i * g;
            tanh_c[j] = tanh(c[j]);
            h[j] = o * tanh_c[j];
        }
        (h, c, tanh_c)
    }

    /// Input given as consecutive parts, e.g. `[prev_frame, z]` in the decoder.
    pub(crate) fn step_cached(&self, x: &[&[f64]], state: &RnnState) -> (RnnState, StepCache) {
        let gates = self.gates(x, &state.h);
        let (h, c, tanh_c) = self.advance(&gates, &state.c);
        let cache = StepCache {
            x: x.concat(),
            h_prev: state.h.clone(),
            c_prev: state.c.clone(),
            gates,
            tanh_c,
        };
        (RnnState { h, c }, cache)
    }

    /// Backpropagates one step. `dh` and `dc` are the loss gradients w.r.t.
    /// this step's outputs; returns gradients w.r.t. the input and the
    /// previous state, accumulating parameter gradients into `grads`.
    pub(crate) fn step_backward(
        &self,
        cache: &StepCache,
        dh: &[f64],
        dc: &[f64],
        grads: &mut LstmParams,
    ) -> (Vec<f64>, Vec<f64>, Vec<f64>) {
        let hd = self.hidden_dim;
        let g = &cache.gates;
        let mut da = vec![0.0; 4 * hd];
        let mut dc_prev = vec![0.0; hd];
        for j in 0..hd {
            let (i, f, cand, o) = (g[j], g[hd + j], g[2 * hd + j], g[3 * hd + j]);
            let tc = cache.tanh_c[j];
            let dc_total = dc[j] + dh[j] * o * (1.0 - tc * tc);
            da[j] = dc_total * cand * i * (1.0 - i);
            da[hd + j] = dc_total * cache.c_prev[j] * f * (1.0 - f);
            da[2 * hd + j] = dc_total * i * (1.0 - cand * cand);
            da[3 * hd + j] = dh[j] * tc * o * (1.0 - o);
            dc_prev[j] = dc_total * f;
        }
        grads.w_input.outer_acc(&da, &[&cache.x]);
        grads.w_hidden.outer_acc(&da, &[&cache.h_prev]);
        crate::tensor::axpy(1.0, &da, grads.bias.as_mut_slice());

        let mut dx = vec![0.0; self.input_dim];
        self.w_input.matvec_t_acc(&da, &mut dx);
        let mut dh_prev = vec![0.0; hd];
        self.w_hidden.matvec_t_acc(&da, &mut dh_prev);
        (dx, dh_prev, dc_prev)
    }
}

/// One LSTM step: gates `i, f, o = σ(·)`, candidate `g = tanh(·)`,
/// `c' = f⊙c + i⊙g`, `h' = o⊙tanh(c')`.
pub fn lstm_step(params: &LstmParams, x: &[f64], state: &RnnState) -> Result<RnnState> {
    params.validate("lstm")?;
    params.check_inputs(x.len(), state)?;
    let gates = params.gates(&[x], &state.h);
    let (h, c, _) = params.advance(&gates, &state.c);
    Ok(RnnState { h, c })
}
