//! Central finite-difference verification of analytic gradients.

use alloc::vec::Vec;

use crate::params::ParamSet;

/// Magnitudes below this are compared absolutely rather than relatively. With
/// a step of 1e-5 and losses of order 10, rounding in the difference quotient
/// is about 1e-10, which this floor keeps well under a 1e-4 tolerance.
pub const RELATIVE_ERROR_FLOOR: f64 = 1e-5;

#[derive(Debug, Clone, PartialEq)]
pub struct TensorCheck {
    pub name: &'static str,
    pub entries: usize,
    pub max_relative_error: f64,
    /// Flat index of the worst entry.
    pub worst_index: usize,
    pub passed: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GradCheckReport {
    pub step: f64,
    pub tolerance: f64,
    pub tensors: Vec<TensorCheck>,
}

impl GradCheckReport {
    pub fn passed(&self) -> bool {
        self.tensors.iter().all(|t| t.passed)
    }

    pub fn max_relative_error(&self) -> f64 {
        self.tensors
            .iter()
            .map(|t| t.max_relative_error)
            .fold(0.0, f64::max)
    }
}

/// `|a − n| / max(|a|, |n|, RELATIVE_ERROR_FLOOR)`.
pub fn relative_error(analytic: f64, numeric: f64) -> f64 {
    let scale = analytic.abs().max(numeric.abs()).max(RELATIVE_ERROR_FLOOR);
    (analytic - numeric).abs() / scale
}

/// Compares `analytic` against `(L(p+ε) − L(p−ε)) / 2ε` for every entry of
/// every tensor of `params`, where `loss` evaluates the model at a perturbed
/// copy of the parameters.
pub fn grad_check<P, F>(params: &P, analytic: &P, loss: F, step: f64, tolerance: f64) -> GradCheckReport
where
    P: ParamSet + Clone,
    F: Fn(&P) -> f64,
{
    let mut probe = params.clone();
    let names: Vec<&'static str> = params.tensors().iter().map(|(n, _)| *n).collect();
    let analytic_tensors = analytic.tensors();
    let mut tensors = Vec::with_capacity(names.len());
    for (k, name) in names.into_iter().enumerate() {
        let entries = analytic_tensors[k].1.len();
        let mut worst = (0.0, 0);
        for i in 0..entries {
            let original = probe.tensors()[k].1.as_slice()[i];
            set_entry(&mut probe, k, i, original + step);
            let plus = loss(&probe);
            set_entry(&mut probe, k, i, original - step);
            let minus = loss(&probe);
            set_entry(&mut probe, k, i, original);
            let numeric = (plus - minus) / (2.0 * step);
            let err = relative_error(analytic_tensors[k].1.as_slice()[i], numeric);
            // NaN compares false, so track it explicitly
            if err > worst.0 || err.is_nan() {
                worst = (err, i);
            }
        }
        tensors.push(TensorCheck {
            name,
            entries,
            max_relative_error: worst.0,
            worst_index: worst.1,
            passed: worst.0 <= tolerance,
        });
    }
    GradCheckReport {
        step,
        tolerance,
        tensors,
    }
}

fn set_entry<P: ParamSet>(p: &mut P, tensor: usize, index: usize, value: f64) {
    p.tensors_mut()[tensor].1.as_mut_slice()[index] = value;
}
