//! Named parameter collections, plain SGD and gradient clipping.

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::tensor::Matrix;

/// A fixed, ordered collection of named tensors.
///
/// Gradient accumulators are values of the same type, so a parameter set and
/// its gradients always have congruent shapes.
pub trait ParamSet {
    fn tensors(&self) -> Vec<(&'static str, &Matrix)>;
    fn tensors_mut(&mut self) -> Vec<(&'static str, &mut Matrix)>;

    fn zero(&mut self) {
        for (_, t) in self.tensors_mut() {
            t.fill(0.0);
        }
    }

    fn num_params(&self) -> usize {
        self.tensors().iter().map(|(_, t)| t.len()).sum()
    }

    /// `self += alpha · other`; both sets must be congruent.
    fn add_scaled(&mut self, alpha: f64, other: &Self) -> Result<()>
    where
        Self: Sized,
    {
        check_congruent(self, other)?;
        for ((_, t), (_, o)) in self.tensors_mut().into_iter().zip(other.tensors()) {
            t.add_scaled(alpha, o);
        }
        Ok(())
    }

    fn global_norm(&self) -> f64 {
        let sq: f64 = self
            .tensors()
            .iter()
            .flat_map(|(_, t)| t.as_slice())
            .map(|x| x * x)
            .sum();
        libm::sqrt(sq)
    }
}

pub fn check_congruent<P: ParamSet>(a: &P, b: &P) -> Result<()> {
    let (ta, tb) = (a.tensors(), b.tensors());
    if ta.len() != tb.len() {
        return Err(Error::Config(alloc::format!(
            "{} parameter tensors but {} gradient tensors",
            ta.len(),
            tb.len()
        )));
    }
    for ((name, x), (_, y)) in ta.iter().zip(&tb) {
        if x.rows() != y.rows() {
            return Err(Error::dim(name, x.rows(), y.rows()));
        }
        if x.cols() != y.cols() {
            return Err(Error::dim(name, x.cols(), y.cols()));
        }
    }
    Ok(())
}

/// `p ← p − learning_rate · g` for every parameter. Nothing is updated if any
/// gradient entry is non-finite.
pub fn sgd_step<P: ParamSet>(params: &mut P, grads: &P, learning_rate: f64) -> Result<()> {
    if !(learning_rate >= 0.0 && learning_rate.is_finite()) {
        return Err(Error::Config(alloc::format!(
            "learning rate must be a finite non-negative number, got {learning_rate}"
        )));
    }
    check_congruent(params, grads)?;
    if let Some((name, _)) = grads.tensors().iter().find(|(_, g)| !g.is_finite()) {
        return Err(Error::NonFinite {
            tensor: (*name).into(),
        });
    }
    params.add_scaled(-learning_rate, grads)
}

/// Rescales `grads` so their global L2 norm is at most `threshold`.
/// Returns whether clipping happened.
pub fn clip_global_norm<P: ParamSet>(grads: &mut P, threshold: f64) -> bool {
    let norm = grads.global_norm();
    if norm <= threshold || !norm.is_finite() {
        return false;
    }
    let scale = threshold / norm;
    for (_, t) in grads.tensors_mut() {
        t.as_mut_slice().iter_mut().for_each(|x| *x *= scale);
    }
    true
}
