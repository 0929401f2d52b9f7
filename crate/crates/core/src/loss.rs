use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::sequence::Sequence;

/// Summed squared error over the valid frames and its gradient.
#[derive(Debug, Clone, PartialEq)]
pub struct MseLoss {
    pub value: f64,
    /// `2 (pred − target)`, row-major over valid frames.
    pub grad: Vec<f64>,
}

/// `Σ_t Σ_d (pred − target)²` over the valid (non-padding) frames.
pub fn mse_loss(pred: &Sequence, target: &Sequence) -> Result<MseLoss> {
    if pred.valid_len() != target.valid_len() {
        return Err(Error::InvalidInput(alloc::format!(
            "prediction has {} frames, target has {}",
            pred.valid_len(),
            target.valid_len()
        )));
    }
    if pred.dim() != target.dim() {
        return Err(Error::InvalidInput(alloc::format!(
            "prediction frame dim {} differs from target dim {}",
            pred.dim(),
            target.dim()
        )));
    }
    Ok(mse_flat(&pred.as_slice()[..pred.valid_len() * pred.dim()], target))
}

/// Loss of row-major predictions against the valid frames of `target`.
pub(crate) fn mse_flat(pred: &[f64], target: &Sequence) -> MseLoss {
    let t = &target.as_slice()[..target.valid_len() * target.dim()];
    debug_assert_eq!(pred.len(), t.len());
    let mut value = 0.0;
    let grad = pred
        .iter()
        .zip(t)
        .map(|(p, y)| {
            let d = p - y;
            value += d * d;
            2.0 * d
        })
        .collect();
    MseLoss { value, grad }
}
