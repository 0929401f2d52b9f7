use alloc::vec::Vec;

use crate::error::{Error, Result};

/// A run of feature frames, possibly followed by all-zero padding frames.
///
/// Only the first `valid_len` frames carry data; everything after them is
/// padding and is ignored by the encoder, decoder and loss.
#[derive(Debug, Clone, PartialEq)]
pub struct Sequence {
    dim: usize,
    valid_len: usize,
    data: Vec<f64>,
}

impl Sequence {
    /// Builds an unpadded sequence from row-major frame data.
    pub fn new(dim: usize, data: Vec<f64>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidInput("feature dimension must be positive".into()));
        }
        if !data.len().is_multiple_of(dim) {
            return Err(Error::InvalidInput(alloc::format!(
                "{} values do not form whole frames of dimension {dim}",
                data.len()
            )));
        }
        let valid_len = data.len() / dim;
        Self::padded(dim, data, valid_len)
    }

    /// Builds a sequence whose frames past `valid_len` must be all zero.
    pub fn padded(dim: usize, data: Vec<f64>, valid_len: usize) -> Result<Self> {
        if dim == 0 || !data.len().is_multiple_of(dim) {
            return Err(Error::InvalidInput("ragged frame data".into()));
        }
        let frames = data.len() / dim;
        if valid_len == 0 || valid_len > frames {
            return Err(Error::InvalidInput(alloc::format!(
                "valid length {valid_len} outside 1..={frames}"
            )));
        }
        if data[valid_len * dim..].iter().any(|&x| x != 0.0) {
            return Err(Error::InvalidInput("padding frames must be zero".into()));
        }
        if data.iter().any(|x| !x.is_finite()) {
            return Err(Error::InvalidInput("non-finite feature value".into()));
        }
        Ok(Sequence {
            dim,
            valid_len,
            data,
        })
    }

    pub fn from_frames(frames: &[&[f64]]) -> Result<Self> {
        let dim = frames.first().map_or(0, |f| f.len());
        if frames.iter().any(|f| f.len() != dim) {
            return Err(Error::InvalidInput("frames of unequal length".into()));
        }
        Self::new(dim, frames.concat())
    }

    /// Appends `extra` all-zero frames.
    pub fn pad(&self, extra: usize) -> Self {
        let mut data = self.data.clone();
        data.extend(core::iter::repeat_n(0.0, extra * self.dim));
        Sequence { data, ..*self }
    }

    /// Drops padding.
    pub fn trimmed(&self) -> Self {
        Sequence {
            data: self.data[..self.valid_len * self.dim].to_vec(),
            ..*self
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn valid_len(&self) -> usize {
        self.valid_len
    }

    /// Total frame count including padding.
    pub fn num_frames(&self) -> usize {
        self.data.len() / self.dim
    }

    pub fn frame(&self, t: usize) -> &[f64] {
        &self.data[t * self.dim..(t + 1) * self.dim]
    }

    /// Iterates the non-padding frames.
    pub fn frames(&self) -> impl DoubleEndedIterator<Item = &[f64]> + ExactSizeIterator {
        self.data[..self.valid_len * self.dim].chunks_exact(self.dim)
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub(crate) fn from_valid_frames(dim: usize, data: Vec<f64>) -> Self {
        let valid_len = data.len() / dim;
        Sequence {
            dim,
            valid_len,
            data,
        }
    }
}
