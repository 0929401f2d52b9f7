//! Semantic acoustic word embeddings.
//!
//! A bidirectional LSTM encoder turns a variable-length segment of acoustic
//! feature frames into a fixed-length vector; a unidirectional LSTM decoder,
//! conditioned on that vector at every step, reconstructs neighbouring
//! segments (skipgram) or the centre segment from its summed neighbours
//! (cbow). The crate also carries a negative-sampling word2vec baseline over
//! the transcripts and the word-similarity evaluation pipeline.
//!
//! The crate is `no_std` and only needs `alloc`. File formats, checkpoints
//! and the command-line front end live in the `speech2vec` crate.

#![no_std]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod corpus;
pub mod decoder;
pub mod encoder;
pub mod error;
pub mod eval;
pub mod gradcheck;
pub mod loss;
pub mod lstm;
pub mod model;
pub mod params;
pub mod seed;
pub mod sequence;
pub mod speech2vec;
pub mod synthetic;
pub mod tensor;
pub mod window;
pub mod word2vec;

pub use error::{Error, Result};
