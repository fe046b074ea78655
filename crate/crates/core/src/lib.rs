//! Political poster classification from fused appearance and text vectors.
//!
//! The pipeline: OCR tokens are counted into a capped corpus histogram and
//! cut to a top-n [`vocab::Vocabulary`]; each image's tokens become a sparse
//! [`encoder::TextVector`], which is scaled by `k` and appended to the
//! image's precomputed appearance vector. A small dense classifier
//! ([`net::Mlp`]) trained with Adam on binary cross-entropy separates
//! political posters from everything else, and [`eval`] runs the K-fold
//! comparison against a majority-class baseline.

pub mod cli;
pub mod curation;
pub mod datamodel;
pub mod encoder;
pub mod error;
pub mod eval;
pub mod matrix;
pub mod net;
pub mod storage;
pub mod synth;
pub mod vocab;

pub use error::{Error, Result};
