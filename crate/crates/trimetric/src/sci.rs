//! System complexity index: compressed artifact size normalized by the
//! log-cardinality of the input space.
//!
//! The numerator is the LZW-compressed size of the canonical artifact in
//! bits (a computable upper bound on its description length); the
//! denominator is `log2` of the quantized input-space size, which the
//! [`InputSpec`] makes exactly `dims * bits_per_dim` bits. Using base 2 for
//! both keeps the ratio dimensionless.

use serde::Serialize;
use thiserror::Error;

use crate::codec;
use crate::model::{InputSpec, ModelArtifact};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SciError {
    #[error("empty artifact")]
    EmptyArtifact,
    #[error("degenerate input space: dims * bits_per_dim is zero")]
    DegenerateInputSpace,
}

/// Complexity estimate for one artifact.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SciResult {
    /// Compressed artifact size in bits, header included.
    pub raw_bits: u64,
    /// `dims * bits_per_dim`.
    pub log2_n: f64,
    /// `raw_bits / log2_n`.
    pub sci: f64,
}

/// Computes the complexity index of `artifact` relative to `spec`'s input
/// space.
pub fn sci_estimate(artifact: &ModelArtifact, spec: &InputSpec) -> Result<SciResult, SciError> {
    if artifact.bytes.is_empty() {
        return Err(SciError::EmptyArtifact);
    }
    let log2_n = spec.log2_input_space_size();
    if log2_n == 0.0 {
        return Err(SciError::DegenerateInputSpace);
    }
    let raw_bits = codec::compressed_size_bits(&artifact.bytes);
    Ok(SciResult {
        raw_bits,
        log2_n,
        sci: raw_bits as f64 / log2_n,
    })
}
