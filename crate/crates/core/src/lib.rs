//! Interpretable 30-day readmission risk from free-text discharge notes.
//!
//! The pipeline runs in stages, each in its own module:
//!
//! - [`corpus`]: visit records, readmission labels, exclusions and splits
//! - [`preprocess`]: de-identification, section reordering, fixed-length token sequences
//! - [`embedding`]: vocabulary and skip-gram negative-sampling word vectors
//! - [`model`]: the embedding / trigram convolution / max pool / dense network, RMSprop and training
//! - [`attribution`]: per-node contributions traced back to trigrams, dataset-level node profiles
//! - [`baselines`]: LACE score, logistic regression, a small feed-forward net, TF-IDF
//! - [`eval`]: c-statistic and friends
//! - [`synth`]: synthetic notes with planted risk trigrams and an exact Bayes-optimal AUC
//!
//! [`container`] and [`records`] hold the on-disk formats shared by the stages.

pub mod attribution;
pub mod baselines;
pub mod container;
pub mod corpus;
pub mod embedding;
mod error;
pub mod eval;
pub mod model;
pub mod preprocess;
pub mod records;
pub mod synth;

pub use error::{Error, Result};

/// Numerically stable logistic function.
#[inline]
pub fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

/// Dot product over the common prefix, accumulated in four lanes.
#[inline]
pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    let n = a.len().min(b.len());
    let (a, b) = (&a[..n], &b[..n]);
    let mut acc = [0.0; 4];
    let mut ca = a.chunks_exact(4);
    let mut cb = b.chunks_exact(4);
    for (x, y) in (&mut ca).zip(&mut cb) {
        for k in 0..4 {
            acc[k] += x[k] * y[k];
        }
    }
    let mut s = (acc[0] + acc[1]) + (acc[2] + acc[3]);
    for (x, y) in ca.remainder().iter().zip(cb.remainder()) {
        s += x * y;
    }
    s
}

/// Hex-encoded SHA-256 of a byte string.
pub fn sha256_hex(bytes: &[u8]) -> String {
    use sha2::{Digest, Sha256};
    hex::encode(Sha256::digest(bytes))
}
