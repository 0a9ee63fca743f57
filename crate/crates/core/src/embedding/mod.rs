//! Vocabulary and skip-gram negative-sampling word vectors.

mod sgns;
mod vocab;

pub use sgns::{
    cosine, sgns_pair_step, train_sgns, EmbeddingMatrix, NegativeSampler, SgnsConfig, EMBEDDING_FORMAT_VERSION,
};
pub use vocab::{Vocabulary, PAD_ID, PAD_TOKEN, UNK_ID, UNK_TOKEN};
