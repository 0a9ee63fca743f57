//! Explanations built on the max-pool layer.
//!
//! Each pooled value comes from exactly one trigram window, and the output
//! logit is the sum of `pooled[f] · dense_weights[f]` plus a bias. Those
//! products ("contributions") therefore split a prediction into per-node
//! parts, each tied to a span of the note.

mod profile;
mod render;

pub use profile::{profile_nodes, ExtremeTrigram, NodeProfile, NodeProfiles, DEFAULT_TOP_K};
pub use render::{render_index, render_report, IndexEntry, ReportStyle, DEFAULT_HIGHLIGHTS};

use serde::{Deserialize, Serialize};

use crate::embedding::Vocabulary;
use crate::model::{dense_logit, CnnModel, ForwardCache};
use crate::preprocess::TokenSequence;
use crate::{sigmoid, Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NodeContribution {
    pub node_index: usize,
    pub pooled: f64,
    pub dense_weight: f64,
    /// `pooled · dense_weight`.
    pub contribution: f64,
    /// Window start position in the sequence.
    pub start: usize,
    pub token_ids: Vec<u32>,
    /// Surface forms; padding shows as `PADDING`.
    pub tokens: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AttributionReport {
    pub visit_id: String,
    pub probability: f64,
    pub logit: f64,
    pub dense_bias: f64,
    /// One entry per node, by descending |contribution| (ties by node index).
    pub contributions: Vec<NodeContribution>,
    /// Surface tokens of the whole sequence as the model saw it.
    pub tokens: Vec<String>,
    pub original_length: usize,
}

impl AttributionReport {
    /// Logit rebuilt from the contributions, summed in node order.
    pub fn reconstructed_logit(&self) -> f64 {
        let mut by_node: Vec<&NodeContribution> = self.contributions.iter().collect();
        by_node.sort_by_key(|c| c.node_index);
        dense_logit(by_node.iter().map(|c| c.contribution), self.dense_bias)
    }

    pub fn reconstructed_probability(&self) -> f64 {
        sigmoid(self.reconstructed_logit())
    }
}

pub(crate) fn contributions_from_cache(
    model: &CnnModel,
    cache: &ForwardCache,
    vocab: &Vocabulary,
) -> Vec<NodeContribution> {
    let w = model.hyper.width;
    (0..model.hyper.filters)
        .map(|f| {
            let start = cache.argmax[f];
            let token_ids = cache.tokens[start..start + w].to_vec();
            let weight = model.params.dense_weights[f];
            NodeContribution {
                node_index: f,
                pooled: cache.pooled[f],
                dense_weight: weight,
                contribution: cache.pooled[f] * weight,
                start,
                tokens: token_ids.iter().map(|&id| vocab.token(id).to_string()).collect(),
                token_ids,
            }
        })
        .collect()
}

pub(crate) fn check_vocab(model: &CnnModel, vocab: &Vocabulary) -> Result<()> {
    if vocab.len() != model.vocab_size() {
        return Err(Error::invalid(format!(
            "vocabulary has {} tokens but the model has {} embedding rows",
            vocab.len(),
            model.vocab_size()
        )));
    }
    Ok(())
}

/// Runs the model on `x` and splits its logit into per-node contributions.
pub fn explain(model: &CnnModel, x: &TokenSequence, vocab: &Vocabulary, visit_id: &str) -> Result<AttributionReport> {
    check_vocab(model, vocab)?;
    let cache = model.forward(x)?;
    let mut contributions = contributions_from_cache(model, &cache, vocab);
    contributions
        .sort_by(|a, b| b.contribution.abs().total_cmp(&a.contribution.abs()).then(a.node_index.cmp(&b.node_index)));
    Ok(AttributionReport {
        visit_id: visit_id.to_string(),
        probability: cache.probability,
        logit: cache.logit,
        dense_bias: model.params.dense_bias,
        contributions,
        tokens: cache.tokens.iter().map(|&id| vocab.token(id).to_string()).collect(),
        original_length: x.original_length,
    })
}
