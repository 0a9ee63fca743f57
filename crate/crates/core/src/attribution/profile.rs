use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{check_vocab, contributions_from_cache, NodeContribution};
use crate::embedding::Vocabulary;
use crate::model::CnnModel;
use crate::preprocess::TokenSequence;
use crate::{Error, Result};

pub const DEFAULT_TOP_K: usize = 20;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExtremeTrigram {
    pub visit_id: String,
    pub contribution: f64,
    pub start: usize,
    pub tokens: Vec<String>,
}

/// Distribution of one node's contribution over a dataset.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NodeProfile {
    pub node_index: usize,
    pub mean: f64,
    /// Population standard deviation.
    pub std: f64,
    pub min: f64,
    pub max: f64,
    pub max_abs: f64,
    /// Per-visit contributions, in dataset order.
    pub contributions: Vec<f64>,
    /// Largest |contribution| windows, descending; ties keep dataset order.
    pub extremes: Vec<ExtremeTrigram>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NodeProfiles {
    pub profiles: Vec<NodeProfile>,
    /// Node indices by descending max |contribution|.
    pub by_max_abs: Vec<usize>,
    /// Node indices by descending standard deviation.
    pub by_std: Vec<usize>,
}

impl NodeProfiles {
    pub fn top_by_max_abs(&self, n: usize) -> impl Iterator<Item = &NodeProfile> {
        self.by_max_abs.iter().take(n).map(|&i| &self.profiles[i])
    }

    pub fn top_by_std(&self, n: usize) -> impl Iterator<Item = &NodeProfile> {
        self.by_std.iter().take(n).map(|&i| &self.profiles[i])
    }
}

fn rank_desc(values: &[f64]) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..values.len()).collect();
    idx.sort_by(|&a, &b| values[b].total_cmp(&values[a]).then(a.cmp(&b)));
    idx
}

/// Records every node's contribution on every visit and summarises them.
pub fn profile_nodes(
    model: &CnnModel,
    dataset: &[(String, TokenSequence)],
    vocab: &Vocabulary,
    top_k: usize,
) -> Result<NodeProfiles> {
    if dataset.is_empty() {
        return Err(Error::Empty("profiling dataset"));
    }
    check_vocab(model, vocab)?;
    let windows: usize = dataset.iter().map(|(_, x)| x.original_length.min(model.hyper.positions())).sum();
    let table = model.table_pays_off(windows).then(|| model.token_responses());
    let per_visit: Vec<Vec<NodeContribution>> = dataset
        .par_iter()
        .map(|(_, x)| Ok(contributions_from_cache(model, &model.forward_with(x, table.as_ref())?, vocab)))
        .collect::<Result<_>>()?;

    let n = dataset.len() as f64;
    let profiles: Vec<NodeProfile> = (0..model.hyper.filters)
        .map(|f| {
            let contributions: Vec<f64> = per_visit.iter().map(|v| v[f].contribution).collect();
            let min = contributions.iter().copied().fold(f64::INFINITY, f64::min);
            let max = contributions.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            // offset from the minimum so a constant column has exactly zero spread
            let mean = min + contributions.iter().map(|c| c - min).sum::<f64>() / n;
            let var = contributions.iter().map(|c| (c - mean).powi(2)).sum::<f64>() / n;
            let mut order: Vec<usize> = (0..dataset.len()).collect();
            order.sort_by(|&a, &b| contributions[b].abs().total_cmp(&contributions[a].abs()).then(a.cmp(&b)));
            let extremes = order
                .into_iter()
                .take(top_k)
                .map(|i| {
                    let c = &per_visit[i][f];
                    ExtremeTrigram {
                        visit_id: dataset[i].0.clone(),
                        contribution: c.contribution,
                        start: c.start,
                        tokens: c.tokens.clone(),
                    }
                })
                .collect();
            NodeProfile {
                node_index: f,
                mean,
                std: var.sqrt(),
                min,
                max,
                max_abs: min.abs().max(max.abs()),
                contributions,
                extremes,
            }
        })
        .collect();
    let by_max_abs = rank_desc(&profiles.iter().map(|p| p.max_abs).collect::<Vec<_>>());
    let by_std = rank_desc(&profiles.iter().map(|p| p.std).collect::<Vec<_>>());
    Ok(NodeProfiles { profiles, by_max_abs, by_std })
}
