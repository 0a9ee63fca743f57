use std::collections::{BTreeMap, HashMap};

use serde::{Deserialize, Serialize};

use super::logistic::FeatureRow;
use crate::{Error, Result};

pub const TFIDF_KIND: &str = "tfidf";

/// Sparse document vector: (feature index, weight) pairs in index order.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct TfidfVector {
    pub entries: Vec<(usize, f64)>,
}

impl TfidfVector {
    pub fn norm(&self) -> f64 {
        self.entries.iter().map(|(_, w)| w * w).sum::<f64>().sqrt()
    }

    pub fn get(&self, index: usize) -> Option<f64> {
        self.entries.binary_search_by_key(&index, |e| e.0).ok().map(|i| self.entries[i].1)
    }
}

impl FeatureRow for TfidfVector {
    fn dot(&self, w: &[f64]) -> f64 {
        self.entries.iter().map(|&(i, x)| w[i] * x).sum()
    }

    fn add_scaled(&self, a: f64, out: &mut [f64]) {
        for &(i, x) in &self.entries {
            out[i] += a * x;
        }
    }
}

/// Raw term counts times the smoothed idf `ln((1 + N) / (1 + df))`, then L2
/// normalised. A term present in every document gets weight zero, so a
/// document made only of such terms maps to the zero vector.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TfidfVectorizer {
    tokens: Vec<String>,
    doc_freq: Vec<u64>,
    n_docs: u64,
    #[serde(skip)]
    index: HashMap<String, usize>,
}

impl TfidfVectorizer {
    pub fn fit<D, S>(corpus: &[D]) -> Result<Self>
    where
        D: AsRef<[S]>,
        S: AsRef<str>,
    {
        if corpus.is_empty() {
            return Err(Error::Empty("TF-IDF corpus"));
        }
        let mut df: BTreeMap<&str, u64> = BTreeMap::new();
        for doc in corpus {
            let mut seen: Vec<&str> = doc.as_ref().iter().map(|t| t.as_ref()).collect();
            seen.sort_unstable();
            seen.dedup();
            for t in seen {
                *df.entry(t).or_default() += 1;
            }
        }
        let (tokens, doc_freq): (Vec<String>, Vec<u64>) = df.into_iter().map(|(t, c)| (t.to_string(), c)).unzip();
        Ok(Self::from_parts(tokens, doc_freq, corpus.len() as u64))
    }

    pub(crate) fn from_parts(tokens: Vec<String>, doc_freq: Vec<u64>, n_docs: u64) -> Self {
        let index = tokens.iter().enumerate().map(|(i, t)| (t.clone(), i)).collect();
        TfidfVectorizer { tokens, doc_freq, n_docs, index }
    }

    /// Rebuilds the token index after deserialisation.
    pub fn reindex(self) -> Self {
        Self::from_parts(self.tokens, self.doc_freq, self.n_docs)
    }

    pub fn n_features(&self) -> usize {
        self.tokens.len()
    }

    pub fn n_docs(&self) -> u64 {
        self.n_docs
    }

    pub fn feature_index(&self, token: &str) -> Option<usize> {
        self.index.get(token).copied()
    }

    pub fn doc_freq(&self, index: usize) -> u64 {
        self.doc_freq[index]
    }

    pub fn idf(&self, index: usize) -> f64 {
        ((1 + self.n_docs) as f64 / (1 + self.doc_freq[index]) as f64).ln()
    }

    /// Vectorises one document; tokens unseen at fit time are ignored.
    pub fn apply<S: AsRef<str>>(&self, doc: &[S]) -> TfidfVector {
        let mut tf: BTreeMap<usize, u64> = BTreeMap::new();
        for t in doc {
            if let Some(i) = self.feature_index(t.as_ref()) {
                *tf.entry(i).or_default() += 1;
            }
        }
        let mut entries: Vec<(usize, f64)> = tf.into_iter().map(|(i, c)| (i, c as f64 * self.idf(i))).collect();
        let norm = entries.iter().map(|(_, w)| w * w).sum::<f64>().sqrt();
        if norm > 0.0 {
            for e in &mut entries {
                e.1 /= norm;
            }
        }
        TfidfVector { entries }
    }
}
