use rand::distributions::{Distribution, Uniform};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::container::Container;
use crate::embedding::{EmbeddingMatrix, PAD_ID};
use crate::preprocess::TokenSequence;
use crate::{dot, sigmoid, Error, Result};

pub const CNN_KIND: &str = "cnn";
pub const TRIGRAM: usize = 3;

/// Architecture hyperparameters. The activation is always the rectifier.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CnnHyper {
    /// Sequence length L.
    pub length: usize,
    /// Embedding dimension d.
    pub dim: usize,
    /// Number of convolution filters F.
    pub filters: usize,
    /// Convolution window w.
    pub width: usize,
    /// When set, positions at or past a sequence's `original_length` read the
    /// padding row, max pooling only considers windows starting inside the
    /// note, and the padding row receives no gradient.
    pub mask_padding: bool,
}

impl CnnHyper {
    pub fn new(length: usize, dim: usize, filters: usize) -> Self {
        CnnHyper { length, dim, filters, width: TRIGRAM, mask_padding: true }
    }

    fn validate(&self) -> Result<()> {
        if self.filters < 1 || self.dim < 1 || self.width < 1 || self.width > self.length {
            return Err(Error::invalid(format!("invalid architecture {self:?}")));
        }
        Ok(())
    }

    /// Window length w·d of one filter.
    pub fn window(&self) -> usize {
        self.width * self.dim
    }

    /// Number of convolution positions L − w + 1.
    pub fn positions(&self) -> usize {
        self.length - self.width + 1
    }
}

/// All trainable parameters. Also used as the gradient container.
#[derive(Debug, Clone, PartialEq)]
pub struct CnnParams {
    /// V×d, row-major.
    pub embedding: Vec<f64>,
    /// F×w×d, row-major: filter f, offset j, component k.
    pub filters: Vec<f64>,
    pub filter_bias: Vec<f64>,
    pub dense_weights: Vec<f64>,
    pub dense_bias: f64,
}

pub type Gradients = CnnParams;

pub const PARAM_GROUPS: [&str; 5] = ["embedding", "filters", "filter_bias", "dense_weights", "dense_bias"];

impl CnnParams {
    pub fn zeros_like(other: &CnnParams) -> Self {
        CnnParams {
            embedding: vec![0.0; other.embedding.len()],
            filters: vec![0.0; other.filters.len()],
            filter_bias: vec![0.0; other.filter_bias.len()],
            dense_weights: vec![0.0; other.dense_weights.len()],
            dense_bias: 0.0,
        }
    }

    pub fn fill_zero(&mut self) {
        self.embedding.fill(0.0);
        self.filters.fill(0.0);
        self.filter_bias.fill(0.0);
        self.dense_weights.fill(0.0);
        self.dense_bias = 0.0;
    }

    /// Parameter groups in `PARAM_GROUPS` order.
    pub fn groups(&self) -> [&[f64]; 5] {
        [&self.embedding, &self.filters, &self.filter_bias, &self.dense_weights, std::slice::from_ref(&self.dense_bias)]
    }

    pub fn groups_mut(&mut self) -> [&mut [f64]; 5] {
        [
            &mut self.embedding,
            &mut self.filters,
            &mut self.filter_bias,
            &mut self.dense_weights,
            std::slice::from_mut(&mut self.dense_bias),
        ]
    }

    pub fn all_finite(&self) -> bool {
        self.groups().iter().all(|g| g.iter().all(|x| x.is_finite()))
    }
}

/// Intermediate values of one forward pass.
#[derive(Debug, Clone, PartialEq)]
pub struct ForwardCache {
    /// Token ids as the network saw them (masked positions read as padding).
    pub tokens: Vec<u32>,
    /// Number of window start positions evaluated.
    pub positions: usize,
    /// Pre-activation convolution map, `positions × F`, row-major.
    pub conv: Vec<f64>,
    /// Max-pooled rectified activations, one per filter.
    pub pooled: Vec<f64>,
    /// Window start attaining each pooled value; ties go to the smallest.
    pub argmax: Vec<usize>,
    pub logit: f64,
    pub probability: f64,
}

impl ForwardCache {
    pub fn pre_activation(&self, position: usize, filter: usize) -> f64 {
        self.conv[position * self.pooled.len() + filter]
    }
}

/// Filter responses per (token, offset), each a run of F values.
#[derive(Debug, Clone)]
pub struct TokenResponses {
    values: Vec<f64>,
    width: usize,
    filters: usize,
}

impl TokenResponses {
    fn get(&self, id: u32, offset: usize) -> &[f64] {
        let start = (id as usize * self.width + offset) * self.filters;
        &self.values[start..start + self.filters]
    }
}

/// Dense-layer logit: products summed in node order, then the bias.
///
/// Attribution sums node contributions through this same function, which is
/// what makes the reconstruction bitwise exact.
pub fn dense_logit<I: IntoIterator<Item = f64>>(contributions: I, bias: f64) -> f64 {
    let mut s = 0.0;
    for c in contributions {
        s += c;
    }
    s + bias
}

#[inline]
fn relu(x: f64) -> f64 {
    if x > 0.0 {
        x
    } else {
        0.0
    }
}

#[inline]

/// Binary cross-entropy on a probability clamped to [1e-12, 1 − 1e-12].
pub fn loss(probability: f64, label: bool) -> f64 {
    let p = probability.clamp(1e-12, 1.0 - 1e-12);
    if label {
        -p.ln()
    } else {
        -(1.0 - p).ln()
    }
}

/// Embedding → trigram convolution → rectifier → global max pool → dense → sigmoid.
#[derive(Debug, Clone, PartialEq)]
pub struct CnnModel {
    pub hyper: CnnHyper,
    pub params: CnnParams,
}

#[derive(Debug, Serialize, Deserialize)]
struct CnnMeta {
    hyper: CnnHyper,
    vocab_size: usize,
    vocab_hash: String,
    activation: String,
}

impl CnnModel {
    /// Random initialisation: embeddings uniform in ±0.05, Glorot-uniform
    /// filters and dense weights, zero biases.
    pub fn new(hyper: CnnHyper, vocab_size: usize, seed: u64) -> Result<Self> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let dist = Uniform::new_inclusive(-0.05, 0.05);
        let embedding = (0..vocab_size * hyper.dim).map(|_| dist.sample(&mut rng)).collect();
        Self::init(hyper, embedding, &mut rng)
    }

    /// Starts from pretrained word vectors; the rest is initialised as in [`CnnModel::new`].
    pub fn with_embedding(hyper: CnnHyper, embedding: &EmbeddingMatrix, seed: u64) -> Result<Self> {
        if embedding.dim() != hyper.dim {
            return Err(Error::invalid(format!(
                "embedding dimension {} differs from model dimension {}",
                embedding.dim(),
                hyper.dim
            )));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        Self::init(hyper, embedding.rows().to_vec(), &mut rng)
    }

    fn init(hyper: CnnHyper, mut embedding: Vec<f64>, rng: &mut ChaCha8Rng) -> Result<Self> {
        hyper.validate()?;
        if embedding.len() < hyper.dim * 2 {
            return Err(Error::invalid("vocabulary must hold at least the two reserved tokens"));
        }
        if hyper.mask_padding {
            embedding[..hyper.dim].fill(0.0);
        }
        let fan_in = hyper.window() as f64;
        let fan_out = (hyper.width * hyper.filters) as f64;
        let conv = Uniform::new_inclusive(-1.0, 1.0);
        let conv_limit = (6.0 / (fan_in + fan_out)).sqrt();
        let filters = (0..hyper.filters * hyper.window()).map(|_| conv_limit * conv.sample(rng)).collect();
        let dense_limit = (6.0 / (hyper.filters as f64 + 1.0)).sqrt();
        let dense_weights = (0..hyper.filters).map(|_| dense_limit * conv.sample(rng)).collect();
        Ok(CnnModel {
            hyper,
            params: CnnParams {
                embedding,
                filters,
                filter_bias: vec![0.0; hyper.filters],
                dense_weights,
                dense_bias: 0.0,
            },
        })
    }

    /// Wraps explicit parameters after checking their shapes.
    pub fn from_params(hyper: CnnHyper, params: CnnParams) -> Result<Self> {
        hyper.validate()?;
        let f = hyper.filters;
        if params.embedding.is_empty()
            || params.embedding.len() % hyper.dim != 0
            || params.filters.len() != f * hyper.window()
            || params.filter_bias.len() != f
            || params.dense_weights.len() != f
        {
            return Err(Error::invalid("parameter shapes do not match the architecture"));
        }
        if !params.all_finite() {
            return Err(Error::NonFinite("model parameter".into()));
        }
        Ok(CnnModel { hyper, params })
    }

    pub fn vocab_size(&self) -> usize {
        self.params.embedding.len() / self.hyper.dim
    }

    pub fn embedding_row(&self, id: u32) -> &[f64] {
        let d = self.hyper.dim;
        &self.params.embedding[id as usize * d..(id as usize + 1) * d]
    }

    pub fn filter(&self, f: usize) -> &[f64] {
        let w = self.hyper.window();
        &self.params.filters[f * w..(f + 1) * w]
    }

    /// Pre-activation of filter `f` on an explicit window of token ids.
    pub fn filter_response(&self, f: usize, window: &[u32]) -> f64 {
        let d = self.hyper.dim;
        let kernel = self.filter(f);
        let mut z = self.params.filter_bias[f];
        for (j, &id) in window.iter().enumerate() {
            z += dot(&kernel[j * d..(j + 1) * d], self.embedding_row(id));
        }
        z
    }

    fn effective_tokens(&self, x: &TokenSequence) -> Result<(Vec<u32>, usize)> {
        let h = &self.hyper;
        if x.len() != h.length {
            return Err(Error::LengthMismatch { expected: h.length, actual: x.len() });
        }
        let v = self.vocab_size() as u32;
        if let Some(&bad) = x.tokens.iter().find(|&&t| t >= v) {
            return Err(Error::invalid(format!("token id {bad} outside vocabulary of {v}")));
        }
        if h.mask_padding {
            let keep = x.original_length.min(h.length);
            let mut tokens = x.tokens.clone();
            tokens[keep..].fill(PAD_ID);
            let positions = keep.clamp(1, h.positions());
            Ok((tokens, positions))
        } else {
            Ok((x.tokens.clone(), h.positions()))
        }
    }

    pub fn forward(&self, x: &TokenSequence) -> Result<ForwardCache> {
        self.forward_with(x, None)
    }

    /// Every (token, offset, filter) response. A batch whose windows outnumber
    /// the vocabulary computes these once instead of once per window.
    pub fn token_responses(&self) -> TokenResponses {
        let h = &self.hyper;
        let (d, f_count, win) = (h.dim, h.filters, h.window());
        let mut values = Vec::with_capacity(self.vocab_size() * h.width * f_count);
        for id in 0..self.vocab_size() as u32 {
            let row = self.embedding_row(id);
            for j in 0..h.width {
                for f in 0..f_count {
                    values.push(dot(&self.params.filters[f * win + j * d..f * win + (j + 1) * d], row));
                }
            }
        }
        TokenResponses { values, width: h.width, filters: f_count }
    }

    /// True when a [`TokenResponses`] table is cheaper than direct convolution
    /// for `windows` window evaluations.
    pub fn table_pays_off(&self, windows: usize) -> bool {
        windows > self.vocab_size()
    }

    /// `forward`, reading filter responses from `table` when given. The table
    /// must come from this model's current parameters. Both paths add the same
    /// terms in the same order, so results are bitwise identical.
    pub fn forward_with(&self, x: &TokenSequence, table: Option<&TokenResponses>) -> Result<ForwardCache> {
        let (tokens, positions) = self.effective_tokens(x)?;
        let h = &self.hyper;
        let (d, f_count, win) = (h.dim, h.filters, h.window());
        let mut conv = vec![0.0; positions * f_count];
        for t in 0..positions {
            let row = &mut conv[t * f_count..(t + 1) * f_count];
            row.copy_from_slice(&self.params.filter_bias);
            for j in 0..h.width {
                let id = tokens[t + j];
                match table {
                    Some(table) => {
                        for (z, r) in row.iter_mut().zip(table.get(id, j)) {
                            *z += r;
                        }
                    }
                    None => {
                        let emb = self.embedding_row(id);
                        for (f, z) in row.iter_mut().enumerate() {
                            *z += dot(&self.params.filters[f * win + j * d..f * win + (j + 1) * d], emb);
                        }
                    }
                }
            }
        }
        let mut pooled = vec![0.0; f_count];
        let mut argmax = vec![0usize; f_count];
        for f in 0..f_count {
            let mut best = relu(conv[f]);
            let mut at = 0;
            for t in 1..positions {
                let a = relu(conv[t * f_count + f]);
                if a > best {
                    best = a;
                    at = t;
                }
            }
            pooled[f] = best;
            argmax[f] = at;
        }
        let logit =
            dense_logit(pooled.iter().zip(&self.params.dense_weights).map(|(p, w)| p * w), self.params.dense_bias);
        Ok(ForwardCache { tokens, positions, conv, pooled, argmax, logit, probability: sigmoid(logit) })
    }

    pub fn predict(&self, x: &TokenSequence) -> Result<f64> {
        Ok(self.forward(x)?.probability)
    }

    /// Probabilities for many sequences, evaluated in parallel.
    pub fn predict_batch(&self, xs: &[TokenSequence]) -> Result<Vec<f64>> {
        let windows: usize = xs.iter().map(|x| x.original_length.min(self.hyper.positions())).sum();
        let table = self.table_pays_off(windows).then(|| self.token_responses());
        xs.par_iter().map(|x| Ok(self.forward_with(x, table.as_ref())?.probability)).collect()
    }

    /// Exact gradients of the cross-entropy loss at `cache`.
    ///
    /// The cache must come from `forward` on this model with its current
    /// parameters; a stale cache cannot be detected.
    pub fn backward(&self, cache: &ForwardCache, label: bool) -> Gradients {
        let mut g = CnnParams::zeros_like(&self.params);
        self.accumulate_gradients(cache, label, 1.0, &mut g);
        g
    }

    /// Adds `scale ×` the gradient at `cache` into `grads`.
    pub fn accumulate_gradients(&self, cache: &ForwardCache, label: bool, scale: f64, grads: &mut Gradients) {
        let h = &self.hyper;
        let (d, f_count, win) = (h.dim, h.filters, h.window());
        let y = if label { 1.0 } else { 0.0 };
        let delta = (cache.probability - y) * scale;
        if delta == 0.0 {
            return;
        }
        grads.dense_bias += delta;
        for f in 0..f_count {
            grads.dense_weights[f] += delta * cache.pooled[f];
            let t = cache.argmax[f];
            if cache.conv[t * f_count + f] <= 0.0 {
                continue;
            }
            let dz = delta * self.params.dense_weights[f];
            grads.filter_bias[f] += dz;
            let kernel = &self.params.filters[f * win..(f + 1) * win];
            let gk = &mut grads.filters[f * win..(f + 1) * win];
            for j in 0..h.width {
                let id = cache.tokens[t + j];
                let row = self.embedding_row(id);
                for k in 0..d {
                    gk[j * d + k] += dz * row[k];
                }
                if h.mask_padding && id == PAD_ID {
                    continue;
                }
                let ge = &mut grads.embedding[id as usize * d..(id as usize + 1) * d];
                for k in 0..d {
                    ge[k] += dz * kernel[j * d + k];
                }
            }
        }
    }

    pub fn to_container(&self, vocab_hash: &str) -> Result<Container> {
        let meta = CnnMeta {
            hyper: self.hyper,
            vocab_size: self.vocab_size(),
            vocab_hash: vocab_hash.to_string(),
            activation: "relu".into(),
        };
        let mut c = Container::new(CNN_KIND, &meta)?;
        for (name, values) in PARAM_GROUPS.iter().zip(self.params.groups()) {
            c.push(name, values);
        }
        Ok(c)
    }

    pub fn to_bytes(&self, vocab_hash: &str) -> Result<Vec<u8>> {
        Ok(self.to_container(vocab_hash)?.to_bytes())
    }

    /// Loads a model and the hash of the vocabulary it was trained with.
    pub fn from_bytes(bytes: &[u8]) -> Result<(Self, String)> {
        let c = Container::from_bytes(bytes, Some(CNN_KIND))?;
        let meta: CnnMeta = c.meta()?;
        if meta.activation != "relu" {
            return Err(Error::format(CNN_KIND, format!("unsupported activation {}", meta.activation)));
        }
        let bias = c.array("dense_bias")?;
        if bias.len() != 1 {
            return Err(Error::format(CNN_KIND, "dense_bias must hold one value"));
        }
        let params = CnnParams {
            embedding: c.array("embedding")?.to_vec(),
            filters: c.array("filters")?.to_vec(),
            filter_bias: c.array("filter_bias")?.to_vec(),
            dense_weights: c.array("dense_weights")?.to_vec(),
            dense_bias: bias[0],
        };
        let model = Self::from_params(meta.hyper, params).map_err(|e| Error::format(CNN_KIND, e.to_string()))?;
        if model.vocab_size() != meta.vocab_size {
            return Err(Error::format(CNN_KIND, "embedding rows disagree with recorded vocabulary size"));
        }
        Ok((model, meta.vocab_hash))
    }
}
