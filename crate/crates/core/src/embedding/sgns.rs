use std::io::{BufRead, Write};

use rand::distributions::{Distribution, Uniform};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::vocab::{Vocabulary, PAD_ID, UNK_ID};
use crate::{dot, sigmoid, Error, Result};

pub const EMBEDDING_FORMAT_VERSION: u32 = 1;

/// V×d word vectors plus the SGNS context vectors used during pretraining.
/// Row `i` belongs to vocabulary id `i`.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingMatrix {
    dim: usize,
    rows: Vec<f64>,
    context: Vec<f64>,
}

impl EmbeddingMatrix {
    pub fn zeros(vocab_size: usize, dim: usize) -> Self {
        EmbeddingMatrix { dim, rows: vec![0.0; vocab_size * dim], context: vec![0.0; vocab_size * dim] }
    }

    /// word2vec initialisation: input rows uniform in ±0.5/d, context rows zero,
    /// and the padding row zero.
    pub fn init_uniform(vocab_size: usize, dim: usize, rng: &mut impl Rng) -> Self {
        let mut m = Self::zeros(vocab_size, dim);
        let half = 0.5 / dim as f64;
        let dist = Uniform::new_inclusive(-half, half);
        for x in m.rows.iter_mut() {
            *x = dist.sample(rng);
        }
        m.row_mut(PAD_ID).fill(0.0);
        m
    }

    pub fn from_rows(dim: usize, rows: Vec<f64>) -> Result<Self> {
        if dim == 0 || rows.len() % dim != 0 {
            return Err(Error::invalid("embedding rows must be a multiple of the dimension"));
        }
        if rows.iter().any(|x| !x.is_finite()) {
            return Err(Error::NonFinite("embedding row".into()));
        }
        let n = rows.len();
        Ok(EmbeddingMatrix { dim, rows, context: vec![0.0; n] })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn vocab_size(&self) -> usize {
        self.rows.len() / self.dim
    }

    pub fn row(&self, id: u32) -> &[f64] {
        let i = id as usize * self.dim;
        &self.rows[i..i + self.dim]
    }

    pub fn row_mut(&mut self, id: u32) -> &mut [f64] {
        let i = id as usize * self.dim;
        &mut self.rows[i..i + self.dim]
    }

    pub fn context_row(&self, id: u32) -> &[f64] {
        let i = id as usize * self.dim;
        &self.context[i..i + self.dim]
    }

    pub fn rows(&self) -> &[f64] {
        &self.rows
    }

    pub fn context_rows(&self) -> &[f64] {
        &self.context
    }

    pub fn into_rows(self) -> Vec<f64> {
        self.rows
    }

    /// Text format: `V d version` header, then `token x1 .. xd` per row with
    /// 17 significant digits. Context rows are not written.
    pub fn write<W: Write>(&self, vocab: &Vocabulary, mut out: W) -> Result<()> {
        if vocab.len() != self.vocab_size() {
            return Err(Error::invalid("vocabulary size differs from embedding rows"));
        }
        writeln!(out, "{} {} {}", self.vocab_size(), self.dim, EMBEDDING_FORMAT_VERSION)?;
        let mut line = String::new();
        for id in 0..self.vocab_size() as u32 {
            line.clear();
            line.push_str(vocab.token(id));
            for x in self.row(id) {
                line.push(' ');
                line.push_str(&format!("{x:.16e}"));
            }
            line.push('\n');
            out.write_all(line.as_bytes())?;
        }
        out.flush()?;
        Ok(())
    }

    /// Reads the text format, returning tokens in row order.
    pub fn read<R: BufRead>(input: R) -> Result<(Vec<String>, Self)> {
        let bad = |d: String| Error::format("embeddings", d);
        let mut lines = input.lines();
        let header = lines.next().ok_or_else(|| bad("missing header".into()))??;
        let fields: Vec<usize> = header
            .split_whitespace()
            .map(|f| f.parse().map_err(|_| bad(format!("bad header {header:?}"))))
            .collect::<Result<_>>()?;
        let [v, d, version] = fields[..] else {
            return Err(bad(format!("bad header {header:?}")));
        };
        if version != EMBEDDING_FORMAT_VERSION as usize {
            return Err(bad(format!("expected format version {EMBEDDING_FORMAT_VERSION}, found {version}")));
        }
        let mut tokens = Vec::with_capacity(v);
        let mut rows = Vec::with_capacity(v * d);
        for (n, line) in lines.enumerate() {
            let line = line?;
            if line.is_empty() {
                continue;
            }
            let mut parts = line.split(' ');
            tokens.push(parts.next().unwrap_or_default().to_string());
            let before = rows.len();
            for p in parts {
                rows.push(p.parse::<f64>().map_err(|_| bad(format!("line {}: bad number {p:?}", n + 2)))?);
            }
            if rows.len() - before != d {
                return Err(bad(format!("line {}: expected {d} values", n + 2)));
            }
        }
        if tokens.len() != v {
            return Err(bad(format!("expected {v} rows, found {}", tokens.len())));
        }
        Ok((tokens, Self::from_rows(d, rows)?))
    }

    /// Reads the text format and checks that the rows line up with `vocab`.
    pub fn read_for<R: BufRead>(input: R, vocab: &Vocabulary) -> Result<Self> {
        let (tokens, m) = Self::read(input)?;
        if tokens != vocab.tokens() {
            return Err(Error::format("embeddings", "row tokens do not match the vocabulary"));
        }
        Ok(m)
    }
}

/// Cosine similarity; rejects zero vectors.
pub fn cosine(a: &[f64], b: &[f64]) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::invalid("cosine of vectors with different lengths"));
    }
    let na = dot(a, a).sqrt();
    let nb = dot(b, b).sqrt();
    if na == 0.0 || nb == 0.0 {
        return Err(Error::ZeroVector);
    }
    Ok((dot(a, b) / (na * nb)).clamp(-1.0, 1.0))
}

/// ln σ(x), stable for large |x|.
fn log_sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        -(-x).exp().ln_1p()
    } else {
        x - x.exp().ln_1p()
    }
}

/// Draws negatives with probability proportional to count^0.75 over the
/// regular (non-reserved) vocabulary.
#[derive(Debug, Clone)]
pub struct NegativeSampler {
    ids: Vec<u32>,
    cumulative: Vec<f64>,
}

impl NegativeSampler {
    pub fn new(vocab: &Vocabulary) -> Result<Self> {
        let mut ids = Vec::new();
        let mut cumulative = Vec::new();
        let mut total = 0.0;
        for id in vocab.regular_ids() {
            let c = vocab.count(id);
            if c == 0 {
                continue;
            }
            total += (c as f64).powf(0.75);
            ids.push(id);
            cumulative.push(total);
        }
        if ids.is_empty() {
            return Err(Error::Empty("no regular tokens to sample negatives from"));
        }
        Ok(NegativeSampler { ids, cumulative })
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    fn total(&self) -> f64 {
        *self.cumulative.last().expect("nonempty")
    }

    /// Exact sampling probability of `id`.
    pub fn probability(&self, id: u32) -> f64 {
        match self.ids.binary_search(&id) {
            Ok(i) => {
                let lo = if i == 0 { 0.0 } else { self.cumulative[i - 1] };
                (self.cumulative[i] - lo) / self.total()
            }
            Err(_) => 0.0,
        }
    }

    pub fn sample(&self, rng: &mut impl Rng) -> u32 {
        let u = rng.gen::<f64>() * self.total();
        let i = self.cumulative.partition_point(|&c| c <= u).min(self.ids.len() - 1);
        self.ids[i]
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SgnsConfig {
    pub dim: usize,
    pub window: usize,
    pub negatives: usize,
    pub epochs: usize,
    pub lr: f64,
    pub seed: u64,
    /// word2vec frequent-word subsampling threshold; off when `None`.
    pub subsample: Option<f64>,
}

impl Default for SgnsConfig {
    fn default() -> Self {
        SgnsConfig { dim: 50, window: 5, negatives: 5, epochs: 5, lr: 0.025, seed: 1, subsample: None }
    }
}

/// One SGNS update for a (center, context) pair and its negatives, ascending
/// ln σ(u_ctx·v) + Σ ln σ(−u_neg·v) with step `lr`. Negatives equal to the
/// context word are skipped. Returns the pair objective before the update.
pub fn sgns_pair_step(m: &mut EmbeddingMatrix, center: u32, context: u32, negatives: &[u32], lr: f64) -> f64 {
    let mut grad_v = vec![0.0; m.dim];
    pair_update(m, center, context, negatives, lr, &mut grad_v, true)
}

fn pair_update(
    m: &mut EmbeddingMatrix,
    center: u32,
    context: u32,
    negatives: &[u32],
    lr: f64,
    grad_v: &mut [f64],
    with_objective: bool,
) -> f64 {
    let d = m.dim;
    let c0 = center as usize * d;
    grad_v.fill(0.0);
    let mut objective = 0.0;
    let targets = std::iter::once((context, 1.0)).chain(negatives.iter().filter(|&&n| n != context).map(|&n| (n, 0.0)));
    for (target, label) in targets {
        let t0 = target as usize * d;
        let v = &m.rows[c0..c0 + d];
        let u = &mut m.context[t0..t0 + d];
        let s = dot(u, v);
        if with_objective {
            objective += if label == 1.0 { log_sigmoid(s) } else { log_sigmoid(-s) };
        }
        let g = lr * (label - sigmoid(s));
        for ((gv, uk), vk) in grad_v.iter_mut().zip(u.iter_mut()).zip(v) {
            *gv += g * *uk;
            *uk += g * vk;
        }
    }
    for (x, g) in m.rows[c0..c0 + d].iter_mut().zip(grad_v.iter()) {
        *x += g;
    }
    objective
}

/// Pretrains word vectors with skip-gram negative sampling.
///
/// Padding and unknown ids are dropped from each document before windowing,
/// so they never act as centers, contexts or negatives. The learning rate
/// decays linearly from `lr` to `lr / 100` over all center words.
pub fn train_sgns<D: AsRef<[u32]>>(corpus: &[D], vocab: &Vocabulary, config: &SgnsConfig) -> Result<EmbeddingMatrix> {
    if config.dim < 1 || config.window < 1 || config.negatives < 1 {
        return Err(Error::invalid("dim, window and negatives must be at least 1"));
    }
    if !(config.lr > 0.0) {
        return Err(Error::invalid("learning rate must be positive"));
    }
    let sampler = NegativeSampler::new(vocab)?;
    if sampler.len() < config.negatives + 1 {
        return Err(Error::invalid(format!(
            "vocabulary has {} regular tokens; need at least negatives + 1 = {}",
            sampler.len(),
            config.negatives + 1
        )));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut m = EmbeddingMatrix::init_uniform(vocab.len(), config.dim, &mut rng);

    let docs: Vec<Vec<u32>> =
        corpus.iter().map(|d| d.as_ref().iter().copied().filter(|&t| t != PAD_ID && t != UNK_ID).collect()).collect();
    if docs.iter().any(|d| d.iter().any(|&t| t as usize >= vocab.len())) {
        return Err(Error::invalid("corpus contains ids outside the vocabulary"));
    }
    let words: usize = docs.iter().map(Vec::len).sum();
    let total_words: f64 = vocab.regular_ids().map(|id| vocab.count(id) as f64).sum();
    let total = (config.epochs * words).max(1) as f64;
    let mut processed = 0usize;
    let mut negatives = vec![0u32; config.negatives];
    let mut kept = Vec::new();
    let mut grad_v = vec![0.0; config.dim];

    for _ in 0..config.epochs {
        for doc in &docs {
            kept.clear();
            match config.subsample {
                Some(t) if t > 0.0 => {
                    for &w in doc {
                        let f = vocab.count(w) as f64 / total_words;
                        let keep = ((f / t).sqrt() + 1.0) * t / f;
                        if keep >= 1.0 || rng.gen::<f64>() < keep {
                            kept.push(w);
                        }
                    }
                }
                _ => kept.extend_from_slice(doc),
            }
            for i in 0..kept.len() {
                let lr = config.lr * (1.0 - 0.99 * (processed as f64 / total));
                processed += 1;
                let center = kept[i];
                let lo = i.saturating_sub(config.window);
                let hi = (i + config.window + 1).min(kept.len());
                for j in lo..hi {
                    if j == i {
                        continue;
                    }
                    for n in negatives.iter_mut() {
                        *n = sampler.sample(&mut rng);
                    }
                    pair_update(&mut m, center, kept[j], &negatives, lr, &mut grad_v, false);
                }
            }
        }
    }
    if m.rows.iter().chain(&m.context).any(|x| !x.is_finite()) {
        return Err(Error::NonFinite("SGNS produced a non-finite embedding".into()));
    }
    Ok(m)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn vocab() -> Vocabulary {
        Vocabulary::build(&[vec!["a", "a", "a", "a", "b", "b", "c", "d", "e", "f", "f", "f"]], 1).unwrap()
    }

    #[test]
    fn cosine_closed_forms() {
        assert!((cosine(&[3.0, -4.0], &[3.0, -4.0]).unwrap() - 1.0).abs() < 1e-15);
        assert_eq!(cosine(&[1.0, 0.0], &[0.0, 1.0]).unwrap(), 0.0);
        assert!((cosine(&[1.0, 1.0], &[1.0, 0.0]).unwrap() - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-15);
        assert!(matches!(cosine(&[0.0, 0.0], &[1.0, 0.0]), Err(Error::ZeroVector)));
    }

    #[test]
    fn single_pair_step_matches_hand_computation() {
        // d = 2, center id 2, context id 3, one negative id 4.
        let mut m = EmbeddingMatrix::zeros(5, 2);
        m.row_mut(2).copy_from_slice(&[0.5, -0.25]);
        m.context[6..8].copy_from_slice(&[0.2, 0.4]);
        m.context[8..10].copy_from_slice(&[-0.3, 0.1]);
        let lr = 0.1;
        // s_pos = 0.5*0.2 - 0.25*0.4 = 0;     g_pos = lr*(1 - σ(0)) = 0.05
        // s_neg = 0.5*-0.3 - 0.25*0.1 = -0.175; g_neg = -lr*σ(-0.175)
        let sig_neg = 1.0 / (1.0 + 0.175f64.exp());
        let g_pos = 0.05;
        let g_neg = -lr * sig_neg;
        let expect_v = [0.5 + g_pos * 0.2 + g_neg * -0.3, -0.25 + g_pos * 0.4 + g_neg * 0.1];
        let expect_pos = [0.2 + g_pos * 0.5, 0.4 + g_pos * -0.25];
        let expect_neg = [-0.3 + g_neg * 0.5, 0.1 + g_neg * -0.25];
        let obj = sgns_pair_step(&mut m, 2, 3, &[4], lr);
        let expect_obj = (0.5f64).ln() + (1.0 - sig_neg).ln();
        assert!((obj - expect_obj).abs() < 1e-12);
        for (a, b) in m.row(2).iter().zip(expect_v) {
            assert!((a - b).abs() < 1e-12);
        }
        for (a, b) in m.context_row(3).iter().zip(expect_pos) {
            assert!((a - b).abs() < 1e-12);
        }
        for (a, b) in m.context_row(4).iter().zip(expect_neg) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn zero_epochs_returns_initialisation() {
        let v = vocab();
        let ids: Vec<Vec<u32>> = vec![(2..8).collect()];
        let cfg = SgnsConfig { dim: 4, epochs: 0, negatives: 2, seed: 9, ..Default::default() };
        let m = train_sgns(&ids, &v, &cfg).unwrap();
        let init = EmbeddingMatrix::init_uniform(v.len(), 4, &mut ChaCha8Rng::seed_from_u64(9));
        assert_eq!(m, init);
        assert!(m.row(PAD_ID).iter().all(|&x| x == 0.0));
    }

    #[test]
    fn rejects_small_vocabulary_and_bad_config() {
        let v = vocab();
        let ids: Vec<Vec<u32>> = vec![(2..8).collect()];
        let cfg = SgnsConfig { negatives: 6, ..Default::default() };
        assert!(train_sgns(&ids, &v, &cfg).is_err());
        let cfg = SgnsConfig { window: 0, ..Default::default() };
        assert!(train_sgns(&ids, &v, &cfg).is_err());
    }

    #[test]
    fn padding_never_trained() {
        let v = vocab();
        let ids: Vec<Vec<u32>> = vec![vec![2, 0, 3, 1, 4, 5, 0, 0, 6, 7]];
        let cfg = SgnsConfig { dim: 3, negatives: 2, epochs: 3, ..Default::default() };
        let m = train_sgns(&ids, &v, &cfg).unwrap();
        assert!(m.row(PAD_ID).iter().all(|&x| x == 0.0));
        assert!(m.context_row(PAD_ID).iter().all(|&x| x == 0.0));
        assert!(m.context_row(UNK_ID).iter().all(|&x| x == 0.0));
        let again = train_sgns(&ids, &v, &cfg).unwrap();
        assert_eq!(m, again);
    }

    #[test]
    fn subsampling_runs_deterministically() {
        let v = vocab();
        let ids: Vec<Vec<u32>> = vec![(2..8).chain(2..8).collect()];
        let cfg = SgnsConfig { dim: 3, negatives: 2, subsample: Some(1e-2), ..Default::default() };
        assert_eq!(train_sgns(&ids, &v, &cfg).unwrap(), train_sgns(&ids, &v, &cfg).unwrap());
    }

    #[test]
    fn text_format_round_trip() {
        let v = vocab();
        let ids: Vec<Vec<u32>> = vec![(2..8).collect()];
        let cfg = SgnsConfig { dim: 3, negatives: 2, ..Default::default() };
        let m = train_sgns(&ids, &v, &cfg).unwrap();
        let mut buf = Vec::new();
        m.write(&v, &mut buf).unwrap();
        let back = EmbeddingMatrix::read_for(buf.as_slice(), &v).unwrap();
        assert_eq!(back.rows(), m.rows());
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with(&format!("{} 3 1\n", v.len())));
        let bumped = text.replacen(" 3 1\n", " 3 2\n", 1);
        assert!(EmbeddingMatrix::read(bumped.as_bytes()).is_err());
    }
}
