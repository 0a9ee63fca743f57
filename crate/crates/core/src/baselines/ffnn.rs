use rand::distributions::{Distribution, Uniform};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::container::Container;
use crate::model::{loss, rmsprop_step, TrainConfig};
use crate::{sigmoid, Error, Result};

pub const FFNN_KIND: &str = "ffnn";

/// Input → rectifier hidden layer → sigmoid output.
#[derive(Debug, Clone, PartialEq)]
pub struct FfnnModel {
    pub inputs: usize,
    pub hidden: usize,
    /// hidden × inputs, row-major.
    pub w1: Vec<f64>,
    pub b1: Vec<f64>,
    pub w2: Vec<f64>,
    pub b2: f64,
}

#[derive(Serialize, Deserialize)]
struct FfnnMeta {
    inputs: usize,
    hidden: usize,
    extra: serde_json::Value,
}

impl FfnnModel {
    /// He-uniform hidden weights, Glorot-uniform output weights, hidden biases 0.1.
    pub fn init(inputs: usize, hidden: usize, seed: u64) -> Result<Self> {
        if inputs < 1 || hidden < 1 {
            return Err(Error::invalid("feed-forward network needs at least one input and one hidden unit"));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let unit = Uniform::new_inclusive(-1.0, 1.0);
        let l1 = (6.0 / inputs as f64).sqrt();
        let l2 = (6.0 / (hidden as f64 + 1.0)).sqrt();
        Ok(FfnnModel {
            inputs,
            hidden,
            w1: (0..hidden * inputs).map(|_| l1 * unit.sample(&mut rng)).collect(),
            b1: vec![0.1; hidden],
            w2: (0..hidden).map(|_| l2 * unit.sample(&mut rng)).collect(),
            b2: 0.0,
        })
    }

    fn hidden_pre(&self, x: &[f64]) -> Vec<f64> {
        (0..self.hidden)
            .map(|j| {
                let row = &self.w1[j * self.inputs..(j + 1) * self.inputs];
                self.b1[j] + row.iter().zip(x).map(|(w, v)| w * v).sum::<f64>()
            })
            .collect()
    }

    pub fn logit(&self, x: &[f64]) -> f64 {
        let pre = self.hidden_pre(x);
        self.b2 + pre.iter().zip(&self.w2).map(|(z, w)| z.max(0.0) * w).sum::<f64>()
    }

    pub fn predict(&self, x: &[f64]) -> f64 {
        sigmoid(self.logit(x))
    }

    fn groups_mut(&mut self) -> [&mut [f64]; 4] {
        [&mut self.w1, &mut self.b1, &mut self.w2, std::slice::from_mut(&mut self.b2)]
    }

    fn zeros_like(&self) -> FfnnModel {
        FfnnModel {
            inputs: self.inputs,
            hidden: self.hidden,
            w1: vec![0.0; self.w1.len()],
            b1: vec![0.0; self.b1.len()],
            w2: vec![0.0; self.w2.len()],
            b2: 0.0,
        }
    }

    /// Adds `scale ×` the cross-entropy gradient at `(x, label)` into `g`.
    /// Returns the loss.
    pub fn accumulate_gradient(&self, x: &[f64], label: bool, scale: f64, g: &mut FfnnModel) -> f64 {
        let pre = self.hidden_pre(x);
        let logit = self.b2 + pre.iter().zip(&self.w2).map(|(z, w)| z.max(0.0) * w).sum::<f64>();
        let p = sigmoid(logit);
        let delta = (p - if label { 1.0 } else { 0.0 }) * scale;
        g.b2 += delta;
        for j in 0..self.hidden {
            g.w2[j] += delta * pre[j].max(0.0);
            if pre[j] > 0.0 {
                let dz = delta * self.w2[j];
                g.b1[j] += dz;
                for (gw, v) in g.w1[j * self.inputs..(j + 1) * self.inputs].iter_mut().zip(x) {
                    *gw += dz * v;
                }
            }
        }
        loss(p, label)
    }

    /// Gradient of the loss at one example, in the model's own shape.
    pub fn gradient(&self, x: &[f64], label: bool) -> FfnnModel {
        let mut g = self.zeros_like();
        self.accumulate_gradient(x, label, 1.0, &mut g);
        g
    }

    /// All parameters flattened as w1, b1, w2, b2.
    pub fn flat(&self) -> Vec<f64> {
        self.w1.iter().chain(&self.b1).chain(&self.w2).copied().chain([self.b2]).collect()
    }

    pub fn set_flat(&mut self, theta: &[f64]) {
        let (a, rest) = theta.split_at(self.w1.len());
        let (b, rest) = rest.split_at(self.b1.len());
        let (c, rest) = rest.split_at(self.w2.len());
        self.w1.copy_from_slice(a);
        self.b1.copy_from_slice(b);
        self.w2.copy_from_slice(c);
        self.b2 = rest[0];
    }

    pub fn to_container(&self, extra: &serde_json::Value) -> Result<Container> {
        let meta = FfnnMeta { inputs: self.inputs, hidden: self.hidden, extra: extra.clone() };
        let mut c = Container::new(FFNN_KIND, &meta)?;
        c.push("w1", &self.w1);
        c.push("b1", &self.b1);
        c.push("w2", &self.w2);
        c.push("b2", &[self.b2]);
        Ok(c)
    }

    pub fn from_container(c: &Container) -> Result<Self> {
        let meta: FfnnMeta = c.meta()?;
        let m = FfnnModel {
            inputs: meta.inputs,
            hidden: meta.hidden,
            w1: c.array("w1")?.to_vec(),
            b1: c.array("b1")?.to_vec(),
            w2: c.array("w2")?.to_vec(),
            b2: *c.array("b2")?.first().ok_or_else(|| Error::format(FFNN_KIND, "empty b2"))?,
        };
        if m.w1.len() != m.inputs * m.hidden || m.b1.len() != m.hidden || m.w2.len() != m.hidden {
            return Err(Error::format(FFNN_KIND, "array shapes disagree with metadata"));
        }
        Ok(m)
    }
}

/// Mini-batch RMSprop for `config.max_epochs` epochs on the mean cross-entropy.
pub fn fit_ffnn(rows: &[Vec<f64>], labels: &[bool], hidden: usize, config: &TrainConfig) -> Result<FfnnModel> {
    config.validate()?;
    if rows.len() != labels.len() {
        return Err(Error::invalid("feature rows and labels differ in length"));
    }
    if !labels.iter().any(|&l| l) || !labels.iter().any(|&l| !l) {
        return Err(Error::SingleClass("training labels"));
    }
    let inputs = rows[0].len();
    if rows.iter().any(|r| r.len() != inputs) {
        return Err(Error::invalid("ragged feature rows"));
    }
    let mut model = FfnnModel::init(inputs, hidden, config.seed)?;
    let mut state = model.zeros_like();
    let rms = config.rmsprop();
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed ^ 0x9e37_79b9_7f4a_7c15);
    let mut order: Vec<usize> = (0..rows.len()).collect();
    for epoch in 1..=config.max_epochs {
        order.shuffle(&mut rng);
        let mut total = 0.0;
        for batch in order.chunks(config.batch_size) {
            let mut grads = model.zeros_like();
            let scale = 1.0 / batch.len() as f64;
            for &i in batch {
                total += model.accumulate_gradient(&rows[i], labels[i], scale, &mut grads);
            }
            if config.l2 > 0.0 {
                for (g, w) in grads.w1.iter_mut().zip(&model.w1) {
                    *g += config.l2 * w;
                }
                for (g, w) in grads.w2.iter_mut().zip(&model.w2) {
                    *g += config.l2 * w;
                }
            }
            let g = [&grads.w1[..], &grads.b1[..], &grads.w2[..], std::slice::from_ref(&grads.b2)];
            for ((p, g), s) in model.groups_mut().into_iter().zip(g).zip(state.groups_mut()) {
                rmsprop_step(p, g, s, &rms);
            }
        }
        if !total.is_finite() {
            return Err(Error::NonFinite(format!("feed-forward training diverged in epoch {epoch}")));
        }
    }
    Ok(model)
}
