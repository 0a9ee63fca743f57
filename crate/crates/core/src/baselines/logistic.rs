use rand::distributions::{Distribution, Uniform};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::container::Container;
use crate::{sigmoid, Error, Result};

pub const LOGISTIC_KIND: &str = "logistic";

/// A feature vector that can be dotted with, or accumulated into, a dense weight vector.
pub trait FeatureRow {
    fn dot(&self, w: &[f64]) -> f64;
    fn add_scaled(&self, a: f64, out: &mut [f64]);
}

impl FeatureRow for [f64] {
    fn dot(&self, w: &[f64]) -> f64 {
        self.iter().zip(w).map(|(x, y)| x * y).sum()
    }

    fn add_scaled(&self, a: f64, out: &mut [f64]) {
        for (o, x) in out.iter_mut().zip(self) {
            *o += a * x;
        }
    }
}

impl FeatureRow for Vec<f64> {
    fn dot(&self, w: &[f64]) -> f64 {
        self.as_slice().dot(w)
    }

    fn add_scaled(&self, a: f64, out: &mut [f64]) {
        self.as_slice().add_scaled(a, out)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearModel {
    pub weights: Vec<f64>,
    pub bias: f64,
}

impl LinearModel {
    pub fn logit<R: FeatureRow + ?Sized>(&self, x: &R) -> f64 {
        x.dot(&self.weights) + self.bias
    }

    pub fn predict<R: FeatureRow + ?Sized>(&self, x: &R) -> f64 {
        sigmoid(self.logit(x))
    }

    pub fn to_container(&self, meta: &serde_json::Value) -> Result<Container> {
        let mut c = Container::new(LOGISTIC_KIND, meta)?;
        c.push("weights", &self.weights);
        c.push("bias", &[self.bias]);
        Ok(c)
    }

    pub fn from_container(c: &Container) -> Result<Self> {
        let bias = c.array("bias")?;
        if bias.len() != 1 {
            return Err(Error::format(LOGISTIC_KIND, "bias must hold one value"));
        }
        Ok(LinearModel { weights: c.array("weights")?.to_vec(), bias: bias[0] })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LogisticConfig {
    pub l2: f64,
    pub lr: f64,
    pub epochs: usize,
    pub seed: u64,
}

impl Default for LogisticConfig {
    fn default() -> Self {
        LogisticConfig { l2: 1e-4, lr: 1.0, epochs: 500, seed: 0 }
    }
}

fn check_labels(n_rows: usize, labels: &[bool]) -> Result<()> {
    if n_rows != labels.len() {
        return Err(Error::invalid("feature rows and labels differ in length"));
    }
    if !labels.iter().any(|&l| l) || !labels.iter().any(|&l| !l) {
        return Err(Error::SingleClass("training labels"));
    }
    Ok(())
}

/// Mean log loss plus `l2/2 · ‖w‖²` (the bias is not penalised).
pub fn logistic_objective<R: FeatureRow>(model: &LinearModel, rows: &[R], labels: &[bool], l2: f64) -> f64 {
    let n = rows.len() as f64;
    let data: f64 = rows
        .iter()
        .zip(labels)
        .map(|(x, &y)| {
            let z = model.logit(x);
            // log(1 + e^z) - y z, stable
            let softplus = if z > 0.0 { z + (-z).exp().ln_1p() } else { z.exp().ln_1p() };
            softplus - if y { z } else { 0.0 }
        })
        .sum();
    data / n + 0.5 * l2 * model.weights.iter().map(|w| w * w).sum::<f64>()
}

fn data_gradient<R: FeatureRow>(model: &LinearModel, rows: &[R], labels: &[bool]) -> (Vec<f64>, f64) {
    let n = rows.len() as f64;
    let mut gw = vec![0.0; model.weights.len()];
    let mut gb = 0.0;
    for (x, &y) in rows.iter().zip(labels) {
        let r = (model.predict(x) - if y { 1.0 } else { 0.0 }) / n;
        x.add_scaled(r, &mut gw);
        gb += r;
    }
    (gw, gb)
}

/// Gradient of [`logistic_objective`] with respect to (weights, bias).
pub fn logistic_gradient<R: FeatureRow>(model: &LinearModel, rows: &[R], labels: &[bool], l2: f64) -> (Vec<f64>, f64) {
    let (mut gw, gb) = data_gradient(model, rows, labels);
    for (g, w) in gw.iter_mut().zip(&model.weights) {
        *g += l2 * w;
    }
    (gw, gb)
}

/// Full-batch gradient descent on the L2-regularised log loss.
///
/// The penalty is applied as a proximal (implicit) step,
/// `w ← (w − lr·∇data) / (1 + lr·l2)`, which is stable for any `l2`.
pub fn fit_logistic<R: FeatureRow>(
    rows: &[R],
    n_features: usize,
    labels: &[bool],
    config: &LogisticConfig,
) -> Result<LinearModel> {
    check_labels(rows.len(), labels)?;
    if !(config.lr > 0.0) || !(config.l2 >= 0.0) {
        return Err(Error::invalid("logistic regression needs lr > 0 and l2 >= 0"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let init = Uniform::new_inclusive(-0.01, 0.01);
    let mut model = LinearModel { weights: (0..n_features).map(|_| init.sample(&mut rng)).collect(), bias: 0.0 };
    let shrink = 1.0 / (1.0 + config.lr * config.l2);
    for _ in 0..config.epochs {
        let (gw, gb) = data_gradient(&model, rows, labels);
        for (w, g) in model.weights.iter_mut().zip(&gw) {
            *w = (*w - config.lr * g) * shrink;
        }
        model.bias -= config.lr * gb;
    }
    if !model.bias.is_finite() || model.weights.iter().any(|w| !w.is_finite()) {
        return Err(Error::NonFinite("logistic regression diverged".into()));
    }
    Ok(model)
}

/// Per-feature z-scoring fitted on training rows. Constant features are centred only.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Standardizer {
    pub mean: Vec<f64>,
    pub scale: Vec<f64>,
}

impl Standardizer {
    pub fn fit(rows: &[Vec<f64>]) -> Result<Self> {
        let first = rows.first().ok_or(Error::Empty("standardizer input"))?;
        let d = first.len();
        let n = rows.len() as f64;
        let mut mean = vec![0.0; d];
        for r in rows {
            if r.len() != d {
                return Err(Error::invalid("ragged feature rows"));
            }
            for (m, x) in mean.iter_mut().zip(r) {
                *m += x / n;
            }
        }
        let mut scale = vec![0.0; d];
        for r in rows {
            for ((s, x), m) in scale.iter_mut().zip(r).zip(&mean) {
                *s += (x - m) * (x - m) / n;
            }
        }
        for s in &mut scale {
            *s = if *s > 0.0 { s.sqrt() } else { 1.0 };
        }
        Ok(Standardizer { mean, scale })
    }

    pub fn apply(&self, row: &[f64]) -> Vec<f64> {
        row.iter().zip(&self.mean).zip(&self.scale).map(|((x, m), s)| (x - m) / s).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    fn random_data(n: usize, d: usize, seed: u64) -> (Vec<Vec<f64>>, Vec<bool>) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let rows: Vec<Vec<f64>> = (0..n).map(|_| (0..d).map(|_| rng.gen_range(-2.0..2.0)).collect()).collect();
        let labels = rows.iter().map(|r| rng.gen::<f64>() < sigmoid(r[0] - 0.5 * r[1])).collect();
        (rows, labels)
    }

    #[test]
    fn separable_one_dimensional_data() {
        let rows: Vec<Vec<f64>> = (-10..10).map(|i| vec![i as f64 + 0.5]).collect();
        let labels: Vec<bool> = rows.iter().map(|r| r[0] > 0.0).collect();
        let cfg = LogisticConfig { l2: 0.0, lr: 0.5, epochs: 2000, seed: 3 };
        let m = fit_logistic(&rows, 1, &labels, &cfg).unwrap();
        let correct = rows.iter().zip(&labels).filter(|(r, &y)| (m.predict(*r) >= 0.5) == y).count();
        assert_eq!(correct, rows.len());
    }

    #[test]
    fn heavy_penalty_gives_base_rate() {
        let (rows, labels) = random_data(400, 3, 5);
        let cfg = LogisticConfig { l2: 1e6, lr: 1.0, epochs: 300, seed: 1 };
        let m = fit_logistic(&rows, 3, &labels, &cfg).unwrap();
        let rate = labels.iter().filter(|&&y| y).count() as f64 / labels.len() as f64;
        assert!(m.weights.iter().all(|w| w.abs() < 1e-3));
        assert!((m.bias - (rate / (1.0 - rate)).ln()).abs() < 1e-3);
    }

    #[test]
    fn gradient_matches_finite_differences() {
        for seed in 0..5 {
            let (rows, labels) = random_data(50, 4, seed);
            let mut rng = ChaCha8Rng::seed_from_u64(100 + seed);
            let model = LinearModel {
                weights: (0..4).map(|_| rng.gen_range(-1.0..1.0)).collect(),
                bias: rng.gen_range(-1.0..1.0),
            };
            let l2 = 0.1;
            let (gw, gb) = logistic_gradient(&model, &rows, &labels, l2);
            let h = 1e-5;
            let unflatten = |theta: &[f64]| LinearModel { weights: theta[..4].to_vec(), bias: theta[4] };
            let mut theta: Vec<f64> = model.weights.iter().copied().chain([model.bias]).collect();
            let analytic: Vec<f64> = gw.iter().copied().chain([gb]).collect();
            for i in 0..theta.len() {
                let x0 = theta[i];
                theta[i] = x0 + h;
                let up = logistic_objective(&unflatten(&theta), &rows, &labels, l2);
                theta[i] = x0 - h;
                let down = logistic_objective(&unflatten(&theta), &rows, &labels, l2);
                theta[i] = x0;
                let num = (up - down) / (2.0 * h);
                let rel = (num - analytic[i]).abs() / num.abs().max(analytic[i].abs()).max(1e-6);
                assert!(rel < 1e-6, "param {i}: {num} vs {}", analytic[i]);
            }
        }
    }

    #[test]
    fn single_class_rejected_and_deterministic() {
        let (rows, _) = random_data(10, 2, 1);
        assert!(matches!(fit_logistic(&rows, 2, &[true; 10], &LogisticConfig::default()), Err(Error::SingleClass(_))));
        let (rows, labels) = random_data(60, 2, 2);
        let cfg = LogisticConfig { epochs: 50, ..Default::default() };
        assert_eq!(fit_logistic(&rows, 2, &labels, &cfg).unwrap(), fit_logistic(&rows, 2, &labels, &cfg).unwrap());
    }

    #[test]
    fn standardizer_centres_and_scales() {
        let rows = vec![vec![1.0, 5.0], vec![3.0, 5.0]];
        let s = Standardizer::fit(&rows).unwrap();
        assert_eq!(s.apply(&[1.0, 5.0]), vec![-1.0, 0.0]);
        assert_eq!(s.apply(&[3.0, 6.0]), vec![1.0, 1.0]);
    }
}
