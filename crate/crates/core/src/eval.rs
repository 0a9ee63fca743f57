//! C-statistic (ROC AUC), confusion counts and calibration bins.

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// C-statistic with ties counted one half, via average ranks in O(n log n).
///
/// Requires at least one positive and one negative.
pub fn c_statistic(scores: &[f64], labels: &[bool]) -> Result<f64> {
    check_pairs(scores, labels)?;
    let n_pos = labels.iter().filter(|&&l| l).count();
    let n_neg = labels.len() - n_pos;
    if n_pos == 0 || n_neg == 0 {
        return Err(Error::SingleClass("c-statistic input"));
    }
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[a].total_cmp(&scores[b]));

    // Twice the positive rank sum; average ranks of tied blocks are
    // half-integers, so doubling keeps everything integral.
    let mut twice_rank_sum: u128 = 0;
    let mut i = 0;
    while i < order.len() {
        let mut j = i + 1;
        while j < order.len() && scores[order[j]] == scores[order[i]] {
            j += 1;
        }
        // ranks i+1 ..= j, average (i + 1 + j) / 2
        let twice_avg = (i + 1 + j) as u128;
        let pos_in_block = order[i..j].iter().filter(|&&k| labels[k]).count() as u128;
        twice_rank_sum += twice_avg * pos_in_block;
        i = j;
    }
    let (p, n) = (n_pos as u128, n_neg as u128);
    // 2U = 2R - p(p+1)
    let twice_u = twice_rank_sum - p * (p + 1);
    Ok(ratio(twice_u, 2 * p * n))
}

/// `num / den`, computed so that `ratio(k, m) + ratio(m - k, m) == 1.0` exactly.
fn ratio(num: u128, den: u128) -> f64 {
    if 2 * num <= den {
        num as f64 / den as f64
    } else {
        1.0 - (den - num) as f64 / den as f64
    }
}

fn check_pairs(scores: &[f64], labels: &[bool]) -> Result<()> {
    if scores.len() != labels.len() {
        return Err(Error::invalid("scores and labels differ in length"));
    }
    if let Some(s) = scores.iter().find(|s| !s.is_finite()) {
        return Err(Error::NonFinite(format!("score {s}")));
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Confusion {
    pub tp: usize,
    pub fp: usize,
    pub tn: usize,
    pub fn_: usize,
    /// `None` when the denominator is zero.
    pub sensitivity: Option<f64>,
    pub specificity: Option<f64>,
    pub ppv: Option<f64>,
}

fn frac(a: usize, b: usize) -> Option<f64> {
    (b > 0).then(|| a as f64 / b as f64)
}

/// Confusion cells with `score >= threshold` predicting positive.
pub fn confusion_at(scores: &[f64], labels: &[bool], threshold: f64) -> Confusion {
    let (mut tp, mut fp, mut tn, mut fn_) = (0, 0, 0, 0);
    for (&s, &l) in scores.iter().zip(labels) {
        match (s >= threshold, l) {
            (true, true) => tp += 1,
            (true, false) => fp += 1,
            (false, false) => tn += 1,
            (false, true) => fn_ += 1,
        }
    }
    Confusion {
        tp,
        fp,
        tn,
        fn_,
        sensitivity: frac(tp, tp + fn_),
        specificity: frac(tn, tn + fp),
        ppv: frac(tp, tp + fp),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CalibrationBin {
    pub lower: f64,
    pub upper: f64,
    /// `None` for empty bins.
    pub mean_score: Option<f64>,
    pub observed_rate: Option<f64>,
    pub count: usize,
}

/// Equal-width bins over [0, 1]; a score of exactly 1 falls in the last bin.
pub fn calibration_bins(scores: &[f64], labels: &[bool], bins: usize) -> Result<Vec<CalibrationBin>> {
    if bins < 1 {
        return Err(Error::invalid("need at least one calibration bin"));
    }
    check_pairs(scores, labels)?;
    if let Some(s) = scores.iter().find(|s| !(0.0..=1.0).contains(*s)) {
        return Err(Error::invalid(format!("score {s} outside [0, 1]")));
    }
    let mut sum = vec![0.0; bins];
    let mut pos = vec![0usize; bins];
    let mut count = vec![0usize; bins];
    for (&s, &l) in scores.iter().zip(labels) {
        let b = ((s * bins as f64) as usize).min(bins - 1);
        sum[b] += s;
        pos[b] += l as usize;
        count[b] += 1;
    }
    Ok((0..bins)
        .map(|b| CalibrationBin {
            lower: b as f64 / bins as f64,
            upper: (b + 1) as f64 / bins as f64,
            mean_score: (count[b] > 0).then(|| sum[b] / count[b] as f64),
            observed_rate: frac(pos[b], count[b]),
            count: count[b],
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    /// Every (positive, negative) pair, ties worth one half.
    fn pairwise(scores: &[f64], labels: &[bool]) -> f64 {
        let mut wins = 0.0;
        let mut pairs = 0.0;
        for (i, &li) in labels.iter().enumerate() {
            if !li {
                continue;
            }
            for (j, &lj) in labels.iter().enumerate() {
                if lj {
                    continue;
                }
                pairs += 1.0;
                if scores[i] > scores[j] {
                    wins += 1.0;
                } else if scores[i] == scores[j] {
                    wins += 0.5;
                }
            }
        }
        wins / pairs
    }

    #[test]
    fn closed_forms() {
        assert_eq!(c_statistic(&[0.1, 0.2, 0.8, 0.9], &[false, false, true, true]).unwrap(), 1.0);
        assert_eq!(c_statistic(&[0.3; 5], &[true, false, true, false, false]).unwrap(), 0.5);
        assert_eq!(c_statistic(&[0.9, 0.1], &[false, true]).unwrap(), 0.0);
        assert!(matches!(c_statistic(&[0.1, 0.2], &[true, true]), Err(Error::SingleClass(_))));
        assert!(c_statistic(&[f64::NAN, 0.2], &[true, false]).is_err());
    }

    #[test]
    fn confusion_cells() {
        let s = [0.1, 0.4, 0.6, 0.9];
        let l = [false, true, false, true];
        let c = confusion_at(&s, &l, 0.5);
        assert_eq!((c.tp, c.fp, c.tn, c.fn_), (1, 1, 1, 1));
        assert_eq!(c.sensitivity, Some(0.5));
        let lo = confusion_at(&s, &l, 0.0);
        assert_eq!((lo.fn_, lo.tn), (0, 0));
        let hi = confusion_at(&s, &l, 1.0);
        assert_eq!((hi.tp, hi.fp), (0, 0));
        assert_eq!(hi.ppv, None);
        // threshold is inclusive
        assert_eq!(confusion_at(&s, &l, 0.9).tp, 1);
    }

    #[test]
    fn calibration() {
        let s = [0.05, 0.15, 0.95, 1.0];
        let l = [false, true, true, true];
        let one = calibration_bins(&s, &l, 1).unwrap();
        assert_eq!(one[0].observed_rate, Some(0.75));
        let ten = calibration_bins(&s, &l, 10).unwrap();
        assert_eq!(ten[9].count, 2);
        assert_eq!(ten[5].count, 0);
        assert_eq!(ten[5].mean_score, None);
        assert!(calibration_bins(&[1.5], &[true], 2).is_err());
        assert!(calibration_bins(&s, &l, 0).is_err());
    }

    proptest! {
        #[test]
        fn rank_form_matches_pairwise(
            data in proptest::collection::vec((0u8..12, any::<bool>()), 2..300)
        ) {
            let scores: Vec<f64> = data.iter().map(|d| d.0 as f64 / 4.0).collect();
            let labels: Vec<bool> = data.iter().map(|d| d.1).collect();
            prop_assume!(labels.iter().any(|&l| l) && labels.iter().any(|&l| !l));
            let c = c_statistic(&scores, &labels).unwrap();
            prop_assert!((c - pairwise(&scores, &labels)).abs() <= 1e-12);
            let neg: Vec<f64> = scores.iter().map(|s| -s).collect();
            prop_assert_eq!(c + c_statistic(&neg, &labels).unwrap(), 1.0);
            let squashed: Vec<f64> = scores.iter().map(|s| (3.0 * s).exp() + 7.0).collect();
            prop_assert_eq!(c, c_statistic(&squashed, &labels).unwrap());
        }

        #[test]
        fn calibration_is_permutation_invariant(
            data in proptest::collection::vec((0.0f64..=1.0, any::<bool>()), 1..100), bins in 1usize..12
        ) {
            let scores: Vec<f64> = data.iter().map(|d| d.0).collect();
            let labels: Vec<bool> = data.iter().map(|d| d.1).collect();
            let a = calibration_bins(&scores, &labels, bins).unwrap();
            let rs: Vec<f64> = scores.iter().rev().copied().collect();
            let rl: Vec<bool> = labels.iter().rev().copied().collect();
            let b = calibration_bins(&rs, &rl, bins).unwrap();
            for (x, y) in a.iter().zip(&b) {
                prop_assert_eq!(x.count, y.count);
                prop_assert_eq!(x.observed_rate, y.observed_rate);
                if let (Some(m1), Some(m2)) = (x.mean_score, y.mean_score) {
                    prop_assert!((m1 - m2).abs() < 1e-12);
                }
            }
        }
    }
}
