use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use readmit_core::embedding::Vocabulary;
use readmit_core::eval::c_statistic;
use readmit_core::model::{train, CnnHyper, CnnModel, TrainConfig};
use readmit_core::preprocess::TokenSequence;

const L: usize = 30;

/// Notes of filler words; positives carry "relapse", negatives "recovered".
fn separable(n: usize, seed: u64) -> (Vocabulary, Vec<(TokenSequence, bool)>) {
    let filler = ["alpha", "bravo", "charlie", "delta", "echo", "foxtrot", "golf", "hotel"];
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let docs: Vec<(Vec<String>, bool)> = (0..n)
        .map(|i| {
            let label = i % 2 == 0;
            let len = rng.gen_range(8..L);
            let mut words: Vec<String> = (0..len).map(|_| filler.choose(&mut rng).unwrap().to_string()).collect();
            let at = rng.gen_range(0..len);
            words[at] = if label { "relapse" } else { "recovered" }.to_string();
            (words, label)
        })
        .collect();
    let texts: Vec<&Vec<String>> = docs.iter().map(|(w, _)| w).collect();
    let vocab = Vocabulary::build(&texts, 1).unwrap();
    let data = docs.iter().map(|(w, y)| (TokenSequence::encode(w, &vocab, L).unwrap(), *y)).collect();
    (vocab, data)
}

fn fresh(vocab: &Vocabulary) -> CnnModel {
    CnnModel::new(CnnHyper::new(L, 8, 8), vocab.len(), 21).unwrap()
}

#[test]
fn loss_decreases_over_first_three_epochs() {
    let (vocab, data) = separable(20, 1);
    let cfg = TrainConfig { max_epochs: 3, patience: 10, ..TrainConfig::default() };
    let out = train(fresh(&vocab), &data, &data, &cfg).unwrap();
    assert_eq!(out.history.len(), 3);
    let losses: Vec<f64> = out.history.iter().map(|h| h.train_loss).collect();
    assert!(losses.windows(2).all(|w| w[1] < w[0]), "{losses:?}");
}

#[test]
fn zero_patience_runs_one_epoch() {
    let (vocab, data) = separable(20, 2);
    let cfg = TrainConfig { patience: 0, ..TrainConfig::default() };
    let out = train(fresh(&vocab), &data, &data, &cfg).unwrap();
    assert_eq!(out.history.len(), 1);
    assert_eq!(out.best_epoch, 1);
}

#[test]
fn learns_separable_notes_and_returns_best_snapshot() {
    let (vocab, data) = separable(200, 3);
    let (train_set, valid_set) = data.split_at(150);
    let cfg = TrainConfig { lr: 1e-2, max_epochs: 15, patience: 3, ..TrainConfig::default() };
    let out = train(fresh(&vocab), train_set, valid_set, &cfg).unwrap();
    let best = out.history.iter().map(|h| h.valid_c_statistic).fold(f64::MIN, f64::max);
    let xs: Vec<TokenSequence> = valid_set.iter().map(|(x, _)| x.clone()).collect();
    let ys: Vec<bool> = valid_set.iter().map(|(_, y)| *y).collect();
    let c = c_statistic(&out.model.predict_batch(&xs).unwrap(), &ys).unwrap();
    assert_eq!(c, best);
    assert_eq!(out.history[out.best_epoch - 1].valid_c_statistic, best);
    assert!(best > 0.95, "{best}");
}

#[test]
fn identical_runs_give_identical_models() {
    let (vocab, data) = separable(40, 4);
    let cfg = TrainConfig { max_epochs: 4, batch_size: 8, seed: 9, ..TrainConfig::default() };
    let a = train(fresh(&vocab), &data, &data, &cfg).unwrap();
    let b = train(fresh(&vocab), &data, &data, &cfg).unwrap();
    assert_eq!(a.model.to_bytes("v").unwrap(), b.model.to_bytes("v").unwrap());
    assert_eq!(a.history, b.history);
    let c = train(fresh(&vocab), &data, &data, &TrainConfig { seed: 10, ..cfg }).unwrap();
    assert_ne!(a.model.to_bytes("v").unwrap(), c.model.to_bytes("v").unwrap());
}

#[test]
fn single_class_validation_rejected() {
    let (vocab, data) = separable(20, 5);
    let positives: Vec<_> = data.iter().filter(|(_, y)| *y).cloned().collect();
    assert!(train(fresh(&vocab), &data, &positives, &TrainConfig::default()).is_err());
}
