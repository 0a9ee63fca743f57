//! Synthetic discharge notes with planted risk trigrams.
//!
//! Each note belongs to one topic and is filled with pseudo-words from that
//! topic's pool. Every planted trigram is inserted independently with its own
//! probability, and the label is drawn from
//! `Bernoulli(σ(base_log_odds + Σ weights of planted trigrams))`.
//!
//! LACE features follow a linear rule on a latent
//! `u = lace_signal · (2y − 1) + e`, `e ~ Uniform(−1, 1)`:
//!
//! - length of stay: `round(4 + 2u + Uniform(−2, 2))` clamped to 0..=30
//! - acute admission: `Uniform(0, 1) < σ(u)`
//! - Charlson index: `round(2 + u + Uniform(−1.5, 1.5))` clamped to 0..=10
//! - ED visits: `round(1 + u + Uniform(−1, 1))` clamped to 0..=8
//!
//! Positive visits get a follow-up admission for the same patient inside the
//! 30-day window whose note is too short to be an index visit itself, so the
//! corpus labeling rules recover exactly the generated label.

use std::collections::BTreeSet;

use rand::distributions::{Distribution, Uniform};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::corpus::{Disposition, LaceFeatures, VisitRecord, SECONDS_PER_DAY};
use crate::{sigmoid, Error, Result};

/// Upper bound on the number of planted trigrams `bayes_auc` will enumerate.
pub const MAX_ENUMERATED_TRIGRAMS: usize = 20;

const EPOCH_START: i64 = 1_500_000_000;
const SYLLABLES: [&str; 20] = [
    "ba", "ce", "di", "fo", "gu", "ka", "le", "mi", "no", "pu", "ra", "se", "ti", "vo", "zu", "sha", "tre", "plo",
    "bri", "den",
];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Topic {
    pub name: String,
    pub pool: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlantedTrigram {
    pub phrase: String,
    pub weight: f64,
    /// Chance the trigram is inserted into any given note.
    pub probability: f64,
}

impl PlantedTrigram {
    pub fn new(phrase: &str, weight: f64, probability: f64) -> Self {
        PlantedTrigram { phrase: phrase.to_string(), weight, probability }
    }

    pub fn tokens(&self) -> Vec<&str> {
        self.phrase.split_whitespace().collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeneratorSpec {
    pub topics: Vec<Topic>,
    pub risk_trigrams: Vec<PlantedTrigram>,
    pub protective_trigrams: Vec<PlantedTrigram>,
    pub base_log_odds: f64,
    /// Inclusive bounds on the number of words left after preprocessing.
    pub note_length: (usize, usize),
    /// Probability a filler word is drawn from the note's own topic rather than another one.
    pub topic_purity: f64,
    pub section_headers: Vec<String>,
    pub names: Vec<String>,
    /// Per-note probability of inserting a name and a date that de-identification should remove.
    pub noise_rate: f64,
    pub lace_signal: f64,
    pub seed: u64,
}

/// `count` pseudo-words per prefix, built from two or three syllables.
pub fn pseudo_words(prefix: &str, count: usize) -> Vec<String> {
    let mut words = Vec::with_capacity(count);
    'outer: for a in SYLLABLES {
        for b in SYLLABLES {
            if words.len() == count {
                break 'outer;
            }
            words.push(format!("{prefix}{a}{b}"));
        }
    }
    'outer3: for a in SYLLABLES {
        for b in SYLLABLES {
            for c in SYLLABLES {
                if words.len() >= count {
                    break 'outer3;
                }
                words.push(format!("{prefix}{a}{b}{c}"));
            }
        }
    }
    words
}

fn topic(name: &str, prefix: &str) -> Topic {
    Topic { name: name.to_string(), pool: pseudo_words(prefix, 200) }
}

fn default_headers() -> Vec<String> {
    [
        "CHIEF COMPLAINT:",
        "HISTORY OF PRESENT ILLNESS:",
        "HOSPITAL COURSE:",
        "PROCEDURES PERFORMED:",
        "DISCHARGE MEDICATIONS:",
        "DISCHARGE CONDITION:",
        "DISCHARGE INSTRUCTIONS:",
    ]
    .map(String::from)
    .to_vec()
}

impl Default for GeneratorSpec {
    fn default() -> Self {
        let p = 0.2;
        GeneratorSpec {
            topics: vec![topic("cardiac", "cardio"), topic("pulmonary", "pulmo"), topic("neurologic", "neuro")],
            risk_trigrams: vec![
                PlantedTrigram::new("poor prognosis overall", 2.0, p),
                PlantedTrigram::new("refused further treatment", 1.5, p),
                PlantedTrigram::new("chronic steroid therapy", 1.0, p),
                PlantedTrigram::new("insulin dependent diabetes", 1.0, p),
                PlantedTrigram::new("biopsy results pending", 1.2, p),
                PlantedTrigram::new("cardiac catheterization performed", 0.8, p),
            ],
            protective_trigrams: vec![
                PlantedTrigram::new("ambulating without assistance", -1.5, p),
                PlantedTrigram::new("tolerating regular diet", -1.0, p),
                PlantedTrigram::new("returned to baseline", -1.2, p),
            ],
            base_log_odds: -1.5,
            note_length: (100, 700),
            topic_purity: 0.9,
            section_headers: default_headers(),
            names: ["Smith", "Johnson", "Garcia", "Nguyen", "Okafor", "Kowalski", "Haddad", "Larsen"]
                .map(String::from)
                .to_vec(),
            noise_rate: 0.5,
            lace_signal: 0.15,
            seed: 7,
        }
    }
}

impl GeneratorSpec {
    /// Two topics and no planted signal, for embedding checks.
    pub fn two_topic(seed: u64) -> Self {
        GeneratorSpec {
            topics: vec![topic("cardiac", "cardio"), topic("pulmonary", "pulmo")],
            risk_trigrams: Vec::new(),
            protective_trigrams: Vec::new(),
            base_log_odds: 0.0,
            note_length: (100, 300),
            topic_purity: 1.0,
            seed,
            ..GeneratorSpec::default()
        }
    }

    /// Risk trigrams followed by protective ones; `SyntheticVisit::planted` indexes this list.
    pub fn trigrams(&self) -> Vec<&PlantedTrigram> {
        self.risk_trigrams.iter().chain(&self.protective_trigrams).collect()
    }

    /// Every token that appears in a planted trigram.
    pub fn signal_tokens(&self) -> BTreeSet<String> {
        self.trigrams().iter().flat_map(|t| t.tokens()).map(str::to_string).collect()
    }

    pub fn validate(&self) -> Result<()> {
        if self.topics.is_empty() || self.topics.iter().any(|t| t.pool.is_empty()) {
            return Err(Error::Empty("topic token pool"));
        }
        let signal = self.signal_tokens();
        let names: BTreeSet<String> = self.names.iter().map(|n| n.to_lowercase()).collect();
        for t in &self.topics {
            for w in &t.pool {
                if w.is_empty() || !w.chars().all(|c| c.is_ascii_lowercase()) {
                    return Err(Error::invalid(format!("pool word {w:?} is not lowercase ascii letters")));
                }
                if signal.contains(w) || names.contains(w) {
                    return Err(Error::invalid(format!("pool word {w:?} collides with a trigram token or name")));
                }
            }
        }
        for t in self.trigrams() {
            let toks = t.tokens();
            if toks.len() != 3 || toks.iter().any(|w| !w.chars().all(|c| c.is_ascii_lowercase())) {
                return Err(Error::invalid(format!("{:?} is not three lowercase words", t.phrase)));
            }
            if !t.weight.is_finite() || !(0.0..=1.0).contains(&t.probability) {
                return Err(Error::invalid(format!("bad weight or probability for {:?}", t.phrase)));
            }
            if toks.iter().any(|w| names.contains(*w)) {
                return Err(Error::invalid(format!("{:?} contains a listed name", t.phrase)));
            }
        }
        if self.risk_trigrams.iter().any(|t| t.weight < 0.0) || self.protective_trigrams.iter().any(|t| t.weight > 0.0)
        {
            return Err(Error::invalid("risk weights must be ≥ 0 and protective weights ≤ 0"));
        }
        let (lo, hi) = self.note_length;
        if lo > hi || lo < 3 * self.trigrams().len() + 20 {
            return Err(Error::invalid("note_length must be ordered and leave room for every trigram"));
        }
        if !self.base_log_odds.is_finite() || !self.lace_signal.is_finite() {
            return Err(Error::invalid("base_log_odds and lace_signal must be finite"));
        }
        for p in [self.topic_purity, self.noise_rate] {
            if !(0.0..=1.0).contains(&p) {
                return Err(Error::invalid("topic_purity and noise_rate must lie in [0, 1]"));
            }
        }
        if self.section_headers.is_empty() {
            return Err(Error::Empty("section headers"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticVisit {
    pub record: VisitRecord,
    pub label: bool,
    /// Indices into `GeneratorSpec::trigrams`.
    pub planted: Vec<usize>,
    /// True generative log-odds of readmission.
    pub log_odds: f64,
    pub topic: usize,
    /// The follow-up admission that makes a positive visit a readmission.
    pub readmission: Option<VisitRecord>,
}

/// All records of a generated corpus, each index visit followed by its readmission if any.
pub fn corpus_records(visits: &[SyntheticVisit]) -> Vec<VisitRecord> {
    visits.iter().flat_map(|v| std::iter::once(v.record.clone()).chain(v.readmission.clone())).collect()
}

enum Unit {
    Word(String),
    Phrase(String),
}

fn round_clamp(x: f64, hi: u32) -> u32 {
    x.round().clamp(0.0, hi as f64) as u32
}

struct Generator<'a> {
    spec: &'a GeneratorSpec,
    rng: ChaCha8Rng,
    clock: i64,
}

impl Generator<'_> {
    fn lace(&mut self, label: bool) -> LaceFeatures {
        let rng = &mut self.rng;
        let sign = if label { 1.0 } else { -1.0 };
        let u = self.spec.lace_signal * sign + rng.gen_range(-1.0..=1.0);
        LaceFeatures {
            length_of_stay_days: round_clamp(4.0 + 2.0 * u + rng.gen_range(-2.0..=2.0), 30),
            acute_admission: rng.gen::<f64>() < sigmoid(u),
            charlson_comorbidity_index: round_clamp(2.0 + u + rng.gen_range(-1.5..=1.5), 10),
            ed_visits_prior_6mo: round_clamp(1.0 + u + rng.gen_range(-1.0..=1.0), 8),
        }
    }

    fn note(&mut self, topic: usize, planted: &[usize]) -> String {
        let spec = self.spec;
        let trigrams = spec.trigrams();
        let rng = &mut self.rng;
        let total = rng.gen_range(spec.note_length.0..=spec.note_length.1);
        let filler = total - 3 * planted.len();
        let pick = Uniform::new(0, spec.topics.len());
        let mut units: Vec<Unit> = (0..filler)
            .map(|_| {
                let t = if spec.topics.len() > 1 && rng.gen::<f64>() >= spec.topic_purity {
                    let mut other = pick.sample(rng);
                    while other == topic {
                        other = pick.sample(rng);
                    }
                    other
                } else {
                    topic
                };
                Unit::Word(spec.topics[t].pool.choose(rng).expect("pool checked non-empty").clone())
            })
            .collect();
        for &k in planted {
            let at = rng.gen_range(0..=units.len());
            units.insert(at, Unit::Phrase(trigrams[k].phrase.clone()));
        }
        if !spec.names.is_empty() && rng.gen::<f64>() < spec.noise_rate {
            let name = spec.names.choose(rng).expect("non-empty").clone();
            let at = rng.gen_range(0..=units.len());
            units.insert(at, Unit::Phrase(name));
            let date =
                format!("{:02}/{:02}/{}", rng.gen_range(1..=12), rng.gen_range(1..=28), rng.gen_range(2010..=2020));
            let at = rng.gen_range(0..=units.len());
            units.insert(at, Unit::Phrase(date));
        }

        let mut headers = spec.section_headers.clone();
        headers.shuffle(rng);
        let sections = rng.gen_range(1..=headers.len().min(units.len()));
        let mut cuts: Vec<usize> =
            rand::seq::index::sample(rng, units.len() - 1, sections - 1).into_iter().map(|c| c + 1).collect();
        cuts.sort_unstable();
        cuts.push(units.len());

        let mut text = String::new();
        let mut start = 0;
        for (header, end) in headers.iter().zip(cuts) {
            text.push_str(header);
            text.push('\n');
            let body: Vec<&str> = units[start..end]
                .iter()
                .map(|u| match u {
                    Unit::Word(w) | Unit::Phrase(w) => w.as_str(),
                })
                .collect();
            text.push_str(&body.join(" "));
            text.push('\n');
            start = end;
        }
        text
    }

    fn visit(&mut self, index: usize) -> SyntheticVisit {
        let spec = self.spec;
        let trigrams = spec.trigrams();
        let topic = self.rng.gen_range(0..spec.topics.len());
        let planted: Vec<usize> =
            (0..trigrams.len()).filter(|&k| self.rng.gen::<f64>() < trigrams[k].probability).collect();
        let log_odds = planted.iter().fold(spec.base_log_odds, |s, &k| s + trigrams[k].weight);
        let label = self.rng.gen::<f64>() < sigmoid(log_odds);
        let note_text = self.note(topic, &planted);
        let lace = self.lace(label);

        let admit_time = self.clock;
        let extra = self.rng.gen_range(1..SECONDS_PER_DAY);
        let discharge_time = admit_time + lace.length_of_stay_days as i64 * SECONDS_PER_DAY + extra;
        let disposition = if self.rng.gen::<f64>() < 0.8 { Disposition::Home } else { Disposition::Facility };
        let patient_id = format!("P{index:07}");
        let condition = spec.topics[topic].name.clone();
        let readmission = label.then(|| {
            let gap = self.rng.gen_range(2 * SECONDS_PER_DAY..=29 * SECONDS_PER_DAY);
            let admit = discharge_time + gap;
            VisitRecord {
                visit_id: format!("V{index:07}R"),
                patient_id: patient_id.clone(),
                admit_time: admit,
                discharge_time: admit + 2 * SECONDS_PER_DAY,
                disposition: Disposition::Home,
                death_time: None,
                planned_flags: BTreeSet::new(),
                primary_condition: condition.clone(),
                note_text: "READMISSION:\nreturned to hospital\n".to_string(),
                lace: LaceFeatures { length_of_stay_days: 2, acute_admission: true, ..LaceFeatures::default() },
            }
        });
        self.clock += 6 * 3600;
        SyntheticVisit {
            record: VisitRecord {
                visit_id: format!("V{index:07}"),
                patient_id,
                admit_time,
                discharge_time,
                disposition,
                death_time: None,
                planned_flags: BTreeSet::new(),
                primary_condition: condition,
                note_text,
                lace,
            },
            label,
            planted,
            log_odds,
            topic,
            readmission,
        }
    }
}

/// Generates `n` index visits from one seeded stream, so the first `n`
/// visits do not depend on how many more are requested.
pub fn generate(spec: &GeneratorSpec, n: usize) -> Result<Vec<SyntheticVisit>> {
    if n == 0 {
        return Err(Error::invalid("n must be at least 1"));
    }
    spec.validate()?;
    let mut g = Generator { spec, rng: ChaCha8Rng::seed_from_u64(spec.seed), clock: EPOCH_START };
    Ok((0..n).map(|i| g.visit(i)).collect())
}

/// Exact c-statistic of the true log-odds against the generative label
/// distribution, by enumerating which trigrams are planted. Ties count 1/2.
pub fn bayes_auc(spec: &GeneratorSpec) -> Result<f64> {
    let trigrams = spec.trigrams();
    if trigrams.len() > MAX_ENUMERATED_TRIGRAMS {
        return Err(Error::invalid(format!(
            "{} planted trigrams exceed the enumeration bound of {MAX_ENUMERATED_TRIGRAMS}",
            trigrams.len()
        )));
    }
    // (score, positive mass, negative mass) per configuration
    let mut configs: Vec<(f64, f64, f64)> = (0..1usize << trigrams.len())
        .filter_map(|mask| {
            let mut mass = 1.0;
            let mut score = spec.base_log_odds;
            for (k, t) in trigrams.iter().enumerate() {
                if mask >> k & 1 == 1 {
                    mass *= t.probability;
                    score += t.weight;
                } else {
                    mass *= 1.0 - t.probability;
                }
            }
            (mass > 0.0).then(|| (score, mass * sigmoid(score), mass * (1.0 - sigmoid(score))))
        })
        .collect();
    configs.sort_by(|a, b| a.0.total_cmp(&b.0));
    let pos: f64 = configs.iter().map(|c| c.1).sum();
    let neg: f64 = configs.iter().map(|c| c.2).sum();
    if pos <= 0.0 || neg <= 0.0 {
        return Err(Error::SingleClass("generative label distribution"));
    }
    let mut below = 0.0;
    let mut wins = 0.0;
    let mut i = 0;
    while i < configs.len() {
        let mut j = i;
        let (mut p, mut q) = (0.0, 0.0);
        while j < configs.len() && configs[j].0 == configs[i].0 {
            p += configs[j].1;
            q += configs[j].2;
            j += 1;
        }
        wins += p * (below + 0.5 * q);
        below += q;
        i = j;
    }
    Ok(wins / (pos * neg))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::derive_labels;

    fn tiny(risk: Vec<PlantedTrigram>, base: f64) -> GeneratorSpec {
        GeneratorSpec {
            risk_trigrams: risk,
            protective_trigrams: Vec::new(),
            base_log_odds: base,
            ..Default::default()
        }
    }

    #[test]
    fn degenerate_bayes_auc() {
        assert_eq!(bayes_auc(&tiny(Vec::new(), -1.0)).unwrap(), 0.5);
        assert_eq!(bayes_auc(&tiny(vec![PlantedTrigram::new("a b c", 2.0, 1.0)], -2.0)).unwrap(), 0.5);
    }

    #[test]
    fn four_case_enumeration() {
        // planted (prob 1/2): score 2; absent: score 0
        let spec = tiny(vec![PlantedTrigram::new("a b c", 2.0, 0.5)], 0.0);
        let (s1, s0) = (sigmoid(2.0), 0.5);
        let pos_hi = 0.5 * s1;
        let pos_lo = 0.5 * s0;
        let neg_hi = 0.5 * (1.0 - s1);
        let neg_lo = 0.5 * (1.0 - s0);
        let expected =
            (pos_hi * neg_lo + 0.5 * (pos_hi * neg_hi + pos_lo * neg_lo)) / ((pos_hi + pos_lo) * (neg_hi + neg_lo));
        assert!((bayes_auc(&spec).unwrap() - expected).abs() < 1e-15);
    }

    #[test]
    fn enumeration_bound() {
        let many = (0..21).map(|i| PlantedTrigram::new(&format!("x{i} y z"), 0.1, 0.5)).collect();
        assert!(bayes_auc(&tiny(many, 0.0)).is_err());
    }

    #[test]
    fn always_planted_balances_base_rate() {
        let spec = tiny(vec![PlantedTrigram::new("poor prognosis overall", 2.0, 1.0)], -2.0);
        let v = generate(&spec, 4000).unwrap();
        let rate = v.iter().filter(|v| v.label).count() as f64 / v.len() as f64;
        assert!((rate - 0.5).abs() < 3.0 * (0.25f64 / 4000.0).sqrt(), "{rate}");
        assert!(v.iter().all(|v| v.record.note_text.contains("poor prognosis overall")));
    }

    #[test]
    fn labels_match_corpus_rules() {
        let v = generate(&GeneratorSpec::default(), 300).unwrap();
        let records = corpus_records(&v);
        let all = derive_labels(&records, 30).unwrap();
        let labeled: Vec<_> = all.iter().filter(|l| !l.excluded).collect();
        assert_eq!(labeled.len(), v.len());
        for (l, s) in labeled.iter().zip(&v) {
            assert_eq!(l.visit.visit_id, s.record.visit_id);
            assert_eq!(l.label, s.label);
        }
    }

    #[test]
    fn prefix_invariant_and_deterministic() {
        let spec = GeneratorSpec::default();
        let a = generate(&spec, 50).unwrap();
        let b = generate(&spec, 80).unwrap();
        assert_eq!(a[..], b[..50]);
    }

    #[test]
    fn rejects_empty_pools() {
        let mut spec = GeneratorSpec::default();
        spec.topics[1].pool.clear();
        assert!(generate(&spec, 5).is_err());
        assert!(generate(&GeneratorSpec::default(), 0).is_err());
    }
}
