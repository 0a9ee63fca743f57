//! Visit records, the 30-day unplanned readmission label, cohort exclusions
//! and train/validation/test splits.

use std::collections::{BTreeSet, HashMap, HashSet};

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

pub const SECONDS_PER_DAY: i64 = 86_400;
pub const DEFAULT_WINDOW_DAYS: i64 = 30;
/// Notes with fewer whitespace-separated tokens than this are excluded.
pub const MIN_NOTE_TOKENS: usize = 20;
pub const DEFAULT_FRACTIONS: (f64, f64, f64) = (0.80, 0.089, 0.111);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Disposition {
    Home,
    Facility,
    Hospice,
    Deceased,
}

/// Categories that make a readmission planned rather than unplanned.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PlannedFlag {
    OrganTransplant,
    Chemotherapy,
    Radiation,
    OtherPlanned,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct LaceFeatures {
    pub length_of_stay_days: u32,
    pub acute_admission: bool,
    pub charlson_comorbidity_index: u32,
    pub ed_visits_prior_6mo: u32,
}

/// One inpatient visit. Timestamps are UTC seconds.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VisitRecord {
    pub visit_id: String,
    pub patient_id: String,
    pub admit_time: i64,
    pub discharge_time: i64,
    pub disposition: Disposition,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub death_time: Option<i64>,
    #[serde(default)]
    pub planned_flags: BTreeSet<PlannedFlag>,
    pub primary_condition: String,
    pub note_text: String,
    pub lace: LaceFeatures,
}

impl VisitRecord {
    /// Checks the per-record invariants.
    pub fn validate(&self) -> Result<()> {
        let bad = |detail: &str| Error::InvalidVisit { visit_id: self.visit_id.clone(), detail: detail.to_string() };
        if self.admit_time >= self.discharge_time {
            return Err(bad("admit_time must precede discharge_time"));
        }
        if self.disposition == Disposition::Deceased {
            match self.death_time {
                Some(t) if t >= self.discharge_time => {}
                Some(_) => return Err(bad("death_time precedes discharge_time")),
                None => return Err(bad("deceased disposition without death_time")),
            }
        }
        let days = (self.discharge_time - self.admit_time) / SECONDS_PER_DAY;
        if i64::from(self.lace.length_of_stay_days) != days {
            return Err(bad("length_of_stay_days disagrees with admit/discharge times"));
        }
        Ok(())
    }

    pub fn note_token_count(&self) -> usize {
        self.note_text.split_whitespace().count()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExclusionReason {
    Hospice,
    DeathWithin30d,
    NoteTooShort,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LabeledVisit {
    pub visit: VisitRecord,
    pub label: bool,
    pub excluded: bool,
    pub exclusion_reason: Option<ExclusionReason>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Fold {
    Train,
    Validation,
    Test,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SplitAssignment {
    pub visit_id: String,
    pub fold: Fold,
}

/// True when `later` counts as an unplanned readmission after `index`.
pub fn is_unplanned_readmission(index: &VisitRecord, later: &VisitRecord, window_days: i64) -> bool {
    let gap = later.admit_time - index.discharge_time;
    if gap <= 0 || gap > window_days * SECONDS_PER_DAY {
        return false;
    }
    if !later.planned_flags.is_empty() {
        return false;
    }
    !(gap <= SECONDS_PER_DAY && later.primary_condition == index.primary_condition)
}

fn exclusion_for(v: &VisitRecord, window_days: i64) -> Option<ExclusionReason> {
    if v.disposition == Disposition::Hospice {
        return Some(ExclusionReason::Hospice);
    }
    let died = match v.death_time {
        Some(t) => t <= v.discharge_time + window_days * SECONDS_PER_DAY,
        None => v.disposition == Disposition::Deceased,
    };
    if died {
        return Some(ExclusionReason::DeathWithin30d);
    }
    if v.note_token_count() < MIN_NOTE_TOKENS {
        return Some(ExclusionReason::NoteTooShort);
    }
    None
}

/// Labels every visit and marks cohort exclusions. Output order follows input order.
///
/// Visits of the same patient must not overlap in time. Excluded visits
/// still count as readmissions for earlier visits of the same patient.
pub fn derive_labels(visits: &[VisitRecord], window_days: i64) -> Result<Vec<LabeledVisit>> {
    if window_days <= 0 {
        return Err(Error::invalid("window_days must be positive"));
    }
    let mut seen = HashSet::with_capacity(visits.len());
    for v in visits {
        if !seen.insert(v.visit_id.as_str()) {
            return Err(Error::DuplicateVisit(v.visit_id.clone()));
        }
        v.validate()?;
    }

    let mut by_patient: HashMap<&str, Vec<usize>> = HashMap::new();
    for (i, v) in visits.iter().enumerate() {
        by_patient.entry(v.patient_id.as_str()).or_default().push(i);
    }

    let mut labels = vec![false; visits.len()];
    for (patient, idx) in by_patient.iter_mut() {
        idx.sort_by_key(|&i| (visits[i].admit_time, visits[i].discharge_time));
        for pair in idx.windows(2) {
            let (a, b) = (&visits[pair[0]], &visits[pair[1]]);
            if b.admit_time < a.discharge_time {
                return Err(Error::UnorderedVisits {
                    patient: patient.to_string(),
                    detail: format!("{} admitted before {} was discharged", b.visit_id, a.visit_id),
                });
            }
        }
        for (pos, &i) in idx.iter().enumerate() {
            let horizon = visits[i].discharge_time + window_days * SECONDS_PER_DAY;
            labels[i] = idx[pos + 1..]
                .iter()
                .map(|&j| &visits[j])
                .take_while(|w| w.admit_time <= horizon)
                .any(|w| is_unplanned_readmission(&visits[i], w, window_days));
        }
    }

    Ok(visits
        .iter()
        .zip(labels)
        .map(|(v, label)| {
            let reason = exclusion_for(v, window_days);
            LabeledVisit { visit: v.clone(), label, excluded: reason.is_some(), exclusion_reason: reason }
        })
        .collect())
}

/// Fold sizes for `n` items: train and validation are rounded, test takes the rest.
pub fn fold_sizes(n: usize, fractions: (f64, f64, f64)) -> (usize, usize, usize) {
    let n_f = n as f64;
    let train = ((fractions.0 * n_f).round() as usize).min(n);
    let valid = ((fractions.1 * n_f).round() as usize).min(n - train);
    (train, valid, n - train - valid)
}

/// Deterministic random split of the included visits. Output follows input order.
pub fn split_dataset(labeled: &[LabeledVisit], fractions: (f64, f64, f64), seed: u64) -> Result<Vec<SplitAssignment>> {
    let (a, b, c) = fractions;
    if [a, b, c].iter().any(|f| !(0.0..=1.0).contains(f)) || (a + b + c - 1.0).abs() > 1e-9 {
        return Err(Error::invalid(format!("split fractions {fractions:?} must be in [0,1] and sum to 1")));
    }
    let included: Vec<&LabeledVisit> = labeled.iter().filter(|l| !l.excluded).collect();
    if included.is_empty() {
        return Err(Error::Empty("no included visits to split"));
    }
    let n = included.len();
    let (n_train, n_valid, _) = fold_sizes(n, fractions);

    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let mut folds = vec![Fold::Test; n];
    for (rank, &i) in order.iter().enumerate() {
        folds[i] = if rank < n_train {
            Fold::Train
        } else if rank < n_train + n_valid {
            Fold::Validation
        } else {
            Fold::Test
        };
    }
    Ok(included
        .iter()
        .zip(folds)
        .map(|(l, fold)| SplitAssignment { visit_id: l.visit.visit_id.clone(), fold })
        .collect())
}
