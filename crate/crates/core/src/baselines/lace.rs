use serde::{Deserialize, Serialize};

use crate::corpus::LaceFeatures;

/// LACE index points (van Walraven et al., CMAJ 2010).
///
/// Length of stay: <1 d → 0, 1 → 1, 2 → 2, 3 → 3, 4–6 → 4, 7–13 → 5, ≥14 → 7.
/// Acute (emergent) admission → 3.
/// Charlson index 0–3 → same number of points, ≥4 → 5.
/// Emergency visits in the previous six months → one point each, at most 4.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct LaceScore {
    pub points: u32,
    pub length: u32,
    pub acuity: u32,
    pub comorbidity: u32,
    pub emergency: u32,
}

fn length_points(days: u32) -> u32 {
    match days {
        0 => 0,
        1..=3 => days,
        4..=6 => 4,
        7..=13 => 5,
        _ => 7,
    }
}

fn comorbidity_points(index: u32) -> u32 {
    if index >= 4 {
        5
    } else {
        index
    }
}

pub fn lace_score(f: &LaceFeatures) -> LaceScore {
    let length = length_points(f.length_of_stay_days);
    let acuity = if f.acute_admission { 3 } else { 0 };
    let comorbidity = comorbidity_points(f.charlson_comorbidity_index);
    let emergency = f.ed_visits_prior_6mo.min(4);
    LaceScore { points: length + acuity + comorbidity + emergency, length, acuity, comorbidity, emergency }
}

pub const LACE_FEATURE_NAMES: [&str; 5] =
    ["length_of_stay_days", "acute_admission", "charlson_comorbidity_index", "ed_visits_prior_6mo", "lace_score"];

/// The four raw LACE inputs followed by the LACE score.
pub fn lace_feature_vector(f: &LaceFeatures) -> Vec<f64> {
    vec![
        f.length_of_stay_days as f64,
        if f.acute_admission { 1.0 } else { 0.0 },
        f.charlson_comorbidity_index as f64,
        f.ed_visits_prior_6mo as f64,
        lace_score(f).points as f64,
    ]
}
