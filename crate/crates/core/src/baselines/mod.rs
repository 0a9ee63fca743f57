//! Comparison models: the LACE index, logistic regression on LACE features
//! or TF-IDF vectors, and a one-hidden-layer feed-forward network.

mod ffnn;
mod lace;
mod logistic;
mod tfidf;

pub use ffnn::{fit_ffnn, FfnnModel, FFNN_KIND};
pub use lace::{lace_feature_vector, lace_score, LaceScore, LACE_FEATURE_NAMES};
pub use logistic::{
    fit_logistic, logistic_gradient, logistic_objective, FeatureRow, LinearModel, LogisticConfig, Standardizer,
    LOGISTIC_KIND,
};
pub use tfidf::{TfidfVector, TfidfVectorizer, TFIDF_KIND};
