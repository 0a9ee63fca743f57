use std::collections::BTreeMap;
use std::fmt;
use std::fs;
use std::io::BufReader;
use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context};
use readmit_core::attribution::{self, IndexEntry, ReportStyle};
use readmit_core::baselines::{
    fit_ffnn, fit_logistic, lace_feature_vector, lace_score, FfnnModel, Standardizer, TfidfVectorizer,
    LACE_FEATURE_NAMES,
};
use readmit_core::corpus::{self, ExclusionReason, Fold, LaceFeatures, VisitRecord};
use readmit_core::embedding::{train_sgns, EmbeddingMatrix, Vocabulary};
use readmit_core::eval::{c_statistic, calibration_bins, confusion_at};
use readmit_core::model::{self, CnnHyper, CnnModel};
use readmit_core::preprocess::{
    prepare_note, section_words, to_token_sequence, NameLexicon, Section, SectionSchema, TokenSequence,
};
use readmit_core::synth::{self, GeneratorSpec};
use readmit_core::{records, sha256_hex};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::config::{EmbeddingInit, PipelineConfig};

pub const PREPARED_FORMAT: &str = "readmit-prepared";
pub const PREPARED_VERSION: u32 = 1;

/// A missing, unreadable, corrupt or mismatched input artifact.
#[derive(Debug)]
pub struct ArtifactError(pub String);

impl fmt::Display for ArtifactError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for ArtifactError {}

fn artifact_err(msg: impl Into<String>) -> anyhow::Error {
    ArtifactError(msg.into()).into()
}

/// The machine-readable line every stage prints.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub stage: String,
    pub inputs: BTreeMap<String, String>,
    pub outputs: BTreeMap<String, String>,
    pub metrics: serde_json::Map<String, Value>,
}

struct Stage<'a> {
    cfg: &'a PipelineConfig,
    summary: Summary,
}

impl<'a> Stage<'a> {
    fn new(cfg: &'a PipelineConfig, name: &str) -> Self {
        Stage {
            cfg,
            summary: Summary {
                stage: name.to_string(),
                inputs: BTreeMap::new(),
                outputs: BTreeMap::new(),
                metrics: serde_json::Map::new(),
            },
        }
    }

    fn read(&mut self, path: &Path, what: &str) -> anyhow::Result<Vec<u8>> {
        let full = self.cfg.resolve(path);
        let bytes = fs::read(&full)
            .map_err(|e| artifact_err(format!("cannot read {what} artifact {}: {e}", full.display())))?;
        let hash = sha256_hex(&bytes);
        let key = path.display().to_string();
        if let Some(expected) = self.cfg.expect.get(&key) {
            if !expected.eq_ignore_ascii_case(&hash) {
                return Err(artifact_err(format!(
                    "{what} artifact {} has sha256 {hash}, config expects {expected}",
                    full.display()
                )));
            }
        }
        self.summary.inputs.insert(key, hash);
        Ok(bytes)
    }

    fn write(&mut self, path: &Path, bytes: &[u8]) -> anyhow::Result<()> {
        let full = self.cfg.resolve(path);
        if let Some(dir) = full.parent() {
            fs::create_dir_all(dir).with_context(|| format!("cannot create {}", dir.display()))?;
        }
        fs::write(&full, bytes).with_context(|| format!("cannot write {}", full.display()))?;
        self.summary.outputs.insert(path.display().to_string(), sha256_hex(bytes));
        Ok(())
    }

    fn metric(&mut self, key: &str, value: impl Serialize) {
        self.summary.metrics.insert(key.to_string(), serde_json::to_value(value).expect("metric serialises"));
    }

    fn report_path(&self, name: &str) -> PathBuf {
        self.cfg.paths.reports.join(name)
    }

    fn corpus(&mut self) -> anyhow::Result<Vec<VisitRecord>> {
        let bytes = self.read(&self.cfg.paths.corpus.clone(), "corpus")?;
        records::read_records(BufReader::new(&bytes[..]), "corpus").map_err(|e| artifact_err(e.to_string()))
    }

    fn prepared(&mut self) -> anyhow::Result<Vec<PreparedVisit>> {
        let path = self.cfg.paths.prepared.clone();
        let bytes = self.read(&path, "prepared corpus")?;
        let text = std::str::from_utf8(&bytes).map_err(|_| artifact_err("prepared corpus is not UTF-8"))?;
        let (head, body) = text.split_once('\n').unwrap_or((text, ""));
        let header: PreparedHeader = serde_json::from_str(head)
            .map_err(|e| artifact_err(format!("prepared corpus {} has no valid header: {e}", path.display())))?;
        if header.format != PREPARED_FORMAT || header.version != PREPARED_VERSION {
            return Err(artifact_err(format!(
                "prepared corpus {} is {} v{}, expected {PREPARED_FORMAT} v{PREPARED_VERSION}",
                path.display(),
                header.format,
                header.version
            )));
        }
        if header.length != self.cfg.preprocess.length {
            return Err(artifact_err(format!(
                "prepared corpus was built for L = {}, config has L = {}",
                header.length, self.cfg.preprocess.length
            )));
        }
        records::from_str(body, "prepared corpus").map_err(|e| artifact_err(e.to_string()))
    }

    fn vocab(&mut self) -> anyhow::Result<Vocabulary> {
        let bytes = self.read(&self.cfg.paths.vocab.clone(), "vocabulary")?;
        Vocabulary::read(BufReader::new(&bytes[..])).map_err(|e| artifact_err(e.to_string()))
    }

    fn model(&mut self, vocab: &Vocabulary) -> anyhow::Result<CnnModel> {
        let bytes = self.read(&self.cfg.paths.model.clone(), "model")?;
        let (model, vocab_hash) = CnnModel::from_bytes(&bytes).map_err(|e| artifact_err(e.to_string()))?;
        if model.hyper.length != self.cfg.preprocess.length {
            return Err(artifact_err(format!(
                "model was trained with L = {}, config has L = {}; refusing to run",
                model.hyper.length, self.cfg.preprocess.length
            )));
        }
        if vocab_hash != vocab.content_hash() {
            return Err(artifact_err("model was trained against a different vocabulary"));
        }
        Ok(model)
    }

    fn finish(self) -> Summary {
        self.summary
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct PreparedHeader {
    format: String,
    version: u32,
    length: usize,
}

/// One visit after labeling, splitting and note preparation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PreparedVisit {
    pub visit_id: String,
    pub label: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub exclusion: Option<ExclusionReason>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fold: Option<Fold>,
    pub lace: LaceFeatures,
    pub sections: Vec<Section>,
}

impl PreparedVisit {
    pub fn words(&self) -> Vec<String> {
        section_words(&self.sections)
    }
}

/// Generator ground truth for one index visit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TruthRecord {
    pub visit_id: String,
    pub label: bool,
    pub log_odds: f64,
    pub topic: String,
    pub planted: Vec<String>,
}

fn fold_of(visits: &[PreparedVisit], fold: Fold) -> Vec<&PreparedVisit> {
    visits.iter().filter(|v| v.fold == Some(fold)).collect()
}

fn sequences(
    visits: &[&PreparedVisit],
    vocab: &Vocabulary,
    length: usize,
) -> anyhow::Result<Vec<(TokenSequence, bool)>> {
    visits.iter().map(|v| Ok((to_token_sequence(&v.sections, vocab, length)?, v.label))).collect()
}

fn labels(visits: &[&PreparedVisit]) -> Vec<bool> {
    visits.iter().map(|v| v.label).collect()
}

fn to_jsonl<T: Serialize>(items: &[T]) -> anyhow::Result<Vec<u8>> {
    Ok(records::to_string(items)?.into_bytes())
}

fn pretty(value: &impl Serialize) -> Vec<u8> {
    let mut s = serde_json::to_string_pretty(value).expect("report serialises");
    s.push('\n');
    s.into_bytes()
}

fn load_spec(cfg: &PipelineConfig) -> anyhow::Result<GeneratorSpec> {
    let mut spec = match &cfg.synth.spec {
        Some(p) => {
            let full = cfg.resolve(p);
            let text = fs::read_to_string(&full)
                .map_err(|e| artifact_err(format!("cannot read generator spec {}: {e}", full.display())))?;
            toml::from_str(&text).map_err(|e| artifact_err(format!("generator spec {}: {e}", full.display())))?
        }
        None => GeneratorSpec::default(),
    };
    spec.seed = cfg.synth.seed;
    Ok(spec)
}

pub fn synth(cfg: &PipelineConfig) -> anyhow::Result<Summary> {
    let mut st = Stage::new(cfg, "synth");
    let spec = load_spec(cfg)?;
    let visits = synth::generate(&spec, cfg.synth.n)?;
    let trigrams = spec.trigrams();
    let truth: Vec<TruthRecord> = visits
        .iter()
        .map(|v| TruthRecord {
            visit_id: v.record.visit_id.clone(),
            label: v.label,
            log_odds: v.log_odds,
            topic: spec.topics[v.topic].name.clone(),
            planted: v.planted.iter().map(|&k| trigrams[k].phrase.clone()).collect(),
        })
        .collect();
    st.write(&cfg.paths.corpus, &to_jsonl(&synth::corpus_records(&visits))?)?;
    let mut names = spec.names.join("\n");
    names.push('\n');
    st.write(&cfg.paths.lexicon, names.as_bytes())?;
    st.write(&cfg.paths.truth, &to_jsonl(&truth)?)?;
    st.metric("index_visits", visits.len());
    st.metric("positives", visits.iter().filter(|v| v.label).count());
    st.metric("bayes_auc", synth::bayes_auc(&spec).ok());
    Ok(st.finish())
}

pub fn preprocess(cfg: &PipelineConfig) -> anyhow::Result<Summary> {
    let mut st = Stage::new(cfg, "preprocess");
    let visits = st.corpus()?;
    let lexicon = NameLexicon::parse(
        std::str::from_utf8(&st.read(&cfg.paths.lexicon, "name lexicon")?)
            .map_err(|_| artifact_err("name lexicon is not UTF-8"))?,
    );
    let schema = match &cfg.paths.schema {
        Some(p) => {
            let bytes = st.read(p, "section schema")?;
            SectionSchema::parse(std::str::from_utf8(&bytes).map_err(|_| artifact_err("section schema is not UTF-8"))?)
                .map_err(|e| artifact_err(e.to_string()))?
        }
        None => SectionSchema::default(),
    };
    let labeled = corpus::derive_labels(&visits, cfg.preprocess.window_days)?;
    let [a, b, c] = cfg.split.fractions;
    let split = corpus::split_dataset(&labeled, (a, b, c), cfg.split.seed)?;
    let folds: BTreeMap<&str, Fold> = split.iter().map(|s| (s.visit_id.as_str(), s.fold)).collect();

    let mut prepared = Vec::with_capacity(labeled.len());
    let mut excluded: BTreeMap<String, usize> = BTreeMap::new();
    for l in &labeled {
        if let Some(reason) = l.exclusion_reason {
            let key = serde_json::to_value(reason)?.as_str().unwrap_or_default().to_string();
            *excluded.entry(key).or_default() += 1;
        }
        let sections = if l.excluded { Vec::new() } else { prepare_note(&l.visit.note_text, &schema, &lexicon) };
        prepared.push(PreparedVisit {
            visit_id: l.visit.visit_id.clone(),
            label: l.label,
            exclusion: l.exclusion_reason,
            fold: folds.get(l.visit.visit_id.as_str()).copied(),
            lace: l.visit.lace,
            sections,
        });
    }
    let header =
        PreparedHeader { format: PREPARED_FORMAT.into(), version: PREPARED_VERSION, length: cfg.preprocess.length };
    let mut out = serde_json::to_string(&header)?.into_bytes();
    out.push(b'\n');
    out.extend(to_jsonl(&prepared)?);
    st.write(&cfg.paths.prepared, &out)?;

    st.metric("visits", visits.len());
    st.metric("excluded", excluded);
    for (name, fold) in [("train", Fold::Train), ("validation", Fold::Validation), ("test", Fold::Test)] {
        let f = fold_of(&prepared, fold);
        st.metric(name, json!({"visits": f.len(), "positives": f.iter().filter(|v| v.label).count()}));
    }
    let lengths: Vec<usize> = prepared.iter().filter(|v| v.fold.is_some()).map(|v| v.words().len()).collect();
    st.metric("truncated", lengths.iter().filter(|&&n| n > cfg.preprocess.length).count());
    Ok(st.finish())
}

pub fn vocab(cfg: &PipelineConfig) -> anyhow::Result<Summary> {
    let mut st = Stage::new(cfg, "vocab");
    let prepared = st.prepared()?;
    let docs: Vec<Vec<String>> = fold_of(&prepared, Fold::Train).iter().map(|v| v.words()).collect();
    let vocab = Vocabulary::build(&docs, cfg.vocab.min_count)?;
    let mut out = Vec::new();
    vocab.write(&mut out)?;
    st.write(&cfg.paths.vocab, &out)?;
    st.metric("size", vocab.len());
    st.metric("content_hash", vocab.content_hash());
    Ok(st.finish())
}

pub fn embed(cfg: &PipelineConfig) -> anyhow::Result<Summary> {
    let mut st = Stage::new(cfg, "embed");
    let prepared = st.prepared()?;
    let vocab = st.vocab()?;
    let corpus: Vec<Vec<u32>> = fold_of(&prepared, Fold::Train)
        .iter()
        .map(|v| v.words().iter().map(|w| vocab.id_or_unk(w)).collect())
        .collect();
    let matrix = train_sgns(&corpus, &vocab, &cfg.embedding)?;
    let mut out = Vec::new();
    matrix.write(&vocab, &mut out)?;
    st.write(&cfg.paths.embeddings, &out)?;
    st.metric("vocab_size", matrix.vocab_size());
    st.metric("dim", matrix.dim());
    Ok(st.finish())
}

pub fn train(cfg: &PipelineConfig) -> anyhow::Result<Summary> {
    let mut st = Stage::new(cfg, "train");
    let prepared = st.prepared()?;
    let vocab = st.vocab()?;
    let length = cfg.preprocess.length;
    let m = &cfg.model;
    let initial = match m.init {
        EmbeddingInit::Pretrained => {
            let bytes = st.read(&cfg.paths.embeddings, "embeddings")?;
            let emb = EmbeddingMatrix::read_for(BufReader::new(&bytes[..]), &vocab)
                .map_err(|e| artifact_err(e.to_string()))?;
            let hyper = CnnHyper { mask_padding: m.mask_padding, ..CnnHyper::new(length, emb.dim(), m.filters) };
            CnnModel::with_embedding(hyper, &emb, m.seed)?
        }
        EmbeddingInit::Random => {
            let hyper = CnnHyper { mask_padding: m.mask_padding, ..CnnHyper::new(length, m.dim, m.filters) };
            CnnModel::new(hyper, vocab.len(), m.seed)?
        }
    };
    let train_set = sequences(&fold_of(&prepared, Fold::Train), &vocab, length)?;
    let valid_set = sequences(&fold_of(&prepared, Fold::Validation), &vocab, length)?;
    let outcome = model::train(initial, &train_set, &valid_set, &cfg.train)?;
    st.write(&cfg.paths.model, &outcome.model.to_bytes(&vocab.content_hash())?)?;
    st.write(&st.report_path("train_history.jsonl"), &to_jsonl(&outcome.history)?)?;
    st.metric("epochs", outcome.history.len());
    st.metric("best_epoch", outcome.best_epoch);
    st.metric(
        "best_valid_c_statistic",
        outcome.history.iter().find(|h| h.epoch == outcome.best_epoch).map(|h| h.valid_c_statistic),
    );
    Ok(st.finish())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoredVisit {
    pub visit_id: String,
    pub label: bool,
    pub probability: f64,
}

fn score_fold(
    model: &CnnModel,
    visits: &[&PreparedVisit],
    vocab: &Vocabulary,
) -> anyhow::Result<(Vec<TokenSequence>, Vec<ScoredVisit>)> {
    let xs: Vec<TokenSequence> = sequences(visits, vocab, model.hyper.length)?.into_iter().map(|(x, _)| x).collect();
    let probs = model.predict_batch(&xs)?;
    let scored = visits
        .iter()
        .zip(probs)
        .map(|(v, p)| ScoredVisit { visit_id: v.visit_id.clone(), label: v.label, probability: p })
        .collect();
    Ok((xs, scored))
}

pub fn evaluate(cfg: &PipelineConfig) -> anyhow::Result<Summary> {
    let mut st = Stage::new(cfg, "evaluate");
    let prepared = st.prepared()?;
    let vocab = st.vocab()?;
    let model = st.model(&vocab)?;
    let test = fold_of(&prepared, Fold::Test);
    let (_, scored) = score_fold(&model, &test, &vocab)?;
    let scores: Vec<f64> = scored.iter().map(|s| s.probability).collect();
    let y = labels(&test);
    let c = c_statistic(&scores, &y)?;
    let report = json!({
        "version": 1,
        "fold": "test",
        "visits": y.len(),
        "positives": y.iter().filter(|&&l| l).count(),
        "c_statistic": c,
        "confusion_at_0_5": confusion_at(&scores, &y, 0.5),
        "calibration": calibration_bins(&scores, &y, 10)?,
    });
    st.write(&st.report_path("metrics.json"), &pretty(&report))?;
    st.write(&st.report_path("test_scores.jsonl"), &to_jsonl(&scored)?)?;
    st.metric("c_statistic", c);
    Ok(st.finish())
}

/// Options for `explain` that are not part of the pipeline config.
#[derive(Debug, Clone, Default)]
pub struct ExplainOptions {
    /// Explain only this visit, whatever its fold.
    pub visit: Option<String>,
    /// Also render terminal reports to standard error.
    pub terminal: bool,
}

fn file_stem(visit_id: &str) -> String {
    visit_id.chars().map(|c| if c.is_ascii_alphanumeric() || c == '-' || c == '_' { c } else { '_' }).collect()
}

pub fn explain(cfg: &PipelineConfig, opts: &ExplainOptions) -> anyhow::Result<Summary> {
    let mut st = Stage::new(cfg, "explain");
    let prepared = st.prepared()?;
    let vocab = st.vocab()?;
    let model = st.model(&vocab)?;
    let chosen: Vec<&PreparedVisit> = match &opts.visit {
        Some(id) => {
            let v = prepared.iter().find(|v| &v.visit_id == id).ok_or_else(|| anyhow!("no visit {id:?}"))?;
            if v.exclusion.is_some() {
                bail!("visit {id:?} is excluded from modeling");
            }
            vec![v]
        }
        None => fold_of(&prepared, Fold::Test),
    };
    let (xs, scored) = score_fold(&model, &chosen, &vocab)?;
    let mut order: Vec<usize> = (0..chosen.len()).collect();
    order.sort_by(|&a, &b| {
        scored[b]
            .probability
            .total_cmp(&scored[a].probability)
            .then_with(|| scored[a].visit_id.cmp(&scored[b].visit_id))
    });
    if cfg.explain.limit > 0 {
        order.truncate(cfg.explain.limit);
    }
    let mut entries = Vec::with_capacity(order.len());
    let mut max_gap = 0.0f64;
    for &i in &order {
        let v = chosen[i];
        let report = attribution::explain(&model, &xs[i], &vocab, &v.visit_id)?;
        max_gap = max_gap.max((report.reconstructed_probability() - report.probability).abs());
        let name = format!("{}.html", file_stem(&v.visit_id));
        let html = attribution::render_report(&report, ReportStyle::Html, cfg.explain.highlights);
        st.write(&st.report_path(&format!("explain/{name}")), html.as_bytes())?;
        if opts.terminal {
            eprintln!("{}", attribution::render_report(&report, ReportStyle::Terminal, cfg.explain.highlights));
        }
        entries.push(IndexEntry {
            visit_id: v.visit_id.clone(),
            probability: report.probability,
            label: Some(v.label),
            href: name,
        });
    }
    let index = attribution::render_index("Readmission risk explanations", &entries);
    st.write(&st.report_path("explain/index.html"), index.as_bytes())?;
    st.metric("reports", entries.len());
    st.metric("max_reconstruction_error", max_gap);
    Ok(st.finish())
}

pub fn profile(cfg: &PipelineConfig) -> anyhow::Result<Summary> {
    let mut st = Stage::new(cfg, "profile");
    let prepared = st.prepared()?;
    let vocab = st.vocab()?;
    let model = st.model(&vocab)?;
    let test = fold_of(&prepared, Fold::Test);
    let (xs, _) = score_fold(&model, &test, &vocab)?;
    let dataset: Vec<(String, TokenSequence)> = test.iter().map(|v| v.visit_id.clone()).zip(xs).collect();
    let profiles = attribution::profile_nodes(&model, &dataset, &vocab, cfg.profile.top_k)?;
    st.write(&st.report_path("profiles.json"), &pretty(&profiles))?;
    let top: Vec<Value> = profiles
        .top_by_max_abs(5)
        .map(|p| {
            json!({
                "node": p.node_index,
                "max_abs": p.max_abs,
                "top_trigram": p.extremes.first().map(|e| e.tokens.join(" ")),
            })
        })
        .collect();
    st.metric("nodes", profiles.profiles.len());
    st.metric("top_by_max_abs", top);
    Ok(st.finish())
}

pub fn baseline(cfg: &PipelineConfig) -> anyhow::Result<Summary> {
    let mut st = Stage::new(cfg, "baseline");
    let prepared = st.prepared()?;
    let train = fold_of(&prepared, Fold::Train);
    let test = fold_of(&prepared, Fold::Test);
    let (y_train, y_test) = (labels(&train), labels(&test));

    let lace_points: Vec<f64> = test.iter().map(|v| lace_score(&v.lace).points as f64).collect();
    let c_lace_score = c_statistic(&lace_points, &y_test)?;

    let raw_train: Vec<Vec<f64>> = train.iter().map(|v| lace_feature_vector(&v.lace)).collect();
    let scaler = Standardizer::fit(&raw_train)?;
    let lace_train: Vec<Vec<f64>> = raw_train.iter().map(|r| scaler.apply(r)).collect();
    let lace_test: Vec<Vec<f64>> = test.iter().map(|v| scaler.apply(&lace_feature_vector(&v.lace))).collect();
    let lace_lr = fit_logistic(&lace_train, LACE_FEATURE_NAMES.len(), &y_train, &cfg.baseline.logistic)?;
    let s: Vec<f64> = lace_test.iter().map(|x| lace_lr.predict(x)).collect();
    let c_lace_lr = c_statistic(&s, &y_test)?;
    let meta = json!({"features": LACE_FEATURE_NAMES, "standardizer": scaler});
    st.write(&st.report_path("baseline_lace_logistic.bin"), &lace_lr.to_container(&meta)?.to_bytes())?;

    let ffnn: FfnnModel = fit_ffnn(&lace_train, &y_train, cfg.baseline.ffnn_hidden, &cfg.baseline.ffnn)?;
    let s: Vec<f64> = lace_test.iter().map(|x| ffnn.predict(x)).collect();
    let c_ffnn = c_statistic(&s, &y_test)?;
    st.write(&st.report_path("baseline_lace_ffnn.bin"), &ffnn.to_container(&meta)?.to_bytes())?;

    let docs_train: Vec<Vec<String>> = train.iter().map(|v| v.words()).collect();
    let vectorizer = TfidfVectorizer::fit(&docs_train)?;
    let x_train: Vec<_> = docs_train.iter().map(|d| vectorizer.apply(d)).collect();
    let x_test: Vec<_> = test.iter().map(|v| vectorizer.apply(&v.words())).collect();
    let tfidf_lr = fit_logistic(&x_train, vectorizer.n_features(), &y_train, &cfg.baseline.logistic)?;
    let s: Vec<f64> = x_test.iter().map(|x| tfidf_lr.predict(x)).collect();
    let c_tfidf = c_statistic(&s, &y_test)?;
    let meta = json!({"vectorizer": vectorizer});
    st.write(&st.report_path("baseline_tfidf_logistic.bin"), &tfidf_lr.to_container(&meta)?.to_bytes())?;

    let report = json!({
        "version": 1,
        "fold": "test",
        "c_statistic": {
            "lace_score": c_lace_score,
            "lace_logistic": c_lace_lr,
            "lace_ffnn": c_ffnn,
            "tfidf_logistic": c_tfidf,
        },
    });
    st.write(&st.report_path("baselines.json"), &pretty(&report))?;
    st.metric("lace_score_c_statistic", c_lace_score);
    st.metric("lace_logistic_c_statistic", c_lace_lr);
    st.metric("lace_ffnn_c_statistic", c_ffnn);
    st.metric("tfidf_logistic_c_statistic", c_tfidf);
    Ok(st.finish())
}
