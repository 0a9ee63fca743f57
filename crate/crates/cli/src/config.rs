//! Pipeline configuration: one TOML file, optionally patched with `key=value` overrides.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context};
use readmit_core::baselines::LogisticConfig;
use readmit_core::embedding::SgnsConfig;
use readmit_core::model::TrainConfig;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Paths {
    pub corpus: PathBuf,
    pub lexicon: PathBuf,
    /// Section schema; the bundled schema is used when unset.
    pub schema: Option<PathBuf>,
    pub truth: PathBuf,
    pub prepared: PathBuf,
    pub vocab: PathBuf,
    pub embeddings: PathBuf,
    pub model: PathBuf,
    pub reports: PathBuf,
}

impl Default for Paths {
    fn default() -> Self {
        Paths {
            corpus: "corpus.jsonl".into(),
            lexicon: "names.txt".into(),
            schema: None,
            truth: "truth.jsonl".into(),
            prepared: "prepared.jsonl".into(),
            vocab: "vocab.jsonl".into(),
            embeddings: "embeddings.txt".into(),
            model: "model.bin".into(),
            reports: "reports".into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SynthSection {
    pub n: usize,
    pub seed: u64,
    /// TOML generator spec; the built-in default spec when unset.
    pub spec: Option<PathBuf>,
}

impl Default for SynthSection {
    fn default() -> Self {
        SynthSection { n: 7000, seed: 7, spec: None }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PreprocessSection {
    pub length: usize,
    pub window_days: i64,
}

impl Default for PreprocessSection {
    fn default() -> Self {
        PreprocessSection { length: readmit_core::preprocess::DEFAULT_LENGTH, window_days: 30 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SplitSection {
    pub fractions: [f64; 3],
    pub seed: u64,
}

impl Default for SplitSection {
    fn default() -> Self {
        SplitSection { fractions: [5.0 / 7.0, 1.0 / 7.0, 1.0 / 7.0], seed: 11 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct VocabSection {
    pub min_count: u64,
}

impl Default for VocabSection {
    fn default() -> Self {
        VocabSection { min_count: 2 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EmbeddingInit {
    /// Start from the skip-gram vectors written by `embed`.
    Pretrained,
    Random,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ModelSection {
    pub filters: usize,
    /// Embedding dimension when `init = "random"`; otherwise taken from the embeddings file.
    pub dim: usize,
    pub mask_padding: bool,
    pub init: EmbeddingInit,
    pub seed: u64,
}

impl Default for ModelSection {
    fn default() -> Self {
        ModelSection { filters: 128, dim: 50, mask_padding: true, init: EmbeddingInit::Pretrained, seed: 3 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExplainSection {
    pub highlights: usize,
    /// Reports are written for at most this many test visits, highest risk first. 0 means all.
    pub limit: usize,
}

impl Default for ExplainSection {
    fn default() -> Self {
        ExplainSection { highlights: readmit_core::attribution::DEFAULT_HIGHLIGHTS, limit: 100 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ProfileSection {
    pub top_k: usize,
}

impl Default for ProfileSection {
    fn default() -> Self {
        ProfileSection { top_k: readmit_core::attribution::DEFAULT_TOP_K }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BaselineSection {
    pub logistic: LogisticConfig,
    pub ffnn_hidden: usize,
    pub ffnn: TrainConfig,
}

impl Default for BaselineSection {
    fn default() -> Self {
        BaselineSection {
            logistic: LogisticConfig::default(),
            ffnn_hidden: 8,
            ffnn: TrainConfig { lr: 0.01, max_epochs: 30, ..TrainConfig::default() },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PipelineConfig {
    pub paths: Paths,
    pub synth: SynthSection,
    pub preprocess: PreprocessSection,
    pub split: SplitSection,
    pub vocab: VocabSection,
    pub embedding: SgnsConfig,
    pub model: ModelSection,
    pub train: TrainConfig,
    pub explain: ExplainSection,
    pub profile: ProfileSection,
    pub baseline: BaselineSection,
    /// Expected sha256 of input artifacts, keyed by path as written in `[paths]`.
    pub expect: BTreeMap<String, String>,
    /// Directory relative paths are resolved against. Not read from the file.
    #[serde(skip)]
    pub root: PathBuf,
}

fn merge(into: &mut toml::Table, from: toml::Table) {
    for (k, v) in from {
        match (into.get_mut(&k), v) {
            (Some(toml::Value::Table(a)), toml::Value::Table(b)) => merge(a, b),
            (_, v) => {
                into.insert(k, v);
            }
        }
    }
}

/// Applies `key=value`, where `key` is a TOML (possibly dotted, possibly quoted)
/// key and `value` a TOML value. Values that do not parse are taken as strings.
fn apply_override(table: &mut toml::Table, assignment: &str) -> anyhow::Result<()> {
    let (key, raw) =
        assignment.split_once('=').ok_or_else(|| anyhow!("override {assignment:?} is not of the form key=value"))?;
    let (key, raw) = (key.trim(), raw.trim());
    let patch = format!("{key} = {raw}")
        .parse::<toml::Table>()
        .or_else(|_| format!("{key} = {}", toml::Value::String(raw.to_string())).parse::<toml::Table>())
        .map_err(|_| anyhow!("override key {key:?} is malformed"))?;
    merge(table, patch);
    Ok(())
}

impl PipelineConfig {
    /// Parses `text`, applies the overrides in order and resolves paths against `root`.
    pub fn from_toml(text: &str, overrides: &[String], root: &Path) -> anyhow::Result<Self> {
        let mut table: toml::Table = text.parse().context("config is not valid TOML")?;
        for o in overrides {
            apply_override(&mut table, o)?;
        }
        let mut cfg: PipelineConfig = table.try_into().context("config does not match the pipeline schema")?;
        cfg.root = root.to_path_buf();
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: Option<&Path>, overrides: &[String]) -> anyhow::Result<Self> {
        match path {
            Some(p) => {
                let text = std::fs::read_to_string(p).with_context(|| format!("cannot read config {}", p.display()))?;
                let root = p.parent().map(Path::to_path_buf).unwrap_or_default();
                Self::from_toml(&text, overrides, &root)
            }
            None => Self::from_toml("", overrides, Path::new(".")),
        }
    }

    pub fn validate(&self) -> anyhow::Result<()> {
        if self.preprocess.length < readmit_core::model::TRIGRAM {
            bail!("preprocess.length must be at least {}", readmit_core::model::TRIGRAM);
        }
        if self.model.filters == 0 || self.model.dim == 0 {
            bail!("model.filters and model.dim must be positive");
        }
        self.train.validate()?;
        Ok(())
    }

    pub fn resolve(&self, p: &Path) -> PathBuf {
        if p.is_absolute() {
            p.to_path_buf()
        } else {
            self.root.join(p)
        }
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serialises")
    }
}
