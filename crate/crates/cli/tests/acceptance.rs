//! Acceptance gate. Prints one PASS/FAIL line per criterion and exits nonzero
//! if any fails.
//!
//! Criteria 4, 5, 6 and 9 share one run of the default pipeline: it runs once
//! in-process and once through the `readmit` binary, and the two runs must
//! produce byte-identical artifacts.

use std::collections::BTreeMap;
use std::path::Path;
use std::process::{Command, ExitCode};
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use readmit_cli::stages::{self, ExplainOptions, PreparedVisit};
use readmit_cli::{PipelineConfig, Summary};
use readmit_core::attribution::{explain, NodeProfiles};
use readmit_core::corpus::Fold;
use readmit_core::embedding::{cosine, train_sgns, SgnsConfig, Vocabulary};
use readmit_core::eval::c_statistic;
use readmit_core::model::{loss, CnnHyper, CnnModel, ForwardCache};
use readmit_core::preprocess::{
    deidentify, prepare_note, section_words, to_token_sequence, NameLexicon, SectionSchema, TokenSequence,
    DEFAULT_LENGTH,
};
use readmit_core::records;
use readmit_core::synth::{bayes_auc, generate, GeneratorSpec};

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome { pass, detail: detail.into() }
}

struct Gate {
    failures: usize,
}

impl Gate {
    fn record(&mut self, id: u32, name: &str, limit: Option<Duration>, f: impl FnOnce() -> Outcome) {
        let start = Instant::now();
        let mut o = f();
        let took = start.elapsed();
        if let Some(limit) = limit {
            if took > limit {
                o.pass = false;
                o.detail = format!("{}; exceeded {:.0?} limit", o.detail, limit);
            }
        }
        self.failures += usize::from(!o.pass);
        println!("{} [{id}] {name}: {} ({:.2} s)", if o.pass { "PASS" } else { "FAIL" }, o.detail, took.as_secs_f64());
    }
}

// 1 ------------------------------------------------------------------------

const FD_STEP: f64 = 1e-5;
const KINK: f64 = 1e-3;

fn random_cnn(seed: u64) -> (CnnModel, TokenSequence, bool) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let vocab = rng.gen_range(3..=50);
    let hyper = CnnHyper {
        mask_padding: rng.gen(),
        ..CnnHyper::new(rng.gen_range(3..=20), rng.gen_range(1..=8), rng.gen_range(1..=4))
    };
    let mut model = CnnModel::new(hyper, vocab, seed).unwrap();
    for g in model.params.groups_mut() {
        for v in g.iter_mut() {
            *v = rng.gen_range(-1.0..1.0);
        }
    }
    let n = rng.gen_range(1..=hyper.length);
    let tokens = (0..hyper.length).map(|t| if t < n { rng.gen_range(1..vocab as u32) } else { 0 }).collect();
    (model, TokenSequence { tokens, pad_id: 0, original_length: n }, rng.gen())
}

fn near_kink(cache: &ForwardCache) -> bool {
    (0..cache.pooled.len()).any(|f| {
        let mut z: Vec<f64> = (0..cache.positions).map(|t| cache.pre_activation(t, f)).collect();
        z.sort_by(|a, b| b.total_cmp(a));
        z[0].abs() < KINK || (z[0] > 0.0 && z.len() > 1 && z[0] - z[1] < KINK)
    })
}

fn gradient_error(model: &mut CnnModel, x: &TokenSequence, y: bool) -> f64 {
    let analytic = model.backward(&model.forward(x).unwrap(), y);
    let frozen_pad = if model.hyper.mask_padding { model.hyper.dim } else { 0 };
    let mut worst: f64 = 0.0;
    for g in 0..5 {
        for i in 0..model.params.groups()[g].len() {
            if g == 0 && i < frozen_pad {
                continue;
            }
            let x0 = model.params.groups()[g][i];
            model.params.groups_mut()[g][i] = x0 + FD_STEP;
            let up = loss(model.predict(x).unwrap(), y);
            model.params.groups_mut()[g][i] = x0 - FD_STEP;
            let down = loss(model.predict(x).unwrap(), y);
            model.params.groups_mut()[g][i] = x0;
            let numeric = (up - down) / (2.0 * FD_STEP);
            let a = analytic.groups()[g][i];
            worst = worst.max((a - numeric).abs() / a.abs().max(numeric.abs()).max(1e-6));
        }
    }
    worst
}

fn gradient_correctness() -> Outcome {
    let (mut checked, mut skipped, mut worst) = (0, 0, 0.0f64);
    let mut seed = 0;
    while checked < 12 {
        let (mut model, x, y) = random_cnn(seed);
        seed += 1;
        if near_kink(&model.forward(&x).unwrap()) {
            skipped += 1;
            continue;
        }
        worst = worst.max(gradient_error(&mut model, &x, y));
        checked += 1;
    }
    outcome(
        worst < 1e-4,
        format!(
            "max relative error {worst:.2e} over {checked} instances ({skipped} near-kink draws skipped; tol 1e-4)"
        ),
    )
}

// 2 ------------------------------------------------------------------------

fn attribution_reconstruction() -> Outcome {
    let words: Vec<String> = (0..40).map(|i| format!("w{i}")).collect();
    let vocab = Vocabulary::build(&[words.clone()], 1).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut model = CnnModel::new(CnnHyper::new(60, 8, 16), vocab.len(), 2).unwrap();
    for g in model.params.groups_mut() {
        for v in g.iter_mut() {
            *v = rng.gen_range(-1.0..1.0);
        }
    }
    let mut exact = 0;
    for i in 0..100 {
        let n = rng.gen_range(1..80);
        let doc: Vec<&String> = (0..n).map(|_| &words[rng.gen_range(0..words.len())]).collect();
        let x = TokenSequence::encode(&doc, &vocab, 60).unwrap();
        let report = explain(&model, &x, &vocab, &format!("r{i}")).unwrap();
        let p = model.predict(&x).unwrap();
        exact += usize::from(report.reconstructed_probability().to_bits() == p.to_bits());
    }
    outcome(exact == 100, format!("{exact}/100 inputs reconstruct the forward probability bitwise"))
}

// 3 ------------------------------------------------------------------------

fn pairwise_auc(scores: &[f64], labels: &[bool]) -> f64 {
    let (mut wins, mut pairs) = (0.0, 0.0);
    for (i, &si) in scores.iter().enumerate() {
        if !labels[i] {
            continue;
        }
        for (j, &sj) in scores.iter().enumerate() {
            if labels[j] {
                continue;
            }
            pairs += 1.0;
            wins += if si > sj {
                1.0
            } else if si == sj {
                0.5
            } else {
                0.0
            };
        }
    }
    wins / pairs
}

fn c_statistic_oracle() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut worst = 0.0f64;
    for set in 0..50 {
        let n = rng.gen_range(2..=1000);
        let grid = [2.0, 5.0, 20.0, 1e9][set % 4];
        let scores: Vec<f64> = (0..n).map(|_| (rng.gen::<f64>() * grid).floor() / grid).collect();
        let mut labels: Vec<bool> = (0..n).map(|_| rng.gen_bool(0.3)).collect();
        labels[0] = true;
        labels[1] = false;
        worst = worst.max((c_statistic(&scores, &labels).unwrap() - pairwise_auc(&scores, &labels)).abs());
    }
    outcome(worst <= 1e-12, format!("max |rank − pairwise| = {worst:.1e} over 50 sets with ties (tol 1e-12)"))
}

// 4, 5, 6, 9 --------------------------------------------------------------

struct PipelineRun {
    summaries: BTreeMap<String, Summary>,
    elapsed: Duration,
}

const STAGES: [&str; 9] =
    ["synth", "preprocess", "vocab", "embed", "train", "evaluate", "explain", "profile", "baseline"];

fn run_in_process(cfg: &PipelineConfig) -> anyhow::Result<PipelineRun> {
    let start = Instant::now();
    let mut summaries = BTreeMap::new();
    for s in STAGES {
        let summary = match s {
            "synth" => stages::synth(cfg),
            "preprocess" => stages::preprocess(cfg),
            "vocab" => stages::vocab(cfg),
            "embed" => stages::embed(cfg),
            "train" => stages::train(cfg),
            "evaluate" => stages::evaluate(cfg),
            "explain" => stages::explain(cfg, &ExplainOptions::default()),
            "profile" => stages::profile(cfg),
            _ => stages::baseline(cfg),
        }?;
        summaries.insert(s.to_string(), summary);
    }
    Ok(PipelineRun { summaries, elapsed: start.elapsed() })
}

fn run_binary(dir: &Path) -> Result<BTreeMap<String, Summary>, String> {
    let mut summaries = BTreeMap::new();
    for s in STAGES {
        let out = Command::new(env!("CARGO_BIN_EXE_readmit"))
            .arg("--config")
            .arg(dir.join("pipeline.toml"))
            .arg(s)
            .output()
            .map_err(|e| e.to_string())?;
        if !out.status.success() {
            return Err(format!("{s}: {}", String::from_utf8_lossy(&out.stderr)));
        }
        let line = String::from_utf8_lossy(&out.stdout).lines().last().unwrap_or_default().to_string();
        summaries.insert(s.to_string(), serde_json::from_str(&line).map_err(|e| e.to_string())?);
    }
    Ok(summaries)
}

fn metric(run: &PipelineRun, stage: &str, key: &str) -> f64 {
    run.summaries[stage].metrics[key].as_f64().unwrap_or(f64::NAN)
}

fn signal_recovery(run: &PipelineRun, bayes: f64) -> Outcome {
    let cnn = metric(run, "evaluate", "c_statistic");
    let tfidf = metric(run, "baseline", "tfidf_logistic_c_statistic");
    outcome(
        cnn >= bayes - 0.10 && cnn > tfidf - 0.05,
        format!(
            "CNN test c {cnn:.4} vs Bayes {bayes:.4} − 0.10 = {:.4}; TF-IDF logistic {tfidf:.4} − 0.05 = {:.4}; pipeline {:.0} s",
            bayes - 0.10,
            tfidf - 0.05,
            run.elapsed.as_secs_f64()
        ),
    )
}

fn load_prepared(dir: &Path) -> Vec<PreparedVisit> {
    let text = std::fs::read_to_string(dir.join("prepared.jsonl")).unwrap();
    let body = text.split_once('\n').unwrap().1;
    records::from_str(body, "prepared").unwrap()
}

fn attribution_relevance(dir: &Path, spec: &GeneratorSpec) -> Outcome {
    let signal = spec.signal_tokens();
    let profiles: NodeProfiles =
        serde_json::from_str(&std::fs::read_to_string(dir.join("reports/profiles.json")).unwrap()).unwrap();
    let (mut hits, mut total) = (0usize, 0usize);
    for p in profiles.top_by_max_abs(10) {
        for e in &p.extremes {
            total += 1;
            hits += usize::from(e.tokens.iter().any(|t| signal.contains(t)));
        }
    }
    let share = hits as f64 / total as f64;

    // chance level: share of all scored trigram windows touching a planted token
    let (mut windows, mut touching) = (0usize, 0usize);
    for v in load_prepared(dir).iter().filter(|v| v.fold == Some(Fold::Test)) {
        let words = v.words();
        for w in words.windows(3) {
            windows += 1;
            touching += usize::from(w.iter().any(|t| signal.contains(t)));
        }
    }
    let chance = touching as f64 / windows as f64;
    outcome(
        share >= 0.60,
        format!("{hits}/{total} = {share:.3} of top-10 nodes' extreme trigrams hold a planted token (≥ 0.60; chance {chance:.3})"),
    )
}

fn ordering_sanity(run: &PipelineRun) -> Outcome {
    let cnn = metric(run, "evaluate", "c_statistic");
    let lace = metric(run, "baseline", "lace_logistic_c_statistic");
    outcome(cnn > lace, format!("CNN c {cnn:.4} > LACE-feature logistic c {lace:.4}"))
}

fn files_under(dir: &Path) -> BTreeMap<String, Vec<u8>> {
    let mut out = BTreeMap::new();
    let mut stack = vec![dir.to_path_buf()];
    while let Some(d) = stack.pop() {
        for entry in std::fs::read_dir(&d).unwrap() {
            let p = entry.unwrap().path();
            if p.is_dir() {
                stack.push(p);
            } else {
                out.insert(p.strip_prefix(dir).unwrap().display().to_string(), std::fs::read(&p).unwrap());
            }
        }
    }
    out
}

fn determinism(a: &Path, run: &PipelineRun, b: &Path, binary: &Result<BTreeMap<String, Summary>, String>) -> Outcome {
    let binary = match binary {
        Ok(s) => s,
        Err(e) => return outcome(false, format!("binary pipeline failed: {e}")),
    };
    let (fa, fb) = (files_under(a), files_under(b));
    let differing: Vec<&String> = fa.keys().chain(fb.keys()).filter(|k| fa.get(*k) != fb.get(*k)).collect();
    let summaries_equal = *binary == run.summaries;
    outcome(
        differing.is_empty() && summaries_equal,
        format!(
            "{} artifacts compared across two full runs; {} differ; summary lines {}",
            fa.len(),
            differing.len(),
            if summaries_equal { "identical" } else { "differ" }
        ),
    )
}

// 7 ------------------------------------------------------------------------

fn preprocessing_contracts() -> Outcome {
    let schema = SectionSchema::default();
    let spec = GeneratorSpec::default();
    let lexicon = NameLexicon::new(&spec.names);
    let visits = generate(&spec, 300).unwrap();
    let docs: Vec<Vec<String>> =
        visits.iter().map(|v| section_words(&prepare_note(&v.record.note_text, &schema, &lexicon))).collect();
    let vocab = Vocabulary::build(&docs, 1).unwrap();

    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut length_ok = true;
    let mut idempotent = true;
    for v in &visits {
        // inflate some notes past the limit
        let text = if rng.gen_bool(0.3) { v.record.note_text.repeat(3) } else { v.record.note_text.clone() };
        let sections = prepare_note(&text, &schema, &lexicon);
        let seq = to_token_sequence(&sections, &vocab, DEFAULT_LENGTH).unwrap();
        length_ok &= seq.len() == DEFAULT_LENGTH && seq.tokens[seq.original_length..].iter().all(|&t| t == seq.pad_id);
        for s in &sections {
            idempotent &= deidentify(&s.text, &lexicon) == s.text;
        }
        let raw = deidentify(&text, &lexicon);
        idempotent &= deidentify(&raw, &lexicon) == raw;
    }

    let golden_note = include_str!("../../core/tests/data/reorder_note.txt");
    let golden_expected = include_str!("../../core/tests/data/reorder_note.expected");
    let got: Vec<String> = prepare_note(golden_note, &schema, &NameLexicon::new(["smith"]))
        .iter()
        .map(|s| format!("{}\t{}", s.name, s.text))
        .collect();
    let sections_golden = got.iter().map(String::as_str).eq(golden_expected.lines());

    let dates = include_str!("../../core/tests/data/dates.tsv");
    let date_lexicon = NameLexicon::new(["smith", "garcia"]);
    let dates_golden = dates.lines().filter(|l| !l.starts_with('#') && !l.is_empty()).all(|l| {
        let (input, expected) = l.split_once('\t').unwrap();
        deidentify(input, &date_lexicon) == expected
    });
    outcome(
        length_ok && idempotent && sections_golden && dates_golden,
        format!(
            "length {DEFAULT_LENGTH}: {length_ok}; de-identification idempotent: {idempotent}; section golden: {sections_golden}; date golden: {dates_golden}"
        ),
    )
}

// 8 ------------------------------------------------------------------------

fn sgns_topics() -> Outcome {
    let spec = GeneratorSpec::two_topic(5);
    let schema = SectionSchema::default();
    let lexicon = NameLexicon::new(&spec.names);
    let docs: Vec<Vec<String>> = generate(&spec, 300)
        .unwrap()
        .iter()
        .map(|v| section_words(&prepare_note(&v.record.note_text, &schema, &lexicon)))
        .collect();
    let vocab = Vocabulary::build(&docs, 5).unwrap();
    let ids: Vec<Vec<u32>> = docs.iter().map(|d| d.iter().map(|w| vocab.id_or_unk(w)).collect()).collect();
    let cfg = SgnsConfig { epochs: 5, seed: 1, ..SgnsConfig::default() };
    let m = train_sgns(&ids, &vocab, &cfg).unwrap();
    let topic_ids: Vec<Vec<u32>> =
        spec.topics.iter().map(|t| t.pool.iter().filter_map(|w| vocab.id(w)).collect()).collect();
    let (mut intra, mut ni, mut inter, mut nx) = (0.0, 0usize, 0.0, 0usize);
    for (a, ta) in topic_ids.iter().enumerate() {
        for (b, tb) in topic_ids.iter().enumerate() {
            for &x in ta {
                for &y in tb {
                    if x != y {
                        let c = cosine(m.row(x), m.row(y)).unwrap();
                        if a == b {
                            intra += c;
                            ni += 1;
                        } else {
                            inter += c;
                            nx += 1;
                        }
                    }
                }
            }
        }
    }
    let (intra, inter) = (intra / ni as f64, inter / nx as f64);
    outcome(
        intra - inter >= 0.1,
        format!("intra-topic cosine {intra:.4} − inter-topic {inter:.4} = {:.4} (≥ 0.1)", intra - inter),
    )
}

fn main() -> ExitCode {
    let mut gate = Gate { failures: 0 };
    gate.record(1, "gradient correctness", Some(Duration::from_secs(10)), gradient_correctness);
    gate.record(2, "attribution reconstruction", Some(Duration::from_secs(1)), attribution_reconstruction);
    gate.record(3, "c-statistic oracle equivalence", Some(Duration::from_secs(30)), c_statistic_oracle);
    gate.record(7, "preprocessing contracts", Some(Duration::from_secs(5)), preprocessing_contracts);
    gate.record(8, "SGNS topic separation", None, sgns_topics);

    let spec = GeneratorSpec::default();
    let bayes = bayes_auc(&spec).unwrap();
    let dir_a = tempfile::tempdir().unwrap();
    let dir_b = tempfile::tempdir().unwrap();
    std::fs::write(dir_b.path().join("pipeline.toml"), "").unwrap();
    let cfg = PipelineConfig::from_toml("", &[], dir_a.path()).unwrap();
    match run_in_process(&cfg) {
        Ok(run) => {
            let limit = Some(Duration::from_secs(600));
            gate.record(4, "signal recovery", None, || {
                let mut o = signal_recovery(&run, bayes);
                if run.elapsed > limit.unwrap() {
                    o.pass = false;
                    o.detail.push_str("; exceeded 600 s");
                }
                o
            });
            gate.record(5, "attribution relevance", None, || attribution_relevance(dir_a.path(), &spec));
            gate.record(6, "ordering sanity", None, || ordering_sanity(&run));
            let binary = run_binary(dir_b.path());
            std::fs::remove_file(dir_b.path().join("pipeline.toml")).unwrap();
            gate.record(9, "determinism", None, || determinism(dir_a.path(), &run, dir_b.path(), &binary));
        }
        Err(e) => {
            for (id, name) in
                [(4, "signal recovery"), (5, "attribution relevance"), (6, "ordering sanity"), (9, "determinism")]
            {
                gate.record(id, name, None, || outcome(false, format!("pipeline failed: {e:#}")));
            }
        }
    }

    println!("{} of 9 criteria failed", gate.failures);
    if gate.failures == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
