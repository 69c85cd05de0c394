//! End-to-end run: annotate, split, build examples, train both learned
//! planners, plan the evaluation inputs, realize every row and score it.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs::File;
use std::io::BufWriter;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::corpus::{
    annotate_corpus, build_examples, compute_stats, load_corpus, split_corpus, write_jsonl, CorpusFormat, CorpusStats,
    TrainingExample,
};
use crate::lexicon::Lexicon;
use crate::metrics::{evaluate_system, stable_mean, EvalOptions, MetricReport, VectorTable};
use crate::plan::{plan_similarity, plan_tokens, Plan};
use crate::planner::{
    save_model, train_ngram_planner, train_type_planner, ModelMetadata, PlannerKind, PlannerModel, SamplingParams,
};
use crate::realizer::{
    build_index, plan_adherence, realize_noplan, realize_retrieval, realize_template, RealizationRecord,
    RealizationWeights, RealizerKind, RetrievalIndex, TemplateSet,
};
use crate::text::tokenize;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("config line {line}: {reason}")]
    Syntax { line: usize, reason: String },
    #[error("unknown config key {0:?}")]
    UnknownKey(String),
    #[error("config key {key}: invalid value {value:?} ({reason})")]
    InvalidValue { key: String, value: String, reason: String },
    #[error("config key {key}: {path} does not exist")]
    MissingPath { key: String, path: PathBuf },
    #[error("config key {0} is required")]
    Missing(&'static str),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Error)]
#[error("stage {stage}: {message}")]
pub struct PipelineError {
    pub stage: &'static str,
    pub message: String,
}

fn stage<E: std::fmt::Display>(stage: &'static str) -> impl FnOnce(E) -> PipelineError {
    move |e| PipelineError {
        stage,
        message: e.to_string(),
    }
}

/// Learned or rule-based source of response plans.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PlannerChoice {
    Symbolic,
    Type,
    Ngram,
}

impl std::str::FromStr for PlannerChoice {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "symbolic" => Ok(PlannerChoice::Symbolic),
            "type" => Ok(PlannerChoice::Type),
            "ngram" => Ok(PlannerChoice::Ngram),
            other => Err(format!("unknown planner {other:?} (symbolic|type|ngram)")),
        }
    }
}

impl PlannerChoice {
    pub fn name(self) -> &'static str {
        match self {
            PlannerChoice::Symbolic => "symbolic",
            PlannerChoice::Type => "type",
            PlannerChoice::Ngram => "ngram",
        }
    }
}

/// Run configuration, read from `key = value` lines. Unset optional paths
/// fall back to the bundled lexicon and templates.
#[derive(Debug, Clone, PartialEq)]
pub struct Config {
    pub corpus: Option<PathBuf>,
    pub format: CorpusFormat,
    pub corpus_tag: String,
    pub lexicon: Option<PathBuf>,
    pub templates: Option<PathBuf>,
    pub output_dir: PathBuf,
    pub planner: PlannerChoice,
    pub model: Option<PathBuf>,
    pub dataset: Option<PathBuf>,
    pub order: usize,
    pub sampling: SamplingParams,
    pub realizer: RealizerKind,
    pub weights: RealizationWeights,
    pub split: (f64, f64, f64),
    pub split_seed: u64,
    pub vectors: Option<PathBuf>,
}

impl Default for Config {
    fn default() -> Self {
        Config {
            corpus: None,
            format: CorpusFormat::Jsonl,
            corpus_tag: "corpus".into(),
            lexicon: None,
            templates: None,
            output_dir: PathBuf::from("askframe-out"),
            planner: PlannerChoice::Ngram,
            model: None,
            dataset: None,
            order: crate::planner::ngram::DEFAULT_ORDER,
            sampling: SamplingParams::default(),
            realizer: RealizerKind::Retrieval,
            weights: RealizationWeights::default(),
            split: (0.8, 0.1, 0.1),
            split_seed: 42,
            vectors: None,
        }
    }
}

pub const CONFIG_KEYS: [&str; 20] = [
    "corpus",
    "format",
    "corpus_tag",
    "lexicon",
    "templates",
    "output_dir",
    "planner",
    "model",
    "dataset",
    "order",
    "top_p",
    "seed",
    "max_tokens",
    "retries",
    "realizer",
    "w_plan",
    "w_input",
    "split",
    "split_seed",
    "vectors",
];

fn path_text(p: &Option<PathBuf>) -> String {
    p.as_ref().map(|p| p.display().to_string()).unwrap_or_default()
}

impl Config {
    pub fn load(path: impl AsRef<Path>) -> Result<Self, ConfigError> {
        Config::parse(&std::fs::read_to_string(path)?)
    }

    /// `key = value` per line; blank lines and `#` comments skipped.
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let mut config = Config::default();
        for (idx, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| ConfigError::Syntax {
                line: idx + 1,
                reason: "expected key = value".into(),
            })?;
            config.set(key.trim(), value.trim())?;
        }
        Ok(config)
    }

    /// Sets one key from its text form; used for both files and flag overrides.
    pub fn set(&mut self, key: &str, value: &str) -> Result<(), ConfigError> {
        let invalid = |reason: String| ConfigError::InvalidValue {
            key: key.to_string(),
            value: value.to_string(),
            reason,
        };
        let opt_path = |v: &str| (!v.is_empty()).then(|| PathBuf::from(v));
        fn num<T: std::str::FromStr>(v: &str) -> Result<T, String>
        where
            T::Err: std::fmt::Display,
        {
            v.parse::<T>().map_err(|e| e.to_string())
        }
        match key {
            "corpus" => self.corpus = opt_path(value),
            "format" => self.format = value.parse().map_err(invalid)?,
            "corpus_tag" => self.corpus_tag = value.to_string(),
            "lexicon" => self.lexicon = opt_path(value),
            "templates" => self.templates = opt_path(value),
            "output_dir" => self.output_dir = PathBuf::from(value),
            "planner" => self.planner = value.parse().map_err(invalid)?,
            "model" => self.model = opt_path(value),
            "dataset" => self.dataset = opt_path(value),
            "order" => self.order = num(value).map_err(invalid)?,
            "top_p" => self.sampling.top_p = num(value).map_err(invalid)?,
            "seed" => self.sampling.seed = num(value).map_err(invalid)?,
            "max_tokens" => self.sampling.max_tokens = num(value).map_err(invalid)?,
            "retries" => self.sampling.retries = num(value).map_err(invalid)?,
            "realizer" => {
                self.realizer = value.parse().map_err(invalid)?;
                if self.realizer == RealizerKind::Noplan {
                    return Err(invalid("plan-fed rows need template or retrieval".into()));
                }
            }
            "w_plan" => self.weights.w_plan = num(value).map_err(invalid)?,
            "w_input" => self.weights.w_input = num(value).map_err(invalid)?,
            "split" => {
                let parts = value
                    .split(',')
                    .map(|p| num::<f64>(p.trim()))
                    .collect::<Result<Vec<_>, _>>()
                    .map_err(invalid)?;
                let [a, b, c] = parts[..] else {
                    return Err(invalid("expected three comma-separated ratios".into()));
                };
                self.split = (a, b, c);
            }
            "split_seed" => self.split_seed = num(value).map_err(invalid)?,
            "vectors" => self.vectors = opt_path(value),
            other => return Err(ConfigError::UnknownKey(other.to_string())),
        }
        Ok(())
    }

    /// Numeric ranges and existence of every referenced input path.
    pub fn validate(&self) -> Result<(), ConfigError> {
        let bad = |key: &str, value: String, reason: &str| ConfigError::InvalidValue {
            key: key.into(),
            value,
            reason: reason.into(),
        };
        if self.order < 2 {
            return Err(bad("order", self.order.to_string(), "must be at least 2"));
        }
        self.sampling
            .validate()
            .map_err(|e| bad("top_p/max_tokens", String::new(), &e.to_string()))?;
        self.weights
            .validate()
            .map_err(|e| bad("w_plan/w_input", String::new(), &e.to_string()))?;
        let (a, b, c) = self.split;
        if [a, b, c].iter().any(|r| !(0.0..=1.0).contains(r)) || (a + b + c - 1.0).abs() > 1e-9 {
            return Err(bad(
                "split",
                format!("{a},{b},{c}"),
                "ratios must lie in [0, 1] and sum to 1",
            ));
        }
        let inputs = [
            ("corpus", &self.corpus),
            ("lexicon", &self.lexicon),
            ("templates", &self.templates),
            ("model", &self.model),
            ("dataset", &self.dataset),
            ("vectors", &self.vectors),
        ];
        for (key, path) in inputs {
            if let Some(p) = path {
                if !p.exists() {
                    return Err(ConfigError::MissingPath {
                        key: key.into(),
                        path: p.clone(),
                    });
                }
            }
        }
        Ok(())
    }

    /// Canonical key order, every key present; the form embedded in reports.
    pub fn snapshot(&self) -> BTreeMap<String, String> {
        let format = match self.format {
            CorpusFormat::Jsonl => "jsonl",
            CorpusFormat::Csv2Col => "csv2col",
        };
        let (a, b, c) = self.split;
        let values = [
            path_text(&self.corpus),
            format.to_string(),
            self.corpus_tag.clone(),
            path_text(&self.lexicon),
            path_text(&self.templates),
            self.output_dir.display().to_string(),
            self.planner.name().to_string(),
            path_text(&self.model),
            path_text(&self.dataset),
            self.order.to_string(),
            self.sampling.top_p.to_string(),
            self.sampling.seed.to_string(),
            self.sampling.max_tokens.to_string(),
            self.sampling.retries.to_string(),
            self.realizer.name().to_string(),
            self.weights.w_plan.to_string(),
            self.weights.w_input.to_string(),
            format!("{a},{b},{c}"),
            self.split_seed.to_string(),
            path_text(&self.vectors),
        ];
        CONFIG_KEYS
            .iter()
            .zip(values)
            .map(|(k, v)| (k.to_string(), v))
            .collect()
    }

    pub fn to_text(&self) -> String {
        let snap = self.snapshot();
        let mut out = String::new();
        for key in CONFIG_KEYS {
            let _ = writeln!(out, "{key} = {}", snap[key]);
        }
        out
    }

    pub fn load_lexicon(&self) -> Result<Lexicon, crate::lexicon::LexiconError> {
        match &self.lexicon {
            Some(p) => Lexicon::load(p),
            None => Ok(Lexicon::default()),
        }
    }

    pub fn load_templates(&self) -> Result<TemplateSet, crate::realizer::RealizerError> {
        match &self.templates {
            Some(p) => TemplateSet::load(p),
            None => Ok(TemplateSet::default()),
        }
    }
}

/// Planning-phase scores of one learned planner against silver plans.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlanningScore {
    pub planner: String,
    pub exact_match: f64,
    pub type_accuracy: f64,
    pub mean_plan_similarity: f64,
    pub fallbacks: usize,
    /// Metrics over plan token strings.
    pub metrics: MetricReport,
}

/// One realization row: which plan fed the realizer and how it scored.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportRow {
    pub name: String,
    pub planner: Option<String>,
    pub realizer: String,
    pub plan_adherence: f64,
    pub metrics: MetricReport,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PipelineReport {
    pub run_id: String,
    pub config: BTreeMap<String, String>,
    pub corpus_sha256: String,
    pub lexicon_hash: String,
    pub stats: CorpusStats,
    pub split_dialogues: [usize; 3],
    /// `test`, or `train` when the test split holds no examples.
    pub evaluated_on: String,
    pub n_eval_examples: usize,
    pub planning: Vec<PlanningScore>,
    pub rows: Vec<ReportRow>,
    pub outputs: BTreeMap<String, String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PipelineRun {
    pub run_id: String,
    pub config: Config,
    pub output_dir: PathBuf,
    pub report: PipelineReport,
}

impl PipelineRun {
    pub fn output(&self, name: &str) -> Option<PathBuf> {
        self.report.outputs.get(name).map(|f| self.output_dir.join(f))
    }
}

#[derive(Debug, Clone, Serialize)]
struct PlanRecord<'a> {
    input: &'a str,
    input_plan: &'a Plan,
    gold_plan: &'a Plan,
    plan: &'a Plan,
    used_fallback: bool,
}

fn write_lines<T: Serialize>(path: &Path, items: &[T]) -> std::io::Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    write_jsonl(&mut w, items)?;
    std::io::Write::flush(&mut w)
}

struct Realizer<'a> {
    kind: RealizerKind,
    index: &'a RetrievalIndex,
    templates: &'a TemplateSet,
    lexicon: &'a Lexicon,
    weights: &'a RealizationWeights,
}

impl Realizer<'_> {
    fn realize(&self, input: &str, plan: Option<&Plan>) -> String {
        match (self.kind, plan) {
            (RealizerKind::Template, Some(p)) => realize_template(p, self.templates, self.lexicon),
            (RealizerKind::Retrieval, Some(p)) => realize_retrieval(self.index, input, p, self.weights).to_string(),
            _ => realize_noplan(self.index, input).to_string(),
        }
    }
}

/// Row name, planner name, plans fed to the realizer.
type Feed<'a> = (&'a str, Option<&'a str>, Option<&'a [Plan]>);

pub fn run_pipeline(config: &Config) -> Result<PipelineRun, PipelineError> {
    config.validate().map_err(stage("config"))?;
    let corpus_path = config
        .corpus
        .as_ref()
        .ok_or(ConfigError::Missing("corpus"))
        .map_err(stage("config"))?;
    let lexicon = config.load_lexicon().map_err(stage("config"))?;
    let templates = config.load_templates().map_err(stage("config"))?;
    let vectors = match &config.vectors {
        Some(p) => Some(VectorTable::load(p).map_err(stage("config"))?),
        None => None,
    };
    let out = &config.output_dir;
    std::fs::create_dir_all(out).map_err(stage("config"))?;
    let mut outputs: BTreeMap<String, String> = BTreeMap::new();

    // annotate
    let corpus_bytes = std::fs::read(corpus_path).map_err(stage("annotate"))?;
    let corpus_sha256 = format!("{:x}", Sha256::digest(&corpus_bytes));
    let mut dialogues = load_corpus(corpus_path, config.format).map_err(stage("annotate"))?;
    for d in &mut dialogues {
        if d.corpus_tag.is_empty() {
            d.corpus_tag = config.corpus_tag.clone();
        }
    }
    let annotated = annotate_corpus(&dialogues, &lexicon);
    write_lines(&out.join("annotated.jsonl"), &annotated).map_err(stage("annotate"))?;
    outputs.insert("annotated".into(), "annotated.jsonl".into());
    let stats = compute_stats(&annotated).map_err(stage("annotate"))?;

    // split
    let split = split_corpus(&annotated, config.split, config.split_seed).map_err(stage("split"))?;
    for (name, part) in [("train", &split.train), ("val", &split.val), ("test", &split.test)] {
        let file = format!("{name}.jsonl");
        write_lines(&out.join(&file), part).map_err(stage("split"))?;
        outputs.insert(format!("split_{name}"), file);
    }

    // build
    let train = build_examples(&split.train);
    let test = build_examples(&split.test);
    if train.is_empty() {
        return Err(PipelineError {
            stage: "build",
            message: "training split yields no examples".into(),
        });
    }
    let (eval, evaluated_on): (&[TrainingExample], &str) = if test.is_empty() {
        (&train, "train")
    } else {
        (&test, "test")
    };
    write_lines(&out.join("train_examples.jsonl"), &train).map_err(stage("build"))?;
    write_lines(&out.join("eval_examples.jsonl"), eval).map_err(stage("build"))?;
    outputs.insert("train_examples".into(), "train_examples.jsonl".into());
    outputs.insert("eval_examples".into(), "eval_examples.jsonl".into());

    // train
    let metadata = ModelMetadata {
        corpus_tag: config.corpus_tag.clone(),
        lexicon_hash: lexicon.content_hash(),
        created_at: None,
        n_examples: train.len(),
    };
    let type_model = train_type_planner(&train, &lexicon).map_err(stage("train"))?;
    let ngram = train_ngram_planner(&train, config.order, &lexicon).map_err(stage("train"))?;
    let planners = [
        (
            "type",
            PlannerModel {
                metadata: metadata.clone(),
                model: PlannerKind::TypeTransition(type_model.clone()),
            },
        ),
        (
            "ngram",
            PlannerModel {
                metadata,
                model: PlannerKind::Ngram {
                    ngram,
                    fallback: Some(type_model),
                },
            },
        ),
    ];
    for (name, model) in &planners {
        let file = format!("{name}.model");
        save_model(model, out.join(&file)).map_err(stage("train"))?;
        outputs.insert(format!("model_{name}"), file);
    }

    // plan
    let mut generated: Vec<(&str, Vec<Plan>)> = Vec::new();
    let mut planning = Vec::new();
    for (name, model) in &planners {
        let mut plans = Vec::with_capacity(eval.len());
        let mut fallbacks = 0;
        let mut records = Vec::with_capacity(eval.len());
        for (i, ex) in eval.iter().enumerate() {
            let params = SamplingParams {
                seed: config.sampling.seed.wrapping_add(i as u64),
                ..config.sampling
            };
            let g = model.generate(&ex.input_utterance, &ex.input_plan, &params);
            fallbacks += usize::from(g.used_fallback);
            plans.push(g.plan);
            records.push(g.used_fallback);
        }
        let lines: Vec<PlanRecord> = eval
            .iter()
            .zip(&plans)
            .zip(&records)
            .map(|((ex, plan), &used_fallback)| PlanRecord {
                input: &ex.input_utterance,
                input_plan: &ex.input_plan,
                gold_plan: &ex.response_plan,
                plan,
                used_fallback,
            })
            .collect();
        let file = format!("plans_{name}.jsonl");
        write_lines(&out.join(&file), &lines).map_err(stage("plan"))?;
        outputs.insert(format!("plans_{name}"), file);
        planning.push(score_plans(name, &plans, eval, fallbacks, vectors.as_ref()).map_err(stage("plan"))?);
        generated.push((name, plans));
    }

    // realize and evaluate
    let index = build_index(&train, &lexicon).map_err(stage("realize"))?;
    let symbolic: Vec<Plan> = eval.iter().map(|ex| ex.response_plan.clone()).collect();
    let mut feeds: Vec<Feed> = vec![("No Plan", None, None), ("Symbolic", Some("symbolic"), Some(&symbolic))];
    for (name, plans) in &generated {
        let row = if *name == "type" { "Type" } else { "NGram" };
        feeds.push((row, Some(name), Some(plans)));
    }
    let references: Vec<Vec<Vec<String>>> = eval.iter().map(|ex| vec![tokenize(&ex.response_utterance)]).collect();
    let mut rows = Vec::new();
    for (row_name, planner, plans) in feeds {
        let kind = if plans.is_some() {
            config.realizer
        } else {
            RealizerKind::Noplan
        };
        let realizer = Realizer {
            kind,
            index: &index,
            templates: &templates,
            lexicon: &lexicon,
            weights: &config.weights,
        };
        let mut records = Vec::with_capacity(eval.len());
        for (i, ex) in eval.iter().enumerate() {
            let plan = plans.map(|p| &p[i]);
            let response = realizer.realize(&ex.input_utterance, plan);
            records.push(RealizationRecord {
                input: ex.input_utterance.clone(),
                plan: plan.cloned(),
                adherence: plan_adherence(&ex.response_plan, &response, &lexicon),
                response,
                realizer: kind.name().to_string(),
            });
        }
        let slug = row_name.to_lowercase().replace(' ', "_");
        let file = format!("realized_{slug}.jsonl");
        write_lines(&out.join(&file), &records).map_err(stage("realize"))?;
        outputs.insert(format!("realized_{slug}"), file);

        let hyps: Vec<Vec<String>> = records.iter().map(|r| tokenize(&r.response)).collect();
        let options = EvalOptions {
            vectors: vectors.as_ref(),
        };
        let metrics = evaluate_system(&hyps, &references, &options).map_err(stage("evaluate"))?;
        let mut adherence: Vec<f64> = records.iter().map(|r| r.adherence).collect();
        rows.push(ReportRow {
            name: row_name.to_string(),
            planner: planner.map(String::from),
            realizer: kind.name().to_string(),
            plan_adherence: stable_mean(&mut adherence),
            metrics,
        });
    }

    // report
    let snapshot = config.snapshot();
    let mut hasher = Sha256::new();
    for (k, v) in &snapshot {
        hasher.update(format!("{k}={v}\n"));
    }
    hasher.update(&corpus_sha256);
    let run_id = format!("{:x}", hasher.finalize())[..16].to_string();
    outputs.insert("report".into(), "report.json".into());
    let report = PipelineReport {
        run_id: run_id.clone(),
        config: snapshot,
        corpus_sha256,
        lexicon_hash: lexicon.content_hash(),
        stats,
        split_dialogues: [split.train.len(), split.val.len(), split.test.len()],
        evaluated_on: evaluated_on.to_string(),
        n_eval_examples: eval.len(),
        planning,
        rows,
        outputs,
    };
    let mut json = serde_json::to_string_pretty(&report).map_err(stage("report"))?;
    json.push('\n');
    std::fs::write(out.join("report.json"), json).map_err(stage("report"))?;
    Ok(PipelineRun {
        run_id,
        config: config.clone(),
        output_dir: out.clone(),
        report,
    })
}

fn score_plans(
    name: &str,
    plans: &[Plan],
    eval: &[TrainingExample],
    fallbacks: usize,
    vectors: Option<&VectorTable>,
) -> Result<PlanningScore, crate::metrics::MetricError> {
    let n = eval.len() as f64;
    let exact = plans.iter().zip(eval).filter(|(p, ex)| **p == ex.response_plan).count();
    let typed = plans
        .iter()
        .zip(eval)
        .filter(|(p, ex)| p.types() == ex.response_plan.types())
        .count();
    let mut sims: Vec<f64> = plans
        .iter()
        .zip(eval)
        .map(|(p, ex)| plan_similarity(p, &ex.response_plan))
        .collect();
    let hyps: Vec<Vec<String>> = plans.iter().map(plan_tokens).collect();
    let refs: Vec<Vec<Vec<String>>> = eval.iter().map(|ex| vec![plan_tokens(&ex.response_plan)]).collect();
    Ok(PlanningScore {
        planner: name.to_string(),
        exact_match: exact as f64 / n,
        type_accuracy: typed as f64 / n,
        mean_plan_similarity: stable_mean(&mut sims),
        fallbacks,
        metrics: evaluate_system(&hyps, &refs, &EvalOptions { vectors })?,
    })
}
