//! Python bindings: plans, the symbolic extractor, learned planners,
//! realizers, metrics and the end-to-end pipeline.

use std::collections::BTreeMap;
use std::fs::File;
use std::io::BufReader;
use std::path::PathBuf;

use pyo3::exceptions::{PyOSError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;

use askframe_core::corpus::{read_jsonl, write_jsonl, TrainingExample};
use askframe_core::metrics::{bleu as core_bleu, evaluate_system, EvalOptions, EvalPair, VectorTable};
use askframe_core::pipeline::{run_pipeline as core_run_pipeline, Config};
use askframe_core::planner::{ModelMetadata, PlannerKind, PlannerModel, SamplingParams};
use askframe_core::realizer::{plan_adherence, realize_template as core_realize_template, TemplateSet};
use askframe_core::synthetic::{generate_synthetic, SyntheticConfig};
use askframe_core::text::tokenize as core_tokenize;
use askframe_core::{
    extract_plan as core_extract_plan, load_model, parse_plan as core_parse_plan, plan_similarity as core_similarity,
    save_model, train_ngram_planner, train_type_planner, Lexicon, Plan,
};

fn value_err(e: impl std::fmt::Display) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn os_err(e: impl std::fmt::Display) -> PyErr {
    PyOSError::new_err(e.to_string())
}

fn lexicon(path: Option<PathBuf>) -> PyResult<Lexicon> {
    match path {
        Some(p) => Lexicon::load(p).map_err(value_err),
        None => Ok(Lexicon::default()),
    }
}

/// A response plan: one or more typed (action, target) elements.
#[pyclass(name = "Plan", frozen, eq, skip_from_py_object)]
#[derive(Clone, PartialEq)]
struct PyPlan(Plan);

#[pymethods]
impl PyPlan {
    #[new]
    fn new(text: &str) -> PyResult<Self> {
        core_parse_plan(text).map(PyPlan).map_err(value_err)
    }

    /// Element types in order, e.g. ["PERFORM", "GAIN"].
    fn types(&self) -> Vec<String> {
        self.0.types().iter().map(|t| t.as_str().to_string()).collect()
    }

    /// (type, action, target) triples with space-joined words.
    fn elements(&self) -> Vec<(String, String, String)> {
        self.0
            .elements()
            .iter()
            .map(|e| {
                (
                    e.ptype().as_str().to_string(),
                    e.action().join(" "),
                    e.target().join(" "),
                )
            })
            .collect()
    }

    fn similarity(&self, other: &PyPlan) -> f64 {
        core_similarity(&self.0, &other.0)
    }

    fn __len__(&self) -> usize {
        self.0.len()
    }

    fn __str__(&self) -> String {
        self.0.to_string()
    }

    fn __repr__(&self) -> String {
        format!("Plan({:?})", self.0.to_string())
    }
}

#[pyfunction]
fn parse_plan(text: &str) -> PyResult<PyPlan> {
    PyPlan::new(text)
}

#[pyfunction]
#[pyo3(signature = (utterance, lexicon_path=None))]
fn extract_plan(utterance: &str, lexicon_path: Option<PathBuf>) -> PyResult<PyPlan> {
    Ok(PyPlan(core_extract_plan(utterance, &lexicon(lexicon_path)?)))
}

#[pyfunction]
fn plan_similarity(a: &PyPlan, b: &PyPlan) -> f64 {
    core_similarity(&a.0, &b.0)
}

#[pyfunction]
fn tokenize(text: &str) -> Vec<String> {
    core_tokenize(text)
}

/// A trained type-transition or n-gram planner.
#[pyclass(name = "Planner", frozen)]
struct PyPlanner(PlannerModel);

#[pymethods]
impl PyPlanner {
    /// Train on a JSONL file of training examples.
    #[staticmethod]
    #[pyo3(signature = (dataset, kind="ngram", order=3, corpus_tag="corpus", lexicon_path=None))]
    fn train(
        dataset: PathBuf,
        kind: &str,
        order: usize,
        corpus_tag: &str,
        lexicon_path: Option<PathBuf>,
    ) -> PyResult<Self> {
        let lexicon = lexicon(lexicon_path)?;
        let file = File::open(&dataset).map_err(os_err)?;
        let examples: Vec<TrainingExample> = read_jsonl(BufReader::new(file)).map_err(value_err)?;
        let fallback = train_type_planner(&examples, &lexicon).map_err(value_err)?;
        let model = match kind {
            "type" => PlannerKind::TypeTransition(fallback),
            "ngram" => PlannerKind::Ngram {
                ngram: train_ngram_planner(&examples, order, &lexicon).map_err(value_err)?,
                fallback: Some(fallback),
            },
            other => return Err(value_err(format!("unknown planner kind {other:?} (type|ngram)"))),
        };
        let metadata = ModelMetadata {
            corpus_tag: corpus_tag.to_string(),
            lexicon_hash: lexicon.content_hash(),
            created_at: None,
            n_examples: examples.len(),
        };
        Ok(PyPlanner(PlannerModel { metadata, model }))
    }

    #[staticmethod]
    fn load(path: PathBuf) -> PyResult<Self> {
        load_model(path).map(PyPlanner).map_err(value_err)
    }

    fn save(&self, path: PathBuf) -> PyResult<()> {
        save_model(&self.0, path).map_err(os_err)
    }

    #[getter]
    fn kind(&self) -> &'static str {
        self.0.kind_name()
    }

    #[getter]
    fn n_examples(&self) -> usize {
        self.0.metadata.n_examples
    }

    /// Response plan for `utterance`; the input plan is extracted
    /// symbolically unless given.
    #[pyo3(signature = (utterance, input_plan=None, top_p=0.9, seed=0, max_tokens=32, retries=3))]
    fn generate(
        &self,
        utterance: &str,
        input_plan: Option<&PyPlan>,
        top_p: f64,
        seed: u64,
        max_tokens: usize,
        retries: usize,
    ) -> PyResult<PyPlan> {
        let params = SamplingParams {
            top_p,
            max_tokens,
            retries,
            seed,
        };
        params.validate().map_err(value_err)?;
        let input_plan = match input_plan {
            Some(p) => p.0.clone(),
            None => core_extract_plan(utterance, &Lexicon::default()),
        };
        Ok(PyPlan(self.0.generate(utterance, &input_plan, &params).plan))
    }
}

#[pyfunction]
#[pyo3(signature = (plan, templates_path=None, lexicon_path=None))]
fn realize_template(plan: &PyPlan, templates_path: Option<PathBuf>, lexicon_path: Option<PathBuf>) -> PyResult<String> {
    let templates = match templates_path {
        Some(p) => TemplateSet::load(p).map_err(value_err)?,
        None => TemplateSet::default(),
    };
    Ok(core_realize_template(&plan.0, &templates, &lexicon(lexicon_path)?))
}

#[pyfunction]
#[pyo3(signature = (plan, response, lexicon_path=None))]
fn adherence(plan: &PyPlan, response: &str, lexicon_path: Option<PathBuf>) -> PyResult<f64> {
    Ok(plan_adherence(&plan.0, response, &lexicon(lexicon_path)?))
}

/// Each reference entry is either one string or a list of strings.
fn reference_sets(references: &Bound<'_, PyAny>) -> PyResult<Vec<Vec<Vec<String>>>> {
    let mut out = Vec::new();
    for item in references.try_iter()? {
        let item = item?;
        let refs: Vec<String> = match item.extract::<String>() {
            Ok(s) => vec![s],
            Err(_) => item.extract()?,
        };
        out.push(refs.iter().map(|r| core_tokenize(r)).collect());
    }
    Ok(out)
}

#[pyfunction]
#[pyo3(signature = (hypotheses, references, max_n=4))]
fn bleu(hypotheses: Vec<String>, references: &Bound<'_, PyAny>, max_n: usize) -> PyResult<Vec<f64>> {
    let refs = reference_sets(references)?;
    if refs.len() != hypotheses.len() {
        return Err(value_err("hypotheses and references differ in length"));
    }
    let pairs: Vec<EvalPair> = hypotheses
        .iter()
        .zip(refs)
        .map(|(h, r)| EvalPair::new(core_tokenize(h), r))
        .collect();
    core_bleu(&pairs, max_n).map_err(value_err)
}

/// All metrics as a dict; `cider` and `embedding_f1` may be None.
#[pyfunction]
#[pyo3(signature = (hypotheses, references, vectors_path=None))]
fn evaluate<'py>(
    py: Python<'py>,
    hypotheses: Vec<String>,
    references: &Bound<'py, PyAny>,
    vectors_path: Option<PathBuf>,
) -> PyResult<Bound<'py, PyAny>> {
    let refs = reference_sets(references)?;
    let hyps: Vec<Vec<String>> = hypotheses.iter().map(|h| core_tokenize(h)).collect();
    let vectors = match vectors_path {
        Some(p) => Some(VectorTable::load(p).map_err(value_err)?),
        None => None,
    };
    let report = evaluate_system(
        &hyps,
        &refs,
        &EvalOptions {
            vectors: vectors.as_ref(),
        },
    )
    .map_err(value_err)?;
    json_to_py(py, &serde_json::to_string(&report).map_err(value_err)?)
}

fn json_to_py<'py>(py: Python<'py>, text: &str) -> PyResult<Bound<'py, PyAny>> {
    py.import("json")?.call_method1("loads", (text,))
}

/// Runs the full pipeline; returns the report as a dict.
#[pyfunction]
#[pyo3(signature = (config_path=None, overrides=None))]
fn run_pipeline<'py>(
    py: Python<'py>,
    config_path: Option<PathBuf>,
    overrides: Option<BTreeMap<String, String>>,
) -> PyResult<Bound<'py, PyAny>> {
    let mut config = match config_path {
        Some(p) => Config::load(p).map_err(value_err)?,
        None => Config::default(),
    };
    for (k, v) in overrides.unwrap_or_default() {
        config.set(&k, &v).map_err(value_err)?;
    }
    let run = py.detach(|| core_run_pipeline(&config)).map_err(value_err)?;
    let report = json_to_py(py, &serde_json::to_string(&run.report).map_err(value_err)?)?;
    let out = PyDict::new(py);
    out.set_item("run_id", run.run_id)?;
    out.set_item("output_dir", run.output_dir)?;
    out.set_item("report", report)?;
    Ok(out.into_any())
}

/// Writes a seeded synthetic dialogue corpus as JSONL.
#[pyfunction]
#[pyo3(signature = (path, n_dialogues=300, seed=7))]
fn write_synthetic_corpus(path: PathBuf, n_dialogues: usize, seed: u64) -> PyResult<()> {
    let corpus = generate_synthetic(&SyntheticConfig { n_dialogues, seed });
    let file = File::create(path).map_err(os_err)?;
    write_jsonl(std::io::BufWriter::new(file), &corpus).map_err(os_err)
}

#[pymodule]
fn askframe(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyPlan>()?;
    m.add_class::<PyPlanner>()?;
    m.add_function(wrap_pyfunction!(parse_plan, m)?)?;
    m.add_function(wrap_pyfunction!(extract_plan, m)?)?;
    m.add_function(wrap_pyfunction!(plan_similarity, m)?)?;
    m.add_function(wrap_pyfunction!(tokenize, m)?)?;
    m.add_function(wrap_pyfunction!(realize_template, m)?)?;
    m.add_function(wrap_pyfunction!(adherence, m)?)?;
    m.add_function(wrap_pyfunction!(bleu, m)?)?;
    m.add_function(wrap_pyfunction!(evaluate, m)?)?;
    m.add_function(wrap_pyfunction!(run_pipeline, m)?)?;
    m.add_function(wrap_pyfunction!(write_synthetic_corpus, m)?)?;
    Ok(())
}
