//! Plan-conditioned response realization: slot-filling templates, tf-idf
//! retrieval scored against both plan and input, and the no-plan baseline.

use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::corpus::TrainingExample;
use crate::lexicon::Lexicon;
use crate::plan::{plan_similarity, Plan, PlanType};
use crate::text::{is_punct, tokenize};

const DEFAULT_TEMPLATES: &str = include_str!("../data/default.templates");

#[derive(Debug, Error)]
pub enum RealizerError {
    #[error("template line {line}: {reason}")]
    Template { line: usize, reason: String },
    #[error("no examples to index")]
    NoExamples,
    #[error("invalid realization weights: {0}")]
    InvalidWeights(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TemplateSet {
    templates: BTreeMap<PlanType, Vec<String>>,
}

impl Default for TemplateSet {
    fn default() -> Self {
        TemplateSet::parse(DEFAULT_TEMPLATES).expect("bundled templates are valid")
    }
}

impl TemplateSet {
    pub fn load(path: impl AsRef<Path>) -> Result<Self, RealizerError> {
        TemplateSet::parse(&std::fs::read_to_string(path)?)
    }

    /// `TYPE<TAB>template` per line; blank lines and `#` comments skipped.
    pub fn parse(text: &str) -> Result<Self, RealizerError> {
        let mut templates: BTreeMap<PlanType, Vec<String>> = BTreeMap::new();
        for (idx, line) in text.lines().enumerate() {
            let err = |reason: String| RealizerError::Template { line: idx + 1, reason };
            if line.trim().is_empty() || line.trim_start().starts_with('#') {
                continue;
            }
            let (name, template) = line
                .split_once('\t')
                .ok_or_else(|| err("expected TYPE<TAB>template".into()))?;
            let ptype: PlanType = name.parse().map_err(|e| err(format!("{e}")))?;
            let has_slots = template.contains("{action}") || template.contains("{target}");
            if ptype == PlanType::Respond && has_slots {
                return Err(err("RESPOND templates cannot have slots".into()));
            }
            templates.entry(ptype).or_default().push(template.trim().to_string());
        }
        for ptype in PlanType::ALL {
            let list = templates.get(&ptype).map(Vec::as_slice).unwrap_or(&[]);
            let ok = if ptype == PlanType::Respond {
                !list.is_empty()
            } else {
                list.iter().any(|t| t.contains("{action}"))
            };
            if !ok {
                return Err(RealizerError::Template {
                    line: 0,
                    reason: format!("no usable template for {ptype}"),
                });
            }
        }
        Ok(TemplateSet { templates })
    }

    pub fn first(&self, ptype: PlanType) -> &str {
        &self.templates[&ptype][0]
    }
}

/// Swaps speaker-relative pronouns through the lexicon's flip map.
pub fn flip_pronouns(tokens: &[String], flip_map: &BTreeMap<String, String>) -> Vec<String> {
    tokens
        .iter()
        .map(|t| {
            let lower = t.to_lowercase();
            flip_map.get(&lower).cloned().unwrap_or(lower)
        })
        .collect()
}

fn cleanup(text: &str) -> String {
    let mut s = text.split_whitespace().collect::<Vec<_>>().join(" ");
    for p in [".", "?", "!", ","] {
        s = s.replace(&format!(" {p}"), p);
    }
    let mut chars = s.chars();
    match chars.next() {
        Some(first) => first.to_uppercase().chain(chars).collect(),
        None => s,
    }
}

pub fn realize_template(plan: &Plan, templates: &TemplateSet, lexicon: &Lexicon) -> String {
    let parts: Vec<String> = plan
        .elements()
        .iter()
        .map(|el| {
            let action = flip_pronouns(el.action(), &lexicon.pronoun_flip_map).join(" ");
            let target = flip_pronouns(el.target(), &lexicon.pronoun_flip_map).join(" ");
            templates
                .first(el.ptype())
                .replace("{action}", &action)
                .replace("{target}", &target)
        })
        .collect();
    cleanup(&parts.join(" "))
}

fn content_terms(text: &str, stopwords: &BTreeSet<String>) -> Vec<String> {
    tokenize(text)
        .into_iter()
        .filter(|t| !is_punct(t) && !stopwords.contains(t))
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RealizationWeights {
    pub w_plan: f64,
    pub w_input: f64,
}

impl Default for RealizationWeights {
    fn default() -> Self {
        RealizationWeights {
            w_plan: 0.7,
            w_input: 0.3,
        }
    }
}

impl RealizationWeights {
    pub fn new(w_plan: f64, w_input: f64) -> Result<Self, RealizerError> {
        let w = RealizationWeights { w_plan, w_input };
        w.validate()?;
        Ok(w)
    }

    pub fn validate(&self) -> Result<(), RealizerError> {
        let ok = |x: f64| x.is_finite() && x >= 0.0;
        if !ok(self.w_plan) || !ok(self.w_input) || self.w_plan + self.w_input <= 0.0 {
            return Err(RealizerError::InvalidWeights(format!(
                "w_plan={} w_input={}",
                self.w_plan, self.w_input
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct IndexEntry {
    pub input_text: String,
    pub response_plan: Plan,
    pub response_text: String,
    /// Raw term frequencies of the input utterance.
    pub input_tf: BTreeMap<String, u32>,
}

/// Retrieval index over training responses, keyed by input tf-idf.
#[derive(Debug, Clone)]
pub struct RetrievalIndex {
    entries: Vec<IndexEntry>,
    df: BTreeMap<String, usize>,
    vectors: Vec<(BTreeMap<String, f64>, f64)>,
    stopwords: BTreeSet<String>,
}

pub fn build_index(examples: &[TrainingExample], lexicon: &Lexicon) -> Result<RetrievalIndex, RealizerError> {
    if examples.is_empty() {
        return Err(RealizerError::NoExamples);
    }
    let mut entries = Vec::with_capacity(examples.len());
    let mut df: BTreeMap<String, usize> = BTreeMap::new();
    for ex in examples {
        let mut tf: BTreeMap<String, u32> = BTreeMap::new();
        for term in content_terms(&ex.input_utterance, &lexicon.stopwords) {
            *tf.entry(term).or_default() += 1;
        }
        for term in tf.keys() {
            *df.entry(term.clone()).or_default() += 1;
        }
        entries.push(IndexEntry {
            input_text: ex.input_utterance.clone(),
            response_plan: ex.response_plan.clone(),
            response_text: ex.response_utterance.clone(),
            input_tf: tf,
        });
    }
    let mut index = RetrievalIndex {
        entries,
        df,
        vectors: Vec::new(),
        stopwords: lexicon.stopwords.clone(),
    };
    index.vectors = index.entries.iter().map(|e| index.weigh(&e.input_tf)).collect();
    Ok(index)
}

impl RetrievalIndex {
    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn entries(&self) -> &[IndexEntry] {
        &self.entries
    }

    pub fn document_frequencies(&self) -> &BTreeMap<String, usize> {
        &self.df
    }

    pub fn vocabulary_size(&self) -> usize {
        self.df.len()
    }

    pub fn idf(&self, term: &str) -> Option<f64> {
        self.df
            .get(term)
            .map(|&df| (self.entries.len() as f64 / df as f64).ln())
    }

    /// tf-idf weights (terms outside the index vocabulary dropped) and norm.
    fn weigh(&self, tf: &BTreeMap<String, u32>) -> (BTreeMap<String, f64>, f64) {
        let v: BTreeMap<String, f64> = tf
            .iter()
            .filter_map(|(t, &c)| self.idf(t).map(|idf| (t.clone(), c as f64 * idf)))
            .collect();
        let norm = v.values().map(|x| x * x).sum::<f64>().sqrt();
        (v, norm)
    }

    fn query_vector(&self, text: &str) -> (BTreeMap<String, f64>, f64) {
        let mut tf: BTreeMap<String, u32> = BTreeMap::new();
        for term in content_terms(text, &self.stopwords) {
            *tf.entry(term).or_default() += 1;
        }
        self.weigh(&tf)
    }

    /// Cosine between the query's tf-idf vector and every entry's input.
    pub fn input_similarities(&self, input_utterance: &str) -> Vec<f64> {
        let (q, qn) = self.query_vector(input_utterance);
        self.vectors
            .iter()
            .map(|(d, dn)| {
                if qn == 0.0 || *dn == 0.0 {
                    return 0.0;
                }
                let dot: f64 = q.iter().filter_map(|(t, w)| d.get(t).map(|x| w * x)).sum();
                dot / (qn * dn)
            })
            .collect()
    }

    /// Index of the best entry under the weighted score; lowest index on ties.
    pub fn select(&self, input_utterance: &str, response_plan: Option<&Plan>, weights: &RealizationWeights) -> usize {
        let sims = self.input_similarities(input_utterance);
        let mut best = (0, f64::NEG_INFINITY);
        for (i, entry) in self.entries.iter().enumerate() {
            let plan_score = response_plan.map_or(0.0, |p| plan_similarity(p, &entry.response_plan));
            let score = weights.w_plan * plan_score + weights.w_input * sims[i];
            if score > best.1 {
                best = (i, score);
            }
        }
        best.0
    }
}

pub fn realize_retrieval<'a>(
    index: &'a RetrievalIndex,
    input_utterance: &str,
    response_plan: &Plan,
    weights: &RealizationWeights,
) -> &'a str {
    let i = index.select(input_utterance, Some(response_plan), weights);
    &index.entries[i].response_text
}

/// Baseline that never sees a plan: nearest input by tf-idf cosine.
pub fn realize_noplan<'a>(index: &'a RetrievalIndex, input_utterance: &str) -> &'a str {
    let weights = RealizationWeights {
        w_plan: 0.0,
        w_input: 1.0,
    };
    let i = index.select(input_utterance, None, &weights);
    &index.entries[i].response_text
}

/// Share of the plan's distinct content tokens (after pronoun flipping)
/// that occur in the response. Plans without content tokens score 1.
pub fn plan_adherence(plan: &Plan, response: &str, lexicon: &Lexicon) -> f64 {
    let wanted: BTreeSet<String> = plan
        .elements()
        .iter()
        .flat_map(|el| {
            let mut toks = flip_pronouns(el.action(), &lexicon.pronoun_flip_map);
            toks.extend(flip_pronouns(el.target(), &lexicon.pronoun_flip_map));
            toks
        })
        .filter(|t| !is_punct(t) && !lexicon.is_stopword(t))
        .collect();
    if wanted.is_empty() {
        return 1.0;
    }
    let present: BTreeSet<String> = tokenize(response).into_iter().collect();
    wanted.iter().filter(|t| present.contains(*t)).count() as f64 / wanted.len() as f64
}

/// Which response source feeds the realization.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RealizerKind {
    Template,
    Retrieval,
    Noplan,
}

impl RealizerKind {
    pub fn name(self) -> &'static str {
        match self {
            RealizerKind::Template => "template",
            RealizerKind::Retrieval => "retrieval",
            RealizerKind::Noplan => "noplan",
        }
    }
}

impl std::str::FromStr for RealizerKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "template" => Ok(RealizerKind::Template),
            "retrieval" => Ok(RealizerKind::Retrieval),
            "noplan" => Ok(RealizerKind::Noplan),
            other => Err(format!("unknown realizer {other:?} (template|retrieval|noplan)")),
        }
    }
}

/// One line of realization output JSONL.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RealizationRecord {
    pub input: String,
    pub plan: Option<Plan>,
    pub response: String,
    pub adherence: f64,
    pub realizer: String,
}
