//! Plan-token n-gram planner with stupid backoff.
//!
//! Each training example becomes one token stream:
//!
//! ```text
//! <in> content words of the input utterance, input plan tokens <plan> response plan tokens <eos>
//! ```
//!
//! Generation feeds the same prefix up to `<plan>` and decodes the response
//! plan token by token.

use std::collections::{BTreeMap, BTreeSet};

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::sampling::nucleus_sample;
use super::PlannerError;
use crate::corpus::TrainingExample;
use crate::lexicon::Lexicon;
use crate::plan::{plan_tokens, Plan};
use crate::text::{is_punct, tokenize};

pub const IN_TOKEN: &str = "<in>";
pub const PLAN_TOKEN: &str = "<plan>";
pub const EOS_TOKEN: &str = "<eos>";
pub const DEFAULT_ORDER: usize = 3;
pub const BACKOFF_DISCOUNT: f64 = 0.4;
pub const MAX_CONTENT_WORDS: usize = 16;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NGramPlannerModel {
    pub order: usize,
    pub backoff_discount: f64,
    pub max_content_words: usize,
    /// Context (space-joined, `""` for the empty context) -> successor counts.
    pub counts: BTreeMap<String, BTreeMap<String, u64>>,
    pub stopwords: BTreeSet<String>,
}

/// Content words of `utterance`: no punctuation, no stopwords, capped.
pub fn content_words(utterance: &str, stopwords: &BTreeSet<String>, cap: usize) -> Vec<String> {
    tokenize(utterance)
        .into_iter()
        .filter(|t| !is_punct(t) && !stopwords.contains(t))
        .take(cap)
        .collect()
}

impl NGramPlannerModel {
    /// Stream up to and including `<plan>`.
    pub fn prompt(&self, input_utterance: &str, input_plan: &Plan) -> Vec<String> {
        let mut stream = vec![IN_TOKEN.to_string()];
        stream.extend(content_words(input_utterance, &self.stopwords, self.max_content_words));
        stream.extend(plan_tokens(input_plan));
        stream.push(PLAN_TOKEN.to_string());
        stream
    }

    pub fn training_stream(&self, example: &TrainingExample) -> Vec<String> {
        let mut stream = self.prompt(&example.input_utterance, &example.input_plan);
        stream.extend(plan_tokens(&example.response_plan));
        stream.push(EOS_TOKEN.to_string());
        stream
    }

    fn add_stream(&mut self, stream: &[String]) {
        for j in 1..stream.len() {
            for k in 0..self.order.min(j + 1) {
                let context = stream[j - k..j].join(" ");
                *self
                    .counts
                    .entry(context)
                    .or_default()
                    .entry(stream[j].clone())
                    .or_default() += 1;
            }
        }
    }

    /// Number of distinct non-empty contexts.
    pub fn context_count(&self) -> usize {
        self.counts.keys().filter(|k| !k.is_empty()).count()
    }

    pub fn vocabulary_size(&self) -> usize {
        self.counts.get("").map_or(0, BTreeMap::len)
    }

    /// Stupid-backoff scores for the next token after `history`,
    /// renormalised into a distribution. Tokens are scored from the longest
    /// context in which they were observed, discounted once per level
    /// backed off. `<in>` and `<plan>` are never proposed.
    pub fn next_distribution(&self, history: &[String]) -> Vec<(String, f64)> {
        let longest = (self.order - 1).min(history.len());
        let mut scores: BTreeMap<&str, f64> = BTreeMap::new();
        let mut discount = 1.0;
        for k in (0..=longest).rev() {
            let context = history[history.len() - k..].join(" ");
            if let Some(successors) = self.counts.get(&context) {
                let total: u64 = successors.values().sum();
                for (w, &c) in successors {
                    if w == IN_TOKEN || w == PLAN_TOKEN {
                        continue;
                    }
                    scores.entry(w.as_str()).or_insert(discount * c as f64 / total as f64);
                }
            }
            discount *= self.backoff_discount;
        }
        let total: f64 = scores.values().sum();
        scores.into_iter().map(|(w, s)| (w.to_string(), s / total)).collect()
    }

    /// Decodes response-plan tokens after the prompt until `<eos>` or
    /// `max_tokens` tokens.
    pub fn decode<R: Rng + ?Sized>(
        &self,
        prompt: &[String],
        top_p: f64,
        max_tokens: usize,
        rng: &mut R,
    ) -> Result<Vec<String>, PlannerError> {
        let mut history = prompt.to_vec();
        let mut out = Vec::new();
        while out.len() < max_tokens {
            let dist = self.next_distribution(&history);
            let next = nucleus_sample(&dist, top_p, rng)?;
            if next == EOS_TOKEN {
                break;
            }
            history.push(next.clone());
            out.push(next);
        }
        Ok(out)
    }
}

pub fn train_ngram_planner(
    examples: &[TrainingExample],
    order: usize,
    lexicon: &Lexicon,
) -> Result<NGramPlannerModel, PlannerError> {
    if order < 2 {
        return Err(PlannerError::BadOrder(order));
    }
    if examples.is_empty() {
        return Err(PlannerError::NoExamples);
    }
    let mut model = NGramPlannerModel {
        order,
        backoff_discount: BACKOFF_DISCOUNT,
        max_content_words: MAX_CONTENT_WORDS,
        counts: BTreeMap::new(),
        stopwords: lexicon.stopwords.clone(),
    };
    for ex in examples {
        let stream = model.training_stream(ex);
        model.add_stream(&stream);
    }
    Ok(model)
}
