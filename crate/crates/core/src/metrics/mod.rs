//! Corpus-level NLG metrics for both plan strings and realized responses.

mod bleu;
mod cider;
mod diversity;
mod embedding;
mod meteor;
mod rouge;

pub use bleu::bleu;
pub use cider::cider;
pub use diversity::{distinct_1, mean_length};
pub use embedding::{embedding_score, EmbeddingScore, VectorTable};
pub use meteor::{meteor_lite, stem};
pub use rouge::{lcs_len, rouge_l, rouge_l_with_beta, ROUGE_BETA};

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum MetricError {
    #[error("no input to score")]
    EmptyInput,
    #[error("CIDEr needs at least 2 pairs, got {0}")]
    TooFewPairs(usize),
    #[error("hypotheses and references differ in length ({hypotheses} vs {references})")]
    LengthMismatch { hypotheses: usize, references: usize },
    #[error("pair {0} has no reference")]
    NoReference(usize),
    #[error("vector file line {line}: {reason}")]
    BadVectorFile { line: usize, reason: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// One hypothesis with its references, all pre-tokenized.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EvalPair {
    pub hypothesis: Vec<String>,
    pub references: Vec<Vec<String>>,
}

impl EvalPair {
    pub fn new(hypothesis: Vec<String>, references: Vec<Vec<String>>) -> Self {
        EvalPair { hypothesis, references }
    }

    /// Whitespace-tokenized pair with a single reference.
    pub fn from_text(hypothesis: &str, reference: &str) -> Self {
        let split = |s: &str| s.split_whitespace().map(String::from).collect();
        EvalPair::new(split(hypothesis), vec![split(reference)])
    }
}

pub(crate) fn check_pairs(pairs: &[EvalPair]) -> Result<(), MetricError> {
    if pairs.is_empty() {
        return Err(MetricError::EmptyInput);
    }
    match pairs.iter().position(|p| p.references.is_empty()) {
        Some(i) => Err(MetricError::NoReference(i)),
        None => Ok(()),
    }
}

/// Order-independent mean: values are summed in sorted order, so permuting
/// the corpus cannot change the last bits of the result.
pub(crate) fn stable_mean(values: &mut [f64]) -> f64 {
    if values.is_empty() {
        return 0.0;
    }
    values.sort_by(f64::total_cmp);
    values.iter().sum::<f64>() / values.len() as f64
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricReport {
    pub bleu_1: f64,
    pub bleu_2: f64,
    pub bleu_3: f64,
    pub bleu_4: f64,
    pub rouge_l: f64,
    pub meteor_lite: f64,
    /// Absent when the corpus has fewer than two pairs.
    pub cider: Option<f64>,
    pub distinct_1: f64,
    pub mean_length: f64,
    pub embedding_f1: Option<f64>,
}

#[derive(Debug, Clone, Default)]
pub struct EvalOptions<'a> {
    pub vectors: Option<&'a VectorTable>,
}

/// Runs every metric over aligned hypothesis/reference lists.
pub fn evaluate_system(
    hypotheses: &[Vec<String>],
    references: &[Vec<Vec<String>>],
    options: &EvalOptions<'_>,
) -> Result<MetricReport, MetricError> {
    if hypotheses.len() != references.len() {
        return Err(MetricError::LengthMismatch {
            hypotheses: hypotheses.len(),
            references: references.len(),
        });
    }
    let pairs: Vec<EvalPair> = hypotheses
        .iter()
        .zip(references)
        .map(|(h, r)| EvalPair::new(h.clone(), r.clone()))
        .collect();
    check_pairs(&pairs)?;
    let b = bleu(&pairs, 4)?;
    let cider = match cider(&pairs) {
        Ok(c) => Some(c),
        Err(MetricError::TooFewPairs(_)) => None,
        Err(e) => return Err(e),
    };
    Ok(MetricReport {
        bleu_1: b[0],
        bleu_2: b[1],
        bleu_3: b[2],
        bleu_4: b[3],
        rouge_l: rouge_l(&pairs)?,
        meteor_lite: meteor_lite(&pairs)?,
        cider,
        distinct_1: distinct_1(hypotheses)?,
        mean_length: mean_length(hypotheses)?,
        embedding_f1: match options.vectors {
            Some(v) => Some(embedding_score(&pairs, v)?.f1),
            None => None,
        },
    })
}
