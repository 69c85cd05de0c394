use std::collections::BTreeMap;

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::PlannerError;

/// Decoding controls shared by both learned planners.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SamplingParams {
    pub top_p: f64,
    pub max_tokens: usize,
    pub retries: usize,
    pub seed: u64,
}

impl Default for SamplingParams {
    fn default() -> Self {
        SamplingParams {
            top_p: 0.9,
            max_tokens: 32,
            retries: 3,
            seed: 0,
        }
    }
}

impl SamplingParams {
    /// Any positive `top_p` below the largest probability keeps only the
    /// mode, which turns nucleus sampling into greedy decoding.
    pub const GREEDY_TOP_P: f64 = 1e-12;

    pub fn greedy(seed: u64) -> Self {
        SamplingParams {
            top_p: Self::GREEDY_TOP_P,
            seed,
            ..Default::default()
        }
    }

    pub fn validate(&self) -> Result<(), PlannerError> {
        if !(self.top_p > 0.0 && self.top_p <= 1.0) {
            return Err(PlannerError::InvalidParams(format!(
                "top_p must be in (0, 1], got {}",
                self.top_p
            )));
        }
        if self.max_tokens == 0 {
            return Err(PlannerError::InvalidParams("max_tokens must be >= 1".into()));
        }
        Ok(())
    }
}

/// Categorical distribution over string outcomes, keyed for stable order.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Categorical(pub BTreeMap<String, f64>);

impl Categorical {
    /// Relative frequencies of `counts`.
    pub fn from_counts(counts: &BTreeMap<String, u64>) -> Self {
        let total: u64 = counts.values().sum();
        Categorical(
            counts
                .iter()
                .map(|(k, &c)| (k.clone(), c as f64 / total as f64))
                .collect(),
        )
    }

    pub fn entries(&self) -> Vec<(&str, f64)> {
        self.0.iter().map(|(k, &p)| (k.as_str(), p)).collect()
    }

    pub fn prob(&self, key: &str) -> f64 {
        self.0.get(key).copied().unwrap_or(0.0)
    }

    pub fn total(&self) -> f64 {
        self.0.values().sum()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Most probable outcome, smallest key on ties.
    pub fn mode(&self) -> Option<&str> {
        let mut best: Option<(&str, f64)> = None;
        for (k, &p) in &self.0 {
            if best.is_none_or(|(_, bp)| p > bp) {
                best = Some((k, p));
            }
        }
        best.map(|(k, _)| k)
    }
}

fn check_distribution<T>(dist: &[(T, f64)]) -> Result<(), PlannerError> {
    if dist.is_empty() {
        return Err(PlannerError::EmptyDistribution);
    }
    let total: f64 = dist.iter().map(|(_, p)| p).sum();
    if dist.iter().any(|(_, p)| !(p.is_finite() && *p >= 0.0)) || (total - 1.0).abs() > 1e-6 {
        return Err(PlannerError::InvalidDistribution(total));
    }
    Ok(())
}

/// The renormalised nucleus: items sorted by probability (descending, ties
/// by item order), truncated to the shortest prefix reaching `top_p`.
pub fn nucleus<T: Ord + Clone>(dist: &[(T, f64)], top_p: f64) -> Result<Vec<(T, f64)>, PlannerError> {
    check_distribution(dist)?;
    if !(top_p > 0.0 && top_p <= 1.0) {
        return Err(PlannerError::InvalidParams(format!("top_p {top_p} outside (0, 1]")));
    }
    let mut sorted: Vec<(T, f64)> = dist.to_vec();
    sorted.sort_by(|a, b| b.1.total_cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
    let mut mass = 0.0;
    let mut keep = sorted.len();
    for (i, (_, p)) in sorted.iter().enumerate() {
        mass += p;
        // tolerate rounding in the running sum
        if mass >= top_p - 1e-12 {
            keep = i + 1;
            break;
        }
    }
    sorted.truncate(keep);
    let mass: f64 = sorted.iter().map(|(_, p)| p).sum();
    if mass <= 0.0 {
        // all-zero prefix: fall back to the first item
        sorted.truncate(1);
        sorted[0].1 = 1.0;
        return Ok(sorted);
    }
    for (_, p) in &mut sorted {
        *p /= mass;
    }
    Ok(sorted)
}

/// Draws one item from the top-p nucleus of `dist`.
pub fn nucleus_sample<T: Ord + Clone, R: Rng + ?Sized>(
    dist: &[(T, f64)],
    top_p: f64,
    rng: &mut R,
) -> Result<T, PlannerError> {
    let support = nucleus(dist, top_p)?;
    let u: f64 = rng.gen();
    let mut acc = 0.0;
    for (item, p) in &support {
        acc += p;
        if u < acc {
            return Ok(item.clone());
        }
    }
    Ok(support.last().expect("nucleus is non-empty").0.clone())
}
