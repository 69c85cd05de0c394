use std::collections::BTreeSet;

use super::MetricError;

/// Distinct unigrams over all hypotheses divided by the total token count.
pub fn distinct_1(hypotheses: &[Vec<String>]) -> Result<f64, MetricError> {
    if hypotheses.is_empty() {
        return Err(MetricError::EmptyInput);
    }
    let total: usize = hypotheses.iter().map(Vec::len).sum();
    if total == 0 {
        return Ok(0.0);
    }
    let distinct: BTreeSet<&String> = hypotheses.iter().flatten().collect();
    Ok(distinct.len() as f64 / total as f64)
}

pub fn mean_length(hypotheses: &[Vec<String>]) -> Result<f64, MetricError> {
    if hypotheses.is_empty() {
        return Err(MetricError::EmptyInput);
    }
    let total: usize = hypotheses.iter().map(Vec::len).sum();
    Ok(total as f64 / hypotheses.len() as f64)
}
