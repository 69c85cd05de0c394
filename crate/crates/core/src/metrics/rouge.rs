use super::{check_pairs, stable_mean, EvalPair, MetricError};

/// Recall weight of the F-measure, as in the common NLG evaluation tooling.
pub const ROUGE_BETA: f64 = 1.2;

/// Longest common subsequence length (two-row dynamic programme).
pub fn lcs_len(a: &[String], b: &[String]) -> usize {
    let mut prev = vec![0usize; b.len() + 1];
    let mut cur = vec![0usize; b.len() + 1];
    for x in a {
        for (j, y) in b.iter().enumerate() {
            cur[j + 1] = if x == y { prev[j] + 1 } else { prev[j + 1].max(cur[j]) };
        }
        std::mem::swap(&mut prev, &mut cur);
    }
    prev[b.len()]
}

fn pair_score(pair: &EvalPair, beta: f64) -> f64 {
    let hyp = &pair.hypothesis;
    let (mut p_max, mut r_max) = (0.0f64, 0.0f64);
    for r in &pair.references {
        let l = lcs_len(hyp, r) as f64;
        if l == 0.0 {
            continue;
        }
        p_max = p_max.max(l / hyp.len() as f64);
        r_max = r_max.max(l / r.len() as f64);
    }
    if p_max == 0.0 || r_max == 0.0 {
        return 0.0;
    }
    let b2 = beta * beta;
    ((1.0 + b2) * p_max * r_max) / (r_max + b2 * p_max)
}

/// Mean sentence ROUGE-L F-measure. Precision and recall are each the
/// maximum over references.
pub fn rouge_l(pairs: &[EvalPair]) -> Result<f64, MetricError> {
    rouge_l_with_beta(pairs, ROUGE_BETA)
}

pub fn rouge_l_with_beta(pairs: &[EvalPair], beta: f64) -> Result<f64, MetricError> {
    check_pairs(pairs)?;
    let mut scores: Vec<f64> = pairs.iter().map(|p| pair_score(p, beta)).collect();
    Ok(stable_mean(&mut scores))
}
