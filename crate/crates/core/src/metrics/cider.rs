use std::collections::{BTreeMap, BTreeSet};

use super::{check_pairs, stable_mean, EvalPair, MetricError};

const MAX_N: usize = 4;

type NgramVec = BTreeMap<Vec<String>, f64>;

fn counts(tokens: &[String], n: usize) -> BTreeMap<Vec<String>, f64> {
    let mut out = BTreeMap::new();
    if tokens.len() >= n {
        for w in tokens.windows(n) {
            *out.entry(w.to_vec()).or_insert(0.0) += 1.0;
        }
    }
    out
}

fn cosine(a: &NgramVec, b: &NgramVec) -> f64 {
    let na = a.values().map(|x| x * x).sum::<f64>().sqrt();
    let nb = b.values().map(|x| x * x).sum::<f64>().sqrt();
    if na == 0.0 || nb == 0.0 {
        return 0.0;
    }
    let dot: f64 = a.iter().filter_map(|(g, x)| b.get(g).map(|y| x * y)).sum();
    dot / (na * nb)
}

/// Plain CIDEr (no length penalty, no x10 scaling). The document frequency
/// of an n-gram is the number of pairs whose references contain it, and
/// idf = ln(|pairs| / (1 + df)). Because hypothesis and reference share the
/// same idf weight per n-gram, every cosine is non-negative.
pub fn cider(pairs: &[EvalPair]) -> Result<f64, MetricError> {
    check_pairs(pairs)?;
    if pairs.len() < 2 {
        return Err(MetricError::TooFewPairs(pairs.len()));
    }
    let corpus = pairs.len() as f64;
    let mut per_n = Vec::with_capacity(MAX_N);
    for n in 1..=MAX_N {
        let mut df: BTreeMap<Vec<String>, usize> = BTreeMap::new();
        for p in pairs {
            let grams: BTreeSet<Vec<String>> = p.references.iter().flat_map(|r| counts(r, n).into_keys()).collect();
            for g in grams {
                *df.entry(g).or_insert(0) += 1;
            }
        }
        let weigh = |tf: BTreeMap<Vec<String>, f64>| -> NgramVec {
            tf.into_iter()
                .map(|(g, c)| {
                    let d = df.get(&g).copied().unwrap_or(0) as f64;
                    let w = c * (corpus / (1.0 + d)).ln();
                    (g, w)
                })
                .collect()
        };
        let mut scores: Vec<f64> = pairs
            .iter()
            .map(|p| {
                let h = weigh(counts(&p.hypothesis, n));
                let sims: f64 = p.references.iter().map(|r| cosine(&h, &weigh(counts(r, n)))).sum();
                sims / p.references.len() as f64
            })
            .collect();
        per_n.push(stable_mean(&mut scores));
    }
    Ok(per_n.iter().sum::<f64>() / MAX_N as f64)
}
