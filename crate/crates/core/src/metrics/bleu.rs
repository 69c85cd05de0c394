use std::collections::HashMap;

use super::{check_pairs, EvalPair, MetricError};

fn ngram_counts(tokens: &[String], n: usize) -> HashMap<&[String], usize> {
    let mut counts = HashMap::new();
    if tokens.len() >= n {
        for w in tokens.windows(n) {
            *counts.entry(w).or_insert(0) += 1;
        }
    }
    counts
}

/// Reference length closest to `hyp_len`; the shorter one on ties.
fn closest_ref_len(hyp_len: usize, refs: &[Vec<String>]) -> usize {
    refs.iter()
        .map(Vec::len)
        .min_by_key(|&r| (r.abs_diff(hyp_len), r))
        .unwrap_or(0)
}

/// Corpus BLEU-1 through BLEU-`max_n`, with clipped n-gram precisions
/// pooled over the corpus and a corpus-level brevity penalty. No smoothing:
/// a zero precision at any order up to n gives BLEU-n = 0.
pub fn bleu(pairs: &[EvalPair], max_n: usize) -> Result<Vec<f64>, MetricError> {
    check_pairs(pairs)?;
    let mut matched = vec![0usize; max_n];
    let mut total = vec![0usize; max_n];
    let (mut hyp_len, mut ref_len) = (0usize, 0usize);

    for pair in pairs {
        hyp_len += pair.hypothesis.len();
        ref_len += closest_ref_len(pair.hypothesis.len(), &pair.references);
        for n in 1..=max_n {
            let hyp = ngram_counts(&pair.hypothesis, n);
            let mut max_ref: HashMap<&[String], usize> = HashMap::new();
            for r in &pair.references {
                for (g, c) in ngram_counts(r, n) {
                    let slot = max_ref.entry(g).or_insert(0);
                    *slot = (*slot).max(c);
                }
            }
            for (g, c) in hyp {
                matched[n - 1] += c.min(max_ref.get(g).copied().unwrap_or(0));
                total[n - 1] += c;
            }
        }
    }

    if hyp_len == 0 {
        return Ok(vec![0.0; max_n]);
    }
    let bp = if hyp_len >= ref_len {
        1.0
    } else {
        (1.0 - ref_len as f64 / hyp_len as f64).exp()
    };
    let mut out = Vec::with_capacity(max_n);
    // geometric mean as a product root; equal to exp of the mean log
    // precision but exact for BLEU-1
    let mut product = 1.0;
    for n in 1..=max_n {
        product *= if total[n - 1] == 0 {
            0.0
        } else {
            matched[n - 1] as f64 / total[n - 1] as f64
        };
        out.push(if product == 0.0 {
            0.0
        } else {
            bp * product.powf(1.0 / n as f64)
        });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity() {
        let p = [EvalPair::from_text("the cat sat on the mat", "the cat sat on the mat")];
        for v in bleu(&p, 4).unwrap() {
            assert!((v - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn clipping() {
        let p = [EvalPair::from_text("the the the the", "the cat")];
        assert_eq!(bleu(&p, 1).unwrap()[0], 0.25);
    }

    #[test]
    fn brevity_penalty() {
        let p = [EvalPair::from_text("the cat", "the cat sat on the mat")];
        assert_eq!(bleu(&p, 1).unwrap()[0], (-2.0f64).exp());
    }

    #[test]
    fn zero_precision_zeroes_higher_orders() {
        let p = [EvalPair::from_text("a b", "b a")];
        let b = bleu(&p, 4).unwrap();
        assert_eq!(b[0], 1.0);
        assert_eq!(b[1], 0.0);
        assert_eq!(b[3], 0.0);
    }

    #[test]
    fn closest_reference_length() {
        let refs = vec![vec!["x".to_string(); 3], vec!["x".to_string(); 7]];
        assert_eq!(closest_ref_len(5, &refs), 3);
        assert_eq!(closest_ref_len(6, &refs), 7);
    }

    #[test]
    fn empty_input() {
        assert!(matches!(bleu(&[], 4), Err(MetricError::EmptyInput)));
    }
}
