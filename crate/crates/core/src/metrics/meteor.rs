use super::{check_pairs, stable_mean, EvalPair, MetricError};

const SUFFIXES: [&str; 4] = ["ing", "ed", "es", "s"];

/// Crude suffix stripper: removes the first matching suffix of
/// `ing`, `ed`, `es`, `s` when at least two characters remain.
pub fn stem(word: &str) -> &str {
    for suffix in SUFFIXES {
        if let Some(base) = word.strip_suffix(suffix) {
            if base.chars().count() >= 2 {
                return base;
            }
        }
    }
    word
}

/// One-to-one unigram alignment: exact matches first, then stem matches.
/// Each stage scans the hypothesis left to right and takes the leftmost
/// free reference position. Returns (hyp index, ref index) pairs.
fn align(hyp: &[String], reference: &[String]) -> Vec<(usize, usize)> {
    let mut used_h = vec![false; hyp.len()];
    let mut used_r = vec![false; reference.len()];
    let mut out = Vec::new();
    let stages: [fn(&str, &str) -> bool; 2] = [|a, b| a == b, |a, b| stem(a) == stem(b)];
    for same in stages {
        for (i, h) in hyp.iter().enumerate() {
            if used_h[i] {
                continue;
            }
            if let Some(j) = (0..reference.len()).find(|&j| !used_r[j] && same(h, &reference[j])) {
                used_h[i] = true;
                used_r[j] = true;
                out.push((i, j));
            }
        }
    }
    out.sort_unstable();
    out
}

fn chunks(alignment: &[(usize, usize)]) -> usize {
    let mut n = 0;
    let mut prev: Option<(usize, usize)> = None;
    for &(i, j) in alignment {
        match prev {
            Some((pi, pj)) if i == pi + 1 && j == pj + 1 => {}
            _ => n += 1,
        }
        prev = Some((i, j));
    }
    n
}

fn score_against(hyp: &[String], reference: &[String]) -> f64 {
    let alignment = align(hyp, reference);
    let m = alignment.len() as f64;
    if m == 0.0 {
        return 0.0;
    }
    let p = m / hyp.len() as f64;
    let r = m / reference.len() as f64;
    let f_mean = 10.0 * p * r / (r + 9.0 * p);
    let penalty = 0.5 * (chunks(&alignment) as f64 / m).powi(3);
    f_mean * (1.0 - penalty)
}

/// METEOR restricted to exact and stem matching (no synonym resources).
/// Per pair the best reference counts; the corpus score is the mean.
pub fn meteor_lite(pairs: &[EvalPair]) -> Result<f64, MetricError> {
    check_pairs(pairs)?;
    let mut scores: Vec<f64> = pairs
        .iter()
        .map(|p| {
            p.references
                .iter()
                .map(|r| score_against(&p.hypothesis, r))
                .fold(0.0, f64::max)
        })
        .collect();
    Ok(stable_mean(&mut scores))
}
