//! Deliberately naive reference implementations: linear scans, exhaustive
//! subsequence search, string-keyed vectors. Slow but easy to audit.

use std::collections::{HashMap, HashSet};

pub type Pair = (Vec<String>, Vec<Vec<String>>);

fn grams(tokens: &[String], n: usize) -> Vec<String> {
    if tokens.len() < n {
        return Vec::new();
    }
    (0..=tokens.len() - n).map(|i| tokens[i..i + n].join(" ")).collect()
}

fn occurrences(list: &[String], g: &str) -> usize {
    list.iter().filter(|x| x.as_str() == g).count()
}

/// BLEU-n straight from the textbook formula: BP * exp(mean log p_k).
pub fn bleu(pairs: &[Pair], n: usize) -> f64 {
    let mut c = 0usize;
    let mut r = 0usize;
    let mut logs = 0.0;
    for k in 1..=n {
        let (mut num, mut den) = (0usize, 0usize);
        for (hyp, refs) in pairs {
            let hg = grams(hyp, k);
            let mut seen = HashSet::new();
            for g in &hg {
                if !seen.insert(g.clone()) {
                    continue;
                }
                let max_ref = refs.iter().map(|rf| occurrences(&grams(rf, k), g)).max().unwrap();
                num += occurrences(&hg, g).min(max_ref);
            }
            den += hg.len();
        }
        if num == 0 || den == 0 {
            return 0.0;
        }
        logs += (num as f64 / den as f64).ln();
    }
    for (hyp, refs) in pairs {
        c += hyp.len();
        let mut lens: Vec<usize> = refs.iter().map(Vec::len).collect();
        lens.sort_by_key(|&l| ((l as i64 - hyp.len() as i64).abs(), l));
        r += lens[0];
    }
    let bp = if c >= r { 1.0 } else { (1.0 - r as f64 / c as f64).exp() };
    bp * (logs / n as f64).exp()
}

fn is_subsequence(sub: &[&String], of: &[String]) -> bool {
    let mut it = of.iter();
    sub.iter().all(|s| it.any(|x| x == *s))
}

/// Longest common subsequence by trying every subsequence of `a`.
pub fn lcs(a: &[String], b: &[String]) -> usize {
    assert!(a.len() <= 16, "exhaustive oracle only for short inputs");
    let mut best = 0;
    for mask in 0u32..(1 << a.len()) {
        let len = mask.count_ones() as usize;
        if len <= best {
            continue;
        }
        let sub: Vec<&String> = (0..a.len()).filter(|i| mask & (1 << i) != 0).map(|i| &a[i]).collect();
        if is_subsequence(&sub, b) {
            best = len;
        }
    }
    best
}

pub fn rouge_l(pairs: &[Pair], beta: f64) -> f64 {
    let mut total = 0.0;
    for (hyp, refs) in pairs {
        let p = refs
            .iter()
            .map(|r| lcs(hyp, r) as f64 / hyp.len() as f64)
            .fold(0.0, f64::max);
        let r = refs
            .iter()
            .map(|rf| lcs(hyp, rf) as f64 / rf.len() as f64)
            .fold(0.0, f64::max);
        total += if p > 0.0 && r > 0.0 {
            (1.0 + beta * beta) * p * r / (r + beta * beta * p)
        } else {
            0.0
        };
    }
    total / pairs.len() as f64
}

pub fn stem(w: &str) -> String {
    for suf in ["ing", "ed", "es", "s"] {
        if w.ends_with(suf) && w.chars().count() - suf.chars().count() >= 2 {
            return w[..w.len() - suf.len()].to_string();
        }
    }
    w.to_string()
}

fn meteor_one(hyp: &[String], rf: &[String]) -> f64 {
    let mut ref_used = vec![false; rf.len()];
    let mut link: Vec<Option<usize>> = vec![None; hyp.len()];
    for stemmed in [false, true] {
        for i in 0..hyp.len() {
            if link[i].is_some() {
                continue;
            }
            for j in 0..rf.len() {
                let same = if stemmed {
                    stem(&hyp[i]) == stem(&rf[j])
                } else {
                    hyp[i] == rf[j]
                };
                if !ref_used[j] && same {
                    ref_used[j] = true;
                    link[i] = Some(j);
                    break;
                }
            }
        }
    }
    let m = link.iter().flatten().count();
    if m == 0 {
        return 0.0;
    }
    let mut chunks = 0;
    let mut last: Option<(usize, usize)> = None;
    for (i, l) in link.iter().enumerate() {
        if let Some(j) = *l {
            let continues = matches!(last, Some((pi, pj)) if pi + 1 == i && pj + 1 == j);
            if !continues {
                chunks += 1;
            }
            last = Some((i, j));
        }
    }
    let p = m as f64 / hyp.len() as f64;
    let r = m as f64 / rf.len() as f64;
    let f = 10.0 * p * r / (r + 9.0 * p);
    f * (1.0 - 0.5 * (chunks as f64 / m as f64).powi(3))
}

pub fn meteor(pairs: &[Pair]) -> f64 {
    pairs
        .iter()
        .map(|(h, refs)| refs.iter().map(|r| meteor_one(h, r)).fold(0.0, f64::max))
        .sum::<f64>()
        / pairs.len() as f64
}

pub fn cider(pairs: &[Pair]) -> f64 {
    let n_docs = pairs.len() as f64;
    let mut by_order = 0.0;
    for n in 1..=4 {
        let mut df: HashMap<String, f64> = HashMap::new();
        for (_, refs) in pairs {
            let set: HashSet<String> = refs.iter().flat_map(|r| grams(r, n)).collect();
            for g in set {
                *df.entry(g).or_insert(0.0) += 1.0;
            }
        }
        let vector = |toks: &[String]| -> HashMap<String, f64> {
            let gs = grams(toks, n);
            let mut v = HashMap::new();
            for g in &gs {
                let idf = (n_docs / (1.0 + df.get(g).copied().unwrap_or(0.0))).ln();
                v.insert(g.clone(), occurrences(&gs, g) as f64 * idf);
            }
            v
        };
        let mut sum = 0.0;
        for (hyp, refs) in pairs {
            let h = vector(hyp);
            let mut s = 0.0;
            for r in refs {
                let rv = vector(r);
                let dot: f64 = h.iter().map(|(g, x)| x * rv.get(g).copied().unwrap_or(0.0)).sum();
                let nh = h.values().map(|x| x * x).sum::<f64>().sqrt();
                let nr = rv.values().map(|x| x * x).sum::<f64>().sqrt();
                if nh > 0.0 && nr > 0.0 {
                    s += dot / (nh * nr);
                }
            }
            sum += s / refs.len() as f64;
        }
        by_order += sum / n_docs;
    }
    by_order / 4.0
}

pub fn distinct_1(hyps: &[Vec<String>]) -> f64 {
    let all: Vec<&String> = hyps.iter().flatten().collect();
    let uniq: HashSet<&String> = all.iter().copied().collect();
    uniq.len() as f64 / all.len() as f64
}
