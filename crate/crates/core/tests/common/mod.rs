#![allow(dead_code)]

pub mod oracles;

use std::path::PathBuf;

pub fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("tests/fixtures")
        .join(name)
}

/// Hypothesis and references from the bundled tab-separated pair file.
pub fn metric_pairs() -> Vec<(Vec<String>, Vec<Vec<String>>)> {
    let split = |s: &str| s.split_whitespace().map(String::from).collect::<Vec<_>>();
    std::fs::read_to_string(fixture("metric_pairs.tsv"))
        .unwrap()
        .lines()
        .filter(|l| !l.starts_with('#') && !l.trim().is_empty())
        .map(|l| {
            let mut cols = l.split('\t');
            let hyp = split(cols.next().unwrap());
            (hyp, cols.map(split).collect())
        })
        .collect()
}
