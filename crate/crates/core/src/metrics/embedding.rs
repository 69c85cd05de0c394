use std::collections::HashMap;
use std::io::BufRead;
use std::path::Path;

use super::{check_pairs, stable_mean, EvalPair, MetricError};

/// Static word vectors read from `word v1 v2 ... vd` lines.
#[derive(Debug, Clone, PartialEq)]
pub struct VectorTable {
    dim: usize,
    vectors: HashMap<String, Vec<f64>>,
}

impl VectorTable {
    pub fn load(path: impl AsRef<Path>) -> Result<Self, MetricError> {
        let file = std::fs::File::open(path)?;
        VectorTable::read(std::io::BufReader::new(file))
    }

    pub fn read(reader: impl BufRead) -> Result<Self, MetricError> {
        let mut dim = None;
        let mut vectors = HashMap::new();
        for (idx, line) in reader.lines().enumerate() {
            let line = line?;
            let bad = |reason: String| MetricError::BadVectorFile { line: idx + 1, reason };
            let mut fields = line.split_whitespace();
            let Some(word) = fields.next() else { continue };
            let values = fields
                .map(|f| f.parse::<f64>().map_err(|e| bad(format!("{f:?}: {e}"))))
                .collect::<Result<Vec<_>, _>>()?;
            if values.is_empty() {
                return Err(bad("word without a vector".into()));
            }
            match dim {
                None => dim = Some(values.len()),
                Some(d) if d != values.len() => {
                    return Err(bad(format!("expected {d} components, found {}", values.len())))
                }
                _ => {}
            }
            vectors.insert(word.to_string(), values);
        }
        Ok(VectorTable {
            dim: dim.unwrap_or(0),
            vectors,
        })
    }

    pub fn from_pairs<I: IntoIterator<Item = (String, Vec<f64>)>>(pairs: I) -> Result<Self, MetricError> {
        let mut dim = None;
        let mut vectors = HashMap::new();
        for (i, (w, v)) in pairs.into_iter().enumerate() {
            if *dim.get_or_insert(v.len()) != v.len() {
                return Err(MetricError::BadVectorFile {
                    line: i + 1,
                    reason: "inconsistent dimension".into(),
                });
            }
            vectors.insert(w, v);
        }
        Ok(VectorTable {
            dim: dim.unwrap_or(0),
            vectors,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn get(&self, word: &str) -> Option<&[f64]> {
        self.vectors.get(word).map(Vec::as_slice)
    }

    /// Cosine similarity; zero when either word is out of vocabulary.
    pub fn cosine(&self, a: &str, b: &str) -> f64 {
        let (Some(x), Some(y)) = (self.get(a), self.get(b)) else {
            return 0.0;
        };
        let nx = x.iter().map(|v| v * v).sum::<f64>().sqrt();
        let ny = y.iter().map(|v| v * v).sum::<f64>().sqrt();
        if nx == 0.0 || ny == 0.0 {
            return 0.0;
        }
        x.iter().zip(y).map(|(a, b)| a * b).sum::<f64>() / (nx * ny)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EmbeddingScore {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

fn greedy(from: &[String], to: &[String], table: &VectorTable) -> f64 {
    if from.is_empty() {
        return 0.0;
    }
    let total: f64 = from
        .iter()
        .map(|a| to.iter().map(|b| table.cosine(a, b)).fold(0.0, f64::max))
        .sum();
    total / from.len() as f64
}

fn pair_score(hyp: &[String], reference: &[String], table: &VectorTable) -> EmbeddingScore {
    let precision = greedy(hyp, reference, table);
    let recall = greedy(reference, hyp, table);
    let f1 = if precision + recall > 0.0 {
        2.0 * precision * recall / (precision + recall)
    } else {
        0.0
    };
    EmbeddingScore { precision, recall, f1 }
}

/// Greedy-matching embedding score (static-vector analogue of BERTScore).
/// Per pair the reference with the best F1 is used; corpus values are means.
pub fn embedding_score(pairs: &[EvalPair], table: &VectorTable) -> Result<EmbeddingScore, MetricError> {
    check_pairs(pairs)?;
    let best: Vec<EmbeddingScore> = pairs
        .iter()
        .map(|p| {
            p.references
                .iter()
                .map(|r| pair_score(&p.hypothesis, r, table))
                .max_by(|a, b| a.f1.total_cmp(&b.f1))
                .expect("at least one reference")
        })
        .collect();
    let column = |f: fn(&EmbeddingScore) -> f64| stable_mean(&mut best.iter().map(f).collect::<Vec<_>>());
    Ok(EmbeddingScore {
        precision: column(|s| s.precision),
        recall: column(|s| s.recall),
        f1: column(|s| s.f1),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn table() -> VectorTable {
        VectorTable::read("cat 1 0\ndog 0.6 0.8\ncar 0 1\n".as_bytes()).unwrap()
    }

    #[test]
    fn identity_and_oov() {
        let t = table();
        let s = embedding_score(&[EvalPair::from_text("cat dog", "cat dog")], &t).unwrap();
        assert!((s.f1 - 1.0).abs() < 1e-12);
        let s = embedding_score(&[EvalPair::from_text("zebra", "yak")], &t).unwrap();
        assert_eq!(s.f1, 0.0);
    }

    #[test]
    fn hand_placed_vectors() {
        // cos(cat, dog) = 0.6, cos(cat, car) = 0, cos(dog, car) = 0.8
        let t = table();
        let s = embedding_score(&[EvalPair::from_text("cat car", "dog")], &t).unwrap();
        // precision = (0.6 + 0.8) / 2, recall = max(0.6, 0.8)
        assert!((s.precision - 0.7).abs() < 1e-12);
        assert!((s.recall - 0.8).abs() < 1e-12);
        let f1 = 2.0 * 0.7 * 0.8 / 1.5;
        assert!((s.f1 - f1).abs() < 1e-12);
    }

    #[test]
    fn inconsistent_dimensions() {
        let err = VectorTable::read("a 1 2\nb 1\n".as_bytes()).unwrap_err();
        assert!(matches!(err, MetricError::BadVectorFile { line: 2, .. }));
        assert!(VectorTable::read("a x y\n".as_bytes()).is_err());
    }
}
