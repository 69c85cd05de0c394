//! Learned response planners: a type-transition model and a plan-token
//! n-gram model behind one interface, plus model persistence.

pub mod ngram;
pub mod sampling;
pub mod type_model;

use std::io::Write;
use std::path::Path;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

pub use ngram::{train_ngram_planner, NGramPlannerModel};
pub use sampling::{nucleus, nucleus_sample, Categorical, SamplingParams};
pub use type_model::{train_type_planner, TypeTransitionModel};

use crate::plan::{parse_plan, Plan, PlanError};

pub const MODEL_MAGIC: &str = "ASKFRAME-PLANNER";
pub const MODEL_FORMAT_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum PlannerError {
    #[error("no training examples")]
    NoExamples,
    #[error("n-gram order must be at least 2, got {0}")]
    BadOrder(usize),
    #[error("cannot sample from an empty distribution")]
    EmptyDistribution,
    #[error("distribution must be non-negative and sum to 1 (sum = {0})")]
    InvalidDistribution(f64),
    #[error("invalid sampling parameters: {0}")]
    InvalidParams(String),
    #[error(transparent)]
    Plan(#[from] PlanError),
    #[error("model file format version {found} is not supported (expected {expected})")]
    VersionMismatch { found: String, expected: u32 },
    #[error("corrupt model file: {0}")]
    CorruptModel(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelMetadata {
    pub corpus_tag: String,
    pub lexicon_hash: String,
    /// Unix seconds; left empty unless the caller pins a timestamp so that
    /// retraining on the same data reproduces the same file.
    pub created_at: Option<u64>,
    pub n_examples: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum PlannerKind {
    TypeTransition(TypeTransitionModel),
    Ngram {
        ngram: NGramPlannerModel,
        fallback: Option<TypeTransitionModel>,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlannerModel {
    pub metadata: ModelMetadata,
    pub model: PlannerKind,
}

/// Result of one `generate` call with the diagnostics callers may log.
#[derive(Debug, Clone, PartialEq)]
pub struct Generation {
    pub plan: Plan,
    /// Decoding attempts made by the n-gram planner (0 for the type model).
    pub attempts: usize,
    pub used_fallback: bool,
    /// The last raw token sequence the n-gram planner produced.
    pub raw: Option<String>,
}

impl PlannerModel {
    pub fn kind_name(&self) -> &'static str {
        match self.model {
            PlannerKind::TypeTransition(_) => "type",
            PlannerKind::Ngram { .. } => "ngram",
        }
    }

    /// Generates a response plan. Never fails: malformed n-gram output is
    /// retried, then handed to the fallback model, then replaced by RESPOND.
    pub fn generate(&self, input_utterance: &str, input_plan: &Plan, params: &SamplingParams) -> Generation {
        let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
        let top_p = params.top_p.clamp(f64::MIN_POSITIVE, 1.0);
        match &self.model {
            PlannerKind::TypeTransition(m) => Generation {
                plan: m
                    .generate(input_utterance, input_plan, top_p, &mut rng)
                    .unwrap_or_else(|_| Plan::respond()),
                attempts: 0,
                used_fallback: false,
                raw: None,
            },
            PlannerKind::Ngram { ngram, fallback } => {
                let prompt = ngram.prompt(input_utterance, input_plan);
                let mut raw = None;
                let mut attempts = 0;
                for _ in 0..=params.retries {
                    attempts += 1;
                    let Ok(tokens) = ngram.decode(&prompt, top_p, params.max_tokens.max(1), &mut rng) else {
                        continue;
                    };
                    let text = tokens.join(" ");
                    let parsed = parse_plan(&text);
                    raw = Some(text);
                    if let Ok(plan) = parsed {
                        return Generation {
                            plan,
                            attempts,
                            used_fallback: false,
                            raw,
                        };
                    }
                }
                let plan = fallback
                    .as_ref()
                    .and_then(|m| m.generate(input_utterance, input_plan, top_p, &mut rng).ok())
                    .unwrap_or_else(Plan::respond);
                Generation {
                    plan,
                    attempts,
                    used_fallback: true,
                    raw,
                }
            }
        }
    }

    /// Serialises to the on-disk format: a header line
    /// `ASKFRAME-PLANNER <version> <kind> <sha256 of payload>` followed by
    /// the JSON payload.
    pub fn to_bytes(&self) -> Vec<u8> {
        let payload = serde_json::to_vec(self).expect("model serialises");
        let digest = Sha256::digest(&payload);
        let mut out = format!("{MODEL_MAGIC} {MODEL_FORMAT_VERSION} {} {digest:x}\n", self.kind_name()).into_bytes();
        out.extend_from_slice(&payload);
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self, PlannerError> {
        let corrupt = |m: &str| PlannerError::CorruptModel(m.to_string());
        let newline = bytes
            .iter()
            .position(|&b| b == b'\n')
            .ok_or_else(|| corrupt("missing header line"))?;
        let header = std::str::from_utf8(&bytes[..newline]).map_err(|_| corrupt("header is not UTF-8"))?;
        let fields: Vec<&str> = header.split(' ').collect();
        let [magic, version, kind, checksum] = fields[..] else {
            return Err(corrupt("malformed header"));
        };
        if magic != MODEL_MAGIC {
            return Err(corrupt("bad magic"));
        }
        if version != MODEL_FORMAT_VERSION.to_string() {
            return Err(PlannerError::VersionMismatch {
                found: version.to_string(),
                expected: MODEL_FORMAT_VERSION,
            });
        }
        let payload = &bytes[newline + 1..];
        if format!("{:x}", Sha256::digest(payload)) != checksum {
            return Err(corrupt("checksum mismatch"));
        }
        let model: PlannerModel =
            serde_json::from_slice(payload).map_err(|e| PlannerError::CorruptModel(e.to_string()))?;
        if model.kind_name() != kind {
            return Err(corrupt("kind tag does not match payload"));
        }
        Ok(model)
    }
}

pub fn save_model(model: &PlannerModel, path: impl AsRef<Path>) -> Result<(), PlannerError> {
    let mut file = std::fs::File::create(path)?;
    file.write_all(&model.to_bytes())?;
    Ok(())
}

pub fn load_model(path: impl AsRef<Path>) -> Result<PlannerModel, PlannerError> {
    PlannerModel::from_bytes(&std::fs::read(path)?)
}

/// Convenience wrapper returning only the plan.
pub fn generate_plan(model: &PlannerModel, input_utterance: &str, input_plan: &Plan, params: &SamplingParams) -> Plan {
    model.generate(input_utterance, input_plan, params).plan
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::TrainingExample;
    use crate::lexicon::Lexicon;

    fn examples() -> Vec<TrainingExample> {
        [
            (
                "Could you tell me your name?",
                "GIVE [tell [me your name]]",
                "GIVE [give [my name]]",
            ),
            ("Please check the site.", "PERFORM [check [the site]]", "RESPOND"),
            ("Hi", "RESPOND", "GIVE [tell [me]]"),
        ]
        .iter()
        .map(|(u, i, r)| TrainingExample {
            dialogue_id: "d".into(),
            turn_index: 0,
            input_utterance: u.to_string(),
            input_plan: parse_plan(i).unwrap(),
            response_plan: parse_plan(r).unwrap(),
            response_utterance: String::new(),
        })
        .collect()
    }

    fn meta() -> ModelMetadata {
        ModelMetadata {
            corpus_tag: "toy".into(),
            lexicon_hash: Lexicon::default().content_hash(),
            created_at: None,
            n_examples: 3,
        }
    }

    fn ngram_model() -> PlannerModel {
        ngram_model_of_order(3)
    }

    fn ngram_model_of_order(order: usize) -> PlannerModel {
        let lex = Lexicon::default();
        PlannerModel {
            metadata: meta(),
            model: PlannerKind::Ngram {
                ngram: train_ngram_planner(&examples(), order, &lex).unwrap(),
                fallback: Some(train_type_planner(&examples(), &lex).unwrap()),
            },
        }
    }

    #[test]
    fn round_trip_bytes() {
        let m = ngram_model();
        assert_eq!(PlannerModel::from_bytes(&m.to_bytes()).unwrap(), m);
        let t = PlannerModel {
            metadata: meta(),
            model: PlannerKind::TypeTransition(train_type_planner(&examples(), &Lexicon::default()).unwrap()),
        };
        assert_eq!(PlannerModel::from_bytes(&t.to_bytes()).unwrap(), t);
    }

    #[test]
    fn truncated_is_corrupt() {
        let bytes = ngram_model().to_bytes();
        for cut in [0, 10, bytes.len() / 2, bytes.len() - 1] {
            assert!(matches!(
                PlannerModel::from_bytes(&bytes[..cut]),
                Err(PlannerError::CorruptModel(_))
            ));
        }
    }

    #[test]
    fn old_version_rejected() {
        let bytes = ngram_model().to_bytes();
        let text = String::from_utf8(bytes).unwrap().replacen(" 1 ", " 0 ", 1);
        assert!(matches!(
            PlannerModel::from_bytes(text.as_bytes()),
            Err(PlannerError::VersionMismatch { .. })
        ));
    }

    #[test]
    fn kind_tag_must_match() {
        let text = String::from_utf8(ngram_model().to_bytes())
            .unwrap()
            .replacen(" ngram ", " type ", 1);
        assert!(matches!(
            PlannerModel::from_bytes(text.as_bytes()),
            Err(PlannerError::CorruptModel(_))
        ));
    }

    #[test]
    fn generation_is_seeded() {
        let m = ngram_model();
        let plan = parse_plan("GIVE [tell [me your name]]").unwrap();
        let params = SamplingParams {
            seed: 9,
            ..Default::default()
        };
        let a = m.generate("Could you tell me your name?", &plan, &params);
        let b = m.generate("Could you tell me your name?", &plan, &params);
        assert_eq!(a, b);
        // a trigram only sees "] ] <plan>", so the input words need a
        // longer context to pick the matching response
        let m = ngram_model_of_order(8);
        let greedy = m.generate("Could you tell me your name?", &plan, &SamplingParams::greedy(0));
        assert_eq!(greedy.plan.to_string(), "GIVE [give [my name]]");
        assert!(!greedy.used_fallback);
    }

    #[test]
    fn malformed_output_falls_back() {
        // a one-token budget can only yield a bare type name, which is
        // malformed for GIVE, so every attempt fails
        let m = ngram_model();
        let params = SamplingParams {
            max_tokens: 1,
            retries: 2,
            ..SamplingParams::greedy(0)
        };
        let plan = parse_plan("GIVE [tell [me your name]]").unwrap();
        let g = m.generate("Could you tell me your name?", &plan, &params);
        assert!(g.used_fallback);
        assert_eq!(g.attempts, 3);
        assert_eq!(g.raw.as_deref(), Some("GIVE"));

        let PlannerKind::Ngram { ngram, .. } = m.model else {
            unreachable!()
        };
        let bare = PlannerModel {
            metadata: meta(),
            model: PlannerKind::Ngram { ngram, fallback: None },
        };
        assert_eq!(bare.generate("x", &plan, &params).plan, Plan::respond());
    }
}
