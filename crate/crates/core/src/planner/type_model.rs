//! Response planner built from type-sequence transitions plus per-type
//! action and target distributions.

use std::collections::{BTreeMap, BTreeSet};

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::sampling::{nucleus_sample, Categorical};
use super::PlannerError;
use crate::corpus::TrainingExample;
use crate::lexicon::Lexicon;
use crate::plan::{type_key, Plan, PlanElement, PlanType};
use crate::text::{is_punct, tokenize};

pub const DEFAULT_ALPHA: f64 = 0.1;
const MAX_COPY_SPAN: usize = 4;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TypeTransitionModel {
    pub alpha: f64,
    /// Input type sequence (space-joined) -> distribution over response type
    /// sequences, add-alpha smoothed over `response_vocabulary`.
    pub type_seq_probs: BTreeMap<String, Categorical>,
    /// Unsmoothed marginal over response type sequences; used for inputs
    /// whose type sequence never occurred in training.
    pub marginal: Categorical,
    pub action_probs: BTreeMap<PlanType, Categorical>,
    pub target_probs: BTreeMap<PlanType, BTreeMap<String, Categorical>>,
    pub response_vocabulary: BTreeSet<String>,
    pub stopwords: BTreeSet<String>,
}

pub fn train_type_planner(
    examples: &[TrainingExample],
    lexicon: &Lexicon,
) -> Result<TypeTransitionModel, PlannerError> {
    train_type_planner_with_alpha(examples, lexicon, DEFAULT_ALPHA)
}

pub fn train_type_planner_with_alpha(
    examples: &[TrainingExample],
    lexicon: &Lexicon,
    alpha: f64,
) -> Result<TypeTransitionModel, PlannerError> {
    if examples.is_empty() {
        return Err(PlannerError::NoExamples);
    }
    let mut transitions: BTreeMap<String, BTreeMap<String, u64>> = BTreeMap::new();
    let mut marginal: BTreeMap<String, u64> = BTreeMap::new();
    let mut actions: BTreeMap<PlanType, BTreeMap<String, u64>> = BTreeMap::new();
    let mut targets: BTreeMap<PlanType, BTreeMap<String, BTreeMap<String, u64>>> = BTreeMap::new();

    for ex in examples {
        let response = ex.response_plan.type_key();
        *transitions
            .entry(ex.input_plan.type_key())
            .or_default()
            .entry(response.clone())
            .or_default() += 1;
        *marginal.entry(response).or_default() += 1;
        for el in ex.response_plan.elements() {
            if el.ptype() == PlanType::Respond {
                continue;
            }
            let action = el.action().join(" ");
            *actions
                .entry(el.ptype())
                .or_default()
                .entry(action.clone())
                .or_default() += 1;
            *targets
                .entry(el.ptype())
                .or_default()
                .entry(action)
                .or_default()
                .entry(el.target().join(" "))
                .or_default() += 1;
        }
    }

    let vocabulary: BTreeSet<String> = marginal.keys().cloned().collect();
    let type_seq_probs = transitions
        .into_iter()
        .map(|(input, row)| {
            let total: u64 = row.values().sum();
            let denom = total as f64 + alpha * vocabulary.len() as f64;
            let dist = vocabulary
                .iter()
                .map(|r| {
                    let c = row.get(r).copied().unwrap_or(0) as f64;
                    (r.clone(), (c + alpha) / denom)
                })
                .collect();
            (input, Categorical(dist))
        })
        .collect();

    Ok(TypeTransitionModel {
        alpha,
        type_seq_probs,
        marginal: Categorical::from_counts(&marginal),
        action_probs: actions.iter().map(|(t, c)| (*t, Categorical::from_counts(c))).collect(),
        target_probs: targets
            .iter()
            .map(|(t, by_action)| {
                let rows = by_action
                    .iter()
                    .map(|(a, c)| (a.clone(), Categorical::from_counts(c)))
                    .collect();
                (*t, rows)
            })
            .collect(),
        response_vocabulary: vocabulary,
        stopwords: lexicon.stopwords.clone(),
    })
}

fn sample_key<R: Rng + ?Sized>(dist: &Categorical, top_p: f64, rng: &mut R) -> Result<String, PlannerError> {
    let entries: Vec<(String, f64)> = dist.0.iter().map(|(k, &p)| (k.clone(), p)).collect();
    nucleus_sample(&entries, top_p, rng)
}

impl TypeTransitionModel {
    /// Row used for an input type sequence; unseen inputs get the marginal.
    pub fn response_distribution(&self, input_types: &[PlanType]) -> &Categorical {
        self.type_seq_probs
            .get(&type_key(input_types))
            .unwrap_or(&self.marginal)
    }

    /// Longest run of consecutive content tokens (at most four) following
    /// `action` in the input utterance, within the same clause.
    pub fn copy_target(&self, input_tokens: &[String], action: &[String]) -> Option<Vec<String>> {
        let first = action.first()?;
        let at = input_tokens.iter().position(|t| t == first)?;
        let mut start = at + 1;
        for (k, a) in action.iter().enumerate().skip(1) {
            if input_tokens.get(at + k) == Some(a) {
                start = at + k + 1;
            }
        }
        let clause: Vec<&String> = input_tokens.iter().skip(start).take_while(|t| !is_punct(t)).collect();
        let mut best: &[&String] = &[];
        let mut run_start = 0;
        for i in 0..=clause.len() {
            let content = clause.get(i).is_some_and(|t| !self.stopwords.contains(t.as_str()));
            if !content {
                if i - run_start > best.len() {
                    best = &clause[run_start..i];
                }
                run_start = i + 1;
            }
        }
        if best.is_empty() {
            return None;
        }
        Some(best.iter().take(MAX_COPY_SPAN).map(|t| t.to_string()).collect())
    }

    pub fn generate<R: Rng + ?Sized>(
        &self,
        input_utterance: &str,
        input_plan: &Plan,
        top_p: f64,
        rng: &mut R,
    ) -> Result<Plan, PlannerError> {
        let seq = sample_key(self.response_distribution(&input_plan.types()), top_p, rng)?;
        let input_tokens = tokenize(input_utterance);
        let mut elements = Vec::new();
        for name in seq.split_whitespace() {
            let ptype: PlanType = name.parse()?;
            if ptype == PlanType::Respond {
                elements.push(PlanElement::respond());
                continue;
            }
            let Some(actions) = self.action_probs.get(&ptype) else {
                continue;
            };
            let action_text = sample_key(actions, top_p, rng)?;
            let action: Vec<String> = action_text.split_whitespace().map(String::from).collect();
            let target = match self.copy_target(&input_tokens, &action) {
                Some(t) => t,
                None => match self.target_probs.get(&ptype).and_then(|m| m.get(&action_text)) {
                    Some(dist) => sample_key(dist, top_p, rng)?
                        .split_whitespace()
                        .map(String::from)
                        .collect(),
                    None => Vec::new(),
                },
            };
            elements.push(PlanElement::new(ptype, action, target)?);
        }
        Ok(Plan::new(elements).unwrap_or_else(|_| Plan::respond()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::plan::parse_plan;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn ex(input: &str, response: &str) -> TrainingExample {
        TrainingExample {
            dialogue_id: "t".into(),
            turn_index: 0,
            input_utterance: "hello there".into(),
            input_plan: parse_plan(input).unwrap(),
            response_plan: parse_plan(response).unwrap(),
            response_utterance: String::new(),
        }
    }

    fn toy() -> Vec<TrainingExample> {
        vec![
            ex("GIVE [tell [me]]", "PERFORM [check [the site]]"),
            ex("GIVE [tell [me]]", "PERFORM [check [the site]]"),
            ex("GIVE [send [it]]", "PERFORM [call [us]]"),
            ex("GIVE [share [it]]", "PERFORM [check [the site]]"),
            ex("GIVE [tell [me]]", "RESPOND"),
        ]
    }

    #[test]
    fn smoothed_rows_sum_to_one() {
        let m = train_type_planner(&toy(), &Lexicon::default()).unwrap();
        let row = &m.type_seq_probs["GIVE"];
        assert!((row.total() - 1.0).abs() < 1e-9);
        // (4 + 0.1) / (5 + 0.2) and (1 + 0.1) / (5 + 0.2)
        assert!((row.prob("PERFORM") - 4.1 / 5.2).abs() < 1e-12);
        assert!((row.prob("RESPOND") - 1.1 / 5.2).abs() < 1e-12);
        assert_eq!(row.mode(), Some("PERFORM"));
        assert!((m.action_probs[&PlanType::Perform].prob("check") - 0.75).abs() < 1e-12);
        assert_eq!(m.target_probs[&PlanType::Perform]["check"].prob("the site"), 1.0);
    }

    #[test]
    fn single_example_dominates_unseen() {
        let m = train_type_planner(&toy()[..1], &Lexicon::default()).unwrap();
        let row = &m.type_seq_probs["GIVE"];
        assert!(row.prob("PERFORM") > row.prob("RESPOND"));
        assert_eq!(row.prob("PERFORM"), 1.0);
    }

    #[test]
    fn no_examples() {
        assert!(matches!(
            train_type_planner(&[], &Lexicon::default()),
            Err(PlannerError::NoExamples)
        ));
    }

    #[test]
    fn unseen_input_uses_marginal() {
        let m = train_type_planner(&toy(), &Lexicon::default()).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let plan = m
            .generate("hm", &parse_plan("LOSE [lose [money]]").unwrap(), 1e-12, &mut rng)
            .unwrap();
        assert_eq!(plan.to_string(), "PERFORM [check [the site]]");
    }

    #[test]
    fn copy_target_prefers_input_words() {
        let m = train_type_planner(&toy(), &Lexicon::default()).unwrap();
        let toks = tokenize("you should check the charity website today, really");
        let got = m.copy_target(&toks, &["check".to_string()]).unwrap();
        assert_eq!(got, ["charity", "website", "today"]);
        assert!(m.copy_target(&toks, &["call".to_string()]).is_none());
        let toks = tokenize("check the a b c d e f");
        assert_eq!(m.copy_target(&toks, &["check".to_string()]).unwrap().len(), 4);
    }
}
