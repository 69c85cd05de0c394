//! Rule-based extraction of ask/framing plans from utterance text.
//!
//! Each sentence is run through a fixed cascade of ask patterns (the first
//! pattern that fires wins, so there is at most one ask per sentence),
//! after which every remaining gain/lose marker anchors a framing.

use crate::lexicon::Lexicon;
use crate::plan::{Plan, PlanElement, PlanType};
use crate::text::{is_punct, split_sentences, tokenize};

const CLAUSE_CONJUNCTIONS: [&str; 4] = ["and", "but", "or", "so"];
const SUBORDINATORS: [&str; 2] = ["because", "if"];
const QUESTION_AUX: [&str; 5] = ["do", "did", "are", "is", "have"];
const SYNTHETIC_ACTION: &str = "give";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Pattern {
    Imperative,
    ModalRequest,
    Desire,
    Elicitation,
    Framing,
}

impl Pattern {
    pub fn name(self) -> &'static str {
        match self {
            Pattern::Imperative => "imperative",
            Pattern::ModalRequest => "modal-request",
            Pattern::Desire => "desire",
            Pattern::Elicitation => "elicitation",
            Pattern::Framing => "framing",
        }
    }
}

/// A fired rule, anchored at a token of one sentence.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClauseMatch {
    pub ptype: PlanType,
    pub verb_index: usize,
    pub sentence_index: usize,
    pub pattern: Pattern,
    /// Set when an elicitation question had no lexicon verb; the element
    /// then uses the action `give` and `verb_index` points at the trigger.
    pub synthetic_action: bool,
}

fn ask_type(lexicon: &Lexicon, verb: &str) -> PlanType {
    if lexicon.give_verbs.contains(verb) {
        PlanType::Give
    } else {
        PlanType::Perform
    }
}

fn tok(tokens: &[String], i: usize) -> &str {
    tokens.get(i).map_or("", String::as_str)
}

/// Subjects that make a leading verb declarative ("they help") rather than
/// an address to the listener ("if you check").
const OTHER_SUBJECTS: [&str; 8] = ["i", "we", "they", "he", "she", "it", "this", "that"];

fn imperative(tokens: &[String], lexicon: &Lexicon) -> Option<usize> {
    let first = tokens
        .iter()
        .position(|t| !is_punct(t) && t != "please" && !lexicon.is_stopword(t))?;
    if tokens[..first].iter().any(|t| OTHER_SUBJECTS.contains(&t.as_str())) {
        return None;
    }
    lexicon.is_ask_verb(&tokens[first]).then_some(first)
}

fn modal_request(tokens: &[String], lexicon: &Lexicon) -> Option<usize> {
    (0..tokens.len()).find_map(|i| {
        if !lexicon.modal_words.contains(&tokens[i]) || tok(tokens, i + 1) != "you" {
            return None;
        }
        let verb = if tok(tokens, i + 2) == "please" { i + 3 } else { i + 2 };
        lexicon.is_ask_verb(tok(tokens, verb)).then_some(verb)
    })
}

fn desire(tokens: &[String]) -> Option<usize> {
    let matches_at = |i: usize, pattern: &[&str]| pattern.iter().enumerate().all(|(k, p)| tok(tokens, i + k) == *p);
    (0..tokens.len()).find_map(|i| {
        let i_need =
            tok(tokens, i) == "i" && matches!(tok(tokens, i + 1), "need" | "want") && matches_at(i + 2, &["you", "to"]);
        if !i_need && !matches_at(i, &["would", "you", "like", "to"]) {
            return None;
        }
        let verb = i + 4;
        (verb < tokens.len() && !is_punct(&tokens[verb])).then_some(verb)
    })
}

/// Returns (anchor index, whether the action is synthetic).
fn elicitation(tokens: &[String], lexicon: &Lexicon) -> Option<(usize, bool)> {
    if tokens.last().map(String::as_str) != Some("?") {
        return None;
    }
    let wh = tokens.iter().position(|t| lexicon.wh_words.contains(t));
    let aux = QUESTION_AUX.contains(&tok(tokens, 0)).then_some(0);
    let trigger = match (wh, aux) {
        (Some(a), Some(b)) => a.min(b),
        (a, b) => a.or(b)?,
    };
    let verb = (trigger + 1..tokens.len()).find(|&i| lexicon.is_ask_verb(&tokens[i]));
    Some(match verb {
        Some(v) => (v, false),
        None => (trigger, true),
    })
}

/// Runs the pattern cascade over one tokenized sentence. Matches come back
/// in token order.
pub fn classify_clause(tokens: &[String], sentence_index: usize, lexicon: &Lexicon) -> Vec<ClauseMatch> {
    let mut out = Vec::new();
    let ask = |verb_index: usize, pattern| ClauseMatch {
        ptype: ask_type(lexicon, &tokens[verb_index]),
        verb_index,
        sentence_index,
        pattern,
        synthetic_action: false,
    };
    let found = imperative(tokens, lexicon)
        .map(|v| ask(v, Pattern::Imperative))
        .or_else(|| modal_request(tokens, lexicon).map(|v| ask(v, Pattern::ModalRequest)))
        .or_else(|| desire(tokens).map(|v| ask(v, Pattern::Desire)))
        .or_else(|| {
            elicitation(tokens, lexicon).map(|(v, synthetic_action)| ClauseMatch {
                ptype: PlanType::Give,
                verb_index: v,
                sentence_index,
                pattern: Pattern::Elicitation,
                synthetic_action,
            })
        });
    let ask_index = found.as_ref().map(|m| m.verb_index);
    out.extend(found);

    for (i, t) in tokens.iter().enumerate() {
        if Some(i) == ask_index {
            continue;
        }
        let ptype = if lexicon.gain_markers.contains(t) {
            PlanType::Gain
        } else if lexicon.lose_markers.contains(t) {
            PlanType::Lose
        } else {
            continue;
        };
        out.push(ClauseMatch {
            ptype,
            verb_index: i,
            sentence_index,
            pattern: Pattern::Framing,
            synthetic_action: false,
        });
    }
    out.sort_by_key(|m| m.verb_index);
    out
}

fn is_boundary(token: &str) -> bool {
    is_punct(token) || CLAUSE_CONJUNCTIONS.contains(&token) || SUBORDINATORS.contains(&token)
}

fn span_until_boundary(tokens: &[String], start: usize) -> Vec<String> {
    tokens
        .iter()
        .skip(start)
        .take_while(|t| !is_boundary(t))
        .cloned()
        .collect()
}

/// Action is the verb plus an optional particle; the target runs from the
/// next token to the first clause boundary.
pub fn extract_target(tokens: &[String], verb_index: usize, lexicon: &Lexicon) -> (Vec<String>, Vec<String>) {
    let Some(verb) = tokens.get(verb_index) else {
        return (Vec::new(), Vec::new());
    };
    let mut action = vec![verb.clone()];
    if let Some(next) = tokens.get(verb_index + 1) {
        if lexicon.particles.contains(next) {
            action.push(next.clone());
        }
    }
    let target = span_until_boundary(tokens, verb_index + action.len());
    (action, target)
}

fn element_for(tokens: &[String], m: &ClauseMatch, lexicon: &Lexicon) -> Option<PlanElement> {
    let (action, target) = if m.synthetic_action {
        (
            vec![SYNTHETIC_ACTION.to_string()],
            span_until_boundary(tokens, m.verb_index + 1),
        )
    } else {
        extract_target(tokens, m.verb_index, lexicon)
    };
    PlanElement::new(m.ptype, action, target).ok()
}

/// Full symbolic planning of one utterance. Total: falls back to RESPOND.
pub fn extract_plan(text: &str, lexicon: &Lexicon) -> Plan {
    let mut elements = Vec::new();
    for (s, sentence) in split_sentences(text).iter().enumerate() {
        let tokens = tokenize(sentence);
        for m in classify_clause(&tokens, s, lexicon) {
            elements.extend(element_for(&tokens, &m, lexicon));
        }
    }
    Plan::new(elements).unwrap_or_else(|_| Plan::respond())
}
