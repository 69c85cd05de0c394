//! Ask/framing plan representation.
//!
//! A plan is a non-empty sequence of elements, each written as
//! `TYPE [action [target]]`, or the bare word `RESPOND`. Elements are
//! separated by `;`. The canonical form produced by [`Plan`]'s `Display`
//! impl is what every file format in this crate stores.

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PlanError {
    #[error("malformed plan at byte {position}: {reason}")]
    MalformedPlan { position: usize, reason: String },
    #[error("invalid plan element: {0}")]
    InvalidElement(String),
    #[error("a plan needs at least one element")]
    EmptyPlan,
}

fn malformed(position: usize, reason: impl Into<String>) -> PlanError {
    PlanError::MalformedPlan {
        position,
        reason: reason.into(),
    }
}

/// The five element types. GIVE/PERFORM are asks, GAIN/LOSE are framings.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum PlanType {
    Give,
    Perform,
    Gain,
    Lose,
    Respond,
}

impl PlanType {
    pub const ALL: [PlanType; 5] = [
        PlanType::Give,
        PlanType::Perform,
        PlanType::Gain,
        PlanType::Lose,
        PlanType::Respond,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            PlanType::Give => "GIVE",
            PlanType::Perform => "PERFORM",
            PlanType::Gain => "GAIN",
            PlanType::Lose => "LOSE",
            PlanType::Respond => "RESPOND",
        }
    }

    pub fn is_ask(self) -> bool {
        matches!(self, PlanType::Give | PlanType::Perform)
    }

    pub fn is_framing(self) -> bool {
        matches!(self, PlanType::Gain | PlanType::Lose)
    }
}

impl fmt::Display for PlanType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for PlanType {
    type Err = PlanError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        PlanType::ALL
            .into_iter()
            .find(|t| t.as_str().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| PlanError::InvalidElement(format!("unknown plan type {s:?}")))
    }
}

fn is_reserved(c: char) -> bool {
    matches!(c, '[' | ']' | ';')
}

/// One `TYPE [action [target]]` constituent.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct PlanElement {
    ptype: PlanType,
    action: Vec<String>,
    target: Vec<String>,
}

impl PlanElement {
    /// Builds an element, checking the action/target invariants for its type.
    /// Tokens are lowercased, as the parser does.
    pub fn new(ptype: PlanType, action: Vec<String>, target: Vec<String>) -> Result<Self, PlanError> {
        let lower = |v: Vec<String>| v.into_iter().map(|t| t.to_lowercase()).collect::<Vec<_>>();
        let (action, target) = (lower(action), lower(target));
        if ptype == PlanType::Respond {
            if !action.is_empty() || !target.is_empty() {
                return Err(PlanError::InvalidElement("RESPOND carries no action or target".into()));
            }
        } else if action.is_empty() {
            return Err(PlanError::InvalidElement(format!("{ptype} needs an action")));
        }
        for tok in action.iter().chain(&target) {
            if tok.is_empty() || tok.chars().any(|c| is_reserved(c) || c.is_whitespace()) {
                return Err(PlanError::InvalidElement(format!("bad token {tok:?}")));
            }
        }
        Ok(PlanElement { ptype, action, target })
    }

    pub fn respond() -> Self {
        PlanElement {
            ptype: PlanType::Respond,
            action: Vec::new(),
            target: Vec::new(),
        }
    }

    /// Convenience constructor from whitespace-separated strings.
    pub fn from_words(ptype: PlanType, action: &str, target: &str) -> Result<Self, PlanError> {
        let words = |s: &str| s.split_whitespace().map(str::to_lowercase).collect();
        PlanElement::new(ptype, words(action), words(target))
    }

    pub fn ptype(&self) -> PlanType {
        self.ptype
    }

    pub fn action(&self) -> &[String] {
        &self.action
    }

    pub fn target(&self) -> &[String] {
        &self.target
    }
}

impl fmt::Display for PlanElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.ptype == PlanType::Respond {
            return f.write_str("RESPOND");
        }
        write!(
            f,
            "{} [{} [{}]]",
            self.ptype,
            self.action.join(" "),
            self.target.join(" ")
        )
    }
}

/// A non-empty, ordered sequence of plan elements.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Plan {
    elements: Vec<PlanElement>,
}

impl Plan {
    pub fn new(elements: Vec<PlanElement>) -> Result<Self, PlanError> {
        if elements.is_empty() {
            return Err(PlanError::EmptyPlan);
        }
        Ok(Plan { elements })
    }

    /// The default plan: a single RESPOND element.
    pub fn respond() -> Self {
        Plan {
            elements: vec![PlanElement::respond()],
        }
    }

    pub fn elements(&self) -> &[PlanElement] {
        &self.elements
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn types(&self) -> Vec<PlanType> {
        self.elements.iter().map(PlanElement::ptype).collect()
    }

    /// Space-joined type names, e.g. `"PERFORM GAIN"`.
    pub fn type_key(&self) -> String {
        type_key(&self.types())
    }

    pub fn is_respond_only(&self) -> bool {
        self.elements.iter().all(|e| e.ptype == PlanType::Respond)
    }
}

pub fn type_key(types: &[PlanType]) -> String {
    types.iter().map(|t| t.as_str()).collect::<Vec<_>>().join(" ")
}

impl fmt::Display for Plan {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, el) in self.elements.iter().enumerate() {
            if i > 0 {
                f.write_str(" ; ")?;
            }
            write!(f, "{el}")?;
        }
        Ok(())
    }
}

impl FromStr for Plan {
    type Err = PlanError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        parse_plan(s)
    }
}

impl Serialize for Plan {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Plan {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        parse_plan(&s).map_err(serde::de::Error::custom)
    }
}

/// Canonical string form.
pub fn serialize_plan(plan: &Plan) -> String {
    plan.to_string()
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Lexeme {
    Open,
    Close,
    Sep,
    Word(String),
}

fn lex(text: &str) -> Vec<(usize, Lexeme)> {
    let mut out = Vec::new();
    let mut word_start: Option<usize> = None;
    let flush = |out: &mut Vec<(usize, Lexeme)>, start: &mut Option<usize>, end: usize| {
        if let Some(s) = start.take() {
            out.push((s, Lexeme::Word(text[s..end].to_string())));
        }
    };
    for (i, c) in text.char_indices() {
        if c.is_whitespace() || is_reserved(c) {
            flush(&mut out, &mut word_start, i);
            match c {
                '[' => out.push((i, Lexeme::Open)),
                ']' => out.push((i, Lexeme::Close)),
                ';' => out.push((i, Lexeme::Sep)),
                _ => {}
            }
        } else if word_start.is_none() {
            word_start = Some(i);
        }
    }
    flush(&mut out, &mut word_start, text.len());
    out
}

struct Parser {
    lexemes: Vec<(usize, Lexeme)>,
    pos: usize,
    end: usize,
}

impl Parser {
    fn peek(&self) -> Option<&Lexeme> {
        self.lexemes.get(self.pos).map(|(_, l)| l)
    }

    fn offset(&self) -> usize {
        self.lexemes.get(self.pos).map_or(self.end, |(o, _)| *o)
    }

    fn words(&mut self) -> Vec<String> {
        let mut words = Vec::new();
        while let Some(Lexeme::Word(w)) = self.peek() {
            words.push(w.to_lowercase());
            self.pos += 1;
        }
        words
    }

    fn expect_close(&mut self) -> Result<(), PlanError> {
        match self.peek() {
            Some(Lexeme::Close) => {
                self.pos += 1;
                Ok(())
            }
            _ => Err(malformed(self.offset(), "expected ']'")),
        }
    }

    fn element(&mut self) -> Result<PlanElement, PlanError> {
        let at = self.offset();
        let name = match self.peek() {
            Some(Lexeme::Word(w)) => w.clone(),
            _ => return Err(malformed(at, "expected a plan type name")),
        };
        self.pos += 1;
        let ptype: PlanType = name
            .parse()
            .map_err(|_| malformed(at, format!("unknown plan type {name:?}")))?;

        let (mut action, mut target) = (Vec::new(), Vec::new());
        if let Some(Lexeme::Open) = self.peek() {
            self.pos += 1;
            action = self.words();
            if let Some(Lexeme::Open) = self.peek() {
                self.pos += 1;
                target = self.words();
                self.expect_close()?;
            }
            self.expect_close()?;
        } else if ptype != PlanType::Respond {
            return Err(malformed(self.offset(), format!("expected '[' after {ptype}")));
        }
        PlanElement::new(ptype, action, target).map_err(|e| malformed(at, e.to_string()))
    }
}

/// Parses a plan string. Whitespace around brackets is insignificant,
/// type names are case-insensitive and action/target words are lowercased.
pub fn parse_plan(text: &str) -> Result<Plan, PlanError> {
    if text.trim().is_empty() {
        return Err(malformed(0, "empty plan string"));
    }
    let mut parser = Parser {
        lexemes: lex(text),
        pos: 0,
        end: text.len(),
    };
    let mut elements = vec![parser.element()?];
    while let Some(lexeme) = parser.peek() {
        match lexeme {
            Lexeme::Sep => {
                parser.pos += 1;
                elements.push(parser.element()?);
            }
            _ => return Err(malformed(parser.offset(), "unexpected trailing input")),
        }
    }
    Plan::new(elements)
}

/// Whitespace tokens of the canonical serialization with brackets and
/// separators as standalone tokens.
pub fn plan_tokens(plan: &Plan) -> Vec<String> {
    let mut out = Vec::new();
    for (i, el) in plan.elements.iter().enumerate() {
        if i > 0 {
            out.push(";".to_string());
        }
        out.push(el.ptype.as_str().to_string());
        if el.ptype == PlanType::Respond {
            continue;
        }
        out.push("[".into());
        out.extend(el.action.iter().cloned());
        out.push("[".into());
        out.extend(el.target.iter().cloned());
        out.push("]".into());
        out.push("]".into());
    }
    out
}

fn jaccard(a: &[String], b: &[String]) -> f64 {
    let a: BTreeSet<&str> = a.iter().map(String::as_str).collect();
    let b: BTreeSet<&str> = b.iter().map(String::as_str).collect();
    let union = a.union(&b).count();
    if union == 0 {
        return 1.0;
    }
    a.intersection(&b).count() as f64 / union as f64
}

/// 0.4 for a type match plus 0.3 per Jaccard overlap of action and target.
pub fn element_similarity(a: &PlanElement, b: &PlanElement) -> f64 {
    if a.ptype != b.ptype {
        return 0.0;
    }
    (4.0 + 3.0 * jaccard(&a.action, &b.action) + 3.0 * jaccard(&a.target, &b.target)) / 10.0
}

/// Greedy one-to-one element alignment, normalised by the longer plan.
///
/// Candidate pairs are taken best-first. Ties are broken on the rendered
/// element strings (unordered), so swapping the arguments picks the same
/// alignment and the score stays symmetric.
pub fn plan_similarity(a: &Plan, b: &Plan) -> f64 {
    let ra: Vec<String> = a.elements.iter().map(ToString::to_string).collect();
    let rb: Vec<String> = b.elements.iter().map(ToString::to_string).collect();
    let mut pairs = Vec::with_capacity(ra.len() * rb.len());
    for (i, ea) in a.elements.iter().enumerate() {
        for (j, eb) in b.elements.iter().enumerate() {
            let (lo, hi) = if ra[i] <= rb[j] {
                (&ra[i], &rb[j])
            } else {
                (&rb[j], &ra[i])
            };
            pairs.push((element_similarity(ea, eb), lo, hi, i, j));
        }
    }
    pairs.sort_by(|x, y| {
        y.0.total_cmp(&x.0)
            .then_with(|| x.1.cmp(y.1))
            .then_with(|| x.2.cmp(y.2))
    });
    let mut used_a = vec![false; a.len()];
    let mut used_b = vec![false; b.len()];
    let mut total = 0.0;
    for (score, _, _, i, j) in pairs {
        if used_a[i] || used_b[j] {
            continue;
        }
        used_a[i] = true;
        used_b[j] = true;
        total += score;
    }
    total / a.len().max(b.len()) as f64
}
