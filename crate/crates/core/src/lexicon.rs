//! Word lists driving the symbolic planner, loaded from a sectioned
//! plain-text file.

use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;

use sha2::{Digest, Sha256};
use thiserror::Error;

const DEFAULT_LEXICON: &str = include_str!("../data/default.lexicon");

#[derive(Debug, Error)]
pub enum LexiconError {
    #[error("lexicon line {line}: {reason}")]
    Syntax { line: usize, reason: String },
    #[error("lexicon sets {first} and {second} overlap on {word:?}")]
    Overlap {
        first: &'static str,
        second: &'static str,
        word: String,
    },
    #[error("reading lexicon: {0}")]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Lexicon {
    pub give_verbs: BTreeSet<String>,
    pub perform_verbs: BTreeSet<String>,
    pub gain_markers: BTreeSet<String>,
    pub lose_markers: BTreeSet<String>,
    pub modal_words: BTreeSet<String>,
    pub wh_words: BTreeSet<String>,
    pub particles: BTreeSet<String>,
    pub stopwords: BTreeSet<String>,
    /// Symmetric: both directions of every declared pair are present.
    pub pronoun_flip_map: BTreeMap<String, String>,
}

impl Default for Lexicon {
    fn default() -> Self {
        Lexicon::parse(DEFAULT_LEXICON).expect("bundled lexicon is valid")
    }
}

impl Lexicon {
    pub fn load(path: impl AsRef<Path>) -> Result<Self, LexiconError> {
        Lexicon::parse(&std::fs::read_to_string(path)?)
    }

    pub fn parse(text: &str) -> Result<Self, LexiconError> {
        let mut lex = Lexicon {
            give_verbs: BTreeSet::new(),
            perform_verbs: BTreeSet::new(),
            gain_markers: BTreeSet::new(),
            lose_markers: BTreeSet::new(),
            modal_words: BTreeSet::new(),
            wh_words: BTreeSet::new(),
            particles: BTreeSet::new(),
            stopwords: BTreeSet::new(),
            pronoun_flip_map: BTreeMap::new(),
        };
        let mut section: Option<String> = None;
        for (idx, raw) in text.lines().enumerate() {
            let line_no = idx + 1;
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            if let Some(name) = line.strip_prefix('[').and_then(|l| l.strip_suffix(']')) {
                section = Some(name.trim().to_string());
                continue;
            }
            let err = |reason: String| LexiconError::Syntax { line: line_no, reason };
            let Some(name) = section.as_deref() else {
                return Err(err("entry before any section header".into()));
            };
            if name == "pronoun_flip_map" {
                let words: Vec<&str> = line.split_whitespace().collect();
                let [a, b] = words[..] else {
                    return Err(err("flip map entries need exactly two words".into()));
                };
                let (a, b) = (a.to_lowercase(), b.to_lowercase());
                lex.pronoun_flip_map.insert(a.clone(), b.clone());
                lex.pronoun_flip_map.insert(b, a);
                continue;
            }
            if line.split_whitespace().count() != 1 {
                return Err(err(format!("expected a single word, got {line:?}")));
            }
            let word = line.to_lowercase();
            let set = match name {
                "give_verbs" => &mut lex.give_verbs,
                "perform_verbs" => &mut lex.perform_verbs,
                "gain_markers" => &mut lex.gain_markers,
                "lose_markers" => &mut lex.lose_markers,
                "modal_words" => &mut lex.modal_words,
                "wh_words" => &mut lex.wh_words,
                "particles" => &mut lex.particles,
                "stopwords" => &mut lex.stopwords,
                other => return Err(err(format!("unknown section [{other}]"))),
            };
            set.insert(word);
        }
        lex.validate()?;
        Ok(lex)
    }

    fn validate(&self) -> Result<(), LexiconError> {
        let check = |a: &BTreeSet<String>, b: &BTreeSet<String>, first, second| match a.intersection(b).next() {
            Some(word) => Err(LexiconError::Overlap {
                first,
                second,
                word: word.clone(),
            }),
            None => Ok(()),
        };
        check(&self.give_verbs, &self.perform_verbs, "give_verbs", "perform_verbs")?;
        check(&self.gain_markers, &self.lose_markers, "gain_markers", "lose_markers")
    }

    pub fn is_ask_verb(&self, word: &str) -> bool {
        self.give_verbs.contains(word) || self.perform_verbs.contains(word)
    }

    pub fn is_stopword(&self, word: &str) -> bool {
        self.stopwords.contains(word)
    }

    /// Renders the lexicon back to its file format with sorted entries.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let sets = [
            ("give_verbs", &self.give_verbs),
            ("perform_verbs", &self.perform_verbs),
            ("gain_markers", &self.gain_markers),
            ("lose_markers", &self.lose_markers),
            ("modal_words", &self.modal_words),
            ("wh_words", &self.wh_words),
            ("particles", &self.particles),
            ("stopwords", &self.stopwords),
        ];
        for (name, set) in sets {
            out.push_str(&format!("[{name}]\n"));
            for w in set {
                out.push_str(w);
                out.push('\n');
            }
        }
        out.push_str("[pronoun_flip_map]\n");
        for (a, b) in &self.pronoun_flip_map {
            if a < b {
                out.push_str(&format!("{a} {b}\n"));
            }
        }
        out
    }

    /// SHA-256 of the canonical rendering, hex encoded.
    pub fn content_hash(&self) -> String {
        let digest = Sha256::digest(self.to_text().as_bytes());
        format!("{digest:x}")
    }
}
