//! Dialogue corpora: loading, symbolic annotation, statistics, splitting
//! and construction of planner training examples.

use std::collections::BTreeSet;
use std::fs::File;
use std::io::{BufRead, BufReader, Read, Write};
use std::path::Path;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::lexicon::Lexicon;
use crate::plan::{Plan, PlanType};
use crate::symbolic::extract_plan;
use crate::text::{is_punct, tokenize};

#[derive(Debug, Error)]
pub enum CorpusError {
    #[error("line {line}: {reason}")]
    Format { line: usize, reason: String },
    #[error("line {line}: duplicate dialogue id {id:?}")]
    DuplicateDialogueId { id: String, line: usize },
    #[error("corpus is empty")]
    EmptyCorpus,
    #[error("need at least 3 dialogues to split, got {0}")]
    TooFewDialogues(usize),
    #[error("split ratios must be non-negative and sum to 1, got {0:?}")]
    InvalidRatios((f64, f64, f64)),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CorpusFormat {
    Jsonl,
    Csv2Col,
}

impl std::str::FromStr for CorpusFormat {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "jsonl" => Ok(CorpusFormat::Jsonl),
            "csv2col" | "csv" => Ok(CorpusFormat::Csv2Col),
            other => Err(format!("unknown corpus format {other:?} (jsonl|csv2col)")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Utterance {
    pub speaker: String,
    pub text: String,
    #[serde(skip)]
    pub turn_index: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Dialogue {
    pub dialogue_id: String,
    #[serde(default)]
    pub corpus_tag: String,
    pub turns: Vec<Utterance>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AnnotatedUtterance {
    pub speaker: String,
    pub text: String,
    pub plan: Plan,
    #[serde(skip)]
    pub turn_index: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AnnotatedDialogue {
    pub dialogue_id: String,
    #[serde(default)]
    pub corpus_tag: String,
    pub turns: Vec<AnnotatedUtterance>,
}

/// Silver-standard planner training record built from one turn pair.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TrainingExample {
    pub dialogue_id: String,
    pub turn_index: usize,
    pub input_utterance: String,
    pub input_plan: Plan,
    pub response_plan: Plan,
    pub response_utterance: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorpusStats {
    pub n_dialogues: usize,
    pub n_utterances: usize,
    pub avg_conversation_length: f64,
    pub avg_utterance_length: f64,
    pub n_give: usize,
    pub n_perform: usize,
    pub n_gain: usize,
    pub n_lose: usize,
    pub n_respond: usize,
}

impl CorpusStats {
    pub fn count(&self, ptype: PlanType) -> usize {
        match ptype {
            PlanType::Give => self.n_give,
            PlanType::Perform => self.n_perform,
            PlanType::Gain => self.n_gain,
            PlanType::Lose => self.n_lose,
            PlanType::Respond => self.n_respond,
        }
    }
}

#[derive(Deserialize)]
struct RawTurn {
    speaker: String,
    text: String,
    #[serde(default)]
    plan: Option<String>,
}

#[derive(Deserialize)]
struct RawDialogue {
    #[serde(alias = "id")]
    dialogue_id: String,
    #[serde(default)]
    corpus_tag: String,
    turns: Vec<RawTurn>,
}

/// Drops blank turns, merges consecutive same-speaker turns and renumbers.
fn normalise_turns(raw: Vec<(String, String)>) -> Vec<Utterance> {
    let mut turns: Vec<Utterance> = Vec::new();
    for (speaker, text) in raw {
        let text = text.trim();
        if text.is_empty() {
            continue;
        }
        match turns.last_mut() {
            Some(last) if last.speaker == speaker => {
                last.text.push(' ');
                last.text.push_str(text);
            }
            _ => turns.push(Utterance {
                turn_index: turns.len(),
                speaker,
                text: text.to_string(),
            }),
        }
    }
    turns
}

fn build_dialogue(
    id: String,
    corpus_tag: String,
    raw: Vec<(String, String)>,
    line: usize,
) -> Result<Dialogue, CorpusError> {
    let turns = normalise_turns(raw);
    if turns.len() < 2 {
        return Err(CorpusError::Format {
            line,
            reason: format!("dialogue {id:?} has fewer than 2 turns after merging"),
        });
    }
    Ok(Dialogue {
        dialogue_id: id,
        corpus_tag,
        turns,
    })
}

pub fn load_corpus(path: impl AsRef<Path>, format: CorpusFormat) -> Result<Vec<Dialogue>, CorpusError> {
    let path = path.as_ref();
    let file = File::open(path)?;
    match format {
        CorpusFormat::Jsonl => read_dialogues_jsonl(BufReader::new(file)),
        CorpusFormat::Csv2Col => {
            let tag = path
                .file_stem()
                .map(|s| s.to_string_lossy().into_owned())
                .unwrap_or_default();
            read_dialogues_csv(file, &tag)
        }
    }
}

pub fn read_dialogues_jsonl(reader: impl BufRead) -> Result<Vec<Dialogue>, CorpusError> {
    let mut seen = BTreeSet::new();
    let mut out = Vec::new();
    for (line, raw) in read_jsonl_lines::<RawDialogue>(reader)? {
        if !seen.insert(raw.dialogue_id.clone()) {
            return Err(CorpusError::DuplicateDialogueId {
                id: raw.dialogue_id,
                line,
            });
        }
        let turns = raw.turns.into_iter().map(|t| (t.speaker, t.text)).collect();
        out.push(build_dialogue(raw.dialogue_id, raw.corpus_tag, turns, line)?);
    }
    Ok(out)
}

/// Dialogue id, (speaker, text) turns, first line number.
type OpenDialogue = (String, Vec<(String, String)>, usize);

/// Rows of `dialogue_id,speaker,text` in turn order. A header row with
/// exactly those names is skipped. Rows of one dialogue must be contiguous.
pub fn read_dialogues_csv(reader: impl Read, corpus_tag: &str) -> Result<Vec<Dialogue>, CorpusError> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .from_reader(reader);
    let mut seen = BTreeSet::new();
    let mut out = Vec::new();
    let mut current: Option<OpenDialogue> = None;
    for (idx, record) in rdr.records().enumerate() {
        let line = idx + 1;
        let record = record.map_err(|e| CorpusError::Format {
            line,
            reason: e.to_string(),
        })?;
        if record.len() != 3 {
            return Err(CorpusError::Format {
                line,
                reason: format!("expected 3 columns, found {}", record.len()),
            });
        }
        let (id, speaker, text) = (&record[0], &record[1], &record[2]);
        if line == 1 && id == "dialogue_id" && speaker == "speaker" && text == "text" {
            continue;
        }
        let same = current.as_ref().is_some_and(|(cur, _, _)| cur == id);
        if !same {
            if let Some((cid, turns, start)) = current.take() {
                out.push(build_dialogue(cid, corpus_tag.to_string(), turns, start)?);
            }
            if !seen.insert(id.to_string()) {
                return Err(CorpusError::DuplicateDialogueId {
                    id: id.to_string(),
                    line,
                });
            }
            current = Some((id.to_string(), Vec::new(), line));
        }
        if let Some((_, turns, _)) = current.as_mut() {
            turns.push((speaker.to_string(), text.to_string()));
        }
    }
    if let Some((cid, turns, start)) = current {
        out.push(build_dialogue(cid, corpus_tag.to_string(), turns, start)?);
    }
    Ok(out)
}

/// Reads annotated dialogue JSONL; turns must carry a `plan` field.
pub fn read_annotated_jsonl(reader: impl BufRead) -> Result<Vec<AnnotatedDialogue>, CorpusError> {
    let mut out = Vec::new();
    let mut seen = BTreeSet::new();
    for (line, raw) in read_jsonl_lines::<RawDialogue>(reader)? {
        if !seen.insert(raw.dialogue_id.clone()) {
            return Err(CorpusError::DuplicateDialogueId {
                id: raw.dialogue_id,
                line,
            });
        }
        let mut turns = Vec::with_capacity(raw.turns.len());
        for (i, t) in raw.turns.into_iter().enumerate() {
            let plan_text = t.plan.ok_or_else(|| CorpusError::Format {
                line,
                reason: format!("turn {i} has no plan"),
            })?;
            let plan = plan_text.parse().map_err(|e| CorpusError::Format {
                line,
                reason: format!("turn {i}: {e}"),
            })?;
            turns.push(AnnotatedUtterance {
                speaker: t.speaker,
                text: t.text,
                plan,
                turn_index: i,
            });
        }
        out.push(AnnotatedDialogue {
            dialogue_id: raw.dialogue_id,
            corpus_tag: raw.corpus_tag,
            turns,
        });
    }
    Ok(out)
}

/// Parses one JSON value per non-blank line, reporting 1-based line numbers.
pub fn read_jsonl_lines<T: DeserializeOwned>(reader: impl BufRead) -> Result<Vec<(usize, T)>, CorpusError> {
    let mut out = Vec::new();
    for (idx, line) in reader.lines().enumerate() {
        let line_no = idx + 1;
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let value = serde_json::from_str(&line).map_err(|e| CorpusError::Format {
            line: line_no,
            reason: e.to_string(),
        })?;
        out.push((line_no, value));
    }
    Ok(out)
}

pub fn read_jsonl<T: DeserializeOwned>(reader: impl BufRead) -> Result<Vec<T>, CorpusError> {
    Ok(read_jsonl_lines(reader)?.into_iter().map(|(_, v)| v).collect())
}

pub fn write_jsonl<T: Serialize>(mut writer: impl Write, items: &[T]) -> std::io::Result<()> {
    for item in items {
        serde_json::to_writer(&mut writer, item)?;
        writer.write_all(b"\n")?;
    }
    Ok(())
}

pub fn annotate_dialogue(dialogue: &Dialogue, lexicon: &Lexicon) -> AnnotatedDialogue {
    AnnotatedDialogue {
        dialogue_id: dialogue.dialogue_id.clone(),
        corpus_tag: dialogue.corpus_tag.clone(),
        turns: dialogue
            .turns
            .iter()
            .map(|u| AnnotatedUtterance {
                speaker: u.speaker.clone(),
                text: u.text.clone(),
                plan: extract_plan(&u.text, lexicon),
                turn_index: u.turn_index,
            })
            .collect(),
    }
}

pub fn annotate_corpus(dialogues: &[Dialogue], lexicon: &Lexicon) -> Vec<AnnotatedDialogue> {
    dialogues.iter().map(|d| annotate_dialogue(d, lexicon)).collect()
}

pub fn compute_stats(corpus: &[AnnotatedDialogue]) -> Result<CorpusStats, CorpusError> {
    if corpus.is_empty() {
        return Err(CorpusError::EmptyCorpus);
    }
    let mut stats = CorpusStats {
        n_dialogues: corpus.len(),
        n_utterances: 0,
        avg_conversation_length: 0.0,
        avg_utterance_length: 0.0,
        n_give: 0,
        n_perform: 0,
        n_gain: 0,
        n_lose: 0,
        n_respond: 0,
    };
    let mut n_tokens = 0usize;
    for utt in corpus.iter().flat_map(|d| &d.turns) {
        stats.n_utterances += 1;
        n_tokens += tokenize(&utt.text).iter().filter(|t| !is_punct(t)).count();
        for el in utt.plan.elements() {
            *match el.ptype() {
                PlanType::Give => &mut stats.n_give,
                PlanType::Perform => &mut stats.n_perform,
                PlanType::Gain => &mut stats.n_gain,
                PlanType::Lose => &mut stats.n_lose,
                PlanType::Respond => &mut stats.n_respond,
            } += 1;
        }
    }
    stats.avg_conversation_length = stats.n_utterances as f64 / stats.n_dialogues as f64;
    if stats.n_utterances > 0 {
        stats.avg_utterance_length = n_tokens as f64 / stats.n_utterances as f64;
    }
    Ok(stats)
}

#[derive(Debug, Clone, PartialEq)]
pub struct Split<T> {
    pub train: Vec<T>,
    pub val: Vec<T>,
    pub test: Vec<T>,
}

/// Split sizes for `n` items: floored validation/test shares, remainder to train.
pub fn split_sizes(n: usize, ratios: (f64, f64, f64)) -> (usize, usize, usize) {
    let val = (n as f64 * ratios.1).floor() as usize;
    let test = (n as f64 * ratios.2).floor() as usize;
    (n - val - test, val, test)
}

/// Seeded dialogue-level split into (train, val, test). Items keep their
/// original relative order inside each part.
pub fn split_corpus<T: Clone>(items: &[T], ratios: (f64, f64, f64), seed: u64) -> Result<Split<T>, CorpusError> {
    let (a, b, c) = ratios;
    if [a, b, c].iter().any(|r| !(0.0..=1.0).contains(r)) || (a + b + c - 1.0).abs() > 1e-9 {
        return Err(CorpusError::InvalidRatios(ratios));
    }
    if items.len() < 3 {
        return Err(CorpusError::TooFewDialogues(items.len()));
    }
    let (n_train, n_val, _) = split_sizes(items.len(), ratios);
    let mut order: Vec<usize> = (0..items.len()).collect();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let pick = |idx: &[usize]| {
        let mut idx = idx.to_vec();
        idx.sort_unstable();
        idx.into_iter().map(|i| items[i].clone()).collect::<Vec<_>>()
    };
    Ok(Split {
        train: pick(&order[..n_train]),
        val: pick(&order[n_train..n_train + n_val]),
        test: pick(&order[n_train + n_val..]),
    })
}

/// One example per adjacent turn pair with different speakers.
pub fn build_examples(corpus: &[AnnotatedDialogue]) -> Vec<TrainingExample> {
    let mut out = Vec::new();
    for d in corpus {
        for (i, pair) in d.turns.windows(2).enumerate() {
            let (input, response) = (&pair[0], &pair[1]);
            if input.speaker == response.speaker {
                continue;
            }
            out.push(TrainingExample {
                dialogue_id: d.dialogue_id.clone(),
                turn_index: i,
                input_utterance: input.text.clone(),
                input_plan: input.plan.clone(),
                response_plan: response.plan.clone(),
                response_utterance: response.text.clone(),
            });
        }
    }
    out
}
