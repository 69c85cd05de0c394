//! Golden values for the bundled mini corpus, counted by hand.

use std::path::PathBuf;

use askframe_core::corpus::{read_jsonl, write_jsonl};
use askframe_core::realizer::{build_index, plan_adherence, realize_noplan, realize_retrieval, realize_template};
use askframe_core::realizer::{RealizationWeights, TemplateSet};
use askframe_core::*;

fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("tests/fixtures")
        .join(name)
}

fn mini() -> Vec<AnnotatedDialogue> {
    let d = load_corpus(fixture("mini_corpus.jsonl"), CorpusFormat::Jsonl).unwrap();
    annotate_corpus(&d, &Lexicon::default())
}

#[test]
fn loads_three_dialogues_fourteen_turns() {
    let d = load_corpus(fixture("mini_corpus.jsonl"), CorpusFormat::Jsonl).unwrap();
    assert_eq!(d.len(), 3);
    assert_eq!(d.iter().map(|d| d.turns.len()).sum::<usize>(), 14);
}

#[test]
fn stats_match_hand_count() {
    // 121 non-punctuation tokens over 14 utterances; element counts read off
    // the annotated golden file
    let s = compute_stats(&mini()).unwrap();
    assert_eq!(s.n_dialogues, 3);
    assert_eq!(s.n_utterances, 14);
    assert_eq!(s.avg_conversation_length, 14.0 / 3.0);
    assert_eq!(s.avg_utterance_length, 121.0 / 14.0);
    assert_eq!(
        (s.n_give, s.n_perform, s.n_gain, s.n_lose, s.n_respond),
        (6, 3, 3, 1, 3)
    );
    let golden: CorpusStats =
        serde_json::from_str(&std::fs::read_to_string(fixture("mini_stats.golden.json")).unwrap()).unwrap();
    assert_eq!(s, golden);
}

#[test]
fn annotation_matches_golden_file() {
    let mut out = Vec::new();
    write_jsonl(&mut out, &mini()).unwrap();
    let golden = std::fs::read_to_string(fixture("mini_annotated.golden.jsonl")).unwrap();
    assert_eq!(String::from_utf8(out).unwrap(), golden);
    assert!(mini().iter().flat_map(|d| &d.turns).all(|t| !t.plan.is_empty()));
}

#[test]
fn examples_match_golden_file() {
    let examples = build_examples(&mini());
    // sum of (turns - 1) = 4 + 4 + 3
    assert_eq!(examples.len(), 11);
    let golden: Vec<TrainingExample> = read_jsonl(std::io::BufReader::new(
        std::fs::File::open(fixture("mini_examples.golden.jsonl")).unwrap(),
    ))
    .unwrap();
    assert_eq!(examples, golden);
}

#[test]
fn index_stats_and_noplan_query() {
    let lex = Lexicon::default();
    let index = build_index(&build_examples(&mini()), &lex).unwrap();
    assert_eq!(index.len(), 11);
    assert_eq!(index.vocabulary_size(), 48);
    // hand-scored: tf-idf cosine 0.92 (bank turn) beats 0.87 (locked turn)
    // and 0.76 (website turn)
    assert_eq!(
        realize_noplan(&index, "Could you check my account?"),
        "Why do you need my account number?"
    );
    let plan = parse_plan("GIVE [give [my name]]").unwrap();
    let w = RealizationWeights::new(0.0, 1.0).unwrap();
    assert_eq!(
        realize_retrieval(&index, "Could you check my account?", &plan, &w),
        realize_noplan(&index, "Could you check my account?")
    );
}

#[test]
fn template_realization() {
    let lex = Lexicon::default();
    let plan = parse_plan("PERFORM [check out [the website]]").unwrap();
    let text = realize_template(&plan, &TemplateSet::default(), &lex);
    assert_eq!(text, "Please check out the website.");
    assert_eq!(plan_adherence(&plan, &text, &lex), 1.0);
}

#[test]
fn motivating_sentence() {
    let plan = extract_plan(
        "If you check out the website, you can gather a lot more information.",
        &Lexicon::default(),
    );
    assert_eq!(
        plan.to_string(),
        "PERFORM [check out [the website]] ; GAIN [gather [a lot more information]]"
    );
}
