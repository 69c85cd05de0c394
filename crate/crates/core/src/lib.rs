//! Ask-and-framing response planning for dialogue.
//!
//! Utterances are annotated with plans (`GIVE`, `PERFORM`, `GAIN`, `LOSE`,
//! `RESPOND`) by a rule-based extractor, learned planners predict the plan
//! of the next turn, and a realizer turns a plan into a response.

pub mod corpus;
pub mod lexicon;
pub mod metrics;
pub mod pipeline;
pub mod plan;
pub mod planner;
pub mod realizer;
pub mod symbolic;
pub mod synthetic;
pub mod text;

pub use corpus::{
    annotate_corpus, annotate_dialogue, build_examples, compute_stats, load_corpus, split_corpus, AnnotatedDialogue,
    AnnotatedUtterance, CorpusError, CorpusFormat, CorpusStats, Dialogue, TrainingExample, Utterance,
};
pub use lexicon::{Lexicon, LexiconError};
pub use plan::{parse_plan, plan_similarity, serialize_plan, Plan, PlanElement, PlanError, PlanType};
pub use planner::{
    generate_plan, load_model, save_model, train_ngram_planner, train_type_planner, PlannerError, PlannerKind,
    PlannerModel, SamplingParams,
};
pub use symbolic::extract_plan;
