//! Line-oriented chat loop: each input line is planned and realized.

use std::fs::File;
use std::io::{BufRead, BufReader, IsTerminal, Write};

use askframe_core::corpus::{read_jsonl, TrainingExample};
use askframe_core::pipeline::{Config, PlannerChoice};
use askframe_core::planner::{ModelMetadata, PlannerKind, PlannerModel};
use askframe_core::realizer::{
    build_index, plan_adherence, realize_noplan, realize_retrieval, realize_template, RealizerKind, RetrievalIndex,
    TemplateSet,
};
use askframe_core::*;

use crate::Failure;

fn internal<E: std::fmt::Display>(e: E) -> Failure {
    Failure::Internal(e.to_string())
}

fn bad<E: std::fmt::Display>(what: &'static str) -> impl Fn(E) -> Failure {
    move |e| Failure::Usage(format!("{what}: {e}"))
}

/// Examples from `dataset` if given, else every example of `corpus`.
fn examples(config: &Config, lexicon: &Lexicon) -> Result<Vec<TrainingExample>, Failure> {
    if let Some(path) = &config.dataset {
        let file = File::open(path).map_err(bad("dataset"))?;
        return read_jsonl(BufReader::new(file)).map_err(bad("dataset"));
    }
    let path = config
        .corpus
        .as_ref()
        .ok_or_else(|| Failure::Usage("chat needs a dataset or corpus to retrieve responses from".into()))?;
    let dialogues = load_corpus(path, config.format).map_err(bad("corpus"))?;
    Ok(build_examples(&annotate_corpus(&dialogues, lexicon)))
}

fn planner(config: &Config, examples: &[TrainingExample], lexicon: &Lexicon) -> Result<Option<PlannerModel>, Failure> {
    if let Some(path) = &config.model {
        return load_model(path).map(Some).map_err(bad("model"));
    }
    let metadata = ModelMetadata {
        corpus_tag: config.corpus_tag.clone(),
        lexicon_hash: lexicon.content_hash(),
        created_at: None,
        n_examples: examples.len(),
    };
    let model = match config.planner {
        PlannerChoice::Symbolic => return Ok(None),
        PlannerChoice::Type => {
            PlannerKind::TypeTransition(train_type_planner(examples, lexicon).map_err(bad("train"))?)
        }
        PlannerChoice::Ngram => PlannerKind::Ngram {
            ngram: train_ngram_planner(examples, config.order, lexicon).map_err(bad("train"))?,
            fallback: Some(train_type_planner(examples, lexicon).map_err(bad("train"))?),
        },
    };
    Ok(Some(PlannerModel { metadata, model }))
}

struct Session {
    lexicon: Lexicon,
    templates: TemplateSet,
    index: RetrievalIndex,
    model: Option<PlannerModel>,
}

impl Session {
    fn reply(&self, config: &Config, seed: u64, line: &str) -> (Plan, Plan, String, f64) {
        let input_plan = extract_plan(line, &self.lexicon);
        let plan = match &self.model {
            Some(m) => {
                let mut params = config.sampling;
                params.seed = seed;
                m.generate(line, &input_plan, &params).plan
            }
            // the symbolic planner plans its own reply from the nearest
            // training response
            None => extract_plan(realize_noplan(&self.index, line), &self.lexicon),
        };
        let response = match config.realizer {
            RealizerKind::Template => realize_template(&plan, &self.templates, &self.lexicon),
            _ => realize_retrieval(&self.index, line, &plan, &config.weights).to_string(),
        };
        let adherence = plan_adherence(&plan, &response, &self.lexicon);
        (input_plan, plan, response, adherence)
    }
}

pub fn run(config: &Config, input: impl BufRead, mut out: impl Write) -> Result<(), Failure> {
    let lexicon = config.load_lexicon().map_err(bad("lexicon"))?;
    let templates = config.load_templates().map_err(bad("templates"))?;
    let examples = examples(config, &lexicon)?;
    let index = build_index(&examples, &lexicon).map_err(bad("dataset"))?;
    let model = planner(config, &examples, &lexicon)?;
    let session = Session {
        lexicon,
        templates,
        index,
        model,
    };
    let interactive = std::io::stdin().is_terminal();
    let mut seed = config.sampling.seed;
    let mut lines = input.lines();
    loop {
        if interactive {
            write!(out, "> ").map_err(internal)?;
            out.flush().map_err(internal)?;
        }
        let Some(line) = lines.next() else { break };
        let line = line.map_err(internal)?;
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        if line == "/quit" {
            break;
        }
        if let Some(arg) = line.strip_prefix("/seed") {
            match arg.trim().parse::<u64>() {
                Ok(s) => {
                    seed = s;
                    writeln!(out, "seed {seed}").map_err(internal)?;
                }
                Err(_) => writeln!(out, "usage: /seed N").map_err(internal)?,
            }
            continue;
        }
        let (input_plan, plan, response, adherence) = session.reply(config, seed, line);
        writeln!(out, "input plan:    {input_plan}").map_err(internal)?;
        writeln!(out, "response plan: {plan}").map_err(internal)?;
        writeln!(out, "response:      {response}").map_err(internal)?;
        writeln!(out, "adherence:     {adherence:.3}").map_err(internal)?;
        seed = seed.wrapping_add(1);
    }
    Ok(())
}
