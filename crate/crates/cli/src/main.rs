mod chat;

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use askframe_core::corpus::{read_annotated_jsonl, read_jsonl, write_jsonl, TrainingExample};
use askframe_core::metrics::{evaluate_system, EvalOptions, VectorTable};
use askframe_core::pipeline::{run_pipeline, Config, PlannerChoice, CONFIG_KEYS};
use askframe_core::planner::{ModelMetadata, PlannerKind, PlannerModel, SamplingParams};
use askframe_core::realizer::{
    build_index, plan_adherence, realize_noplan, realize_retrieval, realize_template, RealizationWeights, RealizerKind,
    TemplateSet,
};
use askframe_core::synthetic::{generate_synthetic, SyntheticConfig};
use askframe_core::text::tokenize;
use askframe_core::*;

/// Failure classes mapped to process exit codes.
enum Failure {
    /// Bad input, bad flags, unreadable files.
    Usage(String),
    /// A broken internal invariant.
    Internal(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Usage(_) => 2,
            Failure::Internal(_) => 3,
        }
    }
}

type CmdResult = Result<(), Failure>;

fn usage<E: std::fmt::Display>(context: impl std::fmt::Display) -> impl FnOnce(E) -> Failure {
    move |e| Failure::Usage(format!("{context}: {e}"))
}

#[derive(Parser)]
#[command(name = "askframe", version, about = "Ask/framing response planning for dialogue")]
struct Cli {
    /// Shape of standard output.
    #[arg(long, value_enum, global = true, default_value_t = OutputFormat::Text)]
    format: OutputFormat,

    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum OutputFormat {
    Text,
    Json,
}

#[derive(Args, Clone)]
struct CorpusArgs {
    /// Dialogue corpus file.
    #[arg(long)]
    corpus: PathBuf,
    /// jsonl (one dialogue per line) or csv2col (dialogue_id,speaker,text).
    #[arg(long, default_value = "jsonl")]
    input_format: CorpusFormat,
    #[arg(long)]
    lexicon: Option<PathBuf>,
}

#[derive(Args, Clone)]
struct SamplingArgs {
    #[arg(long, default_value_t = 0.9)]
    top_p: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 32)]
    max_tokens: usize,
    #[arg(long, default_value_t = 3)]
    retries: usize,
}

impl SamplingArgs {
    fn params(&self) -> Result<SamplingParams, Failure> {
        let p = SamplingParams {
            top_p: self.top_p,
            max_tokens: self.max_tokens,
            retries: self.retries,
            seed: self.seed,
        };
        p.validate().map_err(usage("sampling"))?;
        Ok(p)
    }
}

#[derive(Subcommand)]
enum Command {
    /// Attach a symbolic plan to every utterance.
    Annotate {
        #[command(flatten)]
        corpus: CorpusArgs,
        #[arg(long)]
        out: PathBuf,
    },
    /// Corpus statistics: sizes, lengths and plan element counts.
    Stats {
        #[command(flatten)]
        corpus: CorpusArgs,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Seeded dialogue-level train/val/test split.
    Split {
        #[command(flatten)]
        corpus: CorpusArgs,
        #[arg(long, default_value = "0.8,0.1,0.1")]
        ratios: String,
        #[arg(long, default_value_t = 42)]
        seed: u64,
        #[arg(long)]
        out_dir: PathBuf,
    },
    /// Turn an annotated corpus into (input, response) training examples.
    BuildDataset {
        /// Output of `annotate`.
        #[arg(long)]
        annotated: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Train a learned planner on a dataset.
    Train {
        #[arg(long)]
        dataset: PathBuf,
        #[arg(long, default_value = "ngram")]
        planner: PlannerChoice,
        #[arg(long, default_value_t = 3)]
        order: usize,
        #[arg(long, default_value = "corpus")]
        corpus_tag: String,
        /// Pin the recorded creation time (unix seconds); unset keeps files reproducible.
        #[arg(long)]
        created_at: Option<u64>,
        #[arg(long)]
        lexicon: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Produce a response plan for one input utterance.
    Plan {
        #[arg(long, default_value = "ngram")]
        planner: PlannerChoice,
        #[arg(long)]
        model: Option<PathBuf>,
        #[arg(long)]
        input: String,
        /// Plan of the input; extracted symbolically when omitted.
        #[arg(long)]
        input_plan: Option<String>,
        #[arg(long)]
        lexicon: Option<PathBuf>,
        #[command(flatten)]
        sampling: SamplingArgs,
    },
    /// Realize a response from an input and a plan.
    Realize {
        #[arg(long, default_value = "retrieval")]
        realizer: RealizerKind,
        #[arg(long)]
        input: String,
        #[arg(long)]
        plan: Option<String>,
        /// Training examples to index (retrieval and noplan).
        #[arg(long)]
        dataset: Option<PathBuf>,
        #[arg(long)]
        templates: Option<PathBuf>,
        #[arg(long)]
        lexicon: Option<PathBuf>,
        #[arg(long, default_value_t = 0.7)]
        w_plan: f64,
        #[arg(long, default_value_t = 0.3)]
        w_input: f64,
    },
    /// Score line-aligned hypotheses against references (tab separates
    /// multiple references on one line).
    Evaluate {
        #[arg(long)]
        hyp: PathBuf,
        #[arg(long = "ref", value_name = "FILE")]
        reference: PathBuf,
        #[arg(long)]
        vectors: Option<PathBuf>,
        /// Split on whitespace only instead of the word tokenizer.
        #[arg(long)]
        whitespace: bool,
    },
    /// Full run from a config file; flags override file values.
    Pipeline {
        #[arg(long)]
        config: Option<PathBuf>,
        /// key=value override, repeatable.
        #[arg(long = "set", value_name = "KEY=VALUE")]
        overrides: Vec<String>,
    },
    /// Interactive loop: plan and realize a reply to each typed line.
    Chat {
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long = "set", value_name = "KEY=VALUE")]
        overrides: Vec<String>,
    },
    /// Write a seeded plan-correlated toy corpus.
    Synthetic {
        #[arg(long, default_value_t = 300)]
        dialogues: usize,
        #[arg(long, default_value_t = 7)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
}

fn load_lexicon(path: &Option<PathBuf>) -> Result<Lexicon, Failure> {
    match path {
        Some(p) => Lexicon::load(p).map_err(usage(p.display())),
        None => Ok(Lexicon::default()),
    }
}

fn create(path: &Path) -> Result<BufWriter<File>, Failure> {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        std::fs::create_dir_all(parent).map_err(usage(parent.display()))?;
    }
    File::create(path).map(BufWriter::new).map_err(usage(path.display()))
}

fn write_lines<T: serde::Serialize>(path: &Path, items: &[T]) -> CmdResult {
    let mut w = create(path)?;
    write_jsonl(&mut w, items).map_err(usage(path.display()))?;
    w.flush().map_err(usage(path.display()))
}

fn read_examples(path: &Path) -> Result<Vec<TrainingExample>, Failure> {
    let file = File::open(path).map_err(usage(path.display()))?;
    read_jsonl(BufReader::new(file)).map_err(usage(path.display()))
}

fn emit_json<T: serde::Serialize>(value: &T) -> CmdResult {
    let text = serde_json::to_string_pretty(value).map_err(|e| Failure::Internal(e.to_string()))?;
    println!("{text}");
    Ok(())
}

fn parse_ratios(text: &str) -> Result<(f64, f64, f64), Failure> {
    let parts: Vec<f64> = text
        .split(',')
        .map(|p| p.trim().parse::<f64>())
        .collect::<Result<_, _>>()
        .map_err(usage("--ratios"))?;
    match parts[..] {
        [a, b, c] => Ok((a, b, c)),
        _ => Err(Failure::Usage(
            "--ratios: expected three comma-separated numbers".into(),
        )),
    }
}

fn config_with_overrides(path: &Option<PathBuf>, overrides: &[String]) -> Result<Config, Failure> {
    let mut config = match path {
        Some(p) => Config::load(p).map_err(usage(p.display()))?,
        None => Config::default(),
    };
    for item in overrides {
        let (key, value) = item.split_once('=').ok_or_else(|| {
            Failure::Usage(format!(
                "--set {item:?}: expected KEY=VALUE (keys: {})",
                CONFIG_KEYS.join(", ")
            ))
        })?;
        config.set(key.trim(), value.trim()).map_err(usage("--set"))?;
    }
    config.validate().map_err(usage("config"))?;
    Ok(config)
}

fn run(cli: Cli) -> CmdResult {
    let json = cli.format == OutputFormat::Json;
    match cli.command {
        Command::Annotate { corpus, out } => {
            let lexicon = load_lexicon(&corpus.lexicon)?;
            let dialogues = load_corpus(&corpus.corpus, corpus.input_format).map_err(usage(corpus.corpus.display()))?;
            let annotated = annotate_corpus(&dialogues, &lexicon);
            write_lines(&out, &annotated)?;
            let stats = compute_stats(&annotated).map_err(usage("stats"))?;
            if json {
                emit_json(&stats)?;
            } else {
                for t in PlanType::ALL {
                    println!("{t}\t{}", stats.count(t));
                }
            }
        }
        Command::Stats { corpus, out } => {
            let lexicon = load_lexicon(&corpus.lexicon)?;
            let dialogues = load_corpus(&corpus.corpus, corpus.input_format).map_err(usage(corpus.corpus.display()))?;
            let stats = compute_stats(&annotate_corpus(&dialogues, &lexicon)).map_err(usage("stats"))?;
            let text = serde_json::to_string_pretty(&stats).map_err(|e| Failure::Internal(e.to_string()))?;
            match out {
                Some(p) => std::fs::write(&p, text + "\n").map_err(usage(p.display()))?,
                None if json => println!("{text}"),
                None => {
                    println!("dialogues\t{}", stats.n_dialogues);
                    println!("utterances\t{}", stats.n_utterances);
                    println!("avg_conversation_length\t{:.2}", stats.avg_conversation_length);
                    println!("avg_utterance_length\t{:.2}", stats.avg_utterance_length);
                    for t in PlanType::ALL {
                        println!("{t}\t{}", stats.count(t));
                    }
                }
            }
        }
        Command::Split {
            corpus,
            ratios,
            seed,
            out_dir,
        } => {
            let dialogues = load_corpus(&corpus.corpus, corpus.input_format).map_err(usage(corpus.corpus.display()))?;
            let split = corpus::split_corpus(&dialogues, parse_ratios(&ratios)?, seed).map_err(usage("split"))?;
            for (name, part) in [("train", &split.train), ("val", &split.val), ("test", &split.test)] {
                write_lines(&out_dir.join(format!("{name}.jsonl")), part)?;
                if !json {
                    println!("{name}\t{}", part.len());
                }
            }
            if json {
                emit_json(&serde_json::json!({
                    "train": split.train.len(), "val": split.val.len(), "test": split.test.len()
                }))?;
            }
        }
        Command::BuildDataset { annotated, out } => {
            let file = File::open(&annotated).map_err(usage(annotated.display()))?;
            let corpus = read_annotated_jsonl(BufReader::new(file)).map_err(usage(annotated.display()))?;
            let examples = build_examples(&corpus);
            write_lines(&out, &examples)?;
            if json {
                emit_json(&serde_json::json!({ "examples": examples.len() }))?;
            } else {
                println!("examples\t{}", examples.len());
            }
        }
        Command::Train {
            dataset,
            planner,
            order,
            corpus_tag,
            created_at,
            lexicon,
            out,
        } => {
            let lexicon = load_lexicon(&lexicon)?;
            let examples = read_examples(&dataset)?;
            let metadata = ModelMetadata {
                corpus_tag,
                lexicon_hash: lexicon.content_hash(),
                created_at,
                n_examples: examples.len(),
            };
            let fallback = train_type_planner(&examples, &lexicon).map_err(usage("train"))?;
            let (model, summary) = match planner {
                PlannerChoice::Type => {
                    let summary = serde_json::json!({
                        "planner": "type",
                        "examples": examples.len(),
                        "input_type_sequences": fallback.type_seq_probs.len(),
                        "response_type_sequences": fallback.response_vocabulary.len(),
                    });
                    (PlannerKind::TypeTransition(fallback), summary)
                }
                PlannerChoice::Ngram => {
                    let ngram = train_ngram_planner(&examples, order, &lexicon).map_err(usage("train"))?;
                    let summary = serde_json::json!({
                        "planner": "ngram",
                        "examples": examples.len(),
                        "order": order,
                        "vocabulary_size": ngram.vocabulary_size(),
                        "context_count": ngram.context_count(),
                    });
                    (
                        PlannerKind::Ngram {
                            ngram,
                            fallback: Some(fallback),
                        },
                        summary,
                    )
                }
                PlannerChoice::Symbolic => {
                    return Err(Failure::Usage("the symbolic planner has nothing to train".into()))
                }
            };
            save_model(&PlannerModel { metadata, model }, &out).map_err(usage(out.display()))?;
            if json {
                emit_json(&summary)?;
            } else {
                for (k, v) in summary.as_object().expect("summary is an object") {
                    println!("{k}\t{}", v.as_str().map(String::from).unwrap_or_else(|| v.to_string()));
                }
            }
        }
        Command::Plan {
            planner,
            model,
            input,
            input_plan,
            lexicon,
            sampling,
        } => {
            let lexicon = load_lexicon(&lexicon)?;
            let plan = match planner {
                PlannerChoice::Symbolic => extract_plan(&input, &lexicon),
                _ => {
                    let path =
                        model.ok_or_else(|| Failure::Usage("--model is required for learned planners".into()))?;
                    let model = load_model(&path).map_err(usage(path.display()))?;
                    let input_plan = match input_plan {
                        Some(p) => parse_plan(&p).map_err(usage("--input-plan"))?,
                        None => extract_plan(&input, &lexicon),
                    };
                    let g = model.generate(&input, &input_plan, &sampling.params()?);
                    if g.used_fallback {
                        eprintln!(
                            "note: n-gram output was malformed after {} attempts; used fallback",
                            g.attempts
                        );
                    }
                    g.plan
                }
            };
            if parse_plan(&plan.to_string()).as_ref() != Ok(&plan) {
                return Err(Failure::Internal(format!("generated plan does not round-trip: {plan}")));
            }
            if json {
                emit_json(&serde_json::json!({ "plan": plan.to_string() }))?;
            } else {
                println!("{plan}");
            }
        }
        Command::Realize {
            realizer,
            input,
            plan,
            dataset,
            templates,
            lexicon,
            w_plan,
            w_input,
        } => {
            let lexicon = load_lexicon(&lexicon)?;
            let plan = plan.map(|p| parse_plan(&p).map_err(usage("--plan"))).transpose()?;
            let index = || -> Result<_, Failure> {
                let path = dataset.as_ref().ok_or_else(|| {
                    Failure::Usage(format!("--dataset is required for the {} realizer", realizer.name()))
                })?;
                build_index(&read_examples(path)?, &lexicon).map_err(usage(path.display()))
            };
            let response = match realizer {
                RealizerKind::Template => {
                    let templates = match &templates {
                        Some(p) => TemplateSet::load(p).map_err(usage(p.display()))?,
                        None => TemplateSet::default(),
                    };
                    let plan = plan
                        .as_ref()
                        .ok_or_else(|| Failure::Usage("--plan is required for the template realizer".into()))?;
                    realize_template(plan, &templates, &lexicon)
                }
                RealizerKind::Retrieval => {
                    let plan = plan
                        .as_ref()
                        .ok_or_else(|| Failure::Usage("--plan is required for the retrieval realizer".into()))?;
                    let weights = RealizationWeights::new(w_plan, w_input).map_err(usage("weights"))?;
                    realize_retrieval(&index()?, &input, plan, &weights).to_string()
                }
                RealizerKind::Noplan => realize_noplan(&index()?, &input).to_string(),
            };
            let adherence = plan.as_ref().map(|p| plan_adherence(p, &response, &lexicon));
            if json {
                emit_json(&serde_json::json!({ "response": response, "adherence": adherence }))?;
            } else {
                println!("{response}");
                if let Some(a) = adherence {
                    println!("adherence\t{a:.4}");
                }
            }
        }
        Command::Evaluate {
            hyp,
            reference,
            vectors,
            whitespace,
        } => {
            let split = |s: &str| -> Vec<String> {
                if whitespace {
                    s.split_whitespace().map(String::from).collect()
                } else {
                    tokenize(s)
                }
            };
            let read = |p: &Path| -> Result<Vec<String>, Failure> {
                let file = File::open(p).map_err(usage(p.display()))?;
                BufReader::new(file)
                    .lines()
                    .collect::<Result<_, _>>()
                    .map_err(usage(p.display()))
            };
            let hyps: Vec<Vec<String>> = read(&hyp)?.iter().map(|l| split(l)).collect();
            let refs: Vec<Vec<Vec<String>>> = read(&reference)?
                .iter()
                .map(|l| l.split('\t').map(split).collect())
                .collect();
            let table = match &vectors {
                Some(p) => Some(VectorTable::load(p).map_err(usage(p.display()))?),
                None => None,
            };
            let report = evaluate_system(
                &hyps,
                &refs,
                &EvalOptions {
                    vectors: table.as_ref(),
                },
            )
            .map_err(usage("evaluate"))?;
            emit_json(&report)?;
        }
        Command::Pipeline { config, overrides } => {
            let config = config_with_overrides(&config, &overrides)?;
            let run = run_pipeline(&config).map_err(|e| Failure::Usage(e.to_string()))?;
            if json {
                emit_json(&run.report)?;
            } else {
                println!("run\t{}", run.run_id);
                println!("report\t{}", run.output_dir.join("report.json").display());
                println!(
                    "evaluated_on\t{} ({} examples)",
                    run.report.evaluated_on, run.report.n_eval_examples
                );
                println!(
                    "{:<10}{:>10}{:>10}{:>10}{:>10}{:>10}",
                    "row", "adherence", "bleu_1", "bleu_4", "distinct", "length"
                );
                for r in &run.report.rows {
                    println!(
                        "{:<10}{:>10.4}{:>10.4}{:>10.4}{:>10.4}{:>10.2}",
                        r.name,
                        r.plan_adherence,
                        r.metrics.bleu_1,
                        r.metrics.bleu_4,
                        r.metrics.distinct_1,
                        r.metrics.mean_length
                    );
                }
            }
        }
        Command::Chat { config, overrides } => {
            let config = config_with_overrides(&config, &overrides)?;
            let stdin = std::io::stdin();
            chat::run(&config, stdin.lock(), std::io::stdout().lock())?;
        }
        Command::Synthetic { dialogues, seed, out } => {
            let corpus = generate_synthetic(&SyntheticConfig {
                n_dialogues: dialogues,
                seed,
            });
            write_lines(&out, &corpus)?;
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = std::panic::catch_unwind(|| run(cli)).unwrap_or_else(|payload| {
        let msg = payload
            .downcast_ref::<String>()
            .cloned()
            .or_else(|| payload.downcast_ref::<&str>().map(|s| s.to_string()))
            .unwrap_or_else(|| "panic".into());
        Err(Failure::Internal(msg))
    });
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            match &f {
                Failure::Usage(m) => eprintln!("error: {m}"),
                Failure::Internal(m) => eprintln!("internal error: {m}"),
            }
            ExitCode::from(f.code())
        }
    }
}
