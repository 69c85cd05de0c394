#[allow(dead_code)]
#[path = "../../core/tests/common/oracles.rs"]
mod oracles;

use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::{Command, Output, Stdio};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_askframe"))
}

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("../core/tests/fixtures")
        .join(name)
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("spawn askframe")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

#[test]
fn symbolic_plan_of_the_motivating_sentence() {
    let o = run(&[
        "plan",
        "--planner",
        "symbolic",
        "--input",
        "Please check out the website to protect your account.",
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert_eq!(
        stdout(&o).trim(),
        "PERFORM [check out [the website to protect your account]] ; GAIN [protect [your account]]"
    );
}

#[test]
fn symbolic_plan_of_the_conditional_gain_sentence() {
    let o = run(&[
        "plan",
        "--planner",
        "symbolic",
        "--input",
        "If you check out the website, you can gather a lot more information.",
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert_eq!(
        stdout(&o).trim(),
        "PERFORM [check out [the website]] ; GAIN [gather [a lot more information]]"
    );
}

#[test]
fn malformed_jsonl_names_the_line() {
    let dir = tempfile::tempdir().unwrap();
    let good = std::fs::read_to_string(fixture("mini_corpus.jsonl")).unwrap();
    let first = good.lines().next().unwrap();
    let mut text = String::new();
    for _ in 0..6 {
        text.push_str(first);
        text.push('\n');
    }
    text.push_str("{\"dialogue_id\": \"broken\", \"turns\": [\n");
    let corpus = dir.path().join("bad.jsonl");
    std::fs::write(&corpus, text).unwrap();
    let o = run(&[
        "annotate",
        "--corpus",
        p(&corpus),
        "--out",
        p(&dir.path().join("a.jsonl")),
    ]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("line 7"), "{}", stderr(&o));
}

#[test]
fn annotate_prints_type_counts() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("annotated.jsonl");
    let o = run(&[
        "annotate",
        "--corpus",
        p(&fixture("mini_corpus.jsonl")),
        "--out",
        p(&out),
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert_eq!(stdout(&o), "GIVE\t6\nPERFORM\t3\nGAIN\t3\nLOSE\t1\nRESPOND\t3\n");
    assert_eq!(
        std::fs::read_to_string(out).unwrap(),
        std::fs::read_to_string(fixture("mini_annotated.golden.jsonl")).unwrap()
    );
}

#[test]
fn evaluate_identical_files() {
    let dir = tempfile::tempdir().unwrap();
    let f = dir.path().join("lines.txt");
    std::fs::write(&f, "the cat sat on the mat\na dog ran in the park\n").unwrap();
    let o = run(&["evaluate", "--hyp", p(&f), "--ref", p(&f)]);
    assert!(o.status.success(), "{}", stderr(&o));
    let report: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(report["bleu_1"], 1.0);
    assert_eq!(report["rouge_l"], 1.0);
}

#[test]
fn evaluate_fixture_pairs_match_the_oracles() {
    let dir = tempfile::tempdir().unwrap();
    let text = std::fs::read_to_string(fixture("metric_pairs.tsv")).unwrap();
    let rows: Vec<&str> = text
        .lines()
        .filter(|l| !l.starts_with('#') && !l.trim().is_empty())
        .collect();
    let (mut hyp, mut refs) = (String::new(), String::new());
    for row in &rows {
        let (h, r) = row.split_once('\t').unwrap();
        hyp.push_str(h);
        hyp.push('\n');
        refs.push_str(r);
        refs.push('\n');
    }
    let (h, r) = (dir.path().join("hyp.txt"), dir.path().join("ref.txt"));
    std::fs::write(&h, hyp).unwrap();
    std::fs::write(&r, refs).unwrap();
    let o = run(&[
        "evaluate",
        "--whitespace",
        "--hyp",
        p(&h),
        "--ref",
        p(&r),
        "--vectors",
        p(&fixture("toy_vectors.txt")),
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let report: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();

    let split = |s: &str| s.split_whitespace().map(String::from).collect::<Vec<_>>();
    let pairs: Vec<oracles::Pair> = rows
        .iter()
        .map(|row| {
            let mut cols = row.split('\t');
            let hyp = split(cols.next().unwrap());
            (hyp, cols.map(split).collect())
        })
        .collect();
    let hyps: Vec<Vec<String>> = pairs.iter().map(|p| p.0.clone()).collect();
    let expected = [
        ("bleu_1", oracles::bleu(&pairs, 1)),
        ("bleu_2", oracles::bleu(&pairs, 2)),
        ("bleu_3", oracles::bleu(&pairs, 3)),
        ("bleu_4", oracles::bleu(&pairs, 4)),
        ("rouge_l", oracles::rouge_l(&pairs, 1.2)),
        ("meteor_lite", oracles::meteor(&pairs)),
        ("cider", oracles::cider(&pairs)),
        ("distinct_1", oracles::distinct_1(&hyps)),
    ];
    for (key, want) in expected {
        let got = report[key].as_f64().unwrap();
        assert!((got - want).abs() < 1e-9, "{key}: {got} vs {want}");
    }
    assert!(report["embedding_f1"].is_f64());
}

#[test]
fn evaluate_length_mismatch_is_a_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let h = dir.path().join("h.txt");
    let r = dir.path().join("r.txt");
    std::fs::write(&h, "a\nb\n").unwrap();
    std::fs::write(&r, "a\n").unwrap();
    let o = run(&["evaluate", "--hyp", p(&h), "--ref", p(&r)]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("differ in length"));
}

#[test]
fn split_is_seeded() {
    let dir = tempfile::tempdir().unwrap();
    let corpus = dir.path().join("syn.jsonl");
    assert!(run(&["synthetic", "--dialogues", "50", "--out", p(&corpus)])
        .status
        .success());
    let split = |name: &str, seed: &str| {
        let out = dir.path().join(name);
        let o = run(&["split", "--corpus", p(&corpus), "--seed", seed, "--out-dir", p(&out)]);
        assert!(o.status.success(), "{}", stderr(&o));
        assert_eq!(stdout(&o), "train\t40\nval\t5\ntest\t5\n");
        std::fs::read(out.join("train.jsonl")).unwrap()
    };
    assert_eq!(split("a", "9"), split("b", "9"));
    assert_ne!(split("a", "9"), split("c", "10"));
}

#[test]
fn train_rejects_an_empty_dataset() {
    let dir = tempfile::tempdir().unwrap();
    let empty = dir.path().join("empty.jsonl");
    std::fs::write(&empty, "").unwrap();
    let o = run(&["train", "--dataset", p(&empty), "--out", p(&dir.path().join("m"))]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn retraining_reproduces_the_model_file() {
    let dir = tempfile::tempdir().unwrap();
    let dataset = fixture("mini_examples.golden.jsonl");
    let a = dir.path().join("a.model");
    let b = dir.path().join("b.model");
    for out in [&a, &b] {
        let o = run(&["train", "--dataset", p(&dataset), "--planner", "ngram", "--out", p(out)]);
        assert!(o.status.success(), "{}", stderr(&o));
    }
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());

    let plan = |seed: &str| {
        let o = run(&[
            "plan",
            "--model",
            p(&a),
            "--input",
            "Could you give me your name?",
            "--seed",
            seed,
        ]);
        assert!(o.status.success(), "{}", stderr(&o));
        stdout(&o)
    };
    assert_eq!(plan("4"), plan("4"));
}

#[test]
fn corrupted_model_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let m = dir.path().join("m.model");
    let o = run(&[
        "train",
        "--dataset",
        p(&fixture("mini_examples.golden.jsonl")),
        "--out",
        p(&m),
    ]);
    assert!(o.status.success());
    let mut bytes = std::fs::read(&m).unwrap();
    let last = bytes.len() - 2;
    bytes[last] ^= 0x01;
    std::fs::write(&m, bytes).unwrap();
    let o = run(&["plan", "--model", p(&m), "--input", "hello"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn template_realization() {
    let o = run(&[
        "realize",
        "--realizer",
        "template",
        "--input",
        "anything",
        "--plan",
        "PERFORM [check out [the website]]",
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert_eq!(stdout(&o), "Please check out the website.\nadherence\t1.0000\n");
}

#[test]
fn noplan_realization_retrieves_by_input() {
    let o = run(&[
        "realize",
        "--realizer",
        "noplan",
        "--input",
        "Could you check my account?",
        "--dataset",
        p(&fixture("mini_examples.golden.jsonl")),
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert_eq!(stdout(&o).trim(), "Why do you need my account number?");
}

#[test]
fn retrieval_without_plan_weight_equals_noplan() {
    let dataset = fixture("mini_examples.golden.jsonl");
    let query = "Could you check my account?";
    let noplan = run(&[
        "realize",
        "--realizer",
        "noplan",
        "--input",
        query,
        "--dataset",
        p(&dataset),
    ]);
    let retrieval = run(&[
        "realize",
        "--realizer",
        "retrieval",
        "--input",
        query,
        "--plan",
        "GIVE [give [my name]]",
        "--w-plan",
        "0",
        "--w-input",
        "1",
        "--dataset",
        p(&dataset),
    ]);
    assert!(retrieval.status.success(), "{}", stderr(&retrieval));
    assert_eq!(stdout(&retrieval).lines().next(), stdout(&noplan).lines().next());
}

#[test]
fn stats_and_dataset_match_the_goldens() {
    let dir = tempfile::tempdir().unwrap();
    let stats = dir.path().join("stats.json");
    let o = run(&[
        "stats",
        "--corpus",
        p(&fixture("mini_corpus.jsonl")),
        "--out",
        p(&stats),
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let got: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(stats).unwrap()).unwrap();
    let want: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(fixture("mini_stats.golden.json")).unwrap()).unwrap();
    assert_eq!(got, want);

    let examples = dir.path().join("examples.jsonl");
    let o = run(&[
        "build-dataset",
        "--annotated",
        p(&fixture("mini_annotated.golden.jsonl")),
        "--out",
        p(&examples),
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    // turns 5 + 5 + 4, one example per turn after the first
    assert_eq!(stdout(&o), "examples\t11\n");
    assert_eq!(
        std::fs::read_to_string(examples).unwrap(),
        std::fs::read_to_string(fixture("mini_examples.golden.jsonl")).unwrap()
    );
}

#[test]
fn pipeline_on_the_mini_corpus() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("run.conf");
    std::fs::write(
        &config,
        format!(
            "# mini run\ncorpus = {}\noutput_dir = {}\n",
            p(&fixture("mini_corpus.jsonl")),
            p(&dir.path().join("out"))
        ),
    )
    .unwrap();
    let o = run(&[
        "--format",
        "json",
        "pipeline",
        "--config",
        p(&config),
        "--set",
        "order=4",
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let report: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    let names: Vec<&str> = report["rows"]
        .as_array()
        .unwrap()
        .iter()
        .map(|r| r["name"].as_str().unwrap())
        .collect();
    assert_eq!(names, ["No Plan", "Symbolic", "Type", "NGram"]);
    assert_eq!(report["config"]["order"], "4");
    assert!(dir.path().join("out/report.json").exists());
}

#[test]
fn pipeline_config_errors_exit_2() {
    let o = run(&["pipeline", "--set", "order=1"]);
    assert_eq!(o.status.code(), Some(2));
    let o = run(&["pipeline", "--set", "corpus=/nonexistent/corpus.jsonl"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("corpus"));
}

#[test]
fn chat_transcript() {
    let dir = tempfile::tempdir().unwrap();
    let corpus = dir.path().join("syn.jsonl");
    assert!(run(&["synthetic", "--out", p(&corpus)]).status.success());
    let mut child = bin()
        .args(["chat", "--set", &format!("corpus={}", p(&corpus)), "--set", "order=8"])
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn()
        .unwrap();
    child
        .stdin
        .take()
        .unwrap()
        .write_all(b"Could you tell me about the parcel?\n\n/seed 5\n/quit\nPlease check the invoice.\n")
        .unwrap();
    let o = child.wait_with_output().unwrap();
    assert!(o.status.success(), "{}", stderr(&o));
    assert_eq!(
        stdout(&o),
        "input plan:    GIVE [tell [me about the parcel]]\n\
         response plan: PERFORM [call [my bank first]]\n\
         response:      Please call my bank first.\n\
         adherence:     1.000\n\
         seed 5\n"
    );
}
