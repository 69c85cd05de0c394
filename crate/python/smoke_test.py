"""Smoke test for the askframe extension module.

Build and install first:
    pip install maturin
    maturin develop -m crates/python/Cargo.toml
"""

import json
import math
import os
import sys
import tempfile

import askframe

HERE = os.path.dirname(os.path.abspath(__file__))
FIXTURES = os.path.join(HERE, "..", "crates", "core", "tests", "fixtures")


def check(cond, what):
    if not cond:
        print(f"FAIL {what}")
        sys.exit(1)
    print(f"ok   {what}")


def main():
    plan = askframe.parse_plan("PERFORM [check out [the website]] ; GAIN [protect [your account]]")
    check(plan.types() == ["PERFORM", "GAIN"], "parse_plan types")
    check(askframe.parse_plan(str(plan)) == plan, "plan round trip")
    check(plan.elements()[0] == ("PERFORM", "check out", "the website"), "plan elements")
    try:
        askframe.parse_plan("PERFORM [check out the website")
        check(False, "malformed plan raises")
    except ValueError:
        check(True, "malformed plan raises")

    extracted = askframe.extract_plan("Please check out the website to protect your account.")
    check(
        str(extracted) == "PERFORM [check out [the website to protect your account]] ; GAIN [protect [your account]]",
        "extract_plan",
    )
    sim = askframe.plan_similarity(plan, extracted)
    check(0.0 < sim < 1.0 and math.isclose(plan.similarity(extracted), sim), "plan_similarity")

    response = askframe.realize_template(askframe.parse_plan("PERFORM [check out [the website]]"))
    check(response == "Please check out the website.", "realize_template")
    check(askframe.adherence(askframe.parse_plan("PERFORM [check out [the website]]"), response) == 1.0, "adherence")

    hyps = ["the cat sat on the mat", "a dog ran in the park"]
    check(askframe.bleu(hyps, hyps)[0] == 1.0, "bleu identity")
    report = askframe.evaluate(hyps, [[h, "something else"] for h in hyps])
    check(report["rouge_l"] == 1.0 and report["embedding_f1"] is None, "evaluate")

    with tempfile.TemporaryDirectory() as tmp:
        examples = os.path.join(FIXTURES, "mini_examples.golden.jsonl")
        planner = askframe.Planner.train(examples, kind="ngram", order=3)
        check(planner.kind == "ngram" and planner.n_examples == 11, "Planner.train")
        a = planner.generate("Could you give me your name?", seed=3)
        check(a == planner.generate("Could you give me your name?", seed=3), "seeded generation")
        path = os.path.join(tmp, "ngram.model")
        planner.save(path)
        check(askframe.Planner.load(path).generate("Could you give me your name?", seed=3) == a, "model save/load")

        corpus = os.path.join(tmp, "synthetic.jsonl")
        askframe.write_synthetic_corpus(corpus, n_dialogues=300, seed=7)
        run = askframe.run_pipeline(
            overrides={"corpus": corpus, "output_dir": os.path.join(tmp, "out"), "order": "8"}
        )
        rows = {r["name"]: r for r in run["report"]["rows"]}
        check(list(rows) == ["No Plan", "Symbolic", "Type", "NGram"], "run_pipeline rows")
        check(rows["NGram"]["plan_adherence"] > rows["No Plan"]["plan_adherence"], "plan-fed beats no plan")
        with open(os.path.join(run["output_dir"], "report.json")) as f:
            check(json.load(f)["run_id"] == run["run_id"], "report.json on disk")

    print("all python smoke checks passed")


if __name__ == "__main__":
    main()
