"""End-to-end demonstration: build datasets with the context engine's CLI,
train one model per mask mode, and compare exact match.

The engine is consumed strictly through its external interfaces: the corpus
TSV it reads, the JSONL datasets and stats it writes, and its compute-loss
command for the loss cross-check.
"""

from __future__ import annotations

import argparse
import json
import subprocess
import sys
from pathlib import Path

from .data import CorpusSpec, generate_corpus
from .evaluate import eval_toy, load_gold_targets
from .records import Vocab, load_records
from .training import (
    ToyTrainConfig,
    export_logprobs,
    load_checkpoint,
    record_rendered_losses,
    train_toy,
)


def run_engine(*args: str) -> str:
    """Invoke the context-engine CLI; returns stdout."""
    proc = subprocess.run(["icma", *args], capture_output=True, text=True)
    if proc.returncode != 0:
        raise RuntimeError(f"icma {' '.join(args)} failed "
                           f"(exit {proc.returncode}): {proc.stderr.strip()}")
    return proc.stdout


def build_datasets(workdir: Path, spec: CorpusSpec, n_examples: int = 1,
                   seed: int = 0) -> tuple[Path, Path, Path]:
    """Generate the synthetic corpus and emit train/test JSONL datasets."""
    train_tsv, test_tsv = generate_corpus(workdir / "corpus", spec)
    train_ds = workdir / "train.jsonl"
    test_ds = workdir / "test.jsonl"
    common = ["--task", "cap2mol", "--strategy", "bm25", "--n", str(n_examples),
              "--p-max", "0", "--seed", str(seed), "--no-cutoff"]
    run_engine("build-dataset", "--corpus", str(train_tsv),
               "--out", str(train_ds), *common)
    run_engine("build-dataset", "--corpus", str(train_tsv),
               "--queries", str(test_tsv), "--queries-split", "test",
               "--out", str(test_ds), *common)
    return train_ds, test_ds, test_tsv


def engine_loss(dataset: Path, logprobs: Path, mode: str) -> dict[str, float]:
    """Per-record loss as computed by the engine's compute-loss command."""
    out = run_engine("compute-loss", "--dataset", str(dataset),
                     "--logprobs", str(logprobs), "--mode", mode)
    payload = json.loads(out)
    return {row["id"]: row["loss"] for row in payload["records"]}


def run_comparison(workdir: str | Path, spec: CorpusSpec = CorpusSpec(),
                   epochs: int = 6, seed: int = 0,
                   cross_check_records: int = 8) -> dict:
    """Train sft- and icma-masked models on identical data; returns metrics.

    The returned dict carries both exact-match scores, the loss curves, and
    the worst |trainer - engine| loss discrepancy over exported logprobs.
    """
    workdir = Path(workdir)
    workdir.mkdir(parents=True, exist_ok=True)
    train_ds, test_ds, test_tsv = build_datasets(workdir, spec, seed=seed)

    train_records = load_records(train_ds)
    test_records = load_records(test_ds)
    vocab = Vocab.build([r.rendered for r in train_records + test_records])
    gold = load_gold_targets(test_tsv)

    results = {}
    loss_gap = 0.0
    for mode in ("sft", "icma"):
        cfg = ToyTrainConfig(mask_mode=mode, epochs=epochs, seed=seed)
        outcome = train_toy(train_ds, cfg, workdir / mode, vocab=vocab,
                            records=train_records)
        model, vocab_ck, _ = load_checkpoint(outcome.checkpoint_path)
        evaluation = eval_toy(model, vocab_ck, test_records, gold)
        (workdir / mode / "metrics.json").write_text(
            evaluation.to_json() + "\n", encoding="utf-8")

        sample = train_records[:cross_check_records]
        logprob_path = workdir / mode / "logprobs.jsonl"
        export_logprobs(model, sample, vocab_ck, logprob_path)
        engine = engine_loss(train_ds, logprob_path, mode)
        own = record_rendered_losses(model, sample, vocab_ck, mode)
        for rec in sample:
            loss_gap = max(loss_gap, abs(engine[rec.id] - own[rec.id]))

        results[mode] = {
            "exact_match": evaluation.exact_match,
            "hits": evaluation.hits,
            "total": evaluation.total,
            "epoch_losses": outcome.epoch_losses,
            "parameters": outcome.parameter_count,
        }

    summary = {
        "sft": results["sft"],
        "icma": results["icma"],
        "exact_match_margin": results["icma"]["exact_match"] - results["sft"]["exact_match"],
        "max_loss_cross_check_gap": loss_gap,
        "seed": seed,
        "epochs": epochs,
    }
    (workdir / "summary.json").write_text(
        json.dumps(summary, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    return summary


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(
        prog="toy-icmt",
        description="Compare sft vs icma loss masking on a synthetic corpus.")
    parser.add_argument("--workdir", required=True)
    parser.add_argument("--families", type=int, default=150)
    parser.add_argument("--members", type=int, default=3)
    parser.add_argument("--epochs", type=int, default=6)
    parser.add_argument("--seed", type=int, default=0)
    args = parser.parse_args(argv)
    spec = CorpusSpec(families=args.families, train_members=args.members,
                      seed=args.seed)
    summary = run_comparison(args.workdir, spec, epochs=args.epochs,
                             seed=args.seed)
    print(json.dumps(summary, indent=2, sort_keys=True))
    return 0


if __name__ == "__main__":
    sys.exit(main())
