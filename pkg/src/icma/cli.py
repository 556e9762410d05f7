"""Command-line entry point.

Subcommands: index, retrieve, build-dataset, evaluate, analyze-walk,
compute-loss. Configuration precedence is flags > config file (--config,
JSON) > defaults; the seed falls back to the ICMA_SEED environment variable.
Every stats/report output echoes the effective config, artifact version and
seed for provenance.

Exit codes: 0 success, 1 I/O error, 2 usage/validation error, 3 data
quality (e.g. every corpus record quarantined).
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

from . import __version__
from .chem import ChemError
from .corpus import Corpus, CorpusFormatError, load_corpus
from .dataset import STRATEGY_NAMES, emit_dataset, make_strategy
from .metrics import EmptyInputError, evaluate, load_predictions
from .prompts import (
    COUNTER_IDS,
    LossMaskSpec,
    PromptBundle,
    PromptError,
    Segment,
    compute_loss,
)
from .rerank import (
    RandomWalkConfig,
    early_stop_probability,
    random_walk_select,
    skip_probability,
)
from .retrieval import (
    RetrievalError,
    bm25_topn,
    build_bm25_index,
    cosine_topn,
    fingerprint_topn,
    load_bm25_index,
    load_embeddings,
    save_bm25_index,
)

EXIT_OK = 0
EXIT_IO = 1
EXIT_USAGE = 2
EXIT_DATA_QUALITY = 3

DEFAULTS = {
    "task": "mol2cap",
    "strategy": "bm25",
    "N": 10,
    "n": 2,
    "p_max": 0.09,
    "seed": 0,
    "cutoff": 1024,
    "counter": "whitespace-words",
    "k1": 1.5,
    "b": 0.75,
    "workers": 1,
}


class DataQualityError(RuntimeError):
    """All records unusable; the run cannot proceed meaningfully."""


def main(argv: list[str] | None = None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    if args.command is None:
        parser.print_help()
        return EXIT_USAGE
    try:
        return args.func(args)
    except DataQualityError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DATA_QUALITY
    except (ChemError, RetrievalError, PromptError, CorpusFormatError,
            EmptyInputError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="icma",
        description="Build and evaluate in-context molecule adaptation datasets.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command")

    def common(p: argparse.ArgumentParser) -> None:
        p.add_argument("--config", help="JSON config file (flags override it)")
        p.add_argument("--seed", type=int, help="global RNG seed (env ICMA_SEED fallback)")

    p = sub.add_parser("index", help="build and persist a BM25 caption index")
    common(p)
    p.add_argument("--corpus", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--k1", type=float)
    p.add_argument("--b", type=float)
    p.set_defaults(func=cmd_index)

    p = sub.add_parser("retrieve", help="rank corpus records against one query")
    common(p)
    p.add_argument("--strategy", choices=STRATEGY_NAMES)
    p.add_argument("--corpus", required=True)
    p.add_argument("--index", help="persisted BM25 index (bm25 strategy)")
    p.add_argument("--embeddings", help="embedding file (embedding strategy)")
    p.add_argument("--query", required=True,
                   help="caption text (bm25), record id (embedding/random) or SMILES (fingerprint)")
    p.add_argument("--N", type=int)
    p.add_argument("--exclude-id")
    p.set_defaults(func=cmd_retrieve)

    p = sub.add_parser("build-dataset", help="emit a JSONL context dataset")
    common(p)
    p.add_argument("--task", choices=("mol2cap", "cap2mol"))
    p.add_argument("--strategy", choices=STRATEGY_NAMES)
    p.add_argument("--corpus", required=True, help="train-split corpus TSV")
    p.add_argument("--queries", help="query corpus TSV (default: the train corpus)")
    p.add_argument("--queries-split", choices=("train", "validation", "test"),
                   default="train", help="split label for --queries records")
    p.add_argument("--embeddings")
    p.add_argument("--N", type=int)
    p.add_argument("--n", type=int)
    p.add_argument("--p-max", dest="p_max", type=float)
    p.add_argument("--cutoff", type=int)
    p.add_argument("--no-cutoff", action="store_true", help="disable truncation")
    p.add_argument("--counter", choices=COUNTER_IDS)
    p.add_argument("--k1", type=float)
    p.add_argument("--b", type=float)
    p.add_argument("--workers", type=int)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_build_dataset)

    p = sub.add_parser("evaluate", help="score a prediction file")
    common(p)
    p.add_argument("--task", choices=("mol2cap", "cap2mol"), required=True)
    p.add_argument("--predictions", required=True)
    p.add_argument("--out", help="output prefix (writes <out>.json and <out>.txt)")
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("analyze-walk", help="random-walk skip/early-stop statistics")
    common(p)
    p.add_argument("--N", type=int)
    p.add_argument("--n", type=int)
    p.add_argument("--p-max", dest="p_max", type=float)
    p.add_argument("--trials", type=int, default=100_000)
    p.set_defaults(func=cmd_analyze_walk)

    p = sub.add_parser("compute-loss", help="masked loss from exported token logprobs")
    common(p)
    p.add_argument("--dataset", required=True, help="JSONL from build-dataset")
    p.add_argument("--logprobs", required=True,
                   help="JSONL: {id, tokens: [[start, end, logprob], ...]}")
    p.add_argument("--mode", choices=("sft", "icma"), required=True)
    p.add_argument("--out", help="write per-record losses here instead of stdout")
    p.set_defaults(func=cmd_compute_loss)

    return parser


def _effective(args: argparse.Namespace, keys: list[str]) -> dict:
    """Merge flag values over config-file values over defaults."""
    from_file: dict = {}
    if getattr(args, "config", None):
        from_file = json.loads(Path(args.config).read_text(encoding="utf-8"))
    merged = {}
    for key in keys:
        flag_value = getattr(args, key, None)
        if flag_value is not None:
            merged[key] = flag_value
        elif key in from_file:
            merged[key] = from_file[key]
        elif key == "seed" and os.environ.get("ICMA_SEED"):
            merged[key] = int(os.environ["ICMA_SEED"])
        else:
            merged[key] = DEFAULTS.get(key)
    return merged


def _load_corpus_checked(path: str, split: str = "train") -> Corpus:
    corpus = load_corpus(path, split=split)
    if not corpus.records:
        raise DataQualityError(
            f"{path}: no usable records ({len(corpus.quarantined)} quarantined)")
    return corpus


def _provenance(cfg: dict) -> dict:
    return {"version": __version__, **cfg}


def cmd_index(args: argparse.Namespace) -> int:
    cfg = _effective(args, ["k1", "b", "seed"])
    corpus = _load_corpus_checked(args.corpus)
    index = build_bm25_index(corpus.records, k1=cfg["k1"], b=cfg["b"])
    save_bm25_index(index, args.out)
    print(json.dumps({"indexed_docs": index.n_docs, "avgdl": index.avgdl,
                      **_provenance(cfg)}, sort_keys=True))
    return EXIT_OK


def cmd_retrieve(args: argparse.Namespace) -> int:
    cfg = _effective(args, ["strategy", "N", "k1", "b", "seed"])
    corpus = _load_corpus_checked(args.corpus)
    strategy_name = cfg["strategy"]
    n = cfg["N"]
    exclude = args.exclude_id

    if strategy_name == "bm25":
        index = load_bm25_index(args.index) if args.index else build_bm25_index(
            corpus.records, k1=cfg["k1"], b=cfg["b"])
        ranked = bm25_topn(index, args.query, n, exclude_id=exclude)
    elif strategy_name == "embedding":
        if not args.embeddings:
            raise ValueError("embedding strategy requires --embeddings")
        store = load_embeddings(args.embeddings)
        ranked = cosine_topn(store, args.query, n, exclude_self=exclude is not None,
                             candidate_ids=[r.id for r in corpus.train])
    elif strategy_name == "fingerprint":
        ranked = fingerprint_topn(corpus.train, args.query, n, exclude_id=exclude)
    else:
        strategy = make_strategy("random", corpus.train, seed=cfg["seed"])
        query = corpus.by_id.get(args.query)
        if query is None:
            raise ValueError(f"record id {args.query!r} not in corpus")
        ranked = strategy.topn(query, n, exclude_self=exclude is not None)
    print(json.dumps([[rid, score] for rid, score in ranked.entries]))
    return EXIT_OK


def cmd_build_dataset(args: argparse.Namespace) -> int:
    keys = ["task", "strategy", "N", "n", "p_max", "seed", "cutoff", "counter",
            "k1", "b", "workers"]
    cfg = _effective(args, keys)
    walk_cfg = RandomWalkConfig(N=cfg["N"], n=cfg["n"], p_max=cfg["p_max"],
                                seed=cfg["seed"])
    corpus = _load_corpus_checked(args.corpus)

    store = load_embeddings(args.embeddings) if args.embeddings else None
    strategy = make_strategy(cfg["strategy"], corpus.train, k1=cfg["k1"], b=cfg["b"],
                             seed=cfg["seed"], store=store)

    if args.queries:
        queries = _load_corpus_checked(args.queries, split=args.queries_split).records
    else:
        queries = corpus.train

    cutoff = None if args.no_cutoff else cfg["cutoff"]
    stats = emit_dataset(queries, strategy, walk_cfg, cfg["task"], args.out,
                         cutoff=cutoff, counter=cfg["counter"],
                         workers=cfg["workers"],
                         config_echo=_provenance({**cfg, "cutoff": cutoff}))
    Path(str(args.out) + ".stats.json").write_text(stats.to_json() + "\n",
                                                   encoding="utf-8")
    print(stats.to_json())
    if stats.records_emitted == 0:
        raise DataQualityError("no records emitted")
    return EXIT_OK


def cmd_evaluate(args: argparse.Namespace) -> int:
    cfg = _effective(args, ["seed"])
    pairs = load_predictions(args.predictions, args.task)
    report = evaluate(pairs, args.task)
    payload = json.loads(report.to_json())
    payload["provenance"] = _provenance({**cfg, "task": args.task})
    text = json.dumps(payload, ensure_ascii=False, sort_keys=True)
    if args.out:
        Path(args.out + ".json").write_text(text + "\n", encoding="utf-8")
        Path(args.out + ".txt").write_text(report.to_table() + "\n", encoding="utf-8")
    print(report.to_table())
    return EXIT_OK


def cmd_analyze_walk(args: argparse.Namespace) -> int:
    cfg = _effective(args, ["N", "n", "p_max", "seed"])
    walk_cfg = RandomWalkConfig(N=cfg["N"], n=cfg["n"], p_max=cfg["p_max"],
                                seed=cfg["seed"])
    trials = args.trials
    ids = [f"rank{j}" for j in range(walk_cfg.N)]
    visits = [0] * (walk_cfg.N + 1)
    skips = [0] * (walk_cfg.N + 1)
    early = 0
    for trial in range(trials):
        outcome = random_walk_select(ids, walk_cfg, str(trial))
        early += 1 if outcome.early_stopped else 0
        selected_ranks = {rank for rank, _ in outcome.selected}
        last = outcome.selected[-1][0] if outcome.selected else walk_cfg.N
        for j in range(1, last + 1):
            visits[j] += 1
            if j not in selected_ranks:
                skips[j] += 1
    per_rank = []
    for j in range(1, walk_cfg.N + 1):
        per_rank.append({
            "rank": j,
            "p": skip_probability(j, walk_cfg),
            "visits": visits[j],
            "skip_frequency": skips[j] / visits[j] if visits[j] else None,
        })
    print(json.dumps({
        "early_stop_probability": early_stop_probability(walk_cfg),
        "early_stop_monte_carlo": early / trials,
        "trials": trials,
        "per_rank": per_rank,
        **_provenance(cfg),
    }, sort_keys=True))
    return EXIT_OK


def _bundle_from_row(row: dict) -> PromptBundle:
    segments = tuple(Segment(s["start"], s["end"], s["label"])
                     for s in row["segments"])
    return PromptBundle(task=row["task"], examples=(), query_input="?",
                        query_target=None, rendered=row["rendered"],
                        segments=segments)


def cmd_compute_loss(args: argparse.Namespace) -> int:
    cfg = _effective(args, ["seed"])
    mask = LossMaskSpec(args.mode)
    rows: dict[str, dict] = {}
    with Path(args.dataset).open(encoding="utf-8") as fh:
        for line in fh:
            if line.strip():
                row = json.loads(line)
                rows[str(row["id"])] = row

    losses: list[dict] = []
    total = 0.0
    with Path(args.logprobs).open(encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            entry = json.loads(line)
            rec_id = str(entry["id"])
            if rec_id not in rows:
                raise ValueError(f"{args.logprobs}:{line_no}: id {rec_id!r} not in dataset")
            bundle = _bundle_from_row(rows[rec_id])
            tokens = [(int(s), int(e), float(lp)) for s, e, lp in entry["tokens"]]
            loss = compute_loss(bundle, mask, tokens)
            losses.append({"id": rec_id, "loss": loss})
            total += loss

    payload = {"mode": args.mode, "records": losses, "total_loss": total,
               "mean_loss": total / len(losses) if losses else 0.0,
               **_provenance(cfg)}
    text = json.dumps(payload, ensure_ascii=False, sort_keys=True)
    if args.out:
        Path(args.out).write_text(text + "\n", encoding="utf-8")
    print(text)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
