"""Evaluation metrics for molecule-caption translation outputs.

Text metrics (BLEU, ROUGE, METEOR-lite) score Mol2Cap captions over
whitespace word tokens; molecule metrics (BLEU over characters, exact match,
Levenshtein, fingerprint Tanimoto, validity) score Cap2Mol SMILES. The
METEOR stand-in uses exact unigram alignment only (no WordNet/stemming) and
is labeled ``meteor_lite`` everywhere; the RDK-style column is reproduced by
this package's path fingerprint and labeled ``path_fts``.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path

from .chem import canonicalize, is_valid, parse_smiles
from .fingerprints import morgan_fingerprint, path_fingerprint, tanimoto

BLEU_EPSILON = 0.1  # add-epsilon smoothing for zero n-gram counts


class EmptyInputError(ValueError):
    """Metric called with no pairs."""


@dataclass(frozen=True)
class EvalPair:
    id: str
    reference: str
    hypothesis: str
    task: str  # mol2cap | cap2mol


@dataclass
class MetricReport:
    """Corpus aggregates plus the per-pair values they fold over."""

    task: str
    aggregates: dict[str, float]
    per_pair: list[dict] = field(repr=False, default_factory=list)
    counts: dict[str, int] = field(default_factory=dict)

    def to_json(self) -> str:
        return json.dumps(
            {"task": self.task, "aggregates": self.aggregates,
             "counts": self.counts, "per_pair": self.per_pair},
            ensure_ascii=False, sort_keys=True)

    def to_table(self) -> str:
        """Aligned plain-text table mirroring the reporting column order."""
        order = _COLUMN_ORDER[self.task]
        header = "  ".join(f"{name:>12}" for name in order)
        values = "  ".join(f"{self.aggregates[name]:>12.4f}" for name in order)
        return header + "\n" + values


_COLUMN_ORDER = {
    "mol2cap": ("bleu2", "bleu4", "rouge1", "rouge2", "rougeL", "meteor_lite"),
    "cap2mol": ("bleu", "exact_match", "levenshtein", "path_fts", "morgan_fts",
                "validity"),
}


def _require(pairs: list[EvalPair]) -> None:
    if not pairs:
        raise EmptyInputError("no evaluation pairs")


def _tokens(text: str, task: str) -> list[str]:
    return list(text) if task == "cap2mol" else text.split()


def _ngrams(tokens: list[str], n: int) -> dict[tuple, int]:
    counts: dict[tuple, int] = {}
    for i in range(len(tokens) - n + 1):
        key = tuple(tokens[i : i + n])
        counts[key] = counts.get(key, 0) + 1
    return counts


# ---------------------------------------------------------------------------
# BLEU
# ---------------------------------------------------------------------------

def bleu_pair_stats(pair: EvalPair, max_n: int) -> dict:
    """Clipped n-gram matches and totals for one pair (corpus BLEU folds
    these, so aggregates stay recomputable from per-pair values)."""
    hyp = _tokens(pair.hypothesis, pair.task)
    ref = _tokens(pair.reference, pair.task)
    matches, totals = [], []
    for n in range(1, max_n + 1):
        hyp_counts = _ngrams(hyp, n)
        ref_counts = _ngrams(ref, n)
        matches.append(sum(min(c, ref_counts.get(g, 0)) for g, c in hyp_counts.items()))
        totals.append(sum(hyp_counts.values()))
    return {"matches": matches, "totals": totals,
            "hyp_len": len(hyp), "ref_len": len(ref)}


def bleu_from_stats(stats: list[dict], max_n: int) -> float:
    match_sums = [sum(s["matches"][k] for s in stats) for k in range(max_n)]
    total_sums = [sum(s["totals"][k] for s in stats) for k in range(max_n)]
    log_sum = 0.0
    for k in range(max_n):
        num = match_sums[k] if match_sums[k] > 0 else BLEU_EPSILON
        den = total_sums[k] if total_sums[k] > 0 else 1
        log_sum += math.log(num / den) / max_n
    hyp_len = sum(s["hyp_len"] for s in stats)
    ref_len = sum(s["ref_len"] for s in stats)
    if hyp_len == 0:
        return 0.0
    brevity = min(1.0, math.exp(1.0 - ref_len / hyp_len))
    return brevity * math.exp(log_sum)


def bleu(pairs: list[EvalPair], max_n: int = 4) -> float:
    """Corpus BLEU with uniform weights up to max_n, brevity penalty, and
    add-epsilon smoothing on zero counts."""
    _require(pairs)
    stats = [bleu_pair_stats(p, max_n) for p in pairs]
    return bleu_from_stats(stats, max_n)


# ---------------------------------------------------------------------------
# ROUGE
# ---------------------------------------------------------------------------

def _f1(overlap: float, hyp_total: int, ref_total: int) -> float:
    if overlap == 0 or hyp_total == 0 or ref_total == 0:
        return 0.0
    precision = overlap / hyp_total
    recall = overlap / ref_total
    return 2 * precision * recall / (precision + recall)


def rouge_pair(pair: EvalPair, variant: str) -> float:
    hyp = pair.hypothesis.split()
    ref = pair.reference.split()
    if variant in ("1", "2"):
        n = int(variant)
        hyp_counts = _ngrams(hyp, n)
        ref_counts = _ngrams(ref, n)
        overlap = sum(min(c, ref_counts.get(g, 0)) for g, c in hyp_counts.items())
        return _f1(overlap, sum(hyp_counts.values()), sum(ref_counts.values()))
    if variant == "L":
        return _f1(_lcs_length(hyp, ref), len(hyp), len(ref))
    raise ValueError(f"rouge variant must be '1', '2' or 'L', got {variant!r}")


def _lcs_length(a: list[str], b: list[str]) -> int:
    if not a or not b:
        return 0
    prev = [0] * (len(b) + 1)
    for x in a:
        cur = [0]
        for j, y in enumerate(b, start=1):
            cur.append(prev[j - 1] + 1 if x == y else max(prev[j], cur[j - 1]))
        prev = cur
    return prev[-1]


def rouge(pairs: list[EvalPair], variant: str) -> float:
    """Mean per-pair ROUGE F1 (1, 2 or L over word tokens)."""
    _require(pairs)
    return sum(rouge_pair(p, variant) for p in pairs) / len(pairs)


# ---------------------------------------------------------------------------
# METEOR-lite
# ---------------------------------------------------------------------------

def meteor_lite_pair(pair: EvalPair) -> float:
    """Exact-unigram METEOR: recall-weighted harmonic mean (9:1) times a
    fragmentation penalty 0.5 * (chunks / matches)^3.

    Hypothesis tokens align greedily left-to-right to the earliest unmatched
    identical reference token; a chunk is a maximal run of alignments that
    are adjacent in both strings.
    """
    hyp = pair.hypothesis.split()
    ref = pair.reference.split()
    if not hyp or not ref:
        return 0.0

    taken = [False] * len(ref)
    alignment: list[tuple[int, int]] = []
    for i, tok in enumerate(hyp):
        for j, rtok in enumerate(ref):
            if not taken[j] and rtok == tok:
                taken[j] = True
                alignment.append((i, j))
                break
    m = len(alignment)
    if m == 0:
        return 0.0
    chunks = 1
    for (i0, j0), (i1, j1) in zip(alignment, alignment[1:]):
        if i1 != i0 + 1 or j1 != j0 + 1:
            chunks += 1
    precision = m / len(hyp)
    recall = m / len(ref)
    f_mean = 10 * precision * recall / (recall + 9 * precision)
    penalty = 0.5 * (chunks / m) ** 3
    return f_mean * (1 - penalty)


def meteor_lite(pairs: list[EvalPair]) -> float:
    _require(pairs)
    return sum(meteor_lite_pair(p) for p in pairs) / len(pairs)


# ---------------------------------------------------------------------------
# string / molecule metrics
# ---------------------------------------------------------------------------

def levenshtein(a: str, b: str) -> int:
    """Minimal insert/delete/substitute count at unit costs."""
    if a == b:
        return 0
    if len(a) < len(b):
        a, b = b, a
    if not b:
        return len(a)
    prev = list(range(len(b) + 1))
    for i, ca in enumerate(a, start=1):
        cur = [i]
        for j, cb in enumerate(b, start=1):
            cur.append(min(prev[j] + 1, cur[j - 1] + 1, prev[j - 1] + (ca != cb)))
        prev = cur
    return prev[-1]


def mean_levenshtein(pairs: list[EvalPair]) -> float:
    """Mean per-pair edit distance (the aggregation is labeled as a mean)."""
    _require(pairs)
    return sum(levenshtein(p.reference, p.hypothesis) for p in pairs) / len(pairs)


def _canonical_or_none(smiles: str) -> str | None:
    try:
        return canonicalize(parse_smiles(smiles)).text
    except Exception:
        return None


def exact_match(pairs: list[EvalPair]) -> float:
    """Fraction of pairs whose canonical SMILES agree; unparseable
    hypotheses never match."""
    _require(pairs)
    hits = 0
    for p in pairs:
        hyp = _canonical_or_none(p.hypothesis)
        if hyp is not None and hyp == _canonical_or_none(p.reference):
            hits += 1
    return hits / len(pairs)


def fts_pair(pair: EvalPair, kind: str, radius: int = 2, max_len: int = 7,
             width: int = 2048) -> float:
    """Tanimoto of one pair's fingerprints; 0.0 when either side fails to
    parse (invalid generations are penalized, not excluded)."""
    try:
        ref = parse_smiles(pair.reference)
        hyp = parse_smiles(pair.hypothesis)
        if kind == "morgan":
            return tanimoto(morgan_fingerprint(ref, radius, width),
                            morgan_fingerprint(hyp, radius, width))
        if kind == "path":
            return tanimoto(path_fingerprint(ref, max_len, width),
                            path_fingerprint(hyp, max_len, width))
    except Exception:
        return 0.0
    raise ValueError(f"fingerprint kind must be 'morgan' or 'path', got {kind!r}")


def fts_metrics(pairs: list[EvalPair], kind: str) -> float:
    _require(pairs)
    return sum(fts_pair(p, kind) for p in pairs) / len(pairs)


def validity_rate(pairs: list[EvalPair]) -> float:
    _require(pairs)
    return sum(1 for p in pairs if is_valid(p.hypothesis)) / len(pairs)


# ---------------------------------------------------------------------------
# full suites
# ---------------------------------------------------------------------------

def evaluate(pairs: list[EvalPair], task: str) -> MetricReport:
    """Score a prediction set with the full metric suite for its task."""
    _require(pairs)
    if task == "mol2cap":
        return _evaluate_mol2cap(pairs)
    if task == "cap2mol":
        return _evaluate_cap2mol(pairs)
    raise ValueError(f"task must be 'mol2cap' or 'cap2mol', got {task!r}")


def _evaluate_mol2cap(pairs: list[EvalPair]) -> MetricReport:
    per_pair = []
    for p in pairs:
        per_pair.append({
            "id": p.id,
            "bleu2_stats": bleu_pair_stats(p, 2),
            "bleu4_stats": bleu_pair_stats(p, 4),
            "rouge1": rouge_pair(p, "1"),
            "rouge2": rouge_pair(p, "2"),
            "rougeL": rouge_pair(p, "L"),
            "meteor_lite": meteor_lite_pair(p),
        })
    aggregates = {
        "bleu2": bleu_from_stats([r["bleu2_stats"] for r in per_pair], 2),
        "bleu4": bleu_from_stats([r["bleu4_stats"] for r in per_pair], 4),
        "rouge1": sum(r["rouge1"] for r in per_pair) / len(per_pair),
        "rouge2": sum(r["rouge2"] for r in per_pair) / len(per_pair),
        "rougeL": sum(r["rougeL"] for r in per_pair) / len(per_pair),
        "meteor_lite": sum(r["meteor_lite"] for r in per_pair) / len(per_pair),
    }
    return MetricReport(task="mol2cap", aggregates=aggregates, per_pair=per_pair,
                        counts={"total": len(pairs)})


def _evaluate_cap2mol(pairs: list[EvalPair]) -> MetricReport:
    per_pair = []
    invalid = 0
    for p in pairs:
        valid = is_valid(p.hypothesis)
        invalid += 0 if valid else 1
        hyp_canon = _canonical_or_none(p.hypothesis)
        ref_canon = _canonical_or_none(p.reference)
        per_pair.append({
            "id": p.id,
            "bleu_stats": bleu_pair_stats(p, 4),
            "exact_match": 1.0 if hyp_canon is not None and hyp_canon == ref_canon else 0.0,
            "levenshtein": levenshtein(p.reference, p.hypothesis),
            "path_fts": fts_pair(p, "path"),
            "morgan_fts": fts_pair(p, "morgan"),
            "validity": 1.0 if valid else 0.0,
        })
    n = len(per_pair)
    aggregates = {
        "bleu": bleu_from_stats([r["bleu_stats"] for r in per_pair], 4),
        "exact_match": sum(r["exact_match"] for r in per_pair) / n,
        "levenshtein": sum(r["levenshtein"] for r in per_pair) / n,
        "path_fts": sum(r["path_fts"] for r in per_pair) / n,
        "morgan_fts": sum(r["morgan_fts"] for r in per_pair) / n,
        "validity": sum(r["validity"] for r in per_pair) / n,
    }
    return MetricReport(task="cap2mol", aggregates=aggregates, per_pair=per_pair,
                        counts={"total": n, "invalid_hypotheses": invalid})


def load_predictions(path: str | Path, task: str) -> list[EvalPair]:
    """Read a prediction file: one JSON object {id, reference, hypothesis}
    per line."""
    pairs = []
    with Path(path).open(encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                row = json.loads(line)
                pairs.append(EvalPair(id=str(row["id"]), reference=row["reference"],
                                      hypothesis=row["hypothesis"], task=task))
            except (json.JSONDecodeError, KeyError) as exc:
                raise ValueError(f"{path}:{line_no}: bad prediction row ({exc})") from exc
    return pairs
