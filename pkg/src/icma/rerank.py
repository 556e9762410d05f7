"""Post-retrieval re-ranking: Random Walk selection and Sequence Reversal.

The walk visits the rough top-N list from rank 1 upward. At rank j it skips
with probability p(j) = p_max * (N - j) / (N - 1), which decays to zero at
rank N, and otherwise selects; after a selection the walk resumes at the
next rank. It stops once n examples are selected or rank N is consumed —
reaching rank N with fewer than n selections is the early-stop case, whose
exact probability is tiny for sane configurations and computed here by
state-space enumeration.

Randomness comes from one xoshiro256** stream per query record, keyed by
(global seed, record id), so dataset builds are order-independent and
reproducible across platforms.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from fractions import Fraction
from functools import lru_cache
from typing import Callable, Sequence

from .prompts import ContextExample
from .rng import Xoshiro256StarStar

Resolver = Callable[[str], tuple[str, str]]


def _ids_of(rough) -> list[str]:
    """Accept a RankedList or a plain sequence of record ids."""
    if hasattr(rough, "entries"):
        return [rid for rid, _ in rough.entries]
    return list(rough)


class ShortListError(ValueError):
    """The rough list is shorter than the configured N."""


@dataclass(frozen=True)
class RandomWalkConfig:
    """Walk parameters: rough count N, refined count n, maximum skip
    probability p_max in [0, 1), and the 64-bit global seed."""

    N: int = 10
    n: int = 2
    p_max: float = 0.09
    seed: int = 0

    def __post_init__(self) -> None:
        if self.N < 1:
            raise ValueError(f"N must be >= 1, got {self.N}")
        if not 1 <= self.n <= self.N:
            raise ValueError(f"need 1 <= n <= N, got n={self.n}, N={self.N}")
        if not 0.0 <= self.p_max < 1.0:
            raise ValueError(f"p_max must be in [0, 1), got {self.p_max}")


@dataclass(frozen=True)
class SelectionOutcome:
    """Walk result: (rank, record-id) pairs in selection order, whether the
    walk ran out of ranks, and how many RNG draws it consumed."""

    selected: tuple[tuple[int, str], ...]
    early_stopped: bool
    draws: int


@lru_cache(maxsize=1024)
def _skip_prob_table(n_ranks: int, p_max_repr: str) -> tuple[float, ...]:
    # exact rational arithmetic, rounded once, so e.g. p(5)=0.05 exactly
    if n_ranks == 1:
        return (0.0,)
    p_max = Fraction(p_max_repr)
    return tuple(float(p_max * (n_ranks - j) / (n_ranks - 1))
                 for j in range(1, n_ranks + 1))


def skip_probability(j: int, cfg: RandomWalkConfig) -> float:
    """p(j) = p_max * (N - j) / (N - 1); decays to 0 at rank N."""
    if not 1 <= j <= cfg.N:
        raise ValueError(f"rank {j} outside 1..{cfg.N}")
    return _skip_prob_table(cfg.N, str(cfg.p_max))[j - 1]


def random_walk_select(rough: Sequence[str], cfg: RandomWalkConfig,
                       stream_id: str) -> SelectionOutcome:
    """Run the walk over a rough list of exactly N entries (a RankedList or
    a plain sequence of record ids).

    ``stream_id`` keys the RNG stream (normally the query record id); a
    fixed (cfg.seed, stream_id) pair reproduces the selection exactly.
    """
    rough_ids = _ids_of(rough)
    if len(rough_ids) != cfg.N:
        raise ShortListError(
            f"rough list has {len(rough_ids)} entries, config expects N={cfg.N}")
    rng = Xoshiro256StarStar.for_stream(cfg.seed, stream_id)
    n_ranks = cfg.N
    probs = _skip_prob_table(n_ranks, str(cfg.p_max))

    selected: list[tuple[int, str]] = []
    draws = 0
    for j in range(1, n_ranks + 1):
        p = probs[j - 1]
        if p > 0.0:
            draws += 1
            if rng.random() < p:
                continue
        selected.append((j, rough_ids[j - 1]))
        if len(selected) == cfg.n:
            return SelectionOutcome(tuple(selected), early_stopped=False, draws=draws)
    return SelectionOutcome(tuple(selected), early_stopped=len(selected) < cfg.n,
                            draws=draws)


def select_with_padding(rough: Sequence[str], cfg: RandomWalkConfig,
                        stream_id: str) -> SelectionOutcome:
    """Walk with the short-list policy: when fewer than N candidates exist,
    N (and n, if needed) shrink to the available length so the decay-to-zero
    guarantee is preserved."""
    rough_ids = _ids_of(rough)
    if len(rough_ids) >= cfg.N:
        return random_walk_select(rough_ids[: cfg.N], cfg, stream_id)
    if not rough_ids:
        return SelectionOutcome((), early_stopped=False, draws=0)
    shrunk = replace(cfg, N=len(rough_ids), n=min(cfg.n, len(rough_ids)))
    return random_walk_select(rough_ids, shrunk, stream_id)


def early_stop_probability(cfg: RandomWalkConfig) -> float:
    """Probability that the walk terminates with fewer than n selections."""
    return float(early_stop_probability_exact(cfg))


def early_stop_probability_exact(cfg: RandomWalkConfig) -> Fraction:
    """Exact early-stop probability by enumeration over (rank, selected)
    states.

    p_max enters as the exact decimal of its shortest float repr (0.09 means
    9/100), so paper-style configurations stay exact rationals.
    """
    p_max = Fraction(str(cfg.p_max))
    n_ranks, n_want = cfg.N, cfg.n
    if n_ranks == 1:
        return Fraction(0)

    def p(j: int) -> Fraction:
        return p_max * (n_ranks - j) / (n_ranks - 1)

    # states[k] = probability of arriving at the current rank with k selected
    states: dict[int, Fraction] = {0: Fraction(1)}
    for j in range(1, n_ranks + 1):
        nxt: dict[int, Fraction] = {}
        pj = p(j)
        for k, prob in states.items():
            if pj > 0:
                nxt[k] = nxt.get(k, Fraction(0)) + prob * pj
            if k + 1 < n_want:
                nxt[k + 1] = nxt.get(k + 1, Fraction(0)) + prob * (1 - pj)
            # k + 1 == n_want means success; that mass leaves the walk
        states = nxt
    return sum(states.values(), Fraction(0))


def sequence_reverse(selected: SelectionOutcome,
                     resolver: Resolver) -> list["ContextExample"]:
    """Reverse the selection order so the most similar example lands
    adjacent to the query slot; resolves record ids to context examples."""
    examples = []
    for rank, rid in selected.selected:
        input_text, target_text = resolver(rid)
        examples.append(ContextExample(source_id=rid, input_text=input_text,
                                       target_text=target_text, rank=rank))
    return list(reversed(examples))
