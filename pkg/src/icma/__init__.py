"""ICMA context engine: hybrid retrieval, re-ranking, prompt assembly and
evaluation for molecule-caption translation."""

__version__ = "0.1.0"

from .chem import (
    CanonicalSmiles,
    Molecule,
    canonical_smiles,
    canonicalize,
    is_valid,
    parse_smiles,
)
from .corpus import Corpus, CorpusRecord, load_corpus
from .dataset import emit_dataset, make_strategy
from .fingerprints import (
    FingerprintVector,
    dice,
    morgan_fingerprint,
    path_fingerprint,
    tanimoto,
)
from .metrics import EvalPair, MetricReport, evaluate, levenshtein
from .prompts import (
    ContextExample,
    LossMaskSpec,
    PromptBundle,
    compute_loss,
    count_units,
    render_prompt,
    truncate_to_cutoff,
)
from .rerank import (
    RandomWalkConfig,
    SelectionOutcome,
    early_stop_probability,
    early_stop_probability_exact,
    random_walk_select,
    sequence_reverse,
    skip_probability,
)
from .retrieval import (
    Bm25Index,
    EmbeddingStore,
    RankedList,
    bm25_topn,
    build_bm25_index,
    cosine_topn,
    fingerprint_topn,
    load_embeddings,
)

__all__ = [
    "Bm25Index",
    "CanonicalSmiles",
    "ContextExample",
    "Corpus",
    "CorpusRecord",
    "EmbeddingStore",
    "EvalPair",
    "FingerprintVector",
    "LossMaskSpec",
    "MetricReport",
    "Molecule",
    "PromptBundle",
    "RandomWalkConfig",
    "RankedList",
    "SelectionOutcome",
    "__version__",
    "bm25_topn",
    "build_bm25_index",
    "canonical_smiles",
    "canonicalize",
    "compute_loss",
    "cosine_topn",
    "count_units",
    "dice",
    "early_stop_probability",
    "early_stop_probability_exact",
    "emit_dataset",
    "evaluate",
    "fingerprint_topn",
    "is_valid",
    "levenshtein",
    "load_corpus",
    "load_embeddings",
    "make_strategy",
    "morgan_fingerprint",
    "parse_smiles",
    "path_fingerprint",
    "random_walk_select",
    "render_prompt",
    "sequence_reverse",
    "skip_probability",
    "tanimoto",
    "truncate_to_cutoff",
]
