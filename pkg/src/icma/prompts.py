"""Prompt rendering, loss segments, and masked loss computation.

Prompts follow the fixed context templates byte-for-byte. For Mol2Cap every
context example renders as::

    Generate a caption for the molecule: {input}
    Caption: {target}

followed by a blank line, and the query block reads "Based on the above
examples, analyse the similarities and differences between the examples and
finally generate a caption for the molecule: {query}. \\nCaption: ". Cap2Mol
swaps caption/molecule and uses "Generate a molecule for the caption" /
"Molecule: ". Blocks are separated by exactly one blank line.

Every rendered prompt carries a segment map — (byte start, byte end, label)
triples that tile the UTF-8 encoding exactly — so a trainer can mask loss
onto the query target alone (plain supervised fine-tuning) or onto the query
target plus every context target (in-context tuning) without re-tokenizing.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

QUERY_INPUT = "query_input"
QUERY_TARGET = "query_target"
TEMPLATE = "template"
CONTEXT_INPUT_PREFIX = "context_input_"
CONTEXT_TARGET_PREFIX = "context_target_"

TASKS = ("mol2cap", "cap2mol")

_TEMPLATE_PARTS = {
    "mol2cap": {
        "example_head": "Generate a caption for the molecule: ",
        "target_head": "\nCaption: ",
        "final_head": ("Based on the above examples, analyse the similarities and "
                       "differences between the examples and finally generate a "
                       "caption for the molecule: "),
        "final_target_head": ". \nCaption: ",
    },
    "cap2mol": {
        "example_head": "Generate a molecule for the caption: ",
        "target_head": "\nMolecule: ",
        "final_head": ("Based on the above examples, analyse the similarities and "
                       "differences between the examples and finally generate a "
                       "molecule for the caption: "),
        "final_target_head": ". \nMolecule: ",
    },
}

EXAMPLE_SEPARATOR = "\n\n"


class PromptError(ValueError):
    """Invalid prompt-assembly arguments."""


class UnknownCounterError(PromptError):
    """Unit counter id not one of bytes / whitespace-words / chars."""


class CutoffTooSmallError(PromptError):
    """Query and template alone exceed the cutoff."""


class SpanMismatchError(PromptError):
    """Token spans do not tile the rendered text."""


@dataclass(frozen=True)
class ContextExample:
    """One retrieved molecule-caption pair, oriented for the task."""

    source_id: str
    input_text: str
    target_text: str
    rank: int


@dataclass(frozen=True)
class Segment:
    """Half-open byte span [start, end) of the rendered prompt's UTF-8
    encoding, carrying its loss label."""

    start: int
    end: int
    label: str


@dataclass(frozen=True)
class PromptBundle:
    task: str
    examples: tuple[ContextExample, ...]
    query_input: str
    query_target: str | None
    rendered: str
    segments: tuple[Segment, ...]

    def byte_length(self) -> int:
        return len(self.rendered.encode("utf-8"))


@dataclass(frozen=True)
class LossMaskSpec:
    """Which segment labels contribute to the loss.

    ``sft`` activates only the query target (plain supervised fine-tuning);
    ``icma`` additionally activates every context target, realizing the
    in-context tuning objective.
    """

    mode: str

    def __post_init__(self) -> None:
        if self.mode not in ("sft", "icma"):
            raise PromptError(f"mask mode must be 'sft' or 'icma', got {self.mode!r}")

    def is_active(self, label: str) -> bool:
        if label == QUERY_TARGET:
            return True
        return self.mode == "icma" and label.startswith(CONTEXT_TARGET_PREFIX)

    def active_labels(self, bundle: PromptBundle) -> frozenset[str]:
        return frozenset(s.label for s in bundle.segments if self.is_active(s.label))


def render_prompt(task: str, examples: list[ContextExample] | tuple[ContextExample, ...],
                  query_input: str, query_target: str | None = None) -> PromptBundle:
    """Render a prompt from already Sequence-Reversed examples.

    Labels context_input_i / context_target_i use 1-based positions in the
    rendered order; consecutive fixed-template pieces merge into single
    ``template`` segments so the segment list tiles the text exactly.
    """
    if task not in TASKS:
        raise PromptError(f"task must be one of {TASKS}, got {task!r}")
    if not query_input:
        raise PromptError("query_input must be non-empty")
    if query_target is not None and not query_target:
        raise PromptError("query_target, when given, must be non-empty")
    parts = _TEMPLATE_PARTS[task]

    pieces: list[tuple[str, str]] = []
    for i, ex in enumerate(examples, start=1):
        if not ex.input_text or not ex.target_text:
            raise PromptError(f"context example {ex.source_id!r} has empty text")
        pieces.append((parts["example_head"], TEMPLATE))
        pieces.append((ex.input_text, f"{CONTEXT_INPUT_PREFIX}{i}"))
        pieces.append((parts["target_head"], TEMPLATE))
        pieces.append((ex.target_text, f"{CONTEXT_TARGET_PREFIX}{i}"))
        pieces.append((EXAMPLE_SEPARATOR, TEMPLATE))
    pieces.append((parts["final_head"], TEMPLATE))
    pieces.append((query_input, QUERY_INPUT))
    pieces.append((parts["final_target_head"], TEMPLATE))
    if query_target is not None:
        pieces.append((query_target, QUERY_TARGET))

    rendered = "".join(text for text, _ in pieces)
    segments: list[Segment] = []
    pos = 0
    for text, label in pieces:
        end = pos + len(text.encode("utf-8"))
        if segments and label == TEMPLATE and segments[-1].label == TEMPLATE:
            segments[-1] = replace(segments[-1], end=end)
        else:
            segments.append(Segment(pos, end, label))
        pos = end

    return PromptBundle(task=task, examples=tuple(examples),
                        query_input=query_input, query_target=query_target,
                        rendered=rendered, segments=tuple(segments))


_COUNTERS = {
    "bytes": lambda text: len(text.encode("utf-8")),
    "whitespace-words": lambda text: len(text.split()),
    "chars": len,
}

COUNTER_IDS = tuple(sorted(_COUNTERS))


def count_units(text: str, counter: str) -> int:
    """Size of a text under a pluggable unit counter."""
    try:
        fn = _COUNTERS[counter]
    except KeyError:
        raise UnknownCounterError(
            f"counter must be one of {COUNTER_IDS}, got {counter!r}") from None
    return fn(text)


def truncate_to_cutoff(bundle: PromptBundle, cutoff: int,
                       counter: str = "whitespace-words") -> PromptBundle:
    """Drop whole context examples, farthest-from-query first, until the
    rendered prompt fits the cutoff.

    Raises CutoffTooSmall when even the example-free prompt exceeds the
    cutoff; partial example text is never emitted.
    """
    if count_units(bundle.rendered, counter) <= cutoff:
        return bundle
    bare = render_prompt(bundle.task, (), bundle.query_input, bundle.query_target)
    if count_units(bare.rendered, counter) > cutoff:
        raise CutoffTooSmallError(
            f"query and template alone exceed cutoff {cutoff} ({counter})")
    examples = list(bundle.examples)
    while examples:
        examples.pop(0)  # front of the reversed list = least similar
        candidate = render_prompt(bundle.task, examples, bundle.query_input,
                                  bundle.query_target)
        if count_units(candidate.rendered, counter) <= cutoff:
            return candidate
    return bare


def compute_loss(bundle: PromptBundle, mask: LossMaskSpec,
                 token_logprobs: list[tuple[int, int, float]]) -> float:
    """Negative log-likelihood over the masked segments.

    ``token_logprobs`` are (byte start, byte end, logprob) spans from an
    external model; they must tile the rendered text exactly. A token
    belongs to the segment containing its span midpoint, giving straddling
    tokens a total, deterministic attribution.
    """
    total_bytes = bundle.byte_length()
    pos = 0
    for start, end, _ in token_logprobs:
        if start != pos or end <= start:
            raise SpanMismatchError(
                f"token span [{start}, {end}) does not continue tiling at byte {pos}")
        pos = end
    if pos != total_bytes:
        raise SpanMismatchError(
            f"token spans cover {pos} bytes, rendered text has {total_bytes}")

    loss = 0.0
    seg_iter = iter(bundle.segments)
    seg = next(seg_iter, None)
    for start, end, logprob in token_logprobs:
        mid2 = start + end  # 2 * midpoint, kept integral
        while seg is not None and 2 * seg.end <= mid2:
            seg = next(seg_iter, None)
        if seg is not None and 2 * seg.start <= mid2 < 2 * seg.end:
            if mask.is_active(seg.label):
                loss -= logprob
    return loss
