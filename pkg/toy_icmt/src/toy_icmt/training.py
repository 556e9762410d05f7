"""Masked training loop realizing the two fine-tuning objectives.

Both mask modes train on identical prompts; they differ only in which
characters carry loss. ``sft`` supervises the query target alone, ``icma``
additionally supervises every context target, so the in-context variant
receives denser gradient on exactly the copy-relevant spans.

The optimizer also supervises the end-of-sequence token whenever the prompt
ends in an active segment (so generation learns to stop); the per-record
losses reported for cross-checking cover only the rendered text, matching
the context engine's loss computation over exported logprobs.
"""

from __future__ import annotations

import csv
import random
from dataclasses import asdict, dataclass
from pathlib import Path

import torch
import torch.nn.functional as F

from .model import TinyCausalLM
from .records import PromptRecord, Vocab

PARAM_BUDGET = 5_000_000


@dataclass(frozen=True)
class ToyTrainConfig:
    width: int = 128
    heads: int = 4
    layers: int = 2
    max_len: int = 512
    epochs: int = 6
    batch_size: int = 16
    lr: float = 3e-4
    mask_mode: str = "sft"  # sft | icma
    seed: int = 0

    def __post_init__(self) -> None:
        if self.mask_mode not in ("sft", "icma"):
            raise ValueError(f"mask_mode must be sft or icma, got {self.mask_mode!r}")


@dataclass
class TrainResult:
    checkpoint_path: Path
    loss_curve_path: Path
    epoch_losses: list[float]
    parameter_count: int


def encode_batch(records: list[PromptRecord], vocab: Vocab, mode: str,
                 device: torch.device = torch.device("cpu")):
    """Tensors for one batch: tokens, shifted loss mask, padding mask.

    Sequences are BOS + rendered + EOS; the loss mask marks shifted target
    positions (rendered char i sits at shifted position i, EOS at position
    len(rendered)) and is True where the mode supervises them.
    """
    max_len = max(len(r.rendered) for r in records) + 2
    tokens = torch.full((len(records), max_len), vocab.pad_id, dtype=torch.long)
    loss_mask = torch.zeros((len(records), max_len - 1), dtype=torch.bool)
    pad_mask = torch.ones((len(records), max_len), dtype=torch.bool)
    for row, record in enumerate(records):
        ids = [vocab.bos_id] + vocab.encode(record.rendered) + [vocab.eos_id]
        tokens[row, : len(ids)] = torch.tensor(ids, dtype=torch.long)
        pad_mask[row, : len(ids)] = False
        active = record.active_mask(mode)
        for i, is_active in enumerate(active):
            loss_mask[row, i] = is_active
        if active and active[-1]:
            loss_mask[row, len(active)] = True  # supervise the closing EOS
    return tokens.to(device), loss_mask.to(device), pad_mask.to(device)


def masked_nll(logits: torch.Tensor, tokens: torch.Tensor,
               loss_mask: torch.Tensor) -> tuple[torch.Tensor, int]:
    """Total negative log-likelihood over masked positions and their count."""
    shifted_logits = logits[:, :-1, :]
    targets = tokens[:, 1:]
    nll = F.cross_entropy(shifted_logits.reshape(-1, shifted_logits.size(-1)),
                          targets.reshape(-1), reduction="none")
    nll = nll.reshape(targets.shape)
    selected = nll[loss_mask]
    return selected.sum(), int(loss_mask.sum())


def train_toy(dataset_path: str | Path, cfg: ToyTrainConfig,
              out_dir: str | Path, vocab: Vocab | None = None,
              records: list[PromptRecord] | None = None) -> TrainResult:
    """Fine-tune a fresh tiny model on an emitted JSONL dataset.

    Saves a checkpoint (weights + vocab + config) and a per-epoch loss curve
    CSV; training is deterministic for a fixed config on CPU.
    """
    from .records import load_records

    torch.manual_seed(cfg.seed)
    torch.set_num_threads(4)
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)

    if records is None:
        records = load_records(dataset_path)
    if not records:
        raise ValueError(f"{dataset_path}: no records")
    for record in records:
        if not record.segments:
            raise ValueError(f"record {record.id}: no loss segments")
        if record.target_span() is None:
            raise ValueError(f"record {record.id}: no query_target segment; "
                             "train on a train-split dataset")
    if vocab is None:
        vocab = Vocab.build([r.rendered for r in records])

    model = TinyCausalLM(vocab.size, width=cfg.width, heads=cfg.heads,
                         layers=cfg.layers, max_len=cfg.max_len)
    n_params = model.parameter_count()
    if n_params > PARAM_BUDGET:
        raise ValueError(f"model has {n_params} parameters, desk-scale bound "
                         f"is {PARAM_BUDGET}")

    optimizer = torch.optim.AdamW(model.parameters(), lr=cfg.lr)
    order_rng = random.Random(cfg.seed)
    epoch_losses: list[float] = []

    model.train()
    for _ in range(cfg.epochs):
        shuffled = list(records)
        order_rng.shuffle(shuffled)
        total, count = 0.0, 0
        for start in range(0, len(shuffled), cfg.batch_size):
            batch = shuffled[start : start + cfg.batch_size]
            tokens, loss_mask, pad_mask = encode_batch(batch, vocab, cfg.mask_mode)
            logits = model(tokens, pad_mask)
            nll_sum, n = masked_nll(logits, tokens, loss_mask)
            if n == 0:
                continue
            loss = nll_sum / n
            optimizer.zero_grad()
            loss.backward()
            optimizer.step()
            total += float(nll_sum.detach())
            count += n
        epoch_losses.append(total / count if count else float("nan"))

    curve_path = out_dir / f"loss_curve_{cfg.mask_mode}.csv"
    with curve_path.open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["epoch", "mean_masked_nll"])
        for epoch, value in enumerate(epoch_losses, start=1):
            writer.writerow([epoch, f"{value:.6f}"])

    checkpoint_path = out_dir / f"model_{cfg.mask_mode}.pt"
    torch.save({"state_dict": model.state_dict(), "vocab_chars": vocab.chars,
                "config": asdict(cfg)}, checkpoint_path)
    return TrainResult(checkpoint_path=checkpoint_path,
                       loss_curve_path=curve_path,
                       epoch_losses=epoch_losses,
                       parameter_count=n_params)


def load_checkpoint(path: str | Path) -> tuple[TinyCausalLM, Vocab, ToyTrainConfig]:
    payload = torch.load(path, map_location="cpu", weights_only=False)
    cfg = ToyTrainConfig(**payload["config"])
    vocab = Vocab(payload["vocab_chars"])
    model = TinyCausalLM(vocab.size, width=cfg.width, heads=cfg.heads,
                         layers=cfg.layers, max_len=cfg.max_len)
    model.load_state_dict(payload["state_dict"])
    model.eval()
    return model, vocab, cfg


@torch.no_grad()
def record_rendered_losses(model: TinyCausalLM, records: list[PromptRecord],
                           vocab: Vocab, mode: str) -> dict[str, float]:
    """Per-record sum of -log p over active rendered characters.

    This is exactly what the context engine's loss computation yields when
    fed this model's exported per-character logprobs, excluding the EOS
    position (which lies outside the rendered text).
    """
    model.eval()
    out: dict[str, float] = {}
    for record in records:
        tokens, loss_mask, pad_mask = encode_batch([record], vocab, mode)
        loss_mask[0, len(record.rendered)] = False  # drop the EOS position
        logits = model(tokens, pad_mask)
        nll_sum, _ = masked_nll(logits, tokens, loss_mask)
        out[record.id] = float(nll_sum)
    return out


@torch.no_grad()
def export_logprobs(model: TinyCausalLM, records: list[PromptRecord],
                    vocab: Vocab, path: str | Path) -> None:
    """Write per-character logprobs in the engine's logprob file format:
    one JSON object {id, tokens: [[start, end, logprob], ...]} per line."""
    import json

    model.eval()
    with Path(path).open("w", encoding="utf-8") as fh:
        for record in records:
            tokens, _, pad_mask = encode_batch([record], vocab, "sft")
            logits = model(tokens, pad_mask)
            logprobs = F.log_softmax(logits[0], dim=-1)
            spans = []
            for i in range(len(record.rendered)):
                target_id = int(tokens[0, i + 1])
                spans.append([i, i + 1, float(logprobs[i, target_id])])
            fh.write(json.dumps({"id": record.id, "tokens": spans}) + "\n")
