"""Tiny character-level causal transformer (well under the 5M parameter
desk-scale bound)."""

from __future__ import annotations

import math

import torch
import torch.nn as nn
import torch.nn.functional as F


class Block(nn.Module):
    def __init__(self, width: int, heads: int) -> None:
        super().__init__()
        self.ln1 = nn.LayerNorm(width)
        self.attn = nn.MultiheadAttention(width, heads, batch_first=True)
        self.ln2 = nn.LayerNorm(width)
        self.mlp = nn.Sequential(
            nn.Linear(width, 4 * width),
            nn.GELU(),
            nn.Linear(4 * width, width),
        )

    def forward(self, x: torch.Tensor, attn_mask: torch.Tensor,
                pad_mask: torch.Tensor | None) -> torch.Tensor:
        h = self.ln1(x)
        attn_out, _ = self.attn(h, h, h, attn_mask=attn_mask,
                                key_padding_mask=pad_mask, need_weights=False)
        x = x + attn_out
        return x + self.mlp(self.ln2(x))


class TinyCausalLM(nn.Module):
    def __init__(self, vocab_size: int, width: int = 128, heads: int = 4,
                 layers: int = 2, max_len: int = 512) -> None:
        super().__init__()
        self.max_len = max_len
        self.tok = nn.Embedding(vocab_size, width)
        self.pos = nn.Embedding(max_len, width)
        self.blocks = nn.ModuleList(Block(width, heads) for _ in range(layers))
        self.ln_out = nn.LayerNorm(width)
        self.head = nn.Linear(width, vocab_size, bias=False)

    def parameter_count(self) -> int:
        return sum(p.numel() for p in self.parameters())

    def forward(self, tokens: torch.Tensor,
                pad_mask: torch.Tensor | None = None) -> torch.Tensor:
        """tokens: (batch, length) -> logits (batch, length, vocab)."""
        batch, length = tokens.shape
        if length > self.max_len:
            raise ValueError(f"sequence length {length} exceeds max_len {self.max_len}")
        positions = torch.arange(length, device=tokens.device)
        x = self.tok(tokens) + self.pos(positions)[None, :, :]
        causal = torch.ones((length, length), dtype=torch.bool,
                            device=tokens.device).triu(1)
        for block in self.blocks:
            x = block(x, causal, pad_mask)
        return self.head(self.ln_out(x))

    @torch.no_grad()
    def greedy_decode(self, prefix: list[int], eos_id: int,
                      max_new: int = 24) -> list[int]:
        tokens = list(prefix)
        for _ in range(max_new):
            window = tokens[-self.max_len:]
            inp = torch.tensor([window], dtype=torch.long)
            logits = self.forward(inp)
            nxt = int(logits[0, -1].argmax())
            if nxt == eos_id:
                break
            tokens.append(nxt)
        return tokens[len(prefix):]
