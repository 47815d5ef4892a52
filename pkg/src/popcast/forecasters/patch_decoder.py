"""Toy decoder-only transformer over value patches with a multi-step output head.

The context is tokenized into fixed-width patches, embedded with an affine
map plus a learned positional term, and run through causal multi-head
self-attention blocks (pre-norm, residual). The final patch token maps to
``output_patch`` future values at once; callers keep the first ``horizon``.

Positional indices count backward from the most recent patch, so left-padding
a context with fully-masked patches cannot shift any real token's position:
padded patches are also excluded from attention as keys, which makes the
output invariant to such padding.
"""

from __future__ import annotations

from typing import Sequence

import numpy as np

from popcast.forecasters.base import FitDivergedError, Forecaster, PatchDecoderConfig, derive_rng
from popcast.numerics import (
    AdamState,
    Tensor,
    adam_step,
    affine,
    backward,
    concat,
    constant,
    layer_norm,
    mse_loss,
    parameter,
    zero_grads,
)

__all__ = ["patchify", "PatchDecoderForecaster"]

_MASK_BIAS = -1e30  # exp() underflows to exactly 0 after max-subtraction


def patchify(context: Sequence[float], input_patch: int) -> tuple[np.ndarray, np.ndarray]:
    """Left-pad with zeros to a multiple of input_patch and split into patches.

    Returns (patches, mask): patches is (num_patches, input_patch) oldest
    first, mask flags each position as real (True) or padding (False).
    """
    arr = np.asarray(context, dtype=np.float64)
    if input_patch < 1:
        raise ValueError("input_patch must be >= 1")
    if arr.size == 0:
        raise ValueError("empty context")
    num_patches = -(-arr.size // input_patch)
    pad = num_patches * input_patch - arr.size
    padded = np.concatenate([np.zeros(pad), arr])
    mask = np.concatenate([np.zeros(pad, dtype=bool), np.ones(arr.size, dtype=bool)])
    return padded.reshape(num_patches, input_patch), mask


class _DecoderLayer:
    def __init__(self, dim: int, heads: int, rng: np.random.Generator):
        self.heads = heads
        self.head_dim = dim // heads
        self.ln1_g = Tensor(np.ones(dim), requires_grad=True)
        self.ln1_b = Tensor(np.zeros(dim), requires_grad=True)
        self.wq = parameter((dim, dim), rng=rng, fan_in=dim)
        self.wk = parameter((dim, dim), rng=rng, fan_in=dim)
        self.wv = parameter((dim, dim), rng=rng, fan_in=dim)
        self.wo = parameter((dim, dim), rng=rng, fan_in=dim)
        self.bq = Tensor(np.zeros(dim), requires_grad=True)
        self.bk = Tensor(np.zeros(dim), requires_grad=True)
        self.bv = Tensor(np.zeros(dim), requires_grad=True)
        self.bo = Tensor(np.zeros(dim), requires_grad=True)
        self.ln2_g = Tensor(np.ones(dim), requires_grad=True)
        self.ln2_b = Tensor(np.zeros(dim), requires_grad=True)
        hidden = 4 * dim
        self.ffn1_w = parameter((dim, hidden), rng=rng, fan_in=dim)
        self.ffn1_b = Tensor(np.zeros(hidden), requires_grad=True)
        self.ffn2_w = parameter((hidden, dim), rng=rng, fan_in=hidden)
        self.ffn2_b = Tensor(np.zeros(dim), requires_grad=True)

    def params(self) -> list[Tensor]:
        return [
            self.ln1_g, self.ln1_b,
            self.wq, self.bq, self.wk, self.bk, self.wv, self.bv, self.wo, self.bo,
            self.ln2_g, self.ln2_b,
            self.ffn1_w, self.ffn1_b, self.ffn2_w, self.ffn2_b,
        ]

    def forward(self, x: Tensor, attn_bias: np.ndarray) -> Tensor:
        normed = layer_norm(x, self.ln1_g, self.ln1_b)
        q = affine(normed, self.wq, self.bq)
        k = affine(normed, self.wk, self.bk)
        v = affine(normed, self.wv, self.bv)
        scale = 1.0 / np.sqrt(self.head_dim)
        bias = constant(attn_bias)
        head_outs = []
        for h in range(self.heads):
            lo, hi = h * self.head_dim, (h + 1) * self.head_dim
            qh, kh, vh = q[:, :, lo:hi], k[:, :, lo:hi], v[:, :, lo:hi]
            scores = (qh @ kh.swapaxes(1, 2)) * scale + bias
            head_outs.append(scores.softmax() @ vh)
        attended = affine(concat(head_outs, axis=2), self.wo, self.bo)
        x = x + attended
        normed = layer_norm(x, self.ln2_g, self.ln2_b)
        ffn = affine(affine(normed, self.ffn1_w, self.ffn1_b).relu(), self.ffn2_w, self.ffn2_b)
        return x + ffn


class PatchDecoderForecaster(Forecaster):
    name = "patchtf"

    def __init__(self, config: PatchDecoderConfig = PatchDecoderConfig()):
        self.config = config
        self._built = False
        self.final_loss: float | None = None

    # -- model assembly --

    def _build(self, rng: np.random.Generator) -> None:
        cfg = self.config
        self._embed_w = parameter((cfg.input_patch, cfg.model_dim), rng=rng, fan_in=cfg.input_patch)
        self._embed_b = Tensor(np.zeros(cfg.model_dim), requires_grad=True)
        self._pos = parameter(
            (cfg.context_length // cfg.input_patch, cfg.model_dim), rng=rng, fan_in=cfg.model_dim
        )
        self._layers = [
            _DecoderLayer(cfg.model_dim, cfg.attention_heads, rng) for _ in range(cfg.decoder_layers)
        ]
        self._final_g = Tensor(np.ones(cfg.model_dim), requires_grad=True)
        self._final_b = Tensor(np.zeros(cfg.model_dim), requires_grad=True)
        self._head_w = parameter((cfg.model_dim, cfg.output_patch), rng=rng, fan_in=cfg.model_dim)
        self._head_b = Tensor(np.zeros(cfg.output_patch), requires_grad=True)
        self._built = True

    def params(self) -> list[Tensor]:
        params = [self._embed_w, self._embed_b, self._pos]
        for layer in self._layers:
            params.extend(layer.params())
        params.extend([self._final_g, self._final_b, self._head_w, self._head_b])
        return params

    # -- forward --

    def _positional(self, num_patches: int) -> Tensor:
        # Index backward from the newest patch; clamp indices past the table
        # (only reachable by prepended padding, which attention ignores anyway).
        table_size = self._pos.shape[0]
        rows = []
        for i in range(num_patches):
            idx = min(num_patches - 1 - i, table_size - 1)
            rows.append(self._pos[idx].reshape(1, -1))
        return concat(rows, axis=0)

    def forward_batch(self, patches: np.ndarray, patch_valid: np.ndarray) -> Tensor:
        """patches: (batch, num_patches, input_patch); patch_valid: (batch, num_patches) bool."""
        if not self._built:
            raise RuntimeError("forward before fit or init")
        batch, num_patches, _ = patches.shape
        if not patch_valid.any(axis=1).all():
            raise ValueError("all positions masked for at least one sample")

        causal = np.tril(np.ones((num_patches, num_patches), dtype=bool))
        allowed = causal[None, :, :] & patch_valid[:, None, :]
        attn_bias = np.where(allowed, 0.0, _MASK_BIAS)

        x = affine(constant(patches), self._embed_w, self._embed_b)
        x = x + self._positional(num_patches).reshape(1, num_patches, -1)
        for layer in self._layers:
            x = layer.forward(x, attn_bias)
        x = layer_norm(x, self._final_g, self._final_b)
        final_token = x[:, num_patches - 1, :]
        return affine(final_token, self._head_w, self._head_b)

    def forward(self, patches: np.ndarray, mask: np.ndarray) -> np.ndarray:
        """Single-context forward pass; returns all output_patch values."""
        valid = mask.reshape(patches.shape[0], -1).any(axis=1)
        out = self.forward_batch(patches[None, :, :], valid[None, :])
        return out.data[0].copy()

    # -- training --

    def init_params(self, seed: int = 0) -> "PatchDecoderForecaster":
        """Random initialization without training (used for forward-only checks)."""
        self._build(derive_rng(seed, self.name))
        return self

    def _samples(self, series_set: Sequence[np.ndarray]) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        cfg = self.config
        contexts, valids, targets = [], [], []
        for series in series_set:
            arr = np.asarray(series, dtype=np.float64)
            if arr.size < 2:
                raise ValueError("every training series needs at least 2 points")
            for split in range(1, arr.size - cfg.horizon + 1):
                ctx = arr[max(0, split - cfg.context_length) : split]
                padded = np.concatenate([np.zeros(cfg.context_length - ctx.size), ctx])
                pmask = np.arange(cfg.context_length) >= (cfg.context_length - ctx.size)
                num_patches = cfg.context_length // cfg.input_patch
                contexts.append(padded.reshape(num_patches, cfg.input_patch))
                valids.append(pmask.reshape(num_patches, cfg.input_patch).any(axis=1))
                targets.append(arr[split : split + cfg.horizon])
        if not contexts:
            raise ValueError("no training samples: series too short for the horizon")
        return np.stack(contexts), np.stack(valids), np.stack(targets)

    def fit(self, series_set: Sequence[Sequence[float]], seed: int = 0) -> "PatchDecoderForecaster":
        cfg = self.config
        rng = derive_rng(seed, self.name)
        self._build(rng)
        x, valid, y = self._samples([np.asarray(s, dtype=np.float64) for s in series_set])
        n = x.shape[0]

        params = self.params()
        state = AdamState.for_params([p.data for p in params])
        step_rng = derive_rng(seed, self.name, "batches")
        for epoch in range(cfg.epochs):
            order = step_rng.permutation(n)
            for start in range(0, n, cfg.batch_size):
                idx = order[start : start + cfg.batch_size]
                zero_grads(params)
                out = self.forward_batch(x[idx], valid[idx])
                loss = mse_loss(out[:, : cfg.horizon], constant(y[idx]))
                if not np.isfinite(loss.data):
                    raise FitDivergedError(epoch, float(loss.data))
                backward(loss)
                new_data, state = adam_step(
                    [p.data for p in params], [p.grad for p in params], state, cfg.learning_rate
                )
                for p, d in zip(params, new_data):
                    p.data = d
        full = self.forward_batch(x, valid)
        self.final_loss = float(mse_loss(full[:, : cfg.horizon], constant(y)).data)
        return self

    def predict(self, context: Sequence[float], horizon: int | None = None) -> np.ndarray:
        """Forecast ``horizon`` values from the last context_length observations."""
        cfg = self.config
        h = cfg.horizon if horizon is None else horizon
        if h == 0:
            return np.empty(0)
        if h > cfg.output_patch:
            raise ValueError(f"horizon {h} exceeds output_patch {cfg.output_patch}")
        arr = np.asarray(context, dtype=np.float64)
        patches, mask = patchify(arr[-cfg.context_length :], cfg.input_patch)
        return self.forward(patches, mask)[:h].copy()
