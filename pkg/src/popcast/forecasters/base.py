"""Forecaster interface and per-family hyperparameter records."""

from __future__ import annotations

import hashlib
from abc import ABC, abstractmethod
from dataclasses import dataclass

import numpy as np

__all__ = [
    "Forecaster",
    "FitDivergedError",
    "LinearTrendConfig",
    "ArimaConfig",
    "RecurrentConfig",
    "PatchDecoderConfig",
    "derive_rng",
]


class FitDivergedError(RuntimeError):
    """Training produced a non-finite loss; carries the offending epoch."""

    def __init__(self, epoch: int, loss: float):
        super().__init__(f"non-finite training loss {loss!r} at epoch {epoch}")
        self.epoch = epoch


class Forecaster(ABC):
    """A fitted forecaster is immutable; predict(h) is repeatable and returns h values."""

    name: str

    @abstractmethod
    def predict(self, horizon: int) -> np.ndarray: ...


@dataclass(frozen=True)
class LinearTrendConfig:
    """Plain line on calendar year; no hyperparameters."""


@dataclass(frozen=True)
class ArimaConfig:
    """Exhaustive (p, d, q) search bounds for AIC order selection."""

    max_p: int = 3
    max_q: int = 3
    max_d: int = 2

    def __post_init__(self) -> None:
        if self.max_p < 0 or self.max_q < 0 or self.max_d < 0:
            raise ValueError("search bounds must be non-negative")


@dataclass(frozen=True)
class RecurrentConfig:
    layers: int = 2
    hidden_units: int = 512
    window: int = 5
    learning_rate: float = 1e-3
    epochs: int = 72

    def __post_init__(self) -> None:
        if min(self.layers, self.hidden_units, self.window, self.epochs) < 1:
            raise ValueError("recurrent config counts must be positive")
        if self.learning_rate <= 0:
            raise ValueError("learning_rate must be positive")


@dataclass(frozen=True)
class PatchDecoderConfig:
    context_length: int = 64
    horizon: int = 12
    input_patch: int = 16
    output_patch: int = 128
    model_dim: int = 64
    attention_heads: int = 4
    decoder_layers: int = 2
    learning_rate: float = 5e-4
    batch_size: int = 64
    epochs: int = 50

    def __post_init__(self) -> None:
        counts = (
            self.context_length,
            self.horizon,
            self.input_patch,
            self.output_patch,
            self.model_dim,
            self.attention_heads,
            self.decoder_layers,
            self.batch_size,
            self.epochs,
        )
        if min(counts) < 1:
            raise ValueError("patch decoder config counts must be positive")
        if self.context_length < self.input_patch:
            raise ValueError("context_length must be >= input_patch")
        if self.model_dim % self.attention_heads != 0:
            raise ValueError("model_dim must divide evenly across attention_heads")
        if self.output_patch < self.horizon:
            raise ValueError("output_patch must cover the training horizon")
        if self.learning_rate <= 0:
            raise ValueError("learning_rate must be positive")


def derive_rng(seed: int, *labels: str) -> np.random.Generator:
    """Deterministic per-(seed, labels) RNG stream, stable across platforms.

    Fits for distinct (series, model) cells draw from independent streams, so
    concurrent execution order cannot change any output.
    """
    words = [seed & 0xFFFFFFFFFFFFFFFF]
    for label in labels:
        digest = hashlib.sha256(label.encode("utf-8")).digest()
        words.append(int.from_bytes(digest[:8], "little"))
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(words)))
