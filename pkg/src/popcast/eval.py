"""Metrics, leaderboard assembly, and win-rate summaries.

MSE is computed on denormalized person counts, matching the magnitudes a
population benchmark reports. Percent errors display at two decimals with
half-away-from-zero rounding; the unrounded value is kept for computation.
"""

from __future__ import annotations

import decimal
import json
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from popcast.core import SeriesKey

__all__ = [
    "ForecastResult",
    "Leaderboard",
    "mse",
    "percent_error",
    "format_percent",
    "build_leaderboard",
    "win_rate",
    "leaderboard_to_csv",
    "leaderboard_to_json",
]


def mse(actual: Sequence[float], predicted: Sequence[float]) -> float:
    """Mean of squared differences; zero iff the lists are identical."""
    a = np.asarray(actual, dtype=np.float64)
    p = np.asarray(predicted, dtype=np.float64)
    if a.shape != p.shape:
        raise ValueError(f"length mismatch: {a.size} actual vs {p.size} predicted")
    if a.size == 0:
        raise ValueError("mse of empty lists")
    if not (np.all(np.isfinite(a)) and np.all(np.isfinite(p))):
        raise ValueError("non-finite values in mse input")
    d = a - p
    return float(d @ d) / a.size


def percent_error(predicted: float, actual: float) -> float:
    """Signed percentage 100 * (predicted - actual) / actual, unrounded."""
    if actual == 0:
        raise ValueError("percent_error undefined for actual = 0")
    return 100.0 * (predicted - actual) / actual


def format_percent(value: float) -> str:
    """Two-decimal display with half-away-from-zero rounding, signed when nonzero."""
    rounded = decimal.Decimal(repr(float(value))).quantize(
        decimal.Decimal("0.01"), rounding=decimal.ROUND_HALF_UP
    )
    if rounded > 0:
        return f"+{rounded}%"
    return f"{rounded}%"


@dataclass(frozen=True)
class ForecastResult:
    """Predicted vs actual person counts for one (series, model) cell."""

    key: SeriesKey
    model_name: str
    years: tuple[int, ...]
    predicted: tuple[float, ...]
    actual: tuple[float, ...]

    def __post_init__(self) -> None:
        if not (len(self.predicted) == len(self.actual) == len(self.years)):
            raise ValueError(
                f"{self.key}/{self.model_name}: years, predicted and actual must align"
            )
        values = np.asarray(self.predicted + self.actual, dtype=np.float64)
        if values.size and not np.all(np.isfinite(values)):
            raise ValueError(f"{self.key}/{self.model_name}: non-finite forecast values")


@dataclass(frozen=True)
class Leaderboard:
    """Rectangular MSE matrix over (series key, model name)."""

    entries: dict[tuple[SeriesKey, str], float]
    models: tuple[str, ...]

    @property
    def keys(self) -> tuple[SeriesKey, ...]:
        seen = sorted({k for k, _ in self.entries}, key=lambda k: (k.state.value, k.race.value))
        return tuple(seen)

    def row(self, key: SeriesKey) -> dict[str, float]:
        return {m: self.entries[(key, m)] for m in self.models}


def build_leaderboard(results: Iterable[ForecastResult], models: Sequence[str]) -> Leaderboard:
    """Fill the (key x model) MSE matrix; rejects duplicate or missing cells."""
    models = tuple(models)
    entries: dict[tuple[SeriesKey, str], float] = {}
    for result in results:
        if result.model_name not in models:
            raise ValueError(f"result for unregistered model {result.model_name!r}")
        cell = (result.key, result.model_name)
        if cell in entries:
            raise ValueError(f"duplicate cell ({result.key}, {result.model_name})")
        entries[cell] = mse(result.actual, result.predicted)
    keys = {k for k, _ in entries}
    for key in keys:
        for model in models:
            if (key, model) not in entries:
                raise ValueError(f"missing cell ({key}, {model})")
    return Leaderboard(entries=entries, models=models)


def win_rate(board: Leaderboard, model: str) -> tuple[int, int, float]:
    """(wins, total rows, fraction) where a win is the strict row argmin.

    Exact ties award the earlier model in registration order, so summed wins
    across models always equal the number of rows.
    """
    if model not in board.models:
        raise ValueError(f"model {model!r} not registered on this leaderboard")
    wins = 0
    keys = board.keys
    for key in keys:
        row = board.row(key)
        winner = min(board.models, key=lambda m: (row[m], board.models.index(m)))
        if winner == model:
            wins += 1
    total = len(keys)
    return wins, total, wins / total if total else 0.0


def leaderboard_to_csv(board: Leaderboard) -> str:
    lines = ["state,race," + ",".join(board.models)]
    for key in board.keys:
        row = board.row(key)
        cells = ",".join(repr(row[m]) for m in board.models)
        lines.append(f"{key.state.value},{key.race.value},{cells}")
    return "\n".join(lines) + "\n"


def leaderboard_to_json(board: Leaderboard) -> str:
    rows = []
    for key in board.keys:
        row = board.row(key)
        rows.append(
            {
                "state": key.state.value,
                "race": key.race.value,
                "mse": {m: row[m] for m in board.models},
            }
        )
    summaries = {}
    for model in board.models:
        wins, total, fraction = win_rate(board, model)
        summaries[model] = {"wins": wins, "total": total, "fraction": fraction}
    doc = {"models": list(board.models), "rows": rows, "win_rates": summaries}
    return json.dumps(doc, indent=2, sort_keys=True) + "\n"
