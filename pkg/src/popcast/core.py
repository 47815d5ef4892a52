"""Domain types for annual population series: keys, normalization, chronological splits.

All types here are immutable after construction and safe to share across
threads; every operation is a pure function of its inputs.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from typing import Sequence

import numpy as np

__all__ = [
    "State",
    "Race",
    "SeriesKey",
    "AnnualSeries",
    "NormParams",
    "SplitSpec",
    "ALL_KEYS",
    "make_series",
    "temporal_split",
    "minmax_fit",
    "minmax_apply",
    "minmax_invert",
]


class State(Enum):
    AL = "AL"
    CA = "CA"
    HI = "HI"
    NY = "NY"
    TX = "TX"
    WY = "WY"


class Race(Enum):
    WHITE = "White"
    BLACK = "Black"
    AMERICAN_INDIAN = "AmericanIndian"
    ASIAN = "Asian"
    HAWAIIAN = "Hawaiian"


@dataclass(frozen=True, order=True)
class SeriesKey:
    """One (state, race) population series identity. Exactly 30 keys exist."""

    state: State
    race: Race

    def __str__(self) -> str:
        return f"{self.state.value}/{self.race.value}"

    @staticmethod
    def parse(text: str) -> "SeriesKey":
        state_code, _, race_code = text.partition("/")
        try:
            return SeriesKey(State(state_code), Race(race_code))
        except ValueError:
            raise ValueError(f"not a series key: {text!r}") from None


ALL_KEYS: tuple[SeriesKey, ...] = tuple(
    SeriesKey(state, race) for state in State for race in Race
)


@dataclass(frozen=True)
class AnnualSeries:
    """Yearly population counts at annual frequency with no gaps.

    The observation at index i belongs to calendar year ``start_year + i``.
    """

    key: SeriesKey
    start_year: int
    values: tuple[float, ...]

    def __post_init__(self) -> None:
        if len(self.values) == 0:
            raise ValueError(f"series {self.key}: empty series")
        for i, v in enumerate(self.values):
            if not math.isfinite(v):
                raise ValueError(f"series {self.key}: non-finite value {v!r} at index {i}")
            if v < 0:
                raise ValueError(f"series {self.key}: negative value {v!r} at index {i}")

    def __len__(self) -> int:
        return len(self.values)

    @property
    def end_year(self) -> int:
        return self.start_year + len(self.values) - 1

    @property
    def years(self) -> tuple[int, ...]:
        return tuple(range(self.start_year, self.start_year + len(self.values)))

    def array(self) -> np.ndarray:
        return np.asarray(self.values, dtype=np.float64)


def make_series(key: SeriesKey, start_year: int, values: Sequence[float]) -> AnnualSeries:
    """Validate and build an AnnualSeries covering start_year onward."""
    return AnnualSeries(key=key, start_year=int(start_year), values=tuple(float(v) for v in values))


@dataclass(frozen=True)
class SplitSpec:
    """Chronological train/test boundary. Test years immediately follow training."""

    train_end_year: int = 2016
    test_start_year: int = 2017
    test_end_year: int = 2022

    def __post_init__(self) -> None:
        if self.test_start_year != self.train_end_year + 1:
            raise ValueError(
                f"test_start_year must equal train_end_year + 1, got "
                f"{self.test_start_year} after {self.train_end_year}"
            )
        if self.test_end_year < self.test_start_year:
            raise ValueError(
                f"test_end_year {self.test_end_year} precedes test_start_year {self.test_start_year}"
            )


def temporal_split(series: AnnualSeries, spec: SplitSpec) -> tuple[AnnualSeries, AnnualSeries]:
    """Split a series into (train, test) halves around the spec boundary.

    Train holds every point with year <= train_end_year, test holds points
    inside [test_start_year, test_end_year]; points after test_end_year are
    dropped. Raises if either side would be empty.
    """
    train_vals = [v for year, v in zip(series.years, series.values) if year <= spec.train_end_year]
    test_vals = [
        v
        for year, v in zip(series.years, series.values)
        if spec.test_start_year <= year <= spec.test_end_year
    ]
    if not train_vals:
        raise ValueError(f"series {series.key}: no training points at or before {spec.train_end_year}")
    if not test_vals:
        raise ValueError(
            f"series {series.key}: no test points inside "
            f"[{spec.test_start_year}, {spec.test_end_year}]"
        )
    train = AnnualSeries(series.key, series.start_year, tuple(train_vals))
    test_start = max(series.start_year, spec.test_start_year)
    test = AnnualSeries(series.key, test_start, tuple(test_vals))
    return train, test


@dataclass(frozen=True)
class NormParams:
    """Min-max scaling parameters fitted on a training window."""

    min_value: float
    max_value: float
    degenerate: bool

    def __post_init__(self) -> None:
        if self.max_value < self.min_value:
            raise ValueError(f"max_value {self.max_value} < min_value {self.min_value}")
        if self.degenerate != (self.max_value == self.min_value):
            raise ValueError("degenerate flag inconsistent with min/max")

    @property
    def span(self) -> float:
        return self.max_value - self.min_value


def minmax_fit(train: AnnualSeries) -> NormParams:
    """Fit min-max normalization on training values only (no test leakage)."""
    lo = min(train.values)
    hi = max(train.values)
    return NormParams(min_value=lo, max_value=hi, degenerate=lo == hi)


def _check_finite(values: Sequence[float]) -> np.ndarray:
    arr = np.asarray(values, dtype=np.float64)
    if arr.size and not np.all(np.isfinite(arr)):
        bad = int(np.flatnonzero(~np.isfinite(arr))[0])
        raise ValueError(f"non-finite value at index {bad}")
    return arr


def minmax_apply(params: NormParams, values: Sequence[float]) -> np.ndarray:
    """Map persons to the unit interval; out-of-range inputs pass through unclamped.

    Degenerate (constant-training) params map every value to 0.0.
    """
    arr = _check_finite(values)
    if params.degenerate:
        return np.zeros_like(arr)
    return (arr - params.min_value) / params.span


def minmax_invert(params: NormParams, normalized: Sequence[float]) -> np.ndarray:
    """Exact inverse of minmax_apply; degenerate params return the constant."""
    arr = _check_finite(normalized)
    if params.degenerate:
        return np.full_like(arr, params.min_value)
    return arr * params.span + params.min_value
