"""Linear trend extrapolation: least squares on calendar year."""

from __future__ import annotations

from typing import Sequence

import numpy as np

from popcast.forecasters.base import Forecaster
from popcast.numerics import ols_fit

__all__ = ["LinearTrendForecaster"]


class LinearTrendForecaster(Forecaster):
    """Fits value = slope * year + intercept and extrapolates past training."""

    name = "lr"

    def __init__(self) -> None:
        self.slope: float | None = None
        self.intercept: float | None = None
        self._next_year: int | None = None

    def fit(self, years: Sequence[int], values: Sequence[float]) -> "LinearTrendForecaster":
        if len(years) < 2:
            raise ValueError("linear trend needs at least 2 training points")
        self.slope, self.intercept = ols_fit(np.asarray(years, float), values)
        self._next_year = int(years[-1]) + 1
        return self

    def predict(self, horizon: int) -> np.ndarray:
        if self.slope is None:
            raise RuntimeError("predict before fit")
        years = self._next_year + np.arange(horizon, dtype=np.float64)
        return self.slope * years + self.intercept
