"""ARIMA(p, d, q) with conditional-sum-of-squares estimation and AIC order search.

Estimation minimizes the conditional sum of squares over (ar, ma, intercept)
with the Nelder-Mead simplex. Pre-sample residuals are fixed at zero and the
first max(p, q) points of the differenced series are burn-in, excluded from
the loss. Candidate parameter vectors whose AR or MA polynomial has a root
strictly inside the unit circle are penalized by 1e6 during the search.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np
from numba import njit

from popcast.forecasters.base import ArimaConfig, Forecaster
from popcast.numerics import nelder_mead

__all__ = [
    "ArimaModel",
    "ArimaForecaster",
    "difference",
    "undifference",
    "arima_css",
    "arima_fit",
    "arima_select_order",
    "arima_forecast",
    "arima_aic",
]


def difference(values: Sequence[float], d: int) -> np.ndarray:
    """Apply first differences d times; output shrinks by d."""
    arr = np.asarray(values, dtype=np.float64)
    if d < 0:
        raise ValueError("d must be >= 0")
    if arr.size - d < 1:
        raise ValueError(f"cannot difference {arr.size} points {d} times")
    return np.diff(arr, n=d) if d else arr.copy()


def undifference(diffed: Sequence[float], seeds: Sequence[float]) -> np.ndarray:
    """Invert ``difference`` exactly, given the first d values of the original."""
    out = np.asarray(diffed, dtype=np.float64).copy()
    seed_arr = np.asarray(seeds, dtype=np.float64)
    for k in range(seed_arr.size, 0, -1):
        head = np.diff(seed_arr, n=k - 1)[0]
        out = np.concatenate(([head], head + np.cumsum(out)))
    return out


@njit(cache=True)
def _css_residuals(w, phi, theta, c):  # pragma: no cover - compiled
    n = w.shape[0]
    p = phi.shape[0]
    q = theta.shape[0]
    m = max(p, q)
    e = np.zeros(n)
    for t in range(m, n):
        pred = c
        for i in range(p):
            pred += phi[i] * w[t - 1 - i]
        for j in range(q):
            pred += theta[j] * e[t - 1 - j]
        e[t] = w[t] - pred
    return e


def arima_css(
    params: tuple[Sequence[float], Sequence[float], float],
    series: Sequence[float],
) -> float:
    """Conditional sum of squares of one-step residuals on a differenced series."""
    phi, theta, c = params
    phi = np.asarray(phi, dtype=np.float64)
    theta = np.asarray(theta, dtype=np.float64)
    w = np.asarray(series, dtype=np.float64)
    p, q = phi.size, theta.size
    if w.size <= p + q:
        raise ValueError(f"series of length {w.size} too short for order (p={p}, q={q})")
    e = _css_residuals(w, phi, theta, float(c))
    tail = e[max(p, q):]
    return float(tail @ tail)


def _root_penalty(coefs: np.ndarray) -> float:
    # 1 - c1 z - ... - ck z^k has a root strictly inside the unit circle iff
    # the monic reciprocal z^k - c1 z^(k-1) - ... - ck has one strictly outside.
    if coefs.size == 0:
        return 0.0
    if np.sum(np.abs(coefs)) < 1.0:  # sufficient condition for all roots outside
        return 0.0
    if not np.all(np.isfinite(coefs)):
        return 1e6
    if coefs.size == 1:
        return 1e6 if abs(coefs[0]) > 1.0 else 0.0
    if coefs.size == 2:
        # stability triangle for z^2 - c1 z - c2 over the closed unit disk
        c1, c2 = coefs
        inside = abs(c2) <= 1.0 and abs(c1) <= 1.0 - c2
        return 0.0 if inside else 1e6
    roots = np.roots(np.concatenate(([1.0], -coefs)))
    if roots.size and np.max(np.abs(roots)) > 1.0:
        return 1e6
    return 0.0


@dataclass(frozen=True)
class ArimaModel:
    """Fitted ARIMA state: coefficients plus the training context forecasts need."""

    order: tuple[int, int, int]
    ar: np.ndarray
    ma: np.ndarray
    intercept: float
    sigma2: float
    css: float
    n_effective: int
    diffed: np.ndarray  # differenced training series
    resid: np.ndarray  # residuals aligned to diffed, zeros over the burn-in
    tail: np.ndarray  # last d original training values, for undifferencing


def arima_fit(
    series: Sequence[float],
    order: tuple[int, int, int],
    max_iters: int = 500,
    tolerance: float = 1e-7,
) -> ArimaModel:
    """Fit one (p, d, q) candidate by CSS minimization.

    The search starts from zero coefficients with the intercept at the mean of
    the differenced series.
    """
    p, d, q = order
    arr = np.asarray(series, dtype=np.float64)
    if arr.size <= p + q + d + 2:
        raise ValueError(
            f"series of length {arr.size} too short for order (p={p}, d={d}, q={q})"
        )
    w = difference(arr, d)

    def objective(x: np.ndarray) -> float:
        phi, theta, c = x[:p], x[p : p + q], x[-1]
        loss = arima_css((phi, theta, c), w)
        return loss + _root_penalty(phi) + _root_penalty(theta)

    x0 = np.zeros(p + q + 1)
    x0[-1] = w.mean()
    x_best, _ = nelder_mead(objective, x0, max_iters=max_iters, tolerance=tolerance)

    phi = x_best[:p].copy()
    theta = x_best[p : p + q].copy()
    c = float(x_best[-1])
    e = _css_residuals(w, phi, theta, c)
    m = max(p, q)
    css = float(e[m:] @ e[m:])
    n_eff = w.size - m
    return ArimaModel(
        order=(p, d, q),
        ar=phi,
        ma=theta,
        intercept=c,
        sigma2=css / n_eff,
        css=css,
        n_effective=n_eff,
        diffed=w,
        resid=e,
        tail=arr[arr.size - d :] if d else np.empty(0),
    )


def arima_aic(model: ArimaModel) -> float:
    """AIC with k = p + q + 1 parameters (intercept counted)."""
    p, _, q = model.order
    return model.n_effective * np.log(max(model.sigma2, 1e-300)) + 2.0 * (p + q + 1)


def arima_select_order(series: Sequence[float], config: ArimaConfig) -> tuple[int, int, int]:
    """Exhaustive AIC argmin over the (p, d, q) grid.

    Ties break to the smaller p + q + d, then lexicographic (p, d, q).
    Candidates the series is too short for are skipped.
    """
    n = len(series)
    best: tuple[float, int, tuple[int, int, int]] | None = None
    for p in range(config.max_p + 1):
        for d in range(config.max_d + 1):
            for q in range(config.max_q + 1):
                if n <= p + q + d + 2:
                    continue
                model = arima_fit(series, (p, d, q))
                candidate = (arima_aic(model), p + q + d, (p, d, q))
                if best is None or candidate < best:
                    best = candidate
    if best is None:
        raise ValueError(f"series of length {n} too short for every candidate order")
    return best[2]


def arima_forecast(model: ArimaModel, horizon: int) -> np.ndarray:
    """Recursive multi-step forecast with future residuals at zero, undifferenced."""
    if horizon < 1:
        raise ValueError("horizon must be >= 1")
    p, d, q = model.order
    w_hist = list(model.diffed)
    e_hist = list(model.resid)
    fc = []
    for _ in range(horizon):
        pred = model.intercept
        for i in range(p):
            pred += model.ar[i] * w_hist[-1 - i]
        for j in range(q):
            pred += model.ma[j] * e_hist[-1 - j]
        fc.append(pred)
        w_hist.append(pred)
        e_hist.append(0.0)
    out = np.asarray(fc, dtype=np.float64)
    for k in range(d - 1, -1, -1):
        last = np.diff(model.tail, n=k)[-1]
        out = last + np.cumsum(out)
    return out


class ArimaForecaster(Forecaster):
    """Order selection plus fit behind the uniform forecaster surface."""

    name = "arima"

    def __init__(self, config: ArimaConfig = ArimaConfig()):
        self.config = config
        self.model: ArimaModel | None = None

    def fit(self, values: Sequence[float]) -> "ArimaForecaster":
        order = arima_select_order(values, self.config)
        self.model = arima_fit(values, order)
        return self

    def predict(self, horizon: int) -> np.ndarray:
        if self.model is None:
            raise RuntimeError("predict before fit")
        if horizon == 0:
            return np.empty(0)
        return arima_forecast(self.model, horizon)
