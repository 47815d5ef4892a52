"""Dense least squares, derivative-free simplex minimization, and the Adam update."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

__all__ = ["ols_fit", "nelder_mead", "AdamState", "adam_step"]


def ols_fit(x: Sequence[float], y: Sequence[float]) -> tuple[float, float]:
    """Least-squares line through (x, y); returns (slope, intercept).

    Uses the centered closed form, so residuals satisfy sum(r) = 0 and
    sum(r * x) = 0 up to rounding.
    """
    xa = np.asarray(x, dtype=np.float64)
    ya = np.asarray(y, dtype=np.float64)
    if xa.shape != ya.shape:
        raise ValueError(f"length mismatch: {xa.shape[0]} x values vs {ya.shape[0]} y values")
    if xa.size < 2:
        raise ValueError("ols_fit needs at least 2 points")
    xm = xa.mean()
    ym = ya.mean()
    dx = xa - xm
    sxx = float(dx @ dx)
    if sxx == 0.0:
        raise ValueError("degenerate x: all values equal")
    slope = float(dx @ (ya - ym)) / sxx
    intercept = ym - slope * xm
    return slope, float(intercept)


def nelder_mead(
    objective: Callable[[np.ndarray], float],
    x0: Sequence[float],
    max_iters: int = 1000,
    tolerance: float = 1e-8,
) -> tuple[np.ndarray, float]:
    """Minimize with the Nelder-Mead simplex; returns (x_best, f_best).

    Terminates when the simplex diameter (max vertex distance from the best
    point) drops below ``tolerance`` or after ``max_iters`` iterations.
    Deterministic given identical inputs; non-finite objective values away
    from x0 are treated as +inf so the simplex retreats from them.
    """
    if max_iters < 1:
        raise ValueError("max_iters must be >= 1")
    x0 = np.asarray(x0, dtype=np.float64)
    dim = x0.size

    def f(x: np.ndarray) -> float:
        v = float(objective(x))
        return v if np.isfinite(v) else np.inf

    f0 = float(objective(x0))
    if not np.isfinite(f0):
        raise ValueError(f"objective is non-finite at x0: {f0!r}")

    # Initial simplex: perturb each coordinate, step relative to magnitude.
    verts = [x0.copy()]
    for i in range(dim):
        v = x0.copy()
        v[i] += 0.1 * abs(v[i]) if v[i] != 0.0 else 0.1
        verts.append(v)
    scores = [f0] + [f(v) for v in verts[1:]]

    alpha, gamma, rho, sigma = 1.0, 2.0, 0.5, 0.5
    for _ in range(max_iters):
        order = np.argsort(scores, kind="stable")
        verts = [verts[i] for i in order]
        scores = [scores[i] for i in order]

        diameter = max(np.max(np.abs(v - verts[0])) for v in verts[1:]) if dim else 0.0
        if diameter < tolerance:
            break

        centroid = np.mean(verts[:-1], axis=0)
        worst = verts[-1]

        reflected = centroid + alpha * (centroid - worst)
        fr = f(reflected)
        if scores[0] <= fr < scores[-2]:
            verts[-1], scores[-1] = reflected, fr
            continue
        if fr < scores[0]:
            expanded = centroid + gamma * (centroid - worst)
            fe = f(expanded)
            if fe < fr:
                verts[-1], scores[-1] = expanded, fe
            else:
                verts[-1], scores[-1] = reflected, fr
            continue
        contracted = centroid + rho * (worst - centroid)
        fc = f(contracted)
        if fc < scores[-1]:
            verts[-1], scores[-1] = contracted, fc
            continue
        # Shrink toward the best vertex.
        best = verts[0]
        verts = [best] + [best + sigma * (v - best) for v in verts[1:]]
        scores = [scores[0]] + [f(v) for v in verts[1:]]

    i_best = int(np.argmin(scores))
    return verts[i_best].copy(), float(scores[i_best])


@dataclass
class AdamState:
    """Running first/second moment estimates, one entry per parameter tensor."""

    first_moment: list[np.ndarray]
    second_moment: list[np.ndarray]
    step_count: int = 0
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8

    @staticmethod
    def for_params(params: Sequence[np.ndarray]) -> "AdamState":
        return AdamState(
            first_moment=[np.zeros_like(p) for p in params],
            second_moment=[np.zeros_like(p) for p in params],
        )


def adam_step(
    params: Sequence[np.ndarray],
    grads: Sequence[np.ndarray],
    state: AdamState,
    learning_rate: float,
) -> tuple[list[np.ndarray], AdamState]:
    """One bias-corrected Adam update; returns (new_params, new_state).

    Inputs are not mutated. Shapes of params, grads and moments must agree.
    """
    if learning_rate <= 0:
        raise ValueError("learning_rate must be positive")
    if len(params) != len(grads):
        raise ValueError(f"{len(params)} params vs {len(grads)} grads")
    for i, (p, g, m) in enumerate(zip(params, grads, state.first_moment)):
        if p.shape != g.shape or p.shape != m.shape:
            raise ValueError(f"shape mismatch at parameter {i}: {p.shape} vs {g.shape}")
        if not np.all(np.isfinite(g)):
            raise ValueError(f"non-finite gradient entries at parameter {i}")

    t = state.step_count + 1
    b1, b2 = state.beta1, state.beta2
    new_m, new_v, new_p = [], [], []
    for p, g, m, v in zip(params, grads, state.first_moment, state.second_moment):
        m2 = b1 * m + (1.0 - b1) * g
        v2 = b2 * v + (1.0 - b2) * g * g
        m_hat = m2 / (1.0 - b1**t)
        v_hat = v2 / (1.0 - b2**t)
        new_m.append(m2)
        new_v.append(v2)
        new_p.append(p - learning_rate * m_hat / (np.sqrt(v_hat) + state.eps))
    next_state = AdamState(
        first_moment=new_m,
        second_moment=new_v,
        step_count=t,
        beta1=b1,
        beta2=b2,
        eps=state.eps,
    )
    return new_p, next_state
