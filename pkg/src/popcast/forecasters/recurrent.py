"""Stacked LSTM trained one-step-ahead on sliding windows, autoregressive rollout.

Windows of ``config.window`` consecutive normalized values predict the next
value; training is full-batch Adam on mean squared error. Forecasting rolls
the one-step prediction back into the window ``horizon`` times.
"""

from __future__ import annotations

from typing import Sequence

import numpy as np

from popcast.forecasters.base import FitDivergedError, Forecaster, RecurrentConfig, derive_rng
from popcast.numerics import AdamState, Tensor, adam_step, affine, backward, concat, constant, mse_loss, parameter, zero_grads

__all__ = ["make_windows", "RecurrentForecaster"]


def make_windows(values: Sequence[float], window: int) -> tuple[np.ndarray, np.ndarray]:
    """Chronological (inputs, targets): row i is values[i : i+window] -> values[i+window]."""
    arr = np.asarray(values, dtype=np.float64)
    if window < 1:
        raise ValueError("window must be >= 1")
    if arr.size < window + 1:
        raise ValueError(f"series of length {arr.size} too short for window {window}")
    count = arr.size - window
    x = np.stack([arr[i : i + window] for i in range(count)])
    y = arr[window:].copy()
    return x, y


class _LstmLayer:
    """One LSTM layer; gate order is (input, forget, cell, output)."""

    def __init__(self, in_dim: int, hidden: int, rng: np.random.Generator):
        self.hidden = hidden
        self.wx = parameter((in_dim, 4 * hidden), rng=rng, fan_in=in_dim)
        self.wh = parameter((hidden, 4 * hidden), rng=rng, fan_in=hidden)
        bias = np.zeros(4 * hidden)
        bias[hidden : 2 * hidden] = 1.0  # forget-gate bias starts open
        self.bias = Tensor(bias, requires_grad=True)

    def params(self) -> list[Tensor]:
        return [self.wx, self.wh, self.bias]

    def forward(self, seq: Tensor, batch: int, steps: int) -> Tensor:
        """seq: (batch, steps, in_dim) -> hidden sequence (batch, steps, hidden)."""
        hdim = self.hidden
        in_dim = self.wx.shape[0]
        xproj = affine(seq.reshape(batch * steps, in_dim), self.wx, self.bias)
        xproj = xproj.reshape(batch, steps, 4 * hdim)
        h = constant(np.zeros((batch, hdim)))
        c = constant(np.zeros((batch, hdim)))
        outputs = []
        for t in range(steps):
            gates = xproj[:, t, :] + h @ self.wh
            i_gate = gates[:, :hdim].sigmoid()
            f_gate = gates[:, hdim : 2 * hdim].sigmoid()
            g_gate = gates[:, 2 * hdim : 3 * hdim].tanh()
            o_gate = gates[:, 3 * hdim :].sigmoid()
            c = f_gate * c + i_gate * g_gate
            h = o_gate * c.tanh()
            outputs.append(h.reshape(batch, 1, hdim))
        return concat(outputs, axis=1)


class RecurrentForecaster(Forecaster):
    name = "rnn"

    def __init__(self, config: RecurrentConfig = RecurrentConfig()):
        self.config = config
        self._layers: list[_LstmLayer] = []
        self._head_w: Tensor | None = None
        self._head_b: Tensor | None = None
        self._last_window: np.ndarray | None = None
        self.final_loss: float | None = None

    def _params(self) -> list[Tensor]:
        params: list[Tensor] = []
        for layer in self._layers:
            params.extend(layer.params())
        params.extend([self._head_w, self._head_b])
        return params

    def _forward(self, x: np.ndarray) -> Tensor:
        batch, steps = x.shape
        seq = constant(x.reshape(batch, steps, 1))
        for layer in self._layers:
            seq = layer.forward(seq, batch, steps)
        final_h = seq[:, steps - 1, :]
        return affine(final_h, self._head_w, self._head_b)

    def fit(self, values: Sequence[float], seed: int = 0) -> "RecurrentForecaster":
        cfg = self.config
        arr = np.asarray(values, dtype=np.float64)
        if arr.size < cfg.window + 1:
            raise ValueError(
                f"series of length {arr.size} too short for window {cfg.window}"
            )
        x, y = make_windows(arr, cfg.window)
        rng = derive_rng(seed, self.name)

        self._layers = []
        in_dim = 1
        for _ in range(cfg.layers):
            self._layers.append(_LstmLayer(in_dim, cfg.hidden_units, rng))
            in_dim = cfg.hidden_units
        self._head_w = parameter((cfg.hidden_units, 1), rng=rng, fan_in=cfg.hidden_units)
        self._head_b = Tensor(np.zeros(1), requires_grad=True)

        params = self._params()
        state = AdamState.for_params([p.data for p in params])
        target = y.reshape(-1, 1)
        for epoch in range(cfg.epochs):
            zero_grads(params)
            loss = mse_loss(self._forward(x), target)
            if not np.isfinite(loss.data):
                raise FitDivergedError(epoch, float(loss.data))
            backward(loss)
            new_data, state = adam_step(
                [p.data for p in params], [p.grad for p in params], state, cfg.learning_rate
            )
            for p, d in zip(params, new_data):
                p.data = d
        self.final_loss = float(mse_loss(self._forward(x), target).data)
        self._last_window = arr[-cfg.window :].copy()
        return self

    def predict(self, horizon: int) -> np.ndarray:
        if self._last_window is None:
            raise RuntimeError("predict before fit")
        if horizon == 0:
            return np.empty(0)
        window = list(self._last_window)
        out = []
        for _ in range(horizon):
            x = np.asarray(window[-self.config.window :], dtype=np.float64).reshape(1, -1)
            step = float(self._forward(x).data[0, 0])
            out.append(step)
            window.append(step)
        return np.asarray(out)
