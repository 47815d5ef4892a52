"""The backtest grid: split, normalize, fit, predict, invert, record.

Every (series, model) cell runs independently; a cell failure is recorded and
never aborts the rest of the grid. RNG streams derive from (global seed,
series key, model name), so outputs do not depend on execution order.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, fields
from typing import Sequence

import numpy as np

from popcast.core import AnnualSeries, SeriesKey, SplitSpec, minmax_apply, minmax_fit, minmax_invert, temporal_split
from popcast.eval import ForecastResult
from popcast.forecasters import (
    ArimaConfig,
    ArimaForecaster,
    LinearTrendForecaster,
    MODEL_NAMES,
    PatchDecoderConfig,
    PatchDecoderForecaster,
    RecurrentConfig,
    RecurrentForecaster,
)
from popcast.ingest import Dataset

__all__ = ["RunConfig", "run_experiment", "results_to_json", "results_from_json"]


@dataclass(frozen=True)
class RunConfig:
    """Fully resolved run parameters; serializes to flat section.key lines."""

    dataset_path: str = ""
    models: tuple[str, ...] = MODEL_NAMES
    split: SplitSpec = SplitSpec()
    seed: int = 0
    arima: ArimaConfig = ArimaConfig()
    recurrent: RecurrentConfig = RecurrentConfig()
    patch: PatchDecoderConfig = PatchDecoderConfig()

    def __post_init__(self) -> None:
        unknown = [m for m in self.models if m not in MODEL_NAMES]
        if unknown:
            raise ValueError(f"unknown model names {unknown}; choose from {MODEL_NAMES}")
        if not self.models:
            raise ValueError("no models selected")
        if not 0 <= self.seed < 2**64:
            raise ValueError("seed must be a 64-bit unsigned integer")

    def to_flat(self) -> dict[str, str]:
        flat = {
            "run.dataset": self.dataset_path,
            "run.models": ",".join(self.models),
            "run.seed": str(self.seed),
            "split.train_end": str(self.split.train_end_year),
            "split.test_start": str(self.split.test_start_year),
            "split.test_end": str(self.split.test_end_year),
        }
        for section, config in (
            ("arima", self.arima),
            ("rnn", self.recurrent),
            ("patchtf", self.patch),
        ):
            for f in fields(config):
                flat[f"{section}.{f.name}"] = repr(getattr(config, f.name))
        return flat


def _cell_seed(seed: int, label: str) -> int:
    digest = hashlib.sha256(f"{seed}:{label}".encode("utf-8")).digest()
    return int.from_bytes(digest[:8], "little")


def _prepared(series: AnnualSeries, split: SplitSpec):
    train, test = temporal_split(series, split)
    params = minmax_fit(train)
    return train, test, params, minmax_apply(params, train.values)


def run_experiment(
    dataset: Dataset, config: RunConfig
) -> tuple[list[ForecastResult], list[dict[str, str]]]:
    """Run every (key, model) cell; returns (results, failures)."""
    keys = dataset.sorted_keys()
    results: list[ForecastResult] = []
    failures: list[dict[str, str]] = []

    def record_failure(key: SeriesKey, model: str, exc: Exception) -> None:
        failures.append(
            {
                "state": key.state.value,
                "race": key.race.value,
                "model": model,
                "error": f"{type(exc).__name__}: {exc}",
            }
        )

    def record(key: SeriesKey, model: str, test: AnnualSeries, predicted: np.ndarray) -> None:
        results.append(
            ForecastResult(
                key=key,
                model_name=model,
                years=test.years,
                predicted=tuple(float(v) for v in predicted),
                actual=test.values,
            )
        )

    for model in config.models:
        if model == "patchtf":
            _run_patch_decoder(dataset, config, keys, record, record_failure)
            continue
        for key in keys:
            try:
                train, test, params, ntrain = _prepared(dataset.series[key], config.split)
                horizon = len(test)
                if model == "lr":
                    forecaster = LinearTrendForecaster().fit(train.years, ntrain)
                    normalized = forecaster.predict(horizon)
                elif model == "arima":
                    forecaster = ArimaForecaster(config.arima).fit(ntrain)
                    normalized = forecaster.predict(horizon)
                elif model == "rnn":
                    forecaster = RecurrentForecaster(config.recurrent).fit(
                        ntrain, seed=_cell_seed(config.seed, str(key))
                    )
                    normalized = forecaster.predict(horizon)
                else:  # pragma: no cover - guarded by RunConfig
                    raise ValueError(f"unknown model {model}")
                record(key, model, test, minmax_invert(params, normalized))
            except Exception as exc:
                record_failure(key, model, exc)
    return results, failures


def _run_patch_decoder(dataset, config, keys, record, record_failure) -> None:
    # One model per state, trained on all of that state's normalized series.
    by_state: dict = {}
    for key in keys:
        by_state.setdefault(key.state, []).append(key)
    for state in sorted(by_state, key=lambda s: s.value):
        state_keys = by_state[state]
        prepared = {}
        trainable = []
        for key in state_keys:
            try:
                prepared[key] = _prepared(dataset.series[key], config.split)
                trainable.append(prepared[key][3])
            except Exception as exc:
                record_failure(key, "patchtf", exc)
        if not trainable:
            continue
        try:
            model = PatchDecoderForecaster(config.patch).fit(
                trainable, seed=_cell_seed(config.seed, state.value)
            )
        except Exception as exc:
            for key in prepared:
                record_failure(key, "patchtf", exc)
            continue
        for key, (train, test, params, ntrain) in prepared.items():
            try:
                normalized = model.predict(ntrain, len(test))
                record(key, "patchtf", test, minmax_invert(params, normalized))
            except Exception as exc:
                record_failure(key, "patchtf", exc)


def results_to_json(
    config: RunConfig,
    results: Sequence[ForecastResult],
    failures: Sequence[dict[str, str]],
) -> str:
    doc = {
        "seed": config.seed,
        "config": config.to_flat(),
        "results": [
            {
                "state": r.key.state.value,
                "race": r.key.race.value,
                "model": r.model_name,
                "years": list(r.years),
                "predicted": list(r.predicted),
                "actual": list(r.actual),
            }
            for r in results
        ],
        "failures": list(failures),
    }
    return json.dumps(doc, indent=2, sort_keys=True) + "\n"


def results_from_json(text: str) -> tuple[dict[str, str], list[ForecastResult], list[dict[str, str]]]:
    """Returns (flat config, results, failures) from a results document."""
    doc = json.loads(text)
    results = [
        ForecastResult(
            key=SeriesKey.parse(f"{entry['state']}/{entry['race']}"),
            model_name=entry["model"],
            years=tuple(int(y) for y in entry["years"]),
            predicted=tuple(float(v) for v in entry["predicted"]),
            actual=tuple(float(v) for v in entry["actual"]),
        )
        for entry in doc["results"]
    ]
    return doc["config"], results, list(doc.get("failures", []))
