"""The four forecaster families behind one fit/predict surface."""

from popcast.forecasters.arima import (
    ArimaForecaster,
    ArimaModel,
    arima_aic,
    arima_css,
    arima_fit,
    arima_forecast,
    arima_select_order,
    difference,
    undifference,
)
from popcast.forecasters.base import (
    ArimaConfig,
    FitDivergedError,
    Forecaster,
    LinearTrendConfig,
    PatchDecoderConfig,
    RecurrentConfig,
    derive_rng,
)
from popcast.forecasters.linear import LinearTrendForecaster
from popcast.forecasters.patch_decoder import PatchDecoderForecaster, patchify
from popcast.forecasters.recurrent import RecurrentForecaster, make_windows

MODEL_NAMES = ("lr", "arima", "rnn", "patchtf")

__all__ = [
    "ArimaConfig",
    "ArimaForecaster",
    "ArimaModel",
    "FitDivergedError",
    "Forecaster",
    "LinearTrendConfig",
    "LinearTrendForecaster",
    "MODEL_NAMES",
    "PatchDecoderConfig",
    "PatchDecoderForecaster",
    "RecurrentConfig",
    "RecurrentForecaster",
    "arima_aic",
    "arima_css",
    "arima_fit",
    "arima_forecast",
    "arima_select_order",
    "derive_rng",
    "difference",
    "make_windows",
    "patchify",
    "undifference",
]
