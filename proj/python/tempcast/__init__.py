"""Daily temperature forecasting with a CNN-LSTM and three baselines."""

import json

import numpy as np

from ._tempcast import (
    Model,
    TempcastError,
    evaluate,
    explained_variance,
    fit_linreg,
    fit_normalization,
    mae,
    make_windows,
    r2_score,
    read_csv,
    score,
    synthetic_series,
    train,
)
from ._tempcast import compare as _compare
from ._tempcast import load_city as _load_city

__all__ = [
    "Model",
    "TempcastError",
    "compare",
    "evaluate",
    "explained_variance",
    "fit_linreg",
    "fit_normalization",
    "load_city",
    "mae",
    "make_windows",
    "r2_score",
    "read_csv",
    "score",
    "synthetic_series",
    "train",
]


def load_city(path, city, missing="interpolate", missing_threshold=-90.0):
    """Cleaned daily series for one city as (key, dates, values)."""
    key, days, values = _load_city(str(path), city, missing, missing_threshold)
    return key, days.astype("datetime64[D]"), values


def compare(values, seeds=(0,), models=("linreg", "cnn", "lstm", "cnn-lstm"), **kwargs):
    """Trains each model per seed and returns (rows, table)."""
    rows, table = _compare(np.asarray(values, dtype=float), list(seeds), list(models), **kwargs)
    return json.loads(rows), table
