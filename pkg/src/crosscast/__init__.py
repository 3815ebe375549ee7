"""Multi-horizon close forecasting (per-horizon OLS and an LSTM) with
golden/death cross detection on the projected 50/200-day moving averages."""

from .dataset import (FEATURE_COLUMNS, Dataset, FeatureTable, Scaler, apply_scaler,
                      attach_targets, build_features, chrono_split, fit_scaler)
from .indicators import IndicatorConfig
from .ingest import Candle, CandleSeries, parse_candles, validate_series
from .lstm import LstmParams, TrainConfig
from .mlr import MlrBank, fit_bank, fit_ols, predict_bank, r2_score
from .phase import PhaseReport, build_report, detect_crosses

__version__ = "0.1.0"

__all__ = [
    "FEATURE_COLUMNS", "Candle", "CandleSeries", "Dataset", "FeatureTable", "IndicatorConfig",
    "LstmParams", "MlrBank", "PhaseReport", "Scaler", "TrainConfig", "apply_scaler",
    "attach_targets", "build_features", "build_report", "chrono_split", "detect_crosses",
    "fit_bank", "fit_ols", "fit_scaler", "parse_candles", "predict_bank", "r2_score",
    "validate_series",
]
