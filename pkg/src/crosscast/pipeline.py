"""End-to-end steps with file artifacts in a working directory.

Each step reads the artifacts of the previous one:

    candles.csv -> features.csv / dataset.csv -> model_<m>.json (+ scaler.json)
    -> forecast.json -> report_<m>.json -> comparison.json

Every JSON artifact carries ``schema_version`` and ``kind``; loading checks both.
"""
from __future__ import annotations

import dataclasses
import datetime as dt
import json
import logging
import os
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import dataset as ds_mod
from . import lstm, mlr
from .dataset import FEATURE_COLUMNS, HORIZON, Scaler
from .evaluation import compare_reports, format_table
from .indicators import IndicatorConfig
from .ingest import CandleSeries, load_csv, to_csv, validate_series
from .phase import ACTUAL, PhaseConfig, PhaseReport, SplicedSeries, build_report, report_for

log = logging.getLogger(__name__)

SCHEMA_VERSION = 1
MODELS = ("mlr", "lstm")
SEED_ENV = "CROSSCAST_SEED"


class PipelineError(RuntimeError):
    pass


@dataclass
class RunConfig:
    workdir: Path = Path("crosscast_run")
    input: Path | None = None
    gap_policy: str = "reject"
    model: str = "both"
    features: tuple[str, ...] = FEATURE_COLUMNS
    train_fraction: float = 0.75
    ridge: float = 0.0
    date: dt.date | None = None
    indicators: IndicatorConfig = field(default_factory=IndicatorConfig)
    training: lstm.TrainConfig = field(default_factory=lstm.TrainConfig)
    phase: PhaseConfig = field(default_factory=PhaseConfig)

    def models(self) -> tuple[str, ...]:
        if self.model == "both":
            return MODELS
        if self.model not in MODELS:
            raise PipelineError(f"unknown model {self.model!r}")
        return (self.model,)


def default_seed() -> int:
    raw = os.environ.get(SEED_ENV)
    if raw is None or raw == "":
        return 0
    try:
        return int(raw)
    except ValueError:
        raise PipelineError(f"{SEED_ENV} must be an integer, got {raw!r}") from None


# ---------------------------------------------------------------- artifacts

def dump_json(path: Path, kind: str, payload: dict) -> None:
    body = {"schema_version": SCHEMA_VERSION, "kind": kind, **payload}
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(body, indent=2) + "\n", encoding="utf-8")


def load_json(path: Path, kind: str, what: str) -> dict:
    if not path.exists():
        raise PipelineError(f"{what} artifact not found: {path}")
    obj = json.loads(path.read_text(encoding="utf-8"))
    if obj.get("schema_version") != SCHEMA_VERSION:
        raise PipelineError(f"{path}: schema version {obj.get('schema_version')!r}, "
                            f"expected {SCHEMA_VERSION}")
    if obj.get("kind") != kind:
        raise PipelineError(f"{path}: expected a {kind} artifact, found {obj.get('kind')!r}")
    return obj


def _candles_path(cfg: RunConfig) -> Path:
    return cfg.workdir / "candles.csv"


def load_candles(cfg: RunConfig) -> CandleSeries:
    path = _candles_path(cfg)
    if not path.exists():
        raise PipelineError(f"candle artifact not found: {path} (run `ingest` first)")
    return load_csv(path)


# ---------------------------------------------------------------- steps

def ingest(cfg: RunConfig) -> CandleSeries:
    if cfg.input is None:
        raise PipelineError("ingest needs an input CSV")
    if not Path(cfg.input).exists():
        raise PipelineError(f"input CSV not found: {cfg.input}")
    series = validate_series(load_csv(cfg.input), cfg.gap_policy)
    cfg.workdir.mkdir(parents=True, exist_ok=True)
    _candles_path(cfg).write_text(to_csv(series), encoding="utf-8")
    log.info("ingested %d candles (%d forward-filled)", len(series), series.fills)
    return series


def features(cfg: RunConfig) -> ds_mod.Dataset:
    series = load_candles(cfg)
    (cfg.workdir / "features.csv").write_text(ds_mod.features_to_csv(series, cfg.indicators),
                                              encoding="utf-8")
    table = ds_mod.build_features(series, cfg.indicators, cfg.features)
    data = ds_mod.attach_targets(table, HORIZON)
    (cfg.workdir / "dataset.csv").write_text(ds_mod.dataset_to_csv(data), encoding="utf-8")
    return data


def _prepared(cfg: RunConfig):
    series = load_candles(cfg)
    table = ds_mod.build_features(series, cfg.indicators, cfg.features)
    data = ds_mod.attach_targets(table, HORIZON)
    train_ds, test_ds = ds_mod.chrono_split(data, cfg.train_fraction)
    scaler = ds_mod.fit_scaler(train_ds)
    return train_ds, test_ds, scaler


def _model_meta(cfg: RunConfig, train_ds, test_ds, scaler: Scaler) -> dict:
    return {
        "feature_names": list(cfg.features),
        "indicators": dataclasses.asdict(cfg.indicators),
        "train_fraction": cfg.train_fraction,
        "train_rows": len(train_ds),
        "test_rows": len(test_ds),
        "train_end": train_ds.dates[-1].isoformat(),
        "scaler": scaler.to_json(),
    }


def train(cfg: RunConfig) -> dict[str, Path]:
    train_ds, test_ds, scaler = _prepared(cfg)
    scaled = ds_mod.apply_scaler(train_ds, scaler)
    dump_json(cfg.workdir / "scaler.json", "scaler", scaler.to_json())
    written = {}
    for name in cfg.models():
        meta = _model_meta(cfg, train_ds, test_ds, scaler)
        path = cfg.workdir / f"model_{name}.json"
        if name == "mlr":
            bank = mlr.fit_bank(scaled, ridge=cfg.ridge)
            test_scaled = ds_mod.apply_scaler(test_ds, scaler)
            pred = mlr.predict_bank(bank, test_scaled.X)
            r2 = [_safe_r2(test_scaled.Y[:, h], pred[:, h]) for h in range(pred.shape[1])]
            dump_json(path, "model_mlr", {**meta, "ridge": cfg.ridge, "test_r2": r2, **bank.to_json()})
        else:
            tc = cfg.training
            params, history = lstm.train(scaled, tc)
            dump_json(path, "model_lstm", {**meta, "train_config": dataclasses.asdict(tc),
                                           "params": params.to_json()})
            lines = ["epoch,loss"] + [f"{e},{loss!r}" for e, loss in enumerate(history, start=1)]
            (cfg.workdir / "lstm_history.csv").write_text("\n".join(lines) + "\n", encoding="utf-8")
        written[name] = path
    return written


def _safe_r2(y, p):
    try:
        return mlr.r2_score(y, p)
    except ValueError:
        return None


def _load_model(cfg: RunConfig, name: str) -> dict:
    return load_json(cfg.workdir / f"model_{name}.json", f"model_{name}", "model")


def _trained_models(cfg: RunConfig) -> list[str]:
    wanted = cfg.models()
    present = [m for m in wanted if (cfg.workdir / f"model_{m}.json").exists()]
    if not present:
        raise PipelineError(f"model artifact not found in {cfg.workdir} (run `train` first)")
    return present


def forecast_one(model: dict, series: CandleSeries, anchor: dt.date) -> np.ndarray:
    """22 closes (h = 0..21) forecast from the features of ``anchor``, in price units."""
    icfg = IndicatorConfig(**model["indicators"])
    table = ds_mod.build_features(series.until(anchor), icfg, model["feature_names"])
    if not table.dates or table.dates[-1] != anchor:
        raise PipelineError(f"no feature row for {anchor}")
    scaler = Scaler.from_json(model["scaler"])
    X = scaler.transform_X(table.matrix())
    if model["kind"] == "model_mlr":
        bank = mlr.MlrBank.from_json(model)
        scaled = mlr.predict_bank(bank, X[-1:])[0]
    else:
        tc = lstm.TrainConfig(**{**model["train_config"],
                                 "dense_sizes": tuple(model["train_config"]["dense_sizes"])})
        if len(X) < tc.window_length:
            raise PipelineError(f"{anchor}: need {tc.window_length} feature rows for an LSTM window, "
                                f"have {len(X)}")
        params = lstm.LstmParams.from_json(model["params"])
        scaled = lstm.forward(params, X[-tc.window_length:])[0]
    return scaler.inverse_Y(scaled)


def predict(cfg: RunConfig) -> dict:
    series = load_candles(cfg)
    anchor = cfg.date or series.dates[-1]
    if anchor not in set(series.dates):
        raise PipelineError(f"date {anchor} not in candle history")
    forecasts = {}
    for name in _trained_models(cfg):
        forecasts[name] = forecast_one(_load_model(cfg, name), series, anchor).tolist()
    payload = {
        "anchor_date": anchor.isoformat(),
        "dates": [(anchor + dt.timedelta(days=h)).isoformat() for h in range(HORIZON + 1)],
        "models": forecasts,
    }
    dump_json(cfg.workdir / "forecast.json", "forecast", payload)
    return payload


def detect(cfg: RunConfig) -> dict[str, PhaseReport]:
    series = load_candles(cfg)
    fc = load_json(cfg.workdir / "forecast.json", "forecast", "forecast")
    anchor = dt.date.fromisoformat(fc["anchor_date"])
    history = series.until(anchor)
    reports = {}
    for name, closes in fc["models"].items():
        rep = build_report(history, closes, cfg.phase)
        reports[name] = rep
        dump_json(cfg.workdir / f"report_{name}.json", "phase_report", rep.to_json())
        (cfg.workdir / f"report_{name}.csv").write_text(rep.to_csv(), encoding="utf-8")
        for ev in rep.advance_events:
            log.info("%s: advance %s cross on %s", name, ev.kind, ev.date)

    actual_path = cfg.workdir / "report_actual.json"
    horizon_end = anchor + dt.timedelta(days=len(next(iter(fc["models"].values()))) - 1)
    truth = series.until(horizon_end)
    if truth.dates and truth.dates[-1] == horizon_end:
        rep = report_for(SplicedSeries(truth.dates, truth.closes, [ACTUAL] * len(truth)), cfg.phase)
        reports["actual"] = rep
        dump_json(actual_path, "phase_report", rep.to_json())
    elif actual_path.exists():
        actual_path.unlink()
    return reports


def evaluate(cfg: RunConfig) -> dict:
    actual_path = cfg.workdir / "report_actual.json"
    if not actual_path.exists():
        raise PipelineError("actual closes do not cover the forecast window; "
                            "run `predict --date` with an earlier anchor, then `detect`")
    actual = PhaseReport.from_json(load_json(actual_path, "phase_report", "actual report"))
    models = {}
    for name in MODELS:
        path = cfg.workdir / f"report_{name}.json"
        if path.exists():
            models[name] = PhaseReport.from_json(load_json(path, "phase_report", "report"))
    if not models:
        raise PipelineError("phase report artifact not found (run `detect` first)")
    summary = compare_reports(models, actual)
    dump_json(cfg.workdir / "comparison.json", "comparison", summary)
    summary["table"] = format_table(summary)
    return summary
