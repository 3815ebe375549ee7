"""Supervised table construction: features, 22 future-close targets, split, scaling."""
from __future__ import annotations

import csv
import datetime as dt
import io
import json
from dataclasses import dataclass, field, replace

import numpy as np

from .indicators import IndicatorConfig, compute_all
from .ingest import CandleSeries

FEATURE_COLUMNS = (
    "open", "high", "low", "close", "volume",
    "rsi", "macd_line", "macd_signal", "momentum",
    "bb_upper", "bb_lower", "roc",
)
HORIZON = 21


class DatasetError(ValueError):
    pass


@dataclass(frozen=True)
class FeatureTable:
    dates: list[dt.date]
    columns: dict[str, np.ndarray]
    feature_names: list[str]
    closes: np.ndarray

    def __len__(self) -> int:
        return len(self.dates)

    def matrix(self) -> np.ndarray:
        return np.column_stack([self.columns[name] for name in self.feature_names])


@dataclass(frozen=True)
class Dataset:
    X: np.ndarray
    Y: np.ndarray
    dates: list[dt.date]
    feature_names: list[str] = field(default_factory=list)

    def __len__(self) -> int:
        return len(self.dates)

    def rows(self, sl: slice) -> "Dataset":
        return replace(self, X=self.X[sl], Y=self.Y[sl], dates=self.dates[sl])


@dataclass(frozen=True)
class Scaler:
    means: np.ndarray
    stds: np.ndarray
    target_scale: float

    def transform_X(self, X: np.ndarray) -> np.ndarray:
        X = np.asarray(X, dtype=float)
        if X.shape[-1] != len(self.means):
            raise DatasetError(f"scaler expects {len(self.means)} features, got {X.shape[-1]}")
        return (X - self.means) / self.stds

    def inverse_X(self, Z: np.ndarray) -> np.ndarray:
        return np.asarray(Z) * self.stds + self.means

    def transform_Y(self, Y: np.ndarray) -> np.ndarray:
        return np.asarray(Y, dtype=float) / self.target_scale

    def inverse_Y(self, Z: np.ndarray) -> np.ndarray:
        return np.asarray(Z, dtype=float) * self.target_scale

    def to_json(self) -> dict:
        return {"means": self.means.tolist(), "stds": self.stds.tolist(),
                "target_scale": self.target_scale}

    @classmethod
    def from_json(cls, obj: dict) -> "Scaler":
        return cls(np.array(obj["means"], dtype=float), np.array(obj["stds"], dtype=float),
                   float(obj["target_scale"]))


def all_indicator_columns(series: CandleSeries, cfg: IndicatorConfig) -> dict[str, np.ndarray]:
    return compute_all(series.column("open"), series.column("high"), series.column("low"),
                       series.closes, series.column("volume"), cfg)


def build_features(series: CandleSeries, cfg: IndicatorConfig | None = None,
                   selected=FEATURE_COLUMNS) -> FeatureTable:
    """Compute indicators and drop the leading rows where any selected column is undefined."""
    cfg = cfg or IndicatorConfig()
    selected = list(selected)
    unknown = [name for name in selected if name not in FEATURE_COLUMNS]
    if unknown:
        raise DatasetError(f"unknown feature(s): {', '.join(unknown)}; "
                           f"available: {', '.join(FEATURE_COLUMNS)}")
    if not selected:
        raise DatasetError("no features selected")
    cols = all_indicator_columns(series, cfg)
    chosen = np.column_stack([cols[name] for name in selected]) if len(series) else np.empty((0, 0))
    defined = ~np.isnan(chosen).any(axis=1) if len(series) else np.array([], dtype=bool)
    if not defined.any():
        raise DatasetError(f"series of {len(series)} days is too short to survive indicator warmup")
    start = int(np.argmax(defined))
    if not defined[start:].all():
        raise DatasetError("undefined feature values after warmup")
    return FeatureTable(
        dates=series.dates[start:],
        columns={name: cols[name][start:] for name in selected},
        feature_names=selected,
        closes=series.closes[start:],
    )


def attach_targets(table: FeatureTable, horizon: int = HORIZON) -> Dataset:
    """Targets are closes at h = 0..horizon; the last ``horizon`` rows are dropped."""
    n = len(table)
    if n <= horizon:
        raise DatasetError(f"need more than {horizon} rows to attach targets, got {n}")
    rows = n - horizon
    Y = np.column_stack([table.closes[h:h + rows] for h in range(horizon + 1)])
    return Dataset(X=table.matrix()[:rows], Y=Y, dates=table.dates[:rows],
                   feature_names=list(table.feature_names))


def chrono_split(ds: Dataset, train_fraction: float = 0.75) -> tuple[Dataset, Dataset]:
    """Earliest ``floor(fraction * n)`` rows train; the latest remainder tests."""
    if not 0 < train_fraction < 1:
        raise DatasetError("train_fraction must lie strictly between 0 and 1")
    n_train = int(np.floor(train_fraction * len(ds)))
    if n_train == 0 or n_train == len(ds):
        raise DatasetError(f"split of {len(ds)} rows at {train_fraction} leaves an empty partition")
    return ds.rows(slice(0, n_train)), ds.rows(slice(n_train, None))


def fit_scaler(train: Dataset) -> Scaler:
    if len(train) == 0:
        raise DatasetError("cannot fit a scaler on an empty dataset")
    means = train.X.mean(axis=0)
    stds = train.X.std(axis=0)
    const = [name for name, s in zip(train.feature_names, stds) if not s > 0]
    if const:
        raise DatasetError(f"constant feature column(s): {', '.join(const)}")
    target_scale = float(train.Y[:, 0].max())
    if not target_scale > 0:
        raise DatasetError("max training close must be positive")
    return Scaler(means, stds, target_scale)


def apply_scaler(ds: Dataset, scaler: Scaler) -> Dataset:
    return replace(ds, X=scaler.transform_X(ds.X), Y=scaler.transform_Y(ds.Y))


def dataset_to_csv(ds: Dataset) -> str:
    out = io.StringIO()
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(["date", *ds.feature_names, *[f"target_h{h}" for h in range(ds.Y.shape[1])]])
    for date, x, y in zip(ds.dates, ds.X, ds.Y):
        writer.writerow([date.isoformat(), *map(repr, x.tolist()), *map(repr, y.tolist())])
    return out.getvalue()


def dataset_from_csv(text: str) -> Dataset:
    reader = csv.reader(io.StringIO(text))
    header = next(reader)
    targets = [i for i, h in enumerate(header) if h.startswith("target_h")]
    feats = [i for i in range(1, len(header)) if i not in targets]
    dates, xs, ys = [], [], []
    for row in reader:
        dates.append(dt.date.fromisoformat(row[0]))
        xs.append([float(row[i]) for i in feats])
        ys.append([float(row[i]) for i in targets])
    return Dataset(X=np.array(xs, dtype=float).reshape(len(dates), len(feats)),
                   Y=np.array(ys, dtype=float).reshape(len(dates), len(targets)),
                   dates=dates, feature_names=[header[i] for i in feats])


def features_to_csv(series: CandleSeries, cfg: IndicatorConfig) -> str:
    """All indicator columns for every day; warmup cells are left empty."""
    cols = all_indicator_columns(series, cfg)
    names = list(cols)
    out = io.StringIO()
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(["date", *names])
    for i, date in enumerate(series.dates):
        writer.writerow([date.isoformat(),
                         *("" if np.isnan(cols[n][i]) else repr(float(cols[n][i])) for n in names)])
    return out.getvalue()


def scaler_dumps(scaler: Scaler) -> str:
    return json.dumps(scaler.to_json(), indent=2)
