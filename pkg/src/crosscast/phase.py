"""Golden/death cross detection over history spliced with a 21-day forecast."""
from __future__ import annotations

import csv
import datetime as dt
import io
from dataclasses import dataclass

import numpy as np

from .indicators import sma
from .ingest import CandleSeries

ACTUAL = "actual"
PREDICTED = "predicted"
GOLDEN = "golden"
DEATH = "death"
BULL = "bull"
BEAR = "bear"


@dataclass(frozen=True)
class SplicedSeries:
    dates: list[dt.date]
    closes: np.ndarray
    provenance: list[str]

    def __len__(self) -> int:
        return len(self.dates)


@dataclass(frozen=True)
class CrossEvent:
    index: int
    date: dt.date | None
    kind: str
    short_ma: float
    long_ma: float
    advance: bool = False


@dataclass(frozen=True)
class PhaseReport:
    series: SplicedSeries
    sma_short: np.ndarray
    sma_long: np.ndarray
    events: list[CrossEvent]
    labels: list[str | None]
    short_window: int = 50
    long_window: int = 200

    @property
    def advance_events(self) -> list[CrossEvent]:
        return [e for e in self.events if e.advance]

    def to_json(self) -> dict:
        def num(v):
            return None if np.isnan(v) else float(v)
        return {
            "dates": [d.isoformat() for d in self.series.dates],
            "close": [float(c) for c in self.series.closes],
            "provenance": list(self.series.provenance),
            f"sma{self.short_window}": [num(v) for v in self.sma_short],
            f"sma{self.long_window}": [num(v) for v in self.sma_long],
            "labels": list(self.labels),
            "events": [{"date": e.date.isoformat(), "kind": e.kind, "short": e.short_ma,
                        "long": e.long_ma, "advance": e.advance} for e in self.events],
        }

    @classmethod
    def from_json(cls, obj: dict) -> "PhaseReport":
        windows = sorted(int(k[3:]) for k in obj if k.startswith("sma"))
        short, long_ = windows[0], windows[-1]
        def arr(key):
            return np.array([np.nan if v is None else v for v in obj[key]], dtype=float)
        dates = [dt.date.fromisoformat(d) for d in obj["dates"]]
        pos = {d: i for i, d in enumerate(dates)}
        events = [CrossEvent(pos[dt.date.fromisoformat(e["date"])], dt.date.fromisoformat(e["date"]),
                             e["kind"], e["short"], e["long"], e["advance"]) for e in obj["events"]]
        series = SplicedSeries(dates, np.array(obj["close"], dtype=float), list(obj["provenance"]))
        return cls(series, arr(f"sma{short}"), arr(f"sma{long_}"), events, list(obj["labels"]),
                   short, long_)

    def to_csv(self) -> str:
        out = io.StringIO()
        w = csv.writer(out, lineterminator="\n")
        w.writerow(["date", "close", "provenance", f"sma{self.short_window}",
                    f"sma{self.long_window}", "label", "event"])
        by_index = {e.index: e.kind for e in self.events}
        for k, d in enumerate(self.series.dates):
            w.writerow([d.isoformat(), repr(float(self.series.closes[k])), self.series.provenance[k],
                        "" if np.isnan(self.sma_short[k]) else repr(float(self.sma_short[k])),
                        "" if np.isnan(self.sma_long[k]) else repr(float(self.sma_long[k])),
                        self.labels[k] or "", by_index.get(k, "")])
        return out.getvalue()


def splice(history: CandleSeries, forecast) -> SplicedSeries:
    """Append horizons 1..21 of a forecast made on the last history day.

    ``forecast[0]`` (same-day close) is dropped: that close is already known.
    """
    if len(history) == 0:
        raise ValueError("cannot splice onto an empty history")
    forecast = np.asarray(forecast, dtype=float)
    if forecast.ndim != 1 or len(forecast) < 2:
        raise ValueError("forecast must be a vector of closes for horizons 0..H")
    ahead = forecast[1:]
    last = history.dates[-1]
    future = [last + dt.timedelta(days=h) for h in range(1, len(ahead) + 1)]
    return SplicedSeries(
        dates=history.dates + future,
        closes=np.concatenate([history.closes, ahead]),
        provenance=[ACTUAL] * len(history) + [PREDICTED] * len(ahead),
    )


def project_mas(s: SplicedSeries, short: int = 50, long: int = 200) -> tuple[np.ndarray, np.ndarray]:
    if len(s) < long:
        raise ValueError(f"series of {len(s)} days is shorter than the {long}-day window")
    return sma(s.closes, short), sma(s.closes, long)


def _signs(diff: np.ndarray) -> np.ndarray:
    """Sign of short - long with ties carrying the previous sign.

    Undefined (NaN) days reset the carry; a tie with nothing to carry is 0.
    """
    raw = np.sign(np.nan_to_num(diff, nan=0.0)).astype(int)
    anchor = (raw != 0) | np.isnan(diff)
    last = np.maximum.accumulate(np.where(anchor, np.arange(len(diff)), 0))
    return raw[last] if len(diff) else raw


def detect_crosses(sma_short, sma_long, dates=None) -> list[CrossEvent]:
    """Events where the tie-carried sign of ``short - long`` takes a new nonzero value.

    The first jointly defined day sets the initial regime and is never an event.
    A departure from an all-tie prefix does count (short moving off an equal long
    MA crosses it in that direction).
    """
    sma_short = np.asarray(sma_short, dtype=float)
    sma_long = np.asarray(sma_long, dtype=float)
    if sma_short.shape != sma_long.shape:
        raise ValueError("moving averages must be aligned")
    diff = sma_short - sma_long
    signs = _signs(diff)
    defined = ~np.isnan(diff)
    hit = np.zeros(len(diff), dtype=bool)
    hit[1:] = defined[1:] & defined[:-1] & (signs[1:] != 0) & (signs[1:] != signs[:-1])
    return [CrossEvent(int(k), dates[k] if dates is not None else None,
                       GOLDEN if signs[k] > 0 else DEATH,
                       float(sma_short[k]), float(sma_long[k]))
            for k in np.flatnonzero(hit)]


def label_phases(sma_short, sma_long) -> list[str | None]:
    """Bull where short > long, bear where below; ties carry the previous label (bear if none)."""
    sma_short = np.asarray(sma_short, dtype=float)
    sma_long = np.asarray(sma_long, dtype=float)
    signs = _signs(sma_short - sma_long)
    defined = ~(np.isnan(sma_short) | np.isnan(sma_long))
    return [None if not ok else (BULL if s > 0 else BEAR) for s, ok in zip(signs, defined)]


@dataclass(frozen=True)
class PhaseConfig:
    short_window: int = 50
    long_window: int = 200


def report_for(s: SplicedSeries, cfg: PhaseConfig = PhaseConfig()) -> PhaseReport:
    short, long_ = project_mas(s, cfg.short_window, cfg.long_window)
    events = [
        CrossEvent(e.index, s.dates[e.index], e.kind, e.short_ma, e.long_ma,
                   advance=s.provenance[e.index] == PREDICTED)
        for e in detect_crosses(short, long_)
    ]
    return PhaseReport(s, short, long_, events, label_phases(short, long_),
                       cfg.short_window, cfg.long_window)


def build_report(history: CandleSeries, forecast, cfg: PhaseConfig = PhaseConfig()) -> PhaseReport:
    return report_for(splice(history, forecast), cfg)


def actual_series(history: CandleSeries) -> SplicedSeries:
    return SplicedSeries(history.dates, history.closes, [ACTUAL] * len(history))
