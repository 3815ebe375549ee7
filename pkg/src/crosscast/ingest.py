"""Daily OHLCV candles: CSV parsing, serialization and gap validation."""
from __future__ import annotations

import csv
import datetime as dt
import io
from dataclasses import dataclass, replace

import numpy as np

HEADER = ("date", "open", "high", "low", "close", "volume")

REJECT = "reject"
FORWARD_FILL = "fill"


class CandleError(ValueError):
    """Raised for malformed or inconsistent candle data."""


@dataclass(frozen=True)
class Candle:
    date: dt.date
    open: float
    high: float
    low: float
    close: float
    volume: float

    def check(self) -> None:
        if min(self.open, self.high, self.low, self.close) <= 0:
            raise CandleError(f"{self.date}: prices must be strictly positive")
        if self.volume < 0:
            raise CandleError(f"{self.date}: negative volume")
        if not (self.low <= self.open <= self.high and self.low <= self.close <= self.high):
            raise CandleError(f"{self.date}: OHLC invariant violated (low <= open, close <= high)")


@dataclass(frozen=True)
class CandleSeries:
    candles: tuple[Candle, ...]
    fills: int = 0

    def __len__(self) -> int:
        return len(self.candles)

    @property
    def dates(self) -> list[dt.date]:
        return [c.date for c in self.candles]

    def column(self, name: str) -> np.ndarray:
        return np.array([getattr(c, name) for c in self.candles], dtype=float)

    @property
    def closes(self) -> np.ndarray:
        return self.column("close")

    def until(self, date: dt.date) -> "CandleSeries":
        """Prefix of the series ending at ``date`` (inclusive)."""
        return replace(self, candles=tuple(c for c in self.candles if c.date <= date))


def _number(text: str, lineno: int, field: str) -> float:
    try:
        value = float(text)
    except ValueError:
        raise CandleError(f"line {lineno}: unparseable number {text!r} in column {field!r}") from None
    if not np.isfinite(value):
        raise CandleError(f"line {lineno}: non-finite value in column {field!r}")
    return value


def parse_candles(csv_text: str) -> CandleSeries:
    """Parse ``date,open,high,low,close,volume`` CSV text into an ascending series.

    Rows may appear in any order. Errors carry the 1-based line number.
    """
    reader = csv.reader(io.StringIO(csv_text))
    try:
        header = [h.strip() for h in next(reader)]
    except StopIteration:
        raise CandleError("empty input: missing header") from None
    missing = [h for h in HEADER if h not in header]
    if missing:
        raise CandleError(f"missing column(s): {', '.join(missing)}")
    idx = {name: header.index(name) for name in HEADER}

    seen: dict[dt.date, int] = {}
    candles = []
    for lineno, row in enumerate(reader, start=2):
        if not row or all(not cell.strip() for cell in row):
            continue
        if len(row) != len(header):
            raise CandleError(f"line {lineno}: expected {len(header)} fields, got {len(row)}")
        try:
            date = dt.date.fromisoformat(row[idx["date"]].strip())
        except ValueError:
            raise CandleError(f"line {lineno}: bad date {row[idx['date']]!r}") from None
        if date in seen:
            raise CandleError(f"line {lineno}: duplicate date {date} (first seen on line {seen[date]})")
        seen[date] = lineno
        values = {f: _number(row[idx[f]].strip(), lineno, f) for f in HEADER[1:]}
        candles.append(Candle(date=date, **values))

    candles.sort(key=lambda c: c.date)
    return CandleSeries(tuple(candles))


def _fmt(x: float) -> str:
    return repr(float(x))


def to_csv(series: CandleSeries) -> str:
    """Canonical serialization; ``parse_candles(to_csv(s))`` reproduces ``s``."""
    out = io.StringIO()
    out.write(",".join(HEADER) + "\n")
    for c in series.candles:
        out.write(",".join([c.date.isoformat(), _fmt(c.open), _fmt(c.high), _fmt(c.low),
                            _fmt(c.close), _fmt(c.volume)]) + "\n")
    return out.getvalue()


def validate_series(series: CandleSeries, gap_policy: str = REJECT) -> CandleSeries:
    """Check OHLC invariants and one-day spacing.

    Under ``"fill"`` every missing day becomes a flat candle at the previous close
    with zero volume; the number of inserted days is returned in ``fills``.
    """
    if gap_policy not in (REJECT, FORWARD_FILL):
        raise ValueError(f"unknown gap policy {gap_policy!r}")
    one_day = dt.timedelta(days=1)
    out: list[Candle] = []
    fills = 0
    for c in series.candles:
        c.check()
        if out:
            prev = out[-1]
            if c.date <= prev.date:
                raise CandleError(f"dates not strictly increasing at {c.date}")
            day = prev.date + one_day
            if day < c.date and gap_policy == REJECT:
                raise CandleError(f"gap: missing {day.isoformat()}")
            while day < c.date:
                p = prev.close
                out.append(Candle(day, p, p, p, p, 0.0))
                fills += 1
                day += one_day
        out.append(c)
    return CandleSeries(tuple(out), fills=series.fills + fills)


def load_csv(path) -> CandleSeries:
    with open(path, encoding="utf-8") as fh:
        return parse_candles(fh.read())
